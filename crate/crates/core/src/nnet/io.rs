//! Model file format (little-endian):
//!
//! ```text
//! "HWM1"                      4 bytes magic
//! u32                         byte length of the JSON descriptor
//! descriptor                  UTF-8 JSON (dims, block table, config echo)
//! f64 * num_params            every block row-major, in block-table order
//! ```
//!
//! Block order: for layer 1 then 2, for the forward then backward direction,
//! `input_weights`, `recurrent_weights`, `bias`; then `head.weights`,
//! `head.bias`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{BiLstmModel, NUM_CLASSES, NUM_LAYERS};
use super::NnetError;
use crate::{Error, Result};

pub const MODEL_MAGIC: &[u8; 4] = b"HWM1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockInfo {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDescriptor {
    pub version: u32,
    pub input_size: usize,
    pub hidden_size: usize,
    pub layers: usize,
    pub classes: usize,
    pub gate_order: String,
    pub blocks: Vec<BlockInfo>,
    /// Free-form echo of the settings that produced the model.
    #[serde(default)]
    pub config: serde_json::Value,
}

impl ModelDescriptor {
    pub fn of(model: &BiLstmModel, config: serde_json::Value) -> Self {
        let blocks = model
            .blocks()
            .into_iter()
            .zip(model.block_shapes())
            .map(|((name, _), (rows, cols))| BlockInfo { name, rows, cols })
            .collect();
        ModelDescriptor {
            version: 1,
            input_size: model.input_size,
            hidden_size: model.hidden_size,
            layers: NUM_LAYERS,
            classes: NUM_CLASSES,
            gate_order: "input,forget,cell,output".into(),
            blocks,
            config,
        }
    }
}

pub fn encode_model(model: &BiLstmModel, config: serde_json::Value) -> Vec<u8> {
    let desc = serde_json::to_vec(&ModelDescriptor::of(model, config)).expect("descriptor serializes");
    let mut out = Vec::with_capacity(8 + desc.len() + 8 * model.num_params());
    out.extend_from_slice(MODEL_MAGIC);
    out.extend_from_slice(&(desc.len() as u32).to_le_bytes());
    out.extend_from_slice(&desc);
    for (_, block) in model.blocks() {
        for v in block {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode_model(bytes: &[u8]) -> Result<(BiLstmModel, ModelDescriptor), NnetError> {
    let bad = |m: &str| NnetError::BadModelFile(m.to_string());
    if bytes.len() < 8 || &bytes[..4] != MODEL_MAGIC {
        return Err(bad("missing HWM1 magic"));
    }
    let len = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let body = bytes.get(8..8 + len).ok_or_else(|| bad("truncated descriptor"))?;
    let desc: ModelDescriptor =
        serde_json::from_slice(body).map_err(|e| NnetError::BadModelFile(format!("descriptor: {e}")))?;
    if desc.layers != NUM_LAYERS || desc.classes != NUM_CLASSES || desc.hidden_size == 0 {
        return Err(bad("unsupported architecture"));
    }
    let mut model = BiLstmModel::zeros(desc.input_size, desc.hidden_size);
    let expected = ModelDescriptor::of(&model, serde_json::Value::Null).blocks;
    if desc.blocks != expected {
        return Err(bad("block table does not match the declared dimensions"));
    }
    let data = &bytes[8 + len..];
    if data.len() != 8 * model.num_params() {
        return Err(NnetError::BadModelFile(format!(
            "expected {} parameter bytes, found {}",
            8 * model.num_params(),
            data.len()
        )));
    }
    let mut values = data
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    for block in model.blocks_mut() {
        for v in block.iter_mut() {
            *v = values.next().expect("length checked");
        }
    }
    Ok((model, desc))
}

pub fn write_model(path: impl AsRef<Path>, model: &BiLstmModel, config: serde_json::Value) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_model(model, config)).map_err(|e| Error::io(path, e))
}

pub fn read_model(path: impl AsRef<Path>) -> Result<(BiLstmModel, ModelDescriptor)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(decode_model(&bytes)?)
}
