//! Command-line front end.
//!
//! Exit codes: 0 success, 1 pipeline (domain) error, 2 usage or I/O error.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use heartwin::config::{RunConfig, SynthCorpus};
use heartwin::eval::{self, emit_results, run_grid, run_trial};
use heartwin::features::{
    extract_signal, normalize_sequence, read_feature_dir, write_feature_file, ExtractionConfig, DEFAULT_BINS,
};
use heartwin::ingest::{preprocess, read_corpus, read_csv, read_wav, AudioRecord, Label};
use heartwin::nnet::{read_model, write_model, TrainConfig};
use heartwin::synth::{generate_dataset, write_corpus, SynthConfig};
use heartwin::windows::{parse_length, window_info, WindowShape, WindowSpec, DEFAULT_ALPHA, DEFAULT_NFFT};
use heartwin::{Error, FeatureSequence, Result};

#[derive(Parser)]
#[command(name = "heartwin", version, about = "Heart-sound classification from windowed frame statistics")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic WAV corpus with a labels.csv manifest.
    Synth(SynthArgs),
    /// Preprocess recordings and write normalized feature files.
    Extract(ExtractArgs),
    /// Split a feature set, train a classifier and score the held-out part.
    Train(TrainArgs),
    /// Score a saved model on feature files.
    Eval(EvalArgs),
    /// Run the shape x length x hidden-size grid with repeated trials.
    Grid(GridArgs),
    /// Print lobe measurements (and optionally coefficients) of windows.
    WindowInfo(WindowInfoArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10)]
    healthy: usize,
    #[arg(long, default_value_t = 10)]
    pathological: usize,
    /// Base seed; record i uses a seed derived from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    murmur_gain: Option<f64>,
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    noise_floor: Option<f64>,
}

#[derive(Args, Clone)]
struct WindowArgs {
    #[arg(long, default_value = "gaussian")]
    shape: WindowShape,
    /// Window length label (15, 30, 50) or any even L.
    #[arg(long, default_value = "30")]
    length: String,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    hop: usize,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
}

#[derive(Args)]
struct ExtractArgs {
    /// A WAV file, a headerless CSV file, or a corpus directory.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    window: WindowArgs,
    /// Sample rate of CSV input.
    #[arg(long, default_value_t = 2000)]
    rate: u32,
    /// Label for a single input file.
    #[arg(long, default_value = "unlabeled")]
    label: Label,
}

#[derive(Args, Default)]
struct TrainFlags {
    /// Training epochs (default 500).
    #[arg(long)]
    epochs: Option<usize>,
    /// SGD step size (default 0.01).
    #[arg(long)]
    learning_rate: Option<f64>,
    /// Momentum coefficient (default 0.9).
    #[arg(long)]
    momentum: Option<f64>,
    /// Sequences per update (default 16).
    #[arg(long)]
    batch_size: Option<usize>,
    /// Clip the global gradient norm to this value.
    #[arg(long)]
    clip_norm: Option<f64>,
    /// Ramp momentum up from 0.5 over the first tenth of the epochs.
    #[arg(long)]
    momentum_ramp: bool,
    /// Per-class share of records used for training (default 0.7).
    #[arg(long)]
    train_fraction: Option<f64>,
    /// Root seed of the run (default 0).
    #[arg(long)]
    seed: Option<u64>,
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Directory of feature files written by `extract`.
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    hidden: Option<usize>,
    #[command(flatten)]
    train: TrainFlags,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    features: PathBuf,
    /// File with one sequence id per line; only those are scored.
    #[arg(long)]
    ids: Option<PathBuf>,
    /// Also write the metrics JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    /// Corpus directory (WAV files plus labels.csv).
    #[arg(long, conflicts_with = "synth")]
    corpus: Option<PathBuf>,
    /// Generate N healthy and N pathological records instead of reading a corpus.
    #[arg(long)]
    synth: Option<usize>,
    /// Murmur level of the synthetic pathological records.
    #[arg(long)]
    murmur_gain: Option<f64>,
    /// Output directory for the CSVs and the effective config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma list of rectangular, triangular, gaussian.
    #[arg(long, value_delimiter = ',')]
    shapes: Option<Vec<WindowShape>>,
    /// Comma list of window lengths; 15 means L=14.
    #[arg(long, value_delimiter = ',')]
    lengths: Option<Vec<String>>,
    /// Comma list of hidden sizes.
    #[arg(long, value_delimiter = ',')]
    hidden: Option<Vec<usize>>,
    /// Random splits per cell (default 30).
    #[arg(long)]
    trials: Option<usize>,
    /// Samples between frame centres (default 1).
    #[arg(long)]
    hop: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    bins: Option<usize>,
    #[command(flatten)]
    train: TrainFlags,
}

#[derive(Args)]
struct WindowInfoArgs {
    #[arg(long, value_delimiter = ',', default_value = "rectangular,triangular,gaussian")]
    shapes: Vec<WindowShape>,
    #[arg(long, value_delimiter = ',', default_value = "15,30,50")]
    lengths: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, default_value_t = DEFAULT_NFFT)]
    nfft: usize,
    /// Append a shape,L,alpha,l,w table of the coefficients.
    #[arg(long)]
    coefficients: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Extract(a) => cmd_extract(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Grid(a) => cmd_grid(a),
        Command::WindowInfo(a) => cmd_window_info(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}

fn synth_params(murmur_gain: Option<f64>, duration: Option<f64>, noise_floor: Option<f64>) -> SynthConfig {
    let d = SynthConfig::default();
    SynthConfig {
        murmur_gain: murmur_gain.unwrap_or(d.murmur_gain),
        duration_s: duration.unwrap_or(d.duration_s),
        noise_floor: noise_floor.unwrap_or(d.noise_floor),
        ..d
    }
}

fn cmd_synth(a: SynthArgs) -> Result<()> {
    let params = synth_params(a.murmur_gain, a.duration, a.noise_floor);
    let records = generate_dataset(a.healthy, a.pathological, a.seed, &params)?;
    let manifest = write_corpus(&a.out, &records)?;
    println!("wrote {} records and {}", records.len(), manifest.display());
    Ok(())
}

fn window_spec(shape: WindowShape, length: &str, alpha: f64) -> Result<WindowSpec> {
    Ok(WindowSpec::new(shape, parse_length(length)?, alpha)?)
}

fn load_inputs(input: &Path, rate: u32, label: Label) -> Result<Vec<AudioRecord>> {
    if input.is_dir() {
        return read_corpus(input);
    }
    let is_csv = input.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let mut r = if is_csv { read_csv(input, rate, label)? } else { read_wav(input)? };
    r.label = label;
    Ok(vec![r])
}

fn cmd_extract(a: ExtractArgs) -> Result<()> {
    let w = &a.window;
    let config = ExtractionConfig {
        window: window_spec(w.shape, &w.length, w.alpha)?,
        hop: w.hop,
        bins: w.bins,
    };
    let records = load_inputs(&a.input, a.rate, a.label)?;
    for r in &records {
        let p = preprocess(r)?;
        let raw = extract_signal(p.id.clone(), p.label, &p.samples, config)?;
        let seq = normalize_sequence(&raw)?;
        write_feature_file(&a.out, &seq)?;
    }
    println!("wrote {} feature files to {}", records.len(), a.out.display());
    Ok(())
}

/// Loads the config file (if any) and applies the shared training flags.
fn run_config(f: &TrainFlags) -> Result<RunConfig> {
    let mut c = match &f.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let t = &mut c.train;
    if let Some(v) = f.epochs {
        t.epochs = v;
    }
    if let Some(v) = f.learning_rate {
        t.learning_rate = v;
    }
    if let Some(v) = f.momentum {
        t.momentum = v;
    }
    if let Some(v) = f.batch_size {
        t.batch_size = v;
    }
    if f.clip_norm.is_some() {
        t.clip_norm = f.clip_norm;
    }
    if f.momentum_ramp {
        t.momentum_ramp = true;
    }
    if let Some(v) = f.train_fraction {
        c.train_fraction = v;
    }
    if let Some(v) = f.seed {
        c.seed = v;
    }
    Ok(c)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let mut cfg = run_config(&a.train)?;
    if let Some(h) = a.hidden {
        cfg.hidden_sizes = vec![h];
    }
    cfg.validate()?;
    let hidden = cfg.hidden_sizes[0];
    let dataset = read_feature_dir(&a.features)?;
    let trial = run_trial(&dataset, hidden, &cfg.train, cfg.seed, cfg.train_fraction)?;
    fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    cfg.write_effective(&a.out)?;
    let effective_train = TrainConfig { seed: heartwin::seed::derive(cfg.seed, 1), ..cfg.train.clone() };
    let model = trial.model.as_ref().expect("run_trial keeps the model");
    write_model(
        a.out.join("model.bin"),
        model,
        json!({ "train": effective_train, "hidden": hidden, "seed": cfg.seed }),
    )?;
    let report = json!({
        "hidden": hidden,
        "seed": cfg.seed,
        "confusion": trial.confusion,
        "metrics": trial.metrics,
        "train_ids": trial.split.train.iter().map(|&i| dataset[i].id.clone()).collect::<Vec<_>>(),
        "test_ids": trial.test_ids,
        "predictions": trial.predictions,
        "history": trial.history,
    });
    write_text(&a.out.join("metrics.json"), &(serde_json::to_string_pretty(&report).unwrap() + "\n"))?;
    write_text(&a.out.join("test_ids.txt"), &(trial.test_ids.join("\n") + "\n"))?;
    println!("{}", serde_json::to_string(&json!({ "confusion": trial.confusion, "metrics": trial.metrics })).unwrap());
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let (model, _) = read_model(&a.model)?;
    let mut seqs = read_feature_dir(&a.features)?;
    if let Some(ids) = &a.ids {
        let text = fs::read_to_string(ids).map_err(|e| Error::io(ids, e))?;
        let order: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        let wanted: HashSet<&str> = order.iter().copied().collect();
        let found: HashSet<String> = seqs.iter().map(|s| s.id.clone()).collect();
        if let Some(missing) = order.iter().find(|id| !found.contains(**id)) {
            return Err(Error::parse(ids, format!("no feature file for id {missing:?}")));
        }
        seqs.retain(|s| wanted.contains(s.id.as_str()));
    }
    let (predictions, confusion, metrics) = eval::evaluate(&model, &seqs)?;
    let report = json!({
        "confusion": confusion,
        "metrics": metrics,
        "ids": seqs.iter().map(|s: &FeatureSequence| s.id.clone()).collect::<Vec<_>>(),
        "predictions": predictions,
    });
    let text = serde_json::to_string_pretty(&report).unwrap();
    if let Some(out) = &a.out {
        write_text(out, &(text.clone() + "\n"))?;
    }
    println!("{}", serde_json::to_string(&json!({ "confusion": confusion, "metrics": metrics })).unwrap());
    Ok(())
}

fn cmd_grid(a: GridArgs) -> Result<()> {
    let mut cfg = run_config(&a.train)?;
    if let Some(s) = a.shapes {
        cfg.shapes = s;
    }
    if let Some(ls) = &a.lengths {
        cfg.lengths = ls.iter().map(|l| parse_length(l)).collect::<std::result::Result<_, _>>()?;
    }
    if let Some(h) = a.hidden {
        cfg.hidden_sizes = h;
    }
    if let Some(v) = a.trials {
        cfg.trials = v;
    }
    if let Some(v) = a.hop {
        cfg.hop = v;
    }
    if let Some(v) = a.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = a.bins {
        cfg.bins = v;
    }
    if let Some(c) = a.corpus {
        cfg.corpus = Some(c);
        cfg.synth = None;
    }
    if let Some(n) = a.synth {
        let mut s = cfg.synth.take().unwrap_or_default();
        s.n_healthy = n;
        s.n_pathological = n;
        cfg.synth = Some(s);
        cfg.corpus = None;
    }
    if let (Some(g), Some(s)) = (a.murmur_gain, cfg.synth.as_mut()) {
        s.params.murmur_gain = g;
    }
    if let Some(o) = a.out {
        cfg.output = Some(o);
    }
    cfg.validate()?;
    let out = cfg
        .output
        .clone()
        .ok_or_else(|| Error::Config("grid needs --out or an output entry in the config".into()))?;

    let raw = match (&cfg.corpus, &cfg.synth) {
        (Some(dir), _) => read_corpus(dir)?,
        (None, Some(SynthCorpus { n_healthy, n_pathological, params })) => {
            generate_dataset(*n_healthy, *n_pathological, cfg.seed, params)?
        }
        (None, None) => return Err(Error::Config("grid needs --corpus or --synth".into())),
    };
    let records = raw.iter().map(preprocess).collect::<std::result::Result<Vec<_>, _>>()?;
    let grid = run_grid(&records, &cfg.grid_spec())?;
    cfg.write_effective(&out)?;
    for p in emit_results(&out, &grid)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn cmd_window_info(a: WindowInfoArgs) -> Result<()> {
    let mut table = String::from("shape,L,alpha,mainlobe_width,sidelobe_db\n");
    let mut coeffs = String::from("shape,L,alpha,l,w\n");
    for &shape in &a.shapes {
        for length in &a.lengths {
            let spec = window_spec(shape, length, a.alpha)?;
            let info = window_info(&spec, a.nfft)?;
            let alpha = if shape == WindowShape::Gaussian { a.alpha.to_string() } else { String::new() };
            let side = info.sidelobe_db.map(|v| format!("{v:.4}")).unwrap_or_default();
            writeln!(table, "{shape},{},{alpha},{:.6},{side}", spec.l(), info.mainlobe_width).unwrap();
            let half = spec.l() as i64 / 2;
            for (k, w) in info.coefficients.iter().enumerate() {
                writeln!(coeffs, "{shape},{},{alpha},{},{w}", spec.l(), k as i64 - half).unwrap();
            }
        }
    }
    print!("{table}");
    if a.coefficients {
        print!("\n{coeffs}");
    }
    Ok(())
}
