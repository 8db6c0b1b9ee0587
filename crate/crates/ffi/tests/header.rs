use std::path::Path;
use std::process::Command;

const EXPORTS: &[&str] = &[
    "hw_last_error_message",
    "hw_window_coefficients",
    "hw_preprocess",
    "hw_features_extract",
    "hw_features_from_rows",
    "hw_features_rows",
    "hw_features_copy",
    "hw_features_free",
    "hw_model_load",
    "hw_model_hidden_size",
    "hw_model_predict",
    "hw_model_free",
    "hw_metrics",
];

fn header() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/heartwin.h")
}

#[test]
fn header_declares_every_export() {
    let text = std::fs::read_to_string(header()).expect("build script writes the header");
    assert!(text.contains("#ifndef HEARTWIN_H"));
    for name in EXPORTS {
        assert!(text.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(text.contains("typedef struct HwModel HwModel;"));
    assert!(text.contains("HW_STATUS_BUFFER_TOO_SMALL = 5"));
}

#[test]
fn header_compiles_as_c() {
    // Only when a C compiler is around.
    let Ok(out) = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", "-std=c99"])
        .arg(header())
        .output()
    else {
        eprintln!("no C compiler; skipped");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
