#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};

pub fn examples() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/examples")
}

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn faultline(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_faultline"))
        .args(args)
        .env_remove("FAULTLINE_MAX_CANDIDATES")
        .output()
        .expect("run faultline")
}

pub fn model_path() -> String {
    examples().join("paper_circuit.json").display().to_string()
}

/// Golden file name and the arguments that produce it.
pub fn golden_cases() -> Vec<(&'static str, Vec<String>)> {
    let model = model_path();
    let diagnose = |t: &str, obs: [&str; 4]| {
        let mut args = vec!["diagnose".to_string(), model.clone(), "--time".into(), t.into()];
        for o in obs {
            args.push("--observe".into());
            args.push(o.into());
        }
        args
    };
    vec![
        ("diagnose_t10.txt", diagnose("10", ["I1=1", "I2=1", "I3=0", "I6=0"])),
        ("diagnose_t90.txt", diagnose("90", ["I1=1", "I2=1", "I3=0", "I6=0"])),
        (
            "diagnose_t20_anomaly.txt",
            diagnose("20", ["I1=0", "I2=0", "I3=0", "I6=1"]),
        ),
        (
            "replay_scenario2.txt",
            vec!["replay".into(), examples().join("scenario2.json").display().to_string()],
        ),
    ]
}

pub fn run_case(args: &[String]) -> Vec<u8> {
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let out = faultline(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}
