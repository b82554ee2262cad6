#![allow(dead_code)]

use std::path::{Path, PathBuf};

use netmh_cli::config::PipelineConfig;
use netmh_cli::synth::{generate_synthetic, write_synthetic, SyntheticParams};

pub fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

/// Schema file for a report, chosen by its file-name prefix.
pub fn schema_for(report: &Path) -> PathBuf {
    let name = report.file_name().unwrap().to_str().unwrap();
    let stem = if name.starts_with("ingest_summary") {
        "ingest_summary"
    } else {
        name.split('_').next().unwrap()
    };
    schema_dir().join(format!("{stem}.schema.json"))
}

/// Validation errors of every JSON file in `dir`, as readable strings.
pub fn schema_errors(dir: &Path) -> Vec<String> {
    let mut errors = Vec::new();
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    for f in files {
        let schema: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(schema_for(&f)).unwrap()).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&f).unwrap()).unwrap();
        let v = jsonschema::validator_for(&schema).unwrap();
        for e in v.iter_errors(&doc) {
            errors.push(format!("{}: {} at {}", f.display(), e, e.instance_path()));
        }
    }
    errors
}

/// Writes a synthetic dataset into `dir` and returns a config pointing at it.
pub fn synthetic_config(dir: &Path, p: &SyntheticParams) -> PipelineConfig {
    let data = generate_synthetic(p).unwrap();
    let (events, labels) = write_synthetic(&data, dir).unwrap();
    PipelineConfig {
        events_path: events,
        labels_path: labels,
        num_weeks: p.n_weeks,
        output_dir: dir.join("out"),
        ..PipelineConfig::default()
    }
}

/// Byte contents of every file in `dir`, sorted by name.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    v.sort();
    v
}
