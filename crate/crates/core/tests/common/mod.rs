#![allow(dead_code)]

use std::path::PathBuf;

use poclm::cli::RunConfig;
use poclm::model::{encode_design, DesignData, ModelSpec, RawTable};

pub fn manifest_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(rel)
}

/// Reference school-performance fit, α | perf2016 | funding | regisRat.
pub const SCHOOL_UMLE: [f64; 9] = [
    -0.62759, 1.83259, 5.87701, -1.23255, -3.20697, -5.81422, 0.00609, -0.73117, -0.34234,
];
pub const SCHOOL_CMLE: [f64; 9] = [
    -0.62759, 1.83260, 5.87701, -1.23255, -3.20697, -5.81422, 0.00000, -0.73117, -0.34233,
];
pub const SCHOOL_TOLERANCE: f64 = 1e-3;

pub fn school() -> (RunConfig, ModelSpec, DesignData) {
    let cfg = RunConfig::load(&manifest_path("configs/school.toml")).expect("school config");
    let spec = cfg.model_spec().expect("school spec");
    let raw = RawTable::read_csv(cfg.data.as_ref().expect("data path")).expect("school fixture");
    let data = encode_design(&raw, &spec).expect("school design");
    (cfg, spec, data)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
