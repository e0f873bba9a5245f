//! Output helpers: provenance manifest, CSV writers, JSON encodings, and
//! pi-fraction formatting for angles.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;

pub fn ensure_dir(dir: &Path) -> Result<(), String> {
    fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), String> {
    fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

/// Provenance block attached to every output directory.
pub struct Manifest {
    pub command: String,
    pub config: RunConfig,
    pub dt_s: f64,
    pub j_max: u32,
    pub outputs: Vec<String>,
    pub extra: Value,
    started: std::time::Instant,
}

impl Manifest {
    pub fn new(command: &str, config: &RunConfig, dt_s: f64) -> Self {
        Self {
            command: command.to_string(),
            config: config.clone(),
            dt_s,
            j_max: config.molecule().j_max,
            outputs: Vec::new(),
            extra: Value::Null,
            started: std::time::Instant::now(),
        }
    }

    pub fn record(&mut self, path: &Path) {
        self.outputs.push(path.file_name().unwrap().to_string_lossy().into_owned());
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf, String> {
        let config_json = serde_json::to_value(&self.config).map_err(|e| e.to_string())?;
        let canonical = serde_json::to_string(&config_json).map_err(|e| e.to_string())?;
        let hash = hex_digest(&canonical);
        let manifest = json!({
            "tool": "rotorq",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config_hash": hash,
            "config": config_json,
            "dt_s": self.dt_s,
            "j_max": self.j_max,
            "runtime_s": self.started.elapsed().as_secs_f64(),
            "outputs": self.outputs,
            "extra": self.extra,
        });
        let path = dir.join("manifest.json");
        write_text(&path, &serde_json::to_string_pretty(&manifest).unwrap())?;
        Ok(path)
    }
}

fn hex_digest(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// JSON encoding of a complex number as [re, im].
pub fn complex_json(c: Complex64) -> Value {
    json!([c.re, c.im])
}

/// 2x2 complex matrix as row-major [re, im] pairs.
pub fn matrix2_json(m: &Matrix2<Complex64>) -> Value {
    json!([
        [complex_json(m[(0, 0)]), complex_json(m[(0, 1)])],
        [complex_json(m[(1, 0)]), complex_json(m[(1, 1)])]
    ])
}

/// Dense complex matrix as rows of [re, im] pairs.
pub fn dmatrix_json(m: &DMatrix<Complex64>) -> Value {
    let rows: Vec<Value> = (0..m.nrows())
        .map(|r| Value::Array((0..m.ncols()).map(|c| complex_json(m[(r, c)])).collect()))
        .collect();
    Value::Array(rows)
}

/// Render an angle as an exact rational multiple of pi when one exists
/// (denominators up to 16), falling back to a decimal.
pub fn pi_fraction(value: f64) -> String {
    if value == 0.0 {
        return "0".to_string();
    }
    let x = value / std::f64::consts::PI;
    for q in 1..=16u32 {
        let p = (x * q as f64).round();
        if p.abs() <= 64.0 && (x * q as f64 - p).abs() < 1e-10 && p != 0.0 {
            let p = p as i64;
            let (pa, sign) = (p.unsigned_abs(), if p < 0 { "-" } else { "" });
            return match (pa, q) {
                (1, 1) => format!("{sign}pi"),
                (_, 1) => format!("{sign}{pa} pi"),
                (1, _) => format!("{sign}pi/{q}"),
                _ => format!("{sign}{pa} pi/{q}"),
            };
        }
    }
    format!("{value:.12}")
}

/// CSV assembly with a fixed header; numbers in shortest round-trip form.
pub struct Csv {
    lines: Vec<String>,
}

impl Csv {
    pub fn new(header: &str) -> Self {
        Self { lines: vec![header.to_string()] }
    }

    pub fn row(&mut self, fields: &[f64]) {
        let text: Vec<String> = fields.iter().map(|v| format!("{v}")).collect();
        self.lines.push(text.join(","));
    }

    pub fn row_mixed(&mut self, prefix: &str, fields: &[f64]) {
        let mut text = vec![prefix.to_string()];
        text.extend(fields.iter().map(|v| format!("{v}")));
        self.lines.push(text.join(","));
    }

    pub fn write(&self, path: &Path) -> Result<(), String> {
        write_text(path, &(self.lines.join("\n") + "\n"))
    }
}
