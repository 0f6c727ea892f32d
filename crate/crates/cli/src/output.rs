//! Number formatting and all-or-nothing output writing.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::error::CliError;

pub const CSV_DIGITS: usize = 17;
pub const REPORT_DIGITS: usize = 6;

/// `x` with `digits` significant digits in exponent form; round-trips for
/// 17 digits.
pub fn sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    format!("{:.*e}", digits - 1, x)
}

/// `x` rounded to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    sig(x, digits).parse().unwrap_or(x)
}

/// Rounds every float inside a JSON tree to the report precision.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().unwrap_or(0.0), REPORT_DIGITS);
            serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

/// Pretty JSON with rounded floats and sorted keys, newline-terminated.
pub fn report_json(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&round_json(v)).unwrap_or_default();
    s.push('\n');
    s
}

/// Files collected in memory and written together once every computation
/// has succeeded, so a failure leaves no partial output behind.
#[derive(Debug, Default)]
pub struct Staged {
    files: Vec<(PathBuf, String)>,
}

impl Staged {
    pub fn add(&mut self, path: PathBuf, contents: String) {
        self.files.push((path, contents));
    }

    pub fn paths(&self) -> impl Iterator<Item = &Path> {
        self.files.iter().map(|(p, _)| p.as_path())
    }

    pub fn commit(self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        let io = |p: &Path, e: std::io::Error| CliError::Io(format!("{}: {e}", p.display()));
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let mut tmp = Vec::with_capacity(self.files.len());
        for (name, contents) in &self.files {
            let target = dir.join(name);
            let partial = dir.join(format!(".{}.partial", name.display()));
            if let Err(e) = fs::write(&partial, contents) {
                for (p, _) in &tmp {
                    let _ = fs::remove_file(p);
                }
                return Err(io(&partial, e));
            }
            tmp.push((partial, target));
        }
        let mut written = Vec::with_capacity(tmp.len());
        for (partial, target) in tmp {
            fs::rename(&partial, &target).map_err(|e| io(&target, e))?;
            written.push(target);
        }
        Ok(written)
    }
}
