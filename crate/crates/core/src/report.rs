//! Deterministic file outputs: CSV and JSON writers with fixed float
//! formatting (12 significant digits) and a hashed output manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Render a float with 12 significant digits, the fixed precision of
/// every emitted data file.
pub fn fmt_float(x: f64) -> String {
    if x == 0.0 {
        // avoid the negative-zero regression trap
        return "0.00000000000e0".into();
    }
    format!("{x:.11e}")
}

/// Round a float to the emitted precision so JSON numbers match the
/// CSV convention.
pub fn round_emitted(x: f64) -> f64 {
    fmt_float(x).parse().expect("formatted float reparses")
}

/// Recursively round every number of a JSON value to emitted precision.
pub fn round_json(value: &mut Value) {
    match value {
        Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if n.as_i64().is_none() && n.as_u64().is_none() {
                    *value = json!(round_emitted(f));
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

/// Collects written files and finalizes `manifest.json`.
pub struct OutputWriter {
    directory: PathBuf,
    files: Vec<(String, String, u64)>,
}

impl OutputWriter {
    /// Create (or reuse) the output directory.
    pub fn new(directory: &Path) -> Result<Self> {
        fs::create_dir_all(directory)?;
        Ok(OutputWriter {
            directory: directory.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn directory(&self) -> &Path {
        &self.directory
    }

    fn record(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.directory.join(name);
        fs::write(&path, bytes)?;
        let digest = Sha256::digest(bytes);
        self.files
            .push((name.to_string(), format!("{digest:x}"), bytes.len() as u64));
        Ok(())
    }

    /// Write a CSV file with a header row; every cell is either a
    /// preformatted string or a float rendered at fixed precision.
    pub fn write_csv(
        &mut self,
        name: &str,
        header: &[&str],
        rows: impl IntoIterator<Item = Vec<String>>,
    ) -> Result<()> {
        let mut out = String::new();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in rows {
            if row.len() != header.len() {
                return Err(Error::Parameter(format!(
                    "row width {} does not match header width {} in {name}",
                    row.len(),
                    header.len()
                )));
            }
            out.push_str(&row.join(","));
            out.push('\n');
        }
        self.record(name, out.as_bytes())
    }

    /// Serialize to pretty JSON with floats rounded to emitted precision.
    pub fn write_json<S: Serialize>(&mut self, name: &str, payload: &S) -> Result<()> {
        self.write_json_impl(name, payload, true)
    }

    /// Compact single-line JSON, for large grid payloads.
    pub fn write_json_compact<S: Serialize>(&mut self, name: &str, payload: &S) -> Result<()> {
        self.write_json_impl(name, payload, false)
    }

    fn write_json_impl<S: Serialize>(&mut self, name: &str, payload: &S, pretty: bool) -> Result<()> {
        let mut value = serde_json::to_value(payload)
            .map_err(|e| Error::Parameter(format!("serialization of {name} failed: {e}")))?;
        round_json(&mut value);
        let text = if pretty {
            serde_json::to_string_pretty(&value)
        } else {
            serde_json::to_string(&value)
        }
        .map_err(|e| Error::Parameter(format!("rendering of {name} failed: {e}")))?;
        self.record(name, format!("{text}\n").as_bytes())
    }

    /// Write `manifest.json` (sorted file list, config hash, versions)
    /// and return the manifest path.
    pub fn finalize(mut self, canonical_config: &str) -> Result<PathBuf> {
        self.files.sort();
        let config_digest = Sha256::digest(canonical_config.as_bytes());
        let manifest = json!({
            "files": self.files.iter().map(|(name, sha, bytes)| json!({
                "name": name,
                "sha256": sha,
                "bytes": bytes,
            })).collect::<Vec<_>>(),
            "config_sha256": format!("{config_digest:x}"),
            "versions": {
                "saddlescar": env!("CARGO_PKG_VERSION"),
            },
        });
        let text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| Error::Parameter(format!("manifest rendering failed: {e}")))?;
        let path = self.directory.join("manifest.json");
        fs::write(&path, format!("{text}\n"))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_is_twelve_significant_digits() {
        assert_eq!(fmt_float(101.18897156439682), "1.01188971564e2");
        assert_eq!(fmt_float(-0.0001234567890123), "-1.23456789012e-4");
        assert_eq!(fmt_float(0.0), "0.00000000000e0");
        assert_eq!(fmt_float(-0.0), "0.00000000000e0");
        let rounded = round_emitted(101.18897156439682);
        assert_eq!(rounded, "1.01188971564e2".parse::<f64>().unwrap());
        assert!((rounded - 101.188971564).abs() < 1e-9);
    }

    #[test]
    fn writer_produces_deterministic_manifest() {
        let dir = std::env::temp_dir().join("saddlescar-report-test");
        let _ = fs::remove_dir_all(&dir);
        let run = |tag: &str| -> (String, String) {
            let sub = dir.join(tag);
            let mut w = OutputWriter::new(&sub).unwrap();
            w.write_csv(
                "data.csv",
                &["x", "y"],
                (0..3).map(|i| vec![fmt_float(i as f64), fmt_float(i as f64 * 0.1)]),
            )
            .unwrap();
            w.write_json("meta.json", &serde_json::json!({"a": 1.0 / 3.0}))
                .unwrap();
            let manifest = w.finalize("config-text").unwrap();
            (
                fs::read_to_string(manifest).unwrap(),
                fs::read_to_string(sub.join("data.csv")).unwrap(),
            )
        };
        let (m1, d1) = run("a");
        let (m2, d2) = run("b");
        assert_eq!(m1, m2);
        assert_eq!(d1, d2);
        assert!(m1.contains("config_sha256"));
        assert!(d1.starts_with("x,y\n0.00000000000e0,"));
    }

    #[test]
    fn json_floats_are_rounded_to_emitted_precision() {
        let mut v = serde_json::json!({"x": [1.0f64 / 3.0], "n": 7});
        round_json(&mut v);
        assert_eq!(v["x"][0].as_f64().unwrap(), round_emitted(1.0 / 3.0));
        assert_eq!(v["n"].as_i64().unwrap(), 7);
    }

    #[test]
    fn mismatched_rows_are_rejected() {
        let dir = std::env::temp_dir().join("saddlescar-report-test-bad");
        let mut w = OutputWriter::new(&dir).unwrap();
        let r = w.write_csv("bad.csv", &["a", "b"], vec![vec!["1".to_string()]]);
        assert!(r.is_err());
    }
}
