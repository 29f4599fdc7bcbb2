use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// An in-memory CSV table: a `#` provenance line, a header, then rows.
pub struct Table {
    header: Vec<String>,
    body: String,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            body: String::new(),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.body.push_str(&cells.join(","));
        self.body.push('\n');
    }

    pub fn render(&self, config_hash: &str, seed: u64) -> String {
        format!(
            "# config_hash={config_hash} seed={seed}\n{}\n{}",
            self.header.join(","),
            self.body
        )
    }
}

/// Shortest round-trip scientific notation; `inf`, `-inf` and `NaN` as Rust prints them.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// Angles in degrees with fixed precision so grid values print cleanly.
pub fn angle(deg: f64) -> String {
    let s = format!("{deg:.4}");
    if s == "-0.0000" {
        "0.0000".into()
    } else {
        s
    }
}

pub fn db_amplitude(x: f64, reference: f64) -> f64 {
    20.0 * (x / reference).log10()
}

pub fn db_power(x: f64, reference: f64) -> f64 {
    10.0 * (x / reference).log10()
}

/// Writes output files and remembers their digests for the manifest.
pub struct OutputDir {
    root: PathBuf,
    pub written: Vec<(String, String)>,
}

impl OutputDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> CliResult<PathBuf> {
        let path = self.root.join(name);
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.written
            .push((name.to_string(), hex::encode(Sha256::digest(contents.as_bytes()))));
        Ok(path)
    }
}

/// Ordered `key=value` lines.
#[derive(Default)]
pub struct Manifest {
    lines: Vec<(String, String)>,
}

impl Manifest {
    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) {
        self.lines.push((key.into(), value.to_string()));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.lines {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }
}

/// Seconds since the epoch, honouring `SOURCE_DATE_EPOCH` for reproducible runs.
pub fn timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or_else(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_layout() {
        let mut t = Table::new(["a_deg", "b_db"]);
        t.row(&[angle(-0.0), num(1.5)]);
        t.row(&[angle(12.34567), num(f64::NEG_INFINITY)]);
        assert_eq!(
            t.render("abc", 7),
            "# config_hash=abc seed=7\na_deg,b_db\n0.0000,1.5e0\n12.3457,-inf\n"
        );
    }

    #[test]
    fn number_format_round_trips() {
        for x in [1e-300, 0.1, -48.0, 6.02e23, 5e-324] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(f64::INFINITY), "inf");
    }

    #[test]
    fn manifest_keeps_order() {
        let mut m = Manifest::default();
        m.set("z", 1);
        m.set("a", "x");
        assert_eq!(m.render(), "z=1\na=x\n");
    }
}
