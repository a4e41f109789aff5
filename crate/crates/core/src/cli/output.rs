//! CSV and manifest writers.
//!
//! Floats are written with `{:.16e}` (17 significant digits, enough for an
//! exact round trip); complex numbers as `_re`/`_im` column pairs. Empty
//! cells mean "not applicable".
//!
//! The manifest is `manifest.json` in the output directory:
//!
//! | field | content |
//! |---|---|
//! | `tool`, `version` | crate name and version |
//! | `subcommand` | `stationary`, `evolve`, `spectrum`, `nhip` or `verify` |
//! | `config` | the fully resolved config (defaults filled in) |
//! | `seed` | seed actually used (after `--seed`) |
//! | `flags` | command-line flags that change the output |
//! | `outputs` | data files written next to the manifest |
//! | `wall_time_s` | elapsed seconds |
//! | `status` | `ok`, `diverged` or `failed` |
//! | `checks` | named pass/fail checks with value and tolerance |
//! | `summary` | subcommand-specific scalars (breakdown couplings, deviations) |

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::RunConfig;
use crate::hilbert::C64;
use crate::verify::Check;
use crate::Result;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn complex_cells(z: C64) -> [String; 2] {
    [fmt_f64(z.re), fmt_f64(z.im)]
}

pub fn complex_header(name: &str) -> [String; 2] {
    [format!("{name}_re"), format!("{name}_im")]
}

/// A CSV file that is flushed after every row, so a run that stops early
/// still leaves every completed row on disk.
pub struct Table {
    writer: csv::Writer<File>,
}

impl Table {
    pub fn create(path: &Path, header: &[String]) -> Result<Self> {
        let mut writer = csv::Writer::from_path(path)?;
        writer.write_record(header)?;
        writer.flush()?;
        Ok(Self { writer })
    }

    pub fn row(&mut self, cells: &[String]) -> Result<()> {
        self.writer.write_record(cells)?;
        self.writer.flush()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Diverged,
    Failed,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub config: Option<RunConfig>,
    pub seed: u64,
    pub flags: serde_json::Map<String, serde_json::Value>,
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
    pub status: Status,
    pub checks: Vec<Check>,
    pub summary: serde_json::Map<String, serde_json::Value>,
}

impl Manifest {
    pub fn new(subcommand: &str, config: Option<RunConfig>, seed: u64) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.to_string(),
            config,
            seed,
            flags: Default::default(),
            outputs: Vec::new(),
            wall_time_s: 0.0,
            status: Status::Ok,
            checks: Vec::new(),
            summary: Default::default(),
        }
    }

    pub fn note(&mut self, key: &str, value: impl Serialize) {
        self.summary.insert(key.to_string(), serde_json::to_value(value).unwrap_or(serde_json::Value::Null));
    }

    pub fn flag(&mut self, key: &str, value: impl Serialize) {
        self.flags.insert(key.to_string(), serde_json::to_value(value).unwrap_or(serde_json::Value::Null));
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        let file = File::create(&path)?;
        serde_json::to_writer_pretty(file, self)?;
        Ok(path)
    }
}
