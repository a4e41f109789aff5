//! Run configuration.
//!
//! Configs are TOML documents. Every key lives in a section and may be
//! written either as a table or as a dotted key:
//!
//! ```toml
//! model.omega = 1.0
//! model.omega0 = 1.0
//! model.g = 0.3
//! space.n_b = 12
//! method.sub_n = 12
//!
//! [integrator]
//! scheme = "rk4"
//! dt = 1e-3
//! t1 = 10.0
//! ```
//!
//! Unknown keys are rejected. A JSON run manifest is also accepted: its
//! `config` field is read back, which makes every run reproducible from its
//! manifest.
//!
//! | key | default | meaning |
//! |---|---|---|
//! | `seed` | 0 | seed for randomized suites |
//! | `model.omega`, `model.omega0` | 1.0 | field and atom frequencies |
//! | `model.g` | 0.0 | coupling for single-point runs |
//! | `space.n_b` | required | boson cutoff |
//! | `method.kind` | `"nccm"` | `"nccm"` or `"eccm"` (evolve only) |
//! | `method.sub_n` | required | SUB-N level |
//! | `sweep.g_min`, `sweep.g_max`, `sweep.g_step` | 0, `model.g`, 0.005 | coupling grid |
//! | `sweep.levels` | `[method.sub_n]` | SUB-N levels to run |
//! | `integrator.scheme` | `"rk4"` | `"rk4"` or `"rk45"` |
//! | `integrator.dt` | 1e-3 | RK4 step |
//! | `integrator.abs_tol`, `integrator.rel_tol` | 1e-9, 0 | RK45 tolerances |
//! | `integrator.t0`, `integrator.t1` | 0, 10 | time span |
//! | `integrator.output_interval` | 0.01 | spacing of CSV rows |
//! | `integrator.divergence_cap` | 1e6 | amplitude norm treated as blow-up |
//! | `initial.kind` | `"reference"` | `"reference"`, `"coherent"`, `"ed-ground"`, `"amplitude-file"` |
//! | `initial.alpha_re`, `initial.alpha_im` | 0 | coherent amplitude |
//! | `initial.path` | none | amplitude CSV for `"amplitude-file"` |
//! | `newton.tol`, `newton.max_iter` | 1e-12, 100 | stationary solver |
//! | `nhip.map` | `"shift"` | `"shift"`, `"nccm"`, `"constant"`, `"unitary"` |
//! | `nhip.alpha_slope`, `nhip.beta_amp`, `nhip.beta_freq` | 0.1, 0.2, 1.0 | shift-family profile |
//! | `nhip.node_dt` | 0.01 | node spacing of NCCM-generated maps |

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::{IntegratorConfig, NewtonOptions, Scheme};
use crate::hilbert::{RabiParams, SpaceSpec};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub model: ModelConfig,
    pub space: SpaceConfig,
    pub method: MethodConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub newton: NewtonSection,
    #[serde(default)]
    pub nhip: NhipSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default = "one")]
    pub omega: f64,
    #[serde(default = "one")]
    pub omega0: f64,
    #[serde(default)]
    pub g: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self { omega: 1.0, omega0: 1.0, g: 0.0 }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub n_b: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodKind {
    Nccm,
    Eccm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodConfig {
    #[serde(default = "nccm")]
    pub kind: MethodKind,
    pub sub_n: usize,
}

fn nccm() -> MethodKind {
    MethodKind::Nccm
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub g_min: Option<f64>,
    pub g_max: Option<f64>,
    pub g_step: Option<f64>,
    pub levels: Option<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    Rk4,
    Rk45,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    #[serde(default = "rk4")]
    pub scheme: SchemeKind,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    #[serde(default)]
    pub rel_tol: f64,
    #[serde(default)]
    pub t0: f64,
    #[serde(default = "default_t1")]
    pub t1: f64,
    #[serde(default = "default_output_interval")]
    pub output_interval: f64,
    #[serde(default = "default_cap")]
    pub divergence_cap: f64,
}

fn rk4() -> SchemeKind {
    SchemeKind::Rk4
}
fn default_dt() -> f64 {
    1e-3
}
fn default_abs_tol() -> f64 {
    1e-9
}
fn default_t1() -> f64 {
    10.0
}
fn default_output_interval() -> f64 {
    0.01
}
fn default_cap() -> f64 {
    crate::dynamics::DEFAULT_DIVERGENCE_CAP
}

impl Default for IntegratorSection {
    fn default() -> Self {
        Self {
            scheme: SchemeKind::Rk4,
            dt: default_dt(),
            abs_tol: default_abs_tol(),
            rel_tol: 0.0,
            t0: 0.0,
            t1: default_t1(),
            output_interval: default_output_interval(),
            divergence_cap: default_cap(),
        }
    }
}

impl IntegratorSection {
    pub fn to_config(&self) -> IntegratorConfig {
        let scheme = match self.scheme {
            SchemeKind::Rk4 => Scheme::Rk4 { dt: self.dt },
            SchemeKind::Rk45 => Scheme::Rk45 { abs_tol: self.abs_tol, rel_tol: self.rel_tol },
        };
        IntegratorConfig {
            scheme,
            t0: self.t0,
            t1: self.t1,
            output_interval: Some(self.output_interval),
            divergence_cap: self.divergence_cap,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    Reference,
    Coherent,
    EdGround,
    AmplitudeFile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    #[serde(default = "reference")]
    pub kind: InitialKind,
    #[serde(default)]
    pub alpha_re: f64,
    #[serde(default)]
    pub alpha_im: f64,
    pub path: Option<String>,
}

fn reference() -> InitialKind {
    InitialKind::Reference
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self { kind: InitialKind::Reference, alpha_re: 0.0, alpha_im: 0.0, path: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewtonSection {
    #[serde(default = "default_newton_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_newton_tol() -> f64 {
    1e-12
}
fn default_max_iter() -> usize {
    100
}

impl Default for NewtonSection {
    fn default() -> Self {
        Self { tol: default_newton_tol(), max_iter: default_max_iter() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    Shift,
    Nccm,
    Constant,
    Unitary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NhipSection {
    #[serde(default = "shift")]
    pub map: MapKind,
    #[serde(default = "default_slope")]
    pub alpha_slope: f64,
    #[serde(default = "default_beta_amp")]
    pub beta_amp: f64,
    #[serde(default = "one")]
    pub beta_freq: f64,
    #[serde(default = "default_node_dt")]
    pub node_dt: f64,
}

fn shift() -> MapKind {
    MapKind::Shift
}
fn default_slope() -> f64 {
    0.1
}
fn default_beta_amp() -> f64 {
    0.2
}
fn default_node_dt() -> f64 {
    0.01
}

impl Default for NhipSection {
    fn default() -> Self {
        Self { map: MapKind::Shift, alpha_slope: 0.1, beta_amp: 0.2, beta_freq: 1.0, node_dt: 0.01 }
    }
}

impl RunConfig {
    /// Reads a TOML config, or the `config` field of a JSON manifest.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig = if path.extension().is_some_and(|e| e == "json") {
            let value: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            let inner = value
                .get("config")
                .ok_or_else(|| Error::Config(format!("{}: manifest has no `config` field", path.display())))?;
            serde_json::from_value(inner.clone()).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        } else {
            Self::parse(&text)?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn params(&self) -> Result<RabiParams> {
        RabiParams::new(self.model.omega0, self.model.omega, self.model.g)
    }

    pub fn space(&self) -> Result<SpaceSpec> {
        SpaceSpec::new(self.space.n_b, true)
    }

    pub fn levels(&self) -> Vec<usize> {
        self.sweep.levels.clone().unwrap_or_else(|| vec![self.method.sub_n])
    }

    pub fn newton_options(&self) -> NewtonOptions {
        NewtonOptions { tol: self.newton.tol, max_iter: self.newton.max_iter, ..Default::default() }
    }

    /// Coupling grid `g_min, g_min + step, …, g_max`.
    pub fn g_values(&self) -> Vec<f64> {
        let lo = self.sweep.g_min.unwrap_or(0.0);
        let hi = self.sweep.g_max.unwrap_or(self.model.g);
        let step = self.sweep.g_step.unwrap_or(0.005);
        let n = ((hi - lo) / step + 1e-9).floor().max(0.0) as usize;
        (0..=n).map(|i| lo + i as f64 * step).collect()
    }

    /// Checks every numeric field against module preconditions.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        self.params().map_err(|e| Error::Config(e.to_string()))?;
        let space = self.space().map_err(|e| Error::Config(e.to_string()))?;
        for level in self.levels() {
            if level < 1 || level > space.n_b() {
                return bad(format!("SUB-{level} needs 1 <= N <= n_b = {}", space.n_b()));
            }
        }
        if let Some(step) = self.sweep.g_step {
            if !(step > 0.0) {
                return bad("sweep.g_step must be positive".into());
            }
        }
        let (lo, hi) = (self.sweep.g_min.unwrap_or(0.0), self.sweep.g_max.unwrap_or(self.model.g));
        if !(lo >= 0.0) || !(hi >= lo) {
            return bad("sweep needs 0 <= g_min <= g_max".into());
        }
        self.integrator.to_config().validate().map_err(|e| Error::Config(e.to_string()))?;
        if !(self.newton.tol > 0.0) || self.newton.max_iter == 0 {
            return bad("newton.tol and newton.max_iter must be positive".into());
        }
        if self.initial.kind == InitialKind::AmplitudeFile && self.initial.path.is_none() {
            return bad("initial.kind = \"amplitude-file\" needs initial.path".into());
        }
        if !(self.nhip.node_dt > 0.0) {
            return bad("nhip.node_dt must be positive".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "space.n_b = 6\nmethod.sub_n = 2\n";

    #[test]
    fn dotted_and_table_forms_agree() {
        let a = RunConfig::parse("model.g = 0.2\nspace.n_b = 6\nmethod.sub_n = 2\n").unwrap();
        let b = RunConfig::parse("[model]\ng = 0.2\n[space]\nn_b = 6\n[method]\nsub_n = 2\n").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.model.omega, 1.0);
        assert_eq!(a.integrator.scheme, SchemeKind::Rk4);
    }

    #[test]
    fn unknown_keys_are_errors() {
        assert!(RunConfig::parse(&format!("{MINIMAL}model.gg = 1.0\n")).is_err());
        assert!(RunConfig::parse(&format!("{MINIMAL}bogus.x = 1\n")).is_err());
    }

    #[test]
    fn validation() {
        let ok = RunConfig::parse(MINIMAL).unwrap();
        assert!(ok.validate().is_ok());
        let over = RunConfig::parse("space.n_b = 3\nmethod.sub_n = 4\n").unwrap();
        assert!(over.validate().is_err());
        let dt = RunConfig::parse(&format!("{MINIMAL}integrator.dt = -1.0\n")).unwrap();
        assert!(dt.validate().is_err());
        let file = RunConfig::parse(&format!("{MINIMAL}initial.kind = \"amplitude-file\"\n")).unwrap();
        assert!(file.validate().is_err());
    }

    #[test]
    fn g_grid_is_inclusive() {
        let c = RunConfig::parse(&format!("{MINIMAL}sweep.g_max = 0.02\nsweep.g_step = 0.005\n")).unwrap();
        assert_eq!(c.g_values().len(), 5);
    }

    #[test]
    fn json_round_trip() {
        let c = RunConfig::parse(MINIMAL).unwrap();
        let v = serde_json::to_value(&c).unwrap();
        let back: RunConfig = serde_json::from_value(v).unwrap();
        assert_eq!(c, back);
    }
}
