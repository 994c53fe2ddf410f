//! TOML experiment configuration. Every block rejects unknown keys and the
//! whole tree is validated before any computation starts.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{Case, DataFamily, HSpec, NuShape};
use crate::error::{Error, Result};
use crate::field::GridGeometry;
use crate::heat::HeatModel;
use crate::norms::{NormConfig, NormSpec};
use crate::system::{IterationOptions, SystemParams, TimeSchedule};
use crate::verify::dichotomy::log_c_grid;
use crate::verify::suites::Suite;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "SEMILINEAR_LAB_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    #[serde(rename = "N")]
    pub dim: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
    #[serde(rename = "M")]
    pub cells: usize,
}

impl GeometryConfig {
    pub fn build(&self) -> Result<GridGeometry> {
        GridGeometry::new(self.dim, self.half_width, self.cells)
    }
}

/// `n` log-spaced amplitudes on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CGridConfig {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl CGridConfig {
    pub fn values(&self) -> Vec<f64> {
        log_c_grid(self.lo, self.hi, self.n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "defaults::n_max")]
    pub n_max: usize,
    #[serde(default = "defaults::tol_converge")]
    pub tol_converge: f64,
    #[serde(default = "defaults::blowup_factor")]
    pub blowup_factor: f64,
    #[serde(default = "defaults::monotone_tol")]
    pub monotone_tol: f64,
    #[serde(default = "defaults::heat_model")]
    pub heat_model: HeatModel,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_grid: Option<CGridConfig>,
    /// Explicit amplitudes; overrides `c_grid` when non-empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub c_values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub suites: Vec<Suite>,
    /// Evaluate the case monitors during `iterate` and `dichotomy`.
    #[serde(default = "defaults::yes")]
    pub monitor: bool,
}

mod defaults {
    use super::*;

    pub fn n_max() -> usize {
        IterationOptions::default().n_max
    }
    pub fn tol_converge() -> f64 {
        IterationOptions::default().tol_converge
    }
    pub fn blowup_factor() -> f64 {
        IterationOptions::default().blowup_factor
    }
    pub fn monotone_tol() -> f64 {
        IterationOptions::default().monotone_tol
    }
    pub fn heat_model() -> HeatModel {
        IterationOptions::default().heat_model
    }
    pub fn yes() -> bool {
        true
    }
    pub fn prefix() -> String {
        "run".to_string()
    }
    pub fn formats() -> Vec<OutputFormat> {
        vec![OutputFormat::Json, OutputFormat::Csv]
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_max: defaults::n_max(),
            tol_converge: defaults::tol_converge(),
            blowup_factor: defaults::blowup_factor(),
            monotone_tol: defaults::monotone_tol(),
            heat_model: defaults::heat_model(),
            seed: 0,
            c_grid: None,
            c_values: Vec::new(),
            suites: Vec::new(),
            monitor: true,
        }
    }
}

impl RunConfig {
    pub fn iteration(&self) -> IterationOptions {
        IterationOptions {
            n_max: self.n_max,
            tol_converge: self.tol_converge,
            blowup_factor: self.blowup_factor,
            monotone_tol: self.monotone_tol,
            heat_model: self.heat_model,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
    /// Field snapshots in the binary format.
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory; falls back to `$SEMILINEAR_LAB_OUT`, then `./out`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default = "defaults::prefix")]
    pub prefix: String,
    #[serde(default = "defaults::formats")]
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: None, prefix: defaults::prefix(), formats: defaults::formats() }
    }
}

impl OutputConfig {
    pub fn resolve_dir(&self) -> PathBuf {
        self.dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn wants(&self, format: OutputFormat) -> bool {
        self.formats.contains(&format)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub geometry: GeometryConfig,
    pub params: SystemParams,
    pub schedule: TimeSchedule,
    pub data: DataFamily,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub norms: Vec<NormConfig>,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn config_error(path: &str, message: impl Into<String>) -> Error {
    Error::Config { path: path.to_string(), message: message.into() }
}

fn at<T>(path: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| config_error(path, e.to_string()))
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let de = toml::de::Deserializer::parse(text).map_err(|e| config_error("", e.to_string().trim_end()))?;
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_error(&path, e.into_inner().to_string().trim_end())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(&path.display().to_string(), e.to_string()))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    /// Checks every block against the preconditions of the operations it feeds.
    pub fn validate(&self) -> Result<()> {
        let g = at("geometry", self.geometry.build())?;
        at("params", self.params.validate())?;
        if self.params.dim != g.dim() {
            return Err(config_error("params.N", format!("N = {} but geometry.N = {}", self.params.dim, g.dim())));
        }
        at("schedule", self.schedule.validate())?;
        let case = self.params.case().case;
        if self.data.case != case {
            return Err(config_error("data.case", format!("data is for case {} but (N, p, q) is case {case}", self.data.case)));
        }
        for (name, c) in [("data.c1", self.data.c1), ("data.c2", self.data.c2), ("data.nu_mass", self.data.nu_mass)] {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(config_error(name, format!("{c} must be finite and non-negative")));
            }
        }
        for (i, n) in self.norms.iter().enumerate() {
            at(&format!("norms[{i}]"), n.build().and_then(|s| s.validate()))?;
        }
        at("run", self.run.iteration().validate())?;
        if let Some(cg) = &self.run.c_grid {
            if !(cg.lo > 0.0 && cg.hi > cg.lo && cg.hi.is_finite() && cg.n >= 1) {
                return Err(config_error("run.c_grid", "need 0 < lo < hi < ∞ and n ≥ 1"));
            }
        }
        let cv = &self.run.c_values;
        if cv.iter().any(|c| !(*c >= 0.0 && c.is_finite())) || cv.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(config_error("run.c_values", "amplitudes must be finite, non-negative and strictly increasing"));
        }
        if self.output.formats.is_empty() {
            return Err(config_error("output.formats", "at least one format is required"));
        }
        Ok(())
    }

    pub fn norm_specs(&self) -> Result<Vec<NormSpec>> {
        self.norms.iter().map(|n| n.build()).collect()
    }

    pub fn c_grid(&self) -> Vec<f64> {
        if !self.run.c_values.is_empty() {
            return self.run.c_values.clone();
        }
        self.run.c_grid.unwrap_or(CGridConfig { lo: 0.01, hi: 10.0, n: 13 }).values()
    }

    /// Desk-scale defaults for each case; the amplitude is `c1 = c2 = c`.
    pub fn default_for_case(case: Case, c: f64) -> Self {
        let (dim, p, q, l, m, t, j) = match case {
            Case::A => (2, 2.0, 3.0, 4.0, 128, 0.04, 32),
            Case::B => (2, 1.5, 4.0, 4.0, 64, 0.25, 16),
            Case::C => (1, 3.0, 3.0, 4.0, 512, 0.08, 32),
            Case::D => (1, 1.5, 4.0, 4.0, 256, 0.1, 16),
            Case::E => (1, 2.0, 3.0, 4.0, 256, 0.1, 16),
            Case::F => (1, 1.2, 2.0, 4.0, 64, 0.05, 16),
        };
        let mut data = DataFamily::new(case, c, c);
        match case {
            Case::D => data = data.with_h(HSpec::log(1.0)),
            Case::E => data = data.with_h(HSpec::log(2.0)),
            Case::F => data = data.with_nu(1.0, NuShape::Ball),
            _ => {}
        }
        Self {
            geometry: GeometryConfig { dim, half_width: l, cells: m },
            params: SystemParams::new(dim, p, q, 1.0, 1.0).expect("built-in parameters"),
            schedule: TimeSchedule::new(t, j, 2.0).expect("built-in schedule"),
            data,
            norms: Vec::new(),
            run: RunConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

/// Small-data experiments, one or two per case, used by the iteration and
/// supersolution suites.
pub fn default_experiment_suite() -> Vec<(String, ExperimentConfig)> {
    let mut out = Vec::new();
    for (case, c) in [(Case::A, 0.01), (Case::B, 0.02), (Case::C, 0.05), (Case::D, 0.05), (Case::E, 0.05), (Case::F, 0.05)] {
        let mut cfg = ExperimentConfig::default_for_case(case, c);
        match case {
            Case::A => {
                cfg.geometry.cells = 64;
                cfg.schedule = TimeSchedule::new(0.04, 16, 2.0).expect("schedule");
            }
            Case::C => cfg.geometry.cells = 256,
            _ => {}
        }
        out.push((format!("case_{}_small", format!("{case}").to_lowercase()), cfg));
    }
    // one run past the threshold, where monotonicity must hold up to blow-up
    let mut big = ExperimentConfig::default_for_case(Case::C, 3.0);
    big.geometry.cells = 256;
    out.push(("case_c_large".to_string(), big));
    out
}
