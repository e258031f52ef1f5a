//! Experiment configuration for `dunkl-lab`.
//!
//! A single TOML (or JSON, by extension) document. Every table is optional
//! and falls back to the library defaults; unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::abstract_semigroup::GENERATOR_NAMES;
use crate::error::{DunklError, Result};
use crate::heat_poisson::TimeGrid;
use crate::lipschitz_norms::{corpus_by_name, NormSettings, SpaceGrid};
use crate::root_system::RootSystemSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = DunklError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(DunklError::Config(format!("format must be csv or json (got '{other}')"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeGridConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl Default for TimeGridConfig {
    fn default() -> Self {
        Self { t_min: 1e-3, t_max: 10.0, points: 60 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpaceGridConfig {
    pub half_width: f64,
    pub linear: usize,
    pub dyadic: usize,
}

impl Default for SpaceGridConfig {
    fn default() -> Self {
        Self { half_width: std::f64::consts::PI, linear: 512, dyadic: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    /// Gauss–Laguerre nodes for matrix Bessel potentials
    pub bessel_nodes: usize,
    /// Gauss–Legendre nodes per contour panel
    pub contour_nodes: usize,
    pub contour_panels_per_decade: usize,
    /// panel width in ln u for matrix subordination
    pub subordination_width: f64,
    pub subordination_nodes: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            bessel_nodes: crate::abstract_semigroup::BESSEL_NODES,
            contour_nodes: 16,
            contour_panels_per_decade: 6,
            subordination_width: 0.5,
            subordination_nodes: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub root_system: Option<RootSystemSpec>,
    #[serde(default = "default_k")]
    pub k: Vec<f64>,
    #[serde(default = "default_beta")]
    pub beta: Vec<f64>,
    /// corpus member names; empty selects the default corpus
    #[serde(default)]
    pub corpus: Vec<String>,
    #[serde(default)]
    pub time_grid: TimeGridConfig,
    #[serde(default)]
    pub space_grid: SpaceGridConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    /// per-check tolerances; `default` applies to checks without an entry
    #[serde(default = "default_tolerances")]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub bounds: Bounds,
    #[serde(default = "default_band")]
    pub band: [f64; 2],
    #[serde(default = "default_generators")]
    pub generators: Vec<String>,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Acceptance bounds that are not quadrature tolerances; `--tol` leaves
/// them alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Bounds {
    /// |fitted slope − (β − 1)|
    pub exponent: f64,
    /// |fitted slope − (β + γ − 1)| for the Bessel shift
    pub bessel_exponent: f64,
    /// relative change of the interpolation constant under grid doubling
    pub interpolation_stability: f64,
    /// relative change of the multiplier sup under grid doubling
    pub multiplier_stability: f64,
}

impl Default for Bounds {
    fn default() -> Self {
        Self { exponent: 0.05, bessel_exponent: 0.07, interpolation_stability: 0.10, multiplier_stability: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: OutputFormat,
}

fn default_k() -> Vec<f64> {
    vec![0.0, 0.5, 1.0]
}
fn default_beta() -> Vec<f64> {
    vec![0.3, 0.5, 0.7]
}
fn default_band() -> [f64; 2] {
    [1.0 / 50.0, 50.0]
}
fn default_generators() -> Vec<String> {
    GENERATOR_NAMES.iter().map(|s| s.to_string()).collect()
}
fn default_tolerances() -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    m.insert("default".into(), 1e-6);
    m.insert("kernels".into(), 1e-6);
    m.insert("semigroup".into(), 1e-6);
    m.insert("symmetry".into(), 1e-12);
    m.insert("ode".into(), 1e-8);
    m.insert("classical".into(), 1e-8);
    m.insert("norms".into(), 1e-8);
    m.insert("calculus".into(), 1e-7);
    m
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            root_system: None,
            k: default_k(),
            beta: default_beta(),
            corpus: Vec::new(),
            time_grid: TimeGridConfig::default(),
            space_grid: SpaceGridConfig::default(),
            quadrature: QuadratureConfig::default(),
            tolerances: default_tolerances(),
            bounds: Bounds::default(),
            band: default_band(),
            generators: default_generators(),
            output: OutputConfig::default(),
        }
    }
}

/// Values given on the command line; `None` keeps the file value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub k: Option<Vec<f64>>,
    pub beta: Option<Vec<f64>>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub generators: Option<Vec<String>>,
}

impl ExperimentConfig {
    /// Parses TOML, or JSON when `json` is set. Errors carry the line and
    /// field the parser stopped at.
    pub fn parse(text: &str, json: bool) -> Result<Self> {
        let cfg: Self = if json {
            serde_json::from_str(text)
                .map_err(|e| DunklError::Config(format!("line {}, column {}: {e}", e.line(), e.column())))?
        } else {
            toml::from_str(text).map_err(|e| DunklError::Config(toml_diagnostic(text, &e)))?
        };
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| DunklError::Config(format!("cannot read {}: {e}", path.display())))?;
        let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        Self::parse(&text, json).map_err(|e| match e {
            DunklError::Config(m) => DunklError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(k) = &o.k {
            self.k = k.clone();
        }
        if let Some(b) = &o.beta {
            self.beta = b.clone();
        }
        if let Some(t) = o.tol {
            // a command-line tolerance replaces every entry of the map
            for v in self.tolerances.values_mut() {
                *v = t;
            }
            self.tolerances.insert("default".into(), t);
        }
        if let Some(p) = &o.out {
            self.output.path = Some(p.clone());
        }
        if let Some(f) = o.format {
            self.output.format = f;
        }
        if let Some(g) = &o.generators {
            self.generators = g.clone();
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(DunklError::Config(m));
        for (name, &t) in &self.tolerances {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("tolerances.{name}: must be a positive number (got {t})"));
            }
        }
        if self.beta.is_empty() {
            return bad("beta: list is empty".into());
        }
        if let Some(b) = self.beta.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
            return bad(format!("beta: entries must be positive (got {b})"));
        }
        if self.k.is_empty() {
            return bad("k: list is empty".into());
        }
        if let Some(k) = self.k.iter().find(|k| !(**k >= 0.0 && k.is_finite())) {
            return bad(format!("k: multiplicities must be non-negative (got {k})"));
        }
        if let Some(rs) = &self.root_system {
            crate::root_system::RootSystem::from_spec(rs).map_err(|e| DunklError::Config(format!("root_system: {e}")))?;
        }
        self.time_grid().map_err(|e| DunklError::Config(format!("time_grid: {e}")))?;
        self.space_grid().map_err(|e| DunklError::Config(format!("space_grid: {e}")))?;
        let b = &self.bounds;
        for (name, v) in [
            ("exponent", b.exponent),
            ("bessel_exponent", b.bessel_exponent),
            ("interpolation_stability", b.interpolation_stability),
            ("multiplier_stability", b.multiplier_stability),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("bounds.{name}: must be a positive number (got {v})"));
            }
        }
        let [lo, hi] = self.band;
        if !(lo > 0.0 && hi > lo) {
            return bad(format!("band: need 0 < low < high (got [{lo}, {hi}])"));
        }
        for c in &self.corpus {
            corpus_by_name(c, self.beta[0]).map_err(|e| DunklError::Config(format!("corpus: {e}")))?;
        }
        for g in &self.generators {
            if !GENERATOR_NAMES.contains(&g.as_str()) {
                return bad(format!("generators: unknown generator '{g}' (known: {})", GENERATOR_NAMES.join(", ")));
            }
        }
        let q = &self.quadrature;
        if q.bessel_nodes < 2 || q.contour_nodes < 2 || q.contour_panels_per_decade == 0 || q.subordination_nodes < 2 {
            return bad("quadrature: node and panel counts must be at least 2 (panels at least 1)".into());
        }
        if !(q.subordination_width > 0.0) {
            return bad("quadrature.subordination_width: must be positive".into());
        }
        Ok(())
    }

    /// Tolerance for a named check, falling back to `default`.
    pub fn tol(&self, name: &str) -> f64 {
        self.tolerances.get(name).or_else(|| self.tolerances.get("default")).copied().unwrap_or(1e-6)
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        TimeGrid::log_spaced(self.time_grid.t_min, self.time_grid.t_max, self.time_grid.points)
    }

    pub fn space_grid(&self) -> Result<SpaceGrid> {
        SpaceGrid::new(self.space_grid.half_width, self.space_grid.linear, self.space_grid.dyadic)
    }

    pub fn norm_settings(&self) -> Result<NormSettings> {
        Ok(NormSettings {
            times: self.time_grid()?,
            grid: self.space_grid()?,
            tol: self.tol("norms"),
            band: (self.band[0], self.band[1]),
        })
    }
}

fn toml_diagnostic(text: &str, e: &toml::de::Error) -> String {
    let msg = e.message().trim();
    match e.span() {
        Some(span) => {
            let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
            let col = span.start - text[..span.start.min(text.len())].rfind('\n').map_or(0, |p| p + 1) + 1;
            format!("line {line}, column {col}: {msg}")
        }
        None => msg.to_string(),
    }
}
