use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Theorem1,
    Theorem2,
    Lemmas,
    Decompositions,
    Weights,
    All,
}

impl Suite {
    pub const ORDER: [Suite; 5] = [Suite::Weights, Suite::Lemmas, Suite::Decompositions, Suite::Theorem1, Suite::Theorem2];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Theorem1 => "theorem1",
            Suite::Theorem2 => "theorem2",
            Suite::Lemmas => "lemmas",
            Suite::Decompositions => "decompositions",
            Suite::Weights => "weights",
            Suite::All => "all",
        }
    }
}

/// Test functions as DSL strings; an empty list selects the default family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    #[serde(default)]
    pub functions: Vec<String>,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    42
}

impl Default for FamilyConfig {
    fn default() -> Self {
        Self { functions: Vec::new(), seed: default_seed() }
    }
}

/// Weights as DSL strings. `v = μ^{(1+α)p} w` and `σ = μ^{1+α} τ` are derived.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsConfig {
    #[serde(default = "one")]
    pub mu: String,
    #[serde(default = "one")]
    pub w: String,
    #[serde(default = "one")]
    pub tau: String,
}

fn one() -> String {
    "constant(1)".into()
}

impl Default for WeightsConfig {
    fn default() -> Self {
        Self { mu: one(), w: one(), tau: one() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    /// Dyadic levels `J` of the default kernel.
    #[serde(default = "default_levels")]
    pub levels: u32,
    /// `(x, K(x))` knots for x < 0; replaces the default kernel when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<(f64, f64)>>,
}

fn default_levels() -> u32 {
    3
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self { levels: default_levels(), table: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DyadicConfig {
    pub n_min: i32,
    pub n_max: i32,
}

/// Scales of the Triebel-Lizorkin functionals, shared by every grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HGridConfig {
    pub h_min: f64,
    pub h_max: f64,
    pub count: usize,
}

impl Default for HGridConfig {
    fn default() -> Self {
        Self { h_min: 1.0 / 32.0, h_max: 2.0, count: 48 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative slack of the exact-triangle checks.
    #[serde(default = "default_quadrature")]
    pub quadrature: f64,
    /// Largest accepted relative change between consecutive grids, in percent.
    #[serde(default = "default_drift")]
    pub drift_pct: f64,
    /// Cap on class constants and fitted constants.
    #[serde(default = "default_cap")]
    pub constant_cap: f64,
}

fn default_quadrature() -> f64 {
    1e-6
}

fn default_drift() -> f64 {
    10.0
}

fn default_cap() -> f64 {
    10.0
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { quadrature: default_quadrature(), drift_pct: default_drift(), constant_cap: default_cap() }
    }
}

/// Sample points for the decomposition and lemma scans.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    #[serde(default = "default_xs")]
    pub xs: Vec<f64>,
    #[serde(default = "default_hs")]
    pub hs: Vec<f64>,
}

fn default_xs() -> Vec<f64> {
    vec![-3.0, -2.0, -1.0, 0.0, 1.0]
}

fn default_hs() -> Vec<f64> {
    vec![0.0625, 0.125, 0.25, 0.5, 1.0]
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { xs: default_xs(), hs: default_hs() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: (f64, f64),
    pub grid_sizes: Vec<usize>,
    #[serde(default)]
    pub family: FamilyConfig,
    #[serde(default)]
    pub weights: WeightsConfig,
    /// The symbol `b`.
    #[serde(default = "default_symbol")]
    pub symbol: String,
    pub alpha: f64,
    pub p: f64,
    #[serde(default)]
    pub kernel: KernelConfig,
    /// Dyadic range of `S^+`; the grid default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dyadic: Option<DyadicConfig>,
    #[serde(default)]
    pub h_grid: HGridConfig,
    #[serde(default)]
    pub tolerance: Tolerances,
    #[serde(default)]
    pub scan: ScanConfig,
    pub suites: Vec<Suite>,
}

fn default_symbol() -> String {
    "power(0.5)".into()
}

impl ExperimentConfig {
    pub fn from_toml(s: &str) -> Result<Self> {
        let c: Self = toml::from_str(s).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::ConfigInvalid(e.to_string()))
    }

    /// A small configuration that touches every suite except the second theorem.
    pub fn demo() -> Self {
        Self {
            domain: (-8.0, 8.0),
            grid_sizes: vec![1025, 2049],
            family: FamilyConfig {
                functions: vec![
                    "bump(0, 1)".into(),
                    "indicator(-1, 1)".into(),
                    "spower(0.5) * indicator(-3, 3)".into(),
                    "random(8) * indicator(-3, 3)".into(),
                ],
                seed: default_seed(),
            },
            weights: WeightsConfig::default(),
            symbol: default_symbol(),
            alpha: 0.5,
            p: 2.0,
            kernel: KernelConfig::default(),
            dyadic: None,
            h_grid: HGridConfig::default(),
            tolerance: Tolerances::default(),
            scan: ScanConfig { xs: vec![-2.0, -1.0, 0.0], hs: vec![0.125, 0.25, 0.5] },
            suites: vec![Suite::Weights, Suite::Lemmas, Suite::Decompositions, Suite::Theorem1],
        }
    }

    /// Built-in configuration by name.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "demo" => Some(Self::demo()),
            _ => None,
        }
    }

    /// Suites in execution order, with `all` expanded.
    pub fn selected_suites(&self) -> Vec<Suite> {
        if self.suites.contains(&Suite::All) {
            return Suite::ORDER.to_vec();
        }
        Suite::ORDER.iter().copied().filter(|s| self.suites.contains(s)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::ConfigInvalid(m));
        let (lo, hi) = self.domain;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return bad(format!("domain must be a finite interval, got ({lo}, {hi})"));
        }
        if self.grid_sizes.is_empty() {
            return bad("grid_sizes is empty".into());
        }
        if self.grid_sizes.windows(2).any(|w| w[1] <= w[0]) {
            return bad("grid_sizes must be strictly increasing".into());
        }
        if self.grid_sizes[0] < 3 {
            return bad("grids need at least 3 nodes".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if !(self.p > 1.0 && self.p.is_finite()) {
            return bad(format!("p must lie in (1, ∞), got {}", self.p));
        }
        if let Some(d) = self.dyadic {
            if d.n_min >= d.n_max {
                return bad(format!("dyadic range needs n_min < n_max, got [{}, {}]", d.n_min, d.n_max));
            }
        }
        let h = self.h_grid;
        if !(h.h_min > 0.0 && h.h_min <= h.h_max && h.count > 0) {
            return bad(format!("invalid h-grid {h:?}"));
        }
        if h.h_max > (hi - lo) / 2.0 {
            return bad(format!("h_max {} exceeds half the domain", h.h_max));
        }
        let t = self.tolerance;
        if !(t.quadrature >= 0.0 && t.drift_pct > 0.0 && t.constant_cap > 0.0) {
            return bad(format!("invalid tolerances {t:?}"));
        }
        if self.scan.xs.is_empty() || self.scan.hs.is_empty() || self.scan.hs.iter().any(|h| !(*h > 0.0)) {
            return bad("scan needs points and positive scales".into());
        }
        if self.kernel.table.as_ref().is_some_and(|t| t.len() < 2) {
            return bad("kernel table needs at least two knots".into());
        }
        Ok(())
    }
}
