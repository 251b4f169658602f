//! Calderón-Zygmund kernels with one-sided support and a numerical validator
//! for the cancellation (a), size (b) and smoothness (c) conditions.

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::Serialize;

use crate::error::{Error, Result};

/// Half-line carrying the kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportSide {
    /// `(-∞, 0)`: the kernel of `T^+`.
    NegativeAxis,
    /// `(0, ∞)`: the kernel of `T^-`.
    PositiveAxis,
}

/// Estimated constants of conditions (a), (b), (c).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelConstants {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
}

/// A scalar kernel `K` with declared support side.
#[derive(Clone)]
pub struct KernelSpec {
    name: String,
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    support: SupportSide,
    constants: Option<KernelConstants>,
    pv_epsilon: Option<f64>,
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSpec")
            .field("name", &self.name)
            .field("support", &self.support)
            .field("constants", &self.constants)
            .field("pv_epsilon", &self.pv_epsilon)
            .finish()
    }
}

impl KernelSpec {
    /// Wraps `eval`; values on the wrong half-line (and at 0) are forced to 0.
    pub fn from_fn(
        name: impl Into<String>,
        support: SupportSide,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let eval: Arc<dyn Fn(f64) -> f64 + Send + Sync> = match support {
            SupportSide::NegativeAxis => Arc::new(move |x| if x < 0.0 { eval(x) } else { 0.0 }),
            SupportSide::PositiveAxis => Arc::new(move |x| if x > 0.0 { eval(x) } else { 0.0 }),
        };
        Self { name: name.into(), eval, support, constants: None, pv_epsilon: None }
    }

    /// Linear interpolation through `(x, K(x))` samples, zero outside their range.
    pub fn from_table(name: impl Into<String>, support: SupportSide, mut table: Vec<(f64, f64)>) -> Result<Self> {
        if table.len() < 2 {
            return Err(Error::EmptyGrid("kernel table needs at least two points"));
        }
        table.sort_by(|a, b| a.0.total_cmp(&b.0));
        if table.iter().any(|(x, v)| !x.is_finite() || !v.is_finite()) {
            return Err(Error::ParameterOutOfRange("kernel table entries must be finite".into()));
        }
        Ok(Self::from_fn(name, support, move |x| {
            let (first, last) = (table[0].0, table[table.len() - 1].0);
            if x < first || x > last {
                return 0.0;
            }
            let k = table.partition_point(|p| p.0 <= x).clamp(1, table.len() - 1);
            let ((x0, v0), (x1, v1)) = (table[k - 1], table[k]);
            if x1 == x0 {
                v1
            } else {
                v0 + (v1 - v0) * (x - x0) / (x1 - x0)
            }
        }))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn support(&self) -> SupportSide {
        self.support
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn constants(&self) -> Option<KernelConstants> {
        self.constants
    }

    pub fn is_validated(&self) -> bool {
        self.constants.is_some()
    }

    /// Marks the kernel as validated with the given constants.
    pub fn with_constants(mut self, constants: KernelConstants) -> Self {
        self.constants = Some(constants);
        self
    }

    pub fn with_pv_epsilon(mut self, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::ParameterOutOfRange(format!("pv epsilon must be positive, got {eps}")));
        }
        self.pv_epsilon = Some(eps);
        Ok(self)
    }

    /// Inner cutoff: the configured value, or `2Δx`.
    pub fn pv_epsilon_for(&self, dx: f64) -> f64 {
        self.pv_epsilon.unwrap_or(2.0 * dx)
    }
}

fn raw_bump(x: f64) -> f64 {
    let t = 2.0 * (x + 1.5);
    if t.abs() < 1.0 {
        (-1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

/// Smooth bump supported in `(-2, -1)` with unit integral.
pub(crate) fn psi(x: f64) -> f64 {
    static NORM: OnceLock<f64> = OnceLock::new();
    let z = *NORM.get_or_init(|| gauss(raw_bump, -2.0, -1.0, 20_000));
    raw_bump(x) / z
}

/// Composite 5-point Gauss-Legendre rule on `m` panels. Endpoints are never
/// sampled, so jumps placed at `a` or `b` cost nothing.
fn gauss(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    const NODES: [f64; 5] = [
        -0.906_179_845_938_664,
        -0.538_469_310_105_683,
        0.0,
        0.538_469_310_105_683,
        0.906_179_845_938_664,
    ];
    const WEIGHTS: [f64; 5] = [
        0.236_926_885_056_189,
        0.478_628_670_499_366,
        0.568_888_888_888_889,
        0.478_628_670_499_366,
        0.236_926_885_056_189,
    ];
    let m = m.max(1);
    let h = (b - a) / m as f64;
    let mut total = 0.0;
    for i in 0..m {
        let mid = a + h * (i as f64 + 0.5);
        let mut s = 0.0;
        for (t, w) in NODES.iter().zip(WEIGHTS) {
            s += w * f(mid + 0.5 * h * t);
        }
        total += 0.5 * h * s;
    }
    total
}

/// Lacunary kernel `K(x) = Σ_{j=-J}^{J} (-1)^j 2^{-j} ψ(2^{-j} x)`.
///
/// Each term has unit integral and lives on `(-2^{j+1}, -2^j)`, so at most one
/// term is nonzero at any `x` and every truncated integral is a partial
/// alternating sum of ±1 with fractional ends, bounded by 1.
pub fn default_kernel(levels: u32) -> KernelSpec {
    let jmax = levels.max(1) as i32;
    KernelSpec::from_fn(format!("lacunary(J={jmax})"), SupportSide::NegativeAxis, move |x| {
        let ax = -x;
        let mut j = ax.log2().floor() as i32;
        // keep 2^j <= ax < 2^{j+1} exact at dyadic points
        if 2f64.powi(j) > ax {
            j -= 1;
        } else if 2f64.powi(j + 1) <= ax {
            j += 1;
        }
        if j.abs() > jmax {
            return 0.0;
        }
        let scale = 2f64.powi(-j);
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sign * scale * psi(x * scale)
    })
}

/// Sample sets for the validator.
#[derive(Debug, Clone)]
pub struct ValidationGrids {
    /// Inner cutoffs, decreasing.
    pub eps: Vec<f64>,
    /// Outer cutoffs, increasing.
    pub big: Vec<f64>,
    /// `(x, y)` pairs with `|x| > 2|y|`.
    pub pairs: Vec<(f64, f64)>,
    /// Log-scale quadrature samples per unit of `ln |x|`.
    pub resolution: usize,
}

fn log_space(a: f64, b: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![a];
    }
    (0..count)
        .map(|k| (a.ln() + (b.ln() - a.ln()) * k as f64 / (count - 1) as f64).exp())
        .collect()
}

impl ValidationGrids {
    /// Cutoffs spanning `[1e-3, 1e3]`; `level` doubles every density.
    pub fn standard(level: u32) -> Self {
        let m = 1usize << level;
        let eps = log_space(1.0, 1e-3, 12 * m + 1);
        let big = log_space(1.0, 1e3, 12 * m + 1);
        let xs = log_space(1e-3, 1e3, 48 * 14 * m + 1);
        let rhos = log_space(1e-3, 0.45, 16 * m + 1);
        let mut pairs = Vec::with_capacity(xs.len() * rhos.len() * 4);
        for &ax in &xs {
            for sx in [-1.0, 1.0] {
                for &r in &rhos {
                    for sr in [-1.0, 1.0] {
                        pairs.push((sx * ax, sr * r * ax));
                    }
                }
            }
        }
        Self { eps, big, pairs, resolution: 200 * m }
    }
}

/// Thresholds used to declare a violation.
#[derive(Debug, Clone, Copy)]
pub struct ValidationOptions {
    /// Any estimate above this is a violation.
    pub blowup: f64,
    /// Growth of the estimate over its finest decade beyond this relative
    /// amount is a violation.
    pub drift: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self { blowup: 1e4, drift: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelCondition {
    /// bounded truncated integrals
    Cancellation,
    /// `|K(x)| <= B2/|x|`
    Size,
    /// `|K(x-y) - K(x)| <= B3 |y| / |x|²`
    Smoothness,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelViolation {
    pub condition: KernelCondition,
    /// Sample point(s) of the offending estimate: `(ε, N)` for (a), `(x, 0)`
    /// for (b), `(x, y)` for (c).
    pub witness: (f64, f64),
    /// Magnitude of the estimate at the witness.
    pub value: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelReport {
    pub constants: KernelConstants,
    pub b1_witness: (f64, f64),
    pub b2_witness: f64,
    pub b3_witness: (f64, f64),
    pub violations: Vec<KernelViolation>,
}

impl KernelReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violation(&self, condition: KernelCondition) -> Option<&KernelViolation> {
        self.violations.iter().find(|v| v.condition == condition)
    }

    /// Largest relative change of the three constants between two reports.
    pub fn drift(&self, other: &KernelReport) -> f64 {
        let rel = |a: f64, b: f64| if a == b { 0.0 } else { (a - b).abs() / a.abs().max(b.abs()) };
        let (c, d) = (self.constants, other.constants);
        rel(c.b1, d.b1).max(rel(c.b2, d.b2)).max(rel(c.b3, d.b3))
    }
}

/// Estimates `(B1, B2, B3)` on the given samples and flags violations.
///
/// B1 is the max of `|∫_{ε<|x|<N} K|` over the cutoff pairs (log-scale
/// Gauss-Legendre quadrature), B2 the max of `|x K(x)|` over the quadrature samples,
/// B3 the max of `|K(x-y) - K(x)| x² / |y|` over the pairs. A condition is
/// violated when its estimate exceeds `blowup`, or when the estimate over the
/// finest decade of its sample scale exceeds the estimate over the rest by
/// more than `drift` (monotone growth under refinement toward 0).
pub fn validate_kernel(k: &KernelSpec, grids: &ValidationGrids, opts: ValidationOptions) -> Result<KernelReport> {
    if grids.eps.is_empty() || grids.big.is_empty() {
        return Err(Error::EmptyGrid("cutoff grids"));
    }
    if grids.pairs.is_empty() {
        return Err(Error::EmptyGrid("pair grid"));
    }
    let eps_min = grids.eps.iter().copied().fold(f64::INFINITY, f64::min);
    let big_max = grids.big.iter().copied().fold(0.0, f64::max);
    if !(eps_min > 0.0) {
        return Err(Error::ParameterOutOfRange("cutoffs must be positive".into()));
    }
    let mut violations = Vec::new();

    // (a): cumulative ∫_{eps_min < |x| < u} K at every cutoff, by Gauss-Legendre in s = ln|x|
    let mut cuts: Vec<f64> = grids.eps.iter().chain(&grids.big).copied().collect();
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup();
    let phi = |s: f64| {
        let x = s.exp();
        (k.eval(x) + k.eval(-x)) * x
    };
    let mut cumulative = vec![0.0; cuts.len()];
    for i in 1..cuts.len() {
        let (a, b) = (cuts[i - 1].ln(), cuts[i].ln());
        let m = ((b - a) * grids.resolution as f64 / 4.0).ceil() as usize;
        cumulative[i] = cumulative[i - 1] + gauss(phi, a, b, m);
    }
    let at = |u: f64| cumulative[cuts.partition_point(|c| *c < u)];
    let split = 10.0 * eps_min;
    let (mut b1, mut b1_witness) = (0.0f64, (f64::NAN, f64::NAN));
    let (mut coarse, mut fine) = (0.0f64, 0.0f64);
    let mut fine_witness = (f64::NAN, f64::NAN, 0.0);
    for &e in &grids.eps {
        for &n in &grids.big {
            if e >= n {
                continue;
            }
            let v = (at(n) - at(e)).abs();
            if v > b1 {
                b1 = v;
                b1_witness = (e, n);
            }
            if e >= split {
                coarse = coarse.max(v);
            } else if v > fine {
                fine = v;
                fine_witness = (e, n, v);
            }
        }
    }
    if b1 > opts.blowup {
        violations.push(KernelViolation {
            condition: KernelCondition::Cancellation,
            witness: b1_witness,
            value: b1,
            reason: format!("truncated integral {b1:.4} exceeds blow-up threshold"),
        });
    } else if coarse > 0.0 && fine > coarse * (1.0 + opts.drift) {
        violations.push(KernelViolation {
            condition: KernelCondition::Cancellation,
            witness: (fine_witness.0, fine_witness.1),
            value: fine_witness.2,
            reason: format!("truncated integrals grow as ε shrinks: {coarse:.4} -> {fine:.4}"),
        });
    }

    // (b): |x K(x)| on the quadrature samples
    let count = ((big_max / eps_min).ln() * grids.resolution as f64).ceil() as usize + 1;
    let mut b2 = 0.0f64;
    let mut b2_witness = f64::NAN;
    let (mut coarse, mut fine, mut fine_x) = (0.0f64, 0.0f64, f64::NAN);
    for ax in log_space(eps_min, big_max, count) {
        for x in [-ax, ax] {
            let v = (x * k.eval(x)).abs();
            if v > b2 {
                b2 = v;
                b2_witness = x;
            }
            if ax >= split {
                coarse = coarse.max(v);
            } else if v > fine {
                fine = v;
                fine_x = x;
            }
        }
    }
    if b2 > opts.blowup {
        violations.push(KernelViolation {
            condition: KernelCondition::Size,
            witness: (b2_witness, 0.0),
            value: b2,
            reason: format!("|x K(x)| = {b2:.4} exceeds blow-up threshold"),
        });
    } else if coarse > 0.0 && fine > coarse * (1.0 + opts.drift) {
        violations.push(KernelViolation {
            condition: KernelCondition::Size,
            witness: (fine_x, 0.0),
            value: fine,
            reason: format!("|x K(x)| grows toward 0: {coarse:.4} -> {fine:.4}"),
        });
    }

    // (c): Hörmander-type smoothness on the pair grid
    let rho_min = grids
        .pairs
        .iter()
        .filter(|(x, _)| *x != 0.0)
        .map(|(x, y)| (y / x).abs())
        .filter(|r| *r > 0.0)
        .fold(f64::INFINITY, f64::min);
    let rho_split = 10.0 * rho_min;
    let mut b3 = 0.0f64;
    let mut b3_witness = (f64::NAN, f64::NAN);
    let (mut coarse, mut fine, mut fine_xy) = (0.0f64, 0.0f64, (f64::NAN, f64::NAN));
    for &(x, y) in &grids.pairs {
        if y == 0.0 || x.abs() <= 2.0 * y.abs() {
            continue;
        }
        let v = (k.eval(x - y) - k.eval(x)).abs() * x * x / y.abs();
        if v > b3 {
            b3 = v;
            b3_witness = (x, y);
        }
        if (y / x).abs() >= rho_split {
            coarse = coarse.max(v);
        } else if v > fine {
            fine = v;
            fine_xy = (x, y);
        }
    }
    if b3 > opts.blowup {
        violations.push(KernelViolation {
            condition: KernelCondition::Smoothness,
            witness: b3_witness,
            value: b3,
            reason: format!("smoothness ratio {b3:.4} exceeds blow-up threshold"),
        });
    } else if coarse > 0.0 && fine > coarse * (1.0 + opts.drift) {
        violations.push(KernelViolation {
            condition: KernelCondition::Smoothness,
            witness: fine_xy,
            value: fine,
            reason: format!("smoothness ratio grows as y -> 0: {coarse:.4} -> {fine:.4}"),
        });
    }

    Ok(KernelReport { constants: KernelConstants { b1, b2, b3 }, b1_witness, b2_witness, b3_witness, violations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_has_unit_mass_and_support() {
        assert!((gauss(psi, -2.0, -1.0, 4000) - 1.0).abs() < 1e-10);
        assert_eq!(psi(-2.0), 0.0);
        assert_eq!(psi(-1.0), 0.0);
        assert_eq!(psi(-0.5), 0.0);
        assert!(psi(-1.5) > 0.0);
    }

    #[test]
    fn default_kernel_support_j1() {
        let k = default_kernel(1);
        // support (-4, -1/2)
        for x in [-4.0, -4.5, -0.5, -0.25, 0.0, 0.3, 2.0] {
            assert_eq!(k.eval(x), 0.0, "x = {x}");
        }
        assert!(k.eval(-0.75) != 0.0);
        assert!(k.eval(-3.0) != 0.0);
        assert!(k.eval(-1.5) != 0.0);
    }

    #[test]
    fn default_kernel_terms_alternate() {
        let k = default_kernel(3);
        // term j has mass (-1)^j on (-2^{j+1}, -2^j)
        for j in -3i32..=3 {
            let (a, b) = (-(2f64.powi(j + 1)), -(2f64.powi(j)));
            let mass = gauss(|x| k.eval(x), a, b, 20_000);
            let expect = if j % 2 == 0 { 1.0 } else { -1.0 };
            assert!((mass - expect).abs() < 1e-8, "j = {j}: {mass}");
        }
    }

    #[test]
    fn zero_kernel_passes() {
        let k = KernelSpec::from_fn("zero", SupportSide::NegativeAxis, |_| 0.0);
        let r = validate_kernel(&k, &ValidationGrids::standard(0), ValidationOptions::default()).unwrap();
        assert!(r.is_valid());
        assert_eq!(r.constants, KernelConstants { b1: 0.0, b2: 0.0, b3: 0.0 });
    }

    #[test]
    fn log_kernel_violates_cancellation() {
        let k = KernelSpec::from_fn("chi/x", SupportSide::NegativeAxis, |x| if x > -1.0 { 1.0 / x } else { 0.0 });
        let r = validate_kernel(&k, &ValidationGrids::standard(0), ValidationOptions::default()).unwrap();
        let v = r.violation(KernelCondition::Cancellation).expect("(a) must fail");
        // closed form: |∫_{-1}^{-ε} dx/x| = ln(1/ε)
        assert!((v.value - (1.0 / v.witness.0).ln()).abs() < 1e-6, "{v:?}");
        assert!(v.value > 5.0 && v.witness.0 >= 1e-3);
    }

    #[test]
    fn default_kernel_is_valid() {
        let k = default_kernel(6);
        let r = validate_kernel(&k, &ValidationGrids::standard(0), ValidationOptions::default()).unwrap();
        assert!(r.is_valid(), "{:?}", r.violations);
        assert!(r.constants.b1 <= 1.0 + 1e-6, "{:?}", r.constants);
        assert!(r.constants.b2.is_finite() && r.constants.b3.is_finite());
    }

    #[test]
    fn table_kernel_interpolates() {
        let k = KernelSpec::from_table("t", SupportSide::NegativeAxis, vec![(-2.0, 1.0), (-1.0, 3.0)]).unwrap();
        assert_eq!(k.eval(-1.5), 2.0);
        assert_eq!(k.eval(-3.0), 0.0);
        assert_eq!(k.eval(0.5), 0.0);
        assert!(KernelSpec::from_table("t", SupportSide::NegativeAxis, vec![(-1.0, 1.0)]).is_err());
    }
}
