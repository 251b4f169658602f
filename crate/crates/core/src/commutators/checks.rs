use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{average_extended, interval_average, Interval, SampledFunction};
use crate::operators::DyadicRange;
use crate::spaces::{weighted_lip_norm, IntervalFamily};
use crate::weights::{a1_constant, reverse_holder_search, ClassTag, PointGrid, Weight};

use super::{
    centered_product, commutator_t, commutator_t_on_grid, h_pieces, h_weighted, inside, sample_points, trapz,
    CommutatorInputs,
};
use crate::grid::HGrid;

/// One evaluated inequality `lhs ≤ C · rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs` (0 when `lhs` vanishes).
    pub fitted_c: f64,
    /// `rhs - lhs`.
    pub margin: f64,
    pub witnesses: Vec<(String, f64)>,
}

impl CheckResult {
    pub fn new(lhs: f64, rhs: f64, witnesses: &[(&str, f64)]) -> Self {
        let fitted_c = if lhs <= 0.0 {
            0.0
        } else if rhs <= 0.0 {
            f64::INFINITY
        } else {
            lhs / rhs
        };
        Self {
            lhs,
            rhs,
            fitted_c,
            margin: rhs - lhs,
            witnesses: witnesses.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    /// The result with the largest fitted constant (first on ties).
    pub fn worst(results: &[CheckResult]) -> Option<&CheckResult> {
        results.iter().fold(None, |best: Option<&CheckResult>, r| match best {
            Some(b) if b.fitted_c >= r.fitted_c => Some(b),
            _ => Some(r),
        })
    }
}

/// Both stages of a decomposition check at one `(x, h)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionCheck {
    /// Mean oscillation of the commutator against twice the sum of the three
    /// pieces; holds exactly up to rounding.
    pub triangle: CheckResult,
    /// The smoothness step: middle piece against its kernel-estimate bound.
    pub kernel: CheckResult,
}

/// Pieces of the `T_b^+` chain at `(x, h)` with `J = [x, x + 8h]`,
/// `λ = b_J`, `f_2 = f χ_{J^c}`:
///
/// * `I   = h^{-1-α} ∫_x^{x+2h} |T^+((b - λ) f_1)|`
/// * `II  = h^{-1-α} ∫_x^{x+2h} |T^+((b - λ) f_2)(y) - T^+((b - λ) f_2)(x + 2h)|`
/// * `III = h^{-1-α} ∫_x^{x+2h} |b - λ| |T^+ f|`
///
/// The centering constant is `-T^+((b - λ) f_2)(x + 2h)`, the value that makes
/// `T_b^+ f(y) - c` split into the three pieces.
#[derive(Debug, Clone)]
pub struct TDecomposition {
    inp: CommutatorInputs,
    tf: SampledFunction,
    tbf_comm: SampledFunction,
}

impl TDecomposition {
    pub fn new(inp: &CommutatorInputs) -> Result<Self> {
        let t = inp.t()?;
        Ok(Self {
            inp: inp.clone(),
            tf: t.on_grid(&inp.f)?,
            tbf_comm: commutator_t_on_grid(&inp.b, t, &inp.f)?,
        })
    }

    pub fn check(&self, x: f64, h: f64) -> Result<DecompositionCheck> {
        let inp = &self.inp;
        let t = inp.t()?;
        let g = *inp.grid();
        let big = x + 8.0 * h;
        g.require_window(x, x, big)?;
        let lambda = interval_average(&inp.b, Interval::new(x, big)?)?;
        let keep = inside(&g, x, big);
        let g1 = centered_product(&inp.b, &inp.f, lambda, &keep)?;
        let g2 = centered_product(&inp.b, &inp.f, lambda, |y| !keep(y))?;
        let pts = sample_points(&g, x, x + 2.0 * h);
        let n = pts.len();
        let (mut comm, mut tg1, mut tg2, mut tf) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for (k, &y) in pts.iter().enumerate() {
            match g.node_index(y) {
                Some(i) => {
                    comm[k] = self.tbf_comm.value(i);
                    tf[k] = self.tf.value(i);
                }
                None => {
                    comm[k] = commutator_t(&inp.b, t, &inp.f, y)?;
                    tf[k] = t.at(&inp.f, y)?;
                }
            }
            tg1[k] = t.at(&g1, y)?;
            tg2[k] = t.at(&g2, y)?;
        }
        let norm = h.powf(1.0 + inp.alpha);
        let len = pts[n - 1] - pts[0];
        let avg = trapz(&pts, &comm) / len;
        let osc: Vec<f64> = comm.iter().map(|v| (v - avg).abs()).collect();
        let lhs = trapz(&pts, &osc) / norm;
        let abs1: Vec<f64> = tg1.iter().map(|v| v.abs()).collect();
        let end = tg2[n - 1];
        let abs2: Vec<f64> = tg2.iter().map(|v| (v - end).abs()).collect();
        let abs3: Vec<f64> = pts.iter().zip(&tf).map(|(y, v)| (inp.b.eval(*y) - lambda).abs() * v.abs()).collect();
        let (i1, i2, i3) = (trapz(&pts, &abs1) / norm, trapz(&pts, &abs2) / norm, trapz(&pts, &abs3) / norm);
        let chain = 2.0 * (i1 + i2 + i3);
        let triangle = CheckResult::new(lhs, chain, &[("x", x), ("h", h), ("I", i1), ("II", i2), ("III", i3)]);

        // II ≤ C h^{-1-α} ∫_x^{x+2h} ∫_{x+8h}^{hi} (x+2h-y)/(t-x-2h)² |b - λ||f| dt dy
        let c = x + 2.0 * h;
        let abs_g = inp.b.zip_with(&inp.f, |bv, fv| ((bv - lambda) * fv).abs())?;
        let inner = if big < g.hi() {
            abs_g.integrate_mapped(Interval::new(big, g.hi())?, |s, v| v / ((s - c) * (s - c)))?
        } else {
            0.0
        };
        let core = 2.0 * h * h * inner / norm;
        let kernel = CheckResult::new(i2, core, &[("x", x), ("h", h)]);
        Ok(DecompositionCheck { triangle, kernel })
    }
}

/// Pieces of the `S_b^+` chain at `(x, h)` with `2^j ≤ h < 2^{j+1}`,
/// `J = [x, x + 2^{j+3}]`, `λ = b_J`:
///
/// * `L   = h^{-1-α} ∫_x^{x+2h} S^+((b - λ) f_1)`
/// * `LL  = h^{-1-α} ∫_x^{x+2h} ‖U^+((b - λ) f_2)(y) - U^+((b - λ) f_2)(x)‖_{l²}`
/// * `LLL = h^{-1-α} ∫_x^{x+2h} |b - λ| S^+ f`
///
/// with `U^+ = (A_n - A_{n-1})_n`. The middle piece is the l² norm of the
/// difference, which dominates the difference of the norms and is what the
/// kernel bound controls.
#[derive(Debug, Clone)]
pub struct SDecomposition {
    inp: CommutatorInputs,
    f0: SampledFunction,
    bf: SampledFunction,
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

impl SDecomposition {
    pub fn new(inp: &CommutatorInputs) -> Result<Self> {
        inp.s()?;
        let f0 = inp.f.without_closed_form();
        let bf = f0.zip_with(&inp.b, |v, w| v * w)?;
        Ok(Self { inp: inp.clone(), f0, bf })
    }

    pub fn check(&self, x: f64, h: f64) -> Result<DecompositionCheck> {
        let inp = &self.inp;
        let sq = inp.s()?;
        let g = *inp.grid();
        if !(h > 0.0) {
            return Err(Error::ParameterOutOfRange(format!("h must be positive, got {h}")));
        }
        let j = h.log2().floor() as i32;
        let big = x + 2f64.powi(j + 3);
        g.require_window(x, x, big)?;
        let lambda = interval_average(&inp.b, Interval::new(x, big)?)?;
        let keep = inside(&g, x, big);
        let g1 = centered_product(&inp.b, &self.f0, lambda, &keep)?;
        let g2 = centered_product(&inp.b, &self.f0, lambda, |y| !keep(y))?;
        let pts = sample_points(&g, x, x + 2.0 * h);
        let (ug2x, _) = sq.differences(&g2, x)?;
        let n = pts.len();
        let (mut comm, mut l, mut ll, mut lll, mut ll_norms) =
            (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for (k, &y) in pts.iter().enumerate() {
            let (uf, _) = sq.differences(&self.f0, y)?;
            let (ubf, _) = sq.differences(&self.bf, y)?;
            let (ug1, _) = sq.differences(&g1, y)?;
            let (ug2, _) = sq.differences(&g2, y)?;
            let by = inp.b.eval(y);
            let v: Vec<f64> = uf.iter().zip(&ubf).map(|(a, c)| by * a - c).collect();
            comm[k] = l2(&v);
            l[k] = l2(&ug1);
            let d: Vec<f64> = ug2.iter().zip(&ug2x).map(|(a, c)| a - c).collect();
            ll[k] = l2(&d);
            ll_norms[k] = (l2(&ug2) - l2(&ug2x)).abs();
            lll[k] = (by - lambda).abs() * l2(&uf);
        }
        let norm = h.powf(1.0 + inp.alpha);
        let len = pts[n - 1] - pts[0];
        let avg = trapz(&pts, &comm) / len;
        let osc: Vec<f64> = comm.iter().map(|v| (v - avg).abs()).collect();
        let lhs = trapz(&pts, &osc) / norm;
        let (p1, p2, p3) = (trapz(&pts, &l) / norm, trapz(&pts, &ll) / norm, trapz(&pts, &lll) / norm);
        let p2_norms = trapz(&pts, &ll_norms) / norm;
        let chain = 2.0 * (p1 + p2 + p3);
        let triangle = CheckResult::new(
            lhs,
            chain,
            &[("x", x), ("h", h), ("j", j as f64), ("L", p1), ("LL", p2), ("LL_norm_difference", p2_norms), ("LLL", p3)],
        );

        // LL ≤ C h^{-1-α} ∫_x^{x+2^{j+2}} ∫_{x+2^{j+3}}^{hi} |g_2(t)| ‖H(y-t) - H(x-t)‖ dt dy
        let abs_g2 = g2.abs();
        let core = if big < g.hi() {
            let ys = sample_points(&g, x, x + 2f64.powi(j + 2));
            let vals: Result<Vec<f64>> =
                ys.iter().map(|&y| h_weighted(&abs_g2, x, y, big, g.hi(), sq.range)).collect();
            trapz(&ys, &vals?) / norm
        } else {
            0.0
        };
        let kernel = CheckResult::new(p2, core, &[("x", x), ("h", h), ("j", j as f64)]);
        Ok(DecompositionCheck { triangle, kernel })
    }
}

/// `(τ, σ, μ, α)` with `σ = μ^{1+α} τ`.
#[derive(Debug, Clone)]
pub struct AuxWeightPair {
    pub tau: Weight,
    pub sigma: Weight,
    pub mu: Weight,
    pub alpha: f64,
}

impl AuxWeightPair {
    /// Builds `σ = μ^{1+α} τ`.
    pub fn new(tau: Weight, mu: Weight, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::ParameterOutOfRange(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        let sigma = Weight::new(mu.function().zip_with(tau.function(), |m, t| m.powf(1.0 + alpha) * t)?)?;
        Ok(Self { tau, sigma, mu, alpha })
    }

    /// Accepts a given `σ` after checking `σ = μ^{1+α} τ` node by node.
    pub fn with_sigma(tau: Weight, sigma: Weight, mu: Weight, alpha: f64) -> Result<Self> {
        let built = Self::new(tau, mu, alpha)?;
        if sigma.grid() != built.sigma.grid() {
            return Err(Error::GridMismatch);
        }
        for (i, (a, b)) in sigma.function().values().iter().zip(built.sigma.function().values()).enumerate() {
            if (a - b).abs() > 1e-12 * b.abs() {
                return Err(Error::HypothesisFailure(format!(
                    "sigma differs from mu^(1+alpha) tau at x = {} ({a} vs {b})",
                    sigma.grid().node(i)
                )));
            }
        }
        Ok(Self { sigma, ..built })
    }

    fn inverse(w: &Weight) -> Result<Weight> {
        Weight::new(w.function().map(|_, v| 1.0 / v)?)
    }

    /// `A_1^-` constant of `τ^{-1}` and `A_1` constant of `σ^{-1}`; a
    /// hypothesis failure if either exceeds `cap`.
    pub fn validate(&self, cap: f64) -> Result<(f64, f64)> {
        let grid = *self.tau.grid();
        let pts = PointGrid::default_for(&grid);
        let hs = HGrid::default_for(&grid);
        let ct = a1_constant(&Self::inverse(&self.tau)?, ClassTag::A1Minus, &pts, &hs)?.constant;
        let cs = a1_constant(&Self::inverse(&self.sigma)?, ClassTag::A1, &pts, &hs)?.constant;
        if ct > cap {
            return Err(Error::HypothesisFailure(format!("tau^-1 has A1- constant {ct:.4} above cap {cap}")));
        }
        if cs > cap {
            return Err(Error::HypothesisFailure(format!("sigma^-1 has A1 constant {cs:.4} above cap {cap}")));
        }
        Ok((ct, cs))
    }

    /// Reverse-Hölder `ε̂` shared by `τ^{-1}` and `σ^{-1}` in `A_1^-`.
    pub fn epsilon_hat(&self, r_grid: &[f64], cap: f64) -> Result<f64> {
        let a = reverse_holder_search(&Self::inverse(&self.tau)?, ClassTag::A1Minus, r_grid, cap)?;
        let b = reverse_holder_search(&Self::inverse(&self.sigma)?, ClassTag::A1Minus, r_grid, cap)?;
        Ok(a.epsilon_hat.min(b.epsilon_hat))
    }
}

/// `|I|^{-α} ((1/|I|) ∫_I |b - b_I|^r σ^{-r})^{1/r}` against
/// `‖b‖_{Lip_{α,μ}} τ^{-1}(x)` for `I = [x, x + h]`.
#[derive(Debug, Clone)]
pub struct Lemma23 {
    b: SampledFunction,
    pair: AuxWeightPair,
    r: f64,
    lip: f64,
}

impl Lemma23 {
    /// The seminorm is `weighted_lip_norm` with `p = 1` over `family`.
    pub fn new(b: &SampledFunction, pair: &AuxWeightPair, r: f64, family: &IntervalFamily) -> Result<Self> {
        if !(r > 1.0 && r.is_finite()) {
            return Err(Error::ParameterOutOfRange(format!("r must exceed 1, got {r}")));
        }
        if b.grid() != pair.tau.grid() {
            return Err(Error::GridMismatch);
        }
        let lip = weighted_lip_norm(b, pair.alpha, &pair.mu, 1.0, family)?;
        Ok(Self { b: b.clone(), pair: pair.clone(), r, lip })
    }

    pub fn lip_norm(&self) -> f64 {
        self.lip
    }

    pub fn check(&self, x: f64, h: f64) -> Result<CheckResult> {
        let iv = Interval::new(x, x + h)?;
        let avg = interval_average(&self.b, iv)?;
        let sigma = self.pair.sigma.function();
        let r = self.r;
        let inner = self.b.integrate_mapped(iv, |t, v| (v - avg).abs().powf(r) * sigma.eval(t).powf(-r))? / h;
        let lhs = inner.powf(1.0 / r) / h.powf(self.pair.alpha);
        let rhs = self.lip / self.pair.tau.function().eval(x);
        Ok(CheckResult::new(lhs, rhs, &[("x", x), ("h", h), ("r", r)]))
    }
}

/// Telescoping bounds for dyadic averages of `b`.
#[derive(Debug, Clone)]
pub struct Lemma24 {
    b: SampledFunction,
    mu: Weight,
    alpha: f64,
    lip: f64,
}

impl Lemma24 {
    pub fn new(b: &SampledFunction, mu: &Weight, alpha: f64, family: &IntervalFamily) -> Result<Self> {
        if b.grid() != mu.grid() {
            return Err(Error::GridMismatch);
        }
        let lip = weighted_lip_norm(b, alpha, mu, 1.0, family)?;
        Ok(Self { b: b.clone(), mu: mu.clone(), alpha, lip })
    }

    pub fn lip_norm(&self) -> f64 {
        self.lip
    }

    fn avg(&self, a: f64, len: f64) -> Result<f64> {
        average_extended(&self.b, a, a + len)
    }

    /// `h^{-α} |b_{I_{j+1}} - b_{I_3}|`, `I_m = [x, x + 2^m h]`, against
    /// `‖b‖ |2^{4α}(1 - 2^{(j-2)α})/(1 - 2^α)| μ(x)^{1+α}`.
    pub fn check(&self, x: f64, h: f64, j: i32) -> Result<CheckResult> {
        if j < 3 {
            return Err(Error::ParameterOutOfRange(format!("j must be at least 3, got {j}")));
        }
        let a = self.alpha;
        let lhs = (self.avg(x, 2f64.powi(j + 1) * h)? - self.avg(x, 8.0 * h)?).abs() / h.powf(a);
        let factor = (2f64.powf(4.0 * a) * (1.0 - 2f64.powf((j - 2) as f64 * a)) / (1.0 - 2f64.powf(a))).abs();
        let rhs = self.lip * factor * self.mu.function().eval(x).powf(1.0 + a);
        Ok(CheckResult::new(lhs, rhs, &[("x", x), ("h", h), ("j", j as f64)]))
    }

    /// `|b_{I_{k+1}} - b_J|` with `I_m = [x, x + 2^m]`, `J = I_{j+3}`, against
    /// `(2^{jα} + 2^{kα}) ‖b‖ μ(x)^{1+α}`.
    pub fn check_dyadic(&self, x: f64, j: i32, k: i32) -> Result<CheckResult> {
        if k < j + 3 {
            return Err(Error::ParameterOutOfRange(format!("need k >= j + 3, got j = {j}, k = {k}")));
        }
        let a = self.alpha;
        let lhs = (self.avg(x, 2f64.powi(k + 1))? - self.avg(x, 2f64.powi(j + 3))?).abs();
        let rhs = (2f64.powf(j as f64 * a) + 2f64.powf(k as f64 * a))
            * self.lip
            * self.mu.function().eval(x).powf(1.0 + a);
        Ok(CheckResult::new(lhs, rhs, &[("x", x), ("j", j as f64), ("k", k as f64)]))
    }
}

/// `(∫_{x+2^k}^{x+2^{k+1}} ‖H(y-t) - H(x-t)‖^{r'} dt)^{1/r'}` against
/// `2^{j/r'} / 2^k`, maximized over `ys ⊆ [x, x + 2^{j+3}]`.
///
/// The integrand is piecewise constant in `t`, so the integral is summed
/// exactly over its pieces.
pub fn check_h_regularity(j: i32, k: i32, r_prime: f64, x: f64, ys: &[f64], range: DyadicRange) -> Result<CheckResult> {
    if k < j + 3 {
        return Err(Error::ParameterOutOfRange(format!("need k >= j + 3, got j = {j}, k = {k}")));
    }
    if !(r_prime >= 1.0 && r_prime.is_finite()) {
        return Err(Error::ParameterOutOfRange(format!("r' must be at least 1, got {r_prime}")));
    }
    if ys.is_empty() {
        return Err(Error::EmptyFamily("y samples"));
    }
    let top = x + 2f64.powi(j + 3);
    if let Some(y) = ys.iter().find(|y| !(**y >= x && **y <= top)) {
        return Err(Error::ParameterOutOfRange(format!("y = {y} outside [{x}, {top}]")));
    }
    let (a, b) = (x + 2f64.powi(k), x + 2f64.powi(k + 1));
    let core = 2f64.powf(j as f64 / r_prime) / 2f64.powi(k);
    let mut results = Vec::with_capacity(ys.len());
    for &y in ys {
        let integral: f64 = h_pieces(x, y, a, b, range).iter().map(|(t0, t1, w)| (t1 - t0) * w.powf(r_prime)).sum();
        let lhs = integral.powf(1.0 / r_prime);
        results.push(CheckResult::new(lhs, core, &[("j", j as f64), ("k", k as f64), ("x", x), ("y", y)]));
    }
    Ok(CheckResult::worst(&results).expect("nonempty").clone())
}
