//! BMO, Lipschitz, weighted Lipschitz, weighted `L^p` and the one-sided
//! Triebel-Lizorkin functionals.
//!
//! Suprema are maxima over the supplied finite families, so every value is a
//! lower bound of the corresponding norm.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{integrate, mean_abs_deviation, mean_oscillation, ClosedForm, Grid, HGrid, Interval, SampledFunction};
use crate::operators::Side;
use crate::weights::{subgrid, Weight};

/// Finite family of intervals standing in for `sup_I`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalFamily {
    intervals: Vec<Interval>,
}

impl IntervalFamily {
    pub fn new(intervals: Vec<Interval>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::EmptyFamily("intervals"));
        }
        Ok(Self { intervals })
    }

    /// All `[a, b]` with `a < b` drawn from `m` evenly spread grid nodes.
    pub fn from_subgrid(grid: &Grid, m: usize) -> Result<Self> {
        let pts = subgrid(grid, m)?;
        let mut out = Vec::with_capacity(pts.len() * pts.len() / 2);
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                out.push(Interval::new(pts[i], pts[j])?);
            }
        }
        Self::new(out)
    }

    /// The 48-node family.
    pub fn default_for(grid: &Grid) -> Self {
        Self::from_subgrid(grid, 48).expect("grid has at least 48 nodes")
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

fn par_max<T: Sync>(items: &[T], f: impl Fn(&T) -> Result<f64> + Sync + Send) -> Result<f64> {
    let vals: Result<Vec<f64>> = items.par_iter().map(f).collect();
    Ok(vals?.into_iter().fold(0.0, f64::max))
}

fn check_alpha(alpha: f64, name: &str) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange(format!("{name} must lie in (0, 1), got {alpha}")))
    }
}

/// `max_I (1/|I|) ∫_I |f - f_I|`.
pub fn bmo_norm(f: &SampledFunction, family: &IntervalFamily) -> Result<f64> {
    par_max(family.intervals(), |iv| mean_abs_deviation(f, *iv))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LipForm {
    /// `|f(x + h) - f(x)| / h^α`
    Quotient,
    /// `|I|^{-α} ((1/|I|) ∫_I |f - f_I|^q)^{1/q}`
    Oscillation(f64),
}

/// `Lip_α` seminorm in difference-quotient or oscillation form.
///
/// The quotient form samples every grid node `x` and every `h` with
/// `x + h` in the domain, evaluating `f` through its closed form if present.
pub fn lip_norm(f: &SampledFunction, alpha: f64, form: LipForm, family: &IntervalFamily, hs: &HGrid) -> Result<f64> {
    check_alpha(alpha, "alpha")?;
    match form {
        LipForm::Quotient => {
            let g = *f.grid();
            let xs: Vec<f64> = g.nodes().collect();
            par_max(&xs, |&x| {
                let fx = f.eval(x);
                let mut best = 0.0f64;
                for &h in hs.values() {
                    if x + h > g.hi() {
                        break;
                    }
                    best = best.max((f.eval(x + h) - fx).abs() / h.powf(alpha));
                }
                Ok(best)
            })
        }
        LipForm::Oscillation(q) => {
            if !(q >= 1.0 && q.is_finite()) {
                return Err(Error::ParameterOutOfRange(format!("oscillation exponent must be >= 1, got {q}")));
            }
            par_max(family.intervals(), |iv| {
                Ok(mean_oscillation(f, *iv, q)?.powf(1.0 / q) / iv.len().powf(alpha))
            })
        }
    }
}

/// `Lip^p_{β,μ}`: `max_I μ(I)^{-β} [(1/μ(I)) ∫_I |f - f_I|^p μ^{1-p}]^{1/p}`.
///
/// `f_I` is the unweighted average. For `p = ∞` the bracket is read as
/// `max_{x ∈ I} |f(x) - f_I| / μ(x)` over the nodes of `I`.
pub fn weighted_lip_norm(f: &SampledFunction, beta: f64, mu: &Weight, p: f64, family: &IntervalFamily) -> Result<f64> {
    check_alpha(beta, "beta")?;
    if !(p >= 1.0) {
        return Err(Error::ParameterOutOfRange(format!("p must lie in [1, ∞], got {p}")));
    }
    if mu.grid() != f.grid() {
        return Err(Error::GridMismatch);
    }
    let m = mu.function();
    let g = *f.grid();
    par_max(family.intervals(), |iv| {
        let mass = integrate(m, *iv)?;
        let avg = integrate(f, *iv)? / iv.len();
        let inner = if p.is_infinite() {
            let (i0, i1) = (g.nearest_node(iv.a), g.nearest_node(iv.b));
            (i0..=i1).map(|i| (f.value(i) - avg).abs() / m.value(i)).fold(0.0, f64::max)
        } else {
            let weighted = f.zip_with(m, |v, w| (v - avg).abs().powf(p) * w.powf(1.0 - p))?;
            (integrate(&weighted, *iv)? / mass).powf(1.0 / p)
        };
        Ok(inner / mass.powf(beta))
    })
}

/// `(∫ |f|^p w)^{1/p}` over the domain; `w = None` means `w ≡ 1`.
///
/// When `f` is an indicator and `w` has a closed form the integral is exact.
pub fn weighted_lp_norm(f: &SampledFunction, p: f64, w: Option<&Weight>) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::ParameterOutOfRange(format!("p must lie in [1, ∞), got {p}")));
    }
    let g = *f.grid();
    if let Some(w) = w {
        if w.grid() != &g {
            return Err(Error::GridMismatch);
        }
    }
    if let Some(ind @ ClosedForm::Indicator { .. }) = f.closed_form() {
        let wf = match w {
            None => Some(ClosedForm::Constant(1.0)),
            Some(w) => w.function().closed_form().cloned(),
        };
        if let Some(v) = wf.and_then(|wf| ClosedForm::Product(vec![ind.clone(), wf]).integral(g.lo(), g.hi())) {
            return Ok(v.powf(1.0 / p));
        }
    }
    let integrand = match w {
        None => f.map(|_, v| v.abs().powf(p))?,
        Some(w) => f.zip_with(w.function(), |v, w| v.abs().powf(p) * w)?,
    };
    Ok(integrate(&integrand, Interval::new(g.lo(), g.hi())?)?.powf(1.0 / p))
}

/// `max_h h^{-1-α} ∫_{x}^{x+h} |f - f_{[x,x+h]}|` (plus side) or the mirror
/// over `[x - h, x]`.
pub fn triebel_functional(f: &SampledFunction, x: f64, alpha: f64, side: Side, hs: &HGrid) -> Result<f64> {
    check_alpha(alpha, "alpha")?;
    let g = f.grid();
    let (a, b) = side.window(x, hs.h_max());
    g.require_window(x, a, b)?;
    let mut best = 0.0f64;
    for &h in hs.values() {
        let (a, b) = side.window(x, h);
        best = best.max(mean_abs_deviation(f, Interval::new(a, b)?)? / h.powf(alpha));
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormSide {
    Plus,
    Minus,
    /// Pointwise maximum of both one-sided functionals.
    TwoSided,
}

/// Exponents, weight and side for the Triebel-Lizorkin norms.
#[derive(Debug, Clone)]
pub struct NormParams {
    pub p: f64,
    pub alpha: f64,
    pub weight: Option<Weight>,
    pub side: NormSide,
}

impl NormParams {
    pub fn new(p: f64, alpha: f64, weight: Option<Weight>, side: NormSide) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::ParameterOutOfRange(format!("p must lie in (1, ∞), got {p}")));
        }
        check_alpha(alpha, "alpha")?;
        Ok(Self { p, alpha, weight, side })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TriebelNorm {
    pub value: f64,
    /// First and last admissible point used.
    pub band: (f64, f64),
    pub points: usize,
}

/// `L^p(w)` norm of `x ↦ triebel_functional(f, x)` over the admissible points
/// of `xs`, by the trapezoid rule on those points.
pub fn triebel_norm(f: &SampledFunction, params: &NormParams, xs: &[f64], hs: &HGrid) -> Result<TriebelNorm> {
    let g = *f.grid();
    if let Some(w) = &params.weight {
        if w.grid() != &g {
            return Err(Error::GridMismatch);
        }
    }
    let h = hs.h_max();
    let tol = 1e-9 * g.dx();
    let admissible = |x: f64| {
        let plus = x + h <= g.hi() + tol && x >= g.lo() - tol;
        let minus = x - h >= g.lo() - tol && x <= g.hi() + tol;
        match params.side {
            NormSide::Plus => plus,
            NormSide::Minus => minus,
            NormSide::TwoSided => plus && minus,
        }
    };
    let mut pts: Vec<f64> = xs.iter().copied().filter(|x| admissible(*x)).collect();
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup();
    if pts.is_empty() {
        return Err(Error::EmptyFamily("admissible points"));
    }
    let vals: Result<Vec<f64>> = pts
        .par_iter()
        .map(|&x| {
            let v = match params.side {
                NormSide::Plus => triebel_functional(f, x, params.alpha, Side::Plus, hs)?,
                NormSide::Minus => triebel_functional(f, x, params.alpha, Side::Minus, hs)?,
                NormSide::TwoSided => triebel_functional(f, x, params.alpha, Side::Plus, hs)?
                    .max(triebel_functional(f, x, params.alpha, Side::Minus, hs)?),
            };
            let w = params.weight.as_ref().map_or(1.0, |w| w.function().eval(x));
            Ok(v.powf(params.p) * w)
        })
        .collect();
    let vals = vals?;
    let mut total = 0.0;
    for k in 1..pts.len() {
        total += 0.5 * (pts[k] - pts[k - 1]) * (vals[k] + vals[k - 1]);
    }
    Ok(TriebelNorm { value: total.powf(1.0 / params.p), band: (pts[0], pts[pts.len() - 1]), points: pts.len() })
}
