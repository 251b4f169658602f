//! Commutators `T_b^+` and `S_b^+`, the auxiliary maximal operators
//! `M_1^+ … M_5^+`, and numerical checks of the estimates behind the
//! commutator bounds.

mod checks;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{integrate, interval_average, Grid, HGrid, Interval, SampledFunction};
use crate::operators::{h_difference_norm, DyadicRange, Extension, SingularIntegral, SquareFunction};

pub use checks::{
    check_h_regularity, AuxWeightPair, CheckResult, DecompositionCheck, Lemma23, Lemma24, SDecomposition,
    TDecomposition,
};

/// Symbol, function and operators shared by the commutator computations.
#[derive(Debug, Clone)]
pub struct CommutatorInputs {
    pub b: SampledFunction,
    pub f: SampledFunction,
    pub alpha: f64,
    pub singular: Option<SingularIntegral>,
    pub square: Option<SquareFunction>,
}

impl CommutatorInputs {
    pub fn new(b: SampledFunction, f: SampledFunction, alpha: f64) -> Result<Self> {
        if b.grid() != f.grid() {
            return Err(Error::GridMismatch);
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::ParameterOutOfRange(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        Ok(Self { b, f, alpha, singular: None, square: None })
    }

    pub fn with_singular(mut self, t: SingularIntegral) -> Result<Self> {
        if t.grid() != self.b.grid() {
            return Err(Error::GridMismatch);
        }
        self.singular = Some(t);
        Ok(self)
    }

    /// Square function over `range`; windows past the grid are zero-extended.
    pub fn with_square(mut self, range: DyadicRange) -> Self {
        self.square = Some(SquareFunction::new(range, Extension::ClosedFormOrZero));
        self
    }

    pub fn grid(&self) -> &Grid {
        self.b.grid()
    }

    fn t(&self) -> Result<&SingularIntegral> {
        self.singular.as_ref().ok_or_else(|| Error::ConfigInvalid("no singular integral configured".into()))
    }

    fn s(&self) -> Result<&SquareFunction> {
        self.square.as_ref().ok_or_else(|| Error::ConfigInvalid("no dyadic range configured".into()))
    }
}

/// Quadrature points of `[a, b]`: both ends and every node strictly between.
pub(crate) fn sample_points(grid: &Grid, a: f64, b: f64) -> Vec<f64> {
    let ia = grid.node_index(a);
    let ib = grid.node_index(b);
    let a = ia.map_or(a, |i| grid.node(i));
    let b = ib.map_or(b, |i| grid.node(i));
    let first = ia.map_or_else(|| grid.position(a).ceil() as usize, |i| i + 1);
    let last = ib.map_or_else(|| grid.position(b).floor() as i64, |i| i as i64 - 1);
    let mut pts = vec![a];
    let mut i = first as i64;
    while i <= last {
        pts.push(grid.node(i as usize));
        i += 1;
    }
    pts.push(b);
    pts
}

/// Trapezoid rule on increasing points.
pub(crate) fn trapz(pts: &[f64], vals: &[f64]) -> f64 {
    pts.windows(2).zip(vals.windows(2)).map(|(p, v)| 0.5 * (p[1] - p[0]) * (v[0] + v[1])).sum()
}

/// Samples `(b(x) - b_j) f_j`.
fn symbol_product(b: &SampledFunction, f: &SampledFunction, x: f64) -> Result<SampledFunction> {
    let bx = b.eval(x);
    let values = b.values().iter().zip(f.values()).map(|(bj, fj)| (bx - bj) * fj).collect();
    SampledFunction::new(*f.grid(), values)
}

/// `(b_j - λ) f_j` on the nodes selected by `keep`, zero elsewhere.
fn centered_product(
    b: &SampledFunction,
    f: &SampledFunction,
    lambda: f64,
    keep: impl Fn(f64) -> bool,
) -> Result<SampledFunction> {
    let g = *f.grid();
    let values = (0..g.len())
        .map(|i| if keep(g.node(i)) { (b.value(i) - lambda) * f.value(i) } else { 0.0 })
        .collect();
    SampledFunction::new(g, values)
}

/// Membership test for the closed interval `[a, b]` up to node rounding.
fn inside(grid: &Grid, a: f64, b: f64) -> impl Fn(f64) -> bool {
    let tol = 1e-9 * grid.dx();
    move |t| t >= a - tol && t <= b + tol
}

/// `T_b^+ f(x) = ∫ (b(x) - b(y)) K(x - y) f(y) dy`, i.e. `T^+` applied to
/// the samples of `(b(x) - b) f`.
pub fn commutator_t(b: &SampledFunction, t: &SingularIntegral, f: &SampledFunction, x: f64) -> Result<f64> {
    t.at(&symbol_product(b, f, x)?, x)
}

/// `T_b^+ f` at every node, as `b T^+ f - T^+(b f)`.
pub fn commutator_t_on_grid(b: &SampledFunction, t: &SingularIntegral, f: &SampledFunction) -> Result<SampledFunction> {
    let tf = t.on_grid(f)?;
    let tbf = t.on_grid(&f.zip_with(b, |v, w| v * w)?)?;
    let values = (0..tf.values().len()).map(|i| b.value(i) * tf.value(i) - tbf.value(i)).collect();
    SampledFunction::new(*f.grid(), values)
}

/// `S_b^+ f(x) = ‖∫ (b(x) - b(y)) H(x - y) f(y) dy‖_{l²}` over the range of
/// `sq`.
pub fn commutator_s(b: &SampledFunction, f: &SampledFunction, x: f64, sq: &SquareFunction) -> Result<f64> {
    sq.eval(&symbol_product(b, f, x)?, x)
}

/// `S_b^+ f` at every node, as `‖b(y) U f(y) - U(b f)(y)‖` with
/// `U_n = A_n - A_{n-1}`. Closed forms are dropped so that both terms use the
/// same quadrature.
pub fn commutator_s_on_grid(b: &SampledFunction, f: &SampledFunction, sq: &SquareFunction) -> Result<SampledFunction> {
    let f0 = f.without_closed_form();
    let bf = f0.zip_with(b, |v, w| v * w)?;
    let g = *f.grid();
    let values: Result<Vec<f64>> = (0..g.len())
        .into_par_iter()
        .map(|i| {
            let y = g.node(i);
            let (uf, _) = sq.differences(&f0, y)?;
            let (ubf, _) = sq.differences(&bf, y)?;
            let bi = b.value(i);
            Ok(uf.iter().zip(&ubf).map(|(a, c)| (bi * a - c).powi(2)).sum::<f64>().sqrt())
        })
        .collect();
    SampledFunction::new(g, values?)
}

/// `S^+ f` at every node with windows past the grid zero-extended.
pub fn square_on_grid(f: &SampledFunction, sq: &SquareFunction) -> Result<SampledFunction> {
    let f0 = f.without_closed_form();
    let g = *f.grid();
    let values: Result<Vec<f64>> = (0..g.len()).into_par_iter().map(|i| sq.eval(&f0, g.node(i))).collect();
    SampledFunction::new(g, values?)
}

/// Jumps of `t ↦ ‖H(y - t) - H(x - t)‖` inside `(a, b)`, as constant pieces
/// `(t0, t1, norm)`.
pub(crate) fn h_pieces(x: f64, y: f64, a: f64, b: f64, range: DyadicRange) -> Vec<(f64, f64, f64)> {
    let mut cuts = vec![a, b];
    for base in [x, y] {
        cuts.push(base);
        for n in range.n_min - 1..=range.n_max {
            cuts.push(base + 2f64.powi(n));
        }
    }
    cuts.retain(|c| *c >= a && *c <= b);
    cuts.sort_by(|p, q| p.total_cmp(q));
    cuts.dedup();
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            (w[0], w[1], h_difference_norm(y - mid, x - mid, range))
        })
        .collect()
}

/// `∫_a^b |g(t)| ‖H(y - t) - H(x - t)‖ dt` with `abs_g` already nonnegative.
fn h_weighted(abs_g: &SampledFunction, x: f64, y: f64, a: f64, b: f64, range: DyadicRange) -> Result<f64> {
    let mut total = 0.0;
    for (t0, t1, w) in h_pieces(x, y, a, b, range) {
        if w > 0.0 {
            total += w * integrate(abs_g, Interval::new(t0, t1)?)?;
        }
    }
    Ok(total)
}

/// Value of an auxiliary maximal operator and the scale attaining it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxValue {
    pub value: f64,
    /// Maximizing `h` (`M_1^+ … M_3^+`) or `j` (`M_4^+`, `M_5^+`).
    pub argmax: f64,
    /// Scales skipped because their window left the grid.
    pub skipped: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aux {
    M1,
    M2,
    M3,
    M4,
    M5,
}

impl Aux {
    pub fn from_index(k: u8) -> Result<Self> {
        match k {
            1 => Ok(Aux::M1),
            2 => Ok(Aux::M2),
            3 => Ok(Aux::M3),
            4 => Ok(Aux::M4),
            5 => Ok(Aux::M5),
            _ => Err(Error::ParameterOutOfRange(format!("auxiliary operator index {k} not in 1..=5"))),
        }
    }
}

fn scan(scales: impl Iterator<Item = f64>, fits: impl Fn(f64) -> bool, term: impl Fn(f64) -> Result<f64>) -> Result<AuxValue> {
    let mut best = AuxValue { value: 0.0, argmax: f64::NAN, skipped: 0 };
    let mut any = false;
    for s in scales {
        if !fits(s) {
            best.skipped += 1;
            continue;
        }
        let v = term(s)?;
        if !v.is_finite() {
            return Err(Error::NonFiniteEvaluation { h: s });
        }
        if !any || v > best.value {
            best.value = v;
            best.argmax = s;
        }
        any = true;
    }
    if !any {
        return Err(Error::EmptyFamily("no scale fits the domain"));
    }
    Ok(best)
}

/// One term of `M_1^+` at scale `h`.
fn m1_term(inp: &CommutatorInputs, x: f64, h: f64) -> Result<f64> {
    let t = inp.t()?;
    let g = inp.grid();
    let lambda = interval_average(&inp.b, Interval::new(x, x + 8.0 * h)?)?;
    let g1 = centered_product(&inp.b, &inp.f, lambda, inside(g, x, x + 8.0 * h))?;
    let pts = sample_points(g, x, x + 2.0 * h);
    let vals: Result<Vec<f64>> = pts.iter().map(|&y| Ok(t.at(&g1, y)?.abs())).collect();
    Ok(trapz(&pts, &vals?) / h.powf(1.0 + inp.alpha))
}

/// One term of `M_2^+` at scale `h`; the `y` integral of `x + 2h - y` is
/// `2h²` in closed form.
fn m2_term(inp: &CommutatorInputs, x: f64, h: f64) -> Result<f64> {
    let g = inp.grid();
    let lambda = interval_average(&inp.b, Interval::new(x, x + 8.0 * h)?)?;
    let abs_g = inp.b.zip_with(&inp.f, |bv, fv| ((bv - lambda) * fv).abs())?;
    if x + 8.0 * h >= g.hi() {
        return Ok(0.0);
    }
    let c = x + 2.0 * h;
    let inner = abs_g.integrate_mapped(Interval::new(x + 8.0 * h, g.hi())?, |t, v| v / ((t - c) * (t - c)))?;
    Ok(2.0 * h * h * inner / h.powf(1.0 + inp.alpha))
}

/// One term of `M_3^+ g` at scale `h`.
fn m3_term(b: &SampledFunction, g: &SampledFunction, alpha: f64, x: f64, h: f64) -> Result<f64> {
    let lambda = interval_average(b, Interval::new(x, x + 8.0 * h)?)?;
    let q = b.zip_with(g, |bv, gv| (bv - lambda).abs() * gv.abs())?;
    Ok(integrate(&q, Interval::new(x, x + 2.0 * h)?)? / h.powf(1.0 + alpha))
}

/// One term of `M_4^+` at dyadic level `j`.
fn m4_term(inp: &CommutatorInputs, x: f64, j: i32) -> Result<f64> {
    let sq = inp.s()?;
    let g = inp.grid();
    let big = x + 2f64.powi(j + 3);
    let lambda = interval_average(&inp.b, Interval::new(x, big)?)?;
    let g1 = centered_product(&inp.b, &inp.f, lambda, inside(g, x, big))?;
    let pts = sample_points(g, x, x + 2f64.powi(j + 2));
    let vals: Result<Vec<f64>> = pts.iter().map(|&y| sq.eval(&g1, y)).collect();
    Ok(trapz(&pts, &vals?) / 2f64.powf(j as f64 * (1.0 + inp.alpha)))
}

/// One term of `M_5^+` at dyadic level `j`.
fn m5_term(inp: &CommutatorInputs, x: f64, j: i32) -> Result<f64> {
    let sq = inp.s()?;
    let g = inp.grid();
    let big = x + 2f64.powi(j + 3);
    let lambda = interval_average(&inp.b, Interval::new(x, big)?)?;
    let abs_g = inp.b.zip_with(&inp.f, |bv, fv| ((bv - lambda) * fv).abs())?;
    if big >= g.hi() {
        return Ok(0.0);
    }
    let pts = sample_points(g, x, x + 2f64.powi(j + 2));
    let vals: Result<Vec<f64>> = pts.iter().map(|&y| h_weighted(&abs_g, x, y, big, g.hi(), sq.range)).collect();
    Ok(trapz(&pts, &vals?) / 2f64.powf(j as f64 * (1.0 + inp.alpha)))
}

/// `M_k^+` at `x`. `M_1^+ … M_3^+` scan `h ∈ hs` with `[x, x + 8h]` inside
/// the grid, `M_4^+` and `M_5^+` scan `j ∈ js` with `[x, x + 2^{j+3}]` inside
/// the grid; other scales are skipped and counted. `M_3^+` is applied to
/// `inputs.f`.
pub fn aux_maximal(k: Aux, inp: &CommutatorInputs, x: f64, hs: &HGrid, js: &[i32]) -> Result<AuxValue> {
    let g = *inp.grid();
    if !g.contains(x) {
        return Err(Error::PointOutOfDomain { x, needed: "x".into(), lo: g.lo(), hi: g.hi() });
    }
    let tol = 1e-9 * g.dx();
    let fits_h = |h: f64| x + 8.0 * h <= g.hi() + tol;
    let fits_j = |j: f64| x + 2f64.powf(j + 3.0) <= g.hi() + tol;
    let hv = || hs.values().iter().copied();
    let jv = || js.iter().map(|j| *j as f64);
    match k {
        Aux::M1 => scan(hv(), fits_h, |h| m1_term(inp, x, h)),
        Aux::M2 => scan(hv(), fits_h, |h| m2_term(inp, x, h)),
        Aux::M3 => scan(hv(), fits_h, |h| m3_term(&inp.b, &inp.f, inp.alpha, x, h)),
        Aux::M4 => scan(jv(), fits_j, |j| m4_term(inp, x, j as i32)),
        Aux::M5 => scan(jv(), fits_j, |j| m5_term(inp, x, j as i32)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ClosedForm;
    use crate::operators::{default_kernel, KernelPolicy};

    fn grid() -> Grid {
        Grid::new(-8.0, 8.0, 1001).unwrap()
    }

    #[test]
    fn sample_points_cover_ends() {
        let g = grid();
        let p = sample_points(&g, 0.0, 0.1);
        assert_eq!(p.first(), Some(&0.0));
        assert!((p.last().unwrap() - 0.1).abs() < 1e-15);
        assert!(p.windows(2).all(|w| w[1] > w[0]));
        let p = sample_points(&g, 0.001, 0.002);
        assert_eq!(p, vec![0.001, 0.002]);
    }

    #[test]
    fn constant_symbol_vanishes() {
        let g = grid();
        let b = SampledFunction::constant(g, 2.0).unwrap();
        let f = SampledFunction::from_closed_form(g, ClosedForm::Bump { center: 0.0, width: 1.0 }).unwrap();
        let t = SingularIntegral::new(&default_kernel(3), g, KernelPolicy::Warn).unwrap();
        let sq = SquareFunction::new(DyadicRange::new(-8, 8).unwrap(), Extension::ClosedFormOrZero);
        for x in [-2.0, -0.3, 0.5] {
            assert_eq!(commutator_t(&b, &t, &f, x).unwrap(), 0.0);
            assert_eq!(commutator_s(&b, &f, x, &sq).unwrap(), 0.0);
        }
        let on = commutator_s_on_grid(&b, &f, &sq).unwrap();
        assert!(on.sup_abs() < 1e-12);
        let inp = CommutatorInputs::new(b, f, 0.5).unwrap().with_singular(t).unwrap().with_square(sq.range);
        let hs = HGrid::new(0.05, 0.5, 6).unwrap();
        for k in [Aux::M1, Aux::M2, Aux::M3] {
            assert!(aux_maximal(k, &inp, -1.0, &hs, &[]).unwrap().value < 1e-12);
        }
        for k in [Aux::M4, Aux::M5] {
            assert!(aux_maximal(k, &inp, -1.0, &hs, &[-3, -2, -1, 0]).unwrap().value < 1e-12);
        }
    }

    #[test]
    fn on_grid_agrees_with_pointwise() {
        let g = grid();
        let b = SampledFunction::from_closed_form(g, ClosedForm::Power { gamma: 0.5, floor: 0.0 }).unwrap();
        let f = SampledFunction::from_closed_form(g, ClosedForm::Bump { center: 0.0, width: 1.0 }).unwrap();
        let t = SingularIntegral::new(&default_kernel(2), g, KernelPolicy::Warn).unwrap();
        let sq = SquareFunction::new(DyadicRange::new(-6, 6).unwrap(), Extension::ClosedFormOrZero);
        let tg = commutator_t_on_grid(&b, &t, &f).unwrap();
        let sg = commutator_s_on_grid(&b, &f, &sq).unwrap();
        for i in [300, 480, 500, 520] {
            let x = g.node(i);
            let pt = commutator_t(&b, &t, &f, x).unwrap();
            assert!((tg.value(i) - pt).abs() < 1e-12 * (1.0 + pt.abs()), "{i}");
            let ps = commutator_s(&b, &f, x, &sq).unwrap();
            assert!((sg.value(i) - ps).abs() < 1e-12 * (1.0 + ps.abs()), "{i}");
        }
    }

    #[test]
    fn h_pieces_partition() {
        let r = DyadicRange::new(-4, 6).unwrap();
        let p = h_pieces(0.0, 0.3, 2.0, 4.0, r);
        assert_eq!(p.first().unwrap().0, 2.0);
        assert_eq!(p.last().unwrap().1, 4.0);
        assert!(p.windows(2).all(|w| w[0].1 == w[1].0));
        // same argument: zero everywhere
        assert!(h_pieces(0.5, 0.5, 2.0, 4.0, r).iter().all(|q| q.2 == 0.0));
    }
}
