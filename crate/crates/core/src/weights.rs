//! One-sided weight classes: constant estimates for `A_p`, `A_p^±`, `A_1`,
//! `A_1^±`, the reverse-Hölder exponent search and the related-weight
//! construction `v = μ^{(1+α)p} w`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{integrate, ClosedForm, Grid, HGrid, Interval, SampledFunction};
use crate::operators::{Maximal, Side};

/// Strictly positive sampled function.
#[derive(Debug, Clone)]
pub struct Weight {
    f: SampledFunction,
}

impl Weight {
    pub fn new(f: SampledFunction) -> Result<Self> {
        let g = *f.grid();
        for (i, v) in f.values().iter().enumerate() {
            if !(*v > 0.0) {
                return Err(Error::NonPositiveWeight { x: g.node(i), value: *v });
            }
        }
        Ok(Self { f })
    }

    pub fn from_closed_form(grid: Grid, form: ClosedForm) -> Result<Self> {
        Self::new(SampledFunction::from_closed_form(grid, form)?)
    }

    /// `|x|^γ` with `|x|` floored at half a grid spacing.
    pub fn power(grid: Grid, gamma: f64) -> Result<Self> {
        Self::from_closed_form(grid, ClosedForm::Power { gamma, floor: 0.5 * grid.dx() })
    }

    /// `e^{rate x}`.
    pub fn exponential(grid: Grid, rate: f64) -> Result<Self> {
        Self::from_closed_form(grid, ClosedForm::Exponential { rate })
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Self> {
        Self::new(SampledFunction::constant(grid, c)?)
    }

    pub fn function(&self) -> &SampledFunction {
        &self.f
    }

    pub fn grid(&self) -> &Grid {
        self.f.grid()
    }

    /// `w^r`, keeping the closed form for powers, exponentials and constants.
    pub fn powf(&self, r: f64) -> Result<Self> {
        let form = match self.f.closed_form() {
            Some(ClosedForm::Power { gamma, floor }) => Some(ClosedForm::Power { gamma: gamma * r, floor: *floor }),
            Some(ClosedForm::Exponential { rate }) => Some(ClosedForm::Exponential { rate: rate * r }),
            Some(ClosedForm::Constant(c)) => Some(ClosedForm::Constant(c.powf(r))),
            _ => None,
        };
        match form {
            Some(cf) => Self::from_closed_form(*self.grid(), cf),
            None => Self::new(self.f.map(|_, v| v.powf(r))?),
        }
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.f.scaled(c)?)
    }

    /// `x ↦ w(-x)` on the mirrored grid.
    pub fn reflect(&self) -> Self {
        Self { f: self.f.reflect() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassTag {
    Ap,
    ApPlus,
    ApMinus,
    A1,
    A1Plus,
    A1Minus,
}

impl ClassTag {
    pub fn is_a1(self) -> bool {
        matches!(self, ClassTag::A1 | ClassTag::A1Plus | ClassTag::A1Minus)
    }

    /// Class of the reflected weight.
    pub fn reflected(self) -> Self {
        match self {
            ClassTag::ApPlus => ClassTag::ApMinus,
            ClassTag::ApMinus => ClassTag::ApPlus,
            ClassTag::A1Plus => ClassTag::A1Minus,
            ClassTag::A1Minus => ClassTag::A1Plus,
            t => t,
        }
    }
}

/// Triples `a < b < c` standing in for `sup_{a<b<c}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TripleFamily {
    triples: Vec<(f64, f64, f64)>,
}

impl TripleFamily {
    pub fn new(mut triples: Vec<(f64, f64, f64)>) -> Result<Self> {
        if triples.is_empty() {
            return Err(Error::EmptyFamily("triples"));
        }
        if let Some(t) = triples.iter().find(|(a, b, c)| !(a < b && b < c)) {
            return Err(Error::ParameterOutOfRange(format!("triple {t:?} is not strictly ordered")));
        }
        triples.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)).then(x.2.total_cmp(&y.2)));
        triples.dedup();
        Ok(Self { triples })
    }

    /// Every ordered triple of `m` grid nodes spread evenly over the domain.
    pub fn from_subgrid(grid: &Grid, m: usize) -> Result<Self> {
        Self::from_points(&subgrid(grid, m)?)
    }

    /// Every ordered triple of the given increasing points.
    pub fn from_points(pts: &[f64]) -> Result<Self> {
        let mut triples = Vec::with_capacity(pts.len().pow(3) / 6);
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                for k in j + 1..pts.len() {
                    triples.push((pts[i], pts[j], pts[k]));
                }
            }
        }
        Self::new(triples)
    }

    pub fn triples(&self) -> &[(f64, f64, f64)] {
        &self.triples
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Distinct outer intervals `[a, c]`.
    pub fn intervals(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = self.triples.iter().map(|t| (t.0, t.2)).collect();
        out.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
        out.dedup();
        out
    }

    /// `(a, b, c) ↦ (-c, -b, -a)`.
    pub fn reflect(&self) -> Self {
        Self::new(self.triples.iter().map(|(a, b, c)| (-c, -b, -a)).collect()).expect("reflection keeps order")
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::new(self.triples.iter().chain(&other.triples).copied().collect()).expect("nonempty")
    }
}

/// `m` grid nodes spread evenly from `lo` to `hi`.
pub(crate) fn subgrid(grid: &Grid, m: usize) -> Result<Vec<f64>> {
    if m < 3 || m > grid.len() {
        return Err(Error::ParameterOutOfRange(format!("subgrid of {m} nodes on a grid of {}", grid.len())));
    }
    let last = (grid.len() - 1) as f64;
    let mut idx: Vec<usize> = (0..m).map(|k| (last * k as f64 / (m - 1) as f64).round() as usize).collect();
    idx.dedup();
    Ok(idx.into_iter().map(|i| grid.node(i)).collect())
}

/// Adds the grid node nearest each midpoint of consecutive `points`.
///
/// Nodes of a grid reappear bit-identically in its refinements, so applying
/// this after each refinement yields nested point sets.
pub(crate) fn refine_points(points: &[f64], grid: &Grid) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * points.len());
    for w in points.windows(2) {
        out.push(w[0]);
        let mid = grid.node(grid.nearest_node(0.5 * (w[0] + w[1])));
        if mid > w[0] && mid < w[1] {
            out.push(mid);
        }
    }
    out.extend(points.last());
    out
}

/// Sample points standing in for the essential supremum of the `A_1` ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct PointGrid {
    points: Vec<f64>,
}

impl PointGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyFamily("points"));
        }
        Ok(Self { points })
    }

    /// Grid nodes at least `margin · width` away from both ends.
    pub fn interior(grid: &Grid, margin: f64) -> Result<Self> {
        let cut = margin * grid.width();
        Self::new(grid.nodes().filter(|x| *x >= grid.lo() + cut && *x <= grid.hi() - cut).collect())
    }

    /// Interior nodes with the default 5% margin.
    pub fn default_for(grid: &Grid) -> Self {
        Self::interior(grid, 0.05).expect("default margin leaves nodes")
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn reflect(&self) -> Self {
        Self { points: self.points.iter().rev().map(|x| -x).collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Triples(TripleFamily),
    Points(PointGrid),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Triple { a: f64, b: f64, c: f64 },
    Interval { a: f64, c: f64 },
    Point { x: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassEstimate {
    pub tag: ClassTag,
    pub p: f64,
    pub constant: f64,
    pub witness: Witness,
}

/// Index of the first maximum; NaN-free input assumed.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

fn iv_integral(f: &SampledFunction, a: f64, b: f64) -> Result<f64> {
    integrate(f, Interval::new(a, b)?)
}

/// Lower bound for the class constant of `w` over a finite family.
///
/// `A_p^+`: `(c-a)^{-p} ∫_a^b w (∫_b^c w^{1-p'})^{p-1}` over triples;
/// `A_p^-` swaps the inner intervals; `A_p` uses the outer intervals `[a, c]`
/// with averages. `A_1^+` is `M^- w / w` over points, `A_1^-` is `M^+ w / w`,
/// `A_1` the larger of the two.
pub fn class_constant(w: &Weight, p: f64, tag: ClassTag, family: &Family) -> Result<ClassEstimate> {
    if tag.is_a1() != (p == 1.0) || p < 1.0 || !p.is_finite() {
        return Err(Error::ExponentMismatch { p, class: format!("{tag:?}") });
    }
    match (tag.is_a1(), family) {
        (false, Family::Triples(t)) => ap_constant(w, p, tag, t),
        (true, Family::Points(pts)) => a1_constant(w, tag, pts, &HGrid::default_for(w.grid())),
        (true, _) => Err(Error::ParameterOutOfRange("A_1 classes are sampled on a point grid".into())),
        (false, _) => Err(Error::ParameterOutOfRange("A_p classes are sampled on a triple family".into())),
    }
}

fn ap_constant(w: &Weight, p: f64, tag: ClassTag, family: &TripleFamily) -> Result<ClassEstimate> {
    let p_dual = p / (p - 1.0);
    let f = w.function();
    let sigma = f.map(|_, v| v.powf(1.0 - p_dual))?;
    if tag == ClassTag::Ap {
        let ivs = family.intervals();
        let vals: Result<Vec<f64>> = ivs
            .par_iter()
            .map(|&(a, c)| {
                let len = c - a;
                Ok(iv_integral(f, a, c)? / len * (iv_integral(&sigma, a, c)? / len).powf(p - 1.0))
            })
            .collect();
        let vals = vals?;
        let k = argmax(&vals);
        return Ok(ClassEstimate { tag, p, constant: vals[k], witness: Witness::Interval { a: ivs[k].0, c: ivs[k].1 } });
    }
    let plus = tag == ClassTag::ApPlus;
    let vals: Result<Vec<f64>> = family
        .triples()
        .par_iter()
        .map(|&(a, b, c)| {
            let (wl, sl) = if plus {
                (iv_integral(f, a, b)?, iv_integral(&sigma, b, c)?)
            } else {
                (iv_integral(f, b, c)?, iv_integral(&sigma, a, b)?)
            };
            Ok(wl * sl.powf(p - 1.0) / (c - a).powf(p))
        })
        .collect();
    let vals = vals?;
    let k = argmax(&vals);
    let (a, b, c) = family.triples()[k];
    Ok(ClassEstimate { tag, p, constant: vals[k], witness: Witness::Triple { a, b, c } })
}

/// `A_1`-type ratio `M^∓ w(x)/w(x)` with scales clipped to the domain.
pub fn a1_constant(w: &Weight, tag: ClassTag, points: &PointGrid, hs: &HGrid) -> Result<ClassEstimate> {
    let sides: &[Side] = match tag {
        ClassTag::A1Plus => &[Side::Minus],
        ClassTag::A1Minus => &[Side::Plus],
        ClassTag::A1 => &[Side::Minus, Side::Plus],
        _ => return Err(Error::ExponentMismatch { p: 1.0, class: format!("{tag:?}") }),
    };
    let f = w.function();
    let m = Maximal::new(f);
    let vals: Result<Vec<f64>> = points
        .points()
        .par_iter()
        .map(|&x| {
            let mut best = 0.0f64;
            for &side in sides {
                if let Some(v) = m.eval_clipped(x, side, hs)? {
                    best = best.max(v);
                }
            }
            Ok(best / f.eval(x))
        })
        .collect();
    let vals = vals?;
    let k = argmax(&vals);
    Ok(ClassEstimate { tag, p: 1.0, constant: vals[k], witness: Witness::Point { x: points.points()[k] } })
}

/// Outcome of the reverse-Hölder exponent search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReverseHolder {
    /// Largest `r - 1` on the grid with every smaller `r` passing the cap.
    pub epsilon_hat: f64,
    /// Set when even the smallest `r` exceeds the cap.
    pub failed_at_first: bool,
    /// `(r, constant of w^r)` for every `r` examined.
    pub constants: Vec<(f64, f64)>,
}

/// Largest `ε̂` such that `w^r` stays under `cap` in the `A_1^±` class for all
/// `r ≤ 1 + ε̂` in `r_grid`.
pub fn reverse_holder_search(w: &Weight, tag: ClassTag, r_grid: &[f64], cap: f64) -> Result<ReverseHolder> {
    if !matches!(tag, ClassTag::A1Plus | ClassTag::A1Minus) {
        return Err(Error::ExponentMismatch { p: 1.0, class: format!("{tag:?}") });
    }
    if r_grid.is_empty() {
        return Err(Error::EmptyGrid("r grid"));
    }
    if r_grid.iter().any(|r| !(*r > 1.0)) || r_grid.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::ParameterOutOfRange("r grid must be increasing and above 1".into()));
    }
    let points = PointGrid::default_for(w.grid());
    let hs = HGrid::default_for(w.grid());
    let mut constants = Vec::new();
    let mut epsilon_hat = 0.0;
    for &r in r_grid {
        let c = a1_constant(&w.powf(r)?, tag, &points, &hs)?.constant;
        constants.push((r, c));
        if c > cap {
            break;
        }
        epsilon_hat = r - 1.0;
    }
    let failed_at_first = constants[0].1 > cap;
    Ok(ReverseHolder { epsilon_hat, failed_at_first, constants })
}

/// `v = μ^{(1+α)p} w`, so that `μ^{1+α} = (v/w)^{1/p}`.
pub fn derive_related_weights(mu: &Weight, alpha: f64, p: f64, w: &Weight) -> Result<Weight> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::ParameterOutOfRange(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::ParameterOutOfRange(format!("p must lie in (1, ∞), got {p}")));
    }
    let e = (1.0 + alpha) * p;
    Weight::new(mu.function().zip_with(w.function(), |m, w| m.powf(e) * w)?)
}

/// Estimates along a refinement ladder and the resulting membership verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipStudy {
    pub tag: ClassTag,
    pub p: f64,
    /// `(grid nodes, subgrid nodes, constant)` per step.
    pub steps: Vec<(usize, usize, f64)>,
    /// Relative change of the last step.
    pub last_change: f64,
    /// Constants never decreased along the ladder.
    pub monotone: bool,
    /// Last relative change below the stability threshold.
    pub member: bool,
}

/// Refines the grid and the family together: step `k` uses
/// `2^k (n0 - 1) + 1` grid nodes and `2^k (m0 - 1) + 1` subgrid nodes, the
/// new subgrid nodes being the midpoints of the old ones, so every family
/// contains the previous one. Point grids follow the grid.
pub fn membership_study(
    make: impl Fn(Grid) -> Result<Weight>,
    grid0: Grid,
    m0: usize,
    p: f64,
    tag: ClassTag,
    steps: usize,
    threshold: f64,
) -> Result<MembershipStudy> {
    if steps < 2 {
        return Err(Error::ParameterOutOfRange("a membership study needs at least two steps".into()));
    }
    let mut out = Vec::with_capacity(steps);
    let mut pts = subgrid(&grid0, m0)?;
    for k in 0..steps {
        let grid = Grid::new(grid0.lo(), grid0.hi(), (1usize << k) * (grid0.len() - 1) + 1)?;
        if k > 0 {
            pts = refine_points(&pts, &grid);
        }
        let w = make(grid)?;
        let family = if tag.is_a1() {
            Family::Points(PointGrid::default_for(&grid))
        } else {
            Family::Triples(TripleFamily::from_points(&pts)?)
        };
        out.push((grid.len(), pts.len(), class_constant(&w, p, tag, &family)?.constant));
    }
    let (prev, last) = (out[steps - 2].2, out[steps - 1].2);
    let last_change = (last - prev).abs() / prev.abs().max(f64::MIN_POSITIVE);
    let monotone = out.windows(2).all(|s| s[1].2 >= s[0].2);
    Ok(MembershipStudy { tag, p, steps: out, last_change, monotone, member: last_change < threshold })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(-8.0, 8.0, 2001).unwrap()
    }

    #[test]
    fn positivity_enforced() {
        let g = grid();
        let f = SampledFunction::from_fn(g, |x| x).unwrap();
        assert!(matches!(Weight::new(f), Err(Error::NonPositiveWeight { .. })));
        // the node at 0 is lifted by the floor
        assert!(Weight::power(g, 1.2).is_ok());
        assert!(Weight::power(g, -0.5).is_ok());
    }

    #[test]
    fn unit_weight_ap_plus() {
        let g = grid();
        let w = Weight::constant(g, 1.0).unwrap();
        let fam = Family::Triples(TripleFamily::from_subgrid(&g, 48).unwrap());
        let est = class_constant(&w, 2.0, ClassTag::ApPlus, &fam).unwrap();
        assert!((est.constant - 0.25).abs() < 0.02 * 0.25, "{est:?}");
        assert!(est.constant <= 0.25 + 1e-12);
    }

    #[test]
    fn exponent_mismatch() {
        let g = grid();
        let w = Weight::constant(g, 1.0).unwrap();
        let fam = Family::Triples(TripleFamily::from_subgrid(&g, 8).unwrap());
        assert!(matches!(class_constant(&w, 1.0, ClassTag::ApPlus, &fam), Err(Error::ExponentMismatch { .. })));
        let pts = Family::Points(PointGrid::default_for(&g));
        assert!(matches!(class_constant(&w, 2.0, ClassTag::A1Plus, &pts), Err(Error::ExponentMismatch { .. })));
        assert!(matches!(TripleFamily::new(vec![]), Err(Error::EmptyFamily(_))));
    }

    #[test]
    fn exponential_a1_plus() {
        let g = grid();
        let w = Weight::exponential(g, 1.0).unwrap();
        let est = class_constant(&w, 1.0, ClassTag::A1Plus, &Family::Points(PointGrid::default_for(&g))).unwrap();
        assert!(est.constant >= 0.99 && est.constant <= 1.0, "{est:?}");
    }

    #[test]
    fn reverse_holder_trivial_cases() {
        let g = grid();
        let r: Vec<f64> = (1..=20).map(|k| 1.0 + 0.05 * k as f64).collect();
        let one = Weight::constant(g, 1.0).unwrap();
        let rh = reverse_holder_search(&one, ClassTag::A1Plus, &r, 2.0).unwrap();
        assert!((rh.epsilon_hat - 1.0).abs() < 1e-12);
        let e = Weight::exponential(g, -1.0).unwrap();
        let rh = reverse_holder_search(&e, ClassTag::A1Minus, &r, 2.0).unwrap();
        assert!((rh.epsilon_hat - 1.0).abs() < 1e-12, "{rh:?}");
        assert!(!rh.failed_at_first);
    }

    #[test]
    fn related_weight_formula() {
        let g = grid();
        let one = Weight::constant(g, 1.0).unwrap();
        let w = Weight::exponential(g, 0.3).unwrap();
        let v = derive_related_weights(&one, 0.5, 2.0, &w).unwrap();
        assert_eq!(v.function().values(), w.function().values());
        let mu = Weight::power(g, -0.125).unwrap();
        let v = derive_related_weights(&mu, 0.5, 2.0, &one).unwrap();
        let direct = Weight::power(g, -0.375).unwrap();
        for (a, b) in v.function().values().iter().zip(direct.function().values()) {
            assert!((a - b).abs() <= 1e-12 * b);
        }
        assert!(derive_related_weights(&mu, 1.0, 2.0, &one).is_err());
        let other = Weight::constant(Grid::new(-8.0, 8.0, 101).unwrap(), 1.0).unwrap();
        assert!(matches!(derive_related_weights(&mu, 0.5, 2.0, &other), Err(Error::GridMismatch)));
    }
}
