use crate::error::{Error, Result};
use crate::grid::{Grid, SampledFunction};

/// Finite window `n_min..=n_max` of the dyadic scales `2^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DyadicRange {
    pub n_min: i32,
    pub n_max: i32,
}

impl DyadicRange {
    pub fn new(n_min: i32, n_max: i32) -> Result<Self> {
        if n_min > n_max {
            return Err(Error::ParameterOutOfRange(format!("empty dyadic range [{n_min}, {n_max}]")));
        }
        Ok(Self { n_min, n_max })
    }

    /// `n_min = ceil(log2(2Δx))`, `n_max = floor(log2(width/4))`.
    pub fn default_for(grid: &Grid) -> Result<Self> {
        let n_min = (2.0 * grid.dx()).log2().ceil() as i32;
        let n_max = (grid.width() / 4.0).log2().floor() as i32;
        Self::new(n_min, n_max)
    }

    /// Whether every scale is resolved by and fits inside `grid`.
    pub fn fits(&self, grid: &Grid) -> bool {
        2f64.powi(self.n_min) >= grid.dx() && 2f64.powi(self.n_max) <= grid.width() / 4.0
    }

    pub fn len(&self) -> usize {
        (self.n_max - self.n_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn indices(&self) -> impl Iterator<Item = i32> {
        self.n_min..=self.n_max
    }
}

/// How averaging windows that leave the grid are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Extension {
    /// The window must fit the grid.
    Strict,
    /// Beyond the grid, use the exact integral of the closed form; error if
    /// there is none.
    #[default]
    ClosedForm,
    /// As `ClosedForm`, but treat `f` as zero where no exact integral exists
    /// and report the truncation.
    ClosedFormOrZero,
}

/// `∫_x^{x+2^n} f` under `ext`; the flag reports a zero-extension.
fn window_integral(f: &SampledFunction, x: f64, n: i32, ext: Extension) -> Result<(f64, bool)> {
    let g = f.grid();
    let b = x + 2f64.powi(n);
    if !g.contains(x) {
        return Err(Error::PointOutOfDomain { x, needed: "x".into(), lo: g.lo(), hi: g.hi() });
    }
    if ext == Extension::Strict {
        g.require_window(x, x, b)?;
    }
    if let Some(v) = f.closed_form().and_then(|cf| cf.integral(x, b)) {
        return Ok((v, false));
    }
    if g.contains(b) {
        return Ok(f.integral_extended(x, b));
    }
    match ext {
        Extension::Strict => unreachable!("window checked above"),
        Extension::ClosedForm => {
            let (v, truncated) = f.integral_extended(x, b);
            if truncated {
                g.require_window(x, x, b)?;
            }
            Ok((v, false))
        }
        Extension::ClosedFormOrZero => Ok(f.integral_extended(x, b)),
    }
}

/// `A_n f(x) = 2^{-n} ∫_x^{x+2^n} f`, integrated exactly when the closed form
/// allows it (also past the grid edge), from the samples otherwise.
pub fn dyadic_average(f: &SampledFunction, x: f64, n: i32) -> Result<f64> {
    Ok(window_integral(f, x, n, Extension::ClosedForm)?.0 * 2f64.powi(-n))
}

/// Value of `S^+ f(x)` together with whether any window was zero-extended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareValue {
    pub value: f64,
    pub truncated: bool,
}

/// `S^+` restricted to a dyadic range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareFunction {
    pub range: DyadicRange,
    pub extension: Extension,
}

impl SquareFunction {
    pub fn new(range: DyadicRange, extension: Extension) -> Self {
        Self { range, extension }
    }

    /// `A_n f(x)` for `n = n_min..=n_max`, plus the truncation flag.
    pub fn averages(&self, f: &SampledFunction, x: f64) -> Result<(Vec<f64>, bool)> {
        let mut truncated = false;
        let mut out = Vec::with_capacity(self.range.len());
        for n in self.range.indices() {
            let (v, t) = window_integral(f, x, n, self.extension)?;
            truncated |= t;
            out.push(v * 2f64.powi(-n));
        }
        Ok((out, truncated))
    }

    /// `(A_n f(x) - A_{n-1} f(x))` for `n = n_min+1..=n_max`.
    pub fn differences(&self, f: &SampledFunction, x: f64) -> Result<(Vec<f64>, bool)> {
        let (avg, truncated) = self.averages(f, x)?;
        Ok((avg.windows(2).map(|w| w[1] - w[0]).collect(), truncated))
    }

    pub fn eval_detailed(&self, f: &SampledFunction, x: f64) -> Result<SquareValue> {
        let (d, truncated) = self.differences(f, x)?;
        Ok(SquareValue { value: d.iter().map(|v| v * v).sum::<f64>().sqrt(), truncated })
    }

    pub fn eval(&self, f: &SampledFunction, x: f64) -> Result<f64> {
        Ok(self.eval_detailed(f, x)?.value)
    }
}

/// `S^+ f(x) = (Σ_{n=n_min+1}^{n_max} |A_n f(x) - A_{n-1} f(x)|²)^{1/2}`.
pub fn square_plus(f: &SampledFunction, x: f64, range: DyadicRange) -> Result<f64> {
    SquareFunction::new(range, Extension::ClosedForm).eval(f, x)
}

#[inline]
fn h_component(u: f64, n: i32) -> f64 {
    if u >= 0.0 {
        return 0.0;
    }
    let s = 2f64.powi(n);
    let mut v = 0.0;
    if -u < s {
        v += 1.0 / s;
    }
    if -u < 0.5 * s {
        v -= 2.0 / s;
    }
    v
}

/// Components `H_n(u) = 2^{-n} χ_{(-2^n,0)}(u) - 2^{1-n} χ_{(-2^{n-1},0)}(u)`
/// for `n` in `range`, in increasing `n`.
pub fn vector_kernel_h(u: f64, range: DyadicRange) -> Vec<f64> {
    range.indices().map(|n| h_component(u, n)).collect()
}

/// `‖H(u) - H(v)‖_{l²}` over `range`, without allocating.
pub fn h_difference_norm(u: f64, v: f64, range: DyadicRange) -> f64 {
    range
        .indices()
        .map(|n| {
            let d = h_component(u, n) - h_component(v, n);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ClosedForm;

    fn grid() -> Grid {
        Grid::new(-8.0, 8.0, 2001).unwrap()
    }

    #[test]
    fn default_range_fits() {
        let g = grid();
        let r = DyadicRange::default_for(&g).unwrap();
        // 2Δx = 1/64 + 1/64 = 2^{-5.97}
        assert_eq!((r.n_min, r.n_max), (-5, 2));
        assert!(r.fits(&g));
        assert!(!DyadicRange::new(-20, 20).unwrap().fits(&g));
        assert!(DyadicRange::new(3, 2).is_err());
    }

    #[test]
    fn averages_of_half_line() {
        let f = SampledFunction::from_closed_form(grid(), ClosedForm::Indicator { a: 0.0, b: f64::INFINITY }).unwrap();
        for n in 0..=20 {
            let v = dyadic_average(&f, -1.0, n).unwrap();
            assert!((v - (1.0 - 2f64.powi(-n))).abs() < 1e-12, "n = {n}: {v}");
        }
    }

    #[test]
    fn unit_average() {
        let f = SampledFunction::from_closed_form(grid(), ClosedForm::Bump { center: 0.0, width: 2.0 }).unwrap();
        let f = f.without_closed_form();
        let direct = crate::grid::interval_average(&f, crate::grid::Interval::new(-0.3, 0.7).unwrap()).unwrap();
        assert_eq!(dyadic_average(&f, -0.3, 0).unwrap(), direct);
    }

    #[test]
    fn windows_without_closed_form() {
        let f = SampledFunction::constant(grid(), 1.0).unwrap().without_closed_form();
        assert!(matches!(dyadic_average(&f, 6.0, 2), Err(Error::PointOutOfDomain { .. })));
        let s = SquareFunction::new(DyadicRange::new(0, 3).unwrap(), Extension::ClosedFormOrZero);
        assert!(s.eval_detailed(&f, 6.0).unwrap().truncated);
        let strict = SquareFunction::new(DyadicRange::new(0, 3).unwrap(), Extension::Strict);
        let c = SampledFunction::constant(grid(), 1.0).unwrap();
        assert!(strict.eval(&c, 6.0).is_err());
    }

    #[test]
    fn half_line_square_function() {
        let f = SampledFunction::from_closed_form(grid(), ClosedForm::Indicator { a: 0.0, b: f64::INFINITY }).unwrap();
        let v = square_plus(&f, -1.0, DyadicRange::new(-20, 20).unwrap()).unwrap();
        let expect = 1.0 / 3f64.sqrt();
        assert!((v - expect).abs() < 0.01 * expect, "{v}");
    }

    #[test]
    fn constant_has_zero_square_function() {
        let f = SampledFunction::constant(grid(), 3.0).unwrap();
        assert!(square_plus(&f, 0.0, DyadicRange::new(-20, 20).unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn kernel_components() {
        let r = DyadicRange::new(-3, 4).unwrap();
        assert!(vector_kernel_h(0.5, r).iter().all(|v| *v == 0.0));
        assert!(vector_kernel_h(0.0, r).iter().all(|v| *v == 0.0));
        let h = vector_kernel_h(-1.5, r);
        assert_eq!(h[(1 - r.n_min) as usize], 0.5);
        assert_eq!(h_difference_norm(-1.5, -1.5, r), 0.0);
    }

    #[test]
    fn kernel_consistency_with_square_function() {
        // sqrt(Σ |∫ H_n(x - y) f(y) dy|²) against S^+ f(x), brute-force nodal sums
        let g = Grid::new(-8.0, 8.0, 16001).unwrap();
        let f = SampledFunction::from_closed_form(g, ClosedForm::Bump { center: 0.5, width: 1.5 }).unwrap();
        let r = DyadicRange::new(-3, 2).unwrap();
        let x = -0.25;
        let mut sum = 0.0;
        for n in r.indices().skip(1) {
            let dx = g.dx();
            let c: f64 = (0..g.len()).map(|j| h_component(x - g.node(j), n) * f.value(j) * dx).sum();
            sum += c * c;
        }
        let brute = sum.sqrt();
        let s = square_plus(&f, x, r).unwrap();
        assert!((brute - s).abs() < 2e-3 * s, "{brute} vs {s}");
    }
}
