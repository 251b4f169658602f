use crate::error::{Error, Result};
use crate::grid::{integrate, HGrid, Interval, SampledFunction};

/// Which half-line a one-sided operator looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `[x, x + h]`
    Plus,
    /// `[x - h, x]`
    Minus,
}

impl Side {
    pub fn window(self, x: f64, h: f64) -> (f64, f64) {
        match self {
            Side::Plus => (x, x + h),
            Side::Minus => (x - h, x),
        }
    }

    pub fn flip(self) -> Side {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }
}

/// One-sided Hardy-Littlewood maximal operator bound to one function.
///
/// Holds `|f|` so repeated evaluations cost `O(|hs|)` each.
#[derive(Debug, Clone)]
pub struct Maximal {
    abs: SampledFunction,
}

impl Maximal {
    pub fn new(f: &SampledFunction) -> Self {
        Self { abs: f.abs() }
    }

    fn average(&self, x: f64, side: Side, h: f64) -> Result<f64> {
        let (a, b) = side.window(x, h);
        Ok(integrate(&self.abs, Interval::new(a, b)?)? / h)
    }

    /// `M^± f(x)` over `hs`; the full `h_max` window must fit the domain.
    pub fn eval(&self, x: f64, side: Side, hs: &HGrid) -> Result<f64> {
        let grid = self.abs.grid();
        let (a, b) = side.window(x, hs.h_max());
        grid.require_window(x, a, b)?;
        let mut best = 0.0f64;
        for &h in hs.values() {
            best = best.max(self.average(x, side, h)?);
        }
        Ok(best)
    }

    /// As [`Maximal::eval`] but keeping only the scales whose window fits the
    /// domain. Returns `None` when no scale fits.
    pub fn eval_clipped(&self, x: f64, side: Side, hs: &HGrid) -> Result<Option<f64>> {
        let grid = self.abs.grid();
        if !grid.contains(x) {
            return Err(Error::PointOutOfDomain { x, needed: "x".into(), lo: grid.lo(), hi: grid.hi() });
        }
        let room = match side {
            Side::Plus => grid.hi() - x,
            Side::Minus => x - grid.lo(),
        };
        match hs.clipped(room) {
            Some(clipped) => self.eval(x, side, &clipped).map(Some),
            None => Ok(None),
        }
    }
}

/// `M^+ f(x) = sup_h (1/h) ∫_x^{x+h} |f|`, `M^-` with `[x - h, x]`.
pub fn maximal(f: &SampledFunction, x: f64, side: Side, hs: &HGrid) -> Result<f64> {
    Maximal::new(f).eval(x, side, hs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{ClosedForm, Grid};

    fn setup() -> (Grid, HGrid) {
        let g = Grid::new(-8.0, 8.0, 2001).unwrap();
        (g, HGrid::default_for(&g))
    }

    #[test]
    fn constant_function() {
        let (g, hs) = setup();
        let f = SampledFunction::constant(g, -1.5).unwrap();
        for x in [-3.0, 0.0, 1.7] {
            assert!((maximal(&f, x, Side::Plus, &hs).unwrap() - 1.5).abs() < 1e-12);
            assert!((maximal(&f, x, Side::Minus, &hs).unwrap() - 1.5).abs() < 1e-12);
        }
    }

    #[test]
    fn indicator_left_of_support() {
        let (g, _) = setup();
        let f = SampledFunction::from_closed_form(g, ClosedForm::Indicator { a: 0.0, b: 1.0 }).unwrap();
        // dense scan of h around the analytic maximizer h = 1 - x = 2
        let hs = HGrid::new(0.01, 4.0, 4001).unwrap();
        let v = maximal(&f, -1.0, Side::Plus, &hs).unwrap();
        assert!((v - 0.5).abs() < 2.0 * g.dx(), "{v}");
        let right = maximal(&f, 2.0, Side::Plus, &HGrid::default_for(&g)).unwrap();
        assert_eq!(right, 0.0);
    }

    #[test]
    fn window_must_fit() {
        let (g, hs) = setup();
        let f = SampledFunction::constant(g, 1.0).unwrap();
        assert!(matches!(maximal(&f, 5.0, Side::Plus, &hs), Err(Error::PointOutOfDomain { .. })));
        let clipped = Maximal::new(&f).eval_clipped(7.9, Side::Plus, &hs).unwrap().unwrap();
        assert!((clipped - 1.0).abs() < 1e-12);
        assert_eq!(Maximal::new(&f).eval_clipped(8.0, Side::Plus, &hs).unwrap(), None);
    }

    #[test]
    fn reflection_duality() {
        let (g, hs) = setup();
        let f = SampledFunction::from_closed_form(g, ClosedForm::Bump { center: 0.5, width: 1.5 }).unwrap();
        let r = f.reflect();
        for x in [-2.0, -0.5, 0.0, 1.25, 3.0] {
            let minus = maximal(&f, x, Side::Minus, &hs).unwrap();
            let plus = maximal(&r, -x, Side::Plus, &hs).unwrap();
            assert!((minus - plus).abs() < 1e-12, "{x}: {minus} vs {plus}");
        }
    }
}
