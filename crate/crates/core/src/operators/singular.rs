use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{trapezoid, Grid, SampledFunction};

use super::kernel::{KernelSpec, SupportSide};

/// What to do with a kernel that has no validated constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelPolicy {
    #[default]
    Warn,
    Strict,
}

/// Truncated one-sided singular integral bound to a kernel and a grid.
///
/// For a kernel on the negative axis,
/// `T f(x) = ∫_{x+ε}^{hi} K(x - y) f(y) dy`; for the positive axis the
/// window is `[lo, x - ε]`. Integrands use nodal products `K(x - y_j) f_j`,
/// so the result is linear in the samples.
#[derive(Debug, Clone)]
pub struct SingularIntegral {
    kernel: KernelSpec,
    grid: Grid,
    eps: f64,
    /// `K(∓k Δx)` for `k = 0..n`, used when `x` is a node.
    lags: Vec<f64>,
}

impl SingularIntegral {
    pub fn new(kernel: &KernelSpec, grid: Grid, policy: KernelPolicy) -> Result<Self> {
        if !kernel.is_validated() {
            match policy {
                KernelPolicy::Strict => return Err(Error::UnvalidatedKernel),
                KernelPolicy::Warn => log::warn!("kernel {} used without validated constants", kernel.name()),
            }
        }
        let dx = grid.dx();
        let sign = match kernel.support() {
            SupportSide::NegativeAxis => -1.0,
            SupportSide::PositiveAxis => 1.0,
        };
        let lags = (0..grid.len()).map(|k| kernel.eval(sign * k as f64 * dx)).collect();
        Ok(Self { kernel: kernel.clone(), grid, eps: kernel.pv_epsilon_for(dx), lags })
    }

    /// Same operator with a different inner cutoff.
    pub fn with_epsilon(&self, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::ParameterOutOfRange(format!("pv epsilon must be positive, got {eps}")));
        }
        Ok(Self { eps, ..self.clone() })
    }

    pub fn epsilon(&self) -> f64 {
        self.eps
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn window(&self, x: f64) -> (f64, f64) {
        match self.kernel.support() {
            SupportSide::NegativeAxis => ((x + self.eps).min(self.grid.hi()), self.grid.hi()),
            SupportSide::PositiveAxis => (self.grid.lo(), (x - self.eps).max(self.grid.lo())),
        }
    }

    /// `∫_a^b K(x - y) f(y) dy` restricted to the cutoff window at `x`.
    pub fn integrate_between(&self, f: &SampledFunction, x: f64, a: f64, b: f64) -> Result<f64> {
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        if !self.grid.contains(x) {
            return Err(Error::PointOutOfDomain { x, needed: "x".into(), lo: self.grid.lo(), hi: self.grid.hi() });
        }
        let (wa, wb) = self.window(x);
        let (a, b) = (a.max(wa), b.min(wb));
        if b <= a {
            return Ok(0.0);
        }
        let g = &self.grid;
        let v = f.values();
        let k = &self.kernel;
        if let Some(i) = g.node_index(x) {
            let lags = &self.lags;
            let lag = |j: usize| lags[if j > i { j - i } else { i - j }];
            return Ok(trapezoid(g, a, b, |j| lag(j) * v[j], |y| k.eval(x - y) * f.interp(y)));
        }
        Ok(trapezoid(g, a, b, |j| k.eval(x - g.node(j)) * v[j], |y| k.eval(x - y) * f.interp(y)))
    }

    /// `T f(x)` over the whole cutoff window.
    pub fn at(&self, f: &SampledFunction, x: f64) -> Result<f64> {
        self.integrate_between(f, x, self.grid.lo(), self.grid.hi())
    }

    /// `T f` at every node.
    pub fn on_grid(&self, f: &SampledFunction) -> Result<SampledFunction> {
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let g = self.grid;
        let values: Result<Vec<f64>> = (0..g.len()).into_par_iter().map(|i| self.at(f, g.node(i))).collect();
        SampledFunction::new(g, values?)
    }

    /// Bound on the part of `∫ K(x - y) f(y) dy` lost beyond the grid edge.
    ///
    /// Zero when `f` is known to vanish outside the domain; otherwise
    /// `None`, since the samples say nothing about `f` there.
    pub fn edge_tail_bound(&self, f: &SampledFunction) -> Option<f64> {
        let (lo, hi) = (self.grid.lo(), self.grid.hi());
        match f.closed_form() {
            Some(cf) => {
                let (s0, s1) = cf.support();
                let inside = match self.kernel.support() {
                    SupportSide::NegativeAxis => s1 <= hi,
                    SupportSide::PositiveAxis => s0 >= lo,
                };
                inside.then_some(0.0)
            }
            None => None,
        }
    }
}

/// `T^+ f(x)` with the kernel's cutoff; unvalidated kernels only warn.
pub fn singular(kernel: &KernelSpec, f: &SampledFunction, x: f64) -> Result<f64> {
    let t = SingularIntegral::new(kernel, *f.grid(), KernelPolicy::Warn)?;
    if t.edge_tail_bound(f).is_none() {
        log::debug!("{}: f is not known to vanish past the grid edge; integral truncated there", kernel.name());
    }
    t.at(f, x)
}
