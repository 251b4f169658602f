use rayon::prelude::*;

use super::config::{ExperimentConfig, Suite};
use super::report::{Assertion, CaseRecord, RefinementRow, SuiteRecord, VerificationReport};
use crate::commutators::{
    check_h_regularity, commutator_s_on_grid, commutator_t_on_grid, AuxWeightPair, CheckResult, CommutatorInputs,
    Lemma23, Lemma24, SDecomposition, TDecomposition,
};
use crate::dsl::{parse_function_dsl, parse_weight_dsl};
use crate::error::{Error, Result};
use crate::grid::{Grid, HGrid, SampledFunction};
use crate::operators::{
    default_kernel, validate_kernel, DyadicRange, Extension, KernelPolicy, KernelSpec, SingularIntegral,
    SquareFunction, SupportSide, ValidationGrids, ValidationOptions,
};
use crate::spaces::{triebel_norm, weighted_lp_norm, IntervalFamily, NormParams, NormSide};
use crate::weights::{class_constant, derive_related_weights, ClassTag, Family, PointGrid, TripleFamily, Weight};

/// Subgrid size of the triple and interval families.
const FAMILY_NODES: usize = 48;

/// Scan of the reverse-Hölder exponent: `r = 1.05, 1.10, ..., 3.00`.
pub fn reverse_holder_grid() -> Vec<f64> {
    (1..=40).map(|k| 1.0 + 0.05 * k as f64).collect()
}

/// The 20-function test family: 6 bumps, 6 indicators, 4 powers, 4 random
/// step functions. Every member vanishes outside `[-3, 3]`.
pub fn default_family() -> Vec<String> {
    [
        "bump(-2, 0.5)",
        "bump(-1, 1)",
        "bump(0, 1)",
        "bump(0.5, 0.25)",
        "bump(1, 2)",
        "bump(-0.5, 1.5)",
        "indicator(0, 1)",
        "indicator(-1, 1)",
        "indicator(-2, -1)",
        "indicator(-3, 3)",
        "indicator(0.25, 0.5)",
        "indicator(-0.5, 2)",
        "power(0.25) * indicator(-3, 3)",
        "power(0.5) * indicator(-3, 3)",
        "spower(0.25) * indicator(-3, 3)",
        "spower(0.5) * indicator(-3, 3)",
        "random(4) * indicator(-3, 3)",
        "random(8) * indicator(-3, 3)",
        "random(16) * indicator(-3, 3)",
        "random(32) * indicator(-3, 3)",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

fn family_specs(cfg: &ExperimentConfig) -> Vec<String> {
    if cfg.family.functions.is_empty() {
        default_family()
    } else {
        cfg.family.functions.clone()
    }
}

/// Everything that depends on one grid size.
struct GridCtx {
    n: usize,
    grid: Grid,
    b: SampledFunction,
    family: Vec<(String, SampledFunction)>,
    mu: Weight,
    w: Weight,
    v: Weight,
    tau: Weight,
}

fn weight(spec: &str, grid: &Grid, role: &str) -> Result<Weight> {
    parse_weight_dsl(spec, grid, 0).map_err(|e| Error::ConfigInvalid(format!("weight {role}: {e}")))
}

impl GridCtx {
    fn new(cfg: &ExperimentConfig, n: usize) -> Result<Self> {
        let grid = Grid::new(cfg.domain.0, cfg.domain.1, n)?;
        let seed = cfg.family.seed;
        let family = family_specs(cfg)
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                let f = parse_function_dsl(&s, &grid, seed.wrapping_add(i as u64))?;
                Ok((s, f))
            })
            .collect::<Result<Vec<_>>>()?;
        let mu = weight(&cfg.weights.mu, &grid, "mu")?;
        let w = weight(&cfg.weights.w, &grid, "w")?;
        let tau = weight(&cfg.weights.tau, &grid, "tau")?;
        let v = derive_related_weights(&mu, cfg.alpha, cfg.p, &w)?;
        Ok(Self { n, grid, b: parse_function_dsl(&cfg.symbol, &grid, seed)?, family, mu, w, v, tau })
    }

    fn pair(&self, alpha: f64) -> Result<AuxWeightPair> {
        AuxWeightPair::new(self.tau.clone(), self.mu.clone(), alpha)
    }

    /// Family members must vanish on the outer quarter of the domain at each end.
    fn check_compact_support(&self) -> Result<()> {
        let q = self.grid.width() / 4.0;
        let (lo, hi) = (self.grid.lo() + q, self.grid.hi() - q);
        for (name, f) in &self.family {
            let bad = self.grid.nodes().zip(f.values()).find(|(x, v)| (*x < lo || *x > hi) && **v != 0.0);
            if let Some((x, _)) = bad {
                return Err(Error::ConfigInvalid(format!(
                    "family member '{name}' does not vanish at x = {x}, outside [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }
}

/// Shared state of one run.
struct Run<'a> {
    cfg: &'a ExperimentConfig,
    ctxs: Vec<GridCtx>,
    kernel: Option<KernelSpec>,
    epsilon_hat: Option<f64>,
}

impl<'a> Run<'a> {
    fn kernel(&mut self) -> Result<KernelSpec> {
        if let Some(k) = &self.kernel {
            return Ok(k.clone());
        }
        let raw = match &self.cfg.kernel.table {
            Some(t) => KernelSpec::from_table("table", SupportSide::NegativeAxis, t.clone())?,
            None => default_kernel(self.cfg.kernel.levels),
        };
        let rep = validate_kernel(&raw, &ValidationGrids::standard(0), ValidationOptions::default())?;
        if !rep.is_valid() {
            let why: Vec<String> = rep.violations.iter().map(|v| v.reason.clone()).collect();
            return Err(Error::HypothesisFailure(format!("kernel '{}' rejected: {}", raw.name(), why.join("; "))));
        }
        let k = raw.with_constants(rep.constants);
        self.kernel = Some(k.clone());
        Ok(k)
    }

    /// Reverse-Hölder `ε̂` of `(τ^{-1}, σ^{-1})` on the coarsest grid.
    fn epsilon_hat(&mut self) -> Result<f64> {
        if let Some(e) = self.epsilon_hat {
            return Ok(e);
        }
        let pair = self.ctxs[0].pair(self.cfg.alpha)?;
        let e = pair.epsilon_hat(&reverse_holder_grid(), self.cfg.tolerance.constant_cap)?;
        self.epsilon_hat = Some(e);
        Ok(e)
    }

    fn dyadic(&self, grid: &Grid) -> Result<DyadicRange> {
        match self.cfg.dyadic {
            Some(d) => DyadicRange::new(d.n_min, d.n_max),
            None => DyadicRange::default_for(grid),
        }
    }

    /// Grid-independent range for the S-side checks.
    fn fixed_dyadic(&self) -> Result<DyadicRange> {
        match self.cfg.dyadic {
            Some(d) => DyadicRange::new(d.n_min, d.n_max),
            None => DyadicRange::new(-12, 12),
        }
    }

    fn h_grid(&self) -> Result<HGrid> {
        let h = self.cfg.h_grid;
        HGrid::new(h.h_min, h.h_max, h.count)
    }

    /// Points `lo + 4kΔx` of the coarsest grid; nodes of every nested refinement.
    fn triebel_points(&self) -> Vec<f64> {
        let g = &self.ctxs[0].grid;
        let step = 4.0 * g.dx();
        let count = (g.width() / step).floor() as usize;
        (0..=count).map(|k| g.lo() + step * k as f64).filter(|x| *x <= g.hi()).collect()
    }

    fn fixed_families(&self) -> (Family, Family) {
        let g = &self.ctxs[0].grid;
        (
            Family::Triples(TripleFamily::from_subgrid(g, FAMILY_NODES).expect("subgrid of a valid grid")),
            Family::Points(PointGrid::default_for(g)),
        )
    }
}

/// Runs the selected suites on every grid size.
pub fn run_suite(cfg: &ExperimentConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let ctxs = cfg.grid_sizes.iter().map(|&n| GridCtx::new(cfg, n)).collect::<Result<Vec<_>>>()?;
    let mut run = Run { cfg, ctxs, kernel: None, epsilon_hat: None };
    let mut records = Vec::new();
    for suite in cfg.selected_suites() {
        log::info!("running suite {}", suite.name());
        let rec = match suite {
            Suite::Weights => weights_suite(&mut run)?,
            Suite::Lemmas => lemmas_suite(&mut run)?,
            Suite::Decompositions => decompositions_suite(&mut run)?,
            Suite::Theorem1 => theorem_suite(&mut run, Suite::Theorem1)?,
            Suite::Theorem2 => theorem_suite(&mut run, Suite::Theorem2)?,
            Suite::All => unreachable!("expanded by selected_suites"),
        };
        records.push(rec);
    }
    Ok(VerificationReport::new(cfg.clone(), records))
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

/// Rows and assertion for a fitted constant per grid.
fn fitted_row(rec: &mut SuiteRecord, name: &str, values: &[(usize, f64)], cfg: &ExperimentConfig) {
    let row = RefinementRow::new(name, values, cfg.tolerance.drift_pct);
    let finite = values.iter().all(|(_, v)| v.is_finite());
    let pass = finite && row.within_threshold;
    let detail = match row.drift_pct {
        Some(d) => format!("values {values:?}, drift {d:.3}% (threshold {}%)", cfg.tolerance.drift_pct),
        None => format!("non-finite values {values:?}"),
    };
    rec.refinement.push(row);
    rec.assert(Assertion::new(format!("{name} finite and stable"), pass, detail));
}

fn weights_suite(run: &mut Run) -> Result<SuiteRecord> {
    let cfg = run.cfg;
    let cap = cfg.tolerance.constant_cap;
    let p = cfg.p;
    let mut rec = SuiteRecord::new(Suite::Weights);
    let mut table: Vec<(String, Vec<(usize, f64)>)> = Vec::new();
    for ctx in &run.ctxs {
        let triples = Family::Triples(TripleFamily::from_subgrid(&ctx.grid, FAMILY_NODES)?);
        let points = Family::Points(PointGrid::default_for(&ctx.grid));
        let pair = ctx.pair(cfg.alpha)?;
        let inv = |w: &Weight| Weight::new(w.function().map(|_, v| 1.0 / v)?);
        let jobs: Vec<(&str, Weight, f64, ClassTag, &Family)> = vec![
            ("w in A_p^+", ctx.w.clone(), p, ClassTag::ApPlus, &triples),
            ("w in A_p", ctx.w.clone(), p, ClassTag::Ap, &triples),
            ("v in A_p", ctx.v.clone(), p, ClassTag::Ap, &triples),
            ("mu in A_1", ctx.mu.clone(), 1.0, ClassTag::A1, &points),
            ("tau^-1 in A_1^-", inv(&pair.tau)?, 1.0, ClassTag::A1Minus, &points),
            ("sigma^-1 in A_1", inv(&pair.sigma)?, 1.0, ClassTag::A1, &points),
        ];
        let out: Vec<Result<(String, f64, CaseRecord)>> = jobs
            .into_par_iter()
            .map(|(name, w, p, tag, fam)| {
                let est = class_constant(&w, p, tag, fam)?;
                let witness = serde_json::to_value(est.witness)
                    .ok()
                    .and_then(|v| v.as_object().and_then(|o| o.values().next().cloned()))
                    .and_then(|v| v.as_object().cloned())
                    .map(|o| o.into_iter().filter_map(|(k, v)| v.as_f64().map(|v| (k, v))).collect())
                    .unwrap_or_default();
                let case = CaseRecord::new(name, ctx.n, est.constant, cap, est.constant <= cap).with_witness(witness);
                Ok((name.to_string(), est.constant, case))
            })
            .collect();
        for r in out {
            let (name, c, case) = r?;
            rec.cases.push(case);
            match table.iter_mut().find(|(q, _)| *q == name) {
                Some((_, v)) => v.push((ctx.n, c)),
                None => table.push((name, vec![(ctx.n, c)])),
            }
        }
    }
    for (name, values) in &table {
        let members = values.iter().all(|(_, c)| *c <= cap);
        rec.assert(Assertion::new(format!("{name} (constant <= {cap})"), members, format!("{values:?}")));
        fitted_row(&mut rec, &format!("{name} constant"), values, cfg);
    }
    let eps = run.epsilon_hat()?;
    rec.notes.push(format!("reverse-Hölder epsilon of (tau^-1, sigma^-1) on the coarsest grid: {}", fmt(eps)));
    rec.notes.push(format!(
        "A_p classes over all triples of {FAMILY_NODES} subgrid nodes; A_1 classes over the default point grid"
    ));
    Ok(rec)
}

fn lemmas_suite(run: &mut Run) -> Result<SuiteRecord> {
    let cfg = run.cfg;
    let mut rec = SuiteRecord::new(Suite::Lemmas);
    let eps = run.epsilon_hat()?;
    if eps <= 0.0 {
        return Err(Error::HypothesisFailure(
            "reverse-Hölder search found no exponent above 1 for (tau^-1, sigma^-1)".into(),
        ));
    }
    let r = 1.0 + eps / 2.0;
    let r_prime = r / (r - 1.0);
    rec.notes.push(format!("r = 1 + epsilon/2 = {} with epsilon = {}", fmt(r), fmt(eps)));
    let (mut f23, mut f24, mut f24d) = (Vec::new(), Vec::new(), Vec::new());
    for ctx in &run.ctxs {
        let g = ctx.grid;
        let family = IntervalFamily::from_subgrid(&g, FAMILY_NODES)?;
        let pair = ctx.pair(cfg.alpha)?;
        let l23 = Lemma23::new(&ctx.b, &pair, r, &family)?;
        let l24 = Lemma24::new(&ctx.b, &ctx.mu, cfg.alpha, &family)?;
        let mut fit = [0.0f64; 3];
        for &x in &cfg.scan.xs {
            for &h in &cfg.scan.hs {
                if x + h <= g.hi() && x >= g.lo() {
                    let c = l23.check(x, h)?;
                    fit[0] = fit[0].max(c.fitted_c);
                    rec.cases.push(case_of(format!("lemma23 x={x} h={h}"), ctx.n, &c, c.fitted_c.is_finite()));
                }
                if x >= g.lo() && x <= g.hi() {
                    for j in 3..=10 {
                        let c = l24.check(x, h, j)?;
                        fit[1] = fit[1].max(c.fitted_c);
                        rec.cases.push(case_of(format!("lemma24 x={x} h={h} j={j}"), ctx.n, &c, c.fitted_c.is_finite()));
                    }
                }
            }
            if x >= g.lo() && x <= g.hi() {
                for j in -2..=0 {
                    for k in j + 3..=j + 8 {
                        let c = l24.check_dyadic(x, j, k)?;
                        fit[2] = fit[2].max(c.fitted_c);
                        rec.cases.push(case_of(
                            format!("lemma24 dyadic x={x} j={j} k={k}"),
                            ctx.n,
                            &c,
                            c.fitted_c.is_finite(),
                        ));
                    }
                }
            }
        }
        f23.push((ctx.n, fit[0]));
        f24.push((ctx.n, fit[1]));
        f24d.push((ctx.n, fit[2]));
        rec.notes.push(format!(
            "grid {}: weighted Lipschitz seminorm of b = {} over {} intervals",
            ctx.n,
            fmt(l23.lip_norm()),
            family.len()
        ));
    }
    fitted_row(&mut rec, "lemma23 fitted C", &f23, cfg);
    fitted_row(&mut rec, "lemma24 fitted C", &f24, cfg);
    fitted_row(&mut rec, "lemma24 dyadic fitted C", &f24d, cfg);

    // H-regularity does not depend on the grid
    let range = run.fixed_dyadic()?;
    let x = cfg.scan.xs[0];
    let j = 0;
    let ys: Vec<f64> = (0..=64).map(|i| x + 8.0 * i as f64 / 64.0).collect();
    let mut by_k = Vec::new();
    for k in j + 3..=j + 8 {
        let c = check_h_regularity(j, k, r_prime, x, &ys, range)?;
        by_k.push((k, c.fitted_c));
        rec.cases.push(case_of(format!("h_regularity j={j} k={k}"), run.ctxs[0].n, &c, c.fitted_c.is_finite()));
    }
    let non_increasing = by_k.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-12));
    rec.assert(Assertion::new(
        "h_regularity fitted C non-increasing in k",
        non_increasing && by_k.iter().all(|(_, c)| c.is_finite()),
        format!("r' = {}, dyadic range [{}, {}]: {by_k:?}", fmt(r_prime), range.n_min, range.n_max),
    ));
    Ok(rec)
}

fn case_of(name: String, n: usize, c: &CheckResult, pass: bool) -> CaseRecord {
    CaseRecord::new(name, n, c.lhs, c.rhs, pass).with_witness(c.witnesses.clone())
}

fn decompositions_suite(run: &mut Run) -> Result<SuiteRecord> {
    let cfg = run.cfg;
    let kernel = run.kernel()?;
    let range = run.fixed_dyadic()?;
    let tol = cfg.tolerance.quadrature;
    let mut rec = SuiteRecord::new(Suite::Decompositions);
    rec.notes.push(format!(
        "kernel '{}' with constants {:?}; S-side dyadic range [{}, {}], windows past the domain taken as zero",
        kernel.name(),
        kernel.constants(),
        range.n_min,
        range.n_max
    ));
    let (mut fit_t, mut fit_s) = (Vec::new(), Vec::new());
    let mut worst_margin = f64::INFINITY;
    let mut all_hold = true;
    for ctx in &run.ctxs {
        let g = ctx.grid;
        let t = SingularIntegral::new(&kernel, g, KernelPolicy::Strict)?;
        rec.notes.push(format!("grid {}: principal-value cutoff {}", ctx.n, fmt(t.epsilon())));
        let per_f: Vec<Result<Vec<(CaseRecord, Option<(bool, f64)>, Option<(&str, f64)>)>>> = ctx
            .family
            .par_iter()
            .map(|(name, f)| {
                let inp = CommutatorInputs::new(ctx.b.clone(), f.clone(), cfg.alpha)?
                    .with_singular(t.clone())?
                    .with_square(range);
                let td = TDecomposition::new(&inp)?;
                let sd = SDecomposition::new(&inp)?;
                let mut out = Vec::new();
                for &x in &cfg.scan.xs {
                    for &h in &cfg.scan.hs {
                        let sides: [(&str, bool); 2] =
                            [("T", x + 8.0 * h <= g.hi()), ("S", x + 2f64.powi(h.log2().floor() as i32 + 3) <= g.hi())];
                        for (side, ok) in sides {
                            if !ok || x < g.lo() {
                                continue;
                            }
                            let d = if side == "T" { td.check(x, h)? } else { sd.check(x, h)? };
                            let tri = &d.triangle;
                            let scale = tri.lhs.abs().max(tri.rhs.abs());
                            let holds = tri.margin >= -tol * scale;
                            let rel = if scale > 0.0 { tri.margin / scale } else { f64::INFINITY };
                            out.push((
                                case_of(format!("{side} triangle {name} x={x} h={h}"), ctx.n, tri, holds),
                                Some((holds, rel)),
                                None,
                            ));
                            let k = &d.kernel;
                            out.push((
                                case_of(format!("{side} kernel {name} x={x} h={h}"), ctx.n, k, k.fitted_c.is_finite()),
                                None,
                                Some((side, k.fitted_c)),
                            ));
                        }
                    }
                }
                Ok(out)
            })
            .collect();
        let (mut ft, mut fs) = (0.0f64, 0.0f64);
        for r in per_f {
            for (case, tri, fitted) in r? {
                if let Some((holds, rel)) = tri {
                    all_hold &= holds;
                    worst_margin = worst_margin.min(rel);
                }
                match fitted {
                    Some(("T", c)) => ft = ft.max(c),
                    Some((_, c)) => fs = fs.max(c),
                    None => {}
                }
                rec.cases.push(case);
            }
        }
        fit_t.push((ctx.n, ft));
        fit_s.push((ctx.n, fs));
    }
    rec.assert(Assertion::new(
        "exact-triangle margins",
        all_hold,
        format!("worst relative margin {worst_margin:e} (tolerance -{tol:e})"),
    ));
    fitted_row(&mut rec, "T kernel stage fitted C", &fit_t, cfg);
    fitted_row(&mut rec, "S kernel stage fitted C", &fit_s, cfg);
    Ok(rec)
}

fn theorem_suite(run: &mut Run, suite: Suite) -> Result<SuiteRecord> {
    let cfg = run.cfg;
    let cap = cfg.tolerance.constant_cap;
    let mut rec = SuiteRecord::new(suite);
    for ctx in &run.ctxs {
        ctx.check_compact_support()?;
    }

    // hypotheses on the coarsest grid
    let (triples, points) = run.fixed_families();
    let c0 = &run.ctxs[0];
    let checks = [
        ("w", &c0.w, cfg.p, ClassTag::ApPlus, &triples),
        ("v", &c0.v, cfg.p, ClassTag::Ap, &triples),
        ("mu", &c0.mu, 1.0, ClassTag::A1, &points),
    ];
    for (name, w, p, tag, fam) in checks {
        let c = class_constant(w, p, tag, fam)?.constant;
        if c > cap {
            return Err(Error::HypothesisFailure(format!("{name} has {tag:?} constant {c:.4} above cap {cap}")));
        }
        rec.notes.push(format!("{name}: {tag:?} constant {} on grid {}", fmt(c), c0.n));
    }
    if suite == Suite::Theorem2 {
        let (ct, cs) = c0.pair(cfg.alpha)?.validate(cap)?;
        let eps = run.epsilon_hat()?;
        let bound = 1.0 - 1.0 / (1.0 + eps);
        rec.notes.push(format!(
            "tau^-1 A_1^- constant {}, sigma^-1 A_1 constant {}, epsilon {} so alpha must stay below {}",
            fmt(ct),
            fmt(cs),
            fmt(eps),
            fmt(bound)
        ));
        if cfg.alpha >= bound {
            return Err(Error::HypothesisFailure(format!(
                "alpha = {} is not below 1 - 1/(1 + epsilon) = {bound:.4} (epsilon = {eps})",
                cfg.alpha
            )));
        }
    }

    let kernel = if suite == Suite::Theorem1 { Some(run.kernel()?) } else { None };
    let hs = run.h_grid()?;
    let xs = run.triebel_points();
    let mut table: Vec<Vec<(usize, f64)>> = vec![Vec::new(); run.ctxs[0].family.len()];
    let mut max_ratio = Vec::new();
    for ctx in &run.ctxs {
        let params = NormParams::new(cfg.p, cfg.alpha, Some(ctx.w.clone()), NormSide::Plus)?;
        let t = match &kernel {
            Some(k) => Some(SingularIntegral::new(k, ctx.grid, KernelPolicy::Strict)?),
            None => None,
        };
        let sq = match suite {
            Suite::Theorem2 => Some(SquareFunction::new(run.dyadic(&ctx.grid)?, Extension::ClosedFormOrZero)),
            _ => None,
        };
        match (&t, &sq) {
            (Some(t), _) => rec.notes.push(format!("grid {}: principal-value cutoff {}", ctx.n, fmt(t.epsilon()))),
            (_, Some(s)) => rec.notes.push(format!(
                "grid {}: dyadic range [{}, {}], windows past the domain taken as zero",
                ctx.n, s.range.n_min, s.range.n_max
            )),
            _ => {}
        }
        let out: Vec<Result<CaseRecord>> = ctx
            .family
            .par_iter()
            .map(|(name, f)| {
                let comm = match (&t, &sq) {
                    (Some(t), _) => commutator_t_on_grid(&ctx.b, t, f)?,
                    (_, Some(s)) => commutator_s_on_grid(&ctx.b, f, s)?,
                    _ => unreachable!("one operator per theorem"),
                };
                let num = triebel_norm(&comm, &params, &xs, &hs)?;
                let den = weighted_lp_norm(f, cfg.p, Some(&ctx.v))?;
                Ok(CaseRecord::new(name.clone(), ctx.n, num.value, den, den > 0.0).with_witness(vec![
                    ("band_lo".into(), num.band.0),
                    ("band_hi".into(), num.band.1),
                    ("points".into(), num.points as f64),
                ]))
            })
            .collect();
        let mut best = 0.0f64;
        for (i, c) in out.into_iter().enumerate() {
            let c = c?;
            let ratio = c.ratio.unwrap_or(f64::INFINITY);
            best = best.max(ratio);
            table[i].push((ctx.n, ratio));
            rec.cases.push(c);
        }
        max_ratio.push((ctx.n, best));
    }
    for (i, values) in table.iter().enumerate() {
        let name = &run.ctxs[0].family[i].0;
        rec.refinement.push(RefinementRow::new(format!("ratio {name}"), values, cfg.tolerance.drift_pct));
    }
    fitted_row(&mut rec, "max ratio", &max_ratio, cfg);
    rec.notes.push(format!(
        "Triebel-Lizorkin functional over {} scales in [{}, {}] at points spaced {}",
        hs.len(),
        fmt(hs.h_min()),
        fmt(hs.h_max()),
        fmt(4.0 * run.ctxs[0].grid.dx())
    ));
    Ok(rec)
}
