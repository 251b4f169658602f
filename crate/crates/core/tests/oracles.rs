use approx::assert_relative_eq;

use onesided::commutators::{
    aux_maximal, check_h_regularity, commutator_s, Aux, CommutatorInputs, TDecomposition, SDecomposition,
};
use onesided::dsl::parse_function_dsl;
use onesided::grid::{Grid, HGrid, SampledFunction};
use onesided::operators::{
    default_kernel, square_plus, vector_kernel_h, DyadicRange, Extension, KernelConstants, KernelPolicy,
    SingularIntegral, SquareFunction,
};
use onesided::verify::{emit_report, run_suite, ExperimentConfig, ReportFormat, Suite, VerificationReport};

fn grid(n: usize) -> Grid {
    Grid::new(-8.0, 8.0, n).unwrap()
}

fn dsl(s: &str, g: &Grid) -> SampledFunction {
    parse_function_dsl(s, g, 0).unwrap()
}

fn validated(levels: u32) -> onesided::operators::KernelSpec {
    default_kernel(levels).with_constants(KernelConstants { b1: 1.0, b2: 2.55, b3: 25.7 })
}

fn midpoint(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    (0..m).map(|i| f(a + h * (i as f64 + 0.5))).sum::<f64>() * h
}

#[test]
fn singular_far_from_support_matches_direct_quadrature() {
    let k = validated(3);
    let x = -5.0;
    let g = grid(4001);
    let t = SingularIntegral::new(&k, g, KernelPolicy::Strict).unwrap();
    let f = dsl("bump(0.5, 0.5)", &g);
    let form = f.closed_form().unwrap().clone();
    let oracle = midpoint(|y| k.eval(x - y) * form.eval(y), 0.0, 1.0, 200_000);
    assert_relative_eq!(t.at(&f, x).unwrap(), oracle, max_relative = 1e-6);
}

#[test]
fn singular_of_an_indicator_converges_at_first_order() {
    // the nodal interpolant of χ_[0,1] carries a ramp of width Δx at each end
    let k = validated(3);
    let x = -5.0;
    let oracle = midpoint(|y| k.eval(x - y), 0.0, 1.0, 200_000);
    let kmax = (0..=1000).map(|i| k.eval(x - i as f64 / 1000.0).abs()).fold(0.0, f64::max);
    let mut errors = Vec::new();
    for n in [2001, 4001] {
        let g = grid(n);
        let t = SingularIntegral::new(&k, g, KernelPolicy::Strict).unwrap();
        let e = (t.at(&dsl("indicator(0, 1)", &g), x).unwrap() - oracle).abs();
        assert!(e <= g.dx() * kmax, "n = {n}: {e}");
        errors.push(e);
    }
    assert_relative_eq!(errors[0] / errors[1], 2.0, max_relative = 0.05);
}

/// `∫_0^u (1 - √y) dy`.
fn primitive(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u - 2.0 / 3.0 * u.powf(1.5)
}

#[test]
fn commutator_s_matches_closed_form() {
    // b = |x|^{1/2}, f = χ_[0,1], x = -1, so b(x) - b(y) = 1 - √y
    let range = DyadicRange::new(-12, 12).unwrap();
    let x = -1.0f64;
    let component = |n: i32| {
        let s = 2f64.powi(n);
        primitive(x + s) / s - 2.0 * primitive(x + s / 2.0) / s
    };
    let exact = range.indices().map(|n| component(n).powi(2)).sum::<f64>().sqrt();
    let mut errors = Vec::new();
    for n in [2001, 4001] {
        let g = grid(n);
        let sq = SquareFunction::new(range, Extension::ClosedFormOrZero);
        let v = commutator_s(&dsl("power(0.5)", &g), &dsl("indicator(0, 1)", &g), x, &sq).unwrap();
        errors.push((v - exact).abs() / exact);
    }
    // χ_[0,1] is resolved to first order
    assert!(errors[1] < 5e-3, "{errors:?}");
    assert_relative_eq!(errors[0] / errors[1], 2.0, max_relative = 0.1);
}

#[test]
fn square_function_is_the_norm_of_the_vector_kernel() {
    let g = grid(2001);
    let range = DyadicRange::new(-8, 3).unwrap();
    let f = dsl("bump(0.5, 1)", &g);
    let x = -0.75;
    let form = f.closed_form().unwrap().clone();
    let m = 400_000;
    let mut sums = vec![0.0; range.len()];
    let (a, b) = (x, x + 2f64.powi(3));
    let h = (b - a) / m as f64;
    for i in 0..m {
        let y = a + h * (i as f64 + 0.5);
        let fy = form.eval(y);
        for (s, hn) in sums.iter_mut().zip(vector_kernel_h(x - y, range)) {
            *s += hn * fy * h;
        }
    }
    let oracle = sums.iter().map(|s| s * s).sum::<f64>().sqrt();
    assert_relative_eq!(square_plus(&f, x, range).unwrap(), oracle, max_relative = 1e-4);
}

#[test]
fn h_regularity_matches_brute_force() {
    let range = DyadicRange::new(-12, 12).unwrap();
    let (j, k, x) = (0, 3, -2.0);
    let y = x + 1.0;
    let r_prime = 3.0;
    let res = check_h_regularity(j, k, r_prime, x, &[y], range).unwrap();
    let norm = |t: f64| {
        let hy = vector_kernel_h(y - t, range);
        let hx = vector_kernel_h(x - t, range);
        hy.iter().zip(hx).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
    };
    let integral = midpoint(|t| norm(t).powf(r_prime), x + 8.0, x + 16.0, 400_000);
    assert_relative_eq!(res.lhs, integral.powf(1.0 / r_prime), max_relative = 1e-5);
    assert_relative_eq!(res.rhs, 1.0 / 8.0, max_relative = 1e-15);
}

#[test]
fn m3_of_square_root_is_scale_free() {
    // each h-term equals (1/h^{3/2}) ∫_0^{2h} (b_{[0,8h]} - √y) dy = 4√2/3
    let g = grid(4001);
    let inp = CommutatorInputs::new(dsl("power(0.5)", &g), SampledFunction::constant(g, 1.0).unwrap(), 0.5).unwrap();
    let hs = HGrid::new(0.5, 1.0, 5).unwrap();
    let v = aux_maximal(Aux::M3, &inp, 0.0, &hs, &[]).unwrap();
    assert_relative_eq!(v.value, 4.0 * 2f64.sqrt() / 3.0, max_relative = 1e-3);
    assert_eq!(v.skipped, 0);
}

#[test]
fn decompositions_vanish_for_constant_symbols() {
    let g = grid(1025);
    let t = SingularIntegral::new(&validated(3), g, KernelPolicy::Strict).unwrap();
    let inp = CommutatorInputs::new(SampledFunction::constant(g, 3.0).unwrap(), dsl("bump(0, 1)", &g), 0.5)
        .unwrap()
        .with_singular(t)
        .unwrap()
        .with_square(DyadicRange::new(-12, 12).unwrap());
    let td = TDecomposition::new(&inp).unwrap();
    let sd = SDecomposition::new(&inp).unwrap();
    for x in [-2.0, -1.0, 0.0] {
        for h in [0.125, 0.25, 0.5] {
            let c = td.check(x, h).unwrap();
            assert!(c.triangle.lhs.abs() < 1e-10 && c.triangle.margin >= -1e-10, "{c:?}");
            let c = sd.check(x, h).unwrap();
            assert!(c.triangle.lhs.abs() < 1e-10 && c.triangle.margin >= -1e-10, "{c:?}");
        }
    }
}

#[test]
fn weights_suite_recovers_the_a2_constant_of_one() {
    let mut cfg = ExperimentConfig::demo();
    cfg.suites = vec![Suite::Weights];
    let report = run_suite(&cfg).unwrap();
    let rec = report.suite(Suite::Weights).unwrap();
    let cases: Vec<_> = rec.cases.iter().filter(|c| c.case == "w in A_p^+").collect();
    assert_eq!(cases.len(), cfg.grid_sizes.len());
    for c in cases {
        let v = c.lhs.unwrap();
        assert!((v - 0.25).abs() <= 0.02 * 0.25, "{v}");
    }
    assert!(rec.pass);
}

#[test]
fn reports_are_stable_and_convertible() {
    let mut cfg = ExperimentConfig::demo();
    cfg.suites = vec![Suite::Weights, Suite::Decompositions];
    let report = run_suite(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    emit_report(&report, ReportFormat::Json, &a).unwrap();
    emit_report(&run_suite(&cfg).unwrap(), ReportFormat::Json, &b).unwrap();
    let (ja, jb) = (std::fs::read_to_string(&a).unwrap(), std::fs::read_to_string(&b).unwrap());
    assert_eq!(ja, jb);

    let back = VerificationReport::from_json(&ja).unwrap();
    assert_eq!(back.case_count(), report.case_count());
    let csv = back.to_csv().unwrap();
    assert_eq!(csv.lines().count(), report.case_count() + 1);
    assert!(csv.starts_with("suite,case,grid_n,lhs,rhs,ratio,pass"));
}
