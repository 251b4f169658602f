use proptest::prelude::*;

use onesided::commutators::{aux_maximal, commutator_s, commutator_t, Aux, CommutatorInputs};
use onesided::dsl::{parse_closed_form, parse_function_dsl};
use onesided::grid::{integrate, Grid, HGrid, Interval, SampledFunction};
use onesided::operators::{
    default_kernel, maximal, DyadicRange, Extension, KernelConstants, KernelPolicy, Side, SingularIntegral,
    SquareFunction,
};
use onesided::spaces::{bmo_norm, lip_norm, triebel_functional, IntervalFamily, LipForm};
use onesided::weights::{class_constant, ClassTag, Family, TripleFamily, Weight};

fn grid() -> Grid {
    Grid::new(-4.0, 4.0, 401).unwrap()
}

fn sampled(values: Vec<f64>) -> SampledFunction {
    SampledFunction::new(grid(), values).unwrap()
}

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, 401)
}

fn positive() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.1f64..10.0, 401)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn singular() -> SingularIntegral {
    let k = default_kernel(3).with_constants(KernelConstants { b1: 1.0, b2: 2.55, b3: 25.7 });
    SingularIntegral::new(&k, grid(), KernelPolicy::Strict).unwrap()
}

fn triples() -> Family {
    Family::Triples(TripleFamily::from_subgrid(&grid(), 24).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn integral_is_linear(f in values(), g in values(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let iv = Interval::new(-3.3, 2.7).unwrap();
        let lhs = integrate(&sampled(f.iter().zip(&g).map(|(u, v)| a * u + b * v).collect()), iv).unwrap();
        let rhs = a * integrate(&sampled(f.clone()), iv).unwrap() + b * integrate(&sampled(g), iv).unwrap();
        prop_assert!(close(lhs, rhs, 1e-12));
    }

    #[test]
    fn integral_is_additive(f in values(), m in -3.0f64..3.0) {
        let f = sampled(f);
        let whole = integrate(&f, Interval::new(-3.5, 3.5).unwrap()).unwrap();
        let parts = integrate(&f, Interval::new(-3.5, m).unwrap()).unwrap()
            + integrate(&f, Interval::new(m, 3.5).unwrap()).unwrap();
        prop_assert!(close(whole, parts, 1e-12));
    }

    #[test]
    fn maximal_is_sublinear(f in values(), g in values(), x in -3.0f64..0.0) {
        let hs = HGrid::new(0.04, 2.0, 16).unwrap();
        let (f, g) = (sampled(f), sampled(g));
        let sum = f.zip_with(&g, |u, v| u + v).unwrap();
        for side in [Side::Plus, Side::Minus] {
            let x = if side == Side::Plus { x } else { -x };
            let lhs = maximal(&sum, x, side, &hs).unwrap();
            let rhs = maximal(&f, x, side, &hs).unwrap() + maximal(&g, x, side, &hs).unwrap();
            prop_assert!(lhs <= rhs + 1e-12);
        }
    }

    #[test]
    fn class_constants_are_scale_invariant(w in positive(), c in 0.01f64..100.0) {
        let w = Weight::new(sampled(w)).unwrap();
        let family = triples();
        for tag in [ClassTag::ApPlus, ClassTag::ApMinus, ClassTag::Ap] {
            let a = class_constant(&w, 2.0, tag, &family).unwrap().constant;
            let b = class_constant(&w.scaled(c).unwrap(), 2.0, tag, &family).unwrap().constant;
            prop_assert!(close(a, b, 1e-9));
        }
    }

    #[test]
    fn reflection_swaps_sides(w in positive(), p in 1.2f64..4.0) {
        let w = Weight::new(sampled(w)).unwrap();
        let tf = TripleFamily::from_subgrid(&grid(), 24).unwrap();
        let plus = class_constant(&w, p, ClassTag::ApPlus, &Family::Triples(tf.clone())).unwrap().constant;
        let minus = class_constant(&w.reflect(), p, ClassTag::ApMinus, &Family::Triples(tf.reflect())).unwrap().constant;
        prop_assert!(close(plus, minus, 1e-9));
    }

    #[test]
    fn duality_of_one_sided_classes(w in positive(), p in 1.2f64..4.0) {
        let w = Weight::new(sampled(w)).unwrap();
        let q = p / (p - 1.0);
        let dual = w.powf(1.0 - q).unwrap();
        let family = triples();
        let a = class_constant(&w, p, ClassTag::ApPlus, &family).unwrap().constant;
        let b = class_constant(&dual, q, ClassTag::ApMinus, &family).unwrap().constant;
        prop_assert!(close(a.powf(q - 1.0), b, 1e-8), "{} vs {}", a.powf(q - 1.0), b);
    }

    #[test]
    fn two_sided_class_dominates(w in positive()) {
        let w = Weight::new(sampled(w)).unwrap();
        let family = triples();
        let two = class_constant(&w, 2.0, ClassTag::Ap, &family).unwrap().constant;
        let plus = class_constant(&w, 2.0, ClassTag::ApPlus, &family).unwrap().constant;
        prop_assert!(plus <= two * (1.0 + 1e-12));
    }

    #[test]
    fn class_constants_grow_with_the_family(w in positive()) {
        let w = Weight::new(sampled(w)).unwrap();
        let small = TripleFamily::from_subgrid(&grid(), 9).unwrap();
        let big = small.union(&TripleFamily::from_subgrid(&grid(), 24).unwrap());
        for tag in [ClassTag::ApPlus, ClassTag::Ap] {
            let a = class_constant(&w, 2.0, tag, &Family::Triples(small.clone())).unwrap().constant;
            let b = class_constant(&w, 2.0, tag, &Family::Triples(big.clone())).unwrap().constant;
            prop_assert!(a <= b * (1.0 + 1e-12));
        }
    }

    #[test]
    fn norms_are_homogeneous(f in values(), c in -10.0f64..10.0) {
        let g = grid();
        let family = IntervalFamily::from_subgrid(&g, 17).unwrap();
        let hs = HGrid::new(0.04, 1.0, 12).unwrap();
        let f = sampled(f);
        let cf = f.scaled(c).unwrap();
        prop_assert!(close(bmo_norm(&cf, &family).unwrap(), c.abs() * bmo_norm(&f, &family).unwrap(), 1e-10));
        let form = LipForm::Oscillation(2.0);
        prop_assert!(close(
            lip_norm(&cf, 0.5, form, &family, &hs).unwrap(),
            c.abs() * lip_norm(&f, 0.5, form, &family, &hs).unwrap(),
            1e-10
        ));
        prop_assert!(close(
            triebel_functional(&cf, -1.0, 0.5, Side::Plus, &hs).unwrap(),
            c.abs() * triebel_functional(&f, -1.0, 0.5, Side::Plus, &hs).unwrap(),
            1e-10
        ));
    }

    #[test]
    fn norms_ignore_constants(f in values(), c in -10.0f64..10.0) {
        let family = IntervalFamily::from_subgrid(&grid(), 17).unwrap();
        let f = sampled(f);
        let shifted = f.map(|_, v| v + c).unwrap();
        prop_assert!(close(bmo_norm(&shifted, &family).unwrap(), bmo_norm(&f, &family).unwrap(), 1e-9));
    }

    #[test]
    fn commutator_t_is_bilinear(b in values(), f in values(), g in values(), c in -3.0f64..3.0, x in -3.0f64..2.0) {
        let t = singular();
        let (b, f, g) = (sampled(b), sampled(f), sampled(g));
        let sum = f.zip_with(&g, |u, v| u + v).unwrap();
        let lhs = commutator_t(&b, &t, &sum, x).unwrap();
        let rhs = commutator_t(&b, &t, &f, x).unwrap() + commutator_t(&b, &t, &g, x).unwrap();
        prop_assert!(close(lhs, rhs, 1e-10));
        let shifted = b.map(|_, v| v + c).unwrap();
        prop_assert!(close(commutator_t(&shifted, &t, &f, x).unwrap(), commutator_t(&b, &t, &f, x).unwrap(), 1e-10));
    }

    #[test]
    fn commutators_vanish_on_constant_symbols(f in values(), c in -5.0f64..5.0, x in -3.5f64..3.5) {
        let t = singular();
        let f = sampled(f);
        let b = SampledFunction::constant(grid(), c).unwrap();
        let sq = SquareFunction::new(DyadicRange::new(-6, 3).unwrap(), Extension::ClosedFormOrZero);
        prop_assert_eq!(commutator_t(&b, &t, &f, x).unwrap(), 0.0);
        prop_assert_eq!(commutator_s(&b, &f, x, &sq).unwrap(), 0.0);
    }

    #[test]
    fn commutator_s_ignores_constant_shifts(b in values(), f in values(), c in -3.0f64..3.0, x in -3.5f64..0.0) {
        let sq = SquareFunction::new(DyadicRange::new(-6, 2).unwrap(), Extension::ClosedFormOrZero);
        let (b, f) = (sampled(b), sampled(f));
        let shifted = b.map(|_, v| v + c).unwrap();
        prop_assert!(close(commutator_s(&shifted, &f, x, &sq).unwrap(), commutator_s(&b, &f, x, &sq).unwrap(), 1e-10));
    }

    #[test]
    fn aux_m3_is_sublinear(b in values(), f in values(), g in values(), x in -3.5f64..-1.0) {
        let hs = HGrid::new(0.05, 0.5, 8).unwrap();
        let (b, f, g) = (sampled(b), sampled(f), sampled(g));
        let sum = f.zip_with(&g, |u, v| u + v).unwrap();
        let m3 = |f: &SampledFunction| {
            aux_maximal(Aux::M3, &CommutatorInputs::new(b.clone(), f.clone(), 0.5).unwrap(), x, &hs, &[]).unwrap().value
        };
        prop_assert!(m3(&sum) <= m3(&f) + m3(&g) + 1e-12);
    }

    #[test]
    fn dsl_is_deterministic(seed in any::<u64>(), k in 1usize..64) {
        let s = format!("random({k}) * bump(0, 3)");
        let a = parse_function_dsl(&s, &grid(), seed).unwrap();
        let b = parse_function_dsl(&s, &grid(), seed).unwrap();
        prop_assert_eq!(a.values(), b.values());
        prop_assert_eq!(parse_closed_form(&s, &grid(), seed).unwrap(), parse_closed_form(&s, &grid(), seed).unwrap());
    }
}
