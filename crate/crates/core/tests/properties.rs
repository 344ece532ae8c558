use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use levy_domains::classify::suites::random_triplet;
use levy_domains::classify::{classify_with, sign_set_mask, ClassifyOptions, DriftIntegrand, Status};
use levy_domains::integrand::{IntegrandFn, MaskSet, Piece, PiecewiseTable, Side};
use levy_domains::measure::{FiniteAtomic, LevyMeasure, RadialKernel};
use levy_domains::simulate::{integrate_path, sample_path_indexed};
use levy_domains::triplet::{
    cumulant, integral_process_triplet, mean, phi, phi_cumulant, phi_tilde, scale_triplet, Triplet,
};

fn atom() -> impl Strategy<Value = (f64, f64)> {
    (0.05f64..20.0, any::<bool>(), 0.05f64..3.0).prop_map(|(r, neg, m)| (if neg { -r } else { r }, m))
}

fn scalar_triplet() -> impl Strategy<Value = Triplet> {
    (prop::collection::vec(atom(), 1..4), prop::option::of(0.01f64..2.0), -2.0f64..2.0).prop_map(|(atoms, a, g)| {
        let nu = LevyMeasure::FiniteAtomic(FiniteAtomic::scalar(&atoms).unwrap());
        Triplet::new(vec![vec![a.unwrap_or(0.0)]], nu, vec![g]).unwrap()
    })
}

fn planar_triplet() -> impl Strategy<Value = Triplet> {
    let atom2 = ((-10.0f64..10.0, -10.0f64..10.0), 0.05f64..3.0)
        .prop_filter("nonzero atom", |((x, y), _)| x.hypot(*y) > 1e-3)
        .prop_map(|((x, y), m)| (vec![x, y], m));
    (prop::collection::vec(atom2, 1..4), (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), (-2.0f64..2.0, -2.0f64..2.0)).prop_map(
        |(atoms, (l11, l21, l22), (g1, g2))| {
            let a = vec![vec![l11 * l11, l11 * l21], vec![l11 * l21, l21 * l21 + l22 * l22]];
            Triplet::new(a, LevyMeasure::FiniteAtomic(FiniteAtomic::new(2, atoms).unwrap()), vec![g1, g2]).unwrap()
        },
    )
}

/// The same measure with the location making the mean zero.
fn centred(mu: &Triplet) -> Triplet {
    let c = mu.nu.integral_vector(&RadialKernel::mean_correction()).unwrap();
    Triplet::new(mu.a.clone(), mu.nu.clone(), c.into_iter().map(|x| -x).collect()).unwrap()
}

fn builtin() -> impl Strategy<Value = IntegrandFn> {
    prop_oneof![
        Just(IntegrandFn::inv_s()),
        Just(IntegrandFn::alternating_inv_s()),
        (0.3f64..3.0).prop_map(|a| IntegrandFn::power_decay(a).unwrap()),
        (0.2f64..3.0, 0.3f64..2.5).prop_map(|(c, a)| IntegrandFn::exp_decay(c, a).unwrap()),
        (0.1f64..3.0).prop_map(|c| IntegrandFn::constant(c)),
    ]
    .prop_flat_map(|f| (Just(f), -2.0f64..2.0))
    .prop_map(|(f, k)| f.scaled(k))
}

fn table() -> impl Strategy<Value = IntegrandFn> {
    (prop::collection::vec(0.0f64..10.0, 1..4), prop::collection::vec((-3.0f64..3.0, -1.0f64..1.0), 5)).prop_map(|(mut cuts, coeffs)| {
        cuts.extend([0.0, 10.0]);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
        let pieces = cuts.windows(2).zip(coeffs).map(|(w, (c0, c1))| Piece { l: w[0], r: w[1], coeffs: vec![c0, c1] }).collect();
        IntegrandFn::table(PiecewiseTable::new(pieces).unwrap())
    })
}

fn mask() -> impl Strategy<Value = MaskSet> {
    prop::collection::vec((0.0f64..200.0, 0.1f64..50.0), 1..4)
        .prop_map(|v| MaskSet::from_intervals(v.into_iter().map(|(l, w)| (l, l + w)).collect()).unwrap())
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cumulant_shape(mu in planar_triplet(), z in (-5.0f64..5.0, -5.0f64..5.0)) {
        let z = [z.0, z.1];
        let c = cumulant(&mu, &z).unwrap().value;
        prop_assert!(c.re <= 1e-12 * (1.0 + c.norm()), "{c}");
        prop_assert_eq!(cumulant(&mu, &[0.0, 0.0]).unwrap().value.norm(), 0.0);
        let m = cumulant(&mu, &[-z[0], -z[1]]).unwrap().value;
        prop_assert!((m - c.conj()).norm() <= 1e-12 * (1.0 + c.norm()), "{m} vs {c}");
    }

    #[test]
    fn scaling_composes(mu in planar_triplet(), u in -4.0f64..4.0, v in -4.0f64..4.0) {
        prop_assume!(u.abs() > 1e-3 && v.abs() > 1e-3);
        let two = scale_triplet(&scale_triplet(&mu, u).unwrap().into_triplet(), v).unwrap();
        let one = scale_triplet(&mu, u * v).unwrap();
        for (r1, r2) in one.a_u.iter().zip(&two.a_u) {
            for (x, y) in r1.iter().zip(r2) {
                prop_assert!(close(*x, *y, 1e-10), "A {x} vs {y}");
            }
        }
        for (x, y) in one.gamma_u.iter().zip(&two.gamma_u) {
            prop_assert!(close(*x, *y, 1e-10), "γ {x} vs {y}");
        }
        for k in [RadialKernel::truncated_second(1.0), RadialKernel::truncated_second(0.3), RadialKernel::constant(1.0)] {
            let (x, y) = (one.nu_u.integral_scalar(&k).unwrap(), two.nu_u.integral_scalar(&k).unwrap());
            prop_assert!(close(x, y, 1e-10), "ν {x} vs {y}");
        }
    }

    #[test]
    fn alternating_modulus(s in 1.0f64..1e6) {
        prop_assert_eq!(IntegrandFn::alternating_inv_s().eval(s).abs(), IntegrandFn::inv_s().eval(s));
    }

    #[test]
    fn masking_only_shrinks(f in builtin(), d in mask()) {
        let g = f.apply_mask(&d).unwrap();
        prop_assert!(f.dominates(&g, 0.0, 1e4, 64));
        prop_assert!(f.dominates(&f, 0.0, 1e4, 64));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn phi_tilde_brackets_phi(mu in scalar_triplet(), u in -5.0f64..5.0) {
        let (p, q) = (phi(&mu, u).unwrap(), phi_tilde(&mu, u).unwrap());
        prop_assert!(p <= q * (1.0 + 1e-12) + 1e-15, "{p} > {q}");
        prop_assert!(q <= 1.5 * p * (1.0 + 1e-12) + 1e-15, "{q} > 1.5·{p}");
    }

    #[test]
    fn domination_is_transitive(f in builtin(), g in builtin(), h in builtin()) {
        let (fg, gh) = (f.dominates(&g, 0.0, 1e4, 16), g.dominates(&h, 0.0, 1e4, 16));
        if fg && gh {
            prop_assert!(f.dominates(&h, 0.0, 1e4, 16), "{f} ≥ {g} ≥ {h}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn phi_tilde_monotone(mu in scalar_triplet()) {
        let mut prev = 0.0;
        for i in 1..=60 {
            let u = 0.1 * i as f64;
            let (a, b) = (phi_tilde(&mu, u).unwrap(), phi_tilde(&mu, -u).unwrap());
            prop_assert!(a >= prev * (1.0 - 1e-12) && b >= prev * (1.0 - 1e-12), "u = {u}: {a}, {b} < {prev}");
            prev = a.min(b);
        }
    }

    #[test]
    fn integral_process_keeps_mean_zero(mu in scalar_triplet(), f in prop_oneof![builtin(), table()], t in 1.0f64..50.0) {
        let mu = centred(&mu);
        let y = integral_process_triplet(&mu, &f, t).unwrap();
        let m = mean(&y).unwrap().expect("finite mean");
        prop_assert!(m[0].abs() <= 1e-8, "mean {} for {f}", m[0]);
    }

    #[test]
    fn integral_process_cumulant(mu in scalar_triplet(), f in prop_oneof![builtin(), table()], t in 1.0f64..30.0, z in -3.0f64..3.0) {
        let y = integral_process_triplet(&mu, &f, t).unwrap();
        let c = cumulant(&y, &[z]).unwrap().value;
        let p = phi_cumulant(&mu, &f, &[z], t).unwrap();
        prop_assert!((c - p).norm() <= 1e-6 * (1.0 + p.norm()), "{c} vs {p} for {f}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn verdicts_respect_the_chain(seed in any::<u64>(), f in builtin()) {
        let mu = random_triplet(&mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let v = classify_with(&mu, &f, ClassifyOptions::light());
        let chain = [v.d0, v.d, v.dc, v.de];
        for w in chain.windows(2) {
            prop_assert!(!(w[0] == Status::Member && w[1] == Status::NonMember), "{chain:?} for {f}");
        }
    }

    #[test]
    fn zero_set_has_no_drift(mu in scalar_triplet(), k in 0.2f64..3.0) {
        let f = IntegrandFn::inv_s().scaled(k);
        let zero = f.apply_mask(&sign_set_mask(&mu, &f, 0, Side::Zero)).unwrap();
        let cps = [10.0, 100.0, 1000.0];
        for g in DriftIntegrand::new(&mu, &zero).partials(&cps).unwrap() {
            prop_assert!(g[0].abs() <= 1e-12, "{}", g[0]);
        }
    }

    #[test]
    fn sign_sets_decompose_paths(mu in scalar_triplet(), seed in any::<u64>(), index in 0u64..1000) {
        let f = IntegrandFn::inv_s();
        let masks: Vec<MaskSet> = [Side::Plus, Side::Minus, Side::Zero].into_iter().map(|s| sign_set_mask(&mu, &f, 0, s)).collect();
        let path = sample_path_indexed(&mu, 200.0, seed, index).unwrap();
        let y = integrate_path(&f, &path, &[5.0, 50.0, 200.0], &masks).unwrap();
        prop_assert!(y.decomposition_error() <= 1e-9, "{}", y.decomposition_error());
        let again = integrate_path(&f, &sample_path_indexed(&mu, 200.0, seed, index).unwrap(), &[5.0, 50.0, 200.0], &masks).unwrap();
        prop_assert_eq!(y, again);
    }
}
