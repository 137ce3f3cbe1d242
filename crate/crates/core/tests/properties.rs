//! Property tests for the algebraic invariants of the engines.

use proptest::prelude::*;
use rz2_core::*;

fn bit() -> impl Strategy<Value = Bit> {
    prop_oneof![Just(Bit::ZERO), Just(Bit::ONE)]
}

fn endo() -> impl Strategy<Value = Endomorphism> {
    (prop_oneof![Just(0.0), -3.0..3.0f64, (-3i32..=3).prop_map(f64::from)], bit())
        .prop_map(|(re, disc)| Endomorphism::new(re, disc))
}

/// Probability-measure parameters away from the class boundaries.
fn valid_theta() -> impl Strategy<Value = ThetaParams> {
    prop_oneof![
        // 0 < sigma' < sigma with |kappa| safely below the bound
        (0.3..2.0f64, -2.0..2.0f64, 0.1..0.9f64, -2.0..2.0f64, 0.05..0.95f64, bit()).prop_map(
            |(sigma, beta, ratio, beta_p, frac, sign)| {
                let sigma_p = sigma * ratio;
                let bound = kappa_bound(sigma, beta, sigma_p, beta_p).unwrap();
                ThetaParams::new(sigma, beta, sigma_p, beta_p, sign.sign() * frac * bound).unwrap()
            }
        ),
        // equal-parameter branch
        (0.0..2.0f64, -2.0..2.0f64, -1.0..1.0f64)
            .prop_map(|(sigma, beta, kappa)| ThetaParams::new(sigma, beta, sigma, beta, kappa)
                .unwrap()),
        // Gaussian corner
        (0.0..2.0f64, -2.0..2.0f64, bit()).prop_map(|(sigma, beta, k)| {
            ThetaParams::gaussian_on_fiber(sigma, beta, k).unwrap()
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn pairing_has_unit_modulus_and_is_bilinear(
        t1 in -10.0..10.0f64, k1 in bit(),
        t2 in -10.0..10.0f64, k2 in bit(),
        s1 in -10.0..10.0f64, l1 in bit(),
        s2 in -10.0..10.0f64, l2 in bit(),
    ) {
        let x1 = GroupElement::new(t1, k1);
        let x2 = GroupElement::new(t2, k2);
        let y1 = Character::new(s1, l1);
        let y2 = Character::new(s2, l2);
        prop_assert!((pair(x1, y1).norm() - 1.0).abs() < 1e-12);
        prop_assert!((pair(x1 + x2, y1) - pair(x1, y1) * pair(x2, y1)).norm() < 1e-9);
        prop_assert!((pair(x1, y1 + y2) - pair(x1, y1) * pair(x1, y2)).norm() < 1e-9);
    }

    #[test]
    fn endomorphisms_are_self_adjoint(
        a in endo(), t in -5.0..5.0f64, k in bit(), s in -5.0..5.0f64, l in bit(),
    ) {
        let x = GroupElement::new(t, k);
        let y = Character::new(s, l);
        prop_assert!((pair(a.apply(x), y) - pair(x, a.apply_char(y))).norm() < 1e-9);
    }

    #[test]
    fn combine_disc_agrees_with_mod2_subtraction(
        a in endo(), b in endo(), c in endo(), d in endo(),
    ) {
        let combined = endo_combine(a, d, b, c);
        // subtraction mod 2 equals addition mod 2 equals XOR of the products
        let subtracted =
            (a.disc.as_u8() * d.disc.as_u8() + 2 - b.disc.as_u8() * c.disc.as_u8()) % 2;
        prop_assert_eq!(combined.disc.as_u8(), subtracted);
    }

    #[test]
    fn cf_normalization_modulus_and_symmetry(p in valid_theta(), s in -50.0..50.0f64, l in bit()) {
        prop_assert_eq!(p.cf_eval(Character::zero()), num_complex::Complex64::new(1.0, 0.0));
        let y = Character::new(s, l);
        prop_assert!(p.cf_eval(y).norm() <= 1.0 + 1e-12);
        prop_assert!((p.cf_eval(-y) - p.cf_eval(y).conj()).norm() < 1e-12);
    }

    #[test]
    fn valid_parameters_have_nonnegative_densities(p in valid_theta()) {
        let (ok, _) = p.is_probability();
        prop_assert!(ok);
        if p.sigma > 0.0 && p.sigma_p > 0.0 {
            prop_assert!(density_grid_min(&p) >= -1e-9);
        }
    }

    #[test]
    fn inflating_kappa_past_the_bound_turns_a_density_negative(
        sigma in 0.3..2.0f64, beta in -2.0..2.0f64, ratio in 0.1..0.9f64,
        scale in 1.5..2.0f64, sign in bit(),
    ) {
        // common drift keeps the extremal point of the density ratio at beta,
        // so the violation is of visible size
        let sigma_p = sigma * ratio;
        let bound = kappa_bound(sigma, beta, sigma_p, beta).unwrap();
        let inflated = ThetaParams::new(sigma, beta, sigma_p, beta, sign.sign() * scale * bound)
            .unwrap();
        prop_assert!(!inflated.is_probability().0);
        prop_assert!(density_grid_min(&inflated) < -1e-12);
    }

    #[test]
    fn convolution_is_pointwise_product(
        p in valid_theta(), q in valid_theta(), s in -5.0..5.0f64, l in bit(),
    ) {
        let y = Character::new(s, l);
        let gap = (p.convolve(&q).cf_eval(y) - p.cf_eval(y) * q.cf_eval(y)).norm();
        prop_assert!(gap < 1e-12);
    }

    #[test]
    fn reflection_conjugates_and_symmetrization_is_probability(
        p in valid_theta(), s in -5.0..5.0f64, l in bit(),
    ) {
        prop_assert_eq!(p.reflect().reflect(), p);
        let y = Character::new(s, l);
        prop_assert!((p.reflect().cf_eval(y) - p.cf_eval(y).conj()).norm() < 1e-12);
        let sym = p.symmetrize();
        prop_assert_eq!(sym.beta, 0.0);
        prop_assert_eq!(sym.beta_p, 0.0);
        prop_assert!(sym.kappa >= 0.0);
        prop_assert!(sym.is_probability().0);
    }

    #[test]
    fn statement_chain_and_vanishing_cap(
        a in prop::collection::vec(endo(), 1..5),
        seed in any::<u64>(),
    ) {
        use rand::{RngExt, SeedableRng};
        let n = a.len();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<Endomorphism> {
            (0..n)
                .map(|_| {
                    let re = match rng.random_range(0..3u8) {
                        0 => 0.0,
                        1 => rng.random_range(-3..=3i32) as f64,
                        _ => rng.random_range(-2.0..2.0),
                    };
                    Endomorphism::new(re, Bit::new(rng.random_range(0..2u8)))
                })
                .collect()
        };
        let (b, c, d) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
        let report = condition_report(&a, &b, &c, &d);
        for cond in &report.components {
            prop_assert!(!cond.stmt1 || cond.stmt2);
            prop_assert!(!cond.stmt2 || cond.stmt3);
            let weak = strongest_label(*cond, true);
            prop_assert!(weak == ComponentLabel::LambdaX || weak == ComponentLabel::NoGuarantee);
        }
    }

    #[test]
    fn difference_operators_commute(
        h1 in 0.1..2.0f64, h2 in 0.1..2.0f64, s in -3.0..3.0f64,
    ) {
        let f = RealFunction::new(20.0, |x| (0.4 * x).cos() + 0.3 * x * x);
        let a = delta(&delta(&f, h1), h2).eval(s);
        let b = delta(&delta(&f, h2), h1).eval(s);
        prop_assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn cubic_difference_annihilates_fiber_log(
        p in valid_theta(), h in 0.1..2.0f64, s in -5.0..5.0f64,
    ) {
        // symmetrization produces the positive symmetric laws whose fiber-1
        // logarithm the elimination works on
        let q = p.symmetrize();
        prop_assume!(q.kappa > 0.0);
        let psi = |x: f64| q.cf_eval(Character::new(x, Bit::ONE)).re.ln();
        let d3 = psi(s + 3.0 * h) - 3.0 * psi(s + 2.0 * h) + 3.0 * psi(s + h) - psi(s);
        prop_assert!(d3.abs() < 1e-9);
    }
}

/// Minimum of both fiber densities over a dense grid spanning both modes.
fn density_grid_min(q: &ThetaParams) -> f64 {
    let mut min = f64::INFINITY;
    let span = 20.0 * q.sigma.sqrt().max(q.sigma_p.sqrt());
    let center = 0.5 * (q.beta + q.beta_p);
    for i in 0..=4000 {
        let t = center - span + 2.0 * span * i as f64 / 4000.0;
        min = min
            .min(q.fiber_density(Bit::ZERO, t).unwrap())
            .min(q.fiber_density(Bit::ONE, t).unwrap());
    }
    min
}

// Renumbering invariance needs a full problem; run it at a fixed small grid.
proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn renumbering_invariance(
        seed in any::<u64>(),
        swap in 0usize..2,
    ) {
        use rand::{RngExt, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let endos = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<Endomorphism> {
            (0..2)
                .map(|_| Endomorphism::new(rng.random_range(-2..=2i32) as f64,
                                           Bit::new(rng.random_range(0..2u8))))
                .collect()
        };
        let dists = vec![
            ThetaParams::new(1.0, 0.0, 0.5, 0.0, 0.5).unwrap(),
            ThetaParams::new(2.0, 0.3, 1.0, -0.2, 0.2).unwrap(),
        ];
        let (a, b, c, d) = (endos(&mut rng), endos(&mut rng), endos(&mut rng), endos(&mut rng));
        let p = FormsProblem::new(dists.clone(), a.clone(), b.clone(), c.clone(), d.clone())
            .unwrap();
        let perm = |v: &Vec<Endomorphism>| -> Vec<Endomorphism> {
            if swap == 1 { vec![v[1], v[0]] } else { v.clone() }
        };
        let pd = if swap == 1 { vec![dists[1], dists[0]] } else { dists };
        let q = FormsProblem::new(pd, perm(&a), perm(&b), perm(&c), perm(&d)).unwrap();
        let grid = CharacterGrid::new(2.0, 11);
        prop_assert!((p.eq1_residual(&grid) - q.eq1_residual(&grid)).abs() < 1e-13);

        let mut lp: Vec<String> = p.condition_report().components.iter()
            .map(|c| format!("{c:?}")).collect();
        let mut lq: Vec<String> = q.condition_report().components.iter()
            .map(|c| format!("{c:?}")).collect();
        lp.sort();
        lq.sort();
        prop_assert_eq!(lp, lq);
    }
}
