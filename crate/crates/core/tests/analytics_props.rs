use dyson_core::analytics::{b_coefficient, b_maximizer, b_uniform_bound, g_bracket_crossing, m_alpha};
use dyson_core::series::{hurwitz_zeta, zeta};
use dyson_core::{
    alternating_remainder, b_max, b_observable, boundary_field, boundary_tail_bound, boundary_tail_exact, f_alpha,
    field_profile, g_coefficient, BoundaryCondition, CouplingModel, FieldProfileSpec, Spin, SpinConfig, Volume,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn f_alpha_peaks_at_zero() {
    for alpha in [1.42, 1.5, 1.7, 1.9] {
        let top = f_alpha(0.0, alpha).unwrap().value;
        for k in 0..=10_000 {
            let theta = -1.0 + 2.0 * k as f64 / 10_000.0;
            assert!(f_alpha(theta, alpha).unwrap().value <= top + 1e-15);
        }
        assert_eq!(m_alpha(alpha, 0.25).unwrap(), f_alpha(0.25, alpha).unwrap().value);
    }
}

#[test]
fn alternating_remainder_bound() {
    for alpha in [1.2, 1.5, 1.9] {
        for n in 1..=10_000u64 {
            let r = alternating_remainder(n, alpha);
            assert!(r.abs() <= ((n + 1) as f64).powf(-alpha), "n={n} alpha={alpha}");
        }
    }
    // R_3 = -4^-a + 5^-a - ...
    let direct: f64 = (4..200_000u64).map(|k| if k % 2 == 0 { -1.0 } else { 1.0 } * (k as f64).powf(-1.5)).sum();
    assert!((alternating_remainder(3, 1.5) - direct).abs() < 1e-6);
}

#[test]
fn b_coefficients_match_double_sum() {
    let alpha = 1.5;
    for l1 in [1u64, 2, 3, 6] {
        for j in [-40i64, -9, -(l1 as i64) - 1, 0, 1, 7, 30] {
            let direct: f64 = (-(l1 as i64)..0)
                .map(|i| if i.rem_euclid(2) == 0 { 1.0 } else { -1.0 } * ((i - j).unsigned_abs() as f64).powf(-alpha))
                .sum();
            assert!((b_coefficient(j, l1, alpha) - direct).abs() < 1e-12, "l1={l1} j={j}");
        }
    }
}

#[test]
fn maximizer_beats_random_exteriors() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let alpha = 1.5;
    for l1 in [3u64, 4] {
        let best = b_observable(&b_maximizer(l1, 200).unwrap(), l1, alpha).unwrap();
        let v = Volume::new(-(l1 as i64) - 200, 199).unwrap();
        for _ in 0..1000 {
            let c = SpinConfig::new(v, v.sites().map(|_| if rng.random() { Spin::Up } else { Spin::Down }).collect())
                .unwrap();
            assert!(b_observable(&c, l1, alpha).unwrap().abs() <= best);
        }
        let closed = b_max(l1, alpha).unwrap();
        assert!((closed.value - best).abs() < 2.0 * hurwitz_zeta(alpha, 150.0));
    }
}

#[test]
fn b_max_uniformly_bounded() {
    for alpha in [1.3, 1.5, 1.9] {
        let c = b_uniform_bound(alpha);
        for l1 in 1..=256 {
            let b = b_max(l1, alpha).unwrap();
            assert!(b.value <= c && b.report.satisfied);
            assert!((b.value - b.limit).abs() <= b.tail_allowance);
        }
    }
}

#[test]
fn all_plus_profile_matches_lattice_field() {
    for alpha in [1.3, 1.5, 1.8] {
        let (l, n_ann, n) = (3u64, 10u64, 40u64);
        let spec = FieldProfileSpec::new(l, n_ann, n, 1, alpha)
            .unwrap()
            .with_inner(vec![1; l as usize])
            .unwrap()
            .with_far(vec![1; (n - n_ann) as usize])
            .unwrap();
        let h = field_profile(&spec, 0).unwrap();
        let model = CouplingModel::power_law(alpha, 1.0).unwrap();
        let bc = BoundaryCondition::plus(1_000_000_000).unwrap().with_tail_correction(true);
        let g = boundary_field(0, &Volume::new(0, n as i64).unwrap(), &bc, &model).unwrap();
        assert!((h - g).abs() < 1e-10, "alpha {alpha}: {h} vs {g}");
        assert!((h - zeta(alpha) - hurwitz_zeta(alpha, (n + 1) as f64)).abs() < 1e-12);
    }
}

#[test]
fn tail_bound_examples() {
    for (l, n, a) in [(4u64, 64u64, 1.5), (8, 256, 1.3), (16, 1024, 1.9)] {
        let direct: f64 = (0..=2 * l)
            .map(|i| (n + 1 + i..n + 1 + i + 2_000_000).map(|d| (d as f64).powf(-a)).sum::<f64>()
                + ((n + i + 2_000_001) as f64).powf(1.0 - a) / (a - 1.0))
            .sum();
        assert!((boundary_tail_exact(l, n, a) - direct).abs() < 1e-6 * direct);
        assert!(direct <= boundary_tail_bound(l, n, a));
        assert!((boundary_tail_bound(2 * l, n, a) - 2.0 * boundary_tail_bound(l, n, a)).abs() < 1e-12);
    }
}

#[test]
fn g_bracket_changes_sign_at_reported_crossing() {
    let (alpha, eps, c1) = (1.5, 0.8, 1.0);
    let beta = g_bracket_crossing(alpha, eps, c1).unwrap().expect("crossing exists for eps > 1/2");
    let before = g_coefficient(alpha, beta * 0.9, eps, 1.0, c1).unwrap().bracket;
    let after = g_coefficient(alpha, beta * 1.1, eps, 1.0, c1).unwrap().bracket;
    assert!(before * after < 0.0);
    assert!(g_bracket_crossing(alpha, 0.5, c1).unwrap().is_none());
}
