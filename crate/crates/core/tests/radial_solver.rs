use meanfield::radial::*;
use meanfield::masses::compute_masses;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn liouville(r: f64) -> (f64, f64) {
    (8f64.ln() - 2.0 * (1.0 + r * r).ln(), -4.0 * r / (1.0 + r * r))
}

fn oracle() -> RadialProfile {
    integrate(&ShootingConfig::single_exponential(8f64.ln())).unwrap()
}

#[test]
fn liouville_values_at_one_and_two() {
    let prof = oracle();
    let (v, d) = prof.eval(1.0).unwrap();
    assert!((v - 2f64.ln()).abs() < 1e-8);
    assert!((d + 2.0).abs() < 1e-8);
    let (v, _) = prof.eval(2.0).unwrap();
    assert!((v - (8f64.ln() - 2.0 * 5f64.ln())).abs() < 1e-8);
}

#[test]
fn liouville_max_error_on_zero_to_fifty() {
    let prof = oracle();
    let worst = (0..=5000)
        .map(|i| {
            let r = 50.0 * i as f64 / 5000.0;
            (prof.eval(r).unwrap().0 - liouville(r).0).abs()
        })
        .fold(0.0, f64::max);
    assert!(worst <= 1e-8, "{worst}");
}

#[test]
fn liouville_beta_is_four() {
    let b = estimate_beta(&oracle()).unwrap();
    assert!((b - 4.0).abs() < 1e-8, "{b}");
}

#[test]
fn initial_condition_at_origin() {
    for alpha in [-10.0, 0.0, 7.5] {
        let prof = integrate(&ShootingConfig::new(alpha, 0.5)).unwrap();
        assert_eq!(prof.eval(0.0).unwrap(), (alpha, 0.0));
        let first = prof.nodes()[0];
        assert!((first.1 - alpha).abs() < 1e-10);
        assert!(first.2.abs() < 1e-5);
    }
}

#[test]
fn two_term_profile_decreasing_with_beta_above_two_over_gamma() {
    let prof = integrate(&ShootingConfig::new(0.0, 0.5)).unwrap();
    let nodes = prof.nodes();
    assert!(nodes.windows(2).all(|w| w[1].1 < w[0].1));
    assert!(nodes.iter().skip(1).all(|n| n.2 < 0.0));
    let b = estimate_beta(&prof).unwrap();
    assert!(b > 4.0, "{b}");
    let m = compute_masses(&prof).unwrap();
    let rel = (2.0 * std::f64::consts::PI * b - (m.m1 + m.m_gamma)).abs() / m.total;
    assert!(rel < 1e-6, "{rel}");
}

#[test]
fn eval_reproduces_nodes() {
    let prof = integrate(&ShootingConfig::new(3.0, 0.7)).unwrap();
    for &(r, v, d) in prof.nodes().iter().step_by(37) {
        let (ev, ed) = prof.eval(r).unwrap();
        assert!((ev - v).abs() <= 1e-14 * v.abs().max(1.0));
        assert!((ed - d).abs() <= 1e-12 * d.abs().max(1.0));
    }
}

#[test]
fn flux_nondecreasing() {
    for gamma in [0.3, 0.5, 0.7] {
        let prof = integrate(&ShootingConfig::new(2.0, gamma)).unwrap();
        let flux: Vec<f64> = prof.nodes().iter().map(|n| -n.0 * n.2).collect();
        assert!(flux.windows(2).all(|w| w[1] >= w[0] - 1e-12 * w[0].abs()));
    }
}

#[test]
fn ode_residual_at_random_radii() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (alpha, gamma) in [(0.0, 0.5), (-15.0, 0.3), (12.0, 0.7)] {
        let cfg = ShootingConfig::new(alpha, gamma);
        let prof = integrate(&cfg).unwrap();
        let (r0, r1) = (prof.seed_radius().ln(), prof.r_end().ln());
        let mut tested = 0;
        while tested < 200 {
            let r = rng.gen_range(r0..r1).exp();
            let (eta, _) = prof.eval(r).unwrap();
            let src = prof.source_at(eta);
            if r * r * src < 1e-3 {
                continue;
            }
            let res = prof.ode_residual(r).unwrap();
            // `ode_residual` is already relative to the source term.
            assert!(res <= 10.0 * cfg.rel_tol, "alpha {alpha} gamma {gamma} r {r}: {res}");
            tested += 1;
        }
    }
}

#[test]
fn rejects_invalid_configs() {
    assert!(integrate(&ShootingConfig::new(0.0, 1.0)).is_err());
    assert!(integrate(&ShootingConfig::with_weights(0.0, 0.5, 0.0, 0.0)).is_err());
    assert!(integrate(&ShootingConfig::new(0.0, 0.5).with_r_max(0.5)).is_err());
}

#[test]
fn profile_table_round_trip() {
    let prof = integrate(&ShootingConfig::new(1.5, 0.4)).unwrap();
    let text = prof.to_table().render();
    let parsed = ProfileTable::parse(&text).unwrap();
    assert_eq!(parsed.config, *prof.config());
    assert_eq!(parsed.beta, prof.beta().value);
    assert_eq!(parsed.nodes, prof.nodes());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn center_values_ordered(gamma in 0.2f64..0.9, a1 in -20.0f64..20.0, gap in 0.1f64..5.0) {
        let family = ShootingFamily::new(gamma);
        let p1 = family.profile(a1).unwrap();
        let p2 = family.profile(a1 + gap).unwrap();
        prop_assert!(p1.nodes()[0].1 < p2.nodes()[0].1);
    }

    #[test]
    fn beta_exceeds_two_over_gamma(gamma in 0.2f64..0.9, alpha in -20.0f64..20.0) {
        let prof = integrate(&ShootingConfig::new(alpha, gamma)).unwrap();
        prop_assert!(estimate_beta(&prof).unwrap() > 2.0 / gamma);
    }
}
