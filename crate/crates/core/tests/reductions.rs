use std::f64::consts::PI;

use meanfield::params::{beta_boundary, critical_lambda, SpeciesParams, EIGHT_PI};
use meanfield::radial::{integrate, ShootingConfig, ShootingFamily};
use meanfield::reductions::*;
use meanfield::samples::{log_grid, RadialSamples};

fn p(tau: f64, gamma: f64) -> SpeciesParams {
    SpeciesParams::new(tau, gamma).unwrap()
}

fn point(params: SpeciesParams, alpha: f64) -> LambdaCurvePoint {
    lambda_point(&ShootingFamily::new(params.gamma()), params, alpha).unwrap()
}

#[test]
fn sigma_vanishes_at_boundary_constant() {
    let params = p(0.5, 0.5);
    let beta = beta_boundary(params).unwrap();
    let pt = point(params, beta + 1e-9);
    assert!(pt.sigma < 1e-3, "{}", pt.sigma);
    assert!(pt.lambda_value < 1e-3);
    assert!(lambda_point(&ShootingFamily::new(0.5), params, beta - 0.1).is_err());
}

#[test]
fn liouville_level_ln2_at_unit_radius() {
    let prof = integrate(&ShootingConfig::single_exponential(8f64.ln())).unwrap();
    let r = prof.radius_at_level(2f64.ln()).unwrap();
    assert!((r - 1.0).abs() < 1e-9, "{r}");
}

#[test]
fn sigma_decreases_in_tau() {
    for alpha in [2.0, 10.0] {
        assert!(point(p(0.2, 0.5), alpha).sigma > point(p(0.4, 0.5), alpha).sigma);
    }
}

#[test]
fn lambda_tends_to_eight_pi() {
    let pt = point(p(0.5, 0.5), 30.0);
    assert!((pt.lambda_value - EIGHT_PI).abs() < 0.5, "{}", pt.lambda_value);
}

#[test]
fn supercritical_for_small_tau() {
    let params = p(1e-3, 0.5);
    let curve = lambda_curve(params, &default_alpha_grid(params).unwrap()).unwrap();
    let sup = curve.sup().unwrap();
    assert!(sup.lambda_value >= 9.0 * PI, "{}", sup.lambda_value / PI);
}

#[test]
fn lambda_pointwise_decreasing_in_tau() {
    // Common domain: alpha above the larger boundary constant.
    for alpha in [2.0, 5.0, 10.0] {
        let l1 = point(p(0.2, 0.5), alpha).lambda_value;
        let l2 = point(p(0.4, 0.5), alpha).lambda_value;
        assert!(l1 > l2 && l2 > 0.0, "alpha {alpha}: {l1} {l2}");
    }
}

#[test]
fn stochastic_record_shape() {
    let params = p(0.5, 0.5);
    let family = ShootingFamily::new(0.5);
    let rec = build_stochastic_solution(params, 5.0, family.profile(5.0).unwrap()).unwrap();
    let beta = beta_boundary(params).unwrap();
    assert!((rec.v_center() - (5.0 - beta)).abs() < 1e-12);
    assert_eq!(rec.v.eval(1.0).unwrap().0, 0.0);
    let vals: Vec<f64> = rec.v.nodes().iter().map(|n| n.value).collect();
    assert!(vals.windows(2).all(|w| w[1] < w[0]));
    assert!(rec.max_collocation_residual(50, 7).unwrap() <= 1e-6);
}

#[test]
fn stochastic_round_trip() {
    let params = p(0.3, 0.7);
    let family = ShootingFamily::new(0.7);
    let rec = build_stochastic_solution(params, 15.0, family.profile(15.0).unwrap()).unwrap();
    let z = stochastic_forward_map(&rec).unwrap();
    assert!((z.sigma / rec.radius - 1.0).abs() < 1e-8);
    let r = 0.5 * rec.radius;
    assert!((z.z.eval(r).unwrap().0 - rec.profile.eval(r).unwrap().0).abs() < 1e-8);
}

#[test]
fn deterministic_subcritical_found() {
    let params = p(0.5, 0.25);
    let out = find_deterministic_solution(params, EIGHT_PI).unwrap();
    let s = out.solution().expect("solution at half the critical value");
    assert!(s.residuals.0.abs() <= 1e-8 && s.residuals.1.abs() <= 1e-8, "{:?}", s.residuals);
    assert!(pohozaev_residual(&s.record).unwrap() <= 1e-5);
    assert!(s.record.max_collocation_residual(50, 7).unwrap() <= 1e-6);
    assert!(pohozaev_residual(&s.record.scaled(2.0).unwrap()).unwrap() > 0.1);
}

#[test]
fn deterministic_at_threshold_not_found() {
    let out = find_deterministic_solution(p(0.5, 0.25), 16.0 * PI).unwrap();
    match out {
        DetOutcome::NotFound(nf) => {
            assert_eq!(nf.reason, NotFoundReason::MassBound);
            assert_eq!(nf.alpha_range, (-40.0, 40.0));
        }
        DetOutcome::Found(_) => panic!("found a solution at the critical value"),
    }
}

#[test]
fn existence_pattern() {
    for (t, g) in [(0.5, 0.8), (0.5, 0.25)] {
        let params = p(t, g);
        let bar = critical_lambda(params).value;
        let grid: Vec<f64> = [0.5, 0.9, 0.99, 1.0, 1.05].iter().map(|k| k * bar).collect();
        let rows = deterministic_existence_scan(params, &grid).unwrap();
        let found: Vec<bool> = rows.iter().map(|r| r.found).collect();
        assert_eq!(found, [true, true, true, false, false], "({t},{g})");
    }
}

#[test]
fn standard_problem_threshold() {
    let params = SpeciesParams::standard(0.5).unwrap();
    let rows = deterministic_existence_scan(params, &[7.5 * PI, 7.99 * PI, EIGHT_PI, 8.1 * PI]).unwrap();
    let found: Vec<bool> = rows.iter().map(|r| r.found).collect();
    assert_eq!(found, [true, true, false, false]);
    let s = find_deterministic_solution(params, 4.0 * PI).unwrap();
    let rec = &s.solution().unwrap().record;
    assert!(pohozaev_residual(rec).unwrap() <= 1e-5);
    // Liouville: lambda = 4 pi is attained on the unit ball of the alpha = ln 8 profile.
    assert!((rec.radius - 1.0).abs() < 1e-8, "{}", rec.radius);
}

#[test]
fn single_lambda_one_row() {
    let rows = deterministic_existence_scan(p(0.5, 0.8), &[10.0]).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(existence_table(&rows).render().lines().filter(|l| !l.starts_with('#')).count(), 2);
}

fn zero_samples() -> RadialSamples {
    RadialSamples::from_fn(0.0, &log_grid(1e-6, 1.0, 200), |_| (0.0, 0.0, 0.0)).unwrap()
}

#[test]
fn functionals_at_zero() {
    let v = zero_samples();
    let lam = 10.0;
    let expect = -lam * PI.ln();
    for j in [
        functional_det(&v, p(0.5, 0.3), lam).unwrap(),
        functional_stoch(&v, p(0.5, 0.3), lam).unwrap(),
        functional_standard(&v, lam).unwrap(),
    ] {
        assert!((j - expect).abs() < 1e-10, "{j} vs {expect}");
    }
}

#[test]
fn functionals_collapse_for_standard_case() {
    let v = RadialSamples::from_fn(0.0, &log_grid(1e-6, 1.0, 400), |r| {
        (1.0 - r * r, -2.0 * r, -2.0)
    })
    .unwrap();
    let params = SpeciesParams::standard(0.4).unwrap();
    let std = functional_standard(&v, 5.0).unwrap();
    assert!((functional_det(&v, params, 5.0).unwrap() - std).abs() < 1e-10);
    assert!((functional_stoch(&v, params, 5.0).unwrap() - std).abs() < 1e-10);
}

#[test]
fn minimizer_beats_zero() {
    for (t, g) in [(0.5, 0.8), (0.5, 0.25)] {
        let params = p(t, g);
        let lam = 0.5 * critical_lambda(params).value;
        let s = find_deterministic_solution(params, lam).unwrap();
        let j = functional_det(&s.solution().unwrap().record.v, params, lam).unwrap();
        assert!(j <= -lam * PI.ln());
    }
}

#[test]
fn rescale_with_equal_weights_is_identity() {
    let v = RadialSamples::from_fn(0.0, &log_grid(1e-6, 1.0, 400), |r| {
        (1.0 - r * r, -2.0 * r, -2.0)
    })
    .unwrap();
    let z = rescale_to_z(&v, 1.0, 1.0, 0.5).unwrap();
    assert!((z.sigma - 1.0).abs() < 1e-15);
    assert!(z.boundary_value.abs() < 1e-15);
}

#[test]
fn rescale_conserves_mass() {
    let v = RadialSamples::from_fn(0.0, &log_grid(1e-6, 1.0, 400), |r| {
        (1.0 - r * r, -2.0 * r, -2.0)
    })
    .unwrap();
    let (a, b, g) = (3.0, 0.7, 0.4);
    let z = rescale_to_z(&v, a, b, g).unwrap();
    let lhs = z.z.integral_exp(1.0, z.sigma).unwrap();
    let rhs = a * v.integral_exp(1.0, 1.0).unwrap();
    assert!((lhs / rhs - 1.0).abs() < 1e-8, "{lhs} {rhs}");
    assert!((z.boundary_value - (a / b).ln() / (1.0 - g)).abs() < 1e-12);
}
