use std::f64::consts::PI;

use meanfield::bubbles::*;
use meanfield::params::{critical_lambda, SpeciesParams, EIGHT_PI};

fn p(tau: f64, gamma: f64) -> SpeciesParams {
    SpeciesParams::new(tau, gamma).unwrap()
}

#[test]
fn projected_bubble_values() {
    for d in [1.0, 0.1, 1e-3] {
        assert!(pu_eval(d, 1.0).unwrap().abs() < 1e-14);
    }
    assert!((pu_eval(1.0, 0.0).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-14);
}

#[test]
fn projected_bubble_solves_liouville() {
    for d in [1.0, 0.1, 0.01] {
        let b = Bubble::new(d).unwrap();
        for i in 1..=50 {
            let r = i as f64 / 51.0;
            assert!(b.collocation_residual(r).unwrap() <= 1e-8, "delta {d} r {r}");
        }
    }
}

#[test]
fn gradient_energy_at_one() {
    let g = gradient_energy(1.0).unwrap();
    assert!((g - 16.0 * PI * (2f64.ln() - 0.5)).abs() < 1e-12);
    assert!((g - 9.708).abs() < 1e-3);
}

#[test]
fn gradient_energy_asymptotics() {
    // The remainder G - 16 pi ln(1/delta^2) tends to -16 pi.
    let d: f64 = 2f64.powi(-10);
    let l = (1.0 / (d * d)).ln();
    let g = gradient_energy(d).unwrap();
    assert!(((g - 16.0 * PI * l) / (16.0 * PI) + 1.0).abs() < 1e-3);
    assert!(g / (16.0 * PI * l) < 1.0);
}

#[test]
fn gradient_energy_quadrature_agrees() {
    for d in [1.0, 0.1, 0.01] {
        let (c, q) = (gradient_energy(d).unwrap(), gradient_energy_quadrature(d).unwrap());
        assert!((c - q).abs() <= 1e-8 * c, "delta {d}: {c} {q}");
    }
}

#[test]
fn exp_integral_quadrature_agrees() {
    for d in [1.0, 0.1, 0.01] {
        for a in [0.25, 0.5, 0.75, 1.0] {
            let (c, q) = (exp_integral(d, a).unwrap(), exp_integral_quadrature(d, a).unwrap());
            assert!((c - q).abs() <= 1e-8 * c, "delta {d} a {a}: {c} {q}");
        }
    }
}

#[test]
fn exp_integral_power_regime() {
    let ratio = |d: f64| ln_exp_integral(d, 1.0).unwrap() / (1.0 / (d * d)).ln();
    let r = [ratio(1e-4), ratio(1e-8), ratio(1e-16)];
    assert!(r.windows(2).all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs()));
    assert!((r[2] - 1.0).abs() < 0.05);
    assert_eq!(exp_regime(1.0).unwrap(), ExpRegime::Power);
}

#[test]
fn exp_integral_double_log_regime() {
    let d: f64 = 2f64.powi(-20);
    let v = exp_integral(d, 0.5).unwrap();
    let target = PI * (1.0 / (d * d)).ln();
    assert!((v / target - 1.0).abs() < 0.1, "{v} {target}");
    assert_eq!(exp_regime(0.5).unwrap(), ExpRegime::DoubleLog);
}

#[test]
fn exp_integral_bounded_regime() {
    let (a, b) = (exp_integral(1e-2, 0.25).unwrap(), exp_integral(1e-4, 0.25).unwrap());
    assert!((a - b).abs() / a < 0.01);
    assert_eq!(exp_regime(0.25).unwrap(), ExpRegime::Bounded);
}

#[test]
fn case1_infeasible_at_threshold() {
    let params = p(0.5, 0.8);
    assert!(t_gamma_case1(params, critical_lambda(params).value).is_err());
}

#[test]
fn case1_feasible_above_threshold() {
    let params = p(0.5, 0.8);
    let lam = 1.05 * EIGHT_PI / 0.81;
    let t = t_gamma_case1(params, lam).unwrap();
    // Independent quadratic formula for 8 pi t^2 - 2 lam s t + lam.
    let s = 0.9;
    let disc = (2.0 * lam * s).powi(2) - 4.0 * EIGHT_PI * lam;
    let plus = (2.0 * lam * s + disc.sqrt()) / (16.0 * PI);
    assert!((t.t_plus - plus).abs() < 1e-12 * plus);
    assert!(t.t_plus > 1.0 / s);
    assert!(t.value * 0.8 > 0.5);
    assert!(case1_quadratic(params, lam, t.value) < 0.0);
}

#[test]
fn case2_feasible_above_threshold() {
    let params = p(0.5, 0.25);
    let lam = 1.05 * 16.0 * PI;
    let t = t_gamma_case2(params, lam).unwrap();
    let lt = lam * 0.5;
    let disc = (2.0 * lt).powi(2) - 4.0 * EIGHT_PI * lt;
    let minus = (2.0 * lt - disc.sqrt()) / (16.0 * PI);
    assert!((t.t_minus - minus).abs() < 1e-10);
    assert!(t.t_minus > 0.5);
    assert!(t.value > 0.5 && t.value < 0.5 / 0.25);
    assert!(case2_quadratic(params, lam, t.value) < 0.0);
}

#[test]
fn case2_infeasible_at_threshold() {
    assert!(t_gamma_case2(p(0.5, 0.25), 16.0 * PI).is_err());
}

#[test]
fn case2_lower_root_above_half() {
    for k in 1..=40 {
        let lam = 16.0 * PI * (1.0 + 0.05 * k as f64);
        if let Ok(t) = t_gamma_case2(p(0.5, 0.25), lam) {
            assert!(t.t_minus > 0.5);
        }
    }
}

#[test]
fn blowdown_mixed() {
    let params = p(0.5, 0.8);
    let s = blowdown_series(params, 1.05 * critical_lambda(params).value, &dyadic_deltas(4, 20)).unwrap();
    assert!(s.strictly_decreasing());
    assert!(s.slope_error() < 0.05, "{}", s.slope_error());
    assert_eq!(s.summary.branch, BlowdownCase::Mixed);
}

#[test]
fn blowdown_perturbative() {
    let params = p(0.5, 0.25);
    let s = blowdown_series(params, 1.05 * critical_lambda(params).value, &dyadic_deltas(4, 20)).unwrap();
    assert!(s.strictly_decreasing());
    assert!(s.slope_error() < 0.05, "{}", s.slope_error());
    assert_eq!(s.summary.branch, BlowdownCase::Perturbative);
}

#[test]
fn blowdown_subcritical_refused() {
    for (t, g) in [(0.5, 0.8), (0.5, 0.25)] {
        let params = p(t, g);
        assert!(blowdown_series(params, 0.9 * critical_lambda(params).value, &dyadic_deltas(4, 20)).is_err());
    }
}
