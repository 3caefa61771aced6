use std::f64::consts::PI;

use meanfield::params::*;
use proptest::prelude::*;

fn p(tau: f64, gamma: f64) -> SpeciesParams {
    SpeciesParams::new(tau, gamma).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn two_species_perturbative_branch() {
    let c = critical_lambda_two_species(p(0.5, 0.25)).unwrap();
    assert!(close(c.value, 16.0 * PI, 1e-14));
    assert_eq!(c.branch, ThresholdBranch::Perturbative);
    assert!(gamma_threshold(0.5).unwrap() > 0.25);
}

#[test]
fn two_species_mixed_branch() {
    let c = critical_lambda_two_species(p(0.5, 0.8)).unwrap();
    assert!(close(c.value, EIGHT_PI / 0.81, 1e-14));
    assert_eq!(c.branch, ThresholdBranch::Mixed);
}

#[test]
fn branches_agree_at_threshold() {
    let g = gamma_threshold(0.25).unwrap();
    assert!(close(g, 1.0 / 3.0, 1e-15));
    let c = critical_lambda_two_species(p(0.25, g)).unwrap();
    assert!(close(c.value, 32.0 * PI, 1e-12));
    let mixed = EIGHT_PI / (0.25 + 0.75 * g).powi(2);
    assert!(close(mixed, 32.0 * PI, 1e-12));
}

#[test]
fn discrete_dirac_is_eight_pi() {
    let c = critical_lambda_discrete(&DiscreteMeasure::dirac_one()).unwrap();
    assert_eq!(c.value, EIGHT_PI);
}

#[test]
fn discrete_two_atom_matches_closed_form() {
    let m = DiscreteMeasure::new(vec![
        Atom { weight: 0.5, intensity: 1.0 },
        Atom { weight: 0.5, intensity: 0.8 },
    ])
    .unwrap();
    let c = critical_lambda_discrete(&m).unwrap();
    assert!(close(c.value, EIGHT_PI / 0.81, 1e-12));
}

#[test]
fn discrete_symmetric_signs() {
    let m = DiscreteMeasure::new(vec![
        Atom { weight: 0.5, intensity: 1.0 },
        Atom { weight: 0.5, intensity: -1.0 },
    ])
    .unwrap();
    let c = critical_lambda_discrete(&m).unwrap();
    assert!(close(c.value, 16.0 * PI, 1e-12));
}

#[test]
fn discrete_rejects_bad_measures() {
    assert!(DiscreteMeasure::new(vec![Atom { weight: 0.6, intensity: 1.0 }]).is_err());
    assert!(DiscreteMeasure::new(vec![Atom { weight: 1.0, intensity: 1.5 }]).is_err());
    assert!(DiscreteMeasure::new(vec![]).is_err());
}

#[test]
fn measure_file_parses() {
    let m = DiscreteMeasure::parse("# weight intensity\n0.5 1\n0.5 0.8\n").unwrap();
    assert_eq!(m.atoms().len(), 2);
    assert!(close(critical_lambda_discrete(&m).unwrap().value, EIGHT_PI / 0.81, 1e-12));
}

#[test]
fn beta_boundary_examples() {
    assert!(close(beta_boundary(p(0.5, 0.5)).unwrap(), 2.0 * 2f64.ln(), 1e-14));
    for g in [0.2, 0.5, 0.9] {
        assert!(beta_boundary(p(g / (1.0 + g), g)).unwrap().abs() < 1e-13);
    }
    let b = beta_boundary(p(1e-3, 0.5)).unwrap();
    assert!((b - -12.43).abs() < 0.01, "{b}");
    let seq: Vec<f64> = (1..=8).map(|k| beta_boundary(p(10f64.powi(-k), 0.5)).unwrap()).collect();
    assert!(seq.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn standard_case_rejected_where_tau_below_one_is_needed() {
    let s = SpeciesParams::standard(0.5).unwrap();
    assert!(s.is_standard());
    assert!(beta_boundary(s).is_err());
}

#[test]
fn parameter_domain() {
    assert!(SpeciesParams::new(0.0, 0.5).is_err());
    assert!(SpeciesParams::new(0.5, 1.2).is_err());
    assert!(SpeciesParams::new(0.5, 0.0).is_err());
    assert!(SpeciesParams::new(1.5, 0.5).is_err());
}

#[test]
fn gamma_threshold_examples() {
    let g = gamma_threshold(0.5).unwrap();
    assert!(close(g, 0.41421356237309503, 1e-14));
    assert!(0.5 / 1.5 < g && g < 0.5);
    let g = gamma_threshold(0.999).unwrap();
    assert!(g < 0.5 && (g - 0.499875).abs() < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn discrete_specializes_two_species(tau in 0.01f64..0.99, gamma in 0.01f64..0.99) {
        let two = critical_lambda_two_species(p(tau, gamma)).unwrap();
        let disc = critical_lambda_discrete(&p(tau, gamma).as_measure()).unwrap();
        prop_assert!((two.value - disc.value).abs() <= 1e-12 * two.value);
    }

    #[test]
    fn mt_constant_at_least_eight_pi(tau in 0.01f64..0.99, gamma in 0.01f64..0.99) {
        prop_assert!(critical_lambda_two_species(p(tau, gamma)).unwrap().value >= EIGHT_PI);
    }

    #[test]
    fn random_measures_at_least_eight_pi(atoms in prop::collection::vec((0.05f64..1.0, -1.0f64..1.0), 1..6)) {
        let total: f64 = atoms.iter().map(|a| a.0).sum();
        let m = DiscreteMeasure::new(
            atoms.iter().map(|&(w, i)| Atom { weight: w / total, intensity: i }).collect(),
        ).unwrap();
        let c = critical_lambda_discrete(&m).unwrap();
        prop_assert!(c.value >= EIGHT_PI * (1.0 - 1e-14));
    }

    #[test]
    fn branches_continuous_at_threshold(tau in 0.01f64..0.99) {
        let g = gamma_threshold(tau).unwrap();
        let eps = 1e-9;
        let lo = critical_lambda_two_species(p(tau, g - eps)).unwrap().value;
        let hi = critical_lambda_two_species(p(tau, g + eps)).unwrap().value;
        prop_assert!((lo - hi).abs() <= 1e-6 * lo);
    }

    #[test]
    fn beta_increasing_in_tau(gamma in 0.05f64..0.95, t1 in 0.01f64..0.98, dt in 1e-4f64..0.01) {
        let t2 = (t1 + dt).min(0.999);
        prop_assert!(beta_boundary(p(t1, gamma)).unwrap() < beta_boundary(p(t2, gamma)).unwrap());
    }
}
