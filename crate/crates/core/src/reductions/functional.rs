use std::f64::consts::PI;

use super::record::{SolutionKind, SolutionRecord};
use crate::error::{invalid, Error, Result};
use crate::params::{check_gamma, SpeciesParams};
use crate::samples::RadialSamples;

/// `|−π v'(1)² − (−2λ + 2πλ(τ/∫e^v + (1−τ)/∫e^{γv}))|` for a deterministic
/// record.
pub fn pohozaev_residual(record: &SolutionRecord) -> Result<f64> {
    if record.kind != SolutionKind::Deterministic {
        return Err(Error::Precondition("the Pohozaev identity applies to deterministic records".into()));
    }
    let tau = record.params.tau();
    let (i1, ig) = record.integrals;
    let lam = record.lambda;
    let d = record.boundary_slope();
    let lhs = -PI * d * d;
    let mut bracket = tau / i1;
    if tau < 1.0 {
        bracket += (1.0 - tau) / ig;
    }
    let rhs = -2.0 * lam + 2.0 * PI * lam * bracket;
    Ok((lhs - rhs).abs())
}

struct DiscTerms {
    gradient: f64,
    i1: f64,
    ig: f64,
}

fn disc_terms(v: &RadialSamples, gamma: f64) -> Result<DiscTerms> {
    let r_end = v.r_end();
    if (r_end - 1.0).abs() > 1e-12 {
        return Err(Error::Precondition(format!("samples end at r = {r_end}, not on the unit circle")));
    }
    let boundary = v.eval(r_end)?.0;
    if boundary.abs() > 1e-10 {
        return Err(Error::Precondition(format!("boundary value {boundary} is not zero")));
    }
    let t = DiscTerms {
        gradient: PI * v.integral_grad_sq(1.0)?,
        i1: 2.0 * PI * v.integral_exp(1.0, 1.0)?,
        ig: 2.0 * PI * v.integral_exp(gamma, 1.0)?,
    };
    if !(t.gradient.is_finite() && t.i1.is_finite() && t.ig.is_finite()) {
        return Err(Error::NonFiniteIntegrand("disc functional"));
    }
    Ok(t)
}

/// `½∫|∇v|² − λτ ln∫e^v − λ(1−τ) ln∫e^{γv}` over the unit disc.
pub fn functional_det(v: &RadialSamples, params: SpeciesParams, lambda: f64) -> Result<f64> {
    let d = disc_terms(v, params.gamma())?;
    let tau = params.tau();
    let mut j = d.gradient - lambda * tau * d.i1.ln();
    if tau < 1.0 {
        j -= lambda * (1.0 - tau) * d.ig.ln();
    }
    Ok(j)
}

/// `½∫|∇v|² − λ ln(τ∫e^v + (1−τ)∫e^{γv})` over the unit disc.
pub fn functional_stoch(v: &RadialSamples, params: SpeciesParams, lambda: f64) -> Result<f64> {
    let d = disc_terms(v, params.gamma())?;
    let tau = params.tau();
    Ok(d.gradient - lambda * (tau * d.i1 + (1.0 - tau) * d.ig).ln())
}

/// The single-species functional `½∫|∇v|² − λ ln∫e^v`.
pub fn functional_standard(v: &RadialSamples, lambda: f64) -> Result<f64> {
    let d = disc_terms(v, 0.5)?;
    Ok(d.gradient - lambda * d.i1.ln())
}

/// Result of [`rescale_to_z`].
#[derive(Debug, Clone, PartialEq)]
pub struct Rescaled {
    /// `σ` with `σ^{2(1−γ)} = b/a^γ`.
    pub sigma: f64,
    /// `z(y) = v(y/σ) + ln(a/σ²)` on `[0, σ]`.
    pub z: RadialSamples,
    /// `z` on `∂B_σ`, equal to `ln(a/b)/(1−γ)`.
    pub boundary_value: f64,
}

/// Maps a solution of `−Δv = a e^v + b e^{γv}` on the unit disc to a
/// solution of `−Δz = e^z + e^{γz}` on `B_σ`.
pub fn rescale_to_z(v: &RadialSamples, a: f64, b: f64, gamma: f64) -> Result<Rescaled> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(invalid("a", a, "must be positive"));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(invalid("b", b, "must be positive"));
    }
    check_gamma(gamma)?;
    let sigma = (b.ln() - gamma * a.ln()) / (2.0 * (1.0 - gamma));
    let sigma = sigma.exp();
    let shift = a.ln() - 2.0 * sigma.ln();
    Ok(Rescaled {
        sigma,
        z: v.dilated(sigma, shift),
        boundary_value: (a / b).ln() / (1.0 - gamma),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples::LogNode;

    fn zero() -> RadialSamples {
        let nodes = [0.25, 0.5, 1.0]
            .iter()
            .map(|&r| LogNode::from_radial(r, 0.0, 0.0, 0.0))
            .collect();
        RadialSamples::new(0.0, nodes).unwrap()
    }

    #[test]
    fn zero_function() {
        let p = SpeciesParams::new(0.3, 0.6).unwrap();
        let lam = 7.5;
        let jd = functional_det(&zero(), p, lam).unwrap();
        let js = functional_stoch(&zero(), p, lam).unwrap();
        assert!((jd + lam * PI.ln()).abs() < 1e-12);
        assert!((js + lam * PI.ln()).abs() < 1e-12);
    }

    #[test]
    fn standard_case_collapses() {
        let v = RadialSamples::from_fn(2.0, &crate::samples::log_grid(1e-3, 1.0, 400), |r| {
            (2.0 * (1.0 - r * r), -4.0 * r, -4.0)
        })
        .unwrap();
        let p = SpeciesParams::standard(0.4).unwrap();
        let i = functional_standard(&v, 5.0).unwrap();
        assert!((functional_det(&v, p, 5.0).unwrap() - i).abs() < 1e-12);
        assert!((functional_stoch(&v, p, 5.0).unwrap() - i).abs() < 1e-12);
        // π∫₀¹ 16 r³ dr = 4π
        let direct = 4.0 * PI - 5.0 * (PI * (2f64.exp() - 1.0) / 2.0).ln();
        assert!((i - direct).abs() < 1e-9, "{i} {direct}");
    }

    #[test]
    fn rescale_equal_weights() {
        let r = rescale_to_z(&zero(), 2.0, 2.0, 0.5).unwrap();
        assert!((r.sigma - 2f64.sqrt()).abs() < 1e-14);
        let r = rescale_to_z(&zero(), 1.0, 1.0, 0.5).unwrap();
        assert_eq!(r.sigma, 1.0);
        assert_eq!(r.boundary_value, 0.0);
        assert!(rescale_to_z(&zero(), 0.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn rejects_nonzero_boundary() {
        let v = RadialSamples::from_fn(1.0, &[0.5, 1.0], |_| (1.0, 0.0, 0.0)).unwrap();
        assert!(functional_det(&v, SpeciesParams::new(0.5, 0.5).unwrap(), 1.0).is_err());
    }
}
