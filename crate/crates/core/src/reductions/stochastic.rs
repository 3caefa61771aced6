use std::sync::Arc;

use rayon::prelude::*;

use super::functional::{rescale_to_z, Rescaled};
use super::record::{SolutionKind, SolutionRecord};
use crate::error::{Error, Result};
use crate::params::{beta_boundary, SpeciesParams};
use crate::radial::{RadialProfile, ShootingFamily};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaCurvePoint {
    pub alpha: f64,
    pub sigma: f64,
    pub lambda_value: f64,
    pub params: SpeciesParams,
}

fn check_profile(profile: &RadialProfile, params: SpeciesParams) -> Result<()> {
    params.require_two_species()?;
    let c = profile.config();
    if c.a != 1.0 || c.b != 1.0 {
        return Err(Error::Precondition("profile must come from the problem with a = b = 1".into()));
    }
    if c.gamma != params.gamma() {
        return Err(Error::Precondition(format!(
            "profile gamma {} differs from params gamma {}",
            c.gamma,
            params.gamma()
        )));
    }
    Ok(())
}

/// The radius `σ` at which the profile crosses the boundary constant
/// `β_{τ,γ}`.
pub fn sigma_of_alpha(profile: &RadialProfile, params: SpeciesParams) -> Result<f64> {
    check_profile(profile, params)?;
    let beta = beta_boundary(params)?;
    let alpha = profile.alpha();
    if alpha <= beta {
        return Err(Error::AlphaBelowBoundary { alpha, beta });
    }
    profile.radius_at_level(beta)
}

/// `Λ = ∫_{B_σ} (e^η + e^{γη}/γ)`.
pub fn lambda_of_alpha(profile: &RadialProfile, params: SpeciesParams, sigma: f64) -> Result<f64> {
    check_profile(profile, params)?;
    if sigma == 0.0 {
        return Ok(0.0);
    }
    let g = params.gamma();
    Ok(profile.partial_mass(1.0, sigma)? + profile.partial_mass(g, sigma)? / g)
}

pub fn lambda_point(family: &ShootingFamily, params: SpeciesParams, alpha: f64) -> Result<LambdaCurvePoint> {
    let beta = beta_boundary(params)?;
    if alpha <= beta {
        return Err(Error::AlphaBelowBoundary { alpha, beta });
    }
    let profile = family.profile(alpha)?;
    let sigma = sigma_of_alpha(&profile, params)?;
    let lambda_value = lambda_of_alpha(&profile, params, sigma)?;
    Ok(LambdaCurvePoint { alpha, sigma, lambda_value, params })
}

/// The stochastic solution `v(r) = η(σ r) − β_{τ,γ}` with `λ = Λ_{τ,γ}(α)`.
pub fn build_stochastic_solution(
    params: SpeciesParams,
    alpha: f64,
    profile: Arc<RadialProfile>,
) -> Result<SolutionRecord> {
    if profile.alpha() != alpha {
        return Err(Error::Precondition(format!(
            "profile was shot from alpha = {}, not {alpha}",
            profile.alpha()
        )));
    }
    let beta = beta_boundary(params)?;
    let sigma = sigma_of_alpha(&profile, params)?;
    let lambda = lambda_of_alpha(&profile, params, sigma)?;
    SolutionRecord::from_profile(SolutionKind::Stochastic, params, lambda, profile, sigma, beta)
}

/// The rescaling that maps a stochastic disc solution back to a whole-plane
/// profile, computed from the record's own `v`, `λ` and disc integrals.
pub fn stochastic_forward_map(record: &SolutionRecord) -> Result<Rescaled> {
    let tau = record.params.tau();
    let g = record.params.gamma();
    let (i1, ig) = record.integrals;
    let norm = tau * i1 + (1.0 - tau) * ig;
    let a = record.lambda * tau / norm;
    let b = record.lambda * (1.0 - tau) * g / norm;
    rescale_to_z(&record.v, a, b, g)
}

/// `200` points `β_{τ,γ} + s` with `s` log-spaced on `[10⁻³, 40]`.
pub fn default_alpha_grid(params: SpeciesParams) -> Result<Vec<f64>> {
    let beta = beta_boundary(params)?;
    let (lo, hi) = (1e-3f64.ln(), 40f64.ln());
    let n = 200;
    Ok((0..n)
        .map(|i| beta + (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp())
        .collect())
}

#[derive(Debug, Clone)]
pub struct CurveReport {
    pub params: SpeciesParams,
    pub grid: Vec<f64>,
    pub points: Vec<LambdaCurvePoint>,
    pub failures: Vec<(f64, Error)>,
}

impl CurveReport {
    /// The grid point with the largest `Λ`, the grid estimate of `λ*`.
    pub fn sup(&self) -> Option<LambdaCurvePoint> {
        self.points
            .iter()
            .copied()
            .max_by(|a, b| a.lambda_value.total_cmp(&b.lambda_value))
    }
}

pub fn lambda_curve(params: SpeciesParams, alpha_grid: &[f64]) -> Result<CurveReport> {
    let family = ShootingFamily::new(params.gamma());
    lambda_curve_with(&family, params, alpha_grid)
}

/// One point per grid value, computed in parallel; failures are collected
/// rather than aborting the sweep.
pub fn lambda_curve_with(
    family: &ShootingFamily,
    params: SpeciesParams,
    alpha_grid: &[f64],
) -> Result<CurveReport> {
    beta_boundary(params)?;
    if alpha_grid.is_empty() {
        return Err(Error::Precondition("alpha grid is empty".into()));
    }
    let results: Vec<(f64, Result<LambdaCurvePoint>)> = alpha_grid
        .par_iter()
        .map(|&a| (a, lambda_point(family, params, a)))
        .collect();
    let mut points = Vec::new();
    let mut failures = Vec::new();
    for (a, r) in results {
        match r {
            Ok(p) => points.push(p),
            Err(e) => failures.push((a, e)),
        }
    }
    Ok(CurveReport { params, grid: alpha_grid.to_vec(), points, failures })
}
