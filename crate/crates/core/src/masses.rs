//! Whole-plane masses `m₁ = ∫ e^η` and `m_γ = ∫ e^{γη}` of a profile.
//!
//! The quadrature runs over the integrator's nodes up to the last one, `R`.
//! Beyond `R` the slowly decaying species carries a tail that is not small
//! for `γβ` close to 2; it is closed with the first integral of the Liouville
//! equation it asymptotically obeys, which is exact once the other species is
//! negligible. The other species uses the power-law tail of `η ≈ −β ln r`.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::io::{fmt_f64, Table};
use crate::params::{check_gamma, EIGHT_PI};
use crate::radial::RadialProfile;

/// Margin in the tail exponent below which the power-law tail is refused.
pub const TAIL_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub enum TailStatus {
    /// Both tails computed.
    Closed,
    /// A tail formula was refused; the affected mass is the truncated
    /// integral only.
    TruncatedOnly(String),
    /// The tail integral diverges; the affected mass is infinite.
    Divergent(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MassReport {
    pub alpha: f64,
    pub gamma: f64,
    pub m1: f64,
    pub m_gamma: f64,
    /// `a m₁ + b m_γ`, i.e. `m₁ + m_γ` for the two-term problem.
    pub total: f64,
    /// `2π β`.
    pub flux_mass: f64,
    /// Share of `m₁` and of `m_γ` contributed beyond the last node.
    pub tail_fraction: (f64, f64),
    pub tail_status: TailStatus,
    /// Present only for the two-term problem `a = b = 1`.
    pub energy_residual: Option<f64>,
}

impl MassReport {
    pub fn csv_columns() -> [&'static str; 7] {
        ["gamma", "alpha", "m1", "m_gamma", "total", "flux_mass", "energy_residual"]
    }

    pub fn csv_row(&self) -> Vec<String> {
        [
            self.gamma,
            self.alpha,
            self.m1,
            self.m_gamma,
            self.total,
            self.flux_mass,
            self.energy_residual.unwrap_or(f64::NAN),
        ]
        .iter()
        .map(|&x| fmt_f64(x))
        .collect()
    }

    pub fn flux_residual(&self) -> f64 {
        (self.total - self.flux_mass).abs() / self.total
    }
}

/// Masses of a profile whose decay exponent has converged.
pub fn compute_masses(profile: &RadialProfile) -> Result<MassReport> {
    let cfg = *profile.config();
    let beta = profile.beta();
    if !beta.converged {
        return Err(Error::BetaNotConverged { variation: beta.variation });
    }
    let gamma = cfg.gamma;
    let r_end = profile.r_end();
    let last = profile.log_nodes()[profile.log_nodes().len() - 1];
    let q1 = 2.0 * PI * profile.integral_exp(1.0, r_end)?;
    let qg = 2.0 * PI * profile.integral_exp(gamma, r_end)?;
    let two_t = 2.0 * last.t;
    let flux_end = -last.dt;
    let mut status = TailStatus::Closed;

    // Tail of the weight-`w` integral from the power law `e^{wη} ≈ e^{wη_R} (r/R)^{−wβ}`.
    let power_tail = |w: f64, status: &mut TailStatus, label: &str| -> f64 {
        let margin = w * beta.value - 2.0;
        if margin <= 0.0 {
            *status = TailStatus::Divergent(format!("{label}: wβ − 2 = {margin:.3e} ≤ 0"));
            f64::INFINITY
        } else if margin < TAIL_MARGIN {
            *status = TailStatus::TruncatedOnly(format!(
                "{label}: wβ − 2 = {margin:.3e} below the margin {TAIL_MARGIN}"
            ));
            0.0
        } else {
            2.0 * PI * (two_t + w * last.value).exp() / margin
        }
    };

    let (tail1, tailg);
    if cfg.b > 0.0 {
        // Slow species γ closed exactly; its mass beyond R is 2π(β_slow − β_R)/b.
        let psi_t = 2.0 + gamma * last.dt;
        let big_a = cfg.b * (two_t + gamma * last.value).exp();
        let beta_slow = (2.0 + (psi_t * psi_t + 2.0 * gamma * big_a).sqrt()) / gamma;
        tailg = 2.0 * PI * (beta_slow - flux_end) / cfg.b;
        tail1 = power_tail(1.0, &mut status, "m1");
    } else {
        let psi_t = 2.0 + last.dt;
        let big_a = cfg.a * (two_t + last.value).exp();
        let beta_slow = 2.0 + (psi_t * psi_t + 2.0 * big_a).sqrt();
        tail1 = 2.0 * PI * (beta_slow - flux_end) / cfg.a;
        tailg = power_tail(gamma, &mut status, "m_gamma");
    }
    let (m1, m_gamma) = (q1 + tail1, qg + tailg);
    let total = cfg.a * m1 + if cfg.b > 0.0 { cfg.b * m_gamma } else { 0.0 };
    let mut report = MassReport {
        alpha: cfg.alpha,
        gamma,
        m1,
        m_gamma,
        total,
        flux_mass: 2.0 * PI * beta.value,
        tail_fraction: (tail1 / m1, tailg / m_gamma),
        tail_status: status,
        energy_residual: None,
    };
    if cfg.a == 1.0 && cfg.b == 1.0 {
        report.energy_residual = Some(energy_identity_residual(&report)?);
    }
    Ok(report)
}

/// `|(m₁+m_γ)² − 8π(m₁ + m_γ/γ)| / [8π(m₁ + m_γ/γ)]`.
///
/// Only meaningful for the two-term problem; reports of the single
/// exponential problem carry an infinite `m_γ` or a non-comparable total and
/// are rejected.
pub fn energy_identity_residual(report: &MassReport) -> Result<f64> {
    if !(report.m1.is_finite() && report.m_gamma.is_finite()) {
        return Err(Error::Precondition("energy identity needs finite masses".into()));
    }
    if (report.total - (report.m1 + report.m_gamma)).abs() > 1e-12 * report.total {
        return Err(Error::Precondition(
            "energy identity applies to the two-term problem a = b = 1 only".into(),
        ));
    }
    let m = report.m1 + report.m_gamma;
    let rhs = EIGHT_PI * (report.m1 + report.m_gamma / report.gamma);
    Ok((m * m - rhs).abs() / rhs)
}

/// The limits of the total mass as `α → +∞` and `α → −∞`:
/// `(8π max{1, (1−γ)/γ}, 8π/γ)`.
pub fn mass_limits(gamma: f64) -> Result<(f64, f64)> {
    check_gamma(gamma)?;
    Ok((EIGHT_PI * 1f64.max((1.0 - gamma) / gamma), EIGHT_PI / gamma))
}

/// `2π ∫₀^R e^{w η(r)} r dr` for `w ∈ {1, γ}`.
pub fn partial_mass(profile: &RadialProfile, exponent_weight: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(invalid("R", r, "must be positive"));
    }
    profile.partial_mass(exponent_weight, r)
}

/// Mass reports as a table with the standard columns.
pub fn mass_table(reports: &[MassReport]) -> Table {
    let mut t = Table::new(&MassReport::csv_columns());
    for r in reports {
        t.push(r.csv_row());
    }
    t
}
