//! Projected Liouville bubbles on the unit disc and the blow-down of the
//! deterministic functional along them.
//!
//! `U_δ(x) = ln(8δ²/(δ² + |x|²)²)` and its Dirichlet projection
//! `PU_δ = U_δ − U_δ|_{∂B₁} = 2 ln((δ² + 1)/(δ² + r²))`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::io::{fmt_f64, Table};
use crate::params::{critical_lambda_two_species, gamma_threshold, SpeciesParams, EIGHT_PI};
use crate::quadrature::adaptive_gk15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bubble {
    delta: f64,
}

impl Bubble {
    pub fn new(delta: f64) -> Result<Self> {
        check_delta(delta)?;
        Ok(Bubble { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `U_δ(r)`.
    pub fn unprojected(&self, r: f64) -> f64 {
        let d2 = self.delta * self.delta;
        (8.0 * d2).ln() - 2.0 * (d2 + r * r).ln()
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        pu_eval(self.delta, r)
    }

    /// `(PU_δ)'(r) = −4r/(δ² + r²)`.
    pub fn derivative(&self, r: f64) -> f64 {
        -4.0 * r / (self.delta * self.delta + r * r)
    }

    /// `e^{U_δ(r)} = 8δ²/(δ² + r²)²`.
    pub fn source(&self, r: f64) -> f64 {
        let d2 = self.delta * self.delta;
        let q = d2 + r * r;
        8.0 * d2 / (q * q)
    }

    /// `|Δ PU_δ + e^{U_δ}| / e^{U_δ}` at `r ∈ (0, 1)`, with the Laplacian
    /// `(r u')'/r` taken by a five-point difference of the flux `r u'`.
    pub fn collocation_residual(&self, r: f64) -> Result<f64> {
        if !(r > 0.0 && r < 1.0) {
            return Err(invalid("r", r, "must lie in (0, 1)"));
        }
        let h = 1e-3 * r;
        let flux = |s: f64| s * self.derivative(s);
        let d = (flux(r - 2.0 * h) - 8.0 * flux(r - h) + 8.0 * flux(r + h) - flux(r + 2.0 * h)) / (12.0 * h);
        let lap = d / r;
        let s = self.source(r);
        Ok((lap + s).abs() / s)
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(invalid("delta", delta, "must lie in (0, 1]"));
    }
    Ok(())
}

fn check_exponent(a: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(invalid("a", a, "must be positive"));
    }
    Ok(())
}

/// `PU_δ(r) = 2 ln((δ² + 1)/(δ² + r²))` for `0 ≤ r ≤ 1`.
pub fn pu_eval(delta: f64, r: f64) -> Result<f64> {
    check_delta(delta)?;
    if !(0.0..=1.0).contains(&r) {
        return Err(invalid("r", r, "must lie in [0, 1]"));
    }
    let d2 = delta * delta;
    Ok(2.0 * ((d2 + 1.0) / (d2 + r * r)).ln())
}

/// `∫_{B₁} |∇PU_δ|² = 16π[ln((δ² + 1)/δ²) + δ²/(δ² + 1) − 1]`.
pub fn gradient_energy(delta: f64) -> Result<f64> {
    check_delta(delta)?;
    let d2 = delta * delta;
    // ln(1 + 1/δ²) − 1/(1 + δ²), grouped to avoid cancellation at δ = 1.
    Ok(16.0 * PI * ((1.0 / d2).ln_1p() - 1.0 / (d2 + 1.0)))
}

/// `2π ∫₀¹ (PU_δ)'(r)² r dr` by adaptive quadrature, as an independent check
/// of [`gradient_energy`].
pub fn gradient_energy_quadrature(delta: f64) -> Result<f64> {
    let b = Bubble::new(delta)?;
    let f = |r: f64| {
        let d = b.derivative(r);
        d * d * r
    };
    Ok(2.0 * PI * split_quadrature(f, delta))
}

/// Quadrature on `[0, 1]` with breakpoints clustered at the bubble scale.
fn split_quadrature<F: Fn(f64) -> f64>(f: F, delta: f64) -> f64 {
    let mut cuts = vec![0.0];
    let mut x = delta / 8.0;
    while x < 1.0 {
        cuts.push(x);
        x *= 4.0;
    }
    cuts.push(1.0);
    cuts.windows(2)
        .map(|w| adaptive_gk15(&f, w[0], w[1], 1e-14, 200).0)
        .sum()
}

/// `ln ∫_{B₁} e^{a PU_δ}` in closed form, for any `a > 0`.
///
/// With `c = 1 − 2a` and `L = ln((1 + δ²)/δ²)` the integral is
/// `π (1 + δ²)^{2a} δ^{2c} (e^{cL} − 1)/c`, and `π (1 + δ²) L` at `c = 0`.
pub fn ln_exp_integral(delta: f64, a: f64) -> Result<f64> {
    check_delta(delta)?;
    check_exponent(a)?;
    let d2 = delta * delta;
    let c = 1.0 - 2.0 * a;
    let l = (1.0 / d2).ln_1p();
    let ratio = if c == 0.0 {
        l
    } else if c * l > 700.0 {
        // e^{cL} overflows; (e^{cL} − 1)/c ≈ e^{cL}/c.
        return Ok(PI.ln() + 2.0 * a * d2.ln_1p() + c * d2.ln() + c * l - c.ln());
    } else {
        (c * l).exp_m1() / c
    };
    Ok(PI.ln() + 2.0 * a * d2.ln_1p() + c * d2.ln() + ratio.ln())
}

/// `∫_{B₁} e^{a PU_δ}` in closed form.
///
/// Accepts any `a > 0`; the blow-down evaluates it at `a = t_γ`, which may
/// exceed 1.
pub fn exp_integral(delta: f64, a: f64) -> Result<f64> {
    Ok(ln_exp_integral(delta, a)?.exp())
}

/// `2π ∫₀¹ e^{a PU_δ(r)} r dr` by adaptive quadrature.
pub fn exp_integral_quadrature(delta: f64, a: f64) -> Result<f64> {
    let b = Bubble::new(delta)?;
    check_exponent(a)?;
    let f = |r: f64| (a * b.eval(r).unwrap_or(f64::NAN)).exp() * r;
    Ok(2.0 * PI * split_quadrature(f, delta))
}

/// Growth regime of `∫ e^{a PU_δ}` as `δ → 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpRegime {
    /// `0 < a < 1/2`: bounded.
    Bounded,
    /// `a = 1/2`: `π ln(1/δ²)`, so the logarithm grows like `ln ln(1/δ²)`.
    DoubleLog,
    /// `a > 1/2`: `ln ∫ = (2a − 1) ln(1/δ²) + O(1)`.
    Power,
}

pub fn exp_regime(a: f64) -> Result<ExpRegime> {
    check_exponent(a)?;
    Ok(if a < 0.5 {
        ExpRegime::Bounded
    } else if a == 0.5 {
        ExpRegime::DoubleLog
    } else {
        ExpRegime::Power
    })
}

/// A feasible exponent `t` with the roots `t_± ` of the quadratic that bounds
/// it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TGamma {
    pub value: f64,
    pub t_minus: f64,
    pub t_plus: f64,
}

fn quadratic_roots(lin: f64, cst: f64) -> Option<(f64, f64)> {
    // 8πt² − lin·t + cst = 0
    // A discriminant within rounding of the cancellation `lin² − 32π cst` is
    // the degenerate double root of the threshold case.
    let disc = lin * lin - 4.0 * EIGHT_PI * cst;
    if !(disc > 8.0 * f64::EPSILON * lin * lin) {
        return None;
    }
    let sq = disc.sqrt();
    let plus = (lin + sq) / (2.0 * EIGHT_PI);
    // Product of the roots is cst/8π; avoids cancellation in t₋.
    Some((cst / (EIGHT_PI * plus), plus))
}

/// `8πt² − 2λst + λ` with `s = τ + (1−τ)γ`.
pub fn case1_quadratic(params: SpeciesParams, lambda: f64, t: f64) -> f64 {
    let s = params.mean_intensity();
    EIGHT_PI * t * t - 2.0 * lambda * s * t + lambda
}

/// `8πt² − λτ(2t − 1)`.
pub fn case2_quadratic(params: SpeciesParams, lambda: f64, t: f64) -> f64 {
    EIGHT_PI * t * t - lambda * params.tau() * (2.0 * t - 1.0)
}

/// `t = t₊ − t₊ 2^{−k}` for the smallest `k ≥ 1` with `tγ > 1/2` and
/// `8πt² − 2λst + λ < 0`.
pub fn t_gamma_case1(params: SpeciesParams, lambda: f64) -> Result<TGamma> {
    params.require_two_species()?;
    let (tau, g) = (params.tau(), params.gamma());
    if !(g > tau / (1.0 + tau)) {
        return Err(Error::Infeasible(format!("gamma = {g} does not exceed tau/(1+tau) = {}", tau / (1.0 + tau))));
    }
    let s = params.mean_intensity();
    let (t_minus, t_plus) = quadratic_roots(2.0 * lambda * s, lambda).ok_or_else(|| {
        Error::Infeasible(format!(
            "lambda = {lambda} does not exceed 8pi/s^2 = {}: the quadratic has no interior",
            EIGHT_PI / (s * s)
        ))
    })?;
    for k in 1..=60 {
        let t = t_plus - t_plus * 0.5f64.powi(k);
        if t * g > 0.5 && case1_quadratic(params, lambda, t) < 0.0 {
            return Ok(TGamma { value: t, t_minus, t_plus });
        }
    }
    Err(Error::Infeasible(format!("no t below t+ = {t_plus} satisfies both inequalities strictly")))
}

/// The midpoint of `(max(1/2, t₋), min(1/(2γ), t₊))`, where `t_±` bound
/// `8πt² − λτ(2t − 1) < 0`.
pub fn t_gamma_case2(params: SpeciesParams, lambda: f64) -> Result<TGamma> {
    params.require_two_species()?;
    let (tau, g) = (params.tau(), params.gamma());
    if !(g < 0.5) {
        return Err(Error::Infeasible(format!("gamma = {g} is not below 1/2")));
    }
    let lt = lambda * tau;
    let (t_minus, t_plus) = quadratic_roots(2.0 * lt, lt).ok_or_else(|| {
        Error::Infeasible(format!("lambda = {lambda} does not exceed 8pi/tau = {}", EIGHT_PI / tau))
    })?;
    let lo = t_minus.max(0.5);
    let hi = t_plus.min(0.5 / g);
    if !(lo < hi) {
        return Err(Error::Infeasible(format!("empty interval ({lo}, {hi})")));
    }
    let t = 0.5 * (lo + hi);
    if !(t > 0.5 && t < 0.5 / g && case2_quadratic(params, lambda, t) < 0.0) {
        return Err(Error::Infeasible(format!("midpoint {t} violates its constraints")));
    }
    Ok(TGamma { value: t, t_minus, t_plus })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlowdownCase {
    /// `γ ≥ √τ/(1+√τ)`: both species concentrate.
    Mixed,
    /// `γ < √τ/(1+√τ)`: only the first species concentrates.
    Perturbative,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowdownSummary {
    pub tau: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub t_gamma: f64,
    pub branch: BlowdownCase,
    pub fitted_slope: f64,
    pub predicted_slope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowdownSeries {
    pub deltas: Vec<f64>,
    /// `ln(1/δ²)` per δ.
    pub log_scale: Vec<f64>,
    pub values: Vec<f64>,
    pub summary: BlowdownSummary,
}

impl BlowdownSeries {
    pub fn strictly_decreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] < w[0])
    }

    pub fn slope_error(&self) -> f64 {
        (self.summary.fitted_slope / self.summary.predicted_slope - 1.0).abs()
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["delta", "ln_inv_delta_sq", "J_value"]);
        for i in 0..self.deltas.len() {
            t.push(vec![fmt_f64(self.deltas[i]), fmt_f64(self.log_scale[i]), fmt_f64(self.values[i])]);
        }
        t
    }
}

/// `δ = 2^{−k}` for `k = first..=last`.
pub fn dyadic_deltas(first: i32, last: i32) -> Vec<f64> {
    (first..=last).map(|k| 0.5f64.powi(k)).collect()
}

/// `J^d_λ(t PU_δ) = ½t² ∫|∇PU_δ|² − λτ ln∫e^{tPU_δ} − λ(1−τ) ln∫e^{γtPU_δ}`.
pub fn det_functional_on_bubble(params: SpeciesParams, lambda: f64, t: f64, delta: f64) -> Result<f64> {
    let tau = params.tau();
    let mut j = 0.5 * t * t * gradient_energy(delta)? - lambda * tau * ln_exp_integral(delta, t)?;
    if tau < 1.0 {
        j -= lambda * (1.0 - tau) * ln_exp_integral(delta, params.gamma() * t)?;
    }
    Ok(j)
}

/// Least-squares slope of `y` against `x`.
fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// `J^d_λ(t_γ PU_δ)` along `delta_list`, with `t_γ` chosen by the branch of
/// the critical constant.
///
/// The slope against `ln(1/δ²)` is fitted over the finer half of the list,
/// where the `O(1)` remainders have settled.
pub fn blowdown_series(params: SpeciesParams, lambda: f64, delta_list: &[f64]) -> Result<BlowdownSeries> {
    let crit = critical_lambda_two_species(params)?;
    if !(lambda > crit.value) {
        return Err(Error::Infeasible(format!(
            "lambda = {lambda} does not exceed the critical value {}",
            crit.value
        )));
    }
    if delta_list.len() < 2 {
        return Err(Error::Precondition("need at least two deltas".into()));
    }
    let mut deltas = delta_list.to_vec();
    for &d in &deltas {
        check_delta(d)?;
    }
    deltas.sort_by(|a, b| b.total_cmp(a));
    let (branch, tg) = if params.gamma() >= gamma_threshold(params.tau())? {
        (BlowdownCase::Mixed, t_gamma_case1(params, lambda)?)
    } else {
        (BlowdownCase::Perturbative, t_gamma_case2(params, lambda)?)
    };
    let t = tg.value;
    let predicted_slope = match branch {
        BlowdownCase::Mixed => case1_quadratic(params, lambda, t),
        BlowdownCase::Perturbative => case2_quadratic(params, lambda, t),
    };
    let log_scale: Vec<f64> = deltas.iter().map(|d| -2.0 * d.ln()).collect();
    let values = deltas
        .iter()
        .map(|&d| det_functional_on_bubble(params, lambda, t, d))
        .collect::<Result<Vec<_>>>()?;
    let half = deltas.len() / 2;
    let fitted_slope = fit_slope(&log_scale[half..], &values[half..]);
    Ok(BlowdownSeries {
        deltas,
        log_scale,
        values,
        summary: BlowdownSummary {
            tau: params.tau(),
            gamma: params.gamma(),
            lambda,
            t_gamma: t,
            branch,
            fitted_slope,
            predicted_slope,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_values() {
        assert_eq!(pu_eval(0.3, 1.0).unwrap(), 0.0);
        assert!((pu_eval(1.0, 0.0).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-15);
        let b = Bubble::new(0.1).unwrap();
        let d2 = 0.01f64;
        assert!((b.eval(0.4).unwrap() - (b.unprojected(0.4) - b.unprojected(1.0))).abs() < 1e-13);
        assert!((b.eval(0.0).unwrap() - 2.0 * ((d2 + 1.0) / d2).ln()).abs() < 1e-13);
        assert!(pu_eval(0.0, 0.5).is_err() && pu_eval(0.5, 1.5).is_err());
    }

    #[test]
    fn energy_at_unit_delta() {
        let g = gradient_energy(1.0).unwrap();
        assert!((g - 16.0 * PI * (2f64.ln() - 0.5)).abs() < 1e-12);
        assert!((g - 9.708).abs() < 1e-3);
    }

    #[test]
    fn half_exponent_is_continuous() {
        let d = 1e-3;
        let at = ln_exp_integral(d, 0.5).unwrap();
        let near = ln_exp_integral(d, 0.5 + 1e-9).unwrap();
        assert!((at - near).abs() < 1e-7);
    }

    #[test]
    fn quadratic_root_product() {
        let (m, p) = quadratic_roots(10.0 * EIGHT_PI, EIGHT_PI).unwrap();
        assert!((m * p - 1.0).abs() < 1e-14 && (m + p - 10.0).abs() < 1e-13);
        assert!(quadratic_roots(1.0, 1.0).is_none());
    }
}
