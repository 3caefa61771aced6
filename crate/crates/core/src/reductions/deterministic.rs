use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use super::record::{SolutionKind, SolutionRecord};
use crate::error::{invalid, Error, Result};
use crate::io::{fmt_f64, Table};
use crate::masses::compute_masses;
use crate::params::{SpeciesParams, EIGHT_PI};
use crate::radial::{integrate, RadialProfile, ShootingFamily};
use crate::roots::bisect;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub alpha_min: f64,
    pub alpha_max: f64,
    /// Uniform seeds on `[alpha_min, alpha_max]`.
    pub seeds: usize,
    /// Geometric seeds `α_edge + 10^k`, `k ∈ [−10, 1]`, added next to the
    /// feasibility edge.
    pub edge_seeds: usize,
    pub residual_tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { alpha_min: -40.0, alpha_max: 40.0, seeds: 161, edge_seeds: 45, residual_tol: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NotFoundReason {
    /// `λτ ≥ 8π`: no profile carries that much first-species mass.
    MassBound,
    /// `m₁(α) ≤ λτ` on the whole scanned range.
    NoFeasibleAlpha,
    /// `h` keeps one sign on the feasible part of the range.
    NoSignChange,
    /// Sign changes were refined but no root met the residual tolerance.
    ResidualTooLarge,
}

impl fmt::Display for NotFoundReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NotFoundReason::MassBound => "lambda*tau >= 8*pi",
            NotFoundReason::NoFeasibleAlpha => "m1(alpha) <= lambda*tau on the scanned range",
            NotFoundReason::NoSignChange => "no sign change of h",
            NotFoundReason::ResidualTooLarge => "no refined root met the residual tolerance",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NotFound {
    pub params: SpeciesParams,
    pub lambda: f64,
    pub alpha_range: (f64, f64),
    /// Run-length signs of `h` along the scan, e.g. `-{150}`.
    pub sign_pattern: String,
    /// Smallest `|h|` seen; `NaN` when `h` was never evaluated.
    pub min_abs_h: f64,
    pub reason: NotFoundReason,
}

#[derive(Debug, Clone)]
pub struct DetSolution {
    pub record: SolutionRecord,
    /// `(|P₁(R) − λτ|, |P_γ(R) − λ(1−τ)γ|)`.
    pub residuals: (f64, f64),
    /// Every refined root `α` of `h`, in increasing order.
    pub roots: Vec<f64>,
    pub sign_pattern: String,
}

#[derive(Debug, Clone)]
pub enum DetOutcome {
    Found(Box<DetSolution>),
    NotFound(NotFound),
}

impl DetOutcome {
    pub fn solution(&self) -> Option<&DetSolution> {
        match self {
            DetOutcome::Found(s) => Some(s),
            DetOutcome::NotFound(_) => None,
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, DetOutcome::Found(_))
    }
}

pub fn find_deterministic_solution(params: SpeciesParams, lambda: f64) -> Result<DetOutcome> {
    let family = if params.is_standard() {
        ShootingFamily::single_exponential()
    } else {
        ShootingFamily::new(params.gamma())
    };
    find_deterministic_solution_with(&family, params, lambda, &ScanOptions::default())
}

fn sign_char(x: f64) -> char {
    if x > 0.0 {
        '+'
    } else if x < 0.0 {
        '-'
    } else {
        '0'
    }
}

fn run_length(signs: &[char]) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < signs.len() {
        let mut j = i;
        while j < signs.len() && signs[j] == signs[i] {
            j += 1;
        }
        out.push_str(&format!("{}{{{}}}", signs[i], j - i));
        i = j;
    }
    out
}

struct Problem<'a> {
    family: &'a ShootingFamily,
    target1: f64,
    target2: f64,
}

impl Problem<'_> {
    /// `h(α)` with the profile it was computed from and `R₁(α)`. `None` when
    /// `R₁` lies beyond the integrated range.
    fn h_of(&self, profile: &RadialProfile) -> Result<Option<(f64, f64)>> {
        let r1 = match profile.radius_for_partial_mass(1.0, self.target1) {
            Ok(r) => r,
            Err(Error::Infeasible(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        let h = profile.partial_mass(self.family.gamma(), r1)? - self.target2;
        Ok(Some((h, r1)))
    }

    fn m1(&self, alpha: f64) -> Result<f64> {
        Ok(compute_masses(&*self.family.profile(alpha)?)?.m1)
    }

    /// Uncached: used inside bisection, where each `α` is visited once.
    fn fresh(&self, alpha: f64) -> Result<RadialProfile> {
        integrate(&self.family.config(alpha))
    }
}

pub fn find_deterministic_solution_with(
    family: &ShootingFamily,
    params: SpeciesParams,
    lambda: f64,
    opts: &ScanOptions,
) -> Result<DetOutcome> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid("lambda", lambda, "must be positive and finite"));
    }
    if !(opts.alpha_min < opts.alpha_max) || opts.seeds < 2 {
        return Err(Error::Precondition("scan range must be non-empty with at least two seeds".into()));
    }
    let tau = params.tau();
    let not_found = |pattern: String, min_abs_h: f64, reason| {
        DetOutcome::NotFound(NotFound {
            params,
            lambda,
            alpha_range: (opts.alpha_min, opts.alpha_max),
            sign_pattern: pattern,
            min_abs_h,
            reason,
        })
    };
    if lambda * tau >= EIGHT_PI {
        return Ok(not_found(String::new(), f64::NAN, NotFoundReason::MassBound));
    }
    if params.is_standard() {
        return standard_solution(family, params, lambda, opts);
    }
    if family.template().b != 1.0 || family.template().a != 1.0 || family.gamma() != params.gamma() {
        return Err(Error::Precondition("family must be the two-term problem with the params' gamma".into()));
    }

    let prob = Problem { family, target1: lambda * tau, target2: lambda * (1.0 - tau) * params.gamma() };

    // Feasibility edge: m₁ increases with α.
    let (lo, hi) = (opts.alpha_min, opts.alpha_max);
    let m_lo = prob.m1(lo)? - prob.target1;
    let m_hi = prob.m1(hi)? - prob.target1;
    if m_hi <= 0.0 {
        return Ok(not_found(String::new(), f64::NAN, NotFoundReason::NoFeasibleAlpha));
    }
    let edge = if m_lo > 0.0 {
        None
    } else {
        let a = bisect(
            |a| {
                prob.fresh(a)
                    .and_then(|p| compute_masses(&p))
                    .map_or(f64::NAN, |m| m.m1 - prob.target1)
            },
            lo,
            hi,
            1e-13,
        )?;
        Some(a)
    };

    let mut seeds: Vec<f64> = (0..opts.seeds)
        .map(|i| lo + (hi - lo) * i as f64 / (opts.seeds - 1) as f64)
        .collect();
    let mut edge_value = None;
    if let Some(a0) = edge {
        seeds.retain(|&a| a > a0);
        let n = opts.edge_seeds;
        for i in 0..n {
            let k = if n == 1 { -10.0 } else { -10.0 + 11.0 * i as f64 / (n - 1) as f64 };
            let a = a0 + 10f64.powf(k);
            if a < hi {
                seeds.push(a);
            }
        }
        // As α ↓ α_edge, R₁ → ∞ and h → m_γ(α_edge) − λ(1−τ)γ.
        let p = prob.fresh(a0)?;
        let h_edge = compute_masses(&p)?.m_gamma - prob.target2;
        if h_edge.abs() > 1e-7 * lambda {
            edge_value = Some((a0, h_edge));
        }
    }
    seeds.sort_by(f64::total_cmp);
    seeds.dedup();

    let evaluated: Vec<Result<Option<(f64, f64)>>> = seeds
        .par_iter()
        .map(|&a| {
            let p = if edge.is_some_and(|e| a - e < 1.0) { Arc::new(prob.fresh(a)?) } else { family.profile(a)? };
            Ok(prob.h_of(&p)?.map(|(h, _)| (a, h)))
        })
        .collect();
    let mut samples: Vec<(f64, f64)> = Vec::new();
    if let Some(e) = edge_value {
        samples.push(e);
    }
    for r in evaluated {
        if let Some(s) = r? {
            samples.push(s);
        }
    }
    let signs: Vec<char> = samples.iter().map(|s| sign_char(s.1)).collect();
    let pattern = run_length(&signs);
    let min_abs_h = samples.iter().map(|s| s.1.abs()).fold(f64::INFINITY, f64::min);

    // Refine every sign change. Between the edge and the first seed, `h` may
    // be undefined where R₁ runs past the profile; there it takes the edge
    // sign.
    let edge_sign = edge_value.map(|e| e.1);
    let h_at = |a: f64| -> f64 {
        match prob.fresh(a).and_then(|p| prob.h_of(&p)) {
            Ok(Some((h, _))) => h,
            Ok(None) => edge_sign.unwrap_or(f64::NAN),
            Err(_) => f64::NAN,
        }
    };
    let brackets: Vec<(f64, f64)> = samples
        .windows(2)
        .filter(|w| w[0].1 == 0.0 || w[0].1.signum() != w[1].1.signum())
        .map(|w| (w[0].0, w[1].0))
        .collect();
    let roots: Vec<f64> = brackets
        .par_iter()
        .map(|&(a, b)| bisect(h_at, a, b, 1e-14 * a.abs().max(1.0)))
        .collect::<Result<Vec<_>>>()?;
    if roots.is_empty() {
        return Ok(not_found(pattern, min_abs_h, NotFoundReason::NoSignChange));
    }

    for &alpha in &roots {
        let profile = Arc::new(prob.fresh(alpha)?);
        let Some((h, r1)) = prob.h_of(&profile)? else { continue };
        let res1 = (profile.partial_mass(1.0, r1)? - prob.target1).abs();
        let res2 = h.abs();
        if res1 <= opts.residual_tol && res2 <= opts.residual_tol {
            let shift = profile.eval(r1)?.0;
            let record =
                SolutionRecord::from_profile(SolutionKind::Deterministic, params, lambda, profile, r1, shift)?;
            return Ok(DetOutcome::Found(Box::new(DetSolution {
                record,
                residuals: (res1, res2),
                roots,
                sign_pattern: pattern,
            })));
        }
    }
    Ok(not_found(pattern, min_abs_h, NotFoundReason::ResidualTooLarge))
}

/// `τ = 1`: the Liouville profile is unique up to scaling, so one `α` serves
/// every `λ < 8π`.
fn standard_solution(
    family: &ShootingFamily,
    params: SpeciesParams,
    lambda: f64,
    opts: &ScanOptions,
) -> Result<DetOutcome> {
    let alpha = 8f64.ln();
    let profile = match family.template().b {
        b if b == 0.0 => family.profile(alpha)?,
        _ => Arc::new(integrate(&crate::radial::ShootingConfig::single_exponential(alpha))?),
    };
    let r = profile.radius_for_partial_mass(1.0, lambda)?;
    let res1 = (profile.partial_mass(1.0, r)? - lambda).abs();
    if res1 > opts.residual_tol {
        return Ok(DetOutcome::NotFound(NotFound {
            params,
            lambda,
            alpha_range: (alpha, alpha),
            sign_pattern: String::new(),
            min_abs_h: res1,
            reason: NotFoundReason::ResidualTooLarge,
        }));
    }
    let shift = profile.eval(r)?.0;
    let record = SolutionRecord::from_profile(SolutionKind::Deterministic, params, lambda, profile, r, shift)?;
    Ok(DetOutcome::Found(Box::new(DetSolution {
        record,
        residuals: (res1, 0.0),
        roots: vec![alpha],
        sign_pattern: String::new(),
    })))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExistenceRow {
    pub tau: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub found: bool,
    /// `0` for found rows.
    pub min_abs_h: f64,
    pub alpha: Option<f64>,
    pub radius: Option<f64>,
}

impl ExistenceRow {
    pub fn from_outcome(params: SpeciesParams, lambda: f64, outcome: &DetOutcome) -> Self {
        let mut row = ExistenceRow {
            tau: params.tau(),
            gamma: params.gamma(),
            lambda,
            found: false,
            min_abs_h: 0.0,
            alpha: None,
            radius: None,
        };
        match outcome {
            DetOutcome::Found(s) => {
                row.found = true;
                row.alpha = Some(s.record.alpha);
                row.radius = Some(s.record.radius);
            }
            DetOutcome::NotFound(n) => row.min_abs_h = n.min_abs_h,
        }
        row
    }

    pub fn csv_columns() -> [&'static str; 7] {
        ["tau", "gamma", "lambda", "found", "min_abs_h", "alpha", "R"]
    }

    pub fn csv_row(&self) -> Vec<String> {
        vec![
            fmt_f64(self.tau),
            fmt_f64(self.gamma),
            fmt_f64(self.lambda),
            self.found.to_string(),
            fmt_f64(self.min_abs_h),
            self.alpha.map_or(String::new(), fmt_f64),
            self.radius.map_or(String::new(), fmt_f64),
        ]
    }
}

pub fn existence_table(rows: &[ExistenceRow]) -> Table {
    let mut t = Table::new(&ExistenceRow::csv_columns());
    for r in rows {
        t.push(r.csv_row());
    }
    t
}

/// One row per `λ`, computed in parallel over a shared profile family.
pub fn deterministic_existence_scan(params: SpeciesParams, lambda_grid: &[f64]) -> Result<Vec<ExistenceRow>> {
    let family = if params.is_standard() {
        ShootingFamily::single_exponential()
    } else {
        ShootingFamily::new(params.gamma())
    };
    deterministic_existence_scan_with(&family, params, lambda_grid, &ScanOptions::default())
}

pub fn deterministic_existence_scan_with(
    family: &ShootingFamily,
    params: SpeciesParams,
    lambda_grid: &[f64],
    opts: &ScanOptions,
) -> Result<Vec<ExistenceRow>> {
    if lambda_grid.is_empty() {
        return Err(Error::Precondition("lambda grid is empty".into()));
    }
    lambda_grid
        .par_iter()
        .map(|&lam| {
            let out = find_deterministic_solution_with(family, params, lam, opts)?;
            Ok(ExistenceRow::from_outcome(params, lam, &out))
        })
        .collect()
}
