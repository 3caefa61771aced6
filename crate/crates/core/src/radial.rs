//! Radial shooting for `η'' + η'/r = −(a e^η + b e^{γη})`, `η(0) = α`,
//! `η'(0) = 0`.
//!
//! The equation is integrated in `t = ln r`, where with `p = r η'` it reads
//! `η_t = p`, `p_t = −(a e^{2t+η} + b e^{2t+γη})`. The exponents are combined
//! before exponentiation so that very negative `η` at very large `r` never
//! produces `0 · ∞`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{invalid, Error, Result};
use crate::io::{fmt_f64, Table, VERSION};
use crate::ode::{dopri5_step, error_norm, step_factor};
use crate::params::check_gamma;
use crate::roots::bisect;
use crate::samples::{LogNode, RadialSamples};

/// Relative variation of the decay estimate over the final decade below which
/// it is considered converged.
pub const BETA_STABILITY: f64 = 1e-8;

/// Step in `ln r` of the finite-difference Laplacian.
pub const FD_LOG_STEP: f64 = 2e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub a: f64,
    pub b: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub r_max: f64,
    /// Largest step in `t = ln r`; also bounds the node spacing.
    pub max_log_step: f64,
    /// Stop before `r_max` once the decay estimate has been stable over a
    /// full decade.
    pub stop_when_stable: bool,
}

impl ShootingConfig {
    /// The two-term problem with `a = b = 1`.
    pub fn new(alpha: f64, gamma: f64) -> Self {
        Self::with_weights(alpha, gamma, 1.0, 1.0)
    }

    /// The single-exponential problem `a = 1, b = 0`, whose solution is the
    /// Liouville bubble. `gamma` is carried only to keep the config valid.
    pub fn single_exponential(alpha: f64) -> Self {
        Self::with_weights(alpha, 0.5, 1.0, 0.0)
    }

    pub fn with_weights(alpha: f64, gamma: f64, a: f64, b: f64) -> Self {
        let mut cfg = ShootingConfig {
            alpha,
            gamma,
            a,
            b,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            r_max: 0.0,
            max_log_step: 0.05,
            stop_when_stable: false,
        };
        cfg.r_max = cfg.default_r_max();
        cfg
    }

    pub fn tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_r_max(mut self, r_max: f64) -> Self {
        self.r_max = r_max;
        self
    }

    /// `a e^α + b e^{γα}`, the magnitude of the right-hand side at the origin.
    pub fn source_at_origin(&self) -> f64 {
        self.source(self.alpha)
    }

    fn source(&self, eta: f64) -> f64 {
        let mut s = 0.0;
        if self.a > 0.0 {
            s += self.a * eta.exp();
        }
        if self.b > 0.0 {
            s += self.b * (self.gamma * eta).exp();
        }
        s
    }

    /// Radius over which the profile drops by about `ln 2` from its centre.
    pub fn core_radius(&self) -> f64 {
        2.0 / self.source_at_origin().sqrt()
    }

    /// `10⁶` core radii, and at least `10⁶`.
    pub fn default_r_max(&self) -> f64 {
        1e6 * self.core_radius().max(1.0)
    }

    /// Radius of the Taylor seed.
    pub fn seed_radius(&self) -> f64 {
        (1e-4 * self.core_radius()).min(1e-6)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() {
            return Err(invalid("alpha", self.alpha, "must be finite"));
        }
        check_gamma(self.gamma)?;
        if !(self.a >= 0.0 && self.a.is_finite()) {
            return Err(invalid("a", self.a, "must be non-negative"));
        }
        if !(self.b >= 0.0 && self.b.is_finite()) {
            return Err(invalid("b", self.b, "must be non-negative"));
        }
        if self.a + self.b <= 0.0 {
            return Err(invalid("a + b", self.a + self.b, "must be positive"));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1e-2) {
            return Err(invalid("rel_tol", self.rel_tol, "must lie in (0, 1e-2)"));
        }
        if !(self.abs_tol > 0.0) {
            return Err(invalid("abs_tol", self.abs_tol, "must be positive"));
        }
        if !(self.r_max > 1.0 && self.r_max.is_finite()) {
            return Err(invalid("r_max", self.r_max, "must be finite and exceed 1"));
        }
        if self.r_max <= self.seed_radius() {
            return Err(invalid("r_max", self.r_max, "must exceed the seed radius"));
        }
        if !(self.max_log_step > 0.0) {
            return Err(invalid("max_log_step", self.max_log_step, "must be positive"));
        }
        if !self.source_at_origin().is_finite() {
            return Err(invalid("alpha", self.alpha, "source term overflows"));
        }
        Ok(())
    }

    fn rhs(&self) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + '_ {
        move |t, y| {
            let mut s = 0.0;
            if self.a > 0.0 {
                s += self.a * (2.0 * t + y[0]).exp();
            }
            if self.b > 0.0 {
                s += self.b * (2.0 * t + self.gamma * y[0]).exp();
            }
            [y[1], -s]
        }
    }

    /// Weight and coefficient of the slower-decaying term: `(γ, b)` when it
    /// is present, otherwise `(1, a)`.
    fn slow_term(&self) -> (f64, f64) {
        if self.b > 0.0 {
            (self.gamma, self.b)
        } else {
            (1.0, self.a)
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Diagnostics {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evaluations: usize,
    /// Largest scaled error norm among accepted steps (at most 1).
    pub max_error_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaEstimate {
    /// Decay exponent including the analytic far-field closure.
    pub value: f64,
    /// Raw flux `−r η'(r)` at the last node.
    pub flux_at_end: f64,
    /// Relative variation of the estimate over the final decade.
    pub variation: f64,
    pub converged: bool,
}

/// Sampled solution of the shooting problem.
#[derive(Debug)]
pub struct RadialProfile {
    config: ShootingConfig,
    samples: RadialSamples,
    beta: BetaEstimate,
    diagnostics: Diagnostics,
    cumulative: [OnceLock<Vec<f64>>; 2],
}

impl Clone for RadialProfile {
    fn clone(&self) -> Self {
        RadialProfile {
            config: self.config,
            samples: self.samples.clone(),
            beta: self.beta,
            diagnostics: self.diagnostics,
            cumulative: self.cumulative.clone(),
        }
    }
}

/// Integrates the shooting problem up to `config.r_max`.
pub fn integrate(config: &ShootingConfig) -> Result<RadialProfile> {
    config.validate()?;
    let cfg = *config;
    let f = cfg.rhs();
    let r0 = cfg.seed_radius();
    let f0 = cfg.source_at_origin();
    let mut t = r0.ln();
    let t_end = cfg.r_max.ln();
    let mut y = [cfg.alpha - 0.25 * f0 * r0 * r0, -0.5 * f0 * r0 * r0];
    let mut k = f(t, &y);
    let mut nodes = vec![LogNode { t, value: y[0], dt: y[1], dtt: k[1] }];
    let mut closures = vec![closure_beta(&cfg, &nodes[0])];
    let mut diag = Diagnostics { rhs_evaluations: 1, ..Diagnostics::default() };
    let mut h = cfg.max_log_step.min(0.05);
    let decade = std::f64::consts::LN_10;

    while t < t_end {
        let last = t_end - t <= h;
        let step = if last { t_end - t } else { h };
        let s = dopri5_step(&f, t, &y, &k, step);
        diag.rhs_evaluations += 6;
        let err = error_norm(&s.err, &y, &s.y, cfg.rel_tol, cfg.abs_tol);
        if !(s.y[0].is_finite() && s.y[1].is_finite() && err.is_finite()) {
            return Err(Error::NonFinite { radius: (t + step).exp(), eta: s.y[0], flux: s.y[1] });
        }
        if err <= 1.0 {
            t = if last { t_end } else { t + step };
            y = s.y;
            k = s.dy;
            diag.accepted_steps += 1;
            diag.max_error_norm = diag.max_error_norm.max(err);
            let node = LogNode { t, value: y[0], dt: y[1], dtt: k[1] };
            closures.push(closure_beta(&cfg, &node));
            nodes.push(node);
            if cfg.stop_when_stable && t - nodes[0].t > decade {
                let (var, _) = window_variation(&nodes, &closures, decade);
                if var <= BETA_STABILITY {
                    break;
                }
            }
        } else {
            diag.rejected_steps += 1;
        }
        h = (step * step_factor(err)).min(cfg.max_log_step);
        if h < 1e-12 * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { radius: t.exp(), step: h });
        }
    }

    let (variation, _) = window_variation(&nodes, &closures, decade);
    let end = nodes[nodes.len() - 1];
    let beta = BetaEstimate {
        value: closures[closures.len() - 1],
        flux_at_end: -end.dt,
        variation,
        converged: variation <= BETA_STABILITY,
    };
    let samples = RadialSamples::new(cfg.alpha, nodes)?;
    Ok(RadialProfile {
        config: cfg,
        samples,
        beta,
        diagnostics: diag,
        cumulative: [OnceLock::new(), OnceLock::new()],
    })
}

/// Decay exponent implied by the state at `node`, closing the far field
/// analytically.
///
/// With `(w, c)` the slow term, `ψ = wη + 2t` obeys `ψ_tt = −wc e^ψ` once the
/// fast term is negligible, whose first integral gives
/// `wβ = 2 + √((2 + w p)² + 2wc e^ψ)`. The fast term's remaining mass is added
/// from its power-law tail.
fn closure_beta(cfg: &ShootingConfig, node: &LogNode) -> f64 {
    let (w, c) = cfg.slow_term();
    let psi_t = 2.0 + w * node.dt;
    let big_a = c * (2.0 * node.t + w * node.value).exp();
    let beta = (2.0 + (psi_t * psi_t + 2.0 * w * big_a).sqrt()) / w;
    if cfg.a > 0.0 && cfg.b > 0.0 {
        beta + cfg.a * (2.0 * node.t + node.value).exp() / (beta - 2.0)
    } else {
        beta
    }
}

/// Relative spread of `values` over nodes within `span` of the last node.
fn window_variation(nodes: &[LogNode], values: &[f64], span: f64) -> (f64, usize) {
    let t_end = nodes[nodes.len() - 1].t;
    let first = nodes.partition_point(|n| n.t < t_end - span);
    let window = &values[first..];
    let (lo, hi) = window
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let reference = values[values.len() - 1].abs();
    let var = if t_end - nodes[0].t < span || reference == 0.0 {
        f64::INFINITY
    } else {
        (hi - lo) / reference
    };
    (var, first)
}

/// The decay exponent `β = lim −r η'(r)`, or an error carrying the residual
/// variation when it has not stabilised.
pub fn estimate_beta(profile: &RadialProfile) -> Result<f64> {
    let b = profile.beta;
    if b.converged {
        Ok(b.value)
    } else {
        Err(Error::BetaNotConverged { variation: b.variation })
    }
}

impl RadialProfile {
    pub fn config(&self) -> &ShootingConfig {
        &self.config
    }

    pub fn alpha(&self) -> f64 {
        self.config.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.config.gamma
    }

    pub fn beta(&self) -> BetaEstimate {
        self.beta
    }

    pub fn diagnostics(&self) -> Diagnostics {
        self.diagnostics
    }

    pub fn samples(&self) -> &RadialSamples {
        &self.samples
    }

    /// Nodes in log form, excluding the origin.
    pub fn log_nodes(&self) -> &[LogNode] {
        self.samples.nodes()
    }

    /// `(r, η, η')` at the origin followed by every integrator node.
    pub fn nodes(&self) -> Vec<(f64, f64, f64)> {
        self.samples.triples()
    }

    pub fn seed_radius(&self) -> f64 {
        self.samples.nodes()[0].radius()
    }

    pub fn r_end(&self) -> f64 {
        self.samples.r_end()
    }

    pub fn eta_end(&self) -> f64 {
        let n = self.samples.nodes();
        n[n.len() - 1].value
    }

    /// `(η(r), η'(r))`. Exact at nodes; between nodes a single integrator
    /// step is taken from the preceding node, so the accuracy matches the
    /// integration itself.
    pub fn eval(&self, r: f64) -> Result<(f64, f64)> {
        let r_end = self.r_end();
        if !(r >= 0.0 && r <= r_end * (1.0 + 4.0 * f64::EPSILON)) {
            return Err(Error::OutOfRange { radius: r, r_max: r_end });
        }
        if r == 0.0 {
            return Ok((self.config.alpha, 0.0));
        }
        let (eta, p) = self.eval_log(r.ln());
        Ok((eta, p / r))
    }

    /// `(η, r η')` at `t` by a single integrator step from node `i`, in
    /// either direction.
    fn eval_log_from(&self, i: usize, t: f64) -> (f64, f64) {
        let n = &self.samples.nodes()[i];
        if t == n.t {
            return (n.value, n.dt);
        }
        let f = self.config.rhs();
        let s = dopri5_step(&f, n.t, &[n.value, n.dt], &[n.dt, n.dtt], t - n.t);
        (s.y[0], s.y[1])
    }

    /// `η'' + η'/r` at `r`, by a five-point difference in `t = ln r` of the
    /// flux `r η'`, with every stencil point integrated from the same node so
    /// that the differenced function is smooth.
    pub fn laplacian_fd(&self, r: f64) -> Result<f64> {
        let nodes = self.samples.nodes();
        let r_end = self.r_end();
        if !(r > 0.0 && r <= r_end) {
            return Err(Error::OutOfRange { radius: r, r_max: r_end });
        }
        let t = r.ln();
        let i = nodes.partition_point(|n| n.t <= t).clamp(1, nodes.len()) - 1;
        let h = FD_LOG_STEP;
        let p = |k: f64| self.eval_log_from(i, t + k * h).1;
        let d = (-p(2.0) + 8.0 * p(1.0) - 8.0 * p(-1.0) + p(-2.0)) / (12.0 * h);
        Ok(d / (r * r))
    }

    /// Relative residual `|η'' + η'/r + a e^η + b e^{γη}| / (a e^η + b e^{γη})`
    /// at `r > 0`, with the Laplacian from [`laplacian_fd`](Self::laplacian_fd).
    pub fn ode_residual(&self, r: f64) -> Result<f64> {
        let lap = self.laplacian_fd(r)?;
        let f = self.config.source(self.eval(r)?.0);
        Ok((lap + f).abs() / f)
    }

    /// `(η, r η')` at `t = ln r`, for `t` not beyond the last node.
    fn eval_log(&self, t: f64) -> (f64, f64) {
        let nodes = self.samples.nodes();
        if t < nodes[0].t {
            let f0 = self.config.source_at_origin();
            let r2 = (2.0 * t).exp();
            return (self.config.alpha - 0.25 * f0 * r2, -0.5 * f0 * r2);
        }
        let i = nodes.partition_point(|n| n.t <= t) - 1;
        let n = &nodes[i];
        if t == n.t || i == nodes.len() - 1 {
            return (n.value, n.dt);
        }
        let f = self.config.rhs();
        let s = dopri5_step(&f, n.t, &[n.value, n.dt], &[n.dt, n.dtt], t - n.t);
        (s.y[0], s.y[1])
    }

    /// `η''(r)` from the equation itself at `r > 0`.
    pub fn second_derivative(&self, r: f64) -> Result<f64> {
        let (eta, d) = self.eval(r)?;
        Ok(-self.config.source(eta) - d / r)
    }

    /// `a e^η + b e^{γη}` at the value `eta`.
    pub fn source_at(&self, eta: f64) -> f64 {
        self.config.source(eta)
    }

    fn cumulative(&self, slot: usize, w: f64) -> Result<&[f64]> {
        if let Some(c) = self.cumulative[slot].get() {
            return Ok(c);
        }
        let c = self.samples.cumulative_exp(w)?;
        Ok(self.cumulative[slot].get_or_init(|| c))
    }

    fn weight_slot(&self, w: f64) -> Result<usize> {
        if w == 1.0 {
            Ok(0)
        } else if w == self.config.gamma {
            Ok(1)
        } else {
            Err(Error::Precondition(format!(
                "exponent weight {w} must be 1 or gamma = {}",
                self.config.gamma
            )))
        }
    }

    /// `∫₀^R e^{w η(r)} r dr` for `w ∈ {1, γ}` (without the factor `2π`).
    pub fn integral_exp(&self, w: f64, r: f64) -> Result<f64> {
        let slot = self.weight_slot(w)?;
        let cum = self.cumulative(slot, w)?;
        self.samples.integral_exp_cached(w, cum, r)
    }

    /// `2π ∫₀^R e^{w η(r)} r dr` for `w ∈ {1, γ}`.
    pub fn partial_mass(&self, w: f64, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::OutOfRange { radius: r, r_max: self.r_end() });
        }
        Ok(2.0 * std::f64::consts::PI * self.integral_exp(w, r)?)
    }

    /// The radius `R` with `partial_mass(w, R) = target`.
    pub fn radius_for_partial_mass(&self, w: f64, target: f64) -> Result<f64> {
        let slot = self.weight_slot(w)?;
        let cum = self.cumulative(slot, w)?;
        let goal = target / (2.0 * std::f64::consts::PI);
        let total = cum[cum.len() - 1];
        if !(goal > 0.0) {
            return Err(invalid("target", target, "must be positive"));
        }
        if goal > total {
            return Err(Error::Infeasible(format!(
                "partial mass {target} exceeds the profile total {}",
                2.0 * std::f64::consts::PI * total
            )));
        }
        let nodes = self.samples.nodes();
        let k = cum.partition_point(|&c| c < goal);
        let (lo, hi) = if k == 0 {
            (self.seed_radius() * 1e-6, nodes[0].t.exp())
        } else {
            (nodes[k - 1].radius(), nodes[k].radius())
        };
        let (tl, th) = (lo.ln(), hi.ln());
        let t = bisect(
            |t: f64| {
                let r = t.exp().min(self.r_end());
                self.samples.integral_exp_cached(w, cum, r).map_or(f64::NAN, |v| v - goal)
            },
            tl,
            th,
            1e-15,
        )?;
        Ok(t.exp().min(self.r_end()))
    }

    /// The radius where `η` equals `level`, to relative accuracy near `1e-14`.
    pub fn radius_at_level(&self, level: f64) -> Result<f64> {
        let alpha = self.config.alpha;
        if level > alpha {
            return Err(Error::AlphaBelowBoundary { alpha, beta: level });
        }
        if level == alpha {
            return Ok(0.0);
        }
        let nodes = self.samples.nodes();
        if level < self.eta_end() {
            return Err(Error::ProfileTooShort { eta_end: self.eta_end(), target: level });
        }
        if level >= nodes[0].value {
            return Ok(2.0 * ((alpha - level) / self.config.source_at_origin()).sqrt());
        }
        let k = nodes.partition_point(|n| n.value > level);
        if nodes[k].value == level {
            return Ok(nodes[k].radius());
        }
        let t = bisect(|t| self.eval_log(t).0 - level, nodes[k - 1].t, nodes[k].t, 1e-15)?;
        Ok(t.exp())
    }

    /// Columnar text form: metadata lines, then `r,eta,eta_prime`.
    pub fn to_table(&self) -> Table {
        let c = &self.config;
        let mut t = Table::new(&["r", "eta", "eta_prime"])
            .with_meta("format", "meanfield radial profile")
            .with_meta("version", VERSION)
            .with_meta("alpha", fmt_f64(c.alpha))
            .with_meta("gamma", fmt_f64(c.gamma))
            .with_meta("a", fmt_f64(c.a))
            .with_meta("b", fmt_f64(c.b))
            .with_meta("rel_tol", fmt_f64(c.rel_tol))
            .with_meta("abs_tol", fmt_f64(c.abs_tol))
            .with_meta("r_max", fmt_f64(c.r_max))
            .with_meta("beta", fmt_f64(self.beta.value))
            .with_meta("beta_flux_end", fmt_f64(self.beta.flux_at_end))
            .with_meta("beta_variation", fmt_f64(self.beta.variation))
            .with_meta("beta_converged", self.beta.converged);
        for (r, eta, d) in self.nodes() {
            t.push_f64(&[r, eta, d]);
        }
        t
    }
}

/// A parsed profile file.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTable {
    pub config: ShootingConfig,
    pub beta: f64,
    pub nodes: Vec<(f64, f64, f64)>,
}

impl ProfileTable {
    pub fn parse(text: &str) -> Result<Self> {
        let t = Table::parse(text)?;
        let mut config = ShootingConfig::with_weights(
            t.meta_f64("alpha")?,
            t.meta_f64("gamma")?,
            t.meta_f64("a")?,
            t.meta_f64("b")?,
        )
        .tolerances(t.meta_f64("rel_tol")?, t.meta_f64("abs_tol")?);
        config.r_max = t.meta_f64("r_max")?;
        let (r, eta, d) = (t.column("r")?, t.column("eta")?, t.column("eta_prime")?);
        Ok(ProfileTable {
            config,
            beta: t.meta_f64("beta")?,
            nodes: r.into_iter().zip(eta).zip(d).map(|((a, b), c)| (a, b, c)).collect(),
        })
    }
}

/// Profiles of one family `(γ, a, b, tolerances)` indexed by `α`, computed
/// on demand and shared.
#[derive(Debug)]
pub struct ShootingFamily {
    template: ShootingConfig,
    cache: Mutex<HashMap<u64, Arc<RadialProfile>>>,
}

impl ShootingFamily {
    pub fn new(gamma: f64) -> Self {
        Self::from_template(ShootingConfig::new(0.0, gamma))
    }

    pub fn single_exponential() -> Self {
        Self::from_template(ShootingConfig::single_exponential(0.0))
    }

    /// Family sharing every setting of `template` except `alpha` and `r_max`
    /// (which follows the default for each `α`).
    pub fn from_template(template: ShootingConfig) -> Self {
        ShootingFamily { template, cache: Mutex::new(HashMap::new()) }
    }

    pub fn gamma(&self) -> f64 {
        self.template.gamma
    }

    pub fn template(&self) -> &ShootingConfig {
        &self.template
    }

    pub fn config(&self, alpha: f64) -> ShootingConfig {
        let mut c = self.template;
        c.alpha = alpha;
        c.r_max = c.default_r_max();
        c
    }

    pub fn profile(&self, alpha: f64) -> Result<Arc<RadialProfile>> {
        let key = alpha.to_bits();
        if let Some(p) = self.cache.lock().expect("cache poisoned").get(&key) {
            return Ok(Arc::clone(p));
        }
        let p = Arc::new(integrate(&self.config(alpha))?);
        let mut cache = self.cache.lock().expect("cache poisoned");
        Ok(Arc::clone(cache.entry(key).or_insert(p)))
    }
}
