//! Radial samples stored on a logarithmic grid.
//!
//! A sampled radial function is kept as nodes in `t = ln r` carrying the
//! value, its first `t`-derivative `p = r v'(r)` and its second
//! `t`-derivative. Between nodes the function is the quintic Hermite
//! interpolant in `t`; inside the first node it is the quadratic
//! `v(0) + c r²` fixed by the first node's value.

use crate::error::{Error, Result};
use crate::quadrature::gl8_refined;

/// Relative tolerance for the panel refinement of node-interval integrals.
pub const QUAD_REL_TOL: f64 = 1e-12;

/// One node of a sampled radial function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNode {
    /// `ln r`.
    pub t: f64,
    /// `v(r)`.
    pub value: f64,
    /// `dv/dt = r v'(r)`.
    pub dt: f64,
    /// `d²v/dt²`.
    pub dtt: f64,
}

impl LogNode {
    pub fn radius(&self) -> f64 {
        self.t.exp()
    }

    /// `v'(r)`.
    pub fn derivative(&self) -> f64 {
        self.dt * (-self.t).exp()
    }

    /// Node built from radial quantities `v`, `v'`, `v''` at `r > 0`.
    pub fn from_radial(r: f64, v: f64, dv: f64, ddv: f64) -> Self {
        LogNode {
            t: r.ln(),
            value: v,
            dt: r * dv,
            dtt: r * r * ddv + r * dv,
        }
    }
}

/// Quintic Hermite coefficients in `s ∈ [0, 1]` for an interval of length `h`.
fn quintic(n0: &LogNode, n1: &LogNode) -> [f64; 6] {
    let h = n1.t - n0.t;
    let (d0, d1) = (h * n0.dt, h * n1.dt);
    let (q0, q1) = (h * h * n0.dtt, h * h * n1.dtt);
    let delta = n1.value - n0.value;
    [
        n0.value,
        d0,
        0.5 * q0,
        10.0 * delta - 6.0 * d0 - 4.0 * d1 - 1.5 * q0 + 0.5 * q1,
        -15.0 * delta + 8.0 * d0 + 7.0 * d1 + 1.5 * q0 - q1,
        6.0 * delta - 3.0 * (d0 + d1) - 0.5 * q0 + 0.5 * q1,
    ]
}

fn horner(c: &[f64; 6], s: f64) -> (f64, f64) {
    let v = c[0] + s * (c[1] + s * (c[2] + s * (c[3] + s * (c[4] + s * c[5]))));
    let dv = c[1] + s * (2.0 * c[2] + s * (3.0 * c[3] + s * (4.0 * c[4] + s * 5.0 * c[5])));
    (v, dv)
}

/// A radial function sampled at log-spaced nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSamples {
    center: f64,
    nodes: Vec<LogNode>,
}

impl RadialSamples {
    /// Builds samples from the value at the origin and nodes with strictly
    /// increasing `t`.
    pub fn new(center: f64, nodes: Vec<LogNode>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidParameter {
                name: "nodes",
                value: 0.0,
                reason: "at least one node is required".into(),
            });
        }
        if !center.is_finite() {
            return Err(Error::NonFiniteIntegrand("center value"));
        }
        for n in &nodes {
            if !(n.t.is_finite() && n.value.is_finite() && n.dt.is_finite() && n.dtt.is_finite()) {
                return Err(Error::NonFiniteIntegrand("sample node"));
            }
        }
        if let Some(w) = nodes.windows(2).find(|w| w[1].t <= w[0].t) {
            return Err(Error::InvalidParameter {
                name: "radius",
                value: w[1].radius(),
                reason: "node radii must be strictly increasing".into(),
            });
        }
        Ok(RadialSamples { center, nodes })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn nodes(&self) -> &[LogNode] {
        &self.nodes
    }

    pub fn r_end(&self) -> f64 {
        self.nodes[self.nodes.len() - 1].radius()
    }

    fn head_curvature(&self) -> f64 {
        let n = &self.nodes[0];
        (n.value - self.center) * (-2.0 * n.t).exp()
    }

    /// Index `i` with `nodes[i].t ≤ t < nodes[i + 1].t`, clamped to the last
    /// interval.
    fn interval(&self, t: f64) -> usize {
        let k = self.nodes.partition_point(|n| n.t <= t);
        k.saturating_sub(1).min(self.nodes.len().saturating_sub(2))
    }

    /// Interpolated `(v, v')` at `r`, for `0 ≤ r ≤ r_end`.
    pub fn eval(&self, r: f64) -> Result<(f64, f64)> {
        let r_end = self.r_end();
        if !(0.0..=r_end * (1.0 + 4.0 * f64::EPSILON)).contains(&r) {
            return Err(Error::OutOfRange { radius: r, r_max: r_end });
        }
        if r == 0.0 {
            return Ok((self.center, 0.0));
        }
        let t = r.ln();
        if t < self.nodes[0].t || self.nodes.len() == 1 {
            let c = self.head_curvature();
            return Ok((self.center + c * r * r, 2.0 * c * r));
        }
        let i = self.interval(t);
        let (n0, n1) = (&self.nodes[i], &self.nodes[i + 1]);
        for n in [n0, n1] {
            if t == n.t {
                return Ok((n.value, n.dt / r));
            }
        }
        let h = n1.t - n0.t;
        let (v, dv) = horner(&quintic(n0, n1), (t - n0.t) / h);
        Ok((v, dv / h / r))
    }

    /// `∫₀^{r_end} f(v, p, t) dt` over the node intervals up to `r_end`, plus
    /// the supplied head contribution on `[0, r_first]`.
    fn integrate_log<F: FnMut(f64, f64, f64) -> f64>(&self, r_end: f64, mut f: F) -> Result<f64> {
        let t_end = r_end.ln();
        let mut acc = 0.0;
        for w in self.nodes.windows(2) {
            let (n0, n1) = (&w[0], &w[1]);
            if n0.t >= t_end {
                break;
            }
            let hi = n1.t.min(t_end);
            let h = n1.t - n0.t;
            let c = quintic(n0, n1);
            let mut g = |t: f64| {
                let (v, dv) = horner(&c, (t - n0.t) / h);
                f(v, dv / h, t)
            };
            acc += gl8_refined(&mut g, n0.t, hi, QUAD_REL_TOL);
        }
        if !acc.is_finite() {
            return Err(Error::NonFiniteIntegrand("log-grid quadrature"));
        }
        Ok(acc)
    }

    fn exp_head(&self, w: f64, r: f64) -> f64 {
        let c = self.head_curvature();
        let x = w * c * r * r;
        if x == 0.0 {
            0.5 * r * r * (w * self.center).exp()
        } else {
            (w * self.center).exp() * x.exp_m1() / (2.0 * w * c)
        }
    }

    fn exp_interval(&self, w: f64, i: usize, t_hi: f64) -> f64 {
        let (n0, n1) = (&self.nodes[i], &self.nodes[i + 1]);
        let h = n1.t - n0.t;
        let c = quintic(n0, n1);
        let mut g = |t: f64| (w * horner(&c, (t - n0.t) / h).0 + 2.0 * t).exp();
        gl8_refined(&mut g, n0.t, t_hi, QUAD_REL_TOL)
    }

    /// `∫₀^{R} e^{w v(r)} r dr`.
    pub fn integral_exp(&self, w: f64, r_end: f64) -> Result<f64> {
        self.check_radius(r_end)?;
        if r_end == 0.0 {
            return Ok(0.0);
        }
        let head = self.exp_head(w, self.nodes[0].radius().min(r_end));
        let body = self.integrate_log(r_end, |v, _, t| (w * v + 2.0 * t).exp())?;
        Ok(head + body)
    }

    /// `∫₀^{r_i} e^{w v(r)} r dr` at every node `i`.
    pub fn cumulative_exp(&self, w: f64) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut acc = self.exp_head(w, self.nodes[0].radius());
        out.push(acc);
        for i in 0..self.nodes.len() - 1 {
            acc += self.exp_interval(w, i, self.nodes[i + 1].t);
            out.push(acc);
        }
        if !acc.is_finite() {
            return Err(Error::NonFiniteIntegrand("cumulative exponential integral"));
        }
        Ok(out)
    }

    /// `∫₀^{R} e^{w v(r)} r dr` using node totals from [`cumulative_exp`](Self::cumulative_exp).
    pub fn integral_exp_cached(&self, w: f64, cumulative: &[f64], r_end: f64) -> Result<f64> {
        self.check_radius(r_end)?;
        if r_end == 0.0 {
            return Ok(0.0);
        }
        let t = r_end.ln();
        if t <= self.nodes[0].t {
            return Ok(self.exp_head(w, r_end));
        }
        let k = self.nodes.partition_point(|n| n.t <= t) - 1;
        if k == self.nodes.len() - 1 || t == self.nodes[k].t {
            return Ok(cumulative[k]);
        }
        Ok(cumulative[k] + self.exp_interval(w, k, t))
    }

    /// `∫₀^{R} v'(r)² r dr`.
    pub fn integral_grad_sq(&self, r_end: f64) -> Result<f64> {
        self.check_radius(r_end)?;
        if r_end == 0.0 {
            return Ok(0.0);
        }
        let r1 = self.nodes[0].radius().min(r_end);
        let c = self.head_curvature();
        let head = c * c * r1.powi(4);
        let body = self.integrate_log(r_end, |_, p, _| p * p)?;
        Ok(head + body)
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        let r_end = self.r_end();
        if !(0.0..=r_end * (1.0 + 4.0 * f64::EPSILON)).contains(&r) {
            return Err(Error::OutOfRange { radius: r, r_max: r_end });
        }
        Ok(())
    }

    /// Samples of `u(r) = scale · (v(ρ r) − shift)` restricted to
    /// `r ≤ r_end`, where `end` is the node of `v` at `ρ · r_end`.
    pub fn rescaled(&self, rho: f64, shift: f64, scale: f64, r_end: f64, end: LogNode) -> Result<Self> {
        let t_cut = (rho * r_end).ln();
        let ln_rho = rho.ln();
        let map = |n: &LogNode| LogNode {
            t: n.t - ln_rho,
            value: scale * (n.value - shift),
            dt: scale * n.dt,
            dtt: scale * n.dtt,
        };
        let mut nodes: Vec<LogNode> = self
            .nodes
            .iter()
            .take_while(|n| n.t < t_cut * (1.0 - 1e-15) - 1e-15)
            .map(map)
            .collect();
        let mut last = map(&end);
        last.t = r_end.ln();
        if let Some(prev) = nodes.last() {
            // Coincident or nearly coincident nodes would make the final
            // Hermite interval degenerate.
            if last.t - prev.t < 1e-9 {
                nodes.pop();
            }
        }
        nodes.push(last);
        RadialSamples::new(scale * (self.center - shift), nodes)
    }

    /// `k · v` with the same nodes.
    pub fn scaled(&self, k: f64) -> Self {
        RadialSamples {
            center: k * self.center,
            nodes: self
                .nodes
                .iter()
                .map(|n| LogNode {
                    t: n.t,
                    value: k * n.value,
                    dt: k * n.dt,
                    dtt: k * n.dtt,
                })
                .collect(),
        }
    }

    /// The same function with the radial variable rescaled: `u(y) = v(y/ρ) + shift`.
    pub fn dilated(&self, rho: f64, shift: f64) -> Self {
        let ln_rho = rho.ln();
        RadialSamples {
            center: self.center + shift,
            nodes: self
                .nodes
                .iter()
                .map(|n| LogNode {
                    t: n.t + ln_rho,
                    value: n.value + shift,
                    dt: n.dt,
                    dtt: n.dtt,
                })
                .collect(),
        }
    }

    /// `(r, v, v')` triples, starting with the origin.
    pub fn triples(&self) -> Vec<(f64, f64, f64)> {
        std::iter::once((0.0, self.center, 0.0))
            .chain(self.nodes.iter().map(|n| (n.radius(), n.value, n.derivative())))
            .collect()
    }

    /// Samples of a function given in closed form by `(v, v', v'')` at the
    /// radii `radii` (all positive, increasing).
    pub fn from_fn<F: Fn(f64) -> (f64, f64, f64)>(center: f64, radii: &[f64], f: F) -> Result<Self> {
        let nodes = radii
            .iter()
            .map(|&r| {
                let (v, dv, ddv) = f(r);
                LogNode::from_radial(r, v, dv, ddv)
            })
            .collect();
        RadialSamples::new(center, nodes)
    }
}

/// `n` log-uniform radii on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bubble() -> RadialSamples {
        // ln 8 − 2 ln(1 + r²)
        let f = |r: f64| {
            let q = 1.0 + r * r;
            (8f64.ln() - 2.0 * q.ln(), -4.0 * r / q, -4.0 * (1.0 - r * r) / (q * q))
        };
        let radii = log_grid(1e-4, 1e3, 400);
        RadialSamples::from_fn(8f64.ln(), &radii, f).unwrap()
    }

    #[test]
    fn reproduces_nodes() {
        let s = bubble();
        for n in s.nodes() {
            let (v, dv) = s.eval(n.radius()).unwrap();
            assert!((v - n.value).abs() < 1e-14);
            assert!((dv - n.derivative()).abs() < 1e-12 * (1.0 + n.derivative().abs()));
        }
    }

    #[test]
    fn interpolation_accuracy() {
        let s = bubble();
        for &r in &[0.0, 5e-5, 0.3, 1.0, 2.7, 50.0, 999.0] {
            let (v, dv) = s.eval(r).unwrap();
            let q = 1.0 + r * r;
            assert!((v - (8f64.ln() - 2.0 * q.ln())).abs() < 1e-9, "r={r}");
            assert!((dv + 4.0 * r / q).abs() < 1e-8, "r={r}");
        }
        assert!(s.eval(1001.0).is_err());
    }

    #[test]
    fn exp_and_gradient_integrals() {
        let s = bubble();
        // ∫₀¹ 8r/(1+r²)² dr = 2
        assert!((s.integral_exp(1.0, 1.0).unwrap() - 2.0).abs() < 1e-10);
        // ∫₀^R e^{v/2} r dr = √8 · ln(1+R²)/2
        let r: f64 = 10.0;
        let exact = 8f64.sqrt() * (1.0 + r * r).ln() / 2.0;
        assert!((s.integral_exp(0.5, r).unwrap() / exact - 1.0).abs() < 1e-10);
        // ∫₀¹ 16 r³/(1+r²)² dr = 8(ln 2 − 1/2)
        let g = s.integral_grad_sq(1.0).unwrap();
        assert!((g - 8.0 * (2f64.ln() - 0.5)).abs() < 1e-10);
        assert_eq!(s.integral_exp(1.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn quintic_is_exact_on_quintics_in_t() {
        let f = |t: f64| 0.3 - t + 0.5 * t * t - 0.1 * t.powi(3) + 0.02 * t.powi(4) - 0.004 * t.powi(5);
        let df = |t: f64| -1.0 + t - 0.3 * t * t + 0.08 * t.powi(3) - 0.02 * t.powi(4);
        let ddf = |t: f64| 1.0 - 0.6 * t + 0.24 * t * t - 0.08 * t.powi(3);
        let mk = |t: f64| LogNode { t, value: f(t), dt: df(t), dtt: ddf(t) };
        let (a, b) = (mk(-0.7), mk(1.9));
        let c = quintic(&a, &b);
        for k in 0..=10 {
            let s = k as f64 / 10.0;
            let t = -0.7 + 2.6 * s;
            let (v, dv) = horner(&c, s);
            assert!((v - f(t)).abs() < 1e-13);
            assert!((dv / 2.6 - df(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn rescaling_and_scaling() {
        let s = bubble();
        let rho = 2.0;
        let (v2, dv2) = s.eval(rho).unwrap();
        let q = 1.0 + rho * rho;
        let end = LogNode::from_radial(rho, v2, dv2, -4.0 * (1.0 - rho * rho) / (q * q));
        let u = s.rescaled(rho, v2, 1.0, 1.0, end).unwrap();
        assert!((u.r_end() - 1.0).abs() < 1e-15);
        assert_eq!(u.eval(1.0).unwrap().0, 0.0);
        let (uv, du) = u.eval(0.25).unwrap();
        let (sv, sd) = s.eval(0.5).unwrap();
        assert!((uv - (sv - v2)).abs() < 1e-12);
        assert!((du - rho * sd).abs() < 1e-11);
        let d = u.scaled(2.0);
        assert!((d.eval(0.25).unwrap().0 - 2.0 * uv).abs() < 1e-12);
        let back = u.dilated(rho, v2);
        assert!((back.eval(0.5).unwrap().0 - sv).abs() < 1e-12);
    }

    #[test]
    fn cumulative_matches_direct() {
        let s = bubble();
        let cum = s.cumulative_exp(1.0).unwrap();
        for &r in &[0.0, 5e-5, 1e-4, 0.37, 1.0, 20.0, 1e3] {
            let a = s.integral_exp(1.0, r).unwrap();
            let b = s.integral_exp_cached(1.0, &cum, r).unwrap();
            assert!((a - b).abs() <= 1e-13 * a.max(1e-300), "r={r}: {a} {b}");
        }
        assert!((cum[cum.len() - 1] - 4.0 * (1.0 - 1.0 / (1.0 + 1e6))).abs() < 1e-10);
    }

    #[test]
    fn rejects_unsorted_nodes() {
        let n = LogNode { t: 0.0, value: 0.0, dt: 0.0, dtt: 0.0 };
        assert!(RadialSamples::new(0.0, vec![n, n]).is_err());
        assert!(RadialSamples::new(0.0, vec![]).is_err());
    }
}
