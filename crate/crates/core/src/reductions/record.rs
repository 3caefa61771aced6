use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::io::{fmt_f64, Table, VERSION};
use crate::params::SpeciesParams;
use crate::radial::RadialProfile;
use crate::samples::{LogNode, RadialSamples};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionKind {
    Deterministic,
    Stochastic,
}

impl fmt::Display for SolutionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolutionKind::Deterministic => "deterministic",
            SolutionKind::Stochastic => "stochastic",
        })
    }
}

/// A radial solution `v` on the unit disc with `v(1) = 0`, reconstructed
/// from a whole-plane profile as `v(r) = scale · (η(ρ r) − shift)`.
#[derive(Debug, Clone)]
pub struct SolutionRecord {
    pub kind: SolutionKind,
    pub params: SpeciesParams,
    pub lambda: f64,
    /// `η(0)` of the generating profile.
    pub alpha: f64,
    /// `σ` for stochastic records, `R` for deterministic ones.
    pub radius: f64,
    /// The constant subtracted from `η(ρ r)`.
    pub shift: f64,
    /// `1` for a reconstructed solution; other values only arise from
    /// [`scaled`](Self::scaled).
    pub scale: f64,
    /// Samples of `v` on `[0, 1]`.
    pub v: RadialSamples,
    /// `(∫_{B₁} e^v, ∫_{B₁} e^{γv})`.
    pub integrals: (f64, f64),
    pub profile: Arc<RadialProfile>,
}

impl SolutionRecord {
    pub(crate) fn from_profile(
        kind: SolutionKind,
        params: SpeciesParams,
        lambda: f64,
        profile: Arc<RadialProfile>,
        radius: f64,
        shift: f64,
    ) -> Result<Self> {
        let (eta, d) = profile.eval(radius)?;
        let mut end = LogNode::from_radial(radius, eta, d, 0.0);
        end.dtt = -radius * radius * profile.source_at(eta);
        // On the boundary v vanishes by construction; the profile value there
        // differs from `shift` only by the root-finding tolerance.
        end.value = shift;
        let v = profile.samples().rescaled(radius, shift, 1.0, 1.0, end)?;
        let mut rec = SolutionRecord {
            kind,
            params,
            lambda,
            alpha: profile.alpha(),
            radius,
            shift,
            scale: 1.0,
            v,
            integrals: (0.0, 0.0),
            profile,
        };
        rec.integrals = rec.disc_integrals()?;
        Ok(rec)
    }

    fn disc_integrals(&self) -> Result<(f64, f64)> {
        let g = self.params.gamma();
        Ok((
            2.0 * PI * self.v.integral_exp(1.0, 1.0)?,
            2.0 * PI * self.v.integral_exp(g, 1.0)?,
        ))
    }

    /// `(v(r), v'(r))` for `0 ≤ r ≤ 1`.
    pub fn eval(&self, r: f64) -> Result<(f64, f64)> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::OutOfRange { radius: r, r_max: 1.0 });
        }
        if r == 1.0 {
            return Ok((0.0, self.boundary_slope()));
        }
        let (eta, d) = self.profile.eval(self.radius * r)?;
        Ok((self.scale * (eta - self.shift), self.scale * self.radius * d))
    }

    /// `v'(1)`.
    pub fn boundary_slope(&self) -> f64 {
        let n = self.v.nodes();
        n[n.len() - 1].derivative()
    }

    pub fn v_center(&self) -> f64 {
        self.v.center()
    }

    /// Right-hand side `−Δv` of the disc problem of this record's kind,
    /// evaluated at the value `v`.
    pub fn source(&self, v: f64) -> f64 {
        let (tau, g) = (self.params.tau(), self.params.gamma());
        let (i1, ig) = self.integrals;
        let lam = self.lambda;
        match self.kind {
            SolutionKind::Deterministic => {
                let mut s = lam * tau * v.exp() / i1;
                if tau < 1.0 {
                    s += lam * (1.0 - tau) * g * (g * v).exp() / ig;
                }
                s
            }
            SolutionKind::Stochastic => {
                lam * (tau * v.exp() + (1.0 - tau) * g * (g * v).exp())
                    / (tau * i1 + (1.0 - tau) * ig)
            }
        }
    }

    /// `|Δv + source(v)| / source(v)` at an interior radius.
    pub fn collocation_residual(&self, r: f64) -> Result<f64> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::OutOfRange { radius: r, r_max: 1.0 });
        }
        let lap = self.scale * self.radius * self.radius * self.profile.laplacian_fd(self.radius * r)?;
        let s = self.source(self.eval(r)?.0);
        Ok((lap + s).abs() / s)
    }

    /// Largest collocation residual over `n` radii drawn uniformly from
    /// `[10⁻³, 1 − 10⁻³]` by a ChaCha generator seeded with `seed`.
    pub fn max_collocation_residual(&self, n: usize, seed: u64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..n {
            let r = rng.gen_range(1e-3..1.0 - 1e-3);
            worst = worst.max(self.collocation_residual(r)?);
        }
        Ok(worst)
    }

    /// The record of `k · v`, with its disc integrals recomputed. Not a
    /// solution for `k ≠ 1`; used as a negative control.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        let mut rec = self.clone();
        rec.scale *= k;
        rec.v = self.v.scaled(k);
        rec.integrals = rec.disc_integrals()?;
        Ok(rec)
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["r", "v", "v_prime"])
            .with_meta("format", "meanfield solution record")
            .with_meta("version", VERSION)
            .with_meta("kind", self.kind)
            .with_meta("tau", fmt_f64(self.params.tau()))
            .with_meta("gamma", fmt_f64(self.params.gamma()))
            .with_meta("lambda", fmt_f64(self.lambda))
            .with_meta("alpha", fmt_f64(self.alpha))
            .with_meta("radius", fmt_f64(self.radius))
            .with_meta("shift", fmt_f64(self.shift))
            .with_meta("int_exp_v", fmt_f64(self.integrals.0))
            .with_meta("int_exp_gamma_v", fmt_f64(self.integrals.1))
            .with_meta("profile_beta", fmt_f64(self.profile.beta().value));
        for (r, v, d) in self.v.triples() {
            t.push_f64(&[r, v, d]);
        }
        t
    }
}
