//! Physical parameters and the Moser–Trudinger critical constants.
//!
//! The two-species intensity distribution is `τ δ₁ + (1 − τ) δ_γ`. Its
//! deterministic critical constant has a closed form with two branches; for
//! a general discrete distribution the constant is an exact minimum over
//! subsets of atoms of the same sign.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// `8π`, the critical constant of the single-species problem.
pub const EIGHT_PI: f64 = 8.0 * PI;

/// Maximum number of atoms per sign class accepted by
/// [`critical_lambda_discrete`].
pub const MAX_ATOMS_PER_SIGN: usize = 24;

/// Weight `τ` of the unit-intensity species and normalized intensity `γ` of
/// the second species.
///
/// `τ = 1` is admitted as the standard single-species reference case; every
/// operation that needs `τ < 1` rejects it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeciesParams {
    tau: f64,
    gamma: f64,
}

impl SpeciesParams {
    pub fn new(tau: f64, gamma: f64) -> Result<Self> {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(invalid("tau", tau, "must lie in (0, 1]"));
        }
        check_gamma(gamma)?;
        Ok(Self { tau, gamma })
    }

    /// Standard single-species case `𝒫 = δ₁`, carrying `gamma` only as a
    /// placeholder for the (absent) second species.
    pub fn standard(gamma: f64) -> Result<Self> {
        Self::new(1.0, gamma)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn is_standard(&self) -> bool {
        self.tau == 1.0
    }

    /// `τ + (1 − τ) γ`, the mean intensity.
    pub fn mean_intensity(&self) -> f64 {
        self.tau + (1.0 - self.tau) * self.gamma
    }

    pub(crate) fn require_two_species(&self) -> Result<()> {
        if self.is_standard() {
            Err(invalid("tau", self.tau, "must lie in (0, 1) for a two-species operation"))
        } else {
            Ok(())
        }
    }

    pub fn as_measure(&self) -> DiscreteMeasure {
        if self.is_standard() {
            DiscreteMeasure::dirac_one()
        } else {
            DiscreteMeasure {
                atoms: vec![
                    Atom {
                        weight: self.tau,
                        intensity: 1.0,
                    },
                    Atom {
                        weight: 1.0 - self.tau,
                        intensity: self.gamma,
                    },
                ],
            }
        }
    }
}

impl fmt::Display for SpeciesParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tau={} gamma={}", self.tau, self.gamma)
    }
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(invalid("gamma", gamma, "must lie in (0, 1)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub weight: f64,
    pub intensity: f64,
}

/// A probability measure on `[−1, 1]` with finitely many atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    atoms: Vec<Atom>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("measure has no atoms".into()));
        }
        let mut total = 0.0;
        for (i, a) in atoms.iter().enumerate() {
            if !(a.weight > 0.0 && a.weight <= 1.0) {
                return Err(Error::InvalidMeasure(format!(
                    "atom {i}: weight {} outside (0, 1]",
                    a.weight
                )));
            }
            if !(-1.0..=1.0).contains(&a.intensity) {
                return Err(Error::InvalidMeasure(format!(
                    "atom {i}: intensity {} outside [-1, 1]",
                    a.intensity
                )));
            }
            total += a.weight;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMeasure(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { atoms })
    }

    pub fn dirac_one() -> Self {
        Self {
            atoms: vec![Atom {
                weight: 1.0,
                intensity: 1.0,
            }],
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Parses the plain-text measure format: one `weight intensity` pair per
    /// line, whitespace separated. `#` starts a comment; blank lines are
    /// ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut atoms = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(Error::MeasureParse {
                    line: idx + 1,
                    reason: format!("expected `weight intensity`, found {} fields", fields.len()),
                });
            }
            let num = |s: &str| {
                s.parse::<f64>().map_err(|e| Error::MeasureParse {
                    line: idx + 1,
                    reason: format!("`{s}`: {e}"),
                })
            };
            atoms.push(Atom {
                weight: num(fields[0])?,
                intensity: num(fields[1])?,
            });
        }
        Self::new(atoms)
    }
}

/// Which term controls the critical constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdBranch {
    /// A single atom attains the minimum (`8π/τ` for two species): the
    /// other species acts as a perturbation.
    Perturbative,
    /// Several atoms attain it together (`8π/(τ + (1−τ)γ)²`).
    Mixed,
    /// No admissible subset has a nonzero weighted intensity; the functional
    /// is bounded below for every `λ`.
    Unbounded,
}

impl fmt::Display for ThresholdBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ThresholdBranch::Perturbative => "perturbative",
            ThresholdBranch::Mixed => "mixed",
            ThresholdBranch::Unbounded => "unbounded",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MtConstant {
    pub value: f64,
    pub branch: ThresholdBranch,
}

/// Deterministic two-species critical constant
/// `8π min{1/(τ + (1−τ)γ)², 1/τ}`.
pub fn critical_lambda_two_species(params: SpeciesParams) -> Result<MtConstant> {
    params.require_two_species()?;
    let tau = params.tau();
    if params.gamma() <= gamma_threshold(tau)? {
        Ok(MtConstant {
            value: EIGHT_PI / tau,
            branch: ThresholdBranch::Perturbative,
        })
    } else {
        let s = params.mean_intensity();
        Ok(MtConstant {
            value: EIGHT_PI / (s * s),
            branch: ThresholdBranch::Mixed,
        })
    }
}

/// Critical constant for `params`, admitting the standard case `τ = 1`
/// (where it is `8π`).
pub fn critical_lambda(params: SpeciesParams) -> MtConstant {
    if params.is_standard() {
        MtConstant {
            value: EIGHT_PI,
            branch: ThresholdBranch::Perturbative,
        }
    } else {
        critical_lambda_two_species(params).expect("two-species params validated at construction")
    }
}

/// Critical constant of a discrete measure: `8π` times the minimum of
/// `𝒫(K) / (Σ_K γᵢτᵢ)²` over nonempty subsets `K` of the nonnegative atoms
/// and of the negative atoms. Subsets with zero weighted intensity are
/// skipped.
pub fn critical_lambda_discrete(measure: &DiscreteMeasure) -> Result<MtConstant> {
    let (pos, neg): (Vec<Atom>, Vec<Atom>) =
        measure.atoms().iter().partition(|a| a.intensity >= 0.0);
    for class in [&pos, &neg] {
        if class.len() > MAX_ATOMS_PER_SIGN {
            return Err(Error::InvalidMeasure(format!(
                "{} atoms of one sign exceed the enumeration cap of {MAX_ATOMS_PER_SIGN}",
                class.len()
            )));
        }
    }

    let mut best: Option<(f64, u32)> = None;
    for class in [&pos, &neg] {
        let n = class.len();
        for mask in 1u32..(1u32 << n) {
            let mut weight = 0.0;
            let mut moment = 0.0;
            for (i, a) in class.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    weight += a.weight;
                    moment += a.weight * a.intensity;
                }
            }
            if moment == 0.0 {
                continue;
            }
            let ratio = weight / (moment * moment);
            if best.map_or(true, |(b, _)| ratio < b) {
                best = Some((ratio, mask.count_ones()));
            }
        }
    }

    Ok(match best {
        Some((ratio, size)) => MtConstant {
            value: EIGHT_PI * ratio,
            branch: if size == 1 {
                ThresholdBranch::Perturbative
            } else {
                ThresholdBranch::Mixed
            },
        },
        None => MtConstant {
            value: f64::INFINITY,
            branch: ThresholdBranch::Unbounded,
        },
    })
}

/// Boundary constant `β_{τ,γ} = ln[τ/((1−τ)γ)] / (1 − γ)`.
pub fn beta_boundary(params: SpeciesParams) -> Result<f64> {
    params.require_two_species()?;
    let (tau, gamma) = (params.tau(), params.gamma());
    Ok((tau / ((1.0 - tau) * gamma)).ln() / (1.0 - gamma))
}

/// Branch threshold `√τ/(1 + √τ)` of the two-species critical constant.
pub fn gamma_threshold(tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(invalid("tau", tau, "must lie in (0, 1)"));
    }
    let s = tau.sqrt();
    Ok(s / (1.0 + s))
}
