//! Reference single-mode states with closed-form radial moments, quadrature
//! marginals, and radially symmetric Wigner profiles.
//!
//! Conventions: vacuum quadrature variance 1/2, so the vacuum Wigner
//! function is `e^{-r²}/π` and `⟨r^{2k}⟩_vac = k!`. Only the |0⟩/|1⟩
//! mixture, thermal light, and phase-averaged coherent light are modeled;
//! higher Fock components would extend [`StateSpec`] with a Laguerre
//! profile.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::{symmetric_factor, MomentSource, RadialMomentSet};
use crate::numeric::CompensatedSum;
use crate::quad::periodic_mean;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    /// `(1 − η)|0⟩⟨0| + η|1⟩⟨1|`.
    FockMixture { eta: f64 },
    Thermal { nbar: f64 },
    /// Coherent state `|α⟩` averaged over its phase.
    CoherentPhaseAveraged { alpha_sq: f64 },
}

impl StateSpec {
    pub fn fock_mixture(eta: f64) -> Result<Self> {
        Self::FockMixture { eta }.validated()
    }

    pub fn thermal(nbar: f64) -> Result<Self> {
        Self::Thermal { nbar }.validated()
    }

    pub fn coherent_phase_averaged(alpha_sq: f64) -> Result<Self> {
        Self::CoherentPhaseAveraged { alpha_sq }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let ok = match self {
            Self::FockMixture { eta } => (0.0..=1.0).contains(&eta),
            Self::Thermal { nbar } => nbar >= 0.0 && nbar.is_finite(),
            Self::CoherentPhaseAveraged { alpha_sq } => alpha_sq >= 0.0 && alpha_sq.is_finite(),
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::InvalidArgument(format!("state parameter out of range: {self:?}")))
        }
    }

    /// Phase-space displacement `|z₀| = √2|α|` of the coherent component.
    fn displacement(&self) -> f64 {
        match *self {
            Self::CoherentPhaseAveraged { alpha_sq } => (2.0 * alpha_sq).sqrt(),
            _ => 0.0,
        }
    }
}

impl std::fmt::Display for StateSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::FockMixture { eta } => write!(f, "fock_mixture(eta={eta})"),
            Self::Thermal { nbar } => write!(f, "thermal(nbar={nbar})"),
            Self::CoherentPhaseAveraged { alpha_sq } => write!(f, "coherent_phase_averaged(alpha_sq={alpha_sq})"),
        }
    }
}

const PHASE_AVG_TOL: f64 = 1e-15;

/// Exact `⟨r^{2k}⟩` for `k = 0..=K`.
///
/// Fock mixture: `k!(1 + 2ηk)`. Thermal: `k!(2n̄ + 1)^k`. Phase-averaged
/// coherent: `k! L_k(−|z₀|²)`, expanded as a sum of positive terms.
pub fn oracle_radial_moments(state: &StateSpec, k_max: usize) -> Result<RadialMomentSet> {
    if k_max < 1 {
        return Err(Error::InvalidArgument("oracle needs K ≥ 1".into()));
    }
    let state = state.validated()?;
    let mu: Vec<f64> = (0..=k_max).map(|k| radial_moment(&state, k)).collect();
    if let Some(k) = mu.iter().position(|v| !v.is_finite()) {
        return Err(Error::OraclePrecision(format!("⟨r^{}⟩ overflows", 2 * k)));
    }
    RadialMomentSet::new(mu, MomentSource::Oracle)
}

fn radial_moment(state: &StateSpec, k: usize) -> f64 {
    let fact: f64 = (1..=k).map(|i| i as f64).product();
    match *state {
        StateSpec::FockMixture { eta } => fact * (1.0 + 2.0 * eta * k as f64),
        StateSpec::Thermal { nbar } => fact * (2.0 * nbar + 1.0).powi(k as i32),
        StateSpec::CoherentPhaseAveraged { .. } => {
            let a = state.displacement().powi(2);
            // t_j = C(k,j) k!/j! a^j
            let mut term = fact;
            let mut acc = CompensatedSum::new();
            acc.add(term);
            for j in 0..k {
                term *= a * (k - j) as f64 / ((j + 1) * (j + 1)) as f64;
                acc.add(term);
            }
            acc.value()
        }
    }
}

/// Exact quadrature moment `⟨x^{2k}⟩ = ⟨r^{2k}⟩ / B_{2k}`.
pub fn oracle_quadrature_moment(state: &StateSpec, k: usize) -> f64 {
    radial_moment(state, k) / symmetric_factor(k)
}

/// Radial profile `W(r)` of the (rotationally symmetric) Wigner function.
pub fn wigner_radial(state: &StateSpec, r: f64) -> f64 {
    match *state {
        StateSpec::FockMixture { eta } => (-r * r).exp() * (1.0 - 2.0 * eta + 2.0 * eta * r * r) / PI,
        StateSpec::Thermal { nbar } => {
            let v = 2.0 * nbar + 1.0;
            (-r * r / v).exp() / (PI * v)
        }
        StateSpec::CoherentPhaseAveraged { .. } => {
            let d = state.displacement();
            // (1/π) e^{-(r-d)²} · mean_θ e^{2rd(cos θ - 1)}
            let avg = periodic_mean(|t: f64| (2.0 * r * d * (t.cos() - 1.0)).exp(), PHASE_AVG_TOL);
            (-(r - d) * (r - d)).exp() * avg / PI
        }
    }
}

/// Quadrature marginal density (identical for every measurement angle).
pub fn marginal_pdf(state: &StateSpec, x: f64) -> f64 {
    match *state {
        StateSpec::FockMixture { eta } => (-x * x).exp() * (1.0 - eta + 2.0 * eta * x * x) / PI.sqrt(),
        StateSpec::Thermal { nbar } => {
            let var = (2.0 * nbar + 1.0) / 2.0;
            (-x * x / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
        }
        StateSpec::CoherentPhaseAveraged { .. } => {
            let d = state.displacement();
            periodic_mean(|t: f64| (-(x - d * t.cos()).powi(2)).exp(), PHASE_AVG_TOL) / PI.sqrt()
        }
    }
}
