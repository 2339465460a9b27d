//! Squared-polynomial negativity witnesses over radial moments.
//!
//! A witness of order `N` is `𝔉 = M²` with `M(r) = 1 + Σ_{n=1}^{N/2} C_{2n} r^{2n}`.
//! Any genuine phase-space probability density gives `⟨𝔉⟩ ≥ 0`. Writing
//! `c = (1, C_2, …, C_N)` and the Hankel matrix `S[j][l] = ⟨r^{2(j+l)}⟩`,
//! `⟨𝔉⟩ = cᵀ S c`, which is minimized by the linear system
//! `Σ_l ⟨r^{2(l+j)}⟩ C_{2l} = −⟨r^{2j}⟩`, `j = 1..N/2`.
//!
//! Everything is computed in the rescaled radius `r/s` (by default
//! `s² = ⟨r²⟩`), which leaves `min ⟨𝔉⟩` unchanged and keeps the Hankel
//! entries within a few decades of one.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, SolveDiagnostics};
use crate::linalg::{self, equilibrate, solve_symmetric, symmetric_eigenvalues, FactorError, Inertia};
use crate::moments::RadialMomentSet;
use crate::numeric::{dot2, horner, poly_square, rel_diff};

pub const DEFAULT_CONDITION_CAP: f64 = 1e12;
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-8;
/// Tolerance on the optimality identity, relative to the larger of the two
/// sides and the unit constant term that both contain.
pub const DEFAULT_IDENTITY_TOL: f64 = 1e-8;
pub const VARIANCE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;

/// Even polynomial `M(r) = 1 + Σ C_{2n} r^{2n}` with its radial scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    order: usize,
    scale: f64,
    /// `C_{2n}` in units of `r/s`, `n = 1..=N/2`.
    scaled_coeffs: Vec<f64>,
}

impl Witness {
    /// Coefficients `C_2, …, C_N` in original radial units.
    pub fn new(order: usize, coeffs: Vec<f64>) -> Result<Self> {
        Self::from_scaled(order, 1.0, coeffs)
    }

    pub fn from_scaled(order: usize, scale: f64, scaled_coeffs: Vec<f64>) -> Result<Self> {
        check_order(order)?;
        if scaled_coeffs.len() != order / 2 {
            return Err(Error::InvalidArgument(format!(
                "order {order} needs {} coefficients, got {}",
                order / 2,
                scaled_coeffs.len()
            )));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale must be positive, got {scale}")));
        }
        if scaled_coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("witness coefficients must be finite".into()));
        }
        Ok(Self { order, scale, scaled_coeffs })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn scaled_coeffs(&self) -> &[f64] {
        &self.scaled_coeffs
    }

    /// `C_{2n}` in original units: `C_{2n}^{scaled} s^{-2n}`.
    pub fn coeffs(&self) -> Vec<f64> {
        let inv = 1.0 / (self.scale * self.scale);
        self.scaled_coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * inv.powi(i as i32 + 1))
            .collect()
    }

    /// The same polynomial expressed against a different radial scale.
    pub fn rescaled_to(&self, scale: f64) -> Result<Self> {
        let ratio = (scale / self.scale).powi(2);
        let coeffs = self
            .scaled_coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * ratio.powi(i as i32 + 1))
            .collect();
        Self::from_scaled(self.order, scale, coeffs)
    }

    /// Same polynomial viewed at a higher order (extra coefficients zero).
    pub fn padded(&self, order: usize) -> Result<Self> {
        check_order(order)?;
        if order < self.order {
            return Err(Error::InvalidArgument(format!("cannot pad order {} down to {order}", self.order)));
        }
        let mut c = self.scaled_coeffs.clone();
        c.resize(order / 2, 0.0);
        Self::from_scaled(order, self.scale, c)
    }

    /// `(1, C_2, …)` in scaled units.
    pub(crate) fn full_scaled(&self) -> Vec<f64> {
        std::iter::once(1.0).chain(self.scaled_coeffs.iter().copied()).collect()
    }

    /// `M(r)`.
    pub fn polynomial(&self, r: f64) -> f64 {
        let t = (r / self.scale).powi(2);
        horner(&self.full_scaled(), t)
    }

    /// `𝔉(r) = M(r)²`.
    pub fn value(&self, r: f64) -> f64 {
        self.polynomial(r).powi(2)
    }
}

fn check_order(order: usize) -> Result<()> {
    if order < 2 || !order.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("witness order must be even and ≥ 2, got {order}")));
    }
    Ok(())
}

/// Moments of `r/s`: `mu[k] / s^{2k}` for `k = 0..=k_max`.
fn scaled_moments(moments: &RadialMomentSet, scale: f64, k_max: usize) -> Result<Vec<f64>> {
    moments.get(k_max)?;
    let inv = 1.0 / (scale * scale);
    Ok(moments.mu[..=k_max]
        .iter()
        .enumerate()
        .map(|(k, m)| m * inv.powi(k as i32))
        .collect())
}

/// Hankel moment matrix with its spectral condition number.
#[derive(Debug, Clone)]
pub struct MomentMatrix {
    pub matrix: DMatrix<f64>,
    pub condition_number: f64,
}

/// `S[j][l] = ⟨r^{2(j+l)}⟩` for `j, l = 0..=N/2`, in the units given.
pub fn moment_matrix(moments: &RadialMomentSet, order: usize) -> Result<MomentMatrix> {
    check_order(order)?;
    moments.require_order(2 * order)?;
    let m = order / 2 + 1;
    let matrix = DMatrix::from_fn(m, m, |j, l| moments.mu[j + l]);
    let condition_number = linalg::condition_number(&matrix);
    Ok(MomentMatrix { matrix, condition_number })
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Solve in `r/s` with `s² = ⟨r²⟩`.
    pub rescale: bool,
    pub condition_cap: f64,
    pub residual_tol: f64,
    pub identity_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rescale: true,
            condition_cap: DEFAULT_CONDITION_CAP,
            residual_tol: DEFAULT_RESIDUAL_TOL,
            identity_tol: DEFAULT_IDENTITY_TOL,
        }
    }
}

/// Outcome of the linear minimization at one order.
#[derive(Debug, Clone, Serialize)]
pub struct OptimizedWitness {
    pub witness: Witness,
    /// `min ⟨𝔉⟩`; `-∞` when the functional is unbounded below.
    pub min_f: f64,
    /// `cᵀSc` at the stationary point.
    pub stationary_f: f64,
    /// `1 + Σ_j C_{2j} ⟨r^{2j}⟩` at the stationary point.
    pub shortcut_f: f64,
    /// False when the lower-right block of `S` is not positive definite;
    /// the stationary point is then a saddle and `⟨𝔉⟩` has no minimum.
    pub bounded: bool,
    /// Condition number of the (equilibrated) matrix that was factored.
    pub condition_number: f64,
    pub residual: f64,
    pub refinement_steps: usize,
    pub inertia: Inertia,
}

/// Minimizes `⟨𝔉⟩` over the coefficients of an order-`N` witness.
pub fn optimize_witness(moments: &RadialMomentSet, order: usize, opts: SolverOptions) -> Result<OptimizedWitness> {
    check_order(order)?;
    moments.require_order(2 * order)?;
    let half = order / 2;

    let refuse = |condition_number: f64, residual: Option<f64>, reason: String| {
        Error::IllConditioned(SolveDiagnostics { order, condition_number, residual, reason })
    };

    let scale = if opts.rescale {
        let m1 = moments.mu[1];
        if !(m1 > 0.0) {
            return Err(refuse(f64::INFINITY, None, "⟨r²⟩ vanishes; moments describe a point mass".into()));
        }
        m1.sqrt()
    } else {
        1.0
    };
    let mu = scaled_moments(moments, scale, order)?;

    let a = DMatrix::from_fn(half, half, |j, l| mu[j + l + 2]);
    let b: Vec<f64> = (0..half).map(|j| -mu[j + 1]).collect();
    let sol = match solve_symmetric(&a, &b, Default::default()) {
        Ok(sol) => sol,
        Err(FactorError::Singular { step }) => {
            return Err(refuse(f64::INFINITY, None, format!("singular pivot at step {step}")));
        }
        Err(FactorError::NonFinite) => {
            return Err(refuse(f64::INFINITY, None, "non-finite entries".into()));
        }
    };
    if !(sol.condition_number <= opts.condition_cap) {
        return Err(refuse(
            sol.condition_number,
            Some(sol.residual),
            format!("condition number exceeds cap {:.1e}", opts.condition_cap),
        ));
    }
    if !(sol.residual < opts.residual_tol) {
        return Err(refuse(
            sol.condition_number,
            Some(sol.residual),
            format!("relative residual {:.3e} above {:.1e}", sol.residual, opts.residual_tol),
        ));
    }

    let witness = Witness::from_scaled(order, scale, sol.x.clone())?;
    let full = witness.full_scaled();
    let stationary_f = dot2(&poly_square(&full), &mu[..=order]);
    let shortcut_f = dot2(&full, &mu[..=half]);
    let gap = (stationary_f - shortcut_f).abs();
    let allowed = opts.identity_tol * stationary_f.abs().max(shortcut_f.abs()).max(1.0);
    if gap > allowed {
        return Err(refuse(
            sol.condition_number,
            Some(sol.residual),
            format!(
                "optimality identity violated: quadratic form {stationary_f:.6e} vs shortcut {shortcut_f:.6e} (relative gap {:.3e})",
                rel_diff(stationary_f, shortcut_f)
            ),
        ));
    }
    let bounded = sol.inertia.is_positive_definite();
    Ok(OptimizedWitness {
        witness,
        min_f: if bounded { stationary_f } else { f64::NEG_INFINITY },
        stationary_f,
        shortcut_f,
        bounded,
        condition_number: sol.condition_number,
        residual: sol.residual,
        refinement_steps: sol.refinement_steps,
        inertia: sol.inertia,
    })
}

/// `⟨𝔉⟩ = cᵀ S c` for arbitrary coefficients.
pub fn evaluate_expectation(w: &Witness, moments: &RadialMomentSet) -> Result<f64> {
    let mu = scaled_moments(moments, w.scale, w.order)?;
    Ok(dot2(&poly_square(&w.full_scaled()), &mu))
}

/// Delta-method standard error of `⟨𝔉⟩` at fixed coefficients, from the
/// covariance of the radial moment estimators. At the linear optimum this
/// is also the first-order error of `min ⟨𝔉⟩`, since the gradient with
/// respect to the coefficients vanishes there.
pub fn expectation_stderr(w: &Witness, moments: &RadialMomentSet) -> Option<f64> {
    let cov = moments.cov.as_ref()?;
    if moments.max_k() < w.order {
        return None;
    }
    let inv = 1.0 / (w.scale * w.scale);
    let grad: Vec<f64> = poly_square(&w.full_scaled())
        .iter()
        .enumerate()
        .map(|(k, c)| c * inv.powi(k as i32))
        .collect();
    let mut lhs = Vec::with_capacity(grad.len() * grad.len());
    let mut rhs = Vec::with_capacity(grad.len() * grad.len());
    for (j, gj) in grad.iter().enumerate() {
        for (k, gk) in grad.iter().enumerate() {
            lhs.push(gj * gk);
            rhs.push(cov[j][k]);
        }
    }
    Some(dot2(&lhs, &rhs).max(0.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceEstimate {
    /// `⟨𝔉²⟩ − ⟨𝔉⟩²`, clamped to zero when negative within tolerance.
    pub variance: f64,
    pub second_moment: f64,
    pub mean: f64,
    /// Set when the raw difference was below `−1e-10·⟨𝔉²⟩`; a genuine
    /// probability density cannot produce this, so it marks either
    /// quasi-probability moments or numerical breakdown.
    pub negative: bool,
}

/// Phase-space variance of `𝔉`, from moments up to order `4N`.
pub fn evaluate_variance(w: &Witness, moments: &RadialMomentSet) -> Result<VarianceEstimate> {
    let mu = scaled_moments(moments, w.scale, 2 * w.order)?;
    let square = poly_square(&w.full_scaled());
    let quartic = poly_square(&square);
    let mean = dot2(&square, &mu[..=w.order]);
    let second_moment = dot2(&quartic, &mu);
    let raw = (-mean).mul_add(mean, second_moment);
    let tol = VARIANCE_TOL * second_moment.abs();
    let (variance, negative) = if raw >= 0.0 {
        (raw, false)
    } else if raw >= -tol {
        (0.0, false)
    } else {
        (raw, true)
    };
    Ok(VarianceEstimate { variance, second_moment, mean, negative })
}

/// `𝔉(r)` on a radial grid, in original units.
pub fn witness_profile(w: &Witness, r_grid: &[f64]) -> Result<Vec<f64>> {
    if let Some(r) = r_grid.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
        return Err(Error::InvalidArgument(format!("radius {r} is not finite and nonnegative")));
    }
    Ok(r_grid.iter().map(|&r| w.value(r)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsdCheck {
    pub psd: bool,
    /// Smallest eigenvalue of the rescaled, unit-diagonal moment matrix.
    pub min_eigenvalue: f64,
    pub tolerance: f64,
}

/// Positive-semidefiniteness of the Hankel moment matrix.
///
/// The matrix is rescaled to `r/s` and brought to unit diagonal by a
/// congruence `D S D`; congruences preserve inertia, and the unit-diagonal
/// form keeps the eigenvalue tolerance `1e-10·‖·‖` meaningful.
pub fn psd_crosscheck(moments: &RadialMomentSet, order: usize) -> Result<PsdCheck> {
    check_order(order)?;
    moments.require_order(2 * order)?;
    let m1 = moments.mu[1];
    let scale = if m1 > 0.0 { m1.sqrt() } else { 1.0 };
    let mu = scaled_moments(moments, scale, order)?;
    let m = order / 2 + 1;
    let s = DMatrix::from_fn(m, m, |j, l| mu[j + l]);
    let (eq, _) = equilibrate(&s);
    let ev = symmetric_eigenvalues(&eq);
    let norm = ev.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let tolerance = PSD_TOL * norm;
    Ok(PsdCheck { psd: ev[0] >= -tolerance, min_eigenvalue: ev[0], tolerance })
}
