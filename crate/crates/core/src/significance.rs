//! Statistical significance of a witness on quadrature data, and the
//! ratio-objective refinement of its coefficients.
//!
//! For phase-randomized data each sample contributes
//! `f_i = Σ_k w_k x_i^{2k}` with `w_k = B_{2k}·[r^{2k}]M²`, so that the
//! sample mean of `f` is exactly `⟨𝔉⟩` evaluated on the empirical radial
//! moments.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::moments::{power_means, radial_moments_symmetric, symmetric_factor, PowerMoments, PhaseMode, QuadratureDataset, RadialMomentSet, REDUCTION_CHUNK};
use nalgebra::{DMatrix, SymmetricEigen};

use crate::numeric::{horner, poly_square, CompensatedSum};
use crate::simplex::{nelder_mead, SimplexOptions};
use crate::witness::{evaluate_expectation, evaluate_variance, optimize_witness, SolverOptions, Witness};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Significance {
    pub mean: f64,
    pub std: f64,
    /// `mean / std`, the state-level ratio.
    pub g_state: f64,
    /// `mean / (std / √n)`.
    pub z_score: f64,
    pub samples: usize,
}

/// Per-sample weights `w_k` in the witness's scaled units.
fn sample_weights(w: &Witness) -> Vec<f64> {
    poly_square(&w.full_scaled())
        .into_iter()
        .enumerate()
        .map(|(k, c)| c * symmetric_factor(k))
        .collect()
}

/// Values of the per-sample statistic `f_i`.
pub fn sample_statistic(w: &Witness, data: &QuadratureDataset) -> Vec<f64> {
    let weights = sample_weights(w);
    let inv = 1.0 / w.scale();
    data.values()
        .iter()
        .map(|&x| {
            let y = x * inv;
            horner(&weights, y * y)
        })
        .collect()
}

/// Mean, spread and z-score of the per-sample statistic.
pub fn significance(w: &Witness, data: &QuadratureDataset) -> Result<Significance> {
    if data.phase_mode() != PhaseMode::Randomized {
        return Err(Error::InvalidArgument(
            "significance needs phase-randomized data; drop the phase tags first".into(),
        ));
    }
    let n = data.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("need at least 2 samples, got {n}")));
    }
    // the mean goes through the same moment pipeline as `evaluate_expectation`
    let power = PowerMoments {
        max_power: 2 * w.order(),
        mean: power_means(data.values(), w.order()),
        stderr: None,
        cov: None,
        samples: n,
    };
    let mean = evaluate_expectation(w, &radial_moments_symmetric(&power)?)?;
    let f = sample_statistic(w, data);
    let mut ss = CompensatedSum::new();
    for chunk in f.chunks(REDUCTION_CHUNK) {
        ss.merge(&chunk.iter().map(|v| (v - mean) * (v - mean)).collect());
    }
    let std = (ss.value() / (n as f64 - 1.0)).sqrt();
    if !(std > 0.0) {
        return Err(Error::DegenerateStatistic(format!(
            "per-sample statistic is constant ({mean}); no spread to compare against"
        )));
    }
    Ok(Significance {
        mean,
        std,
        g_state: mean / std,
        z_score: mean / std * (n as f64).sqrt(),
        samples: n,
    })
}

/// The empirical distribution of `t = (x/s)²` compressed into a Gauss
/// rule with `K + 1` nodes. The rule integrates every polynomial of degree
/// `≤ 2K + 1` in `t` exactly against the sample distribution, so the mean
/// and variance of any statistic of degree `≤ K` come out in `O(K²)` and
/// without the cancellation of a monomial covariance expansion.
///
/// Nodes and weights come from Lanczos on `diag(t)` with full
/// reorthogonalization, which is backward stable.
#[derive(Debug, Clone)]
pub struct SampleMoments {
    scale: f64,
    k_max: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    samples: usize,
}

impl SampleMoments {
    pub fn new(data: &QuadratureDataset, k_max: usize, scale: f64) -> Result<Self> {
        let n = data.len();
        if n < 2 {
            return Err(Error::InsufficientData(format!("need at least 2 samples, got {n}")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale must be positive, got {scale}")));
        }
        let inv = 1.0 / scale;
        let t: Vec<f64> = data.values().iter().map(|x| (x * inv).powi(2)).collect();
        let (alpha, beta) = lanczos(&t, k_max + 1);
        let m = alpha.len();
        let jacobi = DMatrix::from_fn(m, m, |i, j| match i.abs_diff(j) {
            0 => alpha[i],
            1 => beta[i.min(j)],
            _ => 0.0,
        });
        let eig = SymmetricEigen::new(jacobi);
        let nodes = eig.eigenvalues.iter().copied().collect();
        let weights = (0..m).map(|j| eig.eigenvectors[(0, j)].powi(2)).collect();
        Ok(Self { scale, k_max, nodes, weights, samples: n })
    }

    pub fn max_k(&self) -> usize {
        self.k_max
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    /// Sample mean of `t^k`.
    pub fn power_mean(&self, k: usize) -> f64 {
        let terms: CompensatedSum = self.nodes.iter().zip(&self.weights).map(|(t, w)| w * t.powi(k as i32)).collect();
        terms.value()
    }

    /// `(mean(f), std(f))` for a witness whose scale matches; `std` uses
    /// the `n − 1` denominator.
    fn mean_std(&self, w: &Witness) -> Option<(f64, f64)> {
        if w.order() > self.k_max {
            return None;
        }
        let weights = sample_weights(w);
        let f: Vec<f64> = self.nodes.iter().map(|&t| horner(&weights, t)).collect();
        let mean: CompensatedSum = f.iter().zip(&self.weights).map(|(v, l)| v * l).collect();
        let mean = mean.value();
        let ss: CompensatedSum = f.iter().zip(&self.weights).map(|(v, l)| l * (v - mean).powi(2)).collect();
        let n = self.samples as f64;
        let var = ss.value() * n / (n - 1.0);
        (var > 0.0).then(|| (mean, var.sqrt()))
    }
}

/// Recurrence coefficients of the orthonormal polynomials of the uniform
/// discrete measure on `t`, `steps` of them (fewer if the measure has fewer
/// support points). Returns `(α_0..α_{m−1}, β_1..β_{m−1})`.
fn lanczos(t: &[f64], steps: usize) -> (Vec<f64>, Vec<f64>) {
    let n = t.len();
    let dot = |a: &[f64], b: &[f64]| -> f64 {
        a.chunks(REDUCTION_CHUNK)
            .zip(b.chunks(REDUCTION_CHUNK))
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
            .collect::<CompensatedSum>()
            .value()
    };
    let mut basis: Vec<Vec<f64>> = vec![vec![1.0 / (n as f64).sqrt(); n]];
    let mut alpha = Vec::with_capacity(steps);
    let mut beta = Vec::with_capacity(steps);
    let tmax = t.iter().fold(0.0f64, |a, &b| a.max(b));
    loop {
        let q = basis.last().expect("basis is never empty");
        let mut v: Vec<f64> = t.iter().zip(q).map(|(ti, qi)| ti * qi).collect();
        alpha.push(dot(q, &v));
        if alpha.len() == steps {
            break;
        }
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &v);
                v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= c * bi);
            }
        }
        let norm = dot(&v, &v).sqrt();
        if !(norm > 1e-13 * tmax) {
            break;
        }
        beta.push(norm);
        v.iter_mut().for_each(|vi| *vi /= norm);
        basis.push(v);
    }
    (alpha, beta)
}

/// What the ratio `⟨𝔉⟩ / σ` is computed from.
#[derive(Debug, Clone, Copy)]
pub enum SignificanceObjective<'a> {
    /// Phase-space spread `σ_𝔉 = √(⟨𝔉²⟩ − ⟨𝔉⟩²)` from radial moments up to `4N`.
    PhaseSpace(&'a RadialMomentSet),
    /// Spread of the per-sample statistic over the data.
    Samples(&'a SampleMoments),
}

impl SignificanceObjective<'_> {
    /// Ratio at `w`, or `None` where the spread vanishes or is undefined.
    pub fn ratio(&self, w: &Witness) -> Option<f64> {
        match self {
            Self::PhaseSpace(m) => {
                let mean = evaluate_expectation(w, m).ok()?;
                let var = evaluate_variance(w, m).ok()?;
                (!var.negative && var.variance > 0.0).then(|| mean / var.variance.sqrt())
            }
            Self::Samples(s) => {
                let w = w.rescaled_to(s.scale).ok()?;
                s.mean_std(&w).map(|(m, sd)| m / sd)
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SignificanceOptions {
    pub simplex: SimplexOptions,
    /// Fresh simplices started from the running best after the first run.
    pub restarts: usize,
}

impl Default for SignificanceOptions {
    fn default() -> Self {
        Self { simplex: SimplexOptions::default(), restarts: 3 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SignificanceFit {
    pub witness: Witness,
    pub objective: f64,
    pub initial_objective: f64,
    pub converged: bool,
    pub iterations: usize,
    pub evaluations: usize,
}

/// Minimizes the ratio objective starting from `init` (and any extra
/// starting witnesses of equal or lower order). The returned objective is
/// never above the one at `init`.
pub fn optimize_significance_from(
    objective: SignificanceObjective<'_>,
    init: &Witness,
    extra_starts: &[Witness],
    opts: SignificanceOptions,
) -> Result<SignificanceFit> {
    let order = init.order();
    let scale = init.scale();
    let initial_objective = objective.ratio(init).ok_or_else(|| {
        Error::DegenerateStatistic("objective undefined at the initial witness (zero spread)".into())
    })?;
    let eval = |x: &[f64]| {
        Witness::from_scaled(order, scale, x.to_vec())
            .ok()
            .and_then(|w| objective.ratio(&w))
            .unwrap_or(f64::INFINITY)
    };

    let mut starts = vec![init.scaled_coeffs().to_vec()];
    for w in extra_starts {
        if w.order() <= order {
            starts.push(w.padded(order)?.rescaled_to(scale)?.scaled_coeffs().to_vec());
        }
    }

    let mut best_x = init.scaled_coeffs().to_vec();
    let mut best_f = initial_objective;
    let mut converged = false;
    let mut iterations = 0;
    let mut evaluations = 0;
    for start in starts {
        let mut x = start;
        for round in 0..=opts.restarts {
            let run = nelder_mead(eval, &x, opts.simplex);
            iterations += run.iterations;
            evaluations += run.evaluations;
            let improved = run.value < best_f;
            if run.value <= best_f {
                best_f = run.value;
                best_x = run.x.clone();
                converged = run.converged;
            }
            x = run.x;
            if round > 0 && !improved {
                break;
            }
        }
    }
    Ok(SignificanceFit {
        witness: Witness::from_scaled(order, scale, best_x)?,
        objective: best_f,
        initial_objective,
        converged,
        iterations,
        evaluations,
    })
}

/// Ratio-optimal witness of order `N`, initialized at the linear solution
/// on `moments`.
pub fn optimize_significance(
    objective: SignificanceObjective<'_>,
    moments: &RadialMomentSet,
    order: usize,
    solver: SolverOptions,
    opts: SignificanceOptions,
) -> Result<SignificanceFit> {
    if moments.mu.iter().skip(1).all(|&m| m == 0.0) {
        return Err(Error::DegenerateStatistic("moments describe a point mass at the origin".into()));
    }
    if let SignificanceObjective::PhaseSpace(m) = objective {
        m.require_order(4 * order)?;
    }
    let init = optimize_witness(moments, order, solver)?;
    optimize_significance_from(objective, &init.witness, &[], opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_statistic_is_degenerate() {
        let w = Witness::new(2, vec![0.0]).unwrap();
        let d = QuadratureDataset::randomized(vec![0.1, 0.5, -0.3]).unwrap();
        assert!(matches!(significance(&w, &d), Err(Error::DegenerateStatistic(_))));
    }

    #[test]
    fn significance_needs_two_samples() {
        let w = Witness::new(2, vec![-0.3]).unwrap();
        let d = QuadratureDataset::randomized(vec![0.1]).unwrap();
        assert!(matches!(significance(&w, &d), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn tagged_data_rejected() {
        let w = Witness::new(2, vec![-0.3]).unwrap();
        let d = QuadratureDataset::tagged(vec![0.1, 0.2], vec![0.0, 1.0]).unwrap();
        assert!(significance(&w, &d).is_err());
    }

    #[test]
    fn gauss_rule_matches_direct() {
        let xs: Vec<f64> = (0..500).map(|i| ((i as f64) * 0.731).sin() * 1.7).collect();
        let d = QuadratureDataset::randomized(xs).unwrap();
        let w = Witness::from_scaled(4, 1.1, vec![-0.6, 0.05]).unwrap();
        let direct = significance(&w, &d).unwrap();
        let sm = SampleMoments::new(&d, 4, 1.1).unwrap();
        let (m, sd) = sm.mean_std(&w).unwrap();
        assert!((m - direct.mean).abs() < 1e-12 * direct.mean.abs().max(1.0));
        assert!((sd - direct.std).abs() < 1e-10 * direct.std);
    }

    #[test]
    fn gauss_rule_reproduces_power_means() {
        let xs: Vec<f64> = (0..2000).map(|i| ((i as f64) * 0.377).cos() * (1.0 + (i % 7) as f64 * 0.3)).collect();
        let d = QuadratureDataset::randomized(xs.clone()).unwrap();
        let sm = SampleMoments::new(&d, 6, 1.3).unwrap();
        for k in 0..=13 {
            let direct: f64 = xs.iter().map(|x| (x / 1.3f64).powi(2 * k as i32)).sum::<f64>() / xs.len() as f64;
            assert!((sm.power_mean(k) - direct).abs() < 1e-12 * direct, "k = {k}");
        }
    }

    #[test]
    fn few_support_points_give_exact_short_rule() {
        let d = QuadratureDataset::randomized(vec![1.0, -1.0, 2.0, 2.0, 0.5]).unwrap();
        let sm = SampleMoments::new(&d, 8, 1.0).unwrap();
        assert_eq!(sm.nodes.len(), 3);
        let w = Witness::from_scaled(8, 1.0, vec![-0.5, 0.1, 0.01, -0.001]).unwrap();
        let direct = significance(&w, &d).unwrap();
        let (m, sd) = sm.mean_std(&w).unwrap();
        assert!((m - direct.mean).abs() < 1e-12 * direct.mean.abs().max(1.0));
        assert!((sd - direct.std).abs() < 1e-10 * direct.std);
    }
}
