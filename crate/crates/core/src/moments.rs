//! Quadrature datasets, empirical power moments, and their conversion to
//! radial phase-space moments `⟨r^{2k}⟩`.
//!
//! All values live in the convention where the vacuum quadrature variance
//! is 1/2, so that vacuum radial moments are `k!`. Datasets recorded in a
//! different convention are rescaled once, at construction.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigenvalues;
use crate::numeric::CompensatedSum;

/// Vacuum quadrature variance of the internal convention.
pub const CANONICAL_VACUUM_VARIANCE: f64 = 0.5;

/// Largest `N` for which the exact angular coefficients fit in `u128`.
pub const MAX_EXACT_ORDER: u32 = 60;

/// Fixed chunk length of the moment reduction tree.
pub const REDUCTION_CHUNK: usize = 4096;

pub const DEFAULT_MIN_BIN_COUNT: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseMode {
    Randomized,
    Tagged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentSource {
    Empirical,
    Oracle,
}

/// Immutable set of measured quadratures.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureDataset {
    values: Vec<f64>,
    phases: Option<Vec<f64>>,
    scale_convention: f64,
}

impl QuadratureDataset {
    /// Phase-randomized data already in the canonical convention.
    pub fn randomized(values: Vec<f64>) -> Result<Self> {
        Self::build(values, None, CANONICAL_VACUUM_VARIANCE)
    }

    /// Phase-tagged data; every phase must lie in `[0, 2π)`.
    pub fn tagged(values: Vec<f64>, phases: Vec<f64>) -> Result<Self> {
        Self::build(values, Some(phases), CANONICAL_VACUUM_VARIANCE)
    }

    /// Data recorded in a convention whose vacuum variance is
    /// `vacuum_variance`; values are rescaled to the canonical 1/2.
    pub fn with_convention(values: Vec<f64>, phases: Option<Vec<f64>>, vacuum_variance: f64) -> Result<Self> {
        Self::build(values, phases, vacuum_variance)
    }

    fn build(mut values: Vec<f64>, phases: Option<Vec<f64>>, vacuum_variance: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("dataset must be non-empty".into()));
        }
        if !(vacuum_variance > 0.0 && vacuum_variance.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "vacuum variance must be positive, got {vacuum_variance}"
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("sample {i} is not finite")));
        }
        if let Some(ph) = &phases {
            if ph.len() != values.len() {
                return Err(Error::InvalidArgument(format!(
                    "{} phases for {} samples",
                    ph.len(),
                    values.len()
                )));
            }
            if let Some(i) = ph.iter().position(|p| !(0.0..TAU).contains(p)) {
                return Err(Error::InvalidArgument(format!(
                    "phase of sample {i} ({}) outside [0, 2π)",
                    ph[i]
                )));
            }
        }
        if vacuum_variance != CANONICAL_VACUUM_VARIANCE {
            let factor = (CANONICAL_VACUUM_VARIANCE / vacuum_variance).sqrt();
            values.iter_mut().for_each(|v| *v *= factor);
        }
        Ok(Self { values, phases, scale_convention: vacuum_variance })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Quadratures in the canonical convention.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn phases(&self) -> Option<&[f64]> {
        self.phases.as_deref()
    }

    pub fn phase_mode(&self) -> PhaseMode {
        if self.phases.is_some() {
            PhaseMode::Tagged
        } else {
            PhaseMode::Randomized
        }
    }

    /// Vacuum variance of the convention the data was recorded in.
    pub fn scale_convention(&self) -> f64 {
        self.scale_convention
    }

    /// Drops the phase tags.
    pub fn into_randomized(self) -> Self {
        Self { phases: None, ..self }
    }

    /// Seeded 50/50 partition: the first half of a ChaCha20 shuffle of the
    /// sample indices forms the first returned set.
    pub fn split_half(&self, seed: u64) -> Result<(Self, Self)> {
        if self.len() < 4 {
            return Err(Error::InsufficientData(format!(
                "cannot split {} samples into two halves of at least 2",
                self.len()
            )));
        }
        let mut idx: Vec<usize> = (0..self.len()).collect();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        idx.shuffle(&mut rng);
        let (a, b) = idx.split_at(self.len() / 2);
        Ok((self.subset(a), self.subset(b)))
    }

    fn subset(&self, idx: &[usize]) -> Self {
        Self {
            values: idx.iter().map(|&i| self.values[i]).collect(),
            phases: self.phases.as_ref().map(|p| idx.iter().map(|&i| p[i]).collect()),
            scale_convention: self.scale_convention,
        }
    }
}

/// `A_{2N} = C(2N, N)⁻¹ 2^{2N} / (2N)`, exactly.
pub fn angular_coefficient(n: u32) -> Result<Ratio<u128>> {
    if n == 0 || n > MAX_EXACT_ORDER {
        return Err(Error::InvalidArgument(format!(
            "angular coefficient order must be in 1..={MAX_EXACT_ORDER}, got {n}"
        )));
    }
    let n = n as u128;
    Ok(Ratio::new(1u128 << (2 * n), central_binomial(n) * 2 * n))
}

/// `B_{2k} = C(2k, k)⁻¹ 2^{2k}`, the factor in `⟨r^{2k}⟩ = B_{2k}⟨x^{2k}⟩`
/// for rotationally invariant states. `B_0 = 1`.
pub fn symmetric_coefficient(k: u32) -> Result<Ratio<u128>> {
    if k > MAX_EXACT_ORDER {
        return Err(Error::InvalidArgument(format!(
            "symmetric coefficient order must be at most {MAX_EXACT_ORDER}, got {k}"
        )));
    }
    let k = k as u128;
    Ok(Ratio::new(1u128 << (2 * k), central_binomial(k)))
}

pub(crate) fn ratio_to_f64(r: &Ratio<u128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `B_{2k}` as a float, for `k ≤ MAX_EXACT_ORDER`.
pub fn symmetric_factor(k: usize) -> f64 {
    ratio_to_f64(&symmetric_coefficient(k as u32).expect("order within exact range"))
}

fn central_binomial(n: u128) -> u128 {
    // C(2n, i+1) = C(2n, i) (2n - i) / (i + 1); every intermediate is exact
    (0..n).fold(1u128, |c, i| c * (2 * n - i) / (i + 1))
}

/// Empirical means of `x^{2k}` with their sampling errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerMoments {
    /// Highest power, `2K`.
    pub max_power: usize,
    /// `mean[k]` estimates `⟨x^{2k}⟩` for `k = 0..=K`; `mean[0] = 1`.
    pub mean: Vec<f64>,
    /// Standard error of each mean (zero for exact inputs).
    pub stderr: Option<Vec<f64>>,
    /// Covariance of the mean estimators, `(K+1)×(K+1)`, row/column 0 zero.
    pub cov: Option<Vec<Vec<f64>>>,
    pub samples: usize,
}

impl PowerMoments {
    /// Exact quadrature moments, e.g. from an oracle; `means[k]` is `⟨x^{2k}⟩`.
    pub fn exact(max_power: usize, means: Vec<f64>) -> Self {
        Self { max_power, mean: means, stderr: None, cov: None, samples: 0 }
    }

    pub fn max_k(&self) -> usize {
        self.max_power / 2
    }
}

fn check_even_power(max_power: usize) -> Result<usize> {
    if max_power < 2 || !max_power.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "maximum power must be an even integer ≥ 2, got {max_power}"
        )));
    }
    Ok(max_power / 2)
}

/// `(x², x⁴, …, x^{2K})` of one sample into `out[1..=K]`.
#[inline]
pub(crate) fn even_powers(x: f64, out: &mut [f64]) {
    let t = x * x;
    let mut p = 1.0;
    out[0] = 1.0;
    for slot in out.iter_mut().skip(1) {
        p *= t;
        *slot = p;
    }
}

/// Means of `x^{2k}`, `k = 0..=K`, by chunked compensated summation. Every
/// estimate of `⟨x^{2k}⟩` in the crate goes through here, so identities
/// between them hold to the last bit.
pub(crate) fn power_means(values: &[f64], k_max: usize) -> Vec<f64> {
    let dim = k_max + 1;
    let mut pw = vec![0.0; dim];
    let mut sums = vec![CompensatedSum::new(); dim];
    for chunk in values.chunks(REDUCTION_CHUNK) {
        let mut local = vec![CompensatedSum::new(); dim];
        for &x in chunk {
            even_powers(x, &mut pw);
            for (acc, &p) in local.iter_mut().zip(&pw).skip(1) {
                acc.add(p);
            }
        }
        for (acc, part) in sums.iter_mut().zip(&local) {
            acc.merge(part);
        }
    }
    let mut mean: Vec<f64> = sums.iter().map(|s| s.value() / values.len() as f64).collect();
    mean[0] = 1.0;
    mean
}

/// Sample means of `x^{2k}`, their standard errors, and the covariance of
/// the mean estimators. Accumulation runs over fixed-length chunks with
/// compensated sums, merged in chunk order.
pub fn empirical_power_moments(data: &QuadratureDataset, max_power: usize) -> Result<PowerMoments> {
    let k_max = check_even_power(max_power)?;
    let n = data.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "standard errors need at least 2 samples, got {n}"
        )));
    }
    let dim = k_max + 1;
    let mut pw = vec![0.0; dim];
    let nf = n as f64;
    let mean = power_means(data.values(), k_max);

    // centered second pass
    let mut cross = vec![CompensatedSum::new(); dim * dim];
    let mut dev = vec![0.0; dim];
    for chunk in data.values().chunks(REDUCTION_CHUNK) {
        let mut local = vec![CompensatedSum::new(); dim * dim];
        for &x in chunk {
            even_powers(x, &mut pw);
            for k in 1..dim {
                dev[k] = pw[k] - mean[k];
            }
            for j in 1..dim {
                for k in j..dim {
                    local[j * dim + k].add(dev[j] * dev[k]);
                }
            }
        }
        for (acc, part) in cross.iter_mut().zip(&local) {
            acc.merge(part);
        }
    }
    let denom = (nf - 1.0) * nf;
    let mut cov = vec![vec![0.0; dim]; dim];
    for j in 1..dim {
        for k in j..dim {
            let c = cross[j * dim + k].value() / denom;
            cov[j][k] = c;
            cov[k][j] = c;
        }
    }
    let stderr = (0..dim).map(|k| cov[k][k].max(0.0).sqrt()).collect();
    Ok(PowerMoments { max_power, mean, stderr: Some(stderr), cov: Some(cov), samples: n })
}

/// Radial moments `⟨r^{2k}⟩`, `k = 0..=K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialMomentSet {
    pub max_order: usize,
    pub mu: Vec<f64>,
    pub stderr: Option<Vec<f64>>,
    pub cov: Option<Vec<Vec<f64>>>,
    pub source: MomentSource,
}

const COV_TOL: f64 = 1e-10;

impl RadialMomentSet {
    /// Validates `mu[0] = 1` and finite nonnegative entries. A point mass at
    /// the origin has `mu[k] = 0` for `k ≥ 1`, so zeros are accepted.
    pub fn new(mu: Vec<f64>, source: MomentSource) -> Result<Self> {
        Self::with_errors(mu, None, None, source)
    }

    pub fn with_errors(
        mu: Vec<f64>,
        stderr: Option<Vec<f64>>,
        cov: Option<Vec<Vec<f64>>>,
        source: MomentSource,
    ) -> Result<Self> {
        if mu.len() < 2 {
            return Err(Error::InvalidArgument("radial moment set needs at least ⟨r²⟩".into()));
        }
        if mu[0] != 1.0 {
            return Err(Error::InvalidArgument(format!("mu[0] must be 1, got {}", mu[0])));
        }
        if let Some(k) = mu.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "mu[{k}] = {} is not a finite nonnegative moment",
                mu[k]
            )));
        }
        let dim = mu.len();
        if let Some(se) = &stderr {
            if se.len() != dim {
                return Err(Error::InvalidArgument("stderr length mismatch".into()));
            }
        }
        if let Some(c) = &cov {
            check_covariance(c, dim)?;
        }
        Ok(Self { max_order: 2 * (dim - 1), mu, stderr, cov, source })
    }

    pub fn max_k(&self) -> usize {
        self.mu.len() - 1
    }

    /// `⟨r^{2k}⟩`, or `IncompleteInput` when `k` exceeds the available order.
    pub fn get(&self, k: usize) -> Result<f64> {
        self.mu.get(k).copied().ok_or_else(|| {
            Error::IncompleteInput(format!(
                "⟨r^{}⟩ requested but moments only reach order {}",
                2 * k,
                self.max_order
            ))
        })
    }

    pub fn require_order(&self, order: usize) -> Result<()> {
        if order > self.max_order {
            Err(Error::IncompleteInput(format!(
                "order {order} requested but moments only reach order {}",
                self.max_order
            )))
        } else {
            Ok(())
        }
    }

    /// Moments of `r·s`: `mu[k] s^{2k}`, with errors transformed alike.
    pub fn scaled(&self, s: f64) -> Self {
        let s2 = s * s;
        let factors: Vec<f64> = (0..self.mu.len()).map(|k| s2.powi(k as i32)).collect();
        Self {
            max_order: self.max_order,
            mu: self.mu.iter().zip(&factors).map(|(m, f)| m * f).collect(),
            stderr: self.stderr.as_ref().map(|se| se.iter().zip(&factors).map(|(e, f)| e * f).collect()),
            cov: self.cov.as_ref().map(|c| {
                c.iter()
                    .enumerate()
                    .map(|(j, row)| row.iter().enumerate().map(|(k, v)| v * factors[j] * factors[k]).collect())
                    .collect()
            }),
            source: self.source,
        }
    }

    /// Leading `K' + 1` moments.
    pub fn truncated(&self, k: usize) -> Result<Self> {
        self.get(k)?;
        let cut = k + 1;
        Ok(Self {
            max_order: 2 * k,
            mu: self.mu[..cut].to_vec(),
            stderr: self.stderr.as_ref().map(|s| s[..cut].to_vec()),
            cov: self.cov.as_ref().map(|c| c[..cut].iter().map(|r| r[..cut].to_vec()).collect()),
            source: self.source,
        })
    }
}

fn check_covariance(c: &[Vec<f64>], dim: usize) -> Result<()> {
    if c.len() != dim || c.iter().any(|r| r.len() != dim) {
        return Err(Error::InvalidArgument("covariance shape mismatch".into()));
    }
    let scale = c.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for j in 0..dim {
        for k in 0..j {
            let tol = COV_TOL * c[j][k].abs().max(c[k][j].abs()).max(f64::MIN_POSITIVE);
            if (c[j][k] - c[k][j]).abs() > tol {
                return Err(Error::InvalidArgument(format!("covariance not symmetric at ({j}, {k})")));
            }
        }
    }
    if scale > 0.0 {
        let m = DMatrix::from_fn(dim, dim, |i, j| c[i][j] / scale);
        let min = symmetric_eigenvalues(&m)[0];
        if min < -COV_TOL {
            return Err(Error::InvalidArgument(format!(
                "covariance not positive semidefinite (relative eigenvalue {min:.3e})"
            )));
        }
    }
    Ok(())
}

/// `⟨r^{2k}⟩ = B_{2k} ⟨x^{2k}⟩`, valid for phase-randomized measurements.
pub fn radial_moments_symmetric(power: &PowerMoments) -> Result<RadialMomentSet> {
    let k_max = check_even_power(power.max_power)?;
    let dim = k_max + 1;
    if power.mean.len() < dim {
        return Err(Error::IncompleteInput(format!(
            "⟨x^{}⟩ missing: only {} power moments supplied",
            2 * power.mean.len(),
            power.mean.len()
        )));
    }
    if let Some(k) = power.mean[..dim].iter().position(|v| !v.is_finite()) {
        return Err(Error::IncompleteInput(format!("⟨x^{}⟩ is not a number", 2 * k)));
    }
    let b: Vec<f64> = (0..dim).map(symmetric_factor).collect();
    let mut mu: Vec<f64> = power.mean[..dim].iter().zip(&b).map(|(m, f)| m * f).collect();
    mu[0] = 1.0;
    let stderr = power
        .stderr
        .as_ref()
        .map(|se| se[..dim].iter().zip(&b).map(|(e, f)| e * f).collect());
    let cov = power.cov.as_ref().map(|c| {
        (0..dim)
            .map(|j| (0..dim).map(|k| c[j][k] * b[j] * b[k]).collect())
            .collect()
    });
    let source = if power.samples > 0 { MomentSource::Empirical } else { MomentSource::Oracle };
    RadialMomentSet::with_errors(mu, stderr, cov, source)
}

/// `⟨r^{2N}⟩` from phase-tagged data through the angular-sum identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngularMoment {
    pub order: u32,
    pub value: f64,
    pub stderr: f64,
    /// Samples assigned to each target angle `mπ/2N`, `m = 1..=2N`.
    pub bin_counts: Vec<usize>,
}

/// Bins samples by nearest target angle `mπ/2N` (modulo π) and combines the
/// per-angle `2N`-th moments with weight `A_{2N}`.
pub fn radial_moments_angular(data: &QuadratureDataset, n: u32, min_bin_count: usize) -> Result<AngularMoment> {
    let coef = ratio_to_f64(&angular_coefficient(n)?);
    let phases = data.phases().ok_or_else(|| {
        Error::InvalidArgument("angular moments need phase-tagged data".into())
    })?;
    let bins = 2 * n as usize;
    let width = PI / bins as f64;
    let mut sums = vec![CompensatedSum::new(); bins];
    let mut counts = vec![0usize; bins];
    let mut members: Vec<Vec<f64>> = vec![Vec::new(); bins];
    for (&x, &phi) in data.values().iter().zip(phases) {
        // target m sits at m·width; index m-1, with m = 2N ≡ 0 (mod π)
        let m = ((phi.rem_euclid(PI) / width).round() as usize) % bins;
        let slot = (m + bins - 1) % bins;
        let p = x.powi(2 * n as i32);
        sums[slot].add(p);
        counts[slot] += 1;
        members[slot].push(p);
    }
    let deficient: Vec<usize> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c < min_bin_count.max(2))
        .map(|(i, _)| i + 1)
        .collect();
    if !deficient.is_empty() {
        return Err(Error::InsufficientAngularCoverage { deficient, min_count: min_bin_count });
    }
    let mut total = CompensatedSum::new();
    let mut var = CompensatedSum::new();
    for slot in 0..bins {
        let c = counts[slot] as f64;
        let mean = sums[slot].value() / c;
        let ss: CompensatedSum = members[slot].iter().map(|p| (p - mean) * (p - mean)).collect();
        total.add(mean);
        var.add(ss.value() / (c - 1.0) / c);
    }
    Ok(AngularMoment {
        order: n,
        value: coef * total.value(),
        stderr: coef * var.value().sqrt(),
        bin_counts: counts,
    })
}

/// Bootstrap standard errors of the symmetric radial moments
/// `⟨r^{2k}⟩`, `k = 0..=K` (index 0 is always zero).
pub fn bootstrap_radial_stderr(data: &QuadratureDataset, max_power: usize, resamples: usize, seed: u64) -> Result<Vec<f64>> {
    use rand::RngExt;
    let k_max = check_even_power(max_power)?;
    if data.len() < 2 || resamples < 2 {
        return Err(Error::InsufficientData("bootstrap needs ≥ 2 samples and ≥ 2 resamples".into()));
    }
    let dim = k_max + 1;
    let n = data.len();
    let b: Vec<f64> = (0..dim).map(symmetric_factor).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut pw = vec![0.0; dim];
    let mut replicates = vec![Vec::with_capacity(resamples); dim];
    for _ in 0..resamples {
        let mut acc = vec![CompensatedSum::new(); dim];
        for _ in 0..n {
            let x = data.values()[rng.random_range(0..n)];
            even_powers(x, &mut pw);
            for k in 1..dim {
                acc[k].add(pw[k]);
            }
        }
        for k in 1..dim {
            replicates[k].push(b[k] * acc[k].value() / n as f64);
        }
    }
    Ok((0..dim)
        .map(|k| {
            if k == 0 {
                return 0.0;
            }
            let r = &replicates[k];
            let m = r.iter().copied().collect::<CompensatedSum>().value() / r.len() as f64;
            let ss: CompensatedSum = r.iter().map(|v| (v - m) * (v - m)).collect();
            (ss.value() / (r.len() as f64 - 1.0)).sqrt()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angular_coefficient_low_orders() {
        assert_eq!(angular_coefficient(1).unwrap(), Ratio::from_integer(1));
        assert_eq!(angular_coefficient(2).unwrap(), Ratio::new(2, 3));
        assert_eq!(angular_coefficient(3).unwrap(), Ratio::new(8, 15));
    }

    #[test]
    fn angular_coefficient_rejects_zero_and_overflow() {
        assert!(matches!(angular_coefficient(0), Err(Error::InvalidArgument(_))));
        assert!(matches!(angular_coefficient(61), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn angular_and_symmetric_coefficients_agree() {
        for n in 1..=30u32 {
            let a = angular_coefficient(n).unwrap();
            let b = symmetric_coefficient(n).unwrap();
            assert_eq!(a * Ratio::from_integer(2 * n as u128), b, "N = {n}");
        }
    }

    #[test]
    fn constant_magnitude_samples_have_zero_error() {
        let data = QuadratureDataset::randomized(vec![1.0, -1.0, 1.0, -1.0]).unwrap();
        let pm = empirical_power_moments(&data, 4).unwrap();
        assert_eq!(&pm.mean[1..], &[1.0, 1.0]);
        assert_eq!(&pm.stderr.unwrap()[1..], &[0.0, 0.0]);
    }

    #[test]
    fn single_sample_is_insufficient() {
        let data = QuadratureDataset::randomized(vec![0.3]).unwrap();
        assert!(matches!(empirical_power_moments(&data, 2), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn odd_power_rejected() {
        let data = QuadratureDataset::randomized(vec![0.3, 0.1]).unwrap();
        assert!(matches!(empirical_power_moments(&data, 3), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn dataset_invariants() {
        assert!(QuadratureDataset::randomized(vec![]).is_err());
        assert!(QuadratureDataset::randomized(vec![f64::NAN]).is_err());
        assert!(QuadratureDataset::tagged(vec![1.0], vec![TAU]).is_err());
        assert!(QuadratureDataset::tagged(vec![1.0, 2.0], vec![0.0]).is_err());
        let d = QuadratureDataset::tagged(vec![1.0], vec![0.5]).unwrap();
        assert_eq!(d.phase_mode(), PhaseMode::Tagged);
        assert_eq!(d.into_randomized().phase_mode(), PhaseMode::Randomized);
    }

    #[test]
    fn convention_rescales_to_half() {
        let d = QuadratureDataset::with_convention(vec![2.0], None, 2.0).unwrap();
        assert_eq!(d.values(), &[1.0]);
        assert_eq!(d.scale_convention(), 2.0);
    }

    #[test]
    fn symmetric_conversion_examples() {
        let r = radial_moments_symmetric(&PowerMoments::exact(4, vec![1.0, 0.5, 0.75])).unwrap();
        assert!((r.mu[1] - 1.0).abs() < 1e-15);
        assert!((r.mu[2] - 2.0).abs() < 1e-15);
        let z = radial_moments_symmetric(&PowerMoments::exact(4, vec![1.0, 0.0, 0.0])).unwrap();
        assert_eq!(&z.mu[1..], &[0.0, 0.0]);
    }

    #[test]
    fn symmetric_conversion_missing_moment() {
        let err = radial_moments_symmetric(&PowerMoments::exact(6, vec![1.0, 0.5])).unwrap_err();
        assert!(matches!(err, Error::IncompleteInput(_)));
    }

    #[test]
    fn angular_two_bins_order_one() {
        // phases 0 → x, π/2 → p
        let xs = vec![1.0, -2.0, 0.5, 1.5];
        let ps = vec![0.3, 0.7, -1.1, 2.0];
        let mut values = xs.clone();
        values.extend(&ps);
        let mut phases = vec![0.0; 4];
        phases.extend(vec![PI / 2.0; 4]);
        let d = QuadratureDataset::tagged(values, phases).unwrap();
        let got = radial_moments_angular(&d, 1, 2).unwrap();
        let mean = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64;
        assert!((got.value - (mean(&xs) + mean(&ps))).abs() < 1e-14);
        assert_eq!(got.bin_counts, vec![4, 4]);
    }

    #[test]
    fn angular_single_phase_lacks_coverage() {
        let d = QuadratureDataset::tagged(vec![0.1; 500], vec![0.0; 500]).unwrap();
        for n in 1..4 {
            match radial_moments_angular(&d, n, DEFAULT_MIN_BIN_COUNT) {
                Err(Error::InsufficientAngularCoverage { deficient, .. }) => {
                    assert_eq!(deficient.len(), 2 * n as usize - 1)
                }
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn angular_needs_tags() {
        let d = QuadratureDataset::randomized(vec![0.1, 0.2]).unwrap();
        assert!(radial_moments_angular(&d, 1, 1).is_err());
    }

    #[test]
    fn covariance_must_be_psd() {
        let bad = vec![vec![0.0, 0.0, 0.0], vec![0.0, 1.0, 2.0], vec![0.0, 2.0, 1.0]];
        assert!(RadialMomentSet::with_errors(vec![1.0, 1.0, 2.0], None, Some(bad), MomentSource::Empirical).is_err());
        let asym = vec![vec![0.0, 0.0], vec![0.1, 1.0]];
        assert!(RadialMomentSet::with_errors(vec![1.0, 1.0], None, Some(asym), MomentSource::Empirical).is_err());
    }

    #[test]
    fn moment_set_rejects_bad_zeroth() {
        assert!(RadialMomentSet::new(vec![2.0, 1.0], MomentSource::Oracle).is_err());
        assert!(RadialMomentSet::new(vec![1.0, -1.0], MomentSource::Oracle).is_err());
    }

    #[test]
    fn split_is_seeded_partition() {
        let d = QuadratureDataset::randomized((0..101).map(|i| i as f64).collect()).unwrap();
        let (a, b) = d.split_half(7).unwrap();
        let (a2, _) = d.split_half(7).unwrap();
        assert_eq!(a, a2);
        assert_eq!(a.len() + b.len(), 101);
        let mut all: Vec<f64> = a.values().iter().chain(b.values()).copied().collect();
        all.sort_by(f64::total_cmp);
        assert_eq!(all, d.values());
    }
}
