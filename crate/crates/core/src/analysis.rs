//! End-to-end witness analysis: per-order optimization over a dataset or
//! exact moments, onset detection, sweeps, profiles and the report document.

use serde::Serialize;

use crate::error::{Error, Result, SolveDiagnostics};
use crate::moments::{
    empirical_power_moments, radial_moments_angular, radial_moments_symmetric, PhaseMode, QuadratureDataset,
    RadialMomentSet, CANONICAL_VACUUM_VARIANCE, DEFAULT_MIN_BIN_COUNT,
};
use crate::significance::{
    optimize_significance_from, significance, SampleMoments, Significance, SignificanceObjective,
    SignificanceOptions,
};
use crate::states::{oracle_radial_moments, wigner_radial, StateSpec};
use crate::witness::{
    expectation_stderr, optimize_witness, psd_crosscheck, witness_profile, SolverOptions, Witness,
    DEFAULT_CONDITION_CAP,
};

pub const REPORT_SCHEMA: &str = "nonclassical.witness-report";
pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const LIBRARY_VERSION: &str = env!("CARGO_PKG_VERSION");
/// Generator behind the train/test split and bootstrap resampling.
pub const ANALYSIS_RNG: &str = "rand_chacha::ChaCha20Rng(seed_from_u64(seed))";
pub const DEFAULT_TOL_NEG: f64 = 1e-9;
pub const DEFAULT_Z_THRESHOLD: f64 = 5.0;
pub const DEFAULT_MAX_ORDER: usize = 16;
const MAX_HISTOGRAM_BINS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OnsetMode {
    /// First order with `min ⟨𝔉⟩ < −tol_neg`.
    Exact,
    /// First order with `z ≤ −z_threshold`.
    Statistical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitMode {
    /// Fit and score on the same samples.
    Same,
    /// Fit on a seeded random half, score on the other half.
    Half,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisConfig {
    pub max_order: usize,
    pub mode: OnsetMode,
    pub split: SplitMode,
    pub z_threshold: f64,
    pub tol_neg: f64,
    pub seed: u64,
    pub convention_variance: f64,
    /// Bootstrap resamples for the spread of `min ⟨𝔉⟩`; 0 keeps the delta method only.
    pub bootstrap: usize,
    /// Refine the linear witness against the significance ratio.
    pub optimize_significance: bool,
    pub rescale: bool,
    pub condition_cap: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            max_order: DEFAULT_MAX_ORDER,
            mode: OnsetMode::Statistical,
            split: SplitMode::Half,
            z_threshold: DEFAULT_Z_THRESHOLD,
            tol_neg: DEFAULT_TOL_NEG,
            seed: 0,
            convention_variance: CANONICAL_VACUUM_VARIANCE,
            bootstrap: 0,
            optimize_significance: true,
            rescale: true,
            condition_cap: DEFAULT_CONDITION_CAP,
        }
    }
}

impl AnalysisConfig {
    pub fn solver(&self) -> SolverOptions {
        SolverOptions { rescale: self.rescale, condition_cap: self.condition_cap, ..SolverOptions::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.max_order < 2 || !self.max_order.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "maximum order must be even and ≥ 2, got {}",
                self.max_order
            )));
        }
        if !(self.z_threshold > 0.0 && self.z_threshold.is_finite()) {
            return Err(Error::InvalidArgument(format!("z threshold must be positive, got {}", self.z_threshold)));
        }
        if !(self.tol_neg >= 0.0 && self.tol_neg.is_finite()) {
            return Err(Error::InvalidArgument(format!("negativity tolerance must be ≥ 0, got {}", self.tol_neg)));
        }
        if self.bootstrap == 1 {
            return Err(Error::InvalidArgument("bootstrap needs at least 2 resamples (or 0 to disable)".into()));
        }
        Ok(())
    }
}

/// Error recorded against a single order instead of aborting the run.
#[derive(Debug, Clone, Serialize)]
pub struct OrderError {
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<SolveDiagnostics>,
}

impl From<&Error> for OrderError {
    fn from(e: &Error) -> Self {
        let diagnostics = match e {
            Error::IllConditioned(d) => Some(d.clone()),
            _ => None,
        };
        Self { kind: e.kind(), message: e.to_string(), diagnostics }
    }
}

/// Witness coefficients together with how they scored.
#[derive(Debug, Clone, Serialize)]
pub struct ScoredWitness {
    /// `C_2, …, C_N` in original radial units.
    pub coeffs: Vec<f64>,
    /// The same coefficients in units of `r/s`.
    pub scaled_coeffs: Vec<f64>,
    pub scale: f64,
    /// Score on the evaluation samples.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub significance: Option<Significance>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<OrderError>,
}

impl ScoredWitness {
    fn new(w: &Witness, score: Option<Result<Significance>>) -> Self {
        let (significance, error) = match score {
            Some(Ok(s)) => (Some(s), None),
            Some(Err(e)) => (None, Some(OrderError::from(&e))),
            None => (None, None),
        };
        Self { coeffs: w.coeffs(), scaled_coeffs: w.scaled_coeffs().to_vec(), scale: w.scale(), significance, error }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioFit {
    /// Training-set ratio `mean / std` after refinement.
    pub objective: f64,
    /// Training-set ratio at the linear solution.
    pub initial_objective: f64,
    pub converged: bool,
    pub iterations: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderReport {
    pub order: usize,
    /// `min ⟨𝔉⟩` on the fitting moments; `None` when unbounded or not solved.
    pub min_f: Option<f64>,
    /// The quadratic form has no minimum (the moment block is indefinite).
    pub unbounded: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stationary_f: Option<f64>,
    /// Delta-method standard error of `min ⟨𝔉⟩`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_f_stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_f_bootstrap_stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition_number: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psd: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_eigenvalue: Option<f64>,
    /// Solution of the linear minimization.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub linear: Option<ScoredWitness>,
    /// Witness refined against the significance ratio.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refined: Option<ScoredWitness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_fit: Option<RatioFit>,
    /// Headline numbers: the refined witness when available, else the linear one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_state: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<OrderError>,
}

impl OrderReport {
    fn empty(order: usize) -> Self {
        Self {
            order,
            min_f: None,
            unbounded: false,
            stationary_f: None,
            min_f_stderr: None,
            min_f_bootstrap_stderr: None,
            condition_number: None,
            residual: None,
            psd: None,
            min_eigenvalue: None,
            linear: None,
            refined: None,
            ratio_fit: None,
            g_state: None,
            z_score: None,
            error: None,
        }
    }

    /// Negativity in the exact sense at tolerance `tol_neg`.
    pub fn is_negative(&self, tol_neg: f64) -> bool {
        self.unbounded || self.min_f.is_some_and(|f| f < -tol_neg)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Histogram {
    pub rule: &'static str,
    pub bin_width: f64,
    /// Left edge of the first bin; bin `i` covers `[start + i·w, start + (i+1)·w)`.
    pub start: f64,
    pub counts: Vec<usize>,
}

/// Histogram with Freedman–Diaconis bin width `2·IQR·n^{-1/3}`.
pub fn freedman_diaconis(values: &[f64]) -> Result<Histogram> {
    if values.is_empty() {
        return Err(Error::InsufficientData("histogram of an empty dataset".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let quantile = |q: f64| {
        let pos = q * (n - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
    };
    let (min, max) = (sorted[0], sorted[n - 1]);
    let iqr = quantile(0.75) - quantile(0.25);
    let range = max - min;
    if range == 0.0 {
        return Ok(Histogram { rule: "freedman-diaconis", bin_width: 1.0, start: min - 0.5, counts: vec![n] });
    }
    let mut width = 2.0 * iqr / (n as f64).cbrt();
    if !(width > 0.0) || range / width > MAX_HISTOGRAM_BINS as f64 {
        width = range / MAX_HISTOGRAM_BINS.min(n) as f64;
    }
    let bins = ((range / width).floor() as usize + 1).min(MAX_HISTOGRAM_BINS + 1);
    let mut counts = vec![0; bins];
    for &x in &sorted {
        let i = (((x - min) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    Ok(Histogram { rule: "freedman-diaconis", bin_width: width, start: min, counts })
}

/// Comparison of the phase-binned estimate of `⟨r^{2N}⟩` against the
/// phase-averaged one, for tagged data.
#[derive(Debug, Clone, Serialize)]
pub struct AngularCheck {
    pub order: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub angular: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub angular_stderr: Option<f64>,
    pub symmetric: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symmetric_stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<OrderError>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InputSummary {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    pub samples: usize,
    pub phase_mode: PhaseMode,
    /// Vacuum variance of the convention the data arrived in.
    pub convention_variance: f64,
    pub fit_samples: usize,
    pub evaluation_samples: usize,
    /// Largest witness order the data can support.
    pub highest_feasible_order: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    pub schema: &'static str,
    pub schema_version: u32,
    pub library_version: &'static str,
    pub config: AnalysisConfig,
    /// Vacuum variance of the internal convention.
    pub canonical_vacuum_variance: f64,
    pub seed: u64,
    pub rng: &'static str,
    pub input: InputSummary,
    pub per_order: Vec<OrderReport>,
    pub onset_order: Option<usize>,
    pub onset_exact: Option<usize>,
    pub onset_statistical: Option<usize>,
    pub histogram: Histogram,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub angular_check: Vec<AngularCheck>,
    pub notes: Vec<String>,
}

impl WitnessReport {
    /// Flat per-order table for plotting.
    pub fn to_tsv(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| x.to_string());
        let mut out = String::from("order\tmin_f\tmin_f_stderr\tg_state\tz_score\tlinear_z_score\tcondition_number\tpsd\n");
        for o in &self.per_order {
            let min_f = if o.unbounded { Some(f64::NEG_INFINITY) } else { o.min_f };
            let linear_z = o.linear.as_ref().and_then(|l| l.significance).map(|s| s.z_score);
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                o.order,
                fmt(min_f),
                fmt(o.min_f_stderr),
                fmt(o.g_state),
                fmt(o.z_score),
                fmt(linear_z),
                fmt(o.condition_number),
                o.psd.map_or("NA".to_string(), |p| p.to_string()),
            ));
        }
        out
    }
}

/// Distinct nonzero magnitudes `|x|`; a sample with `m` of them fixes at
/// most `m + 1` moments of a measure, so it supports orders `N ≤ 2(m − 1)`
/// before the moment matrix is exactly singular.
pub fn highest_feasible_order(data: &QuadratureDataset) -> usize {
    let mut mags: Vec<f64> = data.values().iter().map(|x| x.abs()).filter(|&x| x > 0.0).collect();
    mags.sort_by(f64::total_cmp);
    mags.dedup();
    2 * mags.len().saturating_sub(1)
}

/// Full per-order analysis of one dataset.
pub fn analyze_dataset(data: &QuadratureDataset, config: &AnalysisConfig) -> Result<WitnessReport> {
    analyze_dataset_at(data, config, None)
}

pub fn analyze_dataset_at(
    data: &QuadratureDataset,
    config: &AnalysisConfig,
    path: Option<String>,
) -> Result<WitnessReport> {
    config.validate()?;
    let n_max = config.max_order;
    let mut notes = Vec::new();

    let tagged = data.phase_mode() == PhaseMode::Tagged;
    let symmetric = data.clone().into_randomized();
    if tagged {
        notes.push(
            "phase tags ignored for the witness: moments come from the phase-averaged estimator; \
             the angular estimator is reported separately as a cross-check"
                .into(),
        );
    }

    let (fit, eval) = match config.split {
        SplitMode::Same => {
            notes.push(
                "same-data mode: coefficients were fitted on the samples they are scored on, \
                 so z-scores are biased toward significance"
                    .into(),
            );
            (symmetric.clone(), symmetric.clone())
        }
        SplitMode::Half => symmetric.split_half(config.seed)?,
    };
    if fit.len() < 2 || eval.len() < 2 {
        return Err(Error::InsufficientData(format!("need at least 2 samples to fit and score, got {}", data.len())));
    }

    let feasible = highest_feasible_order(&fit);
    if feasible < 2 {
        return Err(Error::InsufficientData(
            "the data hold fewer than two distinct nonzero magnitudes; no witness order is feasible".into(),
        ));
    }
    if n_max > feasible {
        return Err(Error::InsufficientData(format!(
            "order {n_max} needs at least {} distinct nonzero magnitudes in the fitting set; \
             the highest feasible order is {feasible}",
            n_max / 2 + 1
        )));
    }

    let power = empirical_power_moments(&fit, 2 * n_max)?;
    let moments = radial_moments_symmetric(&power)?;
    let solver = config.solver();
    let scale = if config.rescale { moments.mu[1].sqrt() } else { 1.0 };
    let sample_moments = if config.optimize_significance { Some(SampleMoments::new(&fit, n_max, scale)?) } else { None };

    let bootstrap = if config.bootstrap > 0 {
        Some(bootstrap_min_f(&fit, n_max, config.bootstrap, config.seed, solver)?)
    } else {
        None
    };

    let mut per_order = Vec::with_capacity(n_max / 2);
    let mut best_previous: Option<Witness> = None;
    for order in (2..=n_max).step_by(2) {
        let mut rep = OrderReport::empty(order);
        if let Ok(p) = psd_crosscheck(&moments, order) {
            rep.psd = Some(p.psd);
            rep.min_eigenvalue = Some(p.min_eigenvalue);
        }
        if let Some(b) = &bootstrap {
            rep.min_f_bootstrap_stderr = b[order / 2 - 1];
        }
        let lin = match optimize_witness(&moments, order, solver) {
            Ok(lin) => lin,
            Err(e) => {
                rep.error = Some(OrderError::from(&e));
                per_order.push(rep);
                continue;
            }
        };
        rep.unbounded = !lin.bounded;
        rep.min_f = lin.bounded.then_some(lin.min_f);
        rep.stationary_f = Some(lin.stationary_f);
        rep.condition_number = Some(lin.condition_number);
        rep.residual = Some(lin.residual);
        if lin.bounded {
            rep.min_f_stderr = expectation_stderr(&lin.witness, &moments);
        }

        let lin_score = significance(&lin.witness, &eval);
        rep.linear = Some(ScoredWitness::new(&lin.witness, Some(lin_score)));

        let mut best = lin.witness.clone();
        if let Some(sm) = &sample_moments {
            let starts: Vec<Witness> = best_previous.iter().cloned().collect();
            match optimize_significance_from(
                SignificanceObjective::Samples(sm),
                &lin.witness,
                &starts,
                SignificanceOptions::default(),
            ) {
                Ok(fitres) => {
                    rep.ratio_fit = Some(RatioFit {
                        objective: fitres.objective,
                        initial_objective: fitres.initial_objective,
                        converged: fitres.converged,
                        iterations: fitres.iterations,
                        evaluations: fitres.evaluations,
                    });
                    let score = significance(&fitres.witness, &eval);
                    rep.refined = Some(ScoredWitness::new(&fitres.witness, Some(score)));
                    best = fitres.witness;
                }
                Err(e) => {
                    rep.refined = Some(ScoredWitness { error: Some(OrderError::from(&e)), ..ScoredWitness::new(&lin.witness, None) });
                }
            }
        }
        let headline = rep
            .refined
            .as_ref()
            .and_then(|r| r.significance)
            .or_else(|| rep.linear.as_ref().and_then(|l| l.significance));
        rep.g_state = headline.map(|s| s.g_state);
        rep.z_score = headline.map(|s| s.z_score);
        best_previous = Some(best);
        per_order.push(rep);
    }

    let onset_exact = per_order.iter().find(|o| o.is_negative(config.tol_neg)).map(|o| o.order);
    let onset_statistical =
        per_order.iter().find(|o| o.z_score.is_some_and(|z| z <= -config.z_threshold)).map(|o| o.order);
    if onset_exact != onset_statistical {
        notes.push(format!(
            "statistical-vs-exact: min ⟨𝔉⟩ first drops below −{} at order {}, while z first reaches −{} at order {}",
            config.tol_neg,
            fmt_order(onset_exact),
            config.z_threshold,
            fmt_order(onset_statistical)
        ));
    }
    for o in &per_order {
        if let Some(e) = &o.error {
            notes.push(format!("order {} skipped: {}", o.order, e.message));
        }
        if o.unbounded {
            notes.push(format!(
                "order {}: the fitted moment matrix is indefinite, so ⟨𝔉⟩ is unbounded below at this order",
                o.order
            ));
        }
    }

    let angular_check = if tagged { angular_check(data, &moments, n_max) } else { Vec::new() };

    Ok(WitnessReport {
        schema: REPORT_SCHEMA,
        schema_version: REPORT_SCHEMA_VERSION,
        library_version: LIBRARY_VERSION,
        config: config.clone(),
        canonical_vacuum_variance: CANONICAL_VACUUM_VARIANCE,
        seed: config.seed,
        rng: ANALYSIS_RNG,
        input: InputSummary {
            path,
            samples: data.len(),
            phase_mode: data.phase_mode(),
            convention_variance: data.scale_convention(),
            fit_samples: fit.len(),
            evaluation_samples: eval.len(),
            highest_feasible_order: feasible,
        },
        onset_order: match config.mode {
            OnsetMode::Exact => onset_exact,
            OnsetMode::Statistical => onset_statistical,
        },
        onset_exact,
        onset_statistical,
        per_order,
        histogram: freedman_diaconis(data.values())?,
        angular_check,
        notes,
    })
}

fn fmt_order(o: Option<usize>) -> String {
    o.map_or_else(|| "none".into(), |n| n.to_string())
}

fn angular_check(data: &QuadratureDataset, moments: &RadialMomentSet, n_max: usize) -> Vec<AngularCheck> {
    (1..=n_max.min(moments.max_k()) as u32)
        .map(|n| {
            let k = n as usize;
            let mut row = AngularCheck {
                order: n,
                angular: None,
                angular_stderr: None,
                symmetric: moments.mu[k],
                symmetric_stderr: moments.stderr.as_ref().map(|s| s[k]),
                error: None,
            };
            match radial_moments_angular(data, n, DEFAULT_MIN_BIN_COUNT) {
                Ok(a) => {
                    row.angular = Some(a.value);
                    row.angular_stderr = Some(a.stderr);
                }
                Err(e) => row.error = Some(OrderError::from(&e)),
            }
            row
        })
        .collect()
}

/// Bootstrap spread of `min ⟨𝔉⟩` at each order `2, 4, …, n_max`.
fn bootstrap_min_f(
    data: &QuadratureDataset,
    n_max: usize,
    resamples: usize,
    seed: u64,
    solver: SolverOptions,
) -> Result<Vec<Option<f64>>> {
    use rand::{RngExt, SeedableRng};
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let n = data.len();
    let mut draws: Vec<Vec<f64>> = vec![Vec::with_capacity(resamples); n_max / 2];
    for _ in 0..resamples {
        let values: Vec<f64> = (0..n).map(|_| data.values()[rng.random_range(0..n)]).collect();
        let resampled = QuadratureDataset::randomized(values)?;
        let Ok(m) = empirical_power_moments(&resampled, 2 * n_max).and_then(|p| radial_moments_symmetric(&p)) else {
            continue;
        };
        for order in (2..=n_max).step_by(2) {
            if let Ok(w) = optimize_witness(&m, order, solver) {
                if w.bounded {
                    draws[order / 2 - 1].push(w.min_f);
                }
            }
        }
    }
    Ok(draws
        .into_iter()
        .map(|d| {
            (d.len() >= 2).then(|| {
                let mean = d.iter().sum::<f64>() / d.len() as f64;
                (d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (d.len() - 1) as f64).sqrt()
            })
        })
        .collect())
}

/// Exact-mode onset over a moment set.
#[derive(Debug, Clone, Serialize)]
pub struct ExactOnset {
    pub onset: Option<usize>,
    /// `(order, min ⟨𝔉⟩)`; `−∞` marks an unbounded order.
    pub min_f: Vec<(usize, f64)>,
    /// Orders whose solve was refused.
    pub skipped: Vec<SolveDiagnostics>,
}

/// Smallest even `N ≤ n_max` with `min ⟨𝔉⟩ < −tol_neg`. Orders the solver
/// refuses as ill-conditioned are skipped and recorded.
pub fn onset_exact(moments: &RadialMomentSet, n_max: usize, tol_neg: f64, solver: SolverOptions) -> Result<ExactOnset> {
    if n_max < 2 || !n_max.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("maximum order must be even and ≥ 2, got {n_max}")));
    }
    moments.require_order(2 * n_max)?;
    let mut out = ExactOnset { onset: None, min_f: Vec::new(), skipped: Vec::new() };
    for order in (2..=n_max).step_by(2) {
        match optimize_witness(moments, order, solver) {
            Ok(w) => {
                out.min_f.push((order, w.min_f));
                if out.onset.is_none() && w.min_f < -tol_neg {
                    out.onset = Some(order);
                }
            }
            Err(Error::IllConditioned(d)) => out.skipped.push(d),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Where the moments for an onset search come from.
#[derive(Debug, Clone, Copy)]
pub enum MomentProvider<'a> {
    Moments(&'a RadialMomentSet),
    State(&'a StateSpec),
    Dataset(&'a QuadratureDataset),
}

/// Onset order under `config.mode`. Statistical mode needs a dataset.
pub fn onset_order(provider: MomentProvider<'_>, config: &AnalysisConfig) -> Result<Option<usize>> {
    config.validate()?;
    let exact = |m: &RadialMomentSet| onset_exact(m, config.max_order, config.tol_neg, config.solver()).map(|o| o.onset);
    match (provider, config.mode) {
        (MomentProvider::Moments(m), OnsetMode::Exact) => exact(m),
        (MomentProvider::State(s), OnsetMode::Exact) => exact(&oracle_radial_moments(s, config.max_order)?),
        (MomentProvider::Dataset(d), _) => Ok(analyze_dataset(d, config)?.onset_order),
        (_, OnsetMode::Statistical) => Err(Error::InvalidArgument(
            "statistical onset needs quadrature samples, not moments".into(),
        )),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub eta: f64,
    pub onset: Option<usize>,
    pub skipped: Vec<SolveDiagnostics>,
}

/// Exact-mode onset of the vacuum/single-photon mixture across `etas`.
pub fn sweep(etas: &[f64], n_max: usize, tol_neg: f64, solver: SolverOptions) -> Result<Vec<SweepPoint>> {
    etas.iter()
        .map(|&eta| {
            let state = StateSpec::fock_mixture(eta)?;
            let m = oracle_radial_moments(&state, n_max)?;
            let o = onset_exact(&m, n_max, tol_neg, solver)?;
            Ok(SweepPoint { eta, onset: o.onset, skipped: o.skipped })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProfileRow {
    pub r: f64,
    pub f: f64,
    pub wigner: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Profile {
    pub state: StateSpec,
    pub order: usize,
    pub coeffs: Vec<f64>,
    pub min_f: f64,
    pub rows: Vec<ProfileRow>,
}

impl Profile {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("r\tF\tW\n");
        for row in &self.rows {
            out.push_str(&format!("{}\t{}\t{}\n", row.r, row.f, row.wigner));
        }
        out
    }
}

/// Optimal order-`N` witness for a reference state, tabulated next to its
/// Wigner function.
pub fn profile(state: &StateSpec, order: usize, grid: &[f64], solver: SolverOptions) -> Result<Profile> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("radial grid is empty".into()));
    }
    let state = state.validated()?;
    let moments = oracle_radial_moments(&state, order.max(1))?;
    let w = optimize_witness(&moments, order, solver)?;
    let f = witness_profile(&w.witness, grid)?;
    let rows = grid
        .iter()
        .zip(f)
        .map(|(&r, f)| ProfileRow { r, f, wigner: wigner_radial(&state, r) })
        .collect();
    Ok(Profile { state, order, coeffs: w.witness.coeffs(), min_f: w.min_f, rows })
}

/// Parses `start:stop:count` (inclusive, evenly spaced) or a comma list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Ok(Vec::new());
    }
    let num = |s: &str| -> Result<f64> {
        s.trim().parse::<f64>().map_err(|_| Error::InvalidArgument(format!("`{s}` is not a number")))
    };
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [a, b, c] = parts.as_slice() else {
            return Err(Error::InvalidArgument(format!("grid `{spec}` is not start:stop:count")));
        };
        let (start, stop) = (num(a)?, num(b)?);
        let count: usize = c
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("grid count `{c}` is not a nonnegative integer")))?;
        return Ok(match count {
            0 => Vec::new(),
            1 => vec![start],
            _ => (0..count).map(|i| start + (stop - start) * i as f64 / (count - 1) as f64).collect(),
        });
    }
    spec.split(',').map(num).collect()
}
