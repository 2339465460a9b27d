use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use nonclassical::analysis::{
    analyze_dataset_at, parse_grid, profile, sweep, AnalysisConfig, OnsetMode, SplitMode, DEFAULT_MAX_ORDER,
    DEFAULT_TOL_NEG, DEFAULT_Z_THRESHOLD,
};
use nonclassical::io::{read_csv_file, write_atomic, write_csv};
use nonclassical::moments::{PhaseMode, CANONICAL_VACUUM_VARIANCE};
use nonclassical::sampler::{sample, GENERATOR};
use nonclassical::states::oracle_radial_moments;
use nonclassical::witness::{SolverOptions, DEFAULT_CONDITION_CAP};
use nonclassical::{Error, Result, StateSpec};

#[derive(Parser)]
#[command(name = "nonclassical", version, about = "Certify phase-space negativity from homodyne quadrature data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the witness analysis on a quadrature CSV and emit a JSON report.
    Analyze(AnalyzeArgs),
    /// Draw synthetic quadratures for a reference state and write them as CSV.
    Simulate(SimulateArgs),
    /// Print the exact radial moments ⟨r^{2k}⟩ of a reference state.
    Oracle(OracleArgs),
    /// Exact onset order of the vacuum/single-photon mixture across a grid of fractions.
    Sweep(SweepArgs),
    /// Tabulate the optimal witness 𝔉(r) next to the Wigner function W(r).
    Profile(ProfileArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Statistical,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    Same,
    Half,
}

#[derive(Clone, Copy, ValueEnum)]
enum StateKind {
    FockMixture,
    Thermal,
    Coherent,
}

#[derive(Clone, Copy, ValueEnum)]
enum PhaseArg {
    Randomized,
    Tagged,
}

#[derive(Args)]
struct StateArgs {
    /// Reference state family.
    #[arg(long, value_enum, required_unless_present = "state_json")]
    state: Option<StateKind>,
    /// Single-photon fraction of the fock-mixture state.
    #[arg(long)]
    eta: Option<f64>,
    /// Mean photon number of the thermal state.
    #[arg(long)]
    nbar: Option<f64>,
    /// Mean photon number |α|² of the phase-averaged coherent state.
    #[arg(long)]
    alpha_sq: Option<f64>,
    /// State as JSON, e.g. '{"kind":"fock_mixture","eta":0.62}'.
    #[arg(long, conflicts_with = "state")]
    state_json: Option<String>,
}

impl StateArgs {
    fn resolve(&self) -> Result<StateSpec> {
        if let Some(json) = &self.state_json {
            let spec: StateSpec = serde_json::from_str(json)
                .map_err(|e| Error::InvalidArgument(format!("state JSON: {e}")))?;
            return spec.validated();
        }
        let need = |v: Option<f64>, flag: &str| {
            v.ok_or_else(|| Error::InvalidArgument(format!("this state needs --{flag}")))
        };
        match self.state.expect("clap enforces --state or --state-json") {
            StateKind::FockMixture => StateSpec::fock_mixture(need(self.eta, "eta")?),
            StateKind::Thermal => StateSpec::thermal(need(self.nbar, "nbar")?),
            StateKind::Coherent => StateSpec::coherent_phase_averaged(need(self.alpha_sq, "alpha-sq")?),
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Input CSV (`quadrature` or `quadrature,phase` header).
    input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MAX_ORDER)]
    max_order: usize,
    #[arg(long, value_enum, default_value = "statistical")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "half")]
    split: SplitArg,
    #[arg(long, default_value_t = DEFAULT_Z_THRESHOLD)]
    z_threshold: f64,
    #[arg(long, default_value_t = DEFAULT_TOL_NEG)]
    tol_neg: f64,
    /// Seed for the train/test split and bootstrap.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Vacuum variance of the convention the input was recorded in.
    #[arg(long, default_value_t = CANONICAL_VACUUM_VARIANCE)]
    convention_variance: f64,
    /// Bootstrap resamples for the spread of min ⟨𝔉⟩ (0 = delta method only).
    #[arg(long, default_value_t = 0)]
    bootstrap: usize,
    /// Skip the significance-ratio refinement of the linear witness.
    #[arg(long)]
    no_refine: bool,
    /// Solve with raw moments instead of r/s-rescaled ones.
    #[arg(long)]
    no_rescale: bool,
    #[arg(long, default_value_t = DEFAULT_CONDITION_CAP)]
    condition_cap: f64,
    /// Write the JSON report here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Also write a per-order TSV table.
    #[arg(long)]
    tsv: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    state: StateArgs,
    /// Number of samples.
    #[arg(short = 'n', long)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "randomized")]
    phases: PhaseArg,
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    state: StateArgs,
    /// Highest moment index k.
    #[arg(short = 'k', long)]
    k_max: usize,
}

#[derive(Args)]
struct SweepArgs {
    /// Fractions as `start:stop:count` or a comma list.
    #[arg(long, default_value = "0:1:21")]
    etas: String,
    #[arg(long, default_value_t = 20)]
    max_order: usize,
    #[arg(long, default_value_t = DEFAULT_TOL_NEG)]
    tol_neg: f64,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    state: StateArgs,
    /// Witness order N.
    #[arg(long)]
    order: usize,
    /// Radii as `start:stop:count` or a comma list.
    #[arg(long, default_value = "0:4:81")]
    grid: String,
    /// Emit JSON instead of TSV.
    #[arg(long)]
    json: bool,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn fmt_onset(o: Option<usize>) -> String {
    o.map_or_else(|| "none".into(), |n| n.to_string())
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    let config = AnalysisConfig {
        max_order: args.max_order,
        mode: match args.mode {
            ModeArg::Exact => OnsetMode::Exact,
            ModeArg::Statistical => OnsetMode::Statistical,
        },
        split: match args.split {
            SplitArg::Same => SplitMode::Same,
            SplitArg::Half => SplitMode::Half,
        },
        z_threshold: args.z_threshold,
        tol_neg: args.tol_neg,
        seed: args.seed,
        convention_variance: args.convention_variance,
        bootstrap: args.bootstrap,
        optimize_significance: !args.no_refine,
        rescale: !args.no_rescale,
        condition_cap: args.condition_cap,
    };
    let data = read_csv_file(&args.input, args.convention_variance)?;
    let report = analyze_dataset_at(&data, &config, Some(args.input.display().to_string()))?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    emit(args.output.as_deref(), &json)?;
    if let Some(tsv) = &args.tsv {
        write_atomic(tsv, report.to_tsv().as_bytes())?;
    }
    eprintln!(
        "{} samples, orders 2..{}: onset {} (exact {}, statistical {})",
        data.len(),
        config.max_order,
        fmt_onset(report.onset_order),
        fmt_onset(report.onset_exact),
        fmt_onset(report.onset_statistical)
    );
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let state = args.state.resolve()?;
    let mode = match args.phases {
        PhaseArg::Randomized => PhaseMode::Randomized,
        PhaseArg::Tagged => PhaseMode::Tagged,
    };
    let data = sample(&state, args.samples, args.seed, mode)?;
    let comments = vec![
        format!("nonclassical {} simulate", env!("CARGO_PKG_VERSION")),
        format!("state: {}", serde_json::to_string(&state).expect("state serializes")),
        format!("samples: {}", args.samples),
        format!("seed: {}", args.seed),
        format!("generator: {GENERATOR}"),
        format!("vacuum variance: {CANONICAL_VACUUM_VARIANCE}"),
    ];
    let mut buf = Vec::with_capacity(args.samples * 24);
    write_csv(&mut buf, &data, &comments)?;
    write_atomic(&args.output, &buf)
}

fn oracle(args: OracleArgs) -> Result<()> {
    let state = args.state.resolve()?;
    let m = oracle_radial_moments(&state, args.k_max)?;
    let mut out = String::from("k\tmu\n");
    for (k, mu) in m.mu.iter().enumerate().skip(1) {
        out.push_str(&format!("{k}\t{mu}\n"));
    }
    emit(None, &out)
}

fn run_sweep(args: SweepArgs) -> Result<()> {
    let etas = parse_grid(&args.etas)?;
    if etas.is_empty() {
        return Err(Error::InvalidArgument("fraction grid is empty".into()));
    }
    let points = sweep(&etas, args.max_order, args.tol_neg, SolverOptions::default())?;
    let mut out = String::from("eta\tonset\n");
    for p in &points {
        out.push_str(&format!("{}\t{}\n", p.eta, fmt_onset(p.onset)));
        for d in &p.skipped {
            eprintln!("eta {}: order {} skipped ({})", p.eta, d.order, d.reason);
        }
    }
    emit(args.output.as_deref(), &out)
}

fn run_profile(args: ProfileArgs) -> Result<()> {
    let state = args.state.resolve()?;
    let grid = parse_grid(&args.grid)?;
    let table = profile(&state, args.order, &grid, SolverOptions::default())?;
    let text = if args.json {
        serde_json::to_string_pretty(&table).expect("profile serializes") + "\n"
    } else {
        table.to_tsv()
    };
    emit(args.output.as_deref(), &text)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) => 2,
        Error::Parse { .. } => 3,
        Error::Io(_) => 4,
        Error::InsufficientData(_) | Error::IncompleteInput(_) | Error::InsufficientAngularCoverage { .. } => 5,
        Error::IllConditioned(_) => 6,
        Error::DegenerateStatistic(_) => 7,
        Error::OraclePrecision(_) => 8,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Simulate(a) => simulate(a),
        Command::Oracle(a) => oracle(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Profile(a) => run_profile(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
