//! `ehl`: entropy tables, hyperlink transforms, identity checks, leg-factor
//! solving and experiment datasets. All outputs are files written
//! atomically; diagnostics go to stderr.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ehl_core::experiments::{run_experiment, write_csv, ExperimentConfig, Figure};
use ehl_core::io::{read_entropies, Meta, TableFile, TableKind, Unit};
use ehl_core::legfactors::{LegFactorTable, VERIFIED_MAX_N};
use ehl_core::verify::{run_checks, CheckOptions, StateSpec, Suite};
use ehl_core::{
    ehl_table, solve_leg_factors, Boundary, Error, Family, LatticeTable, ModelKind, ModelSpec,
    PureState,
};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "ehl", version, about = "Entanglement hyperlinks of small quantum states")]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write entropic values in bits instead of nats.
    #[arg(long, global = true)]
    bits: bool,
    /// Seed for random states, chains, coarse-grainings and leg-factor solving.
    #[arg(long, global = true, env = "EHL_SEED")]
    seed: Option<u64>,
    /// Override the tolerance of every check.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute the entropy table of a state.
    Entropies {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Convert between entropy and hyperlink tables.
    Transform {
        /// Entropy or hyperlink table file.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        to: TableTarget,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run identity checks on a state; exit 1 if any fails.
    Check {
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteArg,
        #[command(flatten)]
        state: StateArgs,
        /// Leg-factor file enabling the even-legged reconstruction check.
        #[arg(long)]
        legs: Option<PathBuf>,
        /// Write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve for the even-legged reconstruction factors.
    Legfactors {
        /// Largest system size in the induction.
        #[arg(long, default_value_t = VERIFIED_MAX_N)]
        max_n: usize,
        /// Random states per system size.
        #[arg(long, default_value_t = 4)]
        states_per_n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Produce an experiment dataset as CSV.
    Experiment {
        #[arg(long, value_enum)]
        fig: FigArg,
        /// Output file, or directory with `--fig all`.
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated chain sizes (default depends on the figure).
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        /// Number of δ points evenly spaced in [-1, 1].
        #[arg(long)]
        delta_points: Option<usize>,
        /// Comma-separated δ values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "delta_points")]
        deltas: Option<Vec<f64>>,
        /// Random-hopping chains per size.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, value_enum)]
        bc: Option<BcArg>,
    },
}

#[derive(Args, Debug, Clone)]
struct StateArgs {
    /// Dense state file ({"n","d","amps_re","amps_im"}).
    #[arg(long, group = "source")]
    state_file: Option<PathBuf>,
    /// Chain model file ({"model","n","delta","t0","seed","bc","filling"}).
    #[arg(long, group = "source")]
    model_file: Option<PathBuf>,
    /// Named dense state.
    #[arg(long, value_enum, group = "source")]
    family: Option<FamilyArg>,
    /// Seeded random dense state.
    #[arg(long, group = "source")]
    random: bool,
    /// Free-fermion chain.
    #[arg(long, value_enum, group = "source")]
    model: Option<ModelArg>,
    /// Number of sites.
    #[arg(long)]
    n: Option<usize>,
    /// Dimerization δ in [-1, 1].
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    /// Mean hopping amplitude (default 1).
    #[arg(long)]
    t0: Option<f64>,
    /// Boundary condition (default open).
    #[arg(long, value_enum)]
    bc: Option<BcArg>,
    /// Occupied orbitals (default N/2).
    #[arg(long)]
    filling: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum TableTarget {
    Ehl,
    Entropy,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SuiteArg {
    All,
    Identities,
    Reconstruction,
    Factorization,
    CoarseGraining,
    Growth,
    Gaussian,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FigArg {
    Fact1,
    Fact2,
    Monogamy,
    Signs,
    Rofell,
    All,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FamilyArg {
    Product,
    BellPairs,
    Ghz,
    W,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModelArg {
    Dimerized,
    RandomHopping,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum BcArg {
    Open,
    Periodic,
}

impl From<BcArg> for Boundary {
    fn from(b: BcArg) -> Self {
        match b {
            BcArg::Open => Boundary::Open,
            BcArg::Periodic => Boundary::Periodic,
        }
    }
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::All => Suite::All,
            SuiteArg::Identities => Suite::Identities,
            SuiteArg::Reconstruction => Suite::Reconstruction,
            SuiteArg::Factorization => Suite::Factorization,
            SuiteArg::CoarseGraining => Suite::CoarseGraining,
            SuiteArg::Growth => Suite::Growth,
            SuiteArg::Gaussian => Suite::Gaussian,
        }
    }
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Product => Family::Product,
            FamilyArg::BellPairs => Family::BellPairs,
            FamilyArg::Ghz => Family::Ghz,
            FamilyArg::W => Family::W,
        }
    }
}

/// Failure of a subcommand, mapped onto the exit code.
enum Failure {
    Checks,
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(EXIT_INPUT);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(EXIT_CHECK_FAILED),
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { EXIT_INPUT } else { EXIT_NUMERIC })
        }
    }
}

fn unit(cli: &Cli) -> Unit {
    if cli.bits {
        Unit::Bits
    } else {
        Unit::Nats
    }
}

fn seed(cli: &Cli) -> u64 {
    cli.seed.unwrap_or(0)
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Entropies { state, out } => {
            let (label, entropies, config) = resolve_entropies(cli, state)?;
            let meta = Meta::new(Some(seed(cli)), json!({"command": "entropies", "state": label, "source": config}));
            write_atomic(out, &TableFile::entropy(&entropies, unit(cli), meta).to_json()?)?;
        }
        Command::Transform { input, to, out } => {
            let text = read(input)?;
            let source = TableFile::from_json(&text)?;
            let entropies = read_entropies(&text)?;
            let config = json!({
                "command": "transform",
                "input": input.display().to_string(),
                "input_meta": source.meta,
            });
            let meta = Meta::new(source.meta.seed, config);
            let file = match to {
                TableTarget::Ehl => TableFile::ehl(&ehl_table(&entropies), unit(cli), meta),
                TableTarget::Entropy => TableFile::new(TableKind::Entropy, &entropies, unit(cli), meta),
            };
            write_atomic(out, &file.to_json()?)?;
        }
        Command::Check {
            suite,
            state,
            legs,
            out,
        } => {
            let spec = state_spec(cli, state)?;
            let mut opts = CheckOptions {
                seed: seed(cli),
                ..CheckOptions::default()
            };
            if let Some(tol) = cli.tol {
                if !(tol > 0.0 && tol.is_finite()) {
                    return Err(Error::InvalidInput(format!("--tol must be positive, got {tol}")).into());
                }
                opts.identity_tol = tol;
                opts.reconstruction_tol = tol;
            }
            if let Some(path) = legs {
                opts.legs = Some(LegFactorTable::from_json(&read(path)?)?);
            }
            let report = run_checks((*suite).into(), &spec, &opts)?;
            println!("state {} (N = {})", report.state, report.n);
            for c in &report.checks {
                println!("{c}");
            }
            if let Some(path) = out {
                let doc = json!({
                    "meta": Meta::new(Some(opts.seed), json!({"command": "check", "suite": format!("{suite:?}").to_lowercase(), "state": report.state, "identity_tol": opts.identity_tol, "reconstruction_tol": opts.reconstruction_tol})),
                    "unit": Unit::Nats,
                    "passed": report.passed(),
                    "checks": report.checks,
                });
                write_atomic(path, &pretty(&doc)?)?;
            }
            if !report.passed() {
                eprintln!("{} check(s) failed", report.failures().count());
                return Err(Failure::Checks);
            }
        }
        Command::Legfactors {
            max_n,
            states_per_n,
            out,
        } => {
            if *max_n > VERIFIED_MAX_N {
                eprintln!(
                    "warning: N > {VERIFIED_MAX_N} is beyond the verified range; residuals are reported without guarantee"
                );
            }
            let sol = solve_leg_factors(*max_n, *states_per_n, seed(cli))?;
            for (rank, p, v) in sol.table.iter().filter(|&(r, p, _)| 2 * p <= r) {
                println!("Lambda({rank},{p}) = {v}");
            }
            let file = sol.table.to_file(Some(sol.diagnostics));
            let mut doc = serde_json::to_value(&file).map_err(Error::from)?;
            doc["meta"] = serde_json::to_value(Meta::new(
                Some(seed(cli)),
                json!({"command": "legfactors", "max_n": max_n, "states_per_n": states_per_n}),
            ))
            .map_err(Error::from)?;
            write_atomic(out, &pretty(&doc)?)?;
        }
        Command::Experiment {
            fig,
            out,
            sizes,
            delta_points,
            deltas,
            samples,
            bc,
        } => {
            let figs: Vec<Figure> = match fig {
                FigArg::All => Figure::ALL.to_vec(),
                FigArg::Fact1 => vec![Figure::Fact1],
                FigArg::Fact2 => vec![Figure::Fact2],
                FigArg::Monogamy => vec![Figure::Monogamy],
                FigArg::Signs => vec![Figure::Signs],
                FigArg::Rofell => vec![Figure::Rofell],
            };
            if matches!(fig, FigArg::All) {
                std::fs::create_dir_all(out).map_err(Error::from)?;
            }
            for f in figs {
                let mut cfg = ExperimentConfig::default_for(f, seed(cli));
                if let Some(s) = sizes {
                    cfg.sizes = s.clone();
                }
                if let Some(k) = delta_points {
                    cfg.deltas = ehl_core::experiments::delta_sweep(*k);
                }
                if let Some(d) = deltas {
                    cfg.deltas = d.clone();
                }
                if let Some(k) = samples {
                    cfg.random_samples = *k;
                }
                if let Some(b) = bc {
                    cfg.bc = (*b).into();
                }
                let result = run_experiment(f, &cfg)?;
                let path = if matches!(fig, FigArg::All) {
                    out.join(format!("{}.csv", f.name()))
                } else {
                    out.clone()
                };
                write_atomic(&path, &write_csv(&result, unit(cli))?)?;
                for s in &result.skipped {
                    eprintln!("skipped (degenerate Fermi level): {s}");
                }
                for (k, v) in &result.summary {
                    println!("{} {k}={v}", f.name());
                }
            }
        }
    }
    Ok(())
}

fn pretty(v: &Value) -> Outcome<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(Error::from)?;
    s.push('\n');
    Ok(s)
}

fn read(path: &Path) -> Outcome<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())).into())
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, contents: &str) -> Outcome {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(Error::from)?;
    tmp.write_all(contents.as_bytes()).map_err(Error::from)?;
    tmp.flush().map_err(Error::from)?;
    tmp.persist(path).map_err(|e| Error::from(e.error))?;
    Ok(())
}

fn require_n(args: &StateArgs) -> Outcome<usize> {
    args.n
        .ok_or_else(|| Error::InvalidInput("--n is required for this state source".into()).into())
}

fn state_spec(cli: &Cli, args: &StateArgs) -> Outcome<StateSpec> {
    if let Some(path) = &args.state_file {
        let state = PureState::<f64>::from_json(&read(path)?)?;
        return Ok(StateSpec::from_state(path.display().to_string(), state));
    }
    if let Some(path) = &args.model_file {
        return Ok(StateSpec::Gaussian(ModelSpec::from_json(&read(path)?)?));
    }
    if let Some(f) = args.family {
        return Ok(StateSpec::named(f.into(), require_n(args)?, Some(seed(cli)))?);
    }
    if args.random {
        return Ok(StateSpec::random(require_n(args)?, seed(cli))?);
    }
    if let Some(m) = args.model {
        let n = require_n(args)?;
        let mut spec = match m {
            ModelArg::Dimerized => ModelSpec::dimerized(n, args.delta.unwrap_or(0.0)),
            ModelArg::RandomHopping => ModelSpec::random_hopping(n, seed(cli)),
        };
        if spec.model == ModelKind::RandomHopping && args.delta.is_some() {
            return Err(Error::InvalidInput("--delta applies to the dimerized model only".into()).into());
        }
        if let Some(t0) = args.t0 {
            spec.t0 = t0;
        }
        if let Some(bc) = args.bc {
            spec.bc = bc.into();
        }
        spec.filling = args.filling;
        return Ok(StateSpec::Gaussian(spec));
    }
    Err(Error::InvalidInput(
        "choose a state: --state-file, --model-file, --family, --random or --model".into(),
    )
    .into())
}

fn resolve_entropies(cli: &Cli, args: &StateArgs) -> Outcome<(String, LatticeTable<f64>, Value)> {
    let spec = state_spec(cli, args)?;
    let label = spec.label();
    let (table, config) = match &spec {
        StateSpec::Pure { state, .. } => (state.entropy_table()?, json!({"kind": "dense", "n": state.n_sites()})),
        StateSpec::Gaussian(m) => (
            m.ground_state::<f64>()?.entropy_table()?,
            serde_json::to_value(m).map_err(Error::from)?,
        ),
    };
    Ok((label, table, config))
}
