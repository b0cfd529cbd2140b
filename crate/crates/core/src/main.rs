use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use clustax::checkers::{check_property, Cell, DEFAULT_SEED, DEFAULT_TRIALS};
use clustax::counterexamples::{default_epsilon, min_sum_violation, TWO_HALVES_PINNED_N};
use clustax::io::{read_instance, replay_report, ReportFile};
use clustax::plugin::{PluginEndpoint, PluginHandle, DEFAULT_TIMEOUT_MS};
use clustax::{
    build_chain, build_taxonomy_table, CheckBudget, ClusteringFunctionHandle, Error, FunctionSpec,
    Partitioning, Property, Weight,
};

const EXIT_PARSE: u8 = 1;
const EXIT_PRECONDITION: u8 = 2;
const EXIT_PLUGIN: u8 = 3;
const EXIT_TIES: u8 = 4;
const EXIT_FALSIFIED: u8 = 10;
const EXIT_DRIFT: u8 = 20;
const EXIT_REPLAY: u8 = 30;

#[derive(Parser)]
#[command(
    name = "clustax",
    version,
    about = "Exact clustering functions and axiom checkers"
)]
struct Cli {
    /// Worker threads for the checkers (default: available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Per-request timeout for plugin functions.
    #[arg(long, global = true, default_value_t = DEFAULT_TIMEOUT_MS)]
    plugin_timeout_ms: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster one instance file.
    Cluster {
        file: PathBuf,
        /// Built-in name (single-linkage, single-linkage-mst, mstc-lowest,
        /// mstc-highest, min-sum, constant) or `plugin:<command line>`.
        function: String,
        k: usize,
    },
    /// Check properties of one function.
    Check {
        function: String,
        /// Comma-separated property names (default: the five table properties).
        #[arg(long, value_delimiter = ',')]
        properties: Vec<Property>,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the taxonomy table for the four built-in functions.
    #[command(name = "table1")]
    Taxonomy {
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build and verify the transformation chain for an instance.
    Chain {
        file: PathBuf,
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Demonstrate the Min-Sum violation on the two-part instance.
    #[command(name = "theorem6")]
    MinSumViolation {
        #[arg(long, default_value_t = TWO_HALVES_PINNED_N)]
        n: usize,
        #[arg(long, default_value_t = default_epsilon())]
        epsilon: Weight,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-execute the evidence recorded in a report.
    Replay { report: PathBuf },
}

#[derive(Args)]
struct BudgetArgs {
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    /// `4-8` (every n in range, 2 <= k < n), or a list of `n:k` pairs.
    #[arg(long, default_value = "4-8")]
    sizes: String,
    #[arg(long, env = "CLUSTAX_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Skip the deterministic fixtures and rely on random trials only.
    #[arg(long)]
    no_fixtures: bool,
}

impl BudgetArgs {
    fn budget(&self) -> Result<CheckBudget, Error> {
        let mut b = CheckBudget::new(self.trials, parse_sizes(&self.sizes)?, self.seed)?;
        b.fixtures = !self.no_fixtures;
        Ok(b)
    }
}

fn parse_sizes(s: &str) -> Result<Vec<(usize, usize)>, Error> {
    let bad = || Error::InvalidConfig(format!("cannot read sizes {s:?}"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    if s.contains(':') {
        return s
            .split(',')
            .map(|pair| {
                let (n, k) = pair.split_once(':').ok_or_else(bad)?;
                Ok((num(n)?, num(k)?))
            })
            .collect();
    }
    let (lo, hi) = match s.split_once('-') {
        Some((a, b)) => (num(a)?, num(b)?),
        None => (num(s)?, num(s)?),
    };
    Ok(CheckBudget::sizes_for(lo..=hi))
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_)
        | Error::AsymmetricInput { .. }
        | Error::NonPositiveOffDiagonal { .. }
        | Error::NonZeroDiagonal { .. }
        | Error::TooFewPoints(_)
        | Error::NotSquare { .. }
        | Error::UnknownFunction(_) => EXIT_PARSE,
        Error::TiedWeights => EXIT_TIES,
        e if e.is_plugin_failure() => EXIT_PLUGIN,
        _ => EXIT_PRECONDITION,
    }
}

struct Failure(u8, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(exit_code(&e), e.to_string())
    }
}

fn handle_for(spec: &str, timeout_ms: u64) -> Result<ClusteringFunctionHandle, Error> {
    match spec.parse::<FunctionSpec>()? {
        FunctionSpec::Plugin(cmd) => {
            let ep = PluginEndpoint::from_command_line(&cmd)?.with_timeout_ms(timeout_ms)?;
            Ok(Arc::new(PluginHandle::connect(ep)?))
        }
        other => other.handle(),
    }
}

fn clusters_json(p: &Partitioning) -> String {
    serde_json::json!({ "clusters": p }).to_string()
}

fn emit(report: &ReportFile, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, report.to_json())
            .map_err(|e| Failure(EXIT_PRECONDITION, format!("{}: {e}", path.display()))),
        None => {
            print!("{}", report.to_json());
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    if let Some(w) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| Failure(EXIT_PRECONDITION, e.to_string()))?;
    }
    let timeout = cli.plugin_timeout_ms;
    match cli.command {
        Command::Cluster { file, function, k } => {
            let d = read_instance(&file)?;
            let f = handle_for(&function, timeout)?;
            println!("{}", clusters_json(&f.cluster(&d, k)?));
            Ok(0)
        }
        Command::Check {
            function,
            properties,
            budget,
            out,
        } => {
            let b = budget.budget()?;
            let f = handle_for(&function, timeout)?;
            let properties = if properties.is_empty() {
                Property::TABLE.to_vec()
            } else {
                properties
            };
            let mut report = ReportFile::new("check");
            report.seed = Some(b.seed);
            for p in properties {
                let v = check_property(f.as_ref(), p, &b)?;
                eprintln!("{:<24} {}", p.title(), v.cell_label());
                report.verdicts.push(v);
            }
            report.budget = Some(b);
            emit(&report, out.as_deref())?;
            Ok(if report.any_falsified() {
                EXIT_FALSIFIED
            } else {
                0
            })
        }
        Command::Taxonomy { budget, out } => {
            let b = budget.budget()?;
            let handles = FunctionSpec::table_rows()
                .iter()
                .map(FunctionSpec::handle)
                .collect::<Result<Vec<_>, _>>()?;
            let table = build_taxonomy_table(&handles, &b);
            let mut report = ReportFile::new("table1");
            report.seed = Some(b.seed);
            report.budget = Some(b);
            for cell in table.rows.iter().flat_map(|r| &r.cells) {
                match cell {
                    Cell::Verdict(v) => report.verdicts.push((**v).clone()),
                    Cell::Error {
                        property,
                        function,
                        message,
                    } => report
                        .errors
                        .push(format!("{function} / {property}: {message}")),
                }
            }
            let rendered = table.render();
            report.drift = table
                .drift()
                .iter()
                .map(|(f, p)| format!("{f}/{p}"))
                .collect();
            report.table = Some(rendered.clone());
            print!("{rendered}");
            if let Some(path) = &out {
                emit(&report, Some(path))?;
            }
            for d in &report.drift {
                eprintln!("drift: {d}");
            }
            Ok(if report.drift.is_empty() {
                0
            } else {
                EXIT_DRIFT
            })
        }
        Command::Chain { file, k, out } => {
            let d = read_instance(&file)?;
            let cert = build_chain(&d, k)?;
            for (idx, step) in cert.steps.iter().enumerate() {
                let kind = serde_json::to_value(step.kind).unwrap_or_default();
                let why = serde_json::to_value(step.justification).unwrap_or_default();
                println!(
                    "d{} {:<24} {:<18} moves={:<3} output={} preserved={}",
                    idx + 1,
                    kind.as_str().unwrap_or_default(),
                    why.as_str().unwrap_or_default(),
                    step.moves.len(),
                    step.output,
                    step.output == cert.gamma
                );
            }
            println!("verify=true");
            if let Some(path) = &out {
                let mut report = ReportFile::new("chain");
                report.chain = Some(cert);
                emit(&report, Some(path))?;
            }
            Ok(0)
        }
        Command::MinSumViolation { n, epsilon, out } => {
            let v = min_sum_violation(n, epsilon)?;
            println!("n = {}, epsilon = {}", v.instance.n, v.instance.epsilon);
            println!("before: {} (objective {})", v.gamma, v.gamma_objective);
            println!(
                "after setting w({}, {}) = {}: {} (objective {})",
                v.instance.x0,
                v.instance.y0,
                v.raised_weight,
                v.gamma_prime,
                v.gamma_prime_objective
            );
            println!("order-preserving: {}", v.order_preserving);
            println!("mst-preserving: {}", v.mst_preserving);
            println!("x0, y0 separated: {}", v.x0_y0_separated);
            if let Some(path) = &out {
                let mut report = ReportFile::new("theorem6");
                report.violation = Some(v);
                emit(&report, Some(path))?;
            }
            Ok(0)
        }
        Command::Replay { report } => {
            let text = std::fs::read_to_string(&report)
                .map_err(|e| Failure(EXIT_PARSE, format!("{}: {e}", report.display())))?;
            let report = ReportFile::from_json(&text)?;
            match replay_report(&report) {
                Ok(()) => {
                    println!("replayed {} verdicts: ok", report.verdicts.len());
                    Ok(0)
                }
                Err(failures) => {
                    for f in failures {
                        eprintln!("replay failed: {f}");
                    }
                    Ok(EXIT_REPLAY)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
