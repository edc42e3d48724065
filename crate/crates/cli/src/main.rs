//! `blameworthy` command-line workflow.
//!
//! A model directory holds `scenario.txt`, `vtree.txt`, `circuit.sdd`,
//! `psdd.txt` and, once learned, `utility.txt`. Every command's output is
//! also appended to the session directory (`$BLAMEWORTHY_SESSION`, default
//! `./blameworthy-session`).

mod session;

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use blameworthy::blame::{BlameError, BlameModel, BlameQuery, ContextDistribution};
use blameworthy::circuits::{compile_scenario, Circuit, Vtree, VtreeStrategy};
use blameworthy::data::{self, builtin, load_dataset, LungCancerParams, TrolleyParams};
use blameworthy::logic::{PartialAssignment, Scenario};
use blameworthy::oracle::agreement;
use blameworthy::psdd::Psdd;
use blameworthy::utility::{learn_utility, UtilityFunction, UtilitySpec};
use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use session::Session;

const SCENARIO_FILE: &str = "scenario.txt";
const VTREE_FILE: &str = "vtree.txt";
const CIRCUIT_FILE: &str = "circuit.sdd";
const PSDD_FILE: &str = "psdd.txt";
const UTILITY_FILE: &str = "utility.txt";

/// Deviation the verify command accepts between fast path and oracle.
const VERIFY_TOLERANCE: f64 = 1e-9;

#[derive(Parser)]
#[command(name = "blameworthy", version, about = "Compile decision scenarios, fit models and score blameworthiness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a scenario's constraints into a circuit.
    Compile {
        /// Scenario file, or the name of a built-in scenario.
        scenario: String,
        #[arg(long, default_value = "balanced")]
        vtree: VtreeStrategy,
        /// Model directory to create.
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit model parameters from a CSV dataset.
    Fit {
        model: PathBuf,
        data: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        smoothing: f64,
        /// Directory for psdd.txt; defaults to the model directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Learn a utility function from a fitted model.
    LearnUtility {
        model: PathBuf,
        /// Linear weights per outcome variable (the default).
        #[arg(long, conflicts_with = "tabular")]
        linear: bool,
        /// One value per outcome assignment.
        #[arg(long)]
        tabular: bool,
        #[arg(long)]
        context_relative: bool,
        #[arg(long, default_value_t = blameworthy::utility::DEFAULT_LAMBDA)]
        lambda: f64,
        /// Output file; defaults to utility.txt in the model directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Answer a blame query.
    Blame {
        model: PathBuf,
        /// Query file; omit with --interactive.
        query: Option<PathBuf>,
        /// Utility file; defaults to utility.txt in the model directory.
        #[arg(long)]
        utility: Option<PathBuf>,
        /// Context weight table (`weight name...` lines), replacing the query's.
        #[arg(long)]
        contexts: Option<PathBuf>,
        /// Cost scale, replacing the query's.
        #[arg(long = "N", visible_alias = "n")]
        n: Option<f64>,
        /// Prompt for the query on stdin.
        #[arg(long)]
        interactive: bool,
        /// Print the machine-readable record instead of sentences.
        #[arg(long)]
        json: bool,
    },
    /// Compare every quantity against the brute-force oracle.
    Verify {
        model: PathBuf,
        #[arg(long)]
        utility: Option<PathBuf>,
    },
    /// Sample a synthetic dataset for a built-in scenario.
    Generate {
        domain: Domain,
        #[arg(long, default_value_t = 1000)]
        rows: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Probability of following the recommended strategy (lung cancer).
        #[arg(long, default_value_t = 0.9)]
        adherence: f64,
        /// JSON file of medical parameters (lung cancer).
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Probability queries against a fitted model.
    Query {
        model: PathBuf,
        #[command(subcommand)]
        kind: QueryKind,
    },
}

#[derive(Subcommand)]
enum QueryKind {
    /// Pr(evidence), e.g. `"A_5 !L_5"`.
    Marginal { evidence: String },
    /// Pr(query | given).
    Conditional { query: String, given: String },
    /// Most probable world extending the evidence.
    Mpe {
        #[arg(default_value = "")]
        evidence: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Domain {
    LungCancer,
    Trolley,
    Teamwork,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Build(String),
    #[error("{0}")]
    Query(String),
    #[error("{0}; the minimum admissible N is anything above {1}")]
    NBound(String, f64),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Usage(_) => 2,
            CliError::Parse(_) => 3,
            CliError::Build(_) => 4,
            CliError::Query(_) => 5,
            CliError::NBound(..) => 6,
        }
    }
}

fn parse_err(what: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Parse(format!("{}: {e}", what.display()))
}

fn blame_err(e: BlameError) -> CliError {
    match e {
        BlameError::NBound { floor, .. } => CliError::NBound(e.to_string(), floor),
        BlameError::Parse { .. } => CliError::Parse(e.to_string()),
        other => CliError::Query(other.to_string()),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

struct Model {
    scenario: Scenario,
    circuit: Circuit,
}

fn load_circuit(dir: &Path) -> Result<Model, CliError> {
    let sp = dir.join(SCENARIO_FILE);
    let scenario = Scenario::parse(&read(&sp)?).map_err(|e| parse_err(&sp, e))?;
    let vp = dir.join(VTREE_FILE);
    let vtree = Vtree::parse(&read(&vp)?, &scenario).map_err(|e| parse_err(&vp, e))?;
    let cp = dir.join(CIRCUIT_FILE);
    let circuit = Circuit::from_text(&read(&cp)?, vtree, &scenario).map_err(|e| parse_err(&cp, e))?;
    Ok(Model { scenario, circuit })
}

fn load_psdd(dir: &Path, m: &Model) -> Result<Psdd, CliError> {
    let pp = dir.join(PSDD_FILE);
    Psdd::from_text(&read(&pp)?, &m.circuit, &m.scenario).map_err(|e| parse_err(&pp, e))
}

fn load_utility(dir: &Path, explicit: Option<&Path>, sc: &Scenario) -> Result<UtilityFunction, CliError> {
    let path = explicit.map(Path::to_path_buf).unwrap_or_else(|| dir.join(UTILITY_FILE));
    UtilityFunction::from_text(&read(&path)?, sc).map_err(|e| parse_err(&path, e))
}

fn load_scenario(source: &str) -> Result<Scenario, CliError> {
    let path = Path::new(source);
    if path.exists() {
        return Scenario::parse(&read(path)?).map_err(|e| parse_err(path, e));
    }
    match builtin(source) {
        Some(b) => Ok(b.scenario()),
        None => Err(CliError::Io {
            path: path.to_path_buf(),
            source: io::Error::new(io::ErrorKind::NotFound, "no such file or built-in scenario"),
        }),
    }
}

fn evidence(text: &str, sc: &Scenario) -> Result<PartialAssignment, CliError> {
    PartialAssignment::parse(text, sc).map_err(|e| CliError::Parse(format!("evidence `{text}`: {e}")))
}

fn run(cli: Cli, session: &mut Session) -> Result<String, CliError> {
    match cli.command {
        Command::Compile { scenario, vtree, out } => {
            let sc = load_scenario(&scenario)?;
            let circuit = compile_scenario(&sc, vtree).map_err(|e| CliError::Build(e.to_string()))?;
            create_dir(&out)?;
            write(&out.join(SCENARIO_FILE), &sc.to_text())?;
            write(&out.join(VTREE_FILE), &circuit.vtree().to_text(&sc))?;
            write(&out.join(CIRCUIT_FILE), &circuit.to_text(&sc))?;
            Ok(format!("model count: {}\ncircuit size: {}\n", circuit.model_count(), circuit.size()))
        }
        Command::Fit { model, data, smoothing, out } => {
            let m = load_circuit(&model)?;
            let file = fs::File::open(&data).map_err(|source| CliError::Io { path: data.clone(), source })?;
            let ds = load_dataset(file, &m.scenario).map_err(|e| parse_err(&data, e))?;
            let psdd = Psdd::fit(&m.circuit, &ds, smoothing).map_err(|e| CliError::Build(e.to_string()))?;
            let out = out.unwrap_or(model);
            create_dir(&out)?;
            write(&out.join(PSDD_FILE), &psdd.to_text(&m.scenario))?;
            Ok(format!(
                "fitted {} rows with smoothing {smoothing}\nnodes: {}\nparameters: {}\nsupport: {} worlds\n",
                ds.len(),
                psdd.node_count(),
                psdd.parameter_count(),
                psdd.support_size()
            ))
        }
        Command::LearnUtility { model, linear: _, tabular, context_relative, lambda, out } => {
            let m = load_circuit(&model)?;
            let psdd = load_psdd(&model, &m)?;
            let spec = UtilitySpec { context_relative, linear: !tabular, lambda };
            let (u, report) = learn_utility(&psdd, &m.scenario, spec).map_err(|e| CliError::Build(e.to_string()))?;
            let out = out.unwrap_or_else(|| model.join(UTILITY_FILE));
            write(&out, &u.to_text(&m.scenario))?;
            let mut text = format!("regression rows: {}\nconverged: {}\n", report.rows, report.converged);
            for f in &report.fallbacks {
                text.push_str(&format!("warning: {f}\n"));
            }
            text.push_str(&u.to_text(&m.scenario));
            Ok(text)
        }
        Command::Blame { model, query, utility, contexts, n, interactive, json } => {
            let m = load_circuit(&model)?;
            let psdd = load_psdd(&model, &m)?;
            let u = load_utility(&model, utility.as_deref(), &m.scenario)?;
            let mut q = match (&query, interactive) {
                (Some(path), false) => BlameQuery::parse(&read(path)?, &m.scenario).map_err(|e| parse_err(path, e))?,
                (None, true) => prompt_query(&m.scenario)?,
                _ => return Err(CliError::Usage("give exactly one of a query file or --interactive".into())),
            };
            if let Some(path) = &contexts {
                q.contexts = ContextDistribution::parse_table(&read(path)?, &m.scenario).map_err(|e| parse_err(path, e))?;
            }
            if n.is_some() {
                q.n = n;
            }
            let report = BlameModel::new(&psdd, &m.scenario).with_utility(&u).report(&q).map_err(blame_err)?;
            session.record_report(&report.to_json())?;
            if json {
                return Ok(report.to_json() + "\n");
            }
            let mut text = String::new();
            for s in &report.sentences {
                text.push_str(s);
                text.push('\n');
            }
            for p in &report.probabilities {
                text.push_str(&format!("Pr({} | do({})) = {:.6}\n", report.event, p.action, p.probability));
            }
            for c in &report.costs {
                text.push_str(&format!("c({}) = {:.6}\n", c.action, c.cost));
            }
            text.push_str(&format!(
                "N = {:.6} (must exceed {:.6}; margin {:.6})\n",
                report.n, report.n_floor, report.n_margin
            ));
            for s in &report.skipped {
                text.push_str(&format!("warning: skipped context with zero action probability, {s}\n"));
            }
            Ok(text)
        }
        Command::Verify { model, utility } => {
            let m = load_circuit(&model)?;
            let psdd = load_psdd(&model, &m)?;
            let has_utility = utility.is_some() || model.join(UTILITY_FILE).exists();
            let u = if has_utility { Some(load_utility(&model, utility.as_deref(), &m.scenario)?) } else { None };
            let r = agreement(&psdd, &m.circuit, &m.scenario, u.as_ref().map(|u| u as _))
                .map_err(|e| CliError::Query(e.to_string()))?;
            let mut text = format!("checks: {}\n", r.checks);
            for (name, d) in [
                ("marginal", r.marginal),
                ("conditional", r.conditional),
                ("mpe", r.mpe),
                ("delta", r.delta),
                ("cost", r.cost),
                ("db", r.db),
            ] {
                text.push_str(&format!("{name}: max deviation {d:.3e}\n"));
            }
            text.push_str(&format!("mpe assignment mismatches: {}\n", r.mpe_mismatches));
            if r.passes(VERIFY_TOLERANCE) {
                text.push_str("max deviation ≤ 1e-9\n");
                Ok(text)
            } else {
                Err(CliError::Query(format!("{text}oracle disagreement above 1e-9")))
            }
        }
        Command::Generate { domain, rows, seed, adherence, params, out } => {
            let ds = match domain {
                Domain::LungCancer => {
                    let params: LungCancerParams = match &params {
                        Some(p) => serde_json::from_str(&read(p)?).map_err(|e| parse_err(p, e))?,
                        None => LungCancerParams::default(),
                    };
                    data::generate_lung_cancer(rows, seed, adherence, &params)
                }
                Domain::Trolley => data::generate_trolley(rows, seed, &TrolleyParams::default()),
                Domain::Teamwork => data::generate_teamwork(rows, seed),
            }
            .map_err(|e| CliError::Usage(e.to_string()))?;
            write(&out, &ds.to_csv_string())?;
            Ok(format!("wrote {} rows to {}\n", ds.len(), out.display()))
        }
        Command::Query { model, kind } => {
            let m = load_circuit(&model)?;
            let psdd = load_psdd(&model, &m)?;
            let sc = &m.scenario;
            match kind {
                QueryKind::Marginal { evidence: e } => Ok(format!("Pr({e}) = {:.12}\n", psdd.marginal(&evidence(&e, sc)?))),
                QueryKind::Conditional { query, given } => {
                    let p = psdd
                        .conditional(&evidence(&query, sc)?, &evidence(&given, sc)?)
                        .map_err(|e| CliError::Query(e.to_string()))?;
                    Ok(format!("Pr({query} | {given}) = {p:.12}\n"))
                }
                QueryKind::Mpe { evidence: e } => {
                    let (w, p) = psdd.mpe(&evidence(&e, sc)?).map_err(|e| CliError::Query(e.to_string()))?;
                    let on: Vec<&str> = (0..sc.num_vars()).filter(|i| w[*i]).map(|i| sc.name(i.into())).collect();
                    Ok(format!("mpe: {}\nprobability: {p:.12}\n", on.join(" ")))
                }
            }
        }
    }
}

fn prompt_query(sc: &Scenario) -> Result<BlameQuery, CliError> {
    let stdin = io::stdin();
    let mut lines = stdin.lock().lines();
    let mut ask = |prompt: &str| -> Result<String, CliError> {
        eprint!("{prompt}: ");
        let _ = io::stderr().flush();
        match lines.next() {
            Some(Ok(l)) => Ok(l.trim().to_string()),
            Some(Err(source)) => Err(CliError::Io { path: "<stdin>".into(), source }),
            None => Err(CliError::Usage("input ended before the query was complete".into())),
        }
    };
    let mut text = String::new();
    text.push_str(&format!("action = {}\n", ask("action")?));
    let alts = ask("alternatives (blank for all)")?;
    if !alts.is_empty() {
        text.push_str(&format!("alternatives = {alts}\n"));
    }
    text.push_str(&format!("event = {}\n", ask("event formula")?));
    let n = ask("N (blank for 1.1 times the cost floor)")?;
    if !n.is_empty() {
        text.push_str(&format!("N = {n}\n"));
    }
    let ctx = ask("context evidence (blank for the model's distribution)")?;
    if !ctx.is_empty() {
        text.push_str(&format!("contexts = given {ctx}\n"));
    }
    BlameQuery::parse(&text, sc).map_err(|e| CliError::Parse(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let mut session = Session::from_env();
    let label = std::env::args().skip(1).collect::<Vec<_>>().join(" ");
    match run(cli, &mut session) {
        Ok(text) => {
            print!("{text}");
            if let Err(e) = session.append(&label, &text) {
                eprintln!("warning: {e}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            let _ = session.append(&label, &format!("error: {e}\n"));
            ExitCode::from(e.code())
        }
    }
}
