use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use gradual_core::audit::{run_suite, summary_table, Suite};
use gradual_core::hexfloat;
use gradual_core::mechanism::{tighten_for_third_party, ResponseRecord};
use gradual_core::social::{run_scenario, NodeId, SocialGraph};
use gradual_core::{Error, MechanismState, PrivacyLevel, PrivateVector, RandomSource, Response};

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BRIDGE: u8 = 3;
const EXIT_AUDIT_FAILED: u8 = 4;

#[derive(Parser)]
#[command(name = "gradual-release", version, about = "Gradual release of Laplace-noised data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Create a new mechanism state file.
    Init {
        #[arg(long)]
        state: PathBuf,
        /// Private data, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        data: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Overwrite an existing state file.
        #[arg(long)]
        force: bool,
    },
    /// Release the data at a differential-privacy level and update the state.
    Release {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        out: PathBuf,
        /// Create the state first (requires --data).
        #[arg(long)]
        init: bool,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        data: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Derive a more private response from a released one, without the data.
    Tighten {
        /// Response file to start from.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an audit suite: marginals, atoms, correlation, mse, markov,
    /// privacy, tighten or all.
    Audit {
        suite: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1_000_000)]
        n: usize,
        /// Report stream destination (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Release to every user of a social graph at ε = 1/distance.
    ScenarioSocial {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        owner: NodeId,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        data: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Coalition whose combined privacy level is reported.
        #[arg(long, value_delimiter = ',')]
        subset: Option<Vec<NodeId>>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also persist the owner's state.
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Summarize a state file.
    Inspect {
        #[arg(long)]
        state: PathBuf,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::BridgeUnsupported { .. } => EXIT_BRIDGE,
            Error::InvalidLevel(_)
            | Error::Ordering { .. }
            | Error::InvalidArgument(_)
            | Error::TooFewSamples { .. }
            | Error::GridTooCoarse(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: EXIT_FAILURE,
            message: e.to_string(),
        }
    }
}

type CliResult = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_FAILURE,
        message: format!("{}: {e}", path.display()),
    })
}

/// Writes through a sibling temp file so a crash never leaves a torn file.
fn write_atomic(path: &Path, contents: &str) -> CliResult {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn level(v: f64) -> Result<PrivacyLevel, Failure> {
    Ok(PrivacyLevel::new(v)?)
}

fn load_state(path: &Path) -> Result<MechanismState, Failure> {
    Ok(MechanismState::deserialize(&read(path)?)?)
}

fn response_line(response: &Response) -> String {
    let mut line = serde_json::to_string(&response.to_record()).expect("record serializes");
    line.push('\n');
    line
}

fn init(state: &Path, data: Vec<f64>, alpha: f64, seed: u64, force: bool) -> CliResult {
    if state.exists() && !force {
        return Err(Failure {
            code: EXIT_FAILURE,
            message: format!("{} already exists (use --force to overwrite)", state.display()),
        });
    }
    let mech = MechanismState::new(PrivateVector::new(data)?, alpha, seed)?;
    write_atomic(state, &mech.serialize())
}

fn release(state: &Path, eps: f64, out: &Path) -> CliResult {
    let mut mech = load_state(state)?;
    let response = mech.release(level(eps)?)?;
    write_atomic(state, &mech.serialize())?;
    write_atomic(out, &response_line(&response))
}

fn tighten(input: &Path, eps: f64, alpha: f64, seed: u64, out: &Path) -> CliResult {
    let text = read(input)?;
    let line = text.lines().find(|l| !l.trim().is_empty()).ok_or_else(|| Failure {
        code: EXIT_FAILURE,
        message: format!("{} holds no response", input.display()),
    })?;
    let record: ResponseRecord = serde_json::from_str(line).map_err(Error::from)?;
    let response = Response::from_record(&record)?;
    let mut rng = RandomSource::seed_from_u64(seed);
    let tightened = tighten_for_third_party(&response, level(eps)?, alpha, &mut rng)?;
    write_atomic(out, &response_line(&tightened))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult {
    match out {
        Some(path) => write_atomic(path, text),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn audit(suite: &str, seed: u64, n: usize, out: Option<&Path>) -> CliResult {
    let suite: Suite = suite.parse()?;
    let reports = run_suite(suite, seed, n)?;
    let stream: String = reports.iter().map(|r| r.to_json_line() + "\n").collect();
    emit(out, &stream)?;
    eprint!("{}", summary_table(&reports));
    if reports.iter().all(|r| r.passed) {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_AUDIT_FAILED,
            message: "audit failed".into(),
        })
    }
}

#[allow(clippy::too_many_arguments)]
fn scenario(
    graph: &Path,
    owner: NodeId,
    data: Vec<f64>,
    alpha: f64,
    seed: u64,
    subset: Option<Vec<NodeId>>,
    out: Option<&Path>,
    state: Option<&Path>,
) -> CliResult {
    let g = SocialGraph::parse(&read(graph)?)?;
    let result = run_scenario(&g, owner, PrivateVector::new(data)?, alpha, seed, subset.as_deref())?;
    let mut text = String::new();
    for node in &result.per_node {
        let record = match &node.response {
            Some(r) => json!({
                "node": node.node,
                "distance": node.distance,
                "eps_dp": hexfloat::format(r.eps_dp.value()),
                "eps_dp_decimal": r.eps_dp.value(),
                "values": r.values.iter().copied().map(hexfloat::format).collect::<Vec<_>>(),
                "values_decimal": r.values,
            }),
            None => json!({ "node": node.node, "distance": null, "response": null }),
        };
        text.push_str(&record.to_string());
        text.push('\n');
    }
    let bound = |b: Option<PrivacyLevel>| b.map(|e| e.value());
    let summary = json!({
        "collusion_bound": bound(result.collusion_bound),
        "subset": subset,
        "subset_bound": bound(result.subset_bound),
    });
    text.push_str(&summary.to_string());
    text.push('\n');
    if let Some(path) = state {
        write_atomic(path, &result.state.serialize())?;
    }
    emit(out, &text)
}

fn inspect(state: &Path) -> CliResult {
    let mech = load_state(state)?;
    let mut out = String::new();
    out.push_str(&format!("dimension: {}\n", mech.dimension()));
    out.push_str(&format!("alpha: {}\n", mech.alpha()));
    out.push_str(&format!("seed: {}\n", mech.seed()));
    let levels: Vec<String> = mech.released_levels().iter().map(|l| l.to_string()).collect();
    out.push_str(&format!("released levels (dp): [{}]\n", levels.join(", ")));
    if let Some(chains) = mech.chains() {
        for (i, chain) in chains.iter().enumerate() {
            out.push_str(&format!(
                "coordinate {i}: {} stored levels, {} jumps\n",
                chain.len(),
                chain.jump_count()
            ));
        }
    }
    std::io::stdout().write_all(out.as_bytes())?;
    Ok(())
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Init {
            state,
            data,
            alpha,
            seed,
            force,
        } => init(&state, data, alpha, seed, force),
        Command::Release {
            state,
            eps,
            out,
            init: create,
            data,
            alpha,
            seed,
        } => {
            if create {
                init(&state, data, alpha, seed, false)?;
            } else if !data.is_empty() {
                return Err(Failure {
                    code: EXIT_USAGE,
                    message: "--data is only accepted together with --init".into(),
                });
            }
            release(&state, eps, &out)
        }
        Command::Tighten {
            input,
            eps,
            alpha,
            seed,
            out,
        } => tighten(&input, eps, alpha, seed, &out),
        Command::Audit { suite, seed, n, out } => audit(&suite, seed, n, out.as_deref()),
        Command::ScenarioSocial {
            graph,
            owner,
            data,
            alpha,
            seed,
            subset,
            out,
            state,
        } => scenario(&graph, owner, data, alpha, seed, subset, out.as_deref(), state.as_deref()),
        Command::Inspect { state } => inspect(&state),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
