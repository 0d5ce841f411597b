use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ncc_core::report::{checks, execute};
use ncc_core::{InstanceFile, Model, ModelConfig, Protocol, ResultFile};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

mod bench;

/// Realize overlay networks on a simulated Node-Capacitated Clique.
///
/// Exit status: 0 when the result is Ok and every check passes, 2 when the
/// input is correctly rejected as unrealizable, 1 on any other outcome.
#[derive(Parser)]
#[command(name = "ncc", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Implicit realization of a degree sequence.
    RealizeDegrees(RunArgs),
    /// Degree realization in which both endpoints store every edge.
    RealizeDegreesExplicit(RunArgs),
    /// Explicit realization of an upper envelope of any sequence.
    RealizeEnvelope(RunArgs),
    /// Tree realization of a tree degree sequence.
    RealizeTree(RunArgs),
    /// Tree realization with minimum diameter.
    RealizeTreeMindiam(RunArgs),
    /// Connectivity-threshold realization (layered on ncc0, hub on ncc1).
    RealizeConn(RunArgs),
    /// (1+ε)-approximate realization of a permutable degree sequence (ncc1).
    RealizeNonpreassigned(RunArgs),
    /// Sweep a protocol over a geometric grid of sizes and emit CSV rows.
    Bench(bench::BenchArgs),
    /// Re-check a stored result against its instance without simulating.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModelArg {
    Ncc0,
    Ncc1,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Ncc0 => Model::Ncc0,
            ModelArg::Ncc1 => Model::Ncc1,
        }
    }
}

/// Flags shared by every simulating subcommand.
#[derive(Args, Clone, Debug)]
pub struct Common {
    /// Knowledge model; defaults to ncc0 except for realize-nonpreassigned.
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    /// Seed for identifiers and routing.
    #[arg(long, env = "NCC_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Messages per round per node are cap_factor · ⌈log₂ n⌉.
    #[arg(long)]
    pub cap_factor: Option<u32>,
    /// Check outputs against the oracles (default).
    #[arg(long, overrides_with = "no_verify")]
    pub verify: bool,
    /// Skip the oracle checks.
    #[arg(long, overrides_with = "verify")]
    pub no_verify: bool,
}

impl Common {
    pub fn config(&self, n: usize, protocol: Protocol) -> ModelConfig {
        let model = self.model.map_or(protocol.default_model(), Model::from);
        let mut cfg = ModelConfig::new(n, model).with_seed(self.seed);
        if let Some(k) = self.cap_factor {
            cfg = cfg.with_cap_factor(k);
        }
        cfg
    }

    pub fn verifying(&self) -> bool {
        !self.no_verify
    }
}

#[derive(Args)]
struct RunArgs {
    /// Instance file (JSON).
    #[arg(long)]
    input: PathBuf,
    /// Result file; printed to stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// ε for realize-nonpreassigned; overrides the instance's value.
    #[arg(long)]
    epsilon: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct VerifyArgs {
    /// Instance file (JSON).
    #[arg(long)]
    input: PathBuf,
    /// Result file to check.
    #[arg(long)]
    result: PathBuf,
    /// Subcommand that produced the result; inferred from the instance kind when absent.
    #[arg(long)]
    proto: Option<String>,
}

fn read_instance(path: &Path) -> Result<InstanceFile> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing instance {}", path.display()))
}

fn run(protocol: Protocol, args: &RunArgs) -> Result<i32> {
    let mut instance = read_instance(&args.input)?;
    if args.epsilon.is_some() {
        instance.epsilon = args.epsilon;
    }
    let config = args.common.config(instance.n, protocol);
    let result = execute(protocol, &instance, config, args.common.verifying())?;
    let json = result.to_json();
    match &args.output {
        Some(path) => std::fs::write(path, json).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{json}"),
    }
    eprintln!(
        "{}: {:?}, {} edges, {} rounds",
        protocol.name(),
        result.verdict,
        result.edges.len(),
        result.stats.rounds
    );
    Ok(result.exit_code())
}

fn verify(args: &VerifyArgs) -> Result<i32> {
    let instance = read_instance(&args.input)?;
    let text = std::fs::read_to_string(&args.result).with_context(|| format!("reading {}", args.result.display()))?;
    let mut result: ResultFile =
        serde_json::from_str(&text).with_context(|| format!("parsing result {}", args.result.display()))?;
    let protocol = match &args.proto {
        Some(name) => match Protocol::from_name(name) {
            Some(p) => p,
            None => bail!("unknown protocol {name}"),
        },
        None => Protocol::for_kind(instance.kind),
    };
    let recomputed = checks(protocol, &instance, &result)?;
    let agrees = recomputed == result.checks || result.checks.is_empty();
    println!("{}", serde_json::to_string_pretty(&recomputed)?);
    if !agrees {
        eprintln!("stored checks differ from the recomputed ones");
        return Ok(1);
    }
    result.checks = recomputed;
    Ok(result.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = match &cli.cmd {
        Cmd::RealizeDegrees(a) => run(Protocol::Degrees, a),
        Cmd::RealizeDegreesExplicit(a) => run(Protocol::DegreesExplicit, a),
        Cmd::RealizeEnvelope(a) => run(Protocol::Envelope, a),
        Cmd::RealizeTree(a) => run(Protocol::Tree, a),
        Cmd::RealizeTreeMindiam(a) => run(Protocol::TreeMinDiameter, a),
        Cmd::RealizeConn(a) => run(Protocol::Connectivity, a),
        Cmd::RealizeNonpreassigned(a) => run(Protocol::NonPreassigned, a),
        Cmd::Bench(a) => bench::run(a),
        Cmd::Verify(a) => verify(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
