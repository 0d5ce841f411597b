//! Parameter sweeps written as CSV.

use crate::Common;
use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use ncc_core::report::execute;
use ncc_core::sim::mix64;
use ncc_core::workloads::{self, geometric_grid};
use ncc_core::{InstanceFile, InstanceKind, Protocol, Verdict};
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ProtoArg {
    Degrees,
    DegreesExplicit,
    Envelope,
    Tree,
    TreeMindiam,
    Conn,
    Nonpreassigned,
}

impl From<ProtoArg> for Protocol {
    fn from(p: ProtoArg) -> Self {
        match p {
            ProtoArg::Degrees => Protocol::Degrees,
            ProtoArg::DegreesExplicit => Protocol::DegreesExplicit,
            ProtoArg::Envelope => Protocol::Envelope,
            ProtoArg::Tree => Protocol::Tree,
            ProtoArg::TreeMindiam => Protocol::TreeMinDiameter,
            ProtoArg::Conn => Protocol::Connectivity,
            ProtoArg::Nonpreassigned => Protocol::NonPreassigned,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Workload {
    /// Degrees of a random graph of random density.
    Random,
    /// Every node has degree `--d`.
    Regular,
    /// One hub adjacent to half the nodes.
    Star,
    /// Degrees of a random labelled tree.
    Tree,
    /// Thresholds from a random symmetric matrix.
    Rho,
    /// A random sequence that is not graphic.
    NonGraphic,
}

#[derive(Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    proto: ProtoArg,
    /// Sizes as `lo..hi` (doubling from lo) or a single value.
    #[arg(long, default_value = "64..1024")]
    n: String,
    /// Instance family; each protocol has a natural default.
    #[arg(long, value_enum)]
    workload: Option<Workload>,
    /// Degree of the regular workload.
    #[arg(long, default_value_t = 8)]
    d: usize,
    /// Runs per size, with seeds seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    reps: u64,
    /// ε for the non-preassigned protocol.
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

fn sizes(spec: &str) -> Result<Vec<usize>> {
    let parse = |s: &str| s.trim().parse::<usize>().with_context(|| format!("bad size {s:?}"));
    let grid = match spec.split_once("..") {
        Some((lo, hi)) => geometric_grid(parse(lo)?, parse(hi)?),
        None => vec![parse(spec)?],
    };
    if grid.is_empty() {
        bail!("empty size range {spec}");
    }
    Ok(grid)
}

fn instance(protocol: Protocol, workload: Workload, n: usize, d: usize, seed: u64) -> InstanceFile {
    let mut rng = workloads::rng(mix64(seed ^ (n as u64) << 32));
    let values = match workload {
        Workload::Random => workloads::random_graphic(n, &mut rng),
        Workload::Regular => workloads::regular(n, d),
        Workload::Star => workloads::star_heavy(n),
        Workload::Tree => workloads::random_tree_sequence(n, &mut rng),
        Workload::Rho => workloads::random_rho(n, &mut rng),
        Workload::NonGraphic => workloads::random_non_graphic(n, &mut rng),
    };
    let kind = match protocol {
        Protocol::Tree | Protocol::TreeMinDiameter => InstanceKind::Tree,
        Protocol::Connectivity => InstanceKind::Connectivity,
        Protocol::NonPreassigned => InstanceKind::Nonpreassigned,
        _ => InstanceKind::Degrees,
    };
    InstanceFile::vector(kind, values)
}

pub fn run(args: &BenchArgs) -> Result<i32> {
    let protocol = Protocol::from(args.proto);
    let workload = args.workload.unwrap_or(match protocol {
        Protocol::Tree | Protocol::TreeMinDiameter => Workload::Tree,
        Protocol::Connectivity => Workload::Rho,
        _ => Workload::Random,
    });
    let mut csv = String::from("n,m,delta,rounds,phases,total_messages,max_send,max_recv,seed\n");
    let mut code = 0;
    for n in sizes(&args.n)? {
        for rep in 0..args.reps {
            let seed = args.common.seed + rep;
            let mut inst = instance(protocol, workload, n, args.d, seed);
            inst.epsilon = Some(args.epsilon);
            let config = args.common.config(n, protocol);
            let config = config.with_seed(seed);
            let r = execute(protocol, &inst, config, args.common.verifying())?;
            let values = inst.per_node()?;
            let m = values.iter().sum::<i64>() / 2;
            let delta = values.iter().copied().max().unwrap_or(0);
            let phases = r.stats.phases.map(|p| p.to_string()).unwrap_or_default();
            writeln!(
                csv,
                "{n},{m},{delta},{},{phases},{},{},{},{seed}",
                r.stats.rounds, r.stats.total_messages, r.stats.per_round_max_send, r.stats.per_round_max_recv
            )?;
            if !r.all_pass() || matches!(r.verdict, Verdict::CapViolation | Verdict::NoProgress) {
                eprintln!("n={n} seed={seed}: {:?} {:?}", r.verdict, r.checks);
                code = 1;
            }
        }
    }
    match &args.csv {
        Some(path) => std::fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{csv}"),
    }
    Ok(code)
}
