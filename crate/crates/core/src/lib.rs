//! Simulation of the Node-Capacitated Clique and distributed graph
//! realization protocols built on it.
//!
//! Nodes of an `n`-node network may exchange `O(log n)` messages of
//! `O(log n)` bits per round and start from a sparse knowledge graph. The
//! protocols here turn a degree sequence, a tree degree sequence, or a
//! connectivity threshold vector into an overlay network whose edges are
//! stored at the nodes.

pub mod connectivity;
pub mod degree;
pub mod graph;
pub mod nonpreassigned;
pub mod oracles;
pub mod primitives;
pub mod report;
pub mod sim;
pub mod tree;
pub mod workloads;

pub use graph::{Edge, Overlay, OverlayMode, SimpleGraph};
pub use report::{Check, InstanceFile, InstanceKind, Protocol, ResultFile, StatsOut, Values};
pub use sim::{Knowledge, Model, ModelConfig, Network, NodeId, RoundStats, SimError, Strictness, Word};

use serde::{Deserialize, Serialize};

/// Errors of the realization entry points.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// The input violates the problem's preconditions.
    #[error("invalid input: {0}")]
    Spec(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Final verdict of a protocol run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Ok,
    Unrealizable,
    CapViolation,
    NoProgress,
}

/// Result of a realization protocol.
#[derive(Clone, Debug)]
pub struct Realization {
    pub verdict: Verdict,
    /// Present when the verdict is `Ok`.
    pub overlay: Option<Overlay>,
    pub stats: RoundStats,
    /// Protocol-specific phase count (degree realization only).
    pub phases: Option<u64>,
    /// Rounds spent turning an implicit overlay into an explicit one.
    pub conversion_rounds: Option<u64>,
}

/// What a protocol driver reports when it finishes without a model error.
#[derive(Clone, Debug)]
pub(crate) struct Finished {
    pub verdict: Verdict,
    pub overlay: Option<Overlay>,
    pub phases: Option<u64>,
    pub conversion_rounds: Option<u64>,
}

impl Finished {
    pub fn ok(overlay: Overlay) -> Self {
        Finished {
            verdict: Verdict::Ok,
            overlay: Some(overlay),
            phases: None,
            conversion_rounds: None,
        }
    }

    pub fn unrealizable() -> Self {
        Finished {
            verdict: Verdict::Unrealizable,
            overlay: None,
            phases: None,
            conversion_rounds: None,
        }
    }
}

/// Runs a driver on a fresh network with the model's initial knowledge and
/// turns capacity overruns and the round ceiling into verdicts.
pub(crate) fn drive(
    config: ModelConfig,
    f: impl FnOnce(&mut Network) -> Result<Finished, SimError>,
) -> Result<Realization, SimError> {
    let knowledge = Knowledge::for_model(config.model, config.n);
    let mut net = Network::new(config, &knowledge);
    match f(&mut net) {
        Ok(fin) => Ok(Realization {
            verdict: fin.verdict,
            overlay: fin.overlay,
            stats: net.into_stats(),
            phases: fin.phases,
            conversion_rounds: fin.conversion_rounds,
        }),
        Err(e) => Realization::from_error(e, net.into_stats()),
    }
}

impl Realization {
    pub(crate) fn from_error(err: SimError, stats: RoundStats) -> Result<Self, SimError> {
        let verdict = match err {
            SimError::CapViolation { .. } => Verdict::CapViolation,
            SimError::NoProgress(_) => Verdict::NoProgress,
            other => return Err(other),
        };
        Ok(Realization {
            verdict,
            overlay: None,
            stats,
            phases: None,
            conversion_rounds: None,
        })
    }
}
