//! Round-synchronous simulator for the Node-Capacitated Clique.
//!
//! A [`Network`] owns node identities, learned-ID knowledge, per-round
//! capacity accounting and delivery. Protocols either implement
//! [`Protocol`] and go through [`run`], or drive the network round by
//! round with [`Network::send`] and [`Network::deliver`].

mod network;
mod protocol;

pub use network::{Envelope, Network};
pub use protocol::{run, NodeView, Protocol, ProtocolOutcome, Step, StepContext};

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use std::fmt;

/// Node identifier drawn from `[1, n^c]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// One message word: either an identifier or an `O(log n)`-bit value.
///
/// Identifiers carried in a payload become known to the receiver.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Word {
    Id(NodeId),
    Val(i64),
}

impl Word {
    pub fn id(self) -> NodeId {
        match self {
            Word::Id(id) => id,
            Word::Val(v) => panic!("expected id word, found value {v}"),
        }
    }

    pub fn val(self) -> i64 {
        match self {
            Word::Val(v) => v,
            Word::Id(id) => panic!("expected value word, found id {id}"),
        }
    }

    pub fn as_u(self) -> usize {
        self.val() as usize
    }
}

pub type Payload = SmallVec<[Word; 3]>;

/// A message as seen by its receiver.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Message {
    pub src: NodeId,
    pub tag: u16,
    pub payload: Payload,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Nodes start knowing only their successor on a directed path.
    #[default]
    Ncc0,
    /// Every node knows every identifier.
    Ncc1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Strictness {
    /// A capacity overrun aborts the run.
    #[default]
    Strict,
    /// Overruns are logged and the run continues.
    Record,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub n: usize,
    pub model: Model,
    pub cap_factor: u32,
    pub words_per_message: usize,
    pub strictness: Strictness,
    pub seed: u64,
    /// Identifiers are drawn from `[1, n^id_exponent]`.
    pub id_exponent: u32,
    pub max_rounds: u64,
}

impl ModelConfig {
    pub fn new(n: usize, model: Model) -> Self {
        ModelConfig {
            n,
            model,
            cap_factor: 16,
            words_per_message: 2,
            strictness: Strictness::Strict,
            seed: 0,
            id_exponent: 3,
            max_rounds: 1_000_000,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_cap_factor(mut self, k: u32) -> Self {
        self.cap_factor = k;
        self
    }

    pub fn with_strictness(mut self, s: Strictness) -> Self {
        self.strictness = s;
        self
    }

    /// Per-round send budget, and separately receive budget, of every node.
    pub fn cap(&self) -> usize {
        self.cap_factor as usize * ceil_log2(self.n) as usize
    }
}

/// `⌈log₂ x⌉`, with `ceil_log2(0) == ceil_log2(1) == 0`.
pub fn ceil_log2(x: usize) -> u32 {
    if x <= 1 {
        0
    } else {
        usize::BITS - (x - 1).leading_zeros()
    }
}

/// Initial knowledge graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Knowledge {
    /// `order[i]` is the node index at path position `i`; each node knows
    /// the identifier of the next one.
    DirectedPath { order: Vec<usize> },
    Complete,
}

impl Knowledge {
    pub fn for_model(model: Model, n: usize) -> Self {
        match model {
            Model::Ncc0 => Knowledge::DirectedPath {
                order: (0..n).collect(),
            },
            Model::Ncc1 => Knowledge::Complete,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Send,
    Recv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Violation {
    pub round: u64,
    pub node: NodeId,
    pub direction: Direction,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("node {node} exceeded its {direction:?} capacity in round {round} ({count} messages)")]
    CapViolation {
        round: u64,
        node: NodeId,
        direction: Direction,
        count: usize,
    },
    #[error("node {from} addressed unknown identifier {to}")]
    Addressing { from: NodeId, to: NodeId },
    #[error("message from {from} carries {words} words, limit is {limit}")]
    MessageTooLarge {
        from: NodeId,
        words: usize,
        limit: usize,
    },
    #[error("round ceiling of {0} reached")]
    NoProgress(u64),
}

/// Per-run communication statistics.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RoundStats {
    pub rounds: u64,
    pub total_messages: u64,
    pub per_round_max_send: Vec<u32>,
    pub per_round_max_recv: Vec<u32>,
    #[serde(skip)]
    pub violations: Vec<Violation>,
}

impl RoundStats {
    pub fn max_send(&self) -> u32 {
        self.per_round_max_send.iter().copied().max().unwrap_or(0)
    }

    pub fn max_recv(&self) -> u32 {
        self.per_round_max_recv.iter().copied().max().unwrap_or(0)
    }
}

/// Deterministic 64-bit mixer used for ID draws, hashing and RNG splitting.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the private random stream of `node` in `round`.
pub fn split_seed(seed: u64, node: NodeId, round: u64) -> u64 {
    mix64(mix64(seed ^ mix64(node.0)) ^ round.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}
