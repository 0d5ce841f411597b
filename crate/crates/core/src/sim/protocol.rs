use super::{split_seed, Knowledge, Message, ModelConfig, Network, NodeId, RoundStats, SimError, Word};
use crate::Verdict;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// What a node knows before round 1.
#[derive(Clone, Copy, Debug)]
pub struct NodeView<'a> {
    pub id: NodeId,
    pub n: usize,
    pub successor: Option<NodeId>,
    /// Present in the complete-knowledge model only.
    pub all_ids: Option<&'a [NodeId]>,
}

/// A node's handle on the network during one step.
pub struct StepContext<'a> {
    net: &'a mut Network,
    node: usize,
}

impl StepContext<'_> {
    pub fn id(&self) -> NodeId {
        self.net.id(self.node)
    }

    /// Rounds completed before this step.
    pub fn round(&self) -> u64 {
        self.net.round()
    }

    pub fn cap(&self) -> usize {
        self.net.cap()
    }

    pub fn knows(&self, id: NodeId) -> bool {
        self.net.knows(self.node, id)
    }

    pub fn send(&mut self, to: NodeId, tag: u16, payload: &[Word]) -> Result<(), SimError> {
        self.net.send(self.node, to, tag, payload)
    }

    /// Private randomness of this node for this round.
    pub fn rng(&self) -> ChaCha8Rng {
        let seed = self.net.config().seed;
        ChaCha8Rng::seed_from_u64(split_seed(seed, self.id(), self.round()))
    }
}

pub enum Step<O> {
    Continue,
    Done(O),
    Unrealizable,
}

/// A node program. `step` runs once per round on the messages delivered
/// at the end of the previous round (empty in the first step).
pub trait Protocol {
    type Input;
    type State;
    type Output;

    fn init(&self, view: &NodeView<'_>, input: Self::Input) -> Self::State;

    fn step(
        &self,
        ctx: &mut StepContext<'_>,
        state: &mut Self::State,
        inbox: &[Message],
    ) -> Result<Step<Self::Output>, SimError>;
}

#[derive(Debug)]
pub struct ProtocolOutcome<O> {
    pub verdict: Verdict,
    pub outputs: BTreeMap<NodeId, O>,
    pub stats: RoundStats,
}

/// Runs `protocol` until every node has finished. `inputs[i]` belongs to
/// node index `i`. Capacity overruns and the round ceiling end the run with
/// the matching verdict; addressing and size errors are returned as `Err`.
pub fn run<P: Protocol>(
    protocol: &P,
    knowledge: &Knowledge,
    config: ModelConfig,
    inputs: Vec<P::Input>,
) -> Result<ProtocolOutcome<P::Output>, SimError> {
    let n = config.n;
    assert_eq!(inputs.len(), n);
    let mut net = Network::new(config, knowledge);
    let mut succ = vec![None; n];
    if let Knowledge::DirectedPath { order } = knowledge {
        for w in order.windows(2) {
            succ[w[0]] = Some(net.id(w[1]));
        }
    }
    let all: Option<Vec<NodeId>> = matches!(knowledge, Knowledge::Complete).then(|| net.ids().to_vec());
    let mut states: Vec<P::State> = inputs
        .into_iter()
        .enumerate()
        .map(|(u, input)| {
            let view = NodeView {
                id: net.id(u),
                n,
                successor: succ[u],
                all_ids: all.as_deref(),
            };
            protocol.init(&view, input)
        })
        .collect();

    let mut finished = vec![false; n];
    let mut remaining = n;
    let mut outputs = BTreeMap::new();
    let mut unrealizable = false;
    let mut inboxes: Vec<Vec<Message>> = vec![Vec::new(); n];
    loop {
        for u in 0..n {
            if finished[u] {
                continue;
            }
            let inbox = std::mem::take(&mut inboxes[u]);
            let mut ctx = StepContext { net: &mut net, node: u };
            match protocol.step(&mut ctx, &mut states[u], &inbox)? {
                Step::Continue => {}
                Step::Done(out) => {
                    outputs.insert(net.id(u), out);
                    finished[u] = true;
                    remaining -= 1;
                }
                Step::Unrealizable => {
                    unrealizable = true;
                    finished[u] = true;
                    remaining -= 1;
                }
            }
        }
        if remaining == 0 && net.pending() == 0 {
            break;
        }
        let delivered = match net.deliver() {
            Ok(d) => d,
            Err(SimError::CapViolation { .. }) => return Ok(aborted(Verdict::CapViolation, net)),
            Err(SimError::NoProgress(_)) => return Ok(aborted(Verdict::NoProgress, net)),
            Err(e) => return Err(e),
        };
        for e in delivered {
            inboxes[e.to].push(e.msg);
        }
        if remaining == 0 {
            break;
        }
    }
    let verdict = if unrealizable { Verdict::Unrealizable } else { Verdict::Ok };
    Ok(ProtocolOutcome {
        verdict,
        outputs,
        stats: net.into_stats(),
    })
}

fn aborted<O>(verdict: Verdict, net: Network) -> ProtocolOutcome<O> {
    ProtocolOutcome {
        verdict,
        outputs: BTreeMap::new(),
        stats: net.into_stats(),
    }
}
