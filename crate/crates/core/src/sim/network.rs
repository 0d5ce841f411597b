use super::{
    mix64, Direction, Knowledge, Message, ModelConfig, NodeId, Payload, RoundStats, SimError,
    Strictness, Violation, Word,
};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustc_hash::{FxHashMap, FxHashSet};

/// A message in flight, addressed by node index.
#[derive(Clone, Debug)]
pub struct Envelope {
    pub to: usize,
    pub from: usize,
    pub msg: Message,
}

/// Learned-identifier sets stored as one bit row per node.
#[derive(Clone, Debug)]
struct KnowledgeBits {
    words_per_row: usize,
    bits: Vec<u64>,
}

impl KnowledgeBits {
    fn new(n: usize) -> Self {
        let words_per_row = n.div_ceil(64);
        KnowledgeBits {
            words_per_row,
            bits: vec![0; words_per_row * n],
        }
    }

    #[inline]
    fn get(&self, u: usize, v: usize) -> bool {
        self.bits[u * self.words_per_row + v / 64] >> (v % 64) & 1 == 1
    }

    #[inline]
    fn set(&mut self, u: usize, v: usize) {
        self.bits[u * self.words_per_row + v / 64] |= 1 << (v % 64);
    }
}

/// The simulated clique: identities, knowledge and the current round's traffic.
pub struct Network {
    config: ModelConfig,
    ids: Vec<NodeId>,
    index: FxHashMap<NodeId, usize>,
    knows: Option<KnowledgeBits>,
    outbox: Vec<Envelope>,
    sent: Vec<u32>,
    recv: Vec<u32>,
    round: u64,
    stats: RoundStats,
}

impl Network {
    pub fn new(config: ModelConfig, knowledge: &Knowledge) -> Self {
        let n = config.n;
        let ids = match knowledge {
            Knowledge::Complete => (1..=n as u64).map(NodeId).collect(),
            Knowledge::DirectedPath { .. } => draw_ids(&config),
        };
        Self::with_ids(config, knowledge, ids)
    }

    /// Builds a network with caller-chosen identifiers (must be distinct and nonzero).
    pub fn with_ids(config: ModelConfig, knowledge: &Knowledge, ids: Vec<NodeId>) -> Self {
        let n = config.n;
        assert_eq!(ids.len(), n, "one identifier per node");
        let index: FxHashMap<NodeId, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        assert_eq!(index.len(), n, "identifiers must be distinct");
        let knows = match knowledge {
            Knowledge::Complete => None,
            Knowledge::DirectedPath { order } => {
                assert_eq!(order.len(), n, "path must cover every node");
                let mut k = KnowledgeBits::new(n);
                for u in 0..n {
                    k.set(u, u);
                }
                for w in order.windows(2) {
                    k.set(w[0], w[1]);
                }
                Some(k)
            }
        };
        Network {
            config,
            ids,
            index,
            knows,
            outbox: Vec::new(),
            sent: vec![0; n],
            recv: vec![0; n],
            round: 0,
            stats: RoundStats::default(),
        }
    }

    pub fn n(&self) -> usize {
        self.config.n
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn cap(&self) -> usize {
        self.config.cap()
    }

    pub fn ids(&self) -> &[NodeId] {
        &self.ids
    }

    pub fn id(&self, u: usize) -> NodeId {
        self.ids[u]
    }

    /// Index of a node. Reserved for the engine and for drivers mapping a
    /// delivered message or a final output back to storage.
    pub fn index_of(&self, id: NodeId) -> usize {
        self.index[&id]
    }

    pub fn try_index_of(&self, id: NodeId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    /// Completed rounds so far.
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn stats(&self) -> &RoundStats {
        &self.stats
    }

    pub fn into_stats(self) -> RoundStats {
        self.stats
    }

    pub fn knows(&self, u: usize, id: NodeId) -> bool {
        match &self.knows {
            None => self.index.contains_key(&id),
            Some(k) => self.index.get(&id).is_some_and(|&v| k.get(u, v)),
        }
    }

    /// Queues a message from node `from` for delivery at the end of the round.
    pub fn send(&mut self, from: usize, to: NodeId, tag: u16, payload: &[Word]) -> Result<(), SimError> {
        let limit = self.config.words_per_message;
        if payload.len() > limit {
            return Err(SimError::MessageTooLarge {
                from: self.ids[from],
                words: payload.len(),
                limit,
            });
        }
        let dst = match self.index.get(&to) {
            Some(&v) if self.knows.as_ref().is_none_or(|k| k.get(from, v)) => v,
            _ => {
                return Err(SimError::Addressing {
                    from: self.ids[from],
                    to,
                })
            }
        };
        self.outbox.push(Envelope {
            to: dst,
            from,
            msg: Message {
                src: self.ids[from],
                tag,
                payload: Payload::from_slice(payload),
            },
        });
        Ok(())
    }

    /// Sorts envelopes by destination, then sender identifier, keeping send
    /// order among equal keys: a counting sort on the destination, with
    /// insertion by sender inside the (small) buckets.
    fn order(&mut self, out: Vec<Envelope>) -> Vec<Envelope> {
        let ids = &self.ids;
        if out.windows(2).all(|w| (w[0].to, ids[w[0].from]) <= (w[1].to, ids[w[1].from])) {
            return out;
        }
        // `recv` is zero here and doubles as scratch space.
        let next = &mut self.recv;
        for e in &out {
            next[e.to] += 1;
        }
        let mut acc = 0u32;
        for c in next.iter_mut() {
            let here = *c;
            *c = acc;
            acc += here;
        }
        let mut slots: Vec<Option<Envelope>> = (0..out.len()).map(|_| None).collect();
        for e in out {
            let to = e.to;
            let mut i = next[to] as usize;
            next[to] += 1;
            slots[i] = Some(e);
            while i > 0 {
                let Some(prev) = slots[i - 1].as_ref() else { break };
                let cur = slots[i].as_ref().unwrap();
                if prev.to != to || ids[prev.from] <= ids[cur.from] {
                    break;
                }
                slots.swap(i - 1, i);
                i -= 1;
            }
        }
        next.iter_mut().for_each(|c| *c = 0);
        slots.into_iter().map(Option::unwrap).collect()
    }

    /// Ends the current round and returns its messages, ordered by
    /// destination index, then sender identifier, then send order.
    pub fn deliver(&mut self) -> Result<Vec<Envelope>, SimError> {
        self.round += 1;
        if self.round > self.config.max_rounds {
            return Err(SimError::NoProgress(self.config.max_rounds));
        }
        let out = std::mem::take(&mut self.outbox);
        let cap = self.config.cap();
        let mut max_send = 0u32;
        let mut max_recv = 0u32;
        for e in &out {
            self.sent[e.from] += 1;
            self.recv[e.to] += 1;
        }
        let mut first_err = None;
        for e in &out {
            for (node, direction) in [(e.from, Direction::Send), (e.to, Direction::Recv)] {
                let count = match direction {
                    Direction::Send => &mut self.sent[node],
                    Direction::Recv => &mut self.recv[node],
                };
                if *count == 0 {
                    continue;
                }
                let c = std::mem::take(count);
                match direction {
                    Direction::Send => max_send = max_send.max(c),
                    Direction::Recv => max_recv = max_recv.max(c),
                }
                if c as usize > cap {
                    let v = Violation {
                        round: self.round,
                        node: self.ids[node],
                        direction,
                        count: c as usize,
                    };
                    self.stats.violations.push(v);
                    if self.config.strictness == Strictness::Strict && first_err.is_none() {
                        first_err = Some(SimError::CapViolation {
                            round: v.round,
                            node: v.node,
                            direction,
                            count: v.count,
                        });
                    }
                }
            }
        }
        self.stats.rounds = self.round;
        self.stats.total_messages += out.len() as u64;
        self.stats.per_round_max_send.push(max_send);
        self.stats.per_round_max_recv.push(max_recv);
        if let Some(err) = first_err {
            return Err(err);
        }
        self.outbox = Vec::with_capacity(out.len());
        let out = self.order(out);
        if let Some(k) = &mut self.knows {
            for e in &out {
                k.set(e.to, e.from);
                for w in &e.msg.payload {
                    if let Word::Id(id) = w {
                        if let Some(&v) = self.index.get(id) {
                            k.set(e.to, v);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Ends a round in which no node sends anything.
    pub fn idle(&mut self) -> Result<(), SimError> {
        debug_assert!(self.outbox.is_empty());
        self.deliver().map(|_| ())
    }

    /// Number of messages queued in the current round.
    pub fn pending(&self) -> usize {
        self.outbox.len()
    }
}

/// Distinct identifiers drawn uniformly from `[1, n^c]`.
fn draw_ids(config: &ModelConfig) -> Vec<NodeId> {
    let n = config.n;
    let space = (n as u128).saturating_pow(config.id_exponent.max(1)).min(u64::MAX as u128 / 2) as u64;
    let space = space.max(n as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(mix64(config.seed ^ 0x1D5));
    if space <= 4 * n as u64 {
        return index::sample(&mut rng, space as usize, n)
            .into_iter()
            .map(|x| NodeId(x as u64 + 1))
            .collect();
    }
    let mut seen = FxHashSet::default();
    let mut ids = Vec::with_capacity(n);
    while ids.len() < n {
        let x = rand::Rng::random_range(&mut rng, 1..=space);
        if seen.insert(x) {
            ids.push(NodeId(x));
        }
    }
    ids
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Model;

    fn path_net(n: usize) -> Network {
        let cfg = ModelConfig::new(n, Model::Ncc0).with_seed(5);
        Network::new(cfg, &Knowledge::for_model(Model::Ncc0, n))
    }

    #[test]
    fn ids_are_distinct_and_in_range() {
        let net = path_net(100);
        let bound = 100u64.pow(3);
        let mut ids = net.ids().to_vec();
        assert!(ids.iter().all(|id| id.0 >= 1 && id.0 <= bound));
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 100);
    }

    #[test]
    fn unknown_destination_is_rejected() {
        let mut net = path_net(4);
        let far = net.id(2);
        assert!(matches!(net.send(0, far, 0, &[]), Err(SimError::Addressing { .. })));
        let next = net.id(1);
        assert!(net.send(0, next, 0, &[]).is_ok());
    }

    #[test]
    fn ids_in_payload_become_known() {
        let mut net = path_net(4);
        let (a, b, c) = (net.id(1), net.id(2), net.id(3));
        net.send(1, b, 0, &[Word::Id(net.id(0))]).unwrap();
        net.send(2, c, 0, &[Word::Id(a)]).unwrap();
        net.deliver().unwrap();
        assert!(net.knows(2, net.id(0)));
        assert!(net.knows(2, a));
        assert!(net.knows(3, c));
        assert!(net.knows(3, b));
        assert!(!net.knows(3, net.id(0)));
    }

    #[test]
    fn oversized_message_is_rejected() {
        let mut net = path_net(3);
        let to = net.id(1);
        let words = [Word::Val(1), Word::Val(2), Word::Val(3)];
        assert!(matches!(net.send(0, to, 0, &words), Err(SimError::MessageTooLarge { .. })));
    }

    #[test]
    fn inbox_is_ordered_by_sender_id_then_send_order() {
        let cfg = ModelConfig::new(6, Model::Ncc1);
        let mut net = Network::new(cfg, &Knowledge::Complete);
        let target = net.id(0);
        net.send(5, target, 1, &[Word::Val(1)]).unwrap();
        net.send(2, target, 1, &[Word::Val(2)]).unwrap();
        net.send(5, target, 1, &[Word::Val(3)]).unwrap();
        let got: Vec<i64> = net.deliver().unwrap().iter().map(|e| e.msg.payload[0].val()).collect();
        assert_eq!(got, vec![2, 1, 3]);
    }

    #[test]
    fn receive_overrun_is_recorded() {
        let cfg = ModelConfig::new(8, Model::Ncc1)
            .with_cap_factor(1)
            .with_strictness(Strictness::Record);
        let mut net = Network::new(cfg, &Knowledge::Complete);
        let target = net.id(0);
        for u in 1..5 {
            net.send(u, target, 0, &[]).unwrap();
        }
        net.deliver().unwrap();
        let v = &net.stats().violations;
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].direction, Direction::Recv);
        assert_eq!(v[0].count, 4);
        assert_eq!(net.stats().max_recv(), 4);
    }

    #[test]
    fn round_ceiling_reports_no_progress() {
        let mut cfg = ModelConfig::new(2, Model::Ncc1);
        cfg.max_rounds = 3;
        let mut net = Network::new(cfg, &Knowledge::Complete);
        for _ in 0..3 {
            net.idle().unwrap();
        }
        assert_eq!(net.idle(), Err(SimError::NoProgress(3)));
    }
}
