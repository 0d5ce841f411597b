//! Group communication over a positioned path: local aggregation,
//! multicast and token collection.
//!
//! Every group identifier `gid` is hashed (with the run seed) to a
//! rendezvous position. Packets travel there over the level links by
//! repeatedly jumping the largest power of two not exceeding the remaining
//! distance, so each route has at most `k + 1` hops. Upward packets of the
//! same group are merged when they queue on the same link, and the merge
//! points remember where packets came from; results travel back down those
//! records. A phase ends when a snapshot convergecast over the search tree
//! reports that, in one round, no node held or sent a packet.

use super::bst::PathTrees;
use super::global::{broadcast, Agg};
use crate::sim::{mix64, Network, NodeId, Payload, SimError, Word};
use rustc_hash::FxHashMap;
use smallvec::SmallVec;
use std::collections::VecDeque;

const PACKET: u16 = 80; // + kind
const STATUS: u16 = 79;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
enum Kind {
    /// Member joins its group; carries a count, merged by addition.
    Join = 0,
    /// Member value for aggregation, merged with the aggregate function.
    Value = 1,
    /// Destination registration; records the way back to the destination.
    Dest = 2,
    /// Multicast token from the source.
    Source = 3,
    /// Token addressed to a singleton group.
    Token = 4,
    /// Rendezvous result heading to the destination.
    ToDest = 5,
    /// Token or rank offset spreading down the join records.
    ToMembers = 6,
}

impl Kind {
    fn from_tag(tag: u16) -> Kind {
        match tag - PACKET {
            0 => Kind::Join,
            1 => Kind::Value,
            2 => Kind::Dest,
            3 => Kind::Source,
            4 => Kind::Token,
            5 => Kind::ToDest,
            _ => Kind::ToMembers,
        }
    }

    fn upward(self) -> bool {
        !matches!(self, Kind::ToDest | Kind::ToMembers)
    }
}

#[derive(Clone, Copy, Debug)]
enum Entry {
    /// Merged packet whose payload lives in the merge table.
    Merged(Kind, u64),
    Plain(Kind, u64, Word),
}

#[derive(Clone, Debug, Default)]
struct JoinRecord {
    own: u64,
    children: SmallVec<[(NodeId, u64); 2]>,
}

#[derive(Clone, Debug, Default)]
struct RNode {
    queues: Vec<(NodeId, VecDeque<Entry>)>,
    merged: FxHashMap<(NodeId, Kind, u64), i64>,
    sent: bool,
    joins: FxHashMap<u64, JoinRecord>,
    /// Next hop towards the destination of a group; `None` at the destination.
    dests: FxHashMap<u64, Option<NodeId>>,
    /// Values and tokens that reached their rendezvous.
    held: FxHashMap<u64, Word>,
    busy_ring: Vec<bool>,
    child_ring: Vec<bool>,
}

impl RNode {
    fn queued(&self) -> bool {
        self.queues.iter().any(|(_, q)| !q.is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroupError {
    #[error("node {0} is the destination of more than one group")]
    SharedDestination(NodeId),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Per-node deliveries: `(gid, word)` pairs.
pub type Deliveries = Vec<Vec<(u64, Word)>>;

struct Router<'a> {
    net: &'a mut Network,
    t: &'a PathTrees,
    nodes: Vec<RNode>,
    budget: usize,
    salt: u64,
    agg: Agg,
    out: Deliveries,
}

impl<'a> Router<'a> {
    fn new(net: &'a mut Network, t: &'a PathTrees, agg: Agg) -> Self {
        let n = net.n();
        let links = (2 * t.k as usize).max(1);
        // Two children and one parent send status messages every round.
        let budget = (net.cap().saturating_sub(3) / links).max(1);
        let salt = mix64(net.config().seed ^ 0x5EED_0F_6A7E);
        Router {
            net,
            t,
            nodes: vec![RNode::default(); n],
            budget,
            salt,
            agg,
            out: vec![Vec::new(); n],
        }
    }

    fn len(&self) -> usize {
        let head = self.t.heads().next().expect("router needs a path");
        self.t.info[head].len
    }

    fn rendezvous(&self, gid: u64) -> usize {
        (mix64(gid ^ self.salt) % self.len() as u64) as usize
    }

    /// Next hop from `u` towards position `target`.
    fn hop(&self, u: usize, target: usize) -> NodeId {
        let p = self.t.info[u].position;
        let d = target.abs_diff(p);
        let b = usize::BITS - 1 - d.leading_zeros();
        self.t.link(u, b, target > p).expect("level link missing")
    }

    fn enqueue(&mut self, u: usize, to: NodeId, kind: Kind, gid: u64, w: Word) {
        let node = &mut self.nodes[u];
        let combinable = matches!(kind, Kind::Join | Kind::Value);
        if combinable {
            let agg = self.agg;
            let key = (to, kind, gid);
            if let Some(acc) = node.merged.get_mut(&key) {
                *acc = if kind == Kind::Join { *acc + w.val() } else { agg.combine(*acc, w.val()) };
                return;
            }
            node.merged.insert(key, w.val());
        }
        let entry = if combinable { Entry::Merged(kind, gid) } else { Entry::Plain(kind, gid, w) };
        match node.queues.iter_mut().find(|(v, _)| *v == to) {
            Some((_, q)) => q.push_back(entry),
            None => node.queues.push((to, VecDeque::from([entry]))),
        }
    }

    /// A packet travelling up towards its rendezvous, arriving at (or starting from) `u`.
    fn route_up(&mut self, u: usize, from: Option<NodeId>, kind: Kind, gid: u64, w: Word) {
        let target = self.rendezvous(gid);
        let here = self.t.info[u].position == target;
        match kind {
            Kind::Join => {
                let rec = self.nodes[u].joins.entry(gid).or_default();
                match from {
                    None => rec.own += w.val() as u64,
                    Some(src) => match rec.children.iter_mut().find(|(c, _)| *c == src) {
                        Some((_, c)) => *c += w.val() as u64,
                        None => rec.children.push((src, w.val() as u64)),
                    },
                }
            }
            Kind::Dest => {
                self.nodes[u].dests.insert(gid, from);
            }
            _ => {}
        }
        if here {
            if matches!(kind, Kind::Value | Kind::Source | Kind::Token) {
                let agg = self.agg;
                let held = &mut self.nodes[u].held;
                match (kind, held.get(&gid)) {
                    (Kind::Value, Some(&prev)) => {
                        held.insert(gid, Word::Val(agg.combine(prev.val(), w.val())));
                    }
                    _ => {
                        held.insert(gid, w);
                    }
                }
            }
            return;
        }
        // Join counts are additive, so a later partial count simply tops up the parent.
        let next = self.hop(u, target);
        self.enqueue(u, next, kind, gid, w);
    }

    /// A result heading to the destination of `gid`.
    fn route_to_dest(&mut self, u: usize, gid: u64, w: Word) {
        match self.nodes[u].dests.get(&gid).copied() {
            Some(Some(next)) => self.enqueue(u, next, Kind::ToDest, gid, w),
            Some(None) => self.out[u].push((gid, w)),
            None => {}
        }
    }

    /// A multicast token (`ranked == false`) or rank offset spreading down
    /// the join records of `gid`.
    fn route_to_members(&mut self, u: usize, gid: u64, w: Word, ranked: bool) {
        let Some(rec) = self.nodes[u].joins.get(&gid).cloned() else {
            return;
        };
        let mut base = if ranked { w.val() } else { 0 };
        if rec.own > 0 {
            self.out[u].push((gid, if ranked { Word::Val(base) } else { w }));
            base += rec.own as i64;
        }
        for (child, count) in rec.children {
            let word = if ranked { Word::Val(base) } else { w };
            self.enqueue(u, child, Kind::ToMembers, gid, word);
            base += count as i64;
        }
    }

    fn receive(&mut self, u: usize, src: NodeId, tag: u16, p: &[Word], ranked: bool) {
        let kind = Kind::from_tag(tag);
        let gid = p[0].val() as u64;
        if kind.upward() {
            self.route_up(u, Some(src), kind, gid, p[1]);
        } else if kind == Kind::ToDest {
            self.route_to_dest(u, gid, p[1]);
        } else {
            self.route_to_members(u, gid, p[1], ranked);
        }
    }

    /// Runs rounds until a snapshot shows every node idle, then tells everyone.
    fn settle(&mut self, ranked: bool) -> Result<(), SimError> {
        let t = self.t;
        let k = t.k as u64;
        let ring = k as usize + 1;
        let start = self.net.round();
        for &u in &t.members {
            let node = &mut self.nodes[u];
            node.busy_ring = vec![true; ring];
            node.child_ring = vec![false; ring];
        }
        let root = t.heads().next().unwrap();
        loop {
            let now = self.net.round();
            // Send phase.
            for &u in &t.members {
                let node = &mut self.nodes[u];
                node.sent = false;
                if !node.queued() {
                    continue;
                }
                let budget = self.budget;
                let mut queues = std::mem::take(&mut node.queues);
                for (to, q) in queues.iter_mut() {
                    for _ in 0..budget.min(q.len()) {
                        let entry = q.pop_front().unwrap();
                        let (kind, gid, w) = match entry {
                            Entry::Merged(kind, gid) => {
                                let v = self.nodes[u].merged.remove(&(*to, kind, gid)).unwrap();
                                (kind, gid, Word::Val(v))
                            }
                            Entry::Plain(kind, gid, w) => (kind, gid, w),
                        };
                        self.net.send(u, *to, PACKET + kind as u16, &[Word::Val(gid as i64), w])?;
                        self.nodes[u].sent = true;
                    }
                }
                queues.retain(|(_, q)| !q.is_empty());
                self.nodes[u].queues = queues;
            }
            // Snapshot bookkeeping.
            let mut decided = None;
            for &u in &t.members {
                let depth = t.info[u].depth as u64;
                let node = &mut self.nodes[u];
                let busy = node.sent || node.queued();
                node.busy_ring[(now % ring as u64) as usize] = busy;
                let Some(s) = (now + depth).checked_sub(k).filter(|&s| s >= start) else {
                    continue;
                };
                let slot = (s % ring as u64) as usize;
                let any = node.busy_ring[slot] || node.child_ring[slot];
                node.child_ring[slot] = false;
                match t.info[u].parent {
                    Some(p) => self.net.send(u, p, STATUS, &[Word::Val(s as i64), Word::Val(any as i64)])?,
                    None if !any => decided = Some(s),
                    None => {}
                }
            }
            if let Some(s) = decided {
                debug_assert!(self.nodes[root].busy_ring.len() == ring && s >= start);
                // Status messages of this round are dropped with the phase.
                self.net.deliver()?;
                break;
            }
            for e in self.net.deliver()? {
                if e.msg.tag == STATUS {
                    let s = e.msg.payload[0].val() as u64;
                    if e.msg.payload[1].val() != 0 {
                        self.nodes[e.to].child_ring[(s % ring as u64) as usize] = true;
                    }
                } else {
                    self.receive(e.to, e.msg.src, e.msg.tag, &e.msg.payload, ranked);
                }
            }
        }
        broadcast(self.net, t, &vec![Payload::new(); self.net.n()])?;
        Ok(())
    }
}

fn check_destinations(net: &Network, dests: &[(usize, u64)]) -> Result<(), GroupError> {
    let mut seen: FxHashMap<usize, u64> = FxHashMap::default();
    for &(u, gid) in dests {
        if let Some(&g) = seen.get(&u) {
            if g != gid {
                return Err(GroupError::SharedDestination(net.id(u)));
            }
        }
        seen.insert(u, gid);
    }
    Ok(())
}

/// Each destination `(node, gid)` learns the aggregate of the values of
/// the members `(node, gid, value)` of its group. Empty groups deliver nothing.
pub fn local_aggregate(
    net: &mut Network,
    t: &PathTrees,
    members: &[(usize, u64, i64)],
    dests: &[(usize, u64)],
    op: Agg,
) -> Result<Vec<Vec<(u64, i64)>>, GroupError> {
    check_destinations(net, dests)?;
    let mut r = Router::new(net, t, op);
    for &(u, gid) in dests {
        r.route_up(u, None, Kind::Dest, gid, Word::Val(0));
    }
    for &(u, gid, v) in members {
        r.route_up(u, None, Kind::Value, gid, Word::Val(op.lift(v)));
    }
    r.settle(false)?;
    for &u in &t.members {
        let held: Vec<(u64, Word)> = r.nodes[u].held.iter().map(|(&g, &w)| (g, w)).collect();
        for (gid, w) in held {
            r.route_to_dest(u, gid, w);
        }
    }
    r.settle(false)?;
    Ok(r.out.into_iter().map(|v| v.into_iter().map(|(g, w)| (g, w.val())).collect()).collect())
}

/// Each source `(node, gid, word)` delivers its word to the destination
/// registered for `gid`: local aggregation with a single member per group,
/// carrying the word unchanged. A node may register for several gids.
pub fn unicast(
    net: &mut Network,
    t: &PathTrees,
    sends: &[(usize, u64, Word)],
    dests: &[(usize, u64)],
) -> Result<Deliveries, SimError> {
    let mut r = Router::new(net, t, Agg::Sum);
    for &(u, gid) in dests {
        r.route_up(u, None, Kind::Dest, gid, Word::Val(0));
    }
    for &(u, gid, w) in sends {
        r.route_up(u, None, Kind::Token, gid, w);
    }
    r.settle(false)?;
    for &u in &t.members {
        let held: Vec<(u64, Word)> = r.nodes[u].held.drain().collect();
        for (gid, w) in held {
            r.route_to_dest(u, gid, w);
        }
    }
    r.settle(false)?;
    Ok(r.out)
}

/// Every member `(node, gid)` receives the token of the source of its group.
pub fn multicast(
    net: &mut Network,
    t: &PathTrees,
    members: &[(usize, u64)],
    sources: &[(usize, u64, Word)],
) -> Result<Deliveries, GroupError> {
    let mut r = Router::new(net, t, Agg::Sum);
    for &(u, gid, w) in sources {
        r.route_up(u, None, Kind::Source, gid, w);
    }
    for &(u, gid) in members {
        r.route_up(u, None, Kind::Join, gid, Word::Val(1));
    }
    r.settle(false)?;
    for &u in &t.members {
        let held: Vec<(u64, Word)> = r.nodes[u].held.iter().map(|(&g, &w)| (g, w)).collect();
        for (gid, w) in held {
            r.route_to_members(u, gid, w, false);
        }
    }
    r.settle(false)?;
    Ok(r.out)
}

/// Every destination `(node, gid)` receives the tokens of all members
/// `(node, gid, token)` of its group. Members are first ranked within their
/// group; token `r` of group `g` then travels as its own group `(g, r)`, so
/// a large group's tokens take many different routes into the destination.
pub fn token_collect(
    net: &mut Network,
    t: &PathTrees,
    members: &[(usize, u64, Word)],
    dests: &[(usize, u64)],
) -> Result<Deliveries, GroupError> {
    check_destinations(net, dests)?;
    let n = net.n() as u64;
    let pack = |gid: u64, rank: u64| gid * (n + 1) + rank;
    let mut r = Router::new(net, t, Agg::Sum);
    // Ranking: counts up the join records, offsets back down.
    for &(u, gid) in dests {
        r.route_up(u, None, Kind::Dest, gid, Word::Val(0));
    }
    for &(u, gid, _) in members {
        r.route_up(u, None, Kind::Join, gid, Word::Val(1));
    }
    r.settle(false)?;
    for &u in &t.members {
        let roots: Vec<(u64, u64)> = r.nodes[u]
            .joins
            .iter()
            .filter(|(&g, _)| r.rendezvous(g) == t.info[u].position)
            .map(|(&g, rec)| (g, rec.own + rec.children.iter().map(|c| c.1).sum::<u64>()))
            .collect();
        for (gid, total) in roots {
            r.route_to_members(u, gid, Word::Val(1), true);
            r.route_to_dest(u, gid, Word::Val(total as i64));
        }
    }
    r.settle(true)?;
    let ranks = std::mem::replace(&mut r.out, vec![Vec::new(); t.info.len()]);
    // Delivery: one singleton group per token.
    let mut member_tokens: FxHashMap<(usize, u64), Vec<Word>> = FxHashMap::default();
    for &(u, gid, w) in members {
        member_tokens.entry((u, gid)).or_default().push(w);
    }
    for u in 0..ranks.len() {
        for &(gid, w) in &ranks[u] {
            let is_dest = dests.iter().any(|&(d, g)| d == u && g == gid);
            if is_dest {
                for rank in 1..=w.val() as u64 {
                    r.route_up(u, None, Kind::Dest, pack(gid, rank), Word::Val(0));
                }
            } else if let Some(tokens) = member_tokens.get_mut(&(u, gid)) {
                let token = tokens.pop().expect("one rank per membership");
                r.route_up(u, None, Kind::Token, pack(gid, w.val() as u64), token);
            }
        }
    }
    r.settle(false)?;
    for &u in &t.members {
        let held: Vec<(u64, Word)> = r.nodes[u].held.drain().collect();
        for (gid, w) in held {
            r.route_to_dest(u, gid, w);
        }
    }
    r.settle(false)?;
    Ok(r.out
        .into_iter()
        .map(|v| v.into_iter().map(|(g, w)| (g / (n + 1), w)).collect())
        .collect())
}
