//! Broadcast, aggregation and collection over the trees of a path family.
//!
//! Every operation runs on all trees of a [`PathTrees`] at once and uses a
//! fixed window of `k` rounds per sweep, so all nodes finish together.

use super::bst::PathTrees;
use crate::sim::{Network, Payload, SimError, Word};
use std::collections::VecDeque;

const DOWN: u16 = 20;
const UP: u16 = 21;
const TOKEN: u16 = 22;
const SPREAD: u16 = 23;

/// Distributive aggregate functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Agg {
    Sum,
    Max,
    Min,
    Count,
    Or,
}

impl Agg {
    pub fn lift(self, v: i64) -> i64 {
        match self {
            Agg::Count => 1,
            Agg::Or => (v != 0) as i64,
            _ => v,
        }
    }

    pub fn combine(self, a: i64, b: i64) -> i64 {
        match self {
            Agg::Sum | Agg::Count => a + b,
            Agg::Max => a.max(b),
            Agg::Min => a.min(b),
            Agg::Or => a | b,
        }
    }
}

/// Sends each head's payload to every node of its tree. `payloads` is read
/// at heads only; the result holds the received payload at every member.
pub fn broadcast(net: &mut Network, t: &PathTrees, payloads: &[Payload]) -> Result<Vec<Payload>, SimError> {
    let mut got = vec![Payload::new(); net.n()];
    let mut ready = Vec::new();
    for u in t.heads() {
        got[u] = payloads[u].clone();
        ready.push(u);
    }
    for _ in 0..t.k {
        for u in ready.drain(..) {
            for c in t.children(u) {
                net.send(u, c, DOWN, &got[u])?;
            }
        }
        for e in net.deliver()? {
            got[e.to] = e.msg.payload;
            ready.push(e.to);
        }
    }
    Ok(got)
}

/// Combines one value per member towards each head in `k` rounds. The
/// result is meaningful at heads.
pub fn aggregate(net: &mut Network, t: &PathTrees, values: &[i64], op: Agg) -> Result<Vec<i64>, SimError> {
    let n = net.n();
    let mut acc = vec![0i64; n];
    let mut waiting = vec![0u8; n];
    let mut ready = Vec::new();
    for &u in &t.members {
        acc[u] = op.lift(values[u]);
        waiting[u] = t.children(u).count() as u8;
        if waiting[u] == 0 {
            ready.push(u);
        }
    }
    for _ in 0..t.k {
        for u in ready.drain(..) {
            if let Some(p) = t.info[u].parent {
                net.send(u, p, UP, &[Word::Val(acc[u])])?;
            }
        }
        for e in net.deliver()? {
            let v = e.to;
            acc[v] = op.combine(acc[v], e.msg.payload[0].val());
            waiting[v] -= 1;
            if waiting[v] == 0 {
                ready.push(v);
            }
        }
    }
    Ok(acc)
}

/// Aggregate followed by broadcast of the result: every member learns the
/// aggregate of its own tree. Takes `2k` rounds.
pub fn allreduce(net: &mut Network, t: &PathTrees, values: &[i64], op: Agg) -> Result<Vec<i64>, SimError> {
    let acc = aggregate(net, t, values, op)?;
    let payloads: Vec<Payload> = acc.iter().map(|&v| Payload::from_slice(&[Word::Val(v)])).collect();
    let got = broadcast(net, t, &payloads)?;
    Ok(got
        .iter()
        .map(|p| p.first().map_or(0, |w| w.val()))
        .collect())
}

/// Pipelined collection of single-word tokens at the heads.
///
/// Token counts are aggregated first so each head knows when it is done;
/// the heads then broadcast completion. Each node forwards at most
/// `cap / 2` tokens per round, keeping every receive load within the cap.
pub fn collect(net: &mut Network, t: &PathTrees, tokens: &[Vec<Word>]) -> Result<Vec<Vec<Word>>, SimError> {
    let n = net.n();
    let counts: Vec<i64> = (0..n).map(|u| tokens[u].len() as i64).collect();
    let total = aggregate(net, t, &counts, Agg::Sum)?;
    let budget = (net.cap() / 2).max(1);
    let mut queue: Vec<VecDeque<Word>> = vec![VecDeque::new(); n];
    let mut out: Vec<Vec<Word>> = vec![Vec::new(); n];
    let mut missing: usize = 0;
    for &u in &t.members {
        if t.info[u].parent.is_none() {
            out[u].extend(tokens[u].iter().copied());
            missing += total[u] as usize - tokens[u].len();
        } else {
            queue[u].extend(tokens[u].iter().copied());
        }
    }
    let mut busy: Vec<usize> = t.members.iter().copied().filter(|&u| !queue[u].is_empty()).collect();
    while missing > 0 {
        for &u in &busy {
            let p = t.info[u].parent.unwrap();
            for _ in 0..budget.min(queue[u].len()) {
                let w = queue[u].pop_front().unwrap();
                net.send(u, p, TOKEN, &[w])?;
            }
        }
        busy.retain(|&u| !queue[u].is_empty());
        for e in net.deliver()? {
            let v = e.to;
            let w = e.msg.payload[0];
            if t.info[v].parent.is_none() {
                out[v].push(w);
                missing -= 1;
            } else {
                if queue[v].is_empty() {
                    busy.push(v);
                }
                queue[v].push_back(w);
            }
        }
    }
    broadcast(net, t, &vec![Payload::new(); n])?;
    Ok(out)
}

/// Pipelined broadcast of a list of words held at each head. The head
/// sends the list length first; every node forwards up to `cap / 2`
/// two-word messages per child per round as soon as it has them.
pub fn spread(net: &mut Network, t: &PathTrees, tokens: &[Vec<Word>]) -> Result<Vec<Vec<Word>>, SimError> {
    let n = net.n();
    let per_child = (net.cap() / 2).max(1);
    let mut got: Vec<Vec<Word>> = vec![Vec::new(); n];
    let mut sent = vec![0usize; n];
    let mut total: Vec<Option<usize>> = vec![None; n];
    for u in t.heads() {
        got[u].push(Word::Val(tokens[u].len() as i64));
        got[u].extend(tokens[u].iter().copied());
        total[u] = Some(tokens[u].len() + 1);
    }
    let done = |u: usize, got: &[Vec<Word>], total: &[Option<usize>]| total[u] == Some(got[u].len());
    while !t.members.iter().all(|&u| done(u, &got, &total) && (sent[u] == got[u].len() || t.children(u).next().is_none())) {
        for &u in &t.members {
            let end = got[u].len().min(sent[u] + 2 * per_child);
            if end == sent[u] {
                continue;
            }
            for c in t.children(u) {
                for chunk in got[u][sent[u]..end].chunks(2) {
                    net.send(u, c, SPREAD, chunk)?;
                }
            }
            sent[u] = end;
        }
        for e in net.deliver()? {
            let v = e.to;
            got[v].extend(e.msg.payload.iter().copied());
            if total[v].is_none() {
                total[v] = Some(got[v][0].val() as usize + 1);
            }
        }
    }
    Ok(got.into_iter().map(|mut g| g.split_off(1.min(g.len()))).collect())
}

/// Exclusive prefix sums along each path: member `u` learns the sum of the
/// values at positions before it. Subtree sums go up, then every node
/// hands its left child its own offset and its right child the offset
/// plus everything up to and including itself. Takes `2k` rounds.
pub fn prefix_sums(net: &mut Network, t: &PathTrees, values: &[i64]) -> Result<Vec<i64>, SimError> {
    let n = net.n();
    let mut subtree = vec![0i64; n];
    let mut left_sum = vec![0i64; n];
    let mut waiting = vec![0u8; n];
    let mut ready = Vec::new();
    for &u in &t.members {
        subtree[u] = values[u];
        waiting[u] = t.children(u).count() as u8;
        if waiting[u] == 0 {
            ready.push(u);
        }
    }
    for _ in 0..t.k {
        for u in ready.drain(..) {
            if let Some(p) = t.info[u].parent {
                net.send(u, p, UP, &[Word::Val(subtree[u])])?;
            }
        }
        for e in net.deliver()? {
            let v = e.to;
            let s = e.msg.payload[0].val();
            subtree[v] += s;
            if t.info[v].left == Some(e.msg.src) {
                left_sum[v] = s;
            }
            waiting[v] -= 1;
            if waiting[v] == 0 {
                ready.push(v);
            }
        }
    }
    let mut offset = vec![0i64; n];
    let mut ready: Vec<usize> = t.heads().collect();
    for _ in 0..t.k {
        for u in ready.drain(..) {
            let info = t.info[u];
            if let Some(l) = info.left {
                net.send(u, l, DOWN, &[Word::Val(offset[u])])?;
            }
            if let Some(r) = info.right {
                net.send(u, r, DOWN, &[Word::Val(offset[u] + left_sum[u] + values[u])])?;
            }
        }
        for e in net.deliver()? {
            offset[e.to] = e.msg.payload[0].val();
            ready.push(e.to);
        }
    }
    Ok((0..n).map(|u| offset[u] + left_sum[u]).collect())
}
