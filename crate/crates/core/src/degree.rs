//! Degree realization by a parallel Havel–Hakimi.
//!
//! Each phase sorts the nodes by residual degree (largest first), learns
//! the maximum residual `δ` and the number `N` of nodes attaining it, and
//! cuts the front of the sorted path into `q` groups of `δ + 1` nodes. The
//! first node of each group multicasts its identifier to the other `δ`,
//! which store it and lose one unit of residual degree, while the first
//! node is satisfied and leaves for good.

use crate::graph::{Overlay, OverlayMode};
use crate::primitives::bst::{initial_trees, PathTrees};
use crate::primitives::global::{allreduce, broadcast, Agg};
use crate::primitives::routing::{multicast, token_collect, GroupError};
use crate::primitives::sort::sort;
use crate::sim::{Network, NodeId, Payload, SimError, Word};
use crate::{drive, Finished, ModelConfig, Realization, Verdict};

/// What a node does when its residual degree would drop below zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Report the sequence as unrealizable.
    Exact,
    /// Reset the residual to zero and keep going (upper envelope).
    Envelope,
}

/// Number of groups in a phase with maximum residual `delta` held by `count` nodes.
pub fn group_count(count: usize, delta: usize) -> usize {
    (count / (delta + 1)).max(1)
}

/// Outcome of the phase loop.
#[derive(Clone, Debug)]
pub struct Phases {
    pub verdict: Verdict,
    /// Identifiers stored by each node: an implicit overlay.
    pub known: Vec<Vec<NodeId>>,
    /// Trees over the last sorted path, reusable by later steps.
    pub trees: PathTrees,
    pub phases: u64,
}

/// Runs the phase loop among the members of `t`, a tree over a single
/// path; `degrees` is indexed by node and read at members only.
pub fn run_phases(net: &mut Network, mut t: PathTrees, degrees: &[i64], mode: Mode) -> Result<Phases, SimError> {
    let n = net.n();
    assert_eq!(degrees.len(), n);
    let members_of_path = t.members.clone();
    let head = t.heads().next().expect("one path");
    let len = t.info[head].len as i64;
    // `None` marks a satisfied group head, which sorts behind everyone.
    let mut residual: Vec<Option<i64>> = degrees.iter().map(|&d| Some(d)).collect();
    let mut known: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    let mut phases = 0;
    let unrealizable = |known, trees, phases| Phases {
        verdict: Verdict::Unrealizable,
        known,
        trees,
        phases,
    };

    // Each node checks its own degree against the range [0, len-1].
    let bad: Vec<i64> = degrees.iter().map(|&d| (d < 0 || d >= len) as i64).collect();
    if allreduce(net, &t, &bad, Agg::Or)?[head] != 0 {
        return Ok(unrealizable(known, t, phases));
    }

    loop {
        phases += 1;
        let keys: Vec<i64> = residual.iter().map(|r| r.map_or(1, |d| -d)).collect();
        t = sort(net, &t, &keys)?;
        let head = t.heads().next().expect("one path");
        let mut top = vec![Payload::new(); n];
        top[head].push(Word::Val(residual[head].unwrap_or(0)));
        let delta: Vec<i64> = broadcast(net, &t, &top)?.iter().map(|p| p.first().map_or(0, |w| w.val())).collect();
        if delta[head] <= 0 {
            break;
        }
        let at_max: Vec<i64> = (0..n).map(|u| (residual[u] == Some(delta[u])) as i64).collect();
        let count = allreduce(net, &t, &at_max, Agg::Sum)?;

        let mut sources = Vec::new();
        let mut members = Vec::new();
        for &u in &members_of_path {
            let d = delta[u] as usize;
            let q = group_count(count[u] as usize, d);
            let p = t.info[u].position;
            let group = p / (d + 1);
            if group >= q {
                continue;
            }
            let gid = group as u64 + 1;
            if p.is_multiple_of(d + 1) {
                sources.push((u, gid, Word::Id(net.id(u))));
            } else {
                members.push((u, gid));
            }
        }
        let got = multicast(net, &t, &members, &sources).map_err(into_sim)?;
        for &(u, _, _) in &sources {
            residual[u] = None;
        }
        let mut negative = vec![0i64; n];
        for &(u, _) in &members {
            for &(_, w) in &got[u] {
                known[u].push(w.id());
            }
            match residual[u] {
                Some(d) if d > 0 => residual[u] = Some(d - 1),
                // A satisfied head offered another edge stays satisfied.
                None if mode == Mode::Envelope => {}
                _ if mode == Mode::Envelope => residual[u] = Some(0),
                _ => negative[u] = 1,
            }
        }
        // A head whose group runs past the end of the path cannot be satisfied.
        for &(u, _, _) in &sources {
            if t.info[u].position + delta[u] as usize >= t.info[u].len {
                negative[u] = 1;
            }
        }
        if allreduce(net, &t, &negative, Agg::Or)?[head] != 0 {
            return Ok(unrealizable(known, t, phases));
        }
    }
    Ok(Phases {
        verdict: Verdict::Ok,
        known,
        trees: t,
        phases,
    })
}

fn into_sim(e: GroupError) -> SimError {
    match e {
        GroupError::Sim(s) => s,
        other => unreachable!("group layout error: {other}"),
    }
}

/// Every stored edge is announced to its other endpoint: one token
/// collection group per member of `t`, whose members are the nodes storing
/// it. Repeated records of the same edge collapse.
pub fn make_explicit(net: &mut Network, t: &PathTrees, known: &[Vec<NodeId>]) -> Result<Vec<Vec<NodeId>>, SimError> {
    let n = net.n();
    let mut members = Vec::new();
    for &u in &t.members {
        for &v in &known[u] {
            members.push((u, v.0, Word::Id(net.id(u))));
        }
    }
    let dests: Vec<(usize, u64)> = t.members.iter().map(|&u| (u, net.id(u).0)).collect();
    let got = token_collect(net, t, &members, &dests).map_err(into_sim)?;
    Ok((0..n)
        .map(|u| {
            let mut all: Vec<NodeId> = known[u].iter().copied().chain(got[u].iter().map(|&(_, w)| w.id())).collect();
            all.sort_unstable();
            all.dedup();
            all
        })
        .collect())
}

fn overlay(net: &Network, mode: OverlayMode, known: Vec<Vec<NodeId>>) -> Overlay {
    Overlay {
        mode,
        ids: net.ids().to_vec(),
        known,
    }
}

fn realize(config: ModelConfig, degrees: &[i64], mode: Mode, explicit: bool) -> Result<Realization, SimError> {
    assert_eq!(degrees.len(), config.n);
    drive(config, |net| {
        let t = initial_trees(net)?;
        let run = run_phases(net, t, degrees, mode)?;
        let mut fin = if run.verdict != Verdict::Ok {
            Finished::unrealizable()
        } else if explicit {
            let before = net.round();
            let known = make_explicit(net, &run.trees, &run.known)?;
            let mut fin = Finished::ok(overlay(net, OverlayMode::Explicit, known));
            fin.conversion_rounds = Some(net.round() - before);
            fin
        } else {
            Finished::ok(overlay(net, OverlayMode::Implicit, run.known))
        };
        fin.phases = Some(run.phases);
        Ok(fin)
    })
}

/// Implicit realization: each edge is stored by one endpoint.
pub fn realize_implicit(config: ModelConfig, degrees: &[i64]) -> Result<Realization, SimError> {
    realize(config, degrees, Mode::Exact, false)
}

/// Implicit realization followed by conversion to an explicit one.
pub fn realize_explicit(config: ModelConfig, degrees: &[i64]) -> Result<Realization, SimError> {
    realize(config, degrees, Mode::Exact, true)
}

/// Explicit realization of an upper envelope of any sequence with entries
/// in `[0, n-1]`: residuals that would go negative are reset to zero.
pub fn realize_envelope(config: ModelConfig, degrees: &[i64]) -> Result<Realization, SimError> {
    realize(config, degrees, Mode::Envelope, true)
}
