//! Tree realizations of degree sequences.
//!
//! Both constructions sort the nodes by degree and use prefix sums to give
//! every node the positions of the nodes it must adopt. A parent tells the
//! first and last node of its block (routed by position), the block cuts
//! itself out of the sorted path, and a broadcast over the block's own tree
//! spreads the parent's identifier.
//!
//! [`Construction::Backbone`] strings the non-leaves into a path and hangs
//! the leaves off it (largest diameter). [`Construction::Greedy`] fills the
//! tree level by level with the highest degrees first, which gives the
//! minimum diameter.

use crate::graph::{Overlay, OverlayMode};
use crate::primitives::bst::{build_trees, initial_trees, PathFamily};
use crate::primitives::global::{allreduce, broadcast, prefix_sums, Agg};
use crate::primitives::routing::unicast;
use crate::primitives::sort::sort;
use crate::sim::{ceil_log2, Network, NodeId, Payload, SimError, Word};
use crate::{drive, Finished, ModelConfig, Realization};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Construction {
    /// Non-leaves form a path; leaves attach in blocks.
    Backbone,
    /// Greedy tree: each node adopts the next highest-degree parentless nodes.
    Greedy,
}

/// A sequence is a tree sequence iff it sums to `2(n-1)` with every entry
/// at least 1 (for `n >= 2`); the single-node tree has degree 0.
fn feasible(net: &mut Network, t: &crate::primitives::bst::PathTrees, degrees: &[i64]) -> Result<bool, SimError> {
    let n = net.n() as i64;
    let bad: Vec<i64> = degrees
        .iter()
        .map(|&d| if n == 1 { (d != 0) as i64 } else { (d < 1 || d >= n) as i64 })
        .collect();
    let head = t.heads().next().unwrap();
    let any_bad = allreduce(net, t, &bad, Agg::Or)?[head];
    let sum = allreduce(net, t, degrees, Agg::Sum)?[head];
    Ok(any_bad == 0 && sum == 2 * (n - 1))
}

fn run(net: &mut Network, degrees: &[i64], how: Construction) -> Result<Finished, SimError> {
    let n = net.n();
    assert_eq!(degrees.len(), n);
    let t = initial_trees(net)?;
    if !feasible(net, &t, degrees)? {
        return Ok(Finished::unrealizable());
    }
    let mut known: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    if n == 1 {
        return Ok(Finished::ok(overlay(net, known)));
    }
    let keys: Vec<i64> = degrees.iter().map(|&d| -d).collect();
    let t = sort(net, &t, &keys)?;
    let inner: Vec<i64> = degrees.iter().map(|&d| (d > 1) as i64).collect();
    // With n = 2 there are no inner nodes; the first node then acts as a
    // one-node backbone.
    let k = allreduce(net, &t, &inner, Agg::Sum)?.iter().map(|&k| k.max(1)).collect::<Vec<_>>();
    let pos = |u: usize| t.info[u].position as i64 + 1;

    let inc: Vec<i64> = (0..n)
        .map(|u| match how {
            Construction::Backbone if pos(u) <= k[u] => degrees[u] - 2,
            Construction::Backbone => 0,
            Construction::Greedy => degrees[u] - 1,
        })
        .collect();
    let pre = prefix_sums(net, &t, &inc)?;

    // Blocks as 1-based inclusive position ranges, known to their parents.
    let mut blocks: Vec<(usize, i64, i64)> = Vec::new();
    for u in 0..n {
        let i = pos(u);
        let p = 2 + pre[u];
        let first_node = (i > 1) as i64;
        let (lo, hi) = match how {
            Construction::Backbone if i <= k[u] => {
                if let Some(v) = t.pred(u) {
                    known[u].push(v);
                }
                if let Some(v) = t.succ(u) {
                    known[u].push(v);
                }
                (k[u] + p + first_node, k[u] + p + degrees[u] - 2)
            }
            Construction::Backbone => continue,
            Construction::Greedy => (p + first_node, p + degrees[u] - 1),
        };
        if lo <= hi {
            blocks.push((u, lo, hi));
        }
    }

    // The parent reaches both ends of its block by position.
    let slot = |position: i64, last: bool| 2 * position as u64 + last as u64;
    let mut sends = Vec::new();
    for &(u, lo, hi) in &blocks {
        let me = Word::Id(net.id(u));
        sends.push((u, slot(lo, false), me));
        sends.push((u, slot(hi, true), me));
    }
    let dests: Vec<(usize, u64)> = (0..n).flat_map(|u| [(u, slot(pos(u), false)), (u, slot(pos(u), true))]).collect();
    let got = unicast(net, &t, &sends, &dests)?;

    // Every node except the backbone and its first leaf (or the root) lies
    // in exactly one block; the informed ends cut the sorted path there.
    let in_block = |u: usize| match how {
        Construction::Backbone => pos(u) > k[u] + 1,
        Construction::Greedy => pos(u) > 1,
    };
    let mut fam = PathFamily::new(n);
    let mut parent: Vec<Option<NodeId>> = vec![None; n];
    for u in 0..n {
        if !in_block(u) {
            continue;
        }
        let mut is_first = false;
        let mut is_last = false;
        for &(g, w) in &got[u] {
            parent[u] = Some(w.id());
            is_first |= g % 2 == 0;
            is_last |= g % 2 == 1;
        }
        fam.members.push(u);
        fam.pred[u] = if is_first { None } else { t.pred(u) };
        fam.succ[u] = if is_last { None } else { t.succ(u) };
    }
    let bt = build_trees(net, &fam, ceil_log2(n))?;
    let mut payloads = vec![Payload::new(); n];
    for u in bt.heads() {
        payloads[u].push(Word::Id(parent[u].expect("block head is informed")));
    }
    let spread = broadcast(net, &bt, &payloads)?;
    for &u in &fam.members {
        known[u].push(spread[u][0].id());
    }
    Ok(Finished::ok(overlay(net, known)))
}

fn overlay(net: &Network, known: Vec<Vec<NodeId>>) -> Overlay {
    Overlay {
        mode: OverlayMode::Implicit,
        ids: net.ids().to_vec(),
        known,
    }
}

/// Implicit tree realization with the path backbone.
pub fn realize_tree(config: ModelConfig, degrees: &[i64]) -> Result<Realization, SimError> {
    drive(config, |net| run(net, degrees, Construction::Backbone))
}

/// Implicit tree realization of minimum diameter.
pub fn realize_tree_min_diameter(config: ModelConfig, degrees: &[i64]) -> Result<Realization, SimError> {
    drive(config, |net| run(net, degrees, Construction::Greedy))
}
