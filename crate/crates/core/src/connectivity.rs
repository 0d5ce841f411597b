//! Connectivity-threshold realizations within twice the optimal edge count.
//!
//! Requirements are reduced to one value per node, `ρ(v) = max_u σ(u, v)`,
//! and the output guarantees `Conn(u, v) >= min{ρ(u), ρ(v)}` for every pair.
//! Any such graph needs `Σρ / 2` edges, and both constructions use at most `Σρ`.

use crate::degree::{make_explicit, run_phases, Mode};
use crate::graph::{Overlay, OverlayMode};
use crate::primitives::bst::{build_trees, initial_trees, PathFamily};
use crate::primitives::global::{allreduce, broadcast, Agg};
use crate::primitives::routing::unicast;
use crate::primitives::sort::sort;
use crate::sim::{ceil_log2, Model, Network, NodeId, Payload, SimError, Word};
use crate::{drive, Error, Finished, ModelConfig, Realization, Verdict};

/// Per-node requirement from a symmetric threshold matrix with zero diagonal.
pub fn rho_from_sigma(sigma: &[Vec<i64>]) -> Result<Vec<i64>, Error> {
    let n = sigma.len();
    for (i, row) in sigma.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Spec(format!("row {i} has {} entries, expected {n}", row.len())));
        }
        if row[i] != 0 {
            return Err(Error::Spec(format!("diagonal entry {i} is {}", row[i])));
        }
        for (j, &x) in row.iter().enumerate() {
            if x != sigma[j][i] {
                return Err(Error::Spec(format!("threshold matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    let rho: Vec<i64> = sigma.iter().map(|row| row.iter().copied().max().unwrap_or(0)).collect();
    check_rho(&rho)?;
    Ok(rho)
}

fn check_rho(rho: &[i64]) -> Result<(), Error> {
    let n = rho.len() as i64;
    match rho.iter().position(|&r| r < 0 || r > n - 1) {
        Some(i) => Err(Error::Spec(format!("threshold {} of node {i} is outside [0, {}]", rho[i], n - 1))),
        None => Ok(()),
    }
}

/// `|E| / (Σρ / 2)`, or 1 when there is no requirement.
pub fn approximation_ratio(edges: usize, rho: &[i64]) -> f64 {
    let sum: i64 = rho.iter().sum();
    if sum == 0 {
        1.0
    } else {
        edges as f64 / (sum as f64 / 2.0)
    }
}

/// The node `w` of maximum ρ (smallest identifier among ties) becomes a hub.
/// Let `L` list the other nodes in cyclic identifier order starting after
/// `w`. Every node with ρ(v) >= 1 stores `w` and the first ρ(v) - 1 nodes of
/// `L` other than itself. Those intermediates all sit among the first ρ(w)
/// entries of `L`, and the ones with ρ = 0 store `w` too, so each
/// intermediate gives `v` its own two-edge path to `w`. Needs complete
/// knowledge; takes one allreduce.
pub fn realize_conn_ncc1(config: ModelConfig, rho: &[i64]) -> Result<Realization, Error> {
    check_rho(rho)?;
    if config.model != Model::Ncc1 {
        return Err(Error::Spec("the hub construction needs the NCC1 model".into()));
    }
    assert_eq!(rho.len(), config.n);
    Ok(drive(config, |net| {
        let n = net.n();
        let t = initial_trees(net)?;
        const LOW: u64 = u32::MAX as u64;
        let keys: Vec<i64> = (0..n).map(|u| ((rho[u] as u64) << 32 | (LOW - net.id(u).0)) as i64).collect();
        let best = allreduce(net, &t, &keys, Agg::Max)?;
        let mut order: Vec<NodeId> = net.ids().to_vec();
        order.sort_unstable();
        let mut known = vec![Vec::new(); n];
        for u in 0..n {
            let w = NodeId(LOW - (best[u] as u64 & LOW));
            let rho_w = (best[u] >> 32) as usize;
            let me = net.id(u);
            if me == w {
                continue;
            }
            let at_w = order.binary_search(&w).unwrap();
            let list = (1..n).map(|s| order[(at_w + s) % n]);
            if rho[u] == 0 {
                if list.take(rho_w).any(|v| v == me) {
                    known[u].push(w);
                }
                continue;
            }
            known[u].push(w);
            known[u].extend(list.filter(|&v| v != me).take(rho[u] as usize - 1));
        }
        Ok(Finished::ok(Overlay {
            mode: OverlayMode::Implicit,
            ids: net.ids().to_vec(),
            known,
        }))
    })?)
}

/// Sort by ρ, realize an upper envelope of (ρ(x_1), .., ρ(x_{d0+1})) on the
/// first `d0 + 1 = ρ(x_1) + 1` nodes, then link every later node to its ρ
/// predecessors. Explicit; works with either knowledge model.
pub fn realize_conn_ncc0(config: ModelConfig, rho: &[i64]) -> Result<Realization, Error> {
    check_rho(rho)?;
    assert_eq!(rho.len(), config.n);
    Ok(drive(config, |net| run_layers(net, rho))?)
}

fn run_layers(net: &mut Network, rho: &[i64]) -> Result<Finished, SimError> {
    let n = net.n();
    let t = initial_trees(net)?;
    let keys: Vec<i64> = rho.iter().map(|&r| -r).collect();
    let t = sort(net, &t, &keys)?;
    let head = t.heads().next().unwrap();
    let mut top = vec![Payload::new(); n];
    top[head].push(Word::Val(rho[head]));
    let d0: Vec<i64> = broadcast(net, &t, &top)?.iter().map(|p| p[0].val()).collect();
    let pos = |u: usize| t.info[u].position as i64;

    // Phase 1: the first d0 + 1 nodes cut themselves out of the sorted path.
    let mut fam = PathFamily::new(n);
    for u in 0..n {
        if pos(u) <= d0[u] {
            fam.members.push(u);
            fam.pred[u] = t.pred(u);
            fam.succ[u] = if pos(u) == d0[u] { None } else { t.succ(u) };
        }
    }
    let core = build_trees(net, &fam, ceil_log2(d0[head] as usize + 1))?;
    let run = run_phases(net, core, rho, Mode::Envelope)?;
    debug_assert_eq!(run.verdict, Verdict::Ok);
    let mut known = make_explicit(net, &run.trees, &run.known)?;

    // Phase 2: x_i reaches its o-th predecessor through the slot (position, o).
    let slot = |p: i64, o: i64, d0: i64| (p * (d0 + 1) + o) as u64;
    let mut dests = Vec::new();
    let mut sends = Vec::new();
    for u in 0..n {
        for o in 1..=d0[u] {
            dests.push((u, slot(pos(u), o, d0[u])));
        }
        if pos(u) > d0[u] {
            // ρ(x_i) <= d0 <= i - 2 predecessors exist.
            assert!(rho[u] <= pos(u));
            for o in 1..=rho[u] {
                sends.push((u, slot(pos(u) - o, o, d0[u]), Word::Id(net.id(u))));
            }
        }
    }
    let got = unicast(net, &t, &sends, &dests)?;
    // Replies go out by offset so no node sends or receives more than the cap per round.
    let cap = net.cap() as i64;
    let mut replies: Vec<(usize, NodeId, i64)> = Vec::new();
    for u in 0..n {
        for &(g, w) in &got[u] {
            let o = (g % (d0[u] as u64 + 1)) as i64;
            known[u].push(w.id());
            replies.push((u, w.id(), o));
        }
    }
    let batches = (d0[head] + cap - 1) / cap;
    for b in 0..batches {
        for &(u, to, o) in &replies {
            if (o - 1) / cap == b {
                net.send(u, to, 0, &[Word::Id(net.id(u))])?;
            }
        }
        for e in net.deliver()? {
            known[e.to].push(e.msg.src);
        }
    }
    for list in &mut known {
        list.sort_unstable();
        list.dedup();
    }
    Ok(Finished::ok(Overlay {
        mode: OverlayMode::Explicit,
        ids: net.ids().to_vec(),
        known,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::all_pairs_connectivity;
    use rand::{Rng, SeedableRng};

    fn check(r: &Realization, rho: &[i64]) -> usize {
        assert_eq!(r.verdict, Verdict::Ok);
        assert!(r.stats.violations.is_empty());
        let g = r.overlay.as_ref().unwrap().to_simple().unwrap();
        let conn = all_pairs_connectivity(&g);
        for u in 0..rho.len() {
            for v in 0..rho.len() {
                if u != v {
                    assert!(conn[u][v] as i64 >= rho[u].min(rho[v]), "{rho:?} pair {u},{v}");
                }
            }
        }
        assert!(g.m() as i64 <= rho.iter().sum::<i64>());
        g.m()
    }

    fn ncc1(rho: &[i64]) -> Realization {
        realize_conn_ncc1(ModelConfig::new(rho.len(), Model::Ncc1).with_seed(3), rho).unwrap()
    }

    fn ncc0(rho: &[i64]) -> Realization {
        realize_conn_ncc0(ModelConfig::new(rho.len(), Model::Ncc0).with_seed(3), rho).unwrap()
    }

    #[test]
    fn hub_examples() {
        assert_eq!(check(&ncc1(&[1; 5]), &[1; 5]), 4);
        assert_eq!(check(&ncc1(&[0; 5]), &[0; 5]), 0);
        assert!(check(&ncc1(&[2; 6]), &[2; 6]) <= 10);
    }

    #[test]
    fn hub_degree_and_membership() {
        let rho = [2i64, 0, 3, 1, 3, 0, 1];
        let r = ncc1(&rho);
        check(&r, &rho);
        let o = r.overlay.unwrap();
        // Ties on the maximum go to the smaller identifier: node index 2 (id 3).
        // L = ids 4, 5, 6, 7, 1, 2; ρ(w) = 3 covers ids 4, 5, 6.
        let w = o.ids[2];
        let attached_zero = 5; // id 6
        for (u, list) in o.known.iter().enumerate() {
            assert_eq!(list.contains(&w), (rho[u] > 0 || u == attached_zero) && u != 2, "node {u}");
        }
        let g = o.to_simple().unwrap();
        assert_eq!(g.degree(2), 5);
    }

    #[test]
    fn zero_thresholds_inside_windows() {
        // Only two demanding nodes; everything between them must still help.
        let mut rho = vec![0i64; 9];
        rho[0] = 4;
        rho[8] = 4;
        check(&ncc1(&rho), &rho);
        check(&ncc0(&rho), &rho);
    }

    #[test]
    fn layered_examples() {
        assert!(check(&ncc0(&[1; 4]), &[1; 4]) <= 4);
        assert_eq!(check(&ncc0(&[3; 4]), &[3; 4]), 6);
        assert!(check(&ncc0(&[2, 2, 2, 1, 1]), &[2, 2, 2, 1, 1]) <= 8);
        assert_eq!(check(&ncc0(&[0; 3]), &[0; 3]), 0);
    }

    #[test]
    fn random_thresholds() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let n = rng.random_range(2..=16usize);
            let top = rng.random_range(0..n as i64);
            let rho: Vec<i64> = (0..n).map(|_| rng.random_range(0..=top)).collect();
            check(&ncc0(&rho), &rho);
            check(&ncc1(&rho), &rho);
        }
    }

    #[test]
    fn sigma_matrix_input() {
        let sigma = vec![vec![0, 2, 1], vec![2, 0, 0], vec![1, 0, 0]];
        assert_eq!(rho_from_sigma(&sigma).unwrap(), vec![2, 2, 1]);
        let skew = vec![vec![0, 2], vec![1, 0]];
        assert!(matches!(rho_from_sigma(&skew), Err(Error::Spec(_))));
        assert!(matches!(realize_conn_ncc1(ModelConfig::new(2, Model::Ncc1), &[2, 0]), Err(Error::Spec(_))));
    }

    #[test]
    fn ratio() {
        assert!((approximation_ratio(4, &[1; 5]) - 1.6).abs() < 1e-12);
        assert_eq!(approximation_ratio(6, &[3; 4]), 1.0);
        assert_eq!(approximation_ratio(0, &[0; 4]), 1.0);
    }
}
