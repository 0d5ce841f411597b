use crate::graph::SimpleGraph;
use std::collections::VecDeque;

/// Unit-capacity residual network of an undirected graph. Arc `2e` and
/// `2e + 1` are the two orientations of edge `e` and each other's reverse.
struct Residual {
    head: Vec<usize>,
    flow: Vec<i32>,
    out: Vec<Vec<usize>>,
}

impl Residual {
    fn new(g: &SimpleGraph) -> Self {
        let mut out = vec![Vec::new(); g.n()];
        let mut head = Vec::with_capacity(2 * g.m());
        for (a, b) in g.edges() {
            out[a].push(head.len());
            head.push(b);
            out[b].push(head.len());
            head.push(a);
        }
        let flow = vec![0; head.len()];
        Residual { head, flow, out }
    }

    fn residual(&self, arc: usize) -> i32 {
        1 - self.flow[arc]
    }

    /// Max flow from `s` to `t`; afterwards `reachable` marks the source side of a min cut.
    fn max_flow(&mut self, s: usize, t: usize, reachable: &mut Vec<bool>) -> usize {
        self.flow.iter_mut().for_each(|f| *f = 0);
        let n = self.out.len();
        let mut value = 0;
        let mut via = vec![usize::MAX; n];
        loop {
            reachable.clear();
            reachable.resize(n, false);
            reachable[s] = true;
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                if u == t {
                    break;
                }
                for &arc in &self.out[u] {
                    let v = self.head[arc];
                    if !reachable[v] && self.residual(arc) > 0 {
                        reachable[v] = true;
                        via[v] = arc;
                        q.push_back(v);
                    }
                }
            }
            if !reachable[t] {
                return value;
            }
            let mut v = t;
            while v != s {
                let arc = via[v];
                self.flow[arc] += 1;
                self.flow[arc ^ 1] -= 1;
                v = self.head[arc ^ 1];
            }
            value += 1;
        }
    }
}

/// Maximum number of pairwise edge-disjoint `u`–`v` paths.
pub fn edge_connectivity(g: &SimpleGraph, u: usize, v: usize) -> usize {
    assert_ne!(u, v);
    let mut r = Residual::new(g);
    r.max_flow(u, v, &mut Vec::new())
}

/// Pairwise edge connectivity of every vertex pair, from the `n - 1` max-flow
/// computations of Gusfield's equivalent flow tree.
pub fn all_pairs_connectivity(g: &SimpleGraph) -> Vec<Vec<usize>> {
    let n = g.n();
    let mut parent = vec![0usize; n];
    let mut weight = vec![0usize; n];
    let mut r = Residual::new(g);
    let mut side = Vec::new();
    for s in 1..n {
        let t = parent[s];
        weight[s] = r.max_flow(s, t, &mut side);
        for i in s + 1..n {
            if side[i] && parent[i] == t {
                parent[i] = s;
            }
        }
    }
    let mut tree = vec![Vec::new(); n];
    for s in 1..n {
        tree[s].push((parent[s], weight[s]));
        tree[parent[s]].push((s, weight[s]));
    }
    let mut conn = vec![vec![usize::MAX; n]; n];
    for src in 0..n {
        let row = &mut conn[src];
        let mut stack = vec![(src, usize::MAX)];
        let mut seen = vec![false; n];
        seen[src] = true;
        while let Some((u, bottleneck)) = stack.pop() {
            row[u] = bottleneck;
            for &(v, w) in &tree[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push((v, bottleneck.min(w)));
                }
            }
        }
        row[src] = 0;
    }
    conn
}

/// Minimum number of edges crossing any vertex partition separating `u` from `v`.
pub fn brute_force_min_cut(g: &SimpleGraph, u: usize, v: usize) -> usize {
    let n = g.n();
    assert!(n <= 20 && u != v);
    let edges = g.edges();
    let mut best = usize::MAX;
    for mask in 0u32..1 << n {
        if mask >> u & 1 == 1 && mask >> v & 1 == 0 {
            let cut = edges
                .iter()
                .filter(|&&(a, b)| (mask >> a & 1) != (mask >> b & 1))
                .count();
            best = best.min(cut);
        }
    }
    best
}
