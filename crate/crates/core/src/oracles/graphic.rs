use crate::graph::SimpleGraph;
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("sequence is not graphic")]
pub struct Unrealizable;

/// Erdős–Gallai test on a non-increasing sequence.
pub fn erdos_gallai(d: &[usize]) -> bool {
    debug_assert!(d.windows(2).all(|w| w[0] >= w[1]), "input must be non-increasing");
    let n = d.len();
    if d.iter().sum::<usize>() % 2 == 1 || d.first().is_some_and(|&x| x >= n) {
        return false;
    }
    let mut suffix = vec![0usize; n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1] + d[i];
    }
    // p = number of entries that are >= k, shrinking as k grows.
    let mut p = n;
    let mut lhs = 0;
    for k in 1..=n {
        lhs += d[k - 1];
        while p > 0 && d[p - 1] < k {
            p -= 1;
        }
        let split = p.max(k);
        let rhs = k * (k - 1) + k * (split - k) + suffix[split];
        if lhs > rhs {
            return false;
        }
    }
    true
}

/// Erdős–Gallai on a sequence in any order.
pub fn is_graphic(d: &[usize]) -> bool {
    let mut s = d.to_vec();
    s.sort_unstable_by(|a, b| b.cmp(a));
    erdos_gallai(&s)
}

/// Havel–Hakimi on vertices `0..n`: repeatedly connect the vertex of
/// largest residual to the next largest ones (ties broken by lower index).
pub fn sequential_havel_hakimi(d: &[i64]) -> Result<SimpleGraph, Unrealizable> {
    let n = d.len();
    if d.iter().any(|&x| x < 0 || x as usize >= n) {
        return Err(Unrealizable);
    }
    let mut residual: Vec<usize> = d.iter().map(|&x| x as usize).collect();
    // Ordered by (residual desc, index asc).
    let mut queue: BTreeSet<(std::cmp::Reverse<usize>, usize)> =
        (0..n).map(|v| (std::cmp::Reverse(residual[v]), v)).collect();
    let mut g = SimpleGraph::new(n);
    while let Some(&(std::cmp::Reverse(k), v)) = queue.first() {
        if k == 0 {
            break;
        }
        queue.pop_first();
        residual[v] = 0;
        let targets: Vec<usize> = queue.iter().take(k).map(|&(_, u)| u).collect();
        if targets.len() < k || targets.iter().any(|&u| residual[u] == 0) {
            return Err(Unrealizable);
        }
        for u in targets {
            queue.remove(&(std::cmp::Reverse(residual[u]), u));
            residual[u] -= 1;
            queue.insert((std::cmp::Reverse(residual[u]), u));
            g.add_edge(v, u);
        }
    }
    Ok(g)
}

/// Closed integer interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: usize,
    pub hi: usize,
}

/// Lexicographically largest graphic vector in the box `∏ [lo_i, hi_i]`,
/// by exhaustive search. Limited to seven entries.
pub fn enumerate_box(s: &[Interval]) -> Result<Vec<usize>, Unrealizable> {
    assert!(s.len() <= 7, "box enumeration is limited to n <= 7");
    fn rec(s: &[Interval], buf: &mut Vec<usize>) -> bool {
        let i = buf.len();
        if i == s.len() {
            return is_graphic(buf);
        }
        if s[i].lo > s[i].hi {
            return false;
        }
        for v in (s[i].lo..=s[i].hi).rev() {
            buf.push(v);
            if rec(s, buf) {
                return true;
            }
            buf.pop();
        }
        false
    }
    let mut buf = Vec::with_capacity(s.len());
    if rec(s, &mut buf) {
        Ok(buf)
    } else {
        Err(Unrealizable)
    }
}
