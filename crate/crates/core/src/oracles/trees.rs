use super::Unrealizable;
use crate::graph::SimpleGraph;

/// Longest shortest path in a tree (two sweeps of BFS).
pub fn tree_diameter(g: &SimpleGraph) -> usize {
    if g.n() == 0 {
        return 0;
    }
    let far = |s: usize| {
        g.bfs(s)
            .iter()
            .enumerate()
            .filter_map(|(v, d)| d.map(|d| (d, v)))
            .max()
            .unwrap()
    };
    let (_, a) = far(0);
    far(a).0
}

/// Tree on `0..n` encoded by a Prüfer sequence of length `n - 2`.
pub fn prufer_decode(seq: &[usize], n: usize) -> SimpleGraph {
    assert!(n >= 2 && seq.len() == n - 2);
    let mut degree = vec![1usize; n];
    for &x in seq {
        degree[x] += 1;
    }
    let mut g = SimpleGraph::new(n);
    for &x in seq {
        let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
        g.add_edge(leaf, x);
        degree[leaf] -= 1;
        degree[x] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    g.add_edge(rest[0], rest[1]);
    g
}

/// Number of labeled trees in which vertex `i` has degree `d[i]`:
/// `(n-2)! / ∏ (d_i - 1)!`.
pub fn labeled_tree_count(d: &[usize]) -> u128 {
    let n = d.len();
    if n <= 2 {
        return 1;
    }
    let fact = |k: usize| (1..=k as u128).product::<u128>();
    d.iter().fold(fact(n - 2), |acc, &x| acc / fact(x - 1))
}

fn is_tree_sequence(d: &[usize]) -> bool {
    let n = d.len();
    match n {
        0 => false,
        1 => d[0] == 0,
        _ => d.iter().all(|&x| x >= 1) && d.iter().sum::<usize>() == 2 * (n - 1),
    }
}

/// Smallest diameter over all labeled trees with degree sequence `d`,
/// enumerating every Prüfer sequence with the matching symbol counts.
pub fn min_diameter_over_realizations(d: &[usize]) -> Result<usize, Unrealizable> {
    let n = d.len();
    assert!(n <= 10, "enumeration is limited to small trees");
    if !is_tree_sequence(d) {
        return Err(Unrealizable);
    }
    if n <= 2 {
        return Ok(n - 1);
    }
    let mut seq: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d[v] - 1)).collect();
    let mut best = usize::MAX;
    let mut count = 0u128;
    loop {
        let t = prufer_decode(&seq, n);
        debug_assert_eq!(t.degrees(), d);
        best = best.min(tree_diameter(&t));
        count += 1;
        if !next_permutation(&mut seq) {
            break;
        }
    }
    assert_eq!(count, labeled_tree_count(d), "Prüfer enumeration missed trees");
    Ok(best)
}

fn next_permutation(a: &mut [usize]) -> bool {
    let Some(i) = (1..a.len()).rev().find(|&i| a[i - 1] < a[i]) else {
        return false;
    };
    let j = (i..a.len()).rev().find(|&j| a[j] > a[i - 1]).unwrap();
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_diameter_examples() {
        assert_eq!(min_diameter_over_realizations(&[1, 1]), Ok(1));
        assert_eq!(min_diameter_over_realizations(&[3, 1, 1, 1]), Ok(2));
        assert_eq!(min_diameter_over_realizations(&[3, 2, 2, 1, 1, 1]), Ok(4));
        assert_eq!(min_diameter_over_realizations(&[0]), Ok(0));
        assert_eq!(min_diameter_over_realizations(&[2, 2, 1]), Err(Unrealizable));
    }

    /// Every tree with degrees (3,2,2,1,1,1) listed by hand has diameter 4.
    #[test]
    fn hand_listed_trees_agree() {
        let spider = SimpleGraph::from_edges(6, &[(0, 1), (0, 2), (0, 5), (1, 3), (2, 4)]);
        let broom = SimpleGraph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (0, 4), (0, 5)]);
        let long = SimpleGraph::from_edges(6, &[(0, 4), (0, 5), (0, 1), (1, 2), (2, 3)]);
        assert_eq!(tree_diameter(&spider), 4);
        assert_eq!(tree_diameter(&broom), 4);
        assert_eq!(tree_diameter(&long), 4);
        let lopsided = SimpleGraph::from_edges(6, &[(1, 2), (2, 0), (0, 3), (0, 4), (1, 5)]);
        assert_eq!(tree_diameter(&lopsided), 4);
    }

    #[test]
    fn tree_count_is_multinomial() {
        assert_eq!(labeled_tree_count(&[1, 1, 1, 1, 4]), 1);
        assert_eq!(labeled_tree_count(&[2, 2, 1, 1]), 2);
        assert_eq!(labeled_tree_count(&[2; 5].iter().copied().chain([1, 1]).collect::<Vec<_>>()), 120);
    }

    #[test]
    fn prufer_decode_builds_trees() {
        let t = prufer_decode(&[3, 3, 3], 5);
        assert!(t.is_tree());
        assert_eq!(t.degree(3), 4);
    }
}
