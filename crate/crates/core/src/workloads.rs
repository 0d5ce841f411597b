//! Seeded instance generators for benches, sweeps and the acceptance suite.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Degrees of a `G(n, p)` sample, so always graphic.
pub fn gnp_degrees(n: usize, p: f64, rng: &mut impl Rng) -> Vec<i64> {
    let mut d = vec![0i64; n];
    if p <= 0.0 {
        return d;
    }
    // Geometric skipping keeps sparse samples at O(n + m) work.
    let log_q = (1.0 - p.min(1.0 - 1e-12)).ln();
    let total = n * n.saturating_sub(1) / 2;
    let next = |rng: &mut dyn rand::RngCore| -> usize {
        let r: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
        (r.ln() / log_q).floor() as usize
    };
    let mut idx = next(rng);
    let (mut a, mut row_start) = (0usize, 0usize);
    while idx < total {
        while idx >= row_start + (n - 1 - a) {
            row_start += n - 1 - a;
            a += 1;
        }
        let b = a + 1 + (idx - row_start);
        d[a] += 1;
        d[b] += 1;
        idx += 1 + next(rng);
    }
    d
}

/// A graphic sequence with a random density and shuffled node order.
pub fn random_graphic(n: usize, rng: &mut impl Rng) -> Vec<i64> {
    let p = match rng.random_range(0..3) {
        0 => rng.random_range(0.0..(4.0 / n.max(1) as f64).min(1.0)),
        1 => rng.random_range(0.0..0.2),
        _ => rng.random_range(0.0..1.0),
    };
    let mut d = gnp_degrees(n, p, rng);
    d.shuffle(rng);
    d
}

/// The `d`-regular sequence; graphic iff `d < n` and `n·d` is even.
pub fn regular(n: usize, d: usize) -> Vec<i64> {
    vec![d as i64; n]
}

/// One hub of degree `n/2`, its leaves, and isolated nodes.
pub fn star_heavy(n: usize) -> Vec<i64> {
    let hub = n / 2;
    let mut d = vec![0i64; n];
    d[0] = hub as i64;
    for x in d.iter_mut().skip(1).take(hub) {
        *x = 1;
    }
    d
}

/// Degrees of a uniformly random labelled tree (from a random Prüfer code).
pub fn random_tree_sequence(n: usize, rng: &mut impl Rng) -> Vec<i64> {
    if n <= 1 {
        return vec![0; n];
    }
    let mut d = vec![1i64; n];
    for _ in 0..n - 2 {
        d[rng.random_range(0..n)] += 1;
    }
    d
}

/// A symmetric threshold matrix with zero diagonal. Each pair is nonzero
/// with a random density, so some rows can be entirely zero.
pub fn random_sigma(n: usize, rng: &mut impl Rng) -> Vec<Vec<i64>> {
    let density = rng.random_range(0.05..0.8);
    let top = rng.random_range(1..n.max(2)) as i64;
    let mut s = vec![vec![0i64; n]; n];
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(density) {
                let x = rng.random_range(1..=top);
                s[a][b] = x;
                s[b][a] = x;
            }
        }
    }
    s
}

/// Per-node thresholds `ρ(v) = max_u σ(u, v)` of [`random_sigma`].
pub fn random_rho(n: usize, rng: &mut impl Rng) -> Vec<i64> {
    random_sigma(n, rng)
        .iter()
        .map(|row| row.iter().copied().max().unwrap_or(0))
        .collect()
}

/// A sequence in `[0, n-1]^n` that is not graphic.
pub fn random_non_graphic(n: usize, rng: &mut impl Rng) -> Vec<i64> {
    assert!(n >= 1);
    loop {
        let top = rng.random_range(0..n);
        let d: Vec<i64> = (0..n).map(|_| rng.random_range(0..=top) as i64).collect();
        let u: Vec<usize> = d.iter().map(|&x| x as usize).collect();
        if !crate::oracles::is_graphic(&u) {
            return d;
        }
    }
}

/// `lo, 2lo, 4lo, ..` up to `hi` inclusive.
pub fn geometric_grid(lo: usize, hi: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut n = lo.max(1);
    while n <= hi {
        out.push(n);
        n *= 2;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::is_graphic;

    fn graphic(d: &[i64]) -> bool {
        is_graphic(&d.iter().map(|&x| x as usize).collect::<Vec<_>>())
    }

    #[test]
    fn generators_respect_their_contracts() {
        let mut r = rng(1);
        for n in [1usize, 2, 5, 40, 300] {
            for _ in 0..20 {
                assert!(graphic(&random_graphic(n, &mut r)));
                let t = random_tree_sequence(n, &mut r);
                assert_eq!(t.iter().sum::<i64>(), 2 * (n as i64 - 1).max(0));
                let rho = random_rho(n, &mut r);
                assert!(rho.iter().all(|&x| x >= 0 && x < n.max(1) as i64));
                if n >= 2 {
                    assert!(!graphic(&random_non_graphic(n, &mut r)));
                }
            }
        }
        assert!(graphic(&star_heavy(64)));
        assert_eq!(*star_heavy(64).iter().max().unwrap(), 32);
        assert_eq!(geometric_grid(64, 4096), [64, 128, 256, 512, 1024, 2048, 4096]);
    }

    #[test]
    fn gnp_edge_count_is_plausible() {
        let mut r = rng(9);
        let d = gnp_degrees(2000, 0.01, &mut r);
        let m = d.iter().sum::<i64>() / 2;
        let mean = 0.01 * 2000.0 * 1999.0 / 2.0;
        assert!((m as f64 - mean).abs() < 5.0 * mean.sqrt(), "{m}");
        assert_eq!(gnp_degrees(30, 1.0, &mut r), vec![29; 30]);
    }

    #[test]
    fn seeds_reproduce() {
        assert_eq!(random_graphic(100, &mut rng(3)), random_graphic(100, &mut rng(3)));
    }
}
