//! (1+ε)-approximate degree realization when degrees may be permuted.
//!
//! Nodes only learn how many degrees fall in each class of a geometric
//! partition of `[0, n-1]`. From those counts every node builds the same
//! interval sequence, solves it locally for a graphic sequence `D'`, maps
//! `D'` onto identifiers (largest identifier gets the largest degree) and
//! runs Havel–Hakimi to read off its own neighbours. Needs complete
//! knowledge of identifiers.

use crate::oracles::{erdos_gallai, sequential_havel_hakimi, Interval, Unrealizable};
use crate::primitives::bst::initial_trees;
use crate::primitives::global::{allreduce, collect, spread, Agg};
use crate::primitives::routing::{local_aggregate, GroupError};
use crate::sim::{Model, NodeId, Word};
use crate::{drive, Error, Finished, ModelConfig, Overlay, OverlayMode, Realization};
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rustc_hash::FxHashMap;

/// The degree classes for `n` nodes: `[0,0]`, `[1,1]`, then the integer
/// parts of `((1+ε)^i, (1+ε)^{i+1}]` capped at `n-1`, empty ones dropped.
/// Slots are in increasing degree order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classes {
    pub intervals: Vec<Interval>,
}

impl Classes {
    pub fn new(n: usize, epsilon: f64) -> Result<Self, Error> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::Spec(format!("epsilon {epsilon} is outside (0, 1]")));
        }
        let top = n.saturating_sub(1);
        let mut intervals: Vec<Interval> = (0..=top.min(1)).map(|d| Interval { lo: d, hi: d }).collect();
        if n == 0 {
            intervals.clear();
        }
        let (p, q) = exact_ratio(epsilon);
        if &p * BigUint::from(top) < q {
            // Every class is narrower than one, so each holds at most one integer.
            intervals.extend((2..=top).map(|d| Interval { lo: d, hi: d }));
            return Ok(Classes { intervals });
        }
        let base = &p + &q;
        let mut num = BigUint::one();
        let mut den = BigUint::one();
        let mut floor = 1usize;
        loop {
            let lo = floor + 1;
            if lo > top {
                break;
            }
            num *= &base;
            den *= &q;
            let next = (&num / &den).to_usize().unwrap_or(usize::MAX);
            let hi = next.min(top);
            if lo <= hi {
                intervals.push(Interval { lo, hi });
            }
            floor = next;
        }
        Ok(Classes { intervals })
    }

    /// Slot of degree `d`, or `None` outside `[0, n-1]`.
    pub fn slot(&self, d: i64) -> Option<usize> {
        let d = usize::try_from(d).ok()?;
        let s = self.intervals.partition_point(|c| c.hi < d);
        (s < self.intervals.len() && self.intervals[s].lo <= d).then_some(s)
    }

    /// One interval per node, non-increasing, from per-slot counts.
    pub fn sequence(&self, counts: &[usize]) -> Vec<Interval> {
        let mut s = Vec::with_capacity(counts.iter().sum());
        for (slot, &c) in counts.iter().enumerate().rev() {
            s.extend(std::iter::repeat_n(self.intervals[slot], c));
        }
        s
    }
}

/// `ε = p / q` exactly (every finite double is a dyadic rational).
fn exact_ratio(epsilon: f64) -> (BigUint, BigUint) {
    let bits = epsilon.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mut m, mut e) = if raw_exp == 0 { (frac, -1074) } else { (frac | 1 << 52, raw_exp - 1075) };
    while m % 2 == 0 && e < 0 {
        m /= 2;
        e += 1;
    }
    (BigUint::from(m) << e.max(0) as usize, BigUint::one() << (-e).max(0) as usize)
}

/// Finds degrees `d'_i ∈ [lo_i, hi_i]` forming a graphic sequence. Starts
/// from the upper ends and, while the sequence is not graphic, lowers the
/// largest entry that is still above its lower end (earliest index on ties).
/// Deterministic; the result is aligned with `s`.
pub fn realize_interval_sequence(s: &[Interval]) -> Result<Vec<usize>, Unrealizable> {
    let n = s.len();
    if s.iter().any(|c| c.lo > c.hi || c.lo >= n) {
        return Err(Unrealizable);
    }
    let mut d: Vec<usize> = s.iter().map(|c| c.hi.min(n - 1)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    loop {
        order.sort_by(|&a, &b| d[b].cmp(&d[a]).then(a.cmp(&b)));
        let sorted: Vec<usize> = order.iter().map(|&i| d[i]).collect();
        if erdos_gallai(&sorted) {
            return Ok(d);
        }
        match order.iter().find(|&&i| d[i] > s[i].lo) {
            Some(&i) => d[i] -= 1,
            None => return Err(Unrealizable),
        }
    }
}

/// The neighbours of `me` in the Havel–Hakimi realization of `d_prime`
/// (non-increasing) where the `j`-th largest identifier gets `d_prime[j]`.
pub fn derive_local_adjacency(d_prime: &[usize], ids: &[NodeId], me: NodeId) -> Result<Vec<NodeId>, Unrealizable> {
    let (by_rank, g) = mapped_realization(d_prime, ids)?;
    let v = by_rank.iter().position(|&x| x == me).expect("identifier is one of the nodes");
    let mut out: Vec<NodeId> = g.neighbors(v).iter().map(|&u| by_rank[u]).collect();
    out.sort_unstable();
    Ok(out)
}

fn mapped_realization(d_prime: &[usize], ids: &[NodeId]) -> Result<(Vec<NodeId>, crate::SimpleGraph), Unrealizable> {
    let mut by_rank = ids.to_vec();
    by_rank.sort_unstable_by(|a, b| b.cmp(a));
    let d: Vec<i64> = d_prime.iter().map(|&x| x as i64).collect();
    Ok((by_rank, sequential_havel_hakimi(&d)?))
}

/// Explicit realization of some sequence `D'` whose sorted entries are
/// within a factor `1+ε` of the sorted input. Unrealizable when no graphic
/// sequence fits the class intervals.
pub fn realize_non_preassigned(config: ModelConfig, degrees: &[i64], epsilon: f64) -> Result<Realization, Error> {
    if config.model != Model::Ncc1 {
        return Err(Error::Spec("non-preassigned realization needs the NCC1 model".into()));
    }
    assert_eq!(degrees.len(), config.n);
    let classes = Classes::new(config.n, epsilon)?;
    let run = drive(config, |net| {
        let n = net.n();
        let t = initial_trees(net)?;
        let bad: Vec<i64> = degrees.iter().map(|&d| classes.slot(d).is_none() as i64).collect();
        if allreduce(net, &t, &bad, Agg::Or)?[0] != 0 {
            return Ok(Finished::unrealizable());
        }

        // Counts meet at the node in position `slot`, then go to the head
        // and back down to everyone.
        let c = classes.intervals.len();
        let mut dests = Vec::with_capacity(c);
        for &u in &t.members {
            let p = t.info[u].position;
            if p < c {
                dests.push((u, p as u64 + 1));
            }
        }
        let members: Vec<(usize, u64, i64)> =
            (0..n).map(|u| (u, classes.slot(degrees[u]).unwrap() as u64 + 1, 1)).collect();
        let counts = local_aggregate(net, &t, &members, &dests, Agg::Sum).map_err(|e| match e {
            GroupError::Sim(e) => e,
            GroupError::SharedDestination(_) => unreachable!("one class per root"),
        })?;
        let tokens: Vec<Vec<Word>> = counts
            .iter()
            .map(|got| got.iter().map(|&(g, x)| Word::Val((g as i64 - 1) * (n as i64 + 1) + x)).collect())
            .collect();
        let at_head = collect(net, &t, &tokens)?;
        let heard = spread(net, &t, &at_head)?;

        // Local work. Every node holds the same counts, so the solve and the
        // realization are computed once per distinct count vector.
        let mut memo: FxHashMap<Vec<usize>, Option<(Vec<NodeId>, crate::SimpleGraph)>> = FxHashMap::default();
        let mut known = vec![Vec::new(); n];
        for u in 0..n {
            let mut hist = vec![0usize; c];
            for w in &heard[u] {
                let x = w.val() as usize;
                hist[x / (n + 1)] = x % (n + 1);
            }
            let entry = memo.entry(hist).or_insert_with_key(|hist| {
                let s = classes.sequence(hist);
                let d = realize_interval_sequence(&s).ok()?;
                let mut sorted = d.clone();
                sorted.sort_unstable_by(|a, b| b.cmp(a));
                debug_assert!(sorted.iter().zip(&s).all(|(&x, c)| c.lo <= x && x <= c.hi));
                mapped_realization(&sorted, net.ids()).ok()
            });
            let Some((by_rank, g)) = entry else {
                return Ok(Finished::unrealizable());
            };
            let v = by_rank.iter().position(|&x| x == net.id(u)).unwrap();
            known[u] = g.neighbors(v).iter().map(|&w| by_rank[w]).collect();
            known[u].sort_unstable();
        }
        debug_assert_eq!(memo.len(), 1, "all nodes hold the same counts");
        Ok(Finished::ok(Overlay {
            mode: OverlayMode::Explicit,
            ids: net.ids().to_vec(),
            known,
        }))
    });
    Ok(run?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{enumerate_box, is_graphic};
    use crate::Verdict;
    use rand::{Rng, SeedableRng};

    fn sorted_desc(mut v: Vec<usize>) -> Vec<usize> {
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    }

    fn run(d: &[i64], eps: f64) -> Realization {
        let cfg = ModelConfig::new(d.len(), Model::Ncc1).with_seed(d.len() as u64 + 3);
        realize_non_preassigned(cfg, d, eps).unwrap()
    }

    fn within(d: &[i64], got: &[usize], eps: f64) -> bool {
        let d = sorted_desc(d.iter().map(|&x| x as usize).collect());
        let got = sorted_desc(got.to_vec());
        d.iter().zip(&got).all(|(&a, &b)| b as f64 <= (1.0 + eps) * a as f64 && a as f64 <= (1.0 + eps) * b as f64)
    }

    #[test]
    fn class_boundaries() {
        let c = Classes::new(20, 1.0).unwrap();
        let spans: Vec<(usize, usize)> = c.intervals.iter().map(|i| (i.lo, i.hi)).collect();
        // (1,2], (2,4], (4,8], (8,16], (16,32] capped at 19.
        assert_eq!(spans, [(0, 0), (1, 1), (2, 2), (3, 4), (5, 8), (9, 16), (17, 19)]);
        assert_eq!(c.slot(4), Some(3));
        assert_eq!(c.slot(5), Some(4));
        assert_eq!(c.slot(20), None);
        assert_eq!(c.slot(-1), None);
        let c = Classes::new(9, 0.5).unwrap();
        let spans: Vec<(usize, usize)> = c.intervals.iter().map(|i| (i.lo, i.hi)).collect();
        // 1.5, 2.25, 3.375, 5.06, 7.59, 11.4
        assert_eq!(spans, [(0, 0), (1, 1), (2, 2), (3, 3), (4, 5), (6, 7), (8, 8)]);
        let tiny = Classes::new(6, 0.01).unwrap();
        assert!(tiny.intervals.iter().all(|i| i.lo == i.hi));
        assert_eq!(tiny.intervals.len(), 6);
        assert!(Classes::new(5, 0.0).is_err());
        assert!(Classes::new(5, 1.5).is_err());
    }

    #[test]
    fn classes_cover_the_degree_range_once() {
        for n in 1..60 {
            for eps in [0.01, 0.1, 0.25, 0.3, 0.5, 0.75, 1.0] {
                let c = Classes::new(n, eps).unwrap();
                assert!(c.intervals.len() <= n);
                let covered: Vec<usize> = c.intervals.iter().flat_map(|i| i.lo..=i.hi).collect();
                assert_eq!(covered, (0..n).collect::<Vec<_>>());
                for i in &c.intervals {
                    assert!(i.hi as f64 <= (1.0 + eps) * i.lo as f64 + 1e-9);
                }
            }
        }
    }

    #[test]
    fn interval_solver_examples() {
        let k = |v: usize| Interval { lo: v, hi: v };
        assert_eq!(realize_interval_sequence(&[k(2), k(2), k(2)]), Ok(vec![2, 2, 2]));
        assert_eq!(realize_interval_sequence(&[k(1), k(1), k(1)]), Err(Unrealizable));
        assert_eq!(realize_interval_sequence(&[]), Ok(vec![]));
    }

    #[test]
    fn interval_solver_matches_box_enumeration() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20_000 {
            let n = rng.random_range(1..=7usize);
            let s: Vec<Interval> = (0..n)
                .map(|_| {
                    let a = rng.random_range(0..n);
                    let b = rng.random_range(0..n);
                    Interval { lo: a.min(b), hi: a.max(b) }
                })
                .collect();
            let got = realize_interval_sequence(&s);
            assert_eq!(got.is_ok(), enumerate_box(&s).is_ok(), "{s:?}");
            if let Ok(d) = got {
                assert!(is_graphic(&d));
                assert!(d.iter().zip(&s).all(|(&x, c)| c.lo <= x && x <= c.hi));
            }
        }
    }

    #[test]
    fn interval_solver_agrees_on_every_small_box() {
        for n in 1..=5usize {
            let spans: Vec<Interval> =
                (0..n).flat_map(|lo| (lo..n).map(move |hi| Interval { lo, hi })).collect();
            let total = spans.len().pow(n as u32);
            for code in 0..total {
                let mut c = code;
                let s: Vec<Interval> = (0..n)
                    .map(|_| {
                        let i = spans[c % spans.len()];
                        c /= spans.len();
                        i
                    })
                    .collect();
                assert_eq!(realize_interval_sequence(&s).is_ok(), enumerate_box(&s).is_ok(), "{s:?}");
            }
        }
    }

    #[test]
    fn adjacency_examples() {
        let ids: Vec<NodeId> = (1..=2).map(NodeId).collect();
        assert_eq!(derive_local_adjacency(&[1, 1], &ids, NodeId(1)), Ok(vec![NodeId(2)]));
        let ids: Vec<NodeId> = [5, 9, 2].map(NodeId).to_vec();
        for &me in &ids {
            let others: Vec<NodeId> = ids.iter().copied().filter(|&x| x != me).collect();
            let mut others = others;
            others.sort_unstable();
            assert_eq!(derive_local_adjacency(&[2, 2, 2], &ids, me), Ok(others));
        }
        let ids: Vec<NodeId> = (1..=5).map(NodeId).collect();
        let d = [3, 2, 2, 2, 1];
        let mut degree = FxHashMap::default();
        for &me in &ids {
            let nb = derive_local_adjacency(&d, &ids, me).unwrap();
            degree.insert(me, nb.len());
            for x in nb {
                assert!(derive_local_adjacency(&d, &ids, x).unwrap().contains(&me));
            }
        }
        // Largest identifier gets the largest degree.
        assert_eq!(degree[&NodeId(5)], 3);
        assert_eq!(degree[&NodeId(1)], 1);
    }

    #[test]
    fn examples() {
        let r = run(&[2, 2, 2, 2], 0.5);
        assert_eq!(r.verdict, Verdict::Ok);
        assert_eq!(r.overlay.unwrap().to_simple().unwrap().degrees(), vec![2, 2, 2, 2]);

        let d = [3, 1, 2, 3, 2, 1];
        let r = run(&d, 0.5);
        assert_eq!(r.verdict, Verdict::Ok);
        let got = r.overlay.unwrap().to_simple().unwrap().degrees();
        assert!(within(&d, &got, 0.5), "{got:?}");

        let r = run(&[0, 0, 0], 1.0);
        assert_eq!(r.overlay.unwrap().to_simple().unwrap().m(), 0);

        assert_eq!(run(&[1, 1, 1], 0.25).verdict, Verdict::Unrealizable);
        assert_eq!(run(&[1, 5, 1], 0.25).verdict, Verdict::Unrealizable);
        let cfg = ModelConfig::new(3, Model::Ncc0);
        assert!(realize_non_preassigned(cfg, &[1, 1, 0], 0.5).is_err());
    }

    #[test]
    fn random_graphic_inputs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for trial in 0..60 {
            let n = rng.random_range(2..=40usize);
            let p = rng.random_range(0.05..0.9);
            let mut deg = vec![0i64; n];
            for a in 0..n {
                for b in a + 1..n {
                    if rng.random_bool(p) {
                        deg[a] += 1;
                        deg[b] += 1;
                    }
                }
            }
            let eps = [0.25, 0.5, 1.0][trial % 3];
            let r = run(&deg, eps);
            assert_eq!(r.verdict, Verdict::Ok, "{deg:?}");
            assert!(r.stats.violations.is_empty());
            let got = r.overlay.unwrap().to_simple().unwrap().degrees();
            assert!(within(&deg, &got, eps), "{deg:?} -> {got:?}");
        }
    }
}
