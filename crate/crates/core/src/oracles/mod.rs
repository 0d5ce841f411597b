//! Centralized reference implementations used to check protocol outputs.
//!
//! Nothing here runs inside the simulator. These are plain sequential
//! algorithms and brute-force enumerations, kept deliberately simple.

mod flow;
mod graphic;
mod trees;

pub use flow::{all_pairs_connectivity, brute_force_min_cut, edge_connectivity};
pub use graphic::{
    enumerate_box, erdos_gallai, is_graphic, sequential_havel_hakimi, Interval, Unrealizable,
};
pub use trees::{
    labeled_tree_count, min_diameter_over_realizations, prufer_decode, tree_diameter,
};

/// Calls `f` on every non-increasing sequence of length `n` with entries in `0..=max`.
pub fn for_each_multiset(n: usize, max: usize, mut f: impl FnMut(&[usize])) {
    fn rec(buf: &mut Vec<usize>, n: usize, hi: usize, f: &mut dyn FnMut(&[usize])) {
        if buf.len() == n {
            f(buf);
            return;
        }
        for v in (0..=hi).rev() {
            buf.push(v);
            rec(buf, n, v, f);
            buf.pop();
        }
    }
    rec(&mut Vec::with_capacity(n), n, max, &mut f);
}
