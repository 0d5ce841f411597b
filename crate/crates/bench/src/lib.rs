//! Fixed, seeded inputs for the criterion benches.

use ncc_core::workloads;

/// One benchmark input: a label and one value per node.
#[derive(Clone, Debug)]
pub struct Case {
    pub label: String,
    pub values: Vec<i64>,
}

impl Case {
    pub fn n(&self) -> usize {
        self.values.len()
    }
}

pub const SEED: u64 = 42;

pub fn regular_degrees(sizes: &[usize], d: usize) -> Vec<Case> {
    sizes
        .iter()
        .map(|&n| Case {
            label: format!("regular{d}/{n}"),
            values: workloads::regular(n, d),
        })
        .collect()
}

pub fn star_degrees(sizes: &[usize]) -> Vec<Case> {
    sizes
        .iter()
        .map(|&n| Case {
            label: format!("star/{n}"),
            values: workloads::star_heavy(n),
        })
        .collect()
}

pub fn tree_degrees(sizes: &[usize]) -> Vec<Case> {
    sizes
        .iter()
        .map(|&n| Case {
            label: format!("tree/{n}"),
            values: workloads::random_tree_sequence(n, &mut workloads::rng(SEED + n as u64)),
        })
        .collect()
}

pub fn thresholds(sizes: &[usize]) -> Vec<Case> {
    sizes
        .iter()
        .map(|&n| Case {
            label: format!("rho/{n}"),
            values: workloads::random_rho(n, &mut workloads::rng(SEED + n as u64)),
        })
        .collect()
}

pub fn graphic_degrees(sizes: &[usize]) -> Vec<Case> {
    sizes
        .iter()
        .map(|&n| Case {
            label: format!("gnp/{n}"),
            values: workloads::random_graphic(n, &mut workloads::rng(SEED + n as u64)),
        })
        .collect()
}
