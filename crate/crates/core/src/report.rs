//! Instance and result files, and the oracle checks shared by running a
//! protocol and re-verifying a stored result.

use crate::connectivity::{realize_conn_ncc0, realize_conn_ncc1, rho_from_sigma};
use crate::degree::{realize_envelope, realize_explicit, realize_implicit};
use crate::nonpreassigned::realize_non_preassigned;
use crate::oracles::{all_pairs_connectivity, is_graphic, min_diameter_over_realizations, tree_diameter};
use crate::tree::{realize_tree, realize_tree_min_diameter};
use crate::{Error, Model, ModelConfig, Realization, SimpleGraph, Verdict};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceKind {
    Degrees,
    Tree,
    Connectivity,
    Sigma,
    Nonpreassigned,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Values {
    Vector(Vec<i64>),
    Matrix(Vec<Vec<i64>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub kind: InstanceKind,
    pub n: usize,
    pub values: Values,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl InstanceFile {
    pub fn vector(kind: InstanceKind, values: Vec<i64>) -> Self {
        InstanceFile {
            kind,
            n: values.len(),
            values: Values::Vector(values),
            epsilon: None,
        }
    }

    /// The per-node input: degrees, or ρ (derived from σ for matrix input).
    pub fn per_node(&self) -> Result<Vec<i64>, Error> {
        let v = match (&self.kind, &self.values) {
            (InstanceKind::Sigma, Values::Matrix(m)) => rho_from_sigma(m)?,
            (InstanceKind::Sigma, Values::Vector(_)) => {
                return Err(Error::Spec("a sigma instance needs a matrix of values".into()))
            }
            (_, Values::Vector(v)) => v.clone(),
            (_, Values::Matrix(_)) => return Err(Error::Spec("only sigma instances take a matrix".into())),
        };
        if v.len() != self.n {
            return Err(Error::Spec(format!("{} values for n = {}", v.len(), self.n)));
        }
        Ok(v)
    }
}

/// The realization protocols reachable from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Protocol {
    Degrees,
    DegreesExplicit,
    Envelope,
    Tree,
    TreeMinDiameter,
    Connectivity,
    NonPreassigned,
}

impl Protocol {
    pub const ALL: [Protocol; 7] = [
        Protocol::Degrees,
        Protocol::DegreesExplicit,
        Protocol::Envelope,
        Protocol::Tree,
        Protocol::TreeMinDiameter,
        Protocol::Connectivity,
        Protocol::NonPreassigned,
    ];

    /// Subcommand name.
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Degrees => "realize-degrees",
            Protocol::DegreesExplicit => "realize-degrees-explicit",
            Protocol::Envelope => "realize-envelope",
            Protocol::Tree => "realize-tree",
            Protocol::TreeMinDiameter => "realize-tree-mindiam",
            Protocol::Connectivity => "realize-conn",
            Protocol::NonPreassigned => "realize-nonpreassigned",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Protocol::ALL.into_iter().find(|p| p.name() == s)
    }

    /// The model used when none is requested.
    pub fn default_model(self) -> Model {
        match self {
            Protocol::NonPreassigned => Model::Ncc1,
            _ => Model::Ncc0,
        }
    }

    fn accepts(self, kind: InstanceKind) -> bool {
        use InstanceKind as K;
        match self {
            Protocol::Degrees | Protocol::DegreesExplicit | Protocol::Envelope => kind == K::Degrees,
            Protocol::Tree | Protocol::TreeMinDiameter => matches!(kind, K::Tree | K::Degrees),
            Protocol::Connectivity => matches!(kind, K::Connectivity | K::Sigma),
            Protocol::NonPreassigned => matches!(kind, K::Nonpreassigned | K::Degrees),
        }
    }

    /// The protocol that matches an instance kind when none is named.
    pub fn for_kind(kind: InstanceKind) -> Self {
        match kind {
            InstanceKind::Degrees => Protocol::Degrees,
            InstanceKind::Tree => Protocol::Tree,
            InstanceKind::Connectivity | InstanceKind::Sigma => Protocol::Connectivity,
            InstanceKind::Nonpreassigned => Protocol::NonPreassigned,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Pass,
    Fail,
}

impl From<bool> for Check {
    fn from(ok: bool) -> Self {
        if ok {
            Check::Pass
        } else {
            Check::Fail
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsOut {
    pub rounds: u64,
    pub total_messages: u64,
    /// Largest number of messages any node sent in one round.
    pub per_round_max_send: u32,
    /// Largest number of messages any node received in one round.
    pub per_round_max_recv: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultFile {
    pub verdict: Verdict,
    /// Node-index pairs `[u, v]` with `u < v`, sorted.
    pub edges: Vec<[usize; 2]>,
    pub stats: StatsOut,
    pub checks: BTreeMap<String, Check>,
}

impl ResultFile {
    pub fn all_pass(&self) -> bool {
        self.checks.values().all(|&c| c == Check::Pass)
    }

    /// 0 for a checked `Ok`, 2 for a checked `Unrealizable`, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            _ if !self.all_pass() => 1,
            Verdict::Ok => 0,
            Verdict::Unrealizable => 2,
            Verdict::CapViolation | Verdict::NoProgress => 1,
        }
    }

    /// Single-line JSON with a trailing newline; stable for identical results.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("result serializes") + "\n"
    }
}

/// Runs `protocol` on `instance`. Checks are filled in when `verify` is set.
pub fn execute(protocol: Protocol, instance: &InstanceFile, config: ModelConfig, verify: bool) -> Result<ResultFile, Error> {
    if !protocol.accepts(instance.kind) {
        return Err(Error::Spec(format!("{} does not take {:?} instances", protocol.name(), instance.kind)));
    }
    if config.n != instance.n {
        return Err(Error::Spec("configuration size differs from the instance".into()));
    }
    let values = instance.per_node()?;
    let r: Realization = match protocol {
        Protocol::Degrees => realize_implicit(config, &values)?,
        Protocol::DegreesExplicit => realize_explicit(config, &values)?,
        Protocol::Envelope => realize_envelope(config, &values)?,
        Protocol::Tree => realize_tree(config, &values)?,
        Protocol::TreeMinDiameter => realize_tree_min_diameter(config, &values)?,
        Protocol::Connectivity => match config.model {
            Model::Ncc0 => realize_conn_ncc0(config, &values)?,
            Model::Ncc1 => realize_conn_ncc1(config, &values)?,
        },
        Protocol::NonPreassigned => {
            let eps = instance
                .epsilon
                .ok_or_else(|| Error::Spec("a non-preassigned instance needs epsilon".into()))?;
            realize_non_preassigned(config, &values, eps)?
        }
    };
    let edges = match &r.overlay {
        Some(o) => {
            let g = o.to_simple().map_err(|e| Error::Spec(format!("overlay is not a simple graph: {e}")))?;
            sorted_edges(&g)
        }
        None => Vec::new(),
    };
    let mut result = ResultFile {
        verdict: r.verdict,
        edges,
        stats: StatsOut {
            rounds: r.stats.rounds,
            total_messages: r.stats.total_messages,
            per_round_max_send: r.stats.max_send(),
            per_round_max_recv: r.stats.max_recv(),
            phases: r.phases,
        },
        checks: BTreeMap::new(),
    };
    if verify {
        result.checks = checks(protocol, instance, &result)?;
        if !r.stats.violations.is_empty() {
            result.checks.insert("no_cap_violations".into(), Check::Fail);
        }
    }
    Ok(result)
}

fn sorted_edges(g: &SimpleGraph) -> Vec<[usize; 2]> {
    let mut e: Vec<[usize; 2]> = g.edges().into_iter().map(|(a, b)| [a.min(b), a.max(b)]).collect();
    e.sort_unstable();
    e
}

/// Largest `n` for which the tree diameter is compared with exhaustive enumeration.
pub const DIAMETER_ORACLE_MAX_N: usize = 8;

/// Oracle checks of a result against its instance, using nothing from the run
/// except the verdict and the edge list.
pub fn checks(protocol: Protocol, instance: &InstanceFile, result: &ResultFile) -> Result<BTreeMap<String, Check>, Error> {
    let values = instance.per_node()?;
    let n = instance.n;
    let mut out = BTreeMap::new();
    let mut put = |name: &str, ok: bool| {
        out.insert(name.to_string(), Check::from(ok));
    };
    let in_range = values.iter().all(|&x| x >= 0 && (x as usize) < n.max(1));
    let as_usize: Vec<usize> = values.iter().map(|&x| x.max(0) as usize).collect();
    let tree_sequence = if n == 1 {
        values == [0]
    } else {
        values.iter().all(|&x| x >= 1 && (x as usize) < n) && values.iter().sum::<i64>() == 2 * (n as i64 - 1)
    };
    let expected = match protocol {
        Protocol::Degrees | Protocol::DegreesExplicit => in_range && is_graphic(&as_usize),
        Protocol::Envelope | Protocol::Connectivity => in_range,
        Protocol::Tree | Protocol::TreeMinDiameter => tree_sequence,
        // Any graphic input makes the class intervals realizable; others may
        // still be, so only `Ok` on graphic input is required.
        Protocol::NonPreassigned => true,
    };
    match result.verdict {
        Verdict::Ok => put("verdict", true),
        Verdict::Unrealizable => {
            let graphic_input = in_range && is_graphic(&as_usize);
            put("verdict", !expected || (protocol == Protocol::NonPreassigned && !graphic_input));
            return Ok(out);
        }
        Verdict::CapViolation | Verdict::NoProgress => {
            put("verdict", false);
            return Ok(out);
        }
    }

    let simple = result.edges.iter().all(|&[a, b]| a < b && b < n) && result.edges.windows(2).all(|w| w[0] < w[1]);
    put("simple", simple);
    if !simple {
        return Ok(out);
    }
    let pairs: Vec<(usize, usize)> = result.edges.iter().map(|&[a, b]| (a, b)).collect();
    let g = SimpleGraph::from_edges(n, &pairs);
    let deg = g.degrees();
    match protocol {
        Protocol::Degrees | Protocol::DegreesExplicit | Protocol::Tree | Protocol::TreeMinDiameter => {
            put("degree_exact", deg == as_usize);
        }
        _ => {}
    }
    match protocol {
        Protocol::Envelope => {
            put("dominates_input", deg.iter().zip(&as_usize).all(|(&a, &b)| a >= b));
            put("discrepancy_bound", deg.iter().sum::<usize>() <= 2 * as_usize.iter().sum::<usize>());
        }
        Protocol::Tree | Protocol::TreeMinDiameter => {
            put("is_tree", g.is_tree());
            if protocol == Protocol::TreeMinDiameter && n <= DIAMETER_ORACLE_MAX_N && g.is_tree() {
                let best = min_diameter_over_realizations(&as_usize).map_err(|e| Error::Spec(e.to_string()))?;
                put("min_diameter", tree_diameter(&g) == best);
            }
        }
        Protocol::Connectivity => {
            let conn = all_pairs_connectivity(&g);
            let met = (0..n).all(|u| (u + 1..n).all(|v| conn[u][v] as i64 >= values[u].min(values[v])));
            put("thresholds_met", met);
            put("edge_budget", g.m() as i64 <= values.iter().sum::<i64>());
        }
        Protocol::NonPreassigned => {
            let eps = instance.epsilon.unwrap_or(0.0);
            let mut want = as_usize.clone();
            let mut got = deg.clone();
            want.sort_unstable_by(|a, b| b.cmp(a));
            got.sort_unstable_by(|a, b| b.cmp(a));
            let close = want
                .iter()
                .zip(&got)
                .all(|(&d, &x)| x as f64 <= (1.0 + eps) * d as f64 && d as f64 <= (1.0 + eps) * x as f64);
            put("approximation", close);
        }
        Protocol::Degrees | Protocol::DegreesExplicit => {}
    }
    Ok(out)
}
