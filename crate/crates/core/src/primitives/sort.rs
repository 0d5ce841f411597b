//! Sorting nodes into a path by key with bottom-up recursive merging.
//!
//! A tree `T` over the input path fixes the merge order: in stage `h`
//! every `T`-node of height `h` merges the sorted paths of its two subtrees
//! and itself. A merge splits both paths around a pivot key (first the
//! merging node's own key, then the median of the larger path), recurses
//! on the two halves, and splices the pivot between the results. Paths
//! with a single node are inserted by tree search instead.
//!
//! Sub-paths created by a split keep the level links of the path they came
//! from, so their search trees follow from positions alone. Between stages
//! the merged paths get fresh trees and positions from [`build_trees`].

use super::bst::{build_trees, shape_at, PathFamily, PathTrees};
use super::global::broadcast;
use crate::sim::{ceil_log2, Network, NodeId, Payload, SimError, Word};

const HEIGHT: u16 = 40;
const SEARCH: u16 = 41; // + side (0, 1) or 2 for insertion
const FOUND_POS: u16 = 44; // + side
const FOUND_IDS: u16 = 47; // + side
const CUT: u16 = 50;
const MEDIAN: u16 = 51; // + slot
const IAM: u16 = 53; // + slot
const PAIR_OWN: u16 = 55; // + own side
const PAIR_OTHER: u16 = 57;
const INSERT: u16 = 58; // + slot
const INSERTED: u16 = 60; // + slot
const RESULT: u16 = 62; // + slot
const LINK_PRED: u16 = 64;
const LINK_SUCC: u16 = 65;
const REPORT_ENDS: u16 = 66;
const REPORT_LEN: u16 = 67;
const DONE: u16 = 68;

const INSERT_SIDE: u16 = 2;

fn opt(w: Option<NodeId>) -> Word {
    w.map_or(Word::Val(-1), Word::Id)
}

fn unopt(w: Word) -> Option<NodeId> {
    match w {
        Word::Id(id) => Some(id),
        Word::Val(_) => None,
    }
}

/// Handle on a sorted sub-path, as held by a coordinating node.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Seg {
    head: Option<NodeId>,
    tail: Option<NodeId>,
    len: usize,
}

impl Seg {
    fn single(id: NodeId) -> Self {
        Seg {
            head: Some(id),
            tail: Some(id),
            len: 1,
        }
    }
}

/// Outcome of locating the pivot key in one path.
#[derive(Clone, Copy, Debug, Default)]
struct Found {
    rank: usize,
    len: usize,
    tail_lt: Option<NodeId>,
    head_gt: Option<NodeId>,
}

#[derive(Clone, Debug, Default)]
struct Pivot {
    /// Coordinator and slot this pivot answers to; `None` for a merging `T`-node.
    coord: Option<(NodeId, u16)>,
    sides: [Seg; 2],
    /// Side containing the pivot itself (median pivots only).
    own: Option<usize>,
    found: [Option<Found>; 2],
    /// Sub-problems: slot 0 below the pivot key, slot 1 above.
    pairs: [[Seg; 2]; 2],
    /// Insertion in progress per slot: (inserted node, target path).
    inserting: [Option<(NodeId, Seg)>; 2],
    results: [Option<Seg>; 2],
}

#[derive(Clone, Debug, Default)]
struct Node {
    // Tree T.
    height: u32,
    children_done: u8,
    own_done: bool,
    done_sent: bool,
    reports: [Option<Seg>; 2],
    report_len: [usize; 2],
    // Current built path and the sub-range this node belongs to.
    pos: usize,
    len: usize,
    k: u32,
    links: Vec<Option<NodeId>>,
    lo: usize,
    hi: usize,
    // Links of the sorted path being assembled.
    mpred: Option<NodeId>,
    msucc: Option<NodeId>,
    pivot: Option<Box<Pivot>>,
    insert: Option<(NodeId, u16)>,
}

impl Node {
    fn link(&self, b: u32, forward: bool) -> Option<NodeId> {
        self.links[(b as usize) * 2 + forward as usize]
    }

    fn rel(&self) -> usize {
        self.pos - self.lo
    }

    /// Node `d` positions away on the built path (`d` a power of two).
    fn at_offset(&self, d: usize, forward: bool) -> NodeId {
        debug_assert!(d.is_power_of_two());
        self.link(d.trailing_zeros(), forward).expect("level link missing")
    }

    fn tree_children(&self) -> (Option<NodeId>, Option<NodeId>) {
        let s = shape_at(self.rel(), self.hi - self.lo);
        let rel = self.rel();
        (
            s.left.map(|c| self.at_offset(rel - c, false)),
            s.right.map(|c| self.at_offset(c - rel, true)),
        )
    }
}

struct Sorter<'a> {
    net: &'a mut Network,
    t: &'a PathTrees,
    values: &'a [i64],
    nodes: Vec<Node>,
    timers: Vec<(u64, usize)>,
    stage: u32,
    /// Common bound on tree depth within the current stage.
    depth_bound: u64,
    stage_done: bool,
}

/// Sorts the members of the single tree `t` by `(values[u], id(u))` and
/// returns trees with positions over the sorted path.
pub fn sort(net: &mut Network, t: &PathTrees, values: &[i64]) -> Result<PathTrees, SimError> {
    let n = net.n();
    assert_eq!(t.heads().count(), 1, "sorting expects a single path");
    let mut s = Sorter {
        net,
        t,
        values,
        nodes: vec![Node::default(); n],
        timers: Vec::new(),
        stage: 0,
        depth_bound: 0,
        stage_done: false,
    };
    s.heights()?;
    let root = t.heads().next().unwrap();
    let total_stages = s.nodes[root].height;
    for h in 1..=total_stages {
        if h > 1 {
            s.barrier()?;
        }
        s.run_stage(h)?;
    }
    s.barrier()
}

impl Sorter<'_> {
    fn key(&self, u: usize) -> (i64, NodeId) {
        (self.values[u], self.net.id(u))
    }

    fn send(&mut self, u: usize, to: NodeId, tag: u16, payload: &[Word]) -> Result<(), SimError> {
        self.net.send(u, to, tag, payload)
    }

    /// Heights in T by convergecast; leaves hand their singleton paths up.
    fn heights(&mut self) -> Result<(), SimError> {
        let t = self.t;
        let mut waiting: Vec<u8> = vec![0; self.net.n()];
        let mut ready = Vec::new();
        for &u in &t.members {
            waiting[u] = t.children(u).count() as u8;
            if waiting[u] == 0 {
                ready.push(u);
            }
        }
        for _ in 0..t.k {
            for u in ready.drain(..) {
                if let Some(p) = t.info[u].parent {
                    let h = self.nodes[u].height as i64;
                    self.net.send(u, p, HEIGHT, &[Word::Val(h)])?;
                }
            }
            for e in self.net.deliver()? {
                let v = e.to;
                let h = e.msg.payload[0].val() as u32;
                let node = &mut self.nodes[v];
                node.height = node.height.max(h + 1);
                if h == 0 {
                    let side = (t.info[v].right == Some(e.msg.src)) as usize;
                    node.reports[side] = Some(Seg::single(e.msg.src));
                    node.report_len[side] = 1;
                }
                waiting[v] -= 1;
                if waiting[v] == 0 {
                    ready.push(v);
                }
            }
        }
        Ok(())
    }

    /// The root of T announces the next stage; then every path assembled so
    /// far gets a new tree with positions.
    fn barrier(&mut self) -> Result<PathTrees, SimError> {
        let n = self.net.n();
        broadcast(self.net, self.t, &vec![Payload::new(); n])?;
        let mut fam = PathFamily::new(n);
        for &u in &self.t.members {
            fam.members.push(u);
            fam.pred[u] = self.nodes[u].mpred;
            fam.succ[u] = self.nodes[u].msucc;
        }
        // Paths assembled so far have fewer than 2^(stage+1) nodes.
        let k = ceil_log2((1usize << (self.stage + 1)) - 1).min(ceil_log2(self.t.members.len()));
        let built = build_trees(self.net, &fam, k)?;
        for &u in &self.t.members {
            let info = built.info[u];
            let node = &mut self.nodes[u];
            node.pos = info.position;
            node.len = info.len;
            node.k = k;
            node.links.clear();
            for b in 0..k {
                node.links.push(built.link(u, b, false));
                node.links.push(built.link(u, b, true));
            }
        }
        Ok(built)
    }

    fn run_stage(&mut self, h: u32) -> Result<(), SimError> {
        self.stage = h;
        self.stage_done = false;
        self.depth_bound = ceil_log2((1usize << h) - 1) as u64;
        let t = self.t;
        for &u in &t.members {
            let height = self.nodes[u].height;
            let kids = t.children(u).count() as u8;
            let node = &mut self.nodes[u];
            if h == 1 {
                node.pos = 0;
                node.len = 1;
                node.k = 0;
                node.links.clear();
            }
            node.lo = 0;
            node.hi = node.len;
            node.children_done = kids;
            node.own_done = height != h;
            node.done_sent = false;
            node.pivot = None;
            node.insert = None;
        }
        for i in 0..t.members.len() {
            let u = t.members[i];
            if self.nodes[u].height == h {
                self.start_merge(u)?;
            }
            self.maybe_done(u)?;
        }
        while !(self.stage_done && self.net.pending() == 0 && self.timers.is_empty()) {
            let delivered = self.net.deliver()?;
            for e in delivered {
                self.handle(e.to, e.msg.src, e.msg.tag, &e.msg.payload)?;
            }
            let now = self.net.round();
            let mut due = Vec::new();
            self.timers.retain(|&(at, u)| {
                if at <= now {
                    due.push(u);
                    false
                } else {
                    true
                }
            });
            for u in due {
                self.resume(u)?;
            }
        }
        Ok(())
    }

    fn maybe_done(&mut self, u: usize) -> Result<(), SimError> {
        let node = &self.nodes[u];
        if node.done_sent || !node.own_done || node.children_done > 0 {
            return Ok(());
        }
        self.nodes[u].done_sent = true;
        match self.t.info[u].parent {
            Some(p) => self.send(u, p, DONE, &[]),
            None => {
                self.stage_done = true;
                Ok(())
            }
        }
    }

    /// A T-node starts merging its children's paths around its own key.
    fn start_merge(&mut self, u: usize) -> Result<(), SimError> {
        let node = &self.nodes[u];
        let sides = [
            node.reports[0].unwrap_or_default(),
            node.reports[1].unwrap_or_default(),
        ];
        let mut piv = Pivot {
            sides,
            ..Pivot::default()
        };
        let (val, me) = self.key(u);
        for side in 0..2 {
            match sides[side].head {
                Some(head) => self.send(u, head, SEARCH + side as u16, &[Word::Val(val), Word::Id(me)])?,
                None => piv.found[side] = Some(Found::default()),
            }
        }
        self.nodes[u].pivot = Some(Box::new(piv));
        self.after_found(u)
    }

    fn handle(&mut self, u: usize, src: NodeId, tag: u16, p: &[Word]) -> Result<(), SimError> {
        match tag {
            SEARCH..=43 => self.on_search(u, tag - SEARCH, p[0].val(), p[1].id()),
            FOUND_POS..=45 => {
                let side = (tag - FOUND_POS) as usize;
                let piv = self.nodes[u].pivot.as_mut().unwrap();
                let f = piv.found[side].get_or_insert_with(Found::default);
                f.rank = p[0].as_u();
                f.len = p[1].as_u();
                Ok(())
            }
            FOUND_IDS..=49 => {
                let side = tag - FOUND_IDS;
                if side == INSERT_SIDE {
                    return self.on_insert_found(u, unopt(p[0]), unopt(p[1]));
                }
                let piv = self.nodes[u].pivot.as_mut().unwrap();
                let f = piv.found[side as usize].as_mut().expect("position precedes ids");
                f.tail_lt = unopt(p[0]);
                f.head_gt = unopt(p[1]);
                self.after_found(u)
            }
            CUT => self.on_cut(u, p[0].as_u(), p[1].val() != 0),
            MEDIAN..=52 => self.on_median(u, tag - MEDIAN, p[0].as_u(), p[1].id()),
            IAM..=54 => {
                let slot = (tag - IAM) as usize;
                let piv = self.nodes[u].pivot.as_ref().unwrap();
                let [p1, p2] = piv.pairs[slot];
                let own = if p1.len >= p2.len { 0 } else { 1 };
                let (a, b) = if own == 0 { (p1, p2) } else { (p2, p1) };
                self.send(u, src, PAIR_OWN + own as u16, &[opt(a.head), opt(a.tail)])?;
                self.send(u, src, PAIR_OTHER, &[opt(b.head), opt(b.tail)])
            }
            PAIR_OWN..=56 => {
                let own = (tag - PAIR_OWN) as usize;
                let node = &mut self.nodes[u];
                let (rel, len, mpred, msucc) = (node.rel(), node.hi - node.lo, node.mpred, node.msucc);
                let piv = node.pivot.as_mut().unwrap();
                piv.own = Some(own);
                piv.sides[own] = Seg {
                    head: unopt(p[0]),
                    tail: unopt(p[1]),
                    len,
                };
                piv.found[own] = Some(Found {
                    rank: rel,
                    len,
                    tail_lt: mpred,
                    head_gt: msucc,
                });
                Ok(())
            }
            PAIR_OTHER => {
                let piv = self.nodes[u].pivot.as_mut().unwrap();
                let other = 1 - piv.own.unwrap();
                let head = unopt(p[0]).unwrap();
                piv.sides[other] = Seg {
                    head: Some(head),
                    tail: unopt(p[1]),
                    len: 0,
                };
                let (val, me) = self.key(u);
                self.send(u, head, SEARCH + other as u16, &[Word::Val(val), Word::Id(me)])
            }
            INSERT..=59 => {
                self.nodes[u].insert = Some((src, tag - INSERT));
                let (val, me) = self.key(u);
                self.send(u, p[0].id(), SEARCH + INSERT_SIDE, &[Word::Val(val), Word::Id(me)])
            }
            INSERTED..=61 => {
                let slot = (tag - INSERTED) as usize;
                let piv = self.nodes[u].pivot.as_mut().unwrap();
                let (y, target) = piv.inserting[slot].take().unwrap();
                piv.results[slot] = Some(Seg {
                    head: if p[0].val() != 0 { target.head } else { Some(y) },
                    tail: if p[1].val() != 0 { target.tail } else { Some(y) },
                    len: target.len + 1,
                });
                self.try_complete(u)
            }
            RESULT..=63 => {
                let slot = (tag - RESULT) as usize;
                let piv = self.nodes[u].pivot.as_mut().unwrap();
                let [p1, p2] = piv.pairs[slot];
                piv.results[slot] = Some(Seg {
                    head: unopt(p[0]),
                    tail: unopt(p[1]),
                    len: p1.len + p2.len,
                });
                self.try_complete(u)
            }
            LINK_PRED => {
                self.nodes[u].mpred = Some(src);
                Ok(())
            }
            LINK_SUCC => {
                self.nodes[u].msucc = Some(src);
                Ok(())
            }
            REPORT_ENDS | REPORT_LEN => {
                let side = (self.t.info[u].right == Some(src)) as usize;
                let node = &mut self.nodes[u];
                if tag == REPORT_ENDS {
                    let len = node.report_len[side];
                    node.reports[side] = Some(Seg {
                        head: unopt(p[0]),
                        tail: unopt(p[1]),
                        len,
                    });
                } else {
                    node.report_len[side] = p[0].as_u();
                    if let Some(seg) = node.reports[side].as_mut() {
                        seg.len = p[0].as_u();
                    }
                }
                Ok(())
            }
            DONE => {
                self.nodes[u].children_done -= 1;
                self.maybe_done(u)
            }
            other => unreachable!("unexpected tag {other}"),
        }
    }

    /// Tree search for the pivot key `(val, x)` within this node's sub-path.
    fn on_search(&mut self, u: usize, side: u16, val: i64, x: NodeId) -> Result<(), SimError> {
        let node = &self.nodes[u];
        let less = self.key(u) < (val, x);
        let (left, right) = node.tree_children();
        let next = if less { right } else { left };
        if let Some(c) = next {
            return self.send(u, c, SEARCH + side, &[Word::Val(val), Word::Id(x)]);
        }
        let me = self.net.id(u);
        let (rank, tail_lt, head_gt) = if less {
            (node.rel() + 1, Some(me), node.msucc)
        } else {
            (node.rel(), node.mpred, Some(me))
        };
        let len = node.hi - node.lo;
        if side != INSERT_SIDE {
            self.send(u, x, FOUND_POS + side, &[Word::Val(rank as i64), Word::Val(len as i64)])?;
        }
        self.send(u, x, FOUND_IDS + side, &[opt(tail_lt), opt(head_gt)])
    }

    /// Once the pivot key is located in both paths, cut them and wait for
    /// the cuts to settle.
    fn after_found(&mut self, u: usize) -> Result<(), SimError> {
        let piv = self.nodes[u].pivot.as_mut().unwrap();
        let (Some(f0), Some(f1)) = (piv.found[0], piv.found[1]) else {
            return Ok(());
        };
        if f0.tail_lt.is_none() && f0.head_gt.is_none() && f0.len > 0 {
            return Ok(());
        }
        if f1.tail_lt.is_none() && f1.head_gt.is_none() && f1.len > 0 {
            return Ok(());
        }
        let mut cuts = Vec::new();
        for (side, f) in [f0, f1].into_iter().enumerate() {
            let seg = piv.sides[side];
            let own = piv.own == Some(side);
            let above = f.len - f.rank - own as usize;
            piv.pairs[0][side] = Seg {
                head: if f.rank > 0 { seg.head } else { None },
                tail: if f.rank > 0 { f.tail_lt } else { None },
                len: f.rank,
            };
            piv.pairs[1][side] = Seg {
                head: if above > 0 { f.head_gt } else { None },
                tail: if above > 0 { seg.tail } else { None },
                len: above,
            };
            if f.len > 0 {
                cuts.push((seg.head.unwrap(), f.rank, own));
            }
        }
        for (head, rank, own) in cuts {
            self.send(u, head, CUT, &[Word::Val(rank as i64), Word::Val(own as i64)])?;
        }
        let at = self.net.round() + self.depth_bound + 1;
        self.timers.push((at, u));
        Ok(())
    }

    /// Splits the sub-path at `rank`; with `exclude` the node at `rank` leaves.
    fn on_cut(&mut self, u: usize, rank: usize, exclude: bool) -> Result<(), SimError> {
        let (left, right) = self.nodes[u].tree_children();
        for c in [left, right].into_iter().flatten() {
            self.send(u, c, CUT, &[Word::Val(rank as i64), Word::Val(exclude as i64)])?;
        }
        let node = &mut self.nodes[u];
        let rel = node.rel();
        if rel < rank {
            node.hi = node.lo + rank;
            if rel + 1 == rank {
                node.msucc = None;
            }
        } else if exclude && rel == rank {
            node.mpred = None;
            node.msucc = None;
        } else {
            let first = rank + exclude as usize;
            if rel == first {
                node.mpred = None;
            }
            node.lo += first;
        }
        Ok(())
    }

    fn on_median(&mut self, u: usize, slot: u16, target: usize, coord: NodeId) -> Result<(), SimError> {
        let node = &self.nodes[u];
        let rel = node.rel();
        if rel == target {
            self.nodes[u].pivot = Some(Box::new(Pivot {
                coord: Some((coord, slot)),
                ..Pivot::default()
            }));
            return self.send(u, coord, IAM + slot, &[]);
        }
        let (left, right) = node.tree_children();
        let next = if target < rel { left } else { right };
        self.send(u, next.unwrap(), MEDIAN + slot, &[Word::Val(target as i64), Word::Id(coord)])
    }

    /// The cuts have settled: start both sub-problems.
    fn resume(&mut self, u: usize) -> Result<(), SimError> {
        let me = self.net.id(u);
        for slot in 0..2 {
            let [p1, p2] = self.nodes[u].pivot.as_ref().unwrap().pairs[slot];
            let slot16 = slot as u16;
            if p1.len == 0 || p2.len == 0 {
                let only = if p1.len == 0 { p2 } else { p1 };
                self.nodes[u].pivot.as_mut().unwrap().results[slot] = Some(only);
            } else if p1.len == 1 || p2.len == 1 {
                let (y, target) = if p2.len == 1 { (p2, p1) } else { (p1, p2) };
                let y = y.head.unwrap();
                self.nodes[u].pivot.as_mut().unwrap().inserting[slot] = Some((y, target));
                self.send(u, y, INSERT + slot16, &[opt(target.head)])?;
            } else {
                let larger = if p1.len >= p2.len { p1 } else { p2 };
                let target = (larger.len - 1) / 2;
                self.send(u, larger.head.unwrap(), MEDIAN + slot16, &[Word::Val(target as i64), Word::Id(me)])?;
            }
        }
        self.try_complete(u)
    }

    fn on_insert_found(&mut self, u: usize, tail_lt: Option<NodeId>, head_gt: Option<NodeId>) -> Result<(), SimError> {
        let (coord, slot) = self.nodes[u].insert.take().unwrap();
        self.nodes[u].mpred = tail_lt;
        self.nodes[u].msucc = head_gt;
        if let Some(p) = tail_lt {
            self.send(u, p, LINK_SUCC, &[])?;
        }
        if let Some(s) = head_gt {
            self.send(u, s, LINK_PRED, &[])?;
        }
        let flags = [Word::Val(tail_lt.is_some() as i64), Word::Val(head_gt.is_some() as i64)];
        self.send(u, coord, INSERTED + slot, &flags)
    }

    /// With both halves sorted, splice this pivot between them.
    fn try_complete(&mut self, u: usize) -> Result<(), SimError> {
        let piv = self.nodes[u].pivot.as_ref().unwrap();
        let (Some(lo), Some(hi)) = (piv.results[0], piv.results[1]) else {
            return Ok(());
        };
        let coord = piv.coord;
        let me = self.net.id(u);
        self.nodes[u].pivot = None;
        self.nodes[u].mpred = lo.tail;
        self.nodes[u].msucc = hi.head;
        if let Some(t) = lo.tail {
            self.send(u, t, LINK_SUCC, &[])?;
        }
        if let Some(h) = hi.head {
            self.send(u, h, LINK_PRED, &[])?;
        }
        let head = lo.head.unwrap_or(me);
        let tail = hi.tail.unwrap_or(me);
        match coord {
            Some((c, slot)) => self.send(u, c, RESULT + slot, &[Word::Id(head), Word::Id(tail)]),
            None => {
                let len = lo.len + hi.len + 1;
                if let Some(p) = self.t.info[u].parent {
                    self.send(u, p, REPORT_ENDS, &[Word::Id(head), Word::Id(tail)])?;
                    self.send(u, p, REPORT_LEN, &[Word::Val(len as i64)])?;
                }
                self.nodes[u].own_done = true;
                self.maybe_done(u)
            }
        }
    }
}
