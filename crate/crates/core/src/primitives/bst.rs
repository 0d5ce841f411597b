//! Balanced binary search trees over paths and inorder positions.
//!
//! The distributed construction builds the level structure (level `b`
//! links every node to the nodes `2^b` steps away), then grows the tree by
//! the controlled BFS from the head, then computes subtree sizes bottom-up
//! and inorder positions top-down. The resulting tree depends only on the
//! path length, so [`Shape`] reproduces it locally from positions.

use crate::sim::{ceil_log2, Model, Network, NodeId, SimError, Word};

const LEVEL_PRED: u16 = 1;
const LEVEL_SUCC: u16 = 2;
const INVITE: u16 = 3;
const ACCEPT: u16 = 4;
const SIZE: u16 = 5;
const PLACE: u16 = 6;
const HEAD: u16 = 7;
const TAIL: u16 = 8;

/// One node's part of a tree over its path.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TreeInfo {
    pub parent: Option<NodeId>,
    pub left: Option<NodeId>,
    pub right: Option<NodeId>,
    /// Zero-based inorder position, equal to the rank on the path.
    pub position: usize,
    pub len: usize,
    pub depth: u32,
    /// First node of the path, which is also the tree root.
    pub head: Option<NodeId>,
    /// Last node of the path; known at the head only.
    pub tail: Option<NodeId>,
}

/// Disjoint paths given by per-node predecessor and successor links.
#[derive(Clone, Debug, Default)]
pub struct PathFamily {
    pub members: Vec<usize>,
    pub pred: Vec<Option<NodeId>>,
    pub succ: Vec<Option<NodeId>>,
}

impl PathFamily {
    pub fn new(n: usize) -> Self {
        PathFamily {
            members: Vec::new(),
            pred: vec![None; n],
            succ: vec![None; n],
        }
    }

    /// A single path visiting node indices in `order`.
    pub fn from_order(net: &Network, order: &[usize]) -> Self {
        let mut f = PathFamily::new(net.n());
        f.push_path(net, order);
        f
    }

    pub fn push_path(&mut self, net: &Network, order: &[usize]) {
        for (i, &u) in order.iter().enumerate() {
            self.members.push(u);
            self.pred[u] = i.checked_sub(1).map(|j| net.id(order[j]));
            self.succ[u] = order.get(i + 1).map(|&v| net.id(v));
        }
    }
}

/// Trees built over every path of a family.
#[derive(Clone, Debug)]
pub struct PathTrees {
    /// Common level bound: every path has length at most `2^k`.
    pub k: u32,
    pub members: Vec<usize>,
    pub info: Vec<TreeInfo>,
    links: Vec<Option<NodeId>>,
}

impl PathTrees {
    fn empty(n: usize, k: u32, members: Vec<usize>) -> Self {
        PathTrees {
            k,
            members,
            info: vec![TreeInfo::default(); n],
            links: vec![None; n * k as usize * 2],
        }
    }

    /// Node `2^b` steps before (`forward == false`) or after `u` on its path.
    pub fn link(&self, u: usize, b: u32, forward: bool) -> Option<NodeId> {
        if b >= self.k {
            return None;
        }
        self.links[(u * self.k as usize + b as usize) * 2 + forward as usize]
    }

    fn set_link(&mut self, u: usize, b: u32, forward: bool, v: Option<NodeId>) {
        self.links[(u * self.k as usize + b as usize) * 2 + forward as usize] = v;
    }

    pub fn pred(&self, u: usize) -> Option<NodeId> {
        self.link(u, 0, false)
    }

    pub fn succ(&self, u: usize) -> Option<NodeId> {
        self.link(u, 0, true)
    }

    pub fn heads(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied().filter(|&u| self.info[u].parent.is_none())
    }

    pub fn children(&self, u: usize) -> impl Iterator<Item = NodeId> {
        self.info[u].left.into_iter().chain(self.info[u].right)
    }

    /// Maximum depth over all trees, in edges.
    pub fn max_depth(&self) -> u32 {
        self.members.iter().map(|&u| self.info[u].depth).max().unwrap_or(0)
    }

    /// Trees computed without communication, for nodes that already know
    /// the whole path (complete knowledge). `order` lists node indices.
    pub fn local(net: &Network, order: &[usize]) -> Self {
        let len = order.len();
        let k = ceil_log2(len);
        let mut t = PathTrees::empty(net.n(), k, order.to_vec());
        let id = |p: Option<usize>| p.map(|p| net.id(order[p]));
        for (p, &u) in order.iter().enumerate() {
            let shape = shape_at(p, len);
            t.info[u] = TreeInfo {
                parent: id(shape.parent),
                left: id(shape.left),
                right: id(shape.right),
                position: p,
                len,
                depth: shape.depth,
                head: id(Some(0)),
                tail: (p == 0).then(|| net.id(order[len - 1])),
            };
            for b in 0..k {
                let step = 1usize << b;
                t.set_link(u, b, false, id(p.checked_sub(step)));
                t.set_link(u, b, true, id(Some(p + step).filter(|&q| q < len)));
            }
        }
        t
    }
}

/// The controlled-BFS tree over positions `0..len`, computed centrally.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shape {
    pub parent: Vec<Option<usize>>,
    pub left: Vec<Option<usize>>,
    pub right: Vec<Option<usize>>,
    pub depth: Vec<u32>,
}

impl Shape {
    pub fn new(len: usize) -> Self {
        let mut s = Shape {
            parent: vec![None; len],
            left: vec![None; len],
            right: vec![None; len],
            depth: vec![0; len],
        };
        if len == 0 {
            return s;
        }
        let k = ceil_log2(len);
        let mut in_tree = vec![false; len];
        let mut sp = vec![false; len];
        let mut ss = vec![false; len];
        in_tree[0] = true;
        sp[0] = true;
        ss[0] = true;
        let mut frontier = vec![0usize];
        for i in (0..k).rev() {
            let step = 1usize << i;
            // (invitee, inviter); invitations from the predecessor side win.
            let mut invites: Vec<(usize, usize)> = Vec::new();
            for &v in &frontier {
                if sp[v] && v >= step {
                    invites.push((v - step, v));
                    sp[v] = false;
                }
                if ss[v] && v + step < len {
                    invites.push((v + step, v));
                    ss[v] = false;
                }
            }
            invites.sort_unstable();
            for &(u, v) in &invites {
                if in_tree[u] {
                    continue;
                }
                in_tree[u] = true;
                sp[u] = true;
                ss[u] = true;
                s.parent[u] = Some(v);
                s.depth[u] = s.depth[v] + 1;
                if u < v {
                    s.left[v] = Some(u);
                } else {
                    s.right[v] = Some(u);
                }
                frontier.push(u);
            }
            frontier.retain(|&v| sp[v] || ss[v]);
        }
        debug_assert!(in_tree.iter().all(|&b| b));
        s
    }

    pub fn height(&self) -> u32 {
        self.depth.iter().copied().max().map_or(0, |d| d + 1)
    }
}

/// Tree neighbors of one position, as relative positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShapeNode {
    pub parent: Option<usize>,
    pub left: Option<usize>,
    pub right: Option<usize>,
    pub depth: u32,
}

/// The node at `pos` in the tree over `0..len`, found by walking down from
/// the root in `O(log len)` steps. Agrees with [`Shape::new`].
pub fn shape_at(pos: usize, len: usize) -> ShapeNode {
    debug_assert!(pos < len);
    // A node entering at level `i` next invites at the largest level below `i`
    // where its level predecessor (successor) exists.
    let left_of = |v: usize, i: u32| -> Option<(usize, u32)> {
        if v == 0 || i == 0 {
            return None;
        }
        let j = (i - 1).min(usize::BITS - 1 - v.leading_zeros());
        Some((v - (1 << j), j))
    };
    let right_of = |v: usize, i: u32| -> Option<(usize, u32)> {
        (0..i).rev().find(|&j| v + (1 << j) < len).map(|j| (v + (1 << j), j))
    };
    let (mut v, mut level) = (0usize, ceil_log2(len));
    let mut parent = None;
    let mut depth = 0;
    while v != pos {
        let (c, j) = if pos < v { left_of(v, level) } else { right_of(v, level) }.expect("position outside tree");
        parent = Some(v);
        v = c;
        level = j;
        depth += 1;
    }
    ShapeNode {
        parent,
        left: left_of(v, level).map(|x| x.0),
        right: right_of(v, level).map(|x| x.0),
        depth,
    }
}

/// Runs the distributed construction on every path of `fam`. All paths
/// must have at most `2^k` nodes, and `k` must be common knowledge.
/// Takes `5k` rounds (none when `k == 0`).
pub fn build_trees(net: &mut Network, fam: &PathFamily, k: u32) -> Result<PathTrees, SimError> {
    let n = net.n();
    let mut t = PathTrees::empty(n, k, fam.members.clone());
    if k == 0 {
        for &u in &fam.members {
            debug_assert!(fam.pred[u].is_none() && fam.succ[u].is_none());
            t.info[u] = TreeInfo {
                len: 1,
                head: Some(net.id(u)),
                tail: Some(net.id(u)),
                ..TreeInfo::default()
            };
        }
        return Ok(t);
    }
    for &u in &fam.members {
        t.set_link(u, 0, false, fam.pred[u]);
        t.set_link(u, 0, true, fam.succ[u]);
    }

    // Level structure.
    for b in 1..k {
        for &u in &fam.members {
            let (p, s) = (t.link(u, b - 1, false), t.link(u, b - 1, true));
            if let (Some(p), Some(s)) = (p, s) {
                net.send(u, s, LEVEL_PRED, &[Word::Id(p)])?;
                net.send(u, p, LEVEL_SUCC, &[Word::Id(s)])?;
            }
        }
        for e in net.deliver()? {
            let forward = e.msg.tag == LEVEL_SUCC;
            t.set_link(e.to, b, forward, Some(e.msg.payload[0].id()));
        }
    }

    // Controlled BFS from the heads.
    let mut in_tree = vec![false; n];
    let mut sp = vec![false; n];
    let mut ss = vec![false; n];
    let mut frontier: Vec<usize> = Vec::new();
    for &u in &fam.members {
        if fam.pred[u].is_none() {
            in_tree[u] = true;
            sp[u] = true;
            ss[u] = true;
            frontier.push(u);
        }
    }
    let mut invited: Vec<Option<(NodeId, bool)>> = vec![None; n];
    let mut touched = Vec::new();
    for i in (0..k).rev() {
        for &v in &frontier {
            if sp[v] {
                if let Some(p) = t.link(v, i, false) {
                    net.send(v, p, INVITE, &[])?;
                    sp[v] = false;
                }
            }
            if ss[v] {
                if let Some(s) = t.link(v, i, true) {
                    net.send(v, s, INVITE, &[])?;
                    ss[v] = false;
                }
            }
        }
        for e in net.deliver()? {
            let u = e.to;
            if in_tree[u] {
                continue;
            }
            // The invitation from the level-i predecessor takes precedence.
            let from_pred = t.link(u, i, false) == Some(e.msg.src);
            match invited[u] {
                None => {
                    touched.push(u);
                    invited[u] = Some((e.msg.src, from_pred));
                }
                Some(_) if from_pred => invited[u] = Some((e.msg.src, true)),
                Some(_) => {}
            }
        }
        for u in touched.drain(..) {
            let (parent, _) = invited[u].take().unwrap();
            in_tree[u] = true;
            sp[u] = true;
            ss[u] = true;
            t.info[u].parent = Some(parent);
            net.send(u, parent, ACCEPT, &[])?;
            frontier.push(u);
        }
        for e in net.deliver()? {
            let v = e.to;
            let child = e.msg.src;
            if t.link(v, i, false) == Some(child) {
                t.info[v].left = Some(child);
            } else {
                t.info[v].right = Some(child);
            }
        }
        frontier.retain(|&v| sp[v] || ss[v]);
    }

    // Subtree sizes, bottom-up within a window of k rounds.
    let mut waiting: Vec<u8> = vec![0; n];
    let mut size: Vec<usize> = vec![1; n];
    let mut left_size: Vec<usize> = vec![0; n];
    let mut ready: Vec<usize> = Vec::new();
    for &u in &fam.members {
        waiting[u] = t.children(u).count() as u8;
        if waiting[u] == 0 {
            ready.push(u);
        }
    }
    for _ in 0..k {
        for u in ready.drain(..) {
            if let Some(p) = t.info[u].parent {
                net.send(u, p, SIZE, &[Word::Val(size[u] as i64)])?;
            }
        }
        for e in net.deliver()? {
            let v = e.to;
            let s = e.msg.payload[0].as_u();
            if t.info[v].left == Some(e.msg.src) {
                left_size[v] = s;
            }
            size[v] += s;
            waiting[v] -= 1;
            if waiting[v] == 0 {
                ready.push(v);
            }
        }
    }

    // Inorder positions, top-down within a window of k rounds.
    let mut offset: Vec<usize> = vec![0; n];
    let mut ready: Vec<usize> = Vec::new();
    for &u in &fam.members {
        if t.info[u].parent.is_none() {
            t.info[u].len = size[u];
            t.info[u].head = Some(net.id(u));
            ready.push(u);
        }
    }
    for _ in 0..k {
        for u in std::mem::take(&mut ready) {
            let info = &mut t.info[u];
            info.position = offset[u] + left_size[u];
            let (len, depth, head) = (info.len, info.depth, info.head.unwrap());
            let pos = info.position;
            let kids = [(info.left, offset[u]), (info.right, pos + 1)];
            for (child, off) in kids {
                if let Some(c) = child {
                    net.send(u, c, PLACE, &[Word::Val(off as i64), Word::Val(len as i64)])?;
                    net.send(u, c, HEAD, &[Word::Id(head), Word::Val(depth as i64 + 1)])?;
                }
            }
        }
        for e in net.deliver()? {
            let u = e.to;
            let p = &e.msg.payload;
            match e.msg.tag {
                PLACE => {
                    offset[u] = p[0].as_u();
                    t.info[u].len = p[1].as_u();
                    ready.push(u);
                }
                _ => {
                    t.info[u].head = Some(p[0].id());
                    t.info[u].depth = p[1].val() as u32;
                }
            }
        }
    }
    for u in ready {
        debug_assert!(t.children(u).next().is_none(), "tree deeper than the level bound");
        t.info[u].position = offset[u] + left_size[u];
    }

    // The tail introduces itself to the head.
    for &u in &fam.members {
        let info = &t.info[u];
        if info.position + 1 == info.len && info.parent.is_some() {
            net.send(u, info.head.unwrap(), TAIL, &[])?;
        }
        if info.len == 1 {
            t.info[u].tail = Some(net.id(u));
        }
    }
    for e in net.deliver()? {
        t.info[e.to].tail = Some(e.msg.src);
    }
    Ok(t)
}

/// Turns the directed knowledge path into an undirected one in one round.
/// Returns each node's predecessor.
pub fn undirect(net: &mut Network, order: &[usize]) -> Result<Vec<Option<NodeId>>, SimError> {
    let mut pred = vec![None; net.n()];
    for w in order.windows(2) {
        let to = net.id(w[1]);
        net.send(w[0], to, LEVEL_PRED, &[])?;
    }
    for e in net.deliver()? {
        pred[e.to] = Some(e.msg.src);
    }
    Ok(pred)
}

/// Tree over the initial path: the knowledge path in NCC0 (one round to
/// undirect it, then [`build_trees`]), the identifier order in NCC1 (free).
pub fn initial_trees(net: &mut Network) -> Result<PathTrees, SimError> {
    let n = net.n();
    match net.config().model {
        Model::Ncc0 => {
            let order: Vec<usize> = (0..n).collect();
            undirect(net, &order)?;
            let fam = PathFamily::from_order(net, &order);
            build_trees(net, &fam, ceil_log2(n))
        }
        Model::Ncc1 => {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by_key(|&u| net.id(u));
            Ok(PathTrees::local(net, &order))
        }
    }
}
