//! Generalized `2^k`-trees ("hyperoctrees").
//!
//! A [`HyperTree`] recursively bisects every axis of a root box, so each
//! internal node has exactly `2^k` children. Leaves are either inside or
//! outside the represented set; a cell that the classifier still calls
//! [`CellColor::Mixed`] at the maximum depth is resolved by a leaf policy.
//!
//! Trees are kept in canonical form: no internal node has children that are
//! all inside or all outside leaves. Two trees over the same root therefore
//! compare equal exactly when they represent the same leaf-resolution set.

mod adjacency;
mod bounds;
mod codec;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use adjacency::ComponentLabeling;
pub use bounds::{Bounds, MAX_DIM};

/// Deepest subdivision accepted by any tree.
pub const MAX_DEPTH: u32 = 30;

/// Upper bound on `k * max_depth`, so lattice volumes fit a `u128`.
const MAX_LATTICE_BITS: u32 = 120;

/// Subtrees shallower than this are processed with rayon.
const PAR_DEPTH: u32 = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TreeError {
    #[error("unsupported dimension {0} (expected 1..={MAX_DIM})")]
    Dimension(usize),
    #[error("degenerate box: {0}")]
    DegenerateBox(String),
    #[error("max depth {0} out of range for this dimension")]
    Depth(u32),
    #[error("trees do not share a dimension and root box")]
    RootMismatch,
    #[error("point {0:?} lies outside the root box")]
    PointOutside(Vec<f64>),
    #[error("invalid axis subset {0:?}")]
    Axes(Vec<usize>),
    #[error("{0:?} is not a leaf of this tree")]
    UnknownLeaf(LeafId),
    #[error("malformed tree stream: {0}")]
    Decode(String),
}

/// Classification of a cell against the represented set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellColor {
    Inside,
    Outside,
    Mixed,
}

/// How a cell still classified `Mixed` at the maximum depth is stored.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum LeafPolicy {
    #[default]
    Outside,
    Inside,
}

/// Locational code: child indices from the root down to a leaf.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LeafId(Vec<u8>);

impl LeafId {
    pub fn root() -> Self {
        LeafId(Vec::new())
    }

    pub fn from_path(path: Vec<u8>) -> Self {
        LeafId(path)
    }

    pub fn path(&self) -> &[u8] {
        &self.0
    }

    pub fn depth(&self) -> u32 {
        self.0.len() as u32
    }

    /// Box of this code under `root`, by repeated exact bisection.
    pub fn bounds(&self, root: &Bounds) -> Bounds {
        self.0.iter().fold(*root, |b, &c| b.child(c as usize))
    }

    fn child(&self, c: usize) -> LeafId {
        let mut p = self.0.clone();
        p.push(c as u8);
        LeafId(p)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Node {
    Leaf(bool),
    Branch(Box<[Node]>),
}

impl Node {
    const EMPTY: Node = Node::Leaf(false);
    const FULL: Node = Node::Leaf(true);

    /// Builds a branch, collapsing it when every child is the same leaf.
    fn branch(children: Vec<Node>) -> Node {
        match children.first() {
            Some(Node::Leaf(v)) if children.iter().all(|c| *c == Node::Leaf(*v)) => Node::Leaf(*v),
            _ => Node::Branch(children.into_boxed_slice()),
        }
    }

    fn complement(&self) -> Node {
        match self {
            Node::Leaf(v) => Node::Leaf(!v),
            Node::Branch(cs) => Node::Branch(cs.iter().map(Node::complement).collect()),
        }
    }

    fn children_or_split(&self, fanout: usize) -> Vec<Node> {
        match self {
            Node::Leaf(v) => vec![Node::Leaf(*v); fanout],
            Node::Branch(cs) => cs.to_vec(),
        }
    }

    fn canonicalize(self) -> Node {
        match self {
            Node::Leaf(_) => self,
            Node::Branch(cs) => Node::branch(cs.into_vec().into_iter().map(Node::canonicalize).collect()),
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum SetOp {
    Union,
    Intersect,
    Difference,
}

impl SetOp {
    #[inline]
    fn apply(self, a: bool, b: bool) -> bool {
        match self {
            SetOp::Union => a || b,
            SetOp::Intersect => a && b,
            SetOp::Difference => a && !b,
        }
    }
}

fn combine(a: &Node, b: &Node, op: SetOp, depth: u32) -> Node {
    match (a, b) {
        (Node::Leaf(x), Node::Leaf(y)) => Node::Leaf(op.apply(*x, *y)),
        (Node::Leaf(x), Node::Branch(_)) => {
            let (f, t) = (op.apply(*x, false), op.apply(*x, true));
            if f == t {
                Node::Leaf(f)
            } else if t {
                b.clone()
            } else {
                b.complement()
            }
        }
        (Node::Branch(_), Node::Leaf(y)) => {
            let (f, t) = (op.apply(false, *y), op.apply(true, *y));
            if f == t {
                Node::Leaf(f)
            } else if t {
                a.clone()
            } else {
                a.complement()
            }
        }
        (Node::Branch(ca), Node::Branch(cb)) => {
            let children = if depth < PAR_DEPTH {
                ca.par_iter().zip(cb.par_iter()).map(|(x, y)| combine(x, y, op, depth + 1)).collect()
            } else {
                ca.iter().zip(cb.iter()).map(|(x, y)| combine(x, y, op, depth + 1)).collect()
            };
            Node::branch(children)
        }
    }
}

/// Dimension-generic `2^k`-tree over a fixed root box.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperTree {
    root_box: Bounds,
    max_depth: u32,
    periodic: [bool; MAX_DIM],
    root: Node,
}

fn check_depth(k: usize, max_depth: u32) -> Result<(), TreeError> {
    if max_depth == 0 || max_depth > MAX_DEPTH || k as u32 * max_depth > MAX_LATTICE_BITS {
        Err(TreeError::Depth(max_depth))
    } else {
        Ok(())
    }
}

impl HyperTree {
    /// Tree representing the empty set.
    pub fn empty(root_box: Bounds, max_depth: u32) -> Result<Self, TreeError> {
        check_depth(root_box.dim(), max_depth)?;
        Ok(HyperTree { root_box, max_depth, periodic: [false; MAX_DIM], root: Node::EMPTY })
    }

    /// Tree whose single leaf covers the whole root box.
    pub fn full(root_box: Bounds, max_depth: u32) -> Result<Self, TreeError> {
        let mut t = Self::empty(root_box, max_depth)?;
        t.root = Node::FULL;
        Ok(t)
    }

    /// Recursively subdivides `Mixed` cells of `root_box` down to `max_depth`.
    ///
    /// `classify` must be conservative: `Inside`/`Outside` only when the verdict
    /// holds for the whole cell. Cells still `Mixed` at `max_depth` follow
    /// `policy`.
    pub fn build<F>(root_box: Bounds, max_depth: u32, classify: F, policy: LeafPolicy) -> Result<Self, TreeError>
    where
        F: Fn(&Bounds) -> CellColor + Sync,
    {
        let inside = policy == LeafPolicy::Inside;
        Self::build_with_resolver(root_box, max_depth, classify, |_| inside)
    }

    /// Like [`HyperTree::build`], with a caller-supplied verdict for cells
    /// still `Mixed` at `max_depth`.
    pub fn build_with_resolver<F, R>(
        root_box: Bounds,
        max_depth: u32,
        classify: F,
        resolve: R,
    ) -> Result<Self, TreeError>
    where
        F: Fn(&Bounds) -> CellColor + Sync,
        R: Fn(&Bounds) -> bool + Sync,
    {
        check_depth(root_box.dim(), max_depth)?;
        let fanout = 1usize << root_box.dim();
        let root = grow(&root_box, 0, max_depth, fanout, &classify, &resolve);
        Ok(HyperTree { root_box, max_depth, periodic: [false; MAX_DIM], root })
    }

    /// Tree whose inside set is exactly the listed leaves.
    pub fn from_leaves<'a, I>(root_box: Bounds, max_depth: u32, leaves: I) -> Result<Self, TreeError>
    where
        I: IntoIterator<Item = &'a LeafId>,
    {
        let mut t = Self::empty(root_box, max_depth)?;
        let fanout = t.fanout();
        for id in leaves {
            if id.depth() > max_depth || id.path().iter().any(|&c| c as usize >= fanout) {
                return Err(TreeError::UnknownLeaf(id.clone()));
            }
            let mut node = &mut t.root;
            for &c in id.path() {
                if let Node::Leaf(v) = node {
                    *node = Node::Branch(vec![Node::Leaf(*v); fanout].into_boxed_slice());
                }
                let Node::Branch(cs) = node else { unreachable!() };
                node = &mut cs[c as usize];
            }
            *node = Node::FULL;
        }
        t.root = t.root.canonicalize();
        Ok(t)
    }

    /// Enables or disables wrap-around adjacency on `axis`.
    pub fn with_periodic(mut self, axis: usize, periodic: bool) -> Self {
        assert!(axis < self.dim(), "axis {axis} out of range");
        self.periodic[axis] = periodic;
        self
    }

    pub fn dim(&self) -> usize {
        self.root_box.dim()
    }

    pub fn root_box(&self) -> &Bounds {
        &self.root_box
    }

    pub fn max_depth(&self) -> u32 {
        self.max_depth
    }

    pub fn is_periodic(&self, axis: usize) -> bool {
        self.periodic[axis]
    }

    pub fn is_empty(&self) -> bool {
        self.root == Node::EMPTY
    }

    pub(crate) fn fanout(&self) -> usize {
        1 << self.dim()
    }

    pub(crate) fn root_node(&self) -> &Node {
        &self.root
    }

    fn compatible(&self, other: &HyperTree) -> Result<(), TreeError> {
        if self.root_box == other.root_box {
            Ok(())
        } else {
            Err(TreeError::RootMismatch)
        }
    }

    fn binary(&self, other: &HyperTree, op: SetOp) -> Result<HyperTree, TreeError> {
        self.compatible(other)?;
        let mut periodic = self.periodic;
        for (p, q) in periodic.iter_mut().zip(other.periodic) {
            *p |= q;
        }
        Ok(HyperTree {
            root_box: self.root_box,
            max_depth: self.max_depth.max(other.max_depth),
            periodic,
            root: combine(&self.root, &other.root, op, 0),
        })
    }

    pub fn union(&self, other: &HyperTree) -> Result<HyperTree, TreeError> {
        self.binary(other, SetOp::Union)
    }

    pub fn intersect(&self, other: &HyperTree) -> Result<HyperTree, TreeError> {
        self.binary(other, SetOp::Intersect)
    }

    pub fn difference(&self, other: &HyperTree) -> Result<HyperTree, TreeError> {
        self.binary(other, SetOp::Difference)
    }

    /// Complement within the root box.
    pub fn complement(&self) -> HyperTree {
        HyperTree { root: self.root.complement(), ..self.clone() }
    }

    /// Union with the rasterization of `b` at `max_depth`.
    pub fn insert_box(&self, b: &Bounds) -> Result<HyperTree, TreeError> {
        self.insert_boxes(std::slice::from_ref(b))
    }

    /// Union with the rasterizations of all `boxes`.
    ///
    /// A cell entirely inside a box becomes inside; a cell partially covered
    /// at `max_depth` becomes inside when its center lies in the (closed) box.
    pub fn insert_boxes(&self, boxes: &[Bounds]) -> Result<HyperTree, TreeError> {
        if let Some(b) = boxes.iter().find(|b| b.dim() != self.dim()) {
            return Err(TreeError::Dimension(b.dim()));
        }
        let hits: Vec<&Bounds> = boxes.iter().filter(|b| b.overlaps(&self.root_box)).collect();
        let root = rasterize(&self.root, &self.root_box, 0, self.max_depth, self.fanout(), &hits);
        Ok(HyperTree { root, ..self.clone() })
    }

    /// Existential projection onto `axes` (in the given order).
    pub fn project(&self, axes: &[usize]) -> Result<HyperTree, TreeError> {
        let k = self.dim();
        let mut seen = [false; MAX_DIM];
        let valid =
            !axes.is_empty() && axes.len() < k && axes.iter().all(|&a| a < k && !std::mem::replace(&mut seen[a], true));
        if !valid {
            return Err(TreeError::Axes(axes.to_vec()));
        }
        let root_box = self.root_box.restrict(axes)?;
        let mut periodic = [false; MAX_DIM];
        for (i, &a) in axes.iter().enumerate() {
            periodic[i] = self.periodic[a];
        }
        Ok(HyperTree { root_box, max_depth: self.max_depth, periodic, root: project_node(&self.root, axes, 0) })
    }

    /// Sum of the volumes of all inside leaves.
    pub fn measure(&self) -> f64 {
        let mut per_depth = vec![0u64; self.max_depth as usize + 1];
        count_inside(&self.root, 0, &mut per_depth);
        let mut vol = self.root_box.volume();
        let shrink = 0.5f64.powi(self.dim() as i32);
        let mut total = 0.0;
        for n in per_depth {
            total += n as f64 * vol;
            vol *= shrink;
        }
        total
    }

    /// Inside volume counted in cells of the finest (max-depth) lattice.
    pub fn lattice_measure(&self) -> u128 {
        let mut per_depth = vec![0u64; self.max_depth as usize + 1];
        count_inside(&self.root, 0, &mut per_depth);
        let k = self.dim() as u32;
        per_depth.iter().enumerate().map(|(d, &n)| n as u128 * (1u128 << (k * (self.max_depth - d as u32)))).sum()
    }

    /// Color of the leaf containing `p`. Points on a shared face belong to
    /// the lower child, i.e. the lexicographically smaller locational code.
    pub fn contains(&self, p: &[f64]) -> Result<CellColor, TreeError> {
        if !self.root_box.contains_point(p) {
            return Err(TreeError::PointOutside(p.to_vec()));
        }
        let mut node = &self.root;
        let mut b = self.root_box;
        loop {
            match node {
                Node::Leaf(true) => return Ok(CellColor::Inside),
                Node::Leaf(false) => return Ok(CellColor::Outside),
                Node::Branch(cs) => {
                    let c = (0..self.dim()).filter(|&i| p[i] > b.mid(i)).fold(0, |acc, i| acc | 1 << i);
                    b = b.child(c);
                    node = &cs[c];
                }
            }
        }
    }

    /// Leaf (inside or outside) containing `p`, with the same tie rule as
    /// [`HyperTree::contains`].
    pub fn locate(&self, p: &[f64]) -> Result<LeafId, TreeError> {
        if !self.root_box.contains_point(p) {
            return Err(TreeError::PointOutside(p.to_vec()));
        }
        let mut node = &self.root;
        let mut b = self.root_box;
        let mut path = Vec::new();
        while let Node::Branch(cs) = node {
            let c = (0..self.dim()).filter(|&i| p[i] > b.mid(i)).fold(0, |acc, i| acc | 1 << i);
            path.push(c as u8);
            b = b.child(c);
            node = &cs[c];
        }
        Ok(LeafId(path))
    }

    /// Inside leaves in lexicographic order of their locational codes.
    pub fn inside_leaves(&self) -> Vec<(LeafId, Bounds)> {
        let mut out = Vec::new();
        self.walk(&mut |id, b, inside| {
            if inside {
                out.push((id.clone(), *b));
            }
        });
        out
    }

    /// Every leaf, inside or not, in lexicographic order.
    pub fn leaves(&self) -> Vec<(LeafId, Bounds, bool)> {
        let mut out = Vec::new();
        self.walk(&mut |id, b, inside| out.push((id.clone(), *b, inside)));
        out
    }

    /// First inside leaf in lexicographic order whose box, and every
    /// ancestor box, satisfies `visit`.
    pub fn find_inside_leaf(&self, visit: impl Fn(&Bounds) -> bool) -> Option<(LeafId, Bounds)> {
        fn go(
            node: &Node,
            b: &Bounds,
            path: &mut Vec<u8>,
            visit: &impl Fn(&Bounds) -> bool,
        ) -> Option<(LeafId, Bounds)> {
            if !visit(b) {
                return None;
            }
            match node {
                Node::Leaf(true) => Some((LeafId(path.clone()), *b)),
                Node::Leaf(false) => None,
                Node::Branch(cs) => cs.iter().enumerate().find_map(|(c, child)| {
                    path.push(c as u8);
                    let hit = go(child, &b.child(c), path, visit);
                    path.pop();
                    hit
                }),
            }
        }
        go(&self.root, &self.root_box, &mut Vec::new(), &visit)
    }

    pub fn leaf_count(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_, _, _| n += 1);
        n
    }

    fn walk(&self, f: &mut impl FnMut(&LeafId, &Bounds, bool)) {
        fn go(node: &Node, id: &LeafId, b: &Bounds, f: &mut impl FnMut(&LeafId, &Bounds, bool)) {
            match node {
                Node::Leaf(v) => f(id, b, *v),
                Node::Branch(cs) => {
                    for (c, child) in cs.iter().enumerate() {
                        go(child, &id.child(c), &b.child(c), f);
                    }
                }
            }
        }
        go(&self.root, &LeafId::root(), &self.root_box, f);
    }

    /// Color of the leaf with locational code `id`.
    pub fn leaf_color(&self, id: &LeafId) -> Result<CellColor, TreeError> {
        let mut node = &self.root;
        for &c in id.path() {
            match node {
                Node::Branch(cs) if (c as usize) < cs.len() => node = &cs[c as usize],
                _ => return Err(TreeError::UnknownLeaf(id.clone())),
            }
        }
        match node {
            Node::Leaf(true) => Ok(CellColor::Inside),
            Node::Leaf(false) => Ok(CellColor::Outside),
            Node::Branch(_) => Err(TreeError::UnknownLeaf(id.clone())),
        }
    }

    /// Box of the leaf `id`; fails when `id` is not a leaf of this tree.
    pub fn leaf_bounds(&self, id: &LeafId) -> Result<Bounds, TreeError> {
        self.leaf_color(id)?;
        Ok(id.bounds(&self.root_box))
    }

    /// Inside leaves sharing a (k-1)-face of positive measure with `leaf`.
    pub fn adjacency_neighbors(&self, leaf: &LeafId) -> Result<Vec<LeafId>, TreeError> {
        if self.leaf_color(leaf)? != CellColor::Inside {
            return Err(TreeError::UnknownLeaf(leaf.clone()));
        }
        let index = adjacency::LeafIndex::new(self);
        let ord = index.ordinal(leaf).ok_or_else(|| TreeError::UnknownLeaf(leaf.clone()))?;
        Ok(index.neighbors(ord).into_iter().map(|o| index.id(o).clone()).collect())
    }

    /// Face-connected components of the inside set.
    pub fn connected_components(&self) -> ComponentLabeling {
        adjacency::label_components(self)
    }

    /// Depth-first record stream; see `docs/tree-format.md`.
    pub fn encode(&self) -> Vec<u8> {
        codec::encode(self)
    }

    pub fn decode(bytes: &[u8]) -> Result<HyperTree, TreeError> {
        codec::decode(bytes)
    }
}

fn grow<F, R>(b: &Bounds, depth: u32, max_depth: u32, fanout: usize, classify: &F, resolve: &R) -> Node
where
    F: Fn(&Bounds) -> CellColor + Sync,
    R: Fn(&Bounds) -> bool + Sync,
{
    match classify(b) {
        CellColor::Inside => Node::FULL,
        CellColor::Outside => Node::EMPTY,
        CellColor::Mixed if depth == max_depth => Node::Leaf(resolve(b)),
        CellColor::Mixed => {
            let child = |c: usize| grow(&b.child(c), depth + 1, max_depth, fanout, classify, resolve);
            let children = if depth < PAR_DEPTH {
                (0..fanout).into_par_iter().map(child).collect()
            } else {
                (0..fanout).map(child).collect()
            };
            Node::branch(children)
        }
    }
}

fn rasterize(node: &Node, b: &Bounds, depth: u32, max_depth: u32, fanout: usize, boxes: &[&Bounds]) -> Node {
    if *node == Node::FULL {
        return Node::FULL;
    }
    let hits: Vec<&Bounds> = boxes.iter().copied().filter(|x| x.overlaps(b)).collect();
    if hits.is_empty() {
        return node.clone();
    }
    if hits.iter().any(|x| x.contains_box(b)) {
        return Node::FULL;
    }
    if depth == max_depth {
        let c = b.center();
        return if hits.iter().any(|x| x.contains_point(&c)) { Node::FULL } else { node.clone() };
    }
    let children = node.children_or_split(fanout);
    let recurse = |(c, child): (usize, &Node)| rasterize(child, &b.child(c), depth + 1, max_depth, fanout, &hits);
    let out = if depth < PAR_DEPTH && hits.len() > 64 {
        children.par_iter().enumerate().map(recurse).collect()
    } else {
        children.iter().enumerate().map(recurse).collect()
    };
    Node::branch(out)
}

fn project_node(node: &Node, axes: &[usize], depth: u32) -> Node {
    match node {
        Node::Leaf(v) => Node::Leaf(*v),
        Node::Branch(cs) => {
            let groups = 1usize << axes.len();
            let sub_index = |c: usize| axes.iter().enumerate().fold(0usize, |acc, (j, &a)| acc | ((c >> a & 1) << j));
            let project_group = |g: usize| {
                cs.iter().enumerate().filter(|(c, _)| sub_index(*c) == g).fold(Node::EMPTY, |acc, (_, child)| {
                    if acc == Node::FULL {
                        acc
                    } else {
                        combine(&acc, &project_node(child, axes, depth + 1), SetOp::Union, PAR_DEPTH)
                    }
                })
            };
            let children = if depth < PAR_DEPTH {
                (0..groups).into_par_iter().map(project_group).collect()
            } else {
                (0..groups).map(project_group).collect()
            };
            Node::branch(children)
        }
    }
}

fn count_inside(node: &Node, depth: usize, per_depth: &mut [u64]) {
    match node {
        Node::Leaf(true) => per_depth[depth] += 1,
        Node::Leaf(false) => {}
        Node::Branch(cs) => cs.iter().for_each(|c| count_inside(c, depth + 1, per_depth)),
    }
}
