//! Face adjacency and connected components over the inside leaves.
//!
//! Leaves are addressed on the integer lattice of the finest depth: a leaf at
//! depth `d` has an origin in `[0, 2^max_depth)^k` and an edge of
//! `2^(max_depth - d)` lattice units. Two leaves are adjacent when their
//! lattice boxes touch along one axis and overlap with positive length on
//! every other axis.

use petgraph::unionfind::UnionFind;

use super::{HyperTree, LeafId, Node, MAX_DIM};

type Coord = [u32; MAX_DIM];

#[derive(Clone, Copy)]
enum Slot {
    Outside,
    Inside(u32),
    Branch(u32),
}

#[derive(Clone, Copy)]
struct Cell {
    origin: Coord,
    size: u32,
}

/// Flattened copy of a tree used for repeated lattice queries.
pub(crate) struct LeafIndex {
    k: usize,
    extent: u32,
    periodic: [bool; MAX_DIM],
    slots: Vec<Slot>,
    cells: Vec<Cell>,
    ids: Vec<LeafId>,
}

impl LeafIndex {
    pub(crate) fn new(tree: &HyperTree) -> Self {
        let k = tree.dim();
        let mut index = LeafIndex {
            k,
            extent: 1 << tree.max_depth(),
            periodic: tree.periodic,
            slots: vec![Slot::Outside],
            cells: Vec::new(),
            ids: Vec::new(),
        };
        let root = Cell { origin: [0; MAX_DIM], size: index.extent };
        index.fill(0, tree.root_node(), root, &mut Vec::new());
        index
    }

    fn fill(&mut self, slot: usize, node: &Node, cell: Cell, path: &mut Vec<u8>) {
        match node {
            Node::Leaf(false) => self.slots[slot] = Slot::Outside,
            Node::Leaf(true) => {
                self.slots[slot] = Slot::Inside(self.cells.len() as u32);
                self.cells.push(cell);
                self.ids.push(LeafId(path.clone()));
            }
            Node::Branch(cs) => {
                let first = self.slots.len();
                self.slots[slot] = Slot::Branch(first as u32);
                self.slots.resize(first + cs.len(), Slot::Outside);
                let half = cell.size / 2;
                for (c, child) in cs.iter().enumerate() {
                    let mut origin = cell.origin;
                    for (i, o) in origin.iter_mut().enumerate().take(self.k) {
                        if c >> i & 1 == 1 {
                            *o += half;
                        }
                    }
                    path.push(c as u8);
                    self.fill(first + c, child, Cell { origin, size: half }, path);
                    path.pop();
                }
            }
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.cells.len()
    }

    pub(crate) fn id(&self, ordinal: u32) -> &LeafId {
        &self.ids[ordinal as usize]
    }

    pub(crate) fn ordinal(&self, id: &LeafId) -> Option<u32> {
        self.ids.binary_search(id).ok().map(|i| i as u32)
    }

    /// Inside leaves whose lattice box meets the half-open box `[lo, hi)`
    /// with positive volume.
    fn query(&self, lo: &Coord, hi: &Coord, out: &mut Vec<u32>) {
        let root = Cell { origin: [0; MAX_DIM], size: self.extent };
        self.query_slot(0, root, lo, hi, out);
    }

    fn query_slot(&self, slot: usize, cell: Cell, lo: &Coord, hi: &Coord, out: &mut Vec<u32>) {
        let overlaps = (0..self.k).all(|i| cell.origin[i] < hi[i] && lo[i] < cell.origin[i] + cell.size);
        if !overlaps {
            return;
        }
        match self.slots[slot] {
            Slot::Outside => {}
            Slot::Inside(ord) => out.push(ord),
            Slot::Branch(first) => {
                let half = cell.size / 2;
                for c in 0..1usize << self.k {
                    let mut origin = cell.origin;
                    for (i, o) in origin.iter_mut().enumerate().take(self.k) {
                        if c >> i & 1 == 1 {
                            *o += half;
                        }
                    }
                    self.query_slot(first as usize + c, Cell { origin, size: half }, lo, hi, out);
                }
            }
        }
    }

    /// One-lattice-unit slab beyond the face of `cell` on `axis`, or `None`
    /// at a non-periodic boundary.
    fn slab(&self, cell: &Cell, axis: usize, upper: bool) -> Option<(Coord, Coord)> {
        let mut lo = cell.origin;
        let mut hi = cell.origin;
        for i in 0..self.k {
            hi[i] += cell.size;
        }
        let start = if upper {
            let end = cell.origin[axis] + cell.size;
            if end < self.extent {
                end
            } else if self.periodic[axis] {
                0
            } else {
                return None;
            }
        } else if cell.origin[axis] > 0 {
            cell.origin[axis] - 1
        } else if self.periodic[axis] {
            self.extent - 1
        } else {
            return None;
        };
        lo[axis] = start;
        hi[axis] = start + 1;
        Some((lo, hi))
    }

    /// Face neighbors of `ordinal` in the positive direction of every axis.
    fn upper_neighbors(&self, ordinal: u32, out: &mut Vec<u32>) {
        let cell = self.cells[ordinal as usize];
        for axis in 0..self.k {
            if let Some((lo, hi)) = self.slab(&cell, axis, true) {
                self.query(&lo, &hi, out);
            }
        }
    }

    pub(crate) fn neighbors(&self, ordinal: u32) -> Vec<u32> {
        let cell = self.cells[ordinal as usize];
        let mut out = Vec::new();
        for axis in 0..self.k {
            for upper in [false, true] {
                if let Some((lo, hi)) = self.slab(&cell, axis, upper) {
                    self.query(&lo, &hi, &mut out);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out.retain(|&o| o != ordinal);
        out
    }
}

/// Component label of every inside leaf.
///
/// Leaves are listed in lexicographic order of their locational codes and
/// components are numbered in order of their first leaf.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentLabeling {
    leaves: Vec<LeafId>,
    labels: Vec<usize>,
    count: usize,
}

impl ComponentLabeling {
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn leaves(&self) -> &[LeafId] {
        &self.leaves
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label_of(&self, leaf: &LeafId) -> Option<usize> {
        self.leaves.binary_search(leaf).ok().map(|i| self.labels[i])
    }

    /// Leaves carrying `label`, in lexicographic order.
    pub fn members(&self, label: usize) -> impl Iterator<Item = &LeafId> {
        self.leaves.iter().zip(&self.labels).filter(move |(_, &l)| l == label).map(|(id, _)| id)
    }

    /// Leaf counts per component.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.count];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

pub(crate) fn label_components(tree: &HyperTree) -> ComponentLabeling {
    let index = LeafIndex::new(tree);
    let n = index.len();
    let mut uf = UnionFind::<u32>::new(n);
    let mut buf = Vec::new();
    for ord in 0..n as u32 {
        buf.clear();
        index.upper_neighbors(ord, &mut buf);
        for &other in &buf {
            if other != ord {
                uf.union(ord, other);
            }
        }
    }
    let mut rep_label = vec![usize::MAX; n];
    let mut labels = Vec::with_capacity(n);
    let mut count = 0;
    for ord in 0..n as u32 {
        let rep = uf.find(ord) as usize;
        if rep_label[rep] == usize::MAX {
            rep_label[rep] = count;
            count += 1;
        }
        labels.push(rep_label[rep]);
    }
    ComponentLabeling { leaves: index.ids, labels, count }
}

#[cfg(test)]
mod tests {
    use crate::hypertree::{Bounds, HyperTree, LeafId};

    #[test]
    fn single_leaf_has_no_neighbors() {
        let t = HyperTree::full(Bounds::unit(2).unwrap(), 2).unwrap();
        assert!(t.adjacency_neighbors(&LeafId::root()).unwrap().is_empty());
    }

    #[test]
    fn uniform_grid_von_neumann() {
        // a 4x4 grid of inside leaves that cannot merge: punch one corner leaf
        let root = Bounds::unit(2).unwrap();
        let hole = LeafId::from_path(vec![3, 3]);
        let ids: Vec<LeafId> = (0..4u8)
            .flat_map(|a| (0..4u8).map(move |b| LeafId::from_path(vec![a, b])))
            .filter(|id| *id != hole)
            .collect();
        let t = HyperTree::from_leaves(root, 2, &ids).unwrap();
        // quadrants 0..2 collapse; leaf (3,0) touches (3,1), (3,2) and the
        // two merged quadrants 1 and 2
        let interior = LeafId::from_path(vec![3, 0]);
        let n = t.adjacency_neighbors(&interior).unwrap();
        let b = t.leaf_bounds(&interior).unwrap();
        for id in &n {
            let nb = t.leaf_bounds(id).unwrap();
            let touching_axes = (0..2).filter(|&i| nb.hi()[i] == b.lo()[i] || nb.lo()[i] == b.hi()[i]).count();
            assert_eq!(touching_axes, 1);
        }
        assert_eq!(n.len(), 4);
    }

    #[test]
    fn periodic_wraps() {
        let root = Bounds::unit(2).unwrap();
        let left = LeafId::from_path(vec![0, 0]);
        let right = LeafId::from_path(vec![1, 1]);
        let t = HyperTree::from_leaves(root, 2, &[left.clone(), right.clone()]).unwrap();
        assert_eq!(t.connected_components().count(), 2);
        // left is [0,.25]x[0,.25], right is [.75,1]x[0,.25]
        let t = t.with_periodic(0, true);
        assert_eq!(t.adjacency_neighbors(&left).unwrap(), vec![right]);
        assert_eq!(t.connected_components().count(), 1);
    }

    #[test]
    fn corner_contact_is_not_adjacency() {
        let root = Bounds::unit(2).unwrap();
        let t = HyperTree::from_leaves(root, 1, &[LeafId::from_path(vec![0]), LeafId::from_path(vec![3])]).unwrap();
        assert_eq!(t.connected_components().count(), 2);
    }
}
