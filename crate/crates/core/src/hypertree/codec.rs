//! Byte stream for trees.
//!
//! ```text
//! "HTR1"  k:u8  max_depth:u8  periodic:u8
//! lo[0..k]:f64le  hi[0..k]:f64le
//! node*                      pre-order
//!
//! node := 0x00               outside leaf
//!       | 0x01               inside leaf
//!       | 0x02 mask node*    branch; mask has 2^k bits (LSB first, padded
//!                            to whole bytes), one per child, set when the
//!                            child is not an outside leaf; only those
//!                            children follow
//! ```

use super::{check_depth, Bounds, HyperTree, Node, TreeError, MAX_DIM};

const MAGIC: &[u8; 4] = b"HTR1";
const OUTSIDE: u8 = 0;
const INSIDE: u8 = 1;
const BRANCH: u8 = 2;

pub(crate) fn encode(tree: &HyperTree) -> Vec<u8> {
    let k = tree.dim();
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.push(k as u8);
    out.push(tree.max_depth() as u8);
    out.push((0..k).filter(|&i| tree.is_periodic(i)).fold(0u8, |m, i| m | 1 << i));
    for v in tree.root_box().lo().iter().chain(tree.root_box().hi()) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    encode_node(tree.root_node(), &mut out);
    out
}

fn encode_node(node: &Node, out: &mut Vec<u8>) {
    match node {
        Node::Leaf(false) => out.push(OUTSIDE),
        Node::Leaf(true) => out.push(INSIDE),
        Node::Branch(cs) => {
            out.push(BRANCH);
            let mut mask = vec![0u8; cs.len().div_ceil(8)];
            for (c, child) in cs.iter().enumerate() {
                if *child != Node::EMPTY {
                    mask[c / 8] |= 1 << (c % 8);
                }
            }
            out.extend_from_slice(&mask);
            for child in cs.iter().filter(|c| **c != Node::EMPTY) {
                encode_node(child, out);
            }
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], TreeError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| TreeError::Decode(format!("truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn byte(&mut self) -> Result<u8, TreeError> {
        Ok(self.take(1)?[0])
    }
}

pub(crate) fn decode(bytes: &[u8]) -> Result<HyperTree, TreeError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(TreeError::Decode("bad magic".into()));
    }
    let k = r.byte()? as usize;
    if k == 0 || k > MAX_DIM {
        return Err(TreeError::Dimension(k));
    }
    let max_depth = r.byte()? as u32;
    check_depth(k, max_depth)?;
    let periodic_mask = r.byte()?;
    let mut coords = Vec::with_capacity(2 * k);
    for _ in 0..2 * k {
        let raw: [u8; 8] = r.take(8)?.try_into().expect("8 bytes");
        coords.push(f64::from_le_bytes(raw));
    }
    let root_box = Bounds::new(&coords[..k], &coords[k..])?;
    let root = decode_node(&mut r, 1 << k, 0, max_depth)?;
    if r.pos != bytes.len() {
        return Err(TreeError::Decode(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    let mut tree = HyperTree::empty(root_box, max_depth)?;
    tree.root = root;
    for i in 0..k {
        tree.periodic[i] = periodic_mask >> i & 1 == 1;
    }
    Ok(tree)
}

fn decode_node(r: &mut Reader, fanout: usize, depth: u32, max_depth: u32) -> Result<Node, TreeError> {
    match r.byte()? {
        OUTSIDE => Ok(Node::EMPTY),
        INSIDE => Ok(Node::FULL),
        BRANCH if depth < max_depth => {
            let mask = r.take(fanout.div_ceil(8))?.to_vec();
            let mut children = Vec::with_capacity(fanout);
            for c in 0..fanout {
                if mask[c / 8] >> (c % 8) & 1 == 1 {
                    let child = decode_node(r, fanout, depth + 1, max_depth)?;
                    if child == Node::EMPTY {
                        return Err(TreeError::Decode("outside child flagged present".into()));
                    }
                    children.push(child);
                } else {
                    children.push(Node::EMPTY);
                }
            }
            match Node::branch(children) {
                Node::Leaf(_) => Err(TreeError::Decode("non-canonical branch".into())),
                n => Ok(n),
            }
        }
        BRANCH => Err(TreeError::Decode("branch below max depth".into())),
        t => Err(TreeError::Decode(format!("unknown node tag {t}"))),
    }
}
