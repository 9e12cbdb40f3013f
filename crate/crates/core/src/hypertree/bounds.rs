use serde::{Deserialize, Serialize};

use super::TreeError;

/// Largest supported tree dimension (a node then has 256 children).
pub const MAX_DIM: usize = 8;

/// Axis-aligned box in `k` dimensions.
///
/// Child boxes are produced by [`Bounds::child`], which bisects every axis at
/// `(lo + hi) / 2`. All code that needs a node's extent derives it through
/// repeated calls to `child`, so sibling boxes share bit-identical faces.
#[derive(Clone, Copy, PartialEq)]
pub struct Bounds {
    k: usize,
    lo: [f64; MAX_DIM],
    hi: [f64; MAX_DIM],
}

impl Bounds {
    pub fn new(lo: &[f64], hi: &[f64]) -> Result<Self, TreeError> {
        let k = lo.len();
        if k == 0 || k > MAX_DIM {
            return Err(TreeError::Dimension(k));
        }
        if hi.len() != k {
            return Err(TreeError::DegenerateBox(format!("lo has {} axes but hi has {}", k, hi.len())));
        }
        let mut b = Bounds { k, lo: [0.0; MAX_DIM], hi: [0.0; MAX_DIM] };
        for i in 0..k {
            if !(lo[i].is_finite() && hi[i].is_finite() && lo[i] < hi[i]) {
                return Err(TreeError::DegenerateBox(format!("axis {i}: [{}, {}]", lo[i], hi[i])));
            }
            b.lo[i] = lo[i];
            b.hi[i] = hi[i];
        }
        Ok(b)
    }

    /// Unit cube `[0, 1]^k`.
    pub fn unit(k: usize) -> Result<Self, TreeError> {
        Self::new(&vec![0.0; k], &vec![1.0; k])
    }

    /// Cartesian product of `self` and `other`, axes of `self` first.
    pub fn product(&self, other: &Bounds) -> Result<Self, TreeError> {
        let mut lo = self.lo().to_vec();
        lo.extend_from_slice(other.lo());
        let mut hi = self.hi().to_vec();
        hi.extend_from_slice(other.hi());
        Self::new(&lo, &hi)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn lo(&self) -> &[f64] {
        &self.lo[..self.k]
    }

    #[inline]
    pub fn hi(&self) -> &[f64] {
        &self.hi[..self.k]
    }

    #[inline]
    pub fn width(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    #[inline]
    pub fn mid(&self, axis: usize) -> f64 {
        0.5 * (self.lo[axis] + self.hi[axis])
    }

    pub fn center(&self) -> Vec<f64> {
        (0..self.k).map(|i| self.mid(i)).collect()
    }

    pub fn volume(&self) -> f64 {
        (0..self.k).map(|i| self.width(i)).product()
    }

    pub fn diagonal(&self) -> f64 {
        (0..self.k).map(|i| self.width(i).powi(2)).sum::<f64>().sqrt()
    }

    /// Child box `index`: bit `i` of `index` selects the upper half of axis `i`.
    #[inline]
    pub fn child(&self, index: usize) -> Bounds {
        let mut c = *self;
        for i in 0..self.k {
            let m = self.mid(i);
            if index >> i & 1 == 1 {
                c.lo[i] = m;
            } else {
                c.hi[i] = m;
            }
        }
        c
    }

    /// Closed-box membership.
    pub fn contains_point(&self, p: &[f64]) -> bool {
        p.len() == self.k && (0..self.k).all(|i| self.lo[i] <= p[i] && p[i] <= self.hi[i])
    }

    pub fn contains_box(&self, other: &Bounds) -> bool {
        self.k == other.k && (0..self.k).all(|i| self.lo[i] <= other.lo[i] && other.hi[i] <= self.hi[i])
    }

    /// True when the intersection has positive volume.
    pub fn overlaps(&self, other: &Bounds) -> bool {
        self.k == other.k && (0..self.k).all(|i| self.lo[i] < other.hi[i] && other.lo[i] < self.hi[i])
    }

    /// Sub-box over the listed axes, in the listed order.
    pub fn restrict(&self, axes: &[usize]) -> Result<Bounds, TreeError> {
        let lo: Vec<f64> = axes.iter().map(|&a| self.lo[a]).collect();
        let hi: Vec<f64> = axes.iter().map(|&a| self.hi[a]).collect();
        Bounds::new(&lo, &hi)
    }

    /// Box grown by `margin[i]` on both sides of axis `i`.
    pub fn inflate(&self, margin: &[f64]) -> Bounds {
        let mut b = *self;
        for i in 0..self.k {
            b.lo[i] -= margin[i];
            b.hi[i] += margin[i];
        }
        b
    }
}

impl std::fmt::Debug for Bounds {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let axes: Vec<String> = (0..self.k).map(|i| format!("[{}, {}]", self.lo[i], self.hi[i])).collect();
        write!(f, "Bounds({})", axes.join(" x "))
    }
}

#[derive(Serialize, Deserialize)]
struct BoundsRepr {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Serialize for Bounds {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        BoundsRepr { lo: self.lo().to_vec(), hi: self.hi().to_vec() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Bounds {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = BoundsRepr::deserialize(d)?;
        Bounds::new(&r.lo, &r.hi).map_err(serde::de::Error::custom)
    }
}
