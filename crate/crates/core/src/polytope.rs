//! Products of simplices and the index sets attached to them.
//!
//! The factor `Δ^{n_i}` has vertices `v^i_0, …, v^i_{n_i}` and facets
//! `F^i_0, …, F^i_{n_i}` (`F^i_k` is opposite `v^i_k`). A vertex of the
//! product is a label `(j_1, …, j_m)` with `0 ≤ j_i ≤ n_i`; those labels are
//! 0-based everywhere. A [`MultiIndex`] instead picks one coordinate inside
//! each block column; its entries are stored 0-based and rendered 1-based.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The tuple `(n_1, …, n_m)` describing `Δ^{n_1} × … × Δ^{n_m}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Shape {
    dims: Vec<usize>,
}

impl Shape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidShape("a shape needs at least one factor".into()));
        }
        if let Some(pos) = dims.iter().position(|&d| d == 0) {
            return Err(Error::InvalidShape(format!(
                "factor {} has dimension 0; every simplex must have dimension >= 1",
                pos + 1
            )));
        }
        Ok(Shape { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of simplex factors `m`.
    pub fn factors(&self) -> usize {
        self.dims.len()
    }

    /// Dimension `n = Σ n_i` of the polytope.
    pub fn dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn facet_count(&self) -> usize {
        self.dim() + self.factors()
    }

    pub fn vertex_count(&self) -> usize {
        self.dims.iter().map(|d| d + 1).product()
    }

    pub fn multi_index_count(&self) -> usize {
        self.dims.iter().product()
    }

    /// Column offset of block `j` in the flattened `m × n` layout.
    pub fn offset(&self, j: usize) -> usize {
        self.dims[..j].iter().sum()
    }

    /// The shape with factor `j` removed. Fails when only one factor exists.
    pub fn without(&self, j: usize) -> Result<Shape> {
        if self.factors() < 2 {
            return Err(Error::SingleFactor);
        }
        if j >= self.factors() {
            return Err(Error::IndexOutOfRange(format!(
                "factor {} of a {}-factor shape",
                j + 1,
                self.factors()
            )));
        }
        let mut dims = self.dims.clone();
        dims.remove(j);
        Ok(Shape { dims })
    }

    /// Lazy iterator over vertex labels, first factor varying fastest
    /// (`v_00, v_10, v_20, v_01, …`).
    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        Odometer::new(self.dims.iter().map(|&d| d + 1).collect(), false).map(Vertex)
    }

    /// Lazy iterator over multi-indices in lexicographic order.
    pub fn multi_indices(&self) -> impl Iterator<Item = MultiIndex> + '_ {
        Odometer::new(self.dims.clone(), true).map(MultiIndex)
    }
}

impl TryFrom<Vec<usize>> for Shape {
    type Error = Error;
    fn try_from(dims: Vec<usize>) -> Result<Self> {
        Shape::new(dims)
    }
}

impl From<Shape> for Vec<usize> {
    fn from(shape: Shape) -> Self {
        shape.dims
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A vertex `v_{j_1 … j_m}` of the product, `0 ≤ j_i ≤ n_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex(pub Vec<usize>);

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("v_")?;
        for j in &self.0 {
            write!(f, "{j}")?;
        }
        Ok(())
    }
}

/// One coordinate `k_j` chosen inside each block column; entries 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(shape: &Shape, entries: Vec<usize>) -> Result<Self> {
        if entries.len() != shape.factors() {
            return Err(Error::IndexOutOfRange(format!(
                "multi-index has {} entries, shape has {} factors",
                entries.len(),
                shape.factors()
            )));
        }
        for (j, (&k, &n)) in entries.iter().zip(shape.dims()).enumerate() {
            if k >= n {
                return Err(Error::IndexOutOfRange(format!(
                    "entry {} of multi-index is {} but block {} has {} components",
                    j + 1,
                    k + 1,
                    j + 1,
                    n
                )));
            }
        }
        Ok(MultiIndex(entries))
    }

    /// Builds from 1-based entries as written in the math.
    pub fn from_one_based(shape: &Shape, entries: &[usize]) -> Result<Self> {
        if entries.contains(&0) {
            return Err(Error::IndexOutOfRange("multi-index entries are 1-based".into()));
        }
        Self::new(shape, entries.iter().map(|k| k - 1).collect())
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|k| k + 1).collect()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.one_based().iter().map(|k| k.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Mixed-radix counter over `0..radix[0] × 0..radix[1] × …`.
struct Odometer {
    radix: Vec<usize>,
    current: Option<Vec<usize>>,
    last_fastest: bool,
}

impl Odometer {
    fn new(radix: Vec<usize>, last_fastest: bool) -> Self {
        let current = if radix.iter().all(|&r| r > 0) {
            Some(vec![0; radix.len()])
        } else {
            None
        };
        Odometer { radix, current, last_fastest }
    }
}

impl Iterator for Odometer {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().unwrap();
        let len = cur.len();
        let mut carried = true;
        for step in 0..len {
            let pos = if self.last_fastest { len - 1 - step } else { step };
            cur[pos] += 1;
            if cur[pos] < self.radix[pos] {
                carried = false;
                break;
            }
            cur[pos] = 0;
        }
        if carried {
            self.current = None;
        }
        Some(out)
    }
}
