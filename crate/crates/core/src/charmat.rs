//! Vector matrices: the encoding of a characteristic function over a
//! product of simplices.
//!
//! With the `n` facets `F^i_k` (`k ≥ 1`) sent to the standard basis, the
//! characteristic function is determined by the images `a_1, …, a_m` of
//! the facets `F^i_0`. Splitting each row `a_i ∈ ℤ^n` into blocks of
//! lengths `n_1, …, n_m` gives an `m × m` matrix whose `(i, j)` entry is the
//! vector `a_i^j ∈ ℤ^{n_j}`. The map is a valid characteristic function iff
//! every principal minor of every scalar submatrix `A_{k_1…k_m}` is a unit.
//!
//! JSON form: `{"blocks": [[[…], …], …], "mode": "int" | "gf2", "shape": [n1, …]}`
//! where `blocks[i][j]` is `a_{i+1}^{j+1}`. Keys are written in sorted
//! order; unknown keys are ignored when reading, so reports that embed a
//! matrix at top level can be fed back in.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact::determinant;
use crate::polytope::{MultiIndex, Shape};

/// Quasitoric manifolds use integer coefficients, small covers GF(2).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CoefficientMode {
    #[serde(rename = "int")]
    Integer,
    #[serde(rename = "gf2")]
    Gf2,
}

impl CoefficientMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CoefficientMode::Integer => "int",
            CoefficientMode::Gf2 => "gf2",
        }
    }
}

/// An `m × m` vector matrix over `ℤ` or GF(2).
///
/// Stored as the flattened `m × n` integer matrix. In GF(2) mode every
/// entry is 0 or 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct VectorMatrix {
    shape: Shape,
    mode: CoefficientMode,
    entries: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    blocks: Vec<Vec<Vec<i64>>>,
    mode: CoefficientMode,
    shape: Shape,
}

impl TryFrom<MatrixJson> for VectorMatrix {
    type Error = Error;
    fn try_from(raw: MatrixJson) -> Result<Self> {
        VectorMatrix::from_blocks(raw.shape, raw.mode, &raw.blocks)
    }
}

impl From<VectorMatrix> for MatrixJson {
    fn from(a: VectorMatrix) -> Self {
        MatrixJson {
            blocks: a.blocks(),
            mode: a.mode,
            shape: a.shape,
        }
    }
}

/// One principal minor: the determinant of the `subset × subset` principal
/// submatrix of `A_{multi_index}`. `subset` is sorted and 0-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinorRecord {
    pub multi_index: MultiIndex,
    pub subset: Vec<usize>,
    pub value: BigInt,
}

impl MinorRecord {
    pub fn to_json(&self) -> Value {
        json!({
            "multi_index": self.multi_index.one_based(),
            "subset": self.subset.iter().map(|i| i + 1).collect::<Vec<_>>(),
            "value": to_json_int(&self.value),
        })
    }
}

impl fmt::Display for MinorRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.subset.iter().map(|i| (i + 1).to_string()).collect();
        write!(f, "k={} S={{{}}} det={}", self.multi_index, s.join(","), self.value)
    }
}

/// All principal minors, multi-indices in lexicographic order and subsets
/// ordered by size then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinorReport {
    pub records: Vec<MinorRecord>,
}

impl MinorReport {
    pub fn to_json(&self) -> Value {
        json!({ "minors": self.records.iter().map(MinorRecord::to_json).collect::<Vec<_>>() })
    }
}

/// Outcome of [`VectorMatrix::is_valid`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Validity {
    pub valid: bool,
    /// First minor that is not a unit, in report order.
    pub violation: Option<MinorRecord>,
}

impl Validity {
    pub fn to_json(&self) -> Value {
        match &self.violation {
            None => json!({ "valid": self.valid }),
            Some(v) => json!({ "valid": self.valid, "violation": v.to_json() }),
        }
    }
}

/// Scalar columns negated by [`VectorMatrix::normalize_signs`], as 0-based
/// `(block, component)` pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SignFlips(pub Vec<(usize, usize)>);

impl SignFlips {
    pub fn to_json(&self) -> Value {
        Value::Array(self.0.iter().map(|&(j, p)| json!([j + 1, p + 1])).collect())
    }
}

/// Integers fit in JSON numbers whenever they fit in i64.
pub(crate) fn to_json_int(v: &BigInt) -> Value {
    match i64::try_from(v) {
        Ok(x) => json!(x),
        Err(_) => json!(v.to_string()),
    }
}

/// Nonempty subsets of `0..m`, by size and then lexicographically.
pub(crate) fn subsets(m: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (1u32..(1 << m))
        .map(|mask| (0..m).filter(|&i| mask & (1 << i) != 0).collect())
        .collect();
    out.sort_by(|a: &Vec<usize>, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

impl VectorMatrix {
    /// Builds from block vectors: `blocks[i][j]` must have length `n_j`.
    pub fn from_blocks(shape: Shape, mode: CoefficientMode, blocks: &[Vec<Vec<i64>>]) -> Result<Self> {
        let m = shape.factors();
        if blocks.len() != m {
            return Err(Error::MalformedMatrix(format!("expected {m} block rows, found {}", blocks.len())));
        }
        let mut entries = Vec::with_capacity(m * shape.dim());
        for (i, row) in blocks.iter().enumerate() {
            if row.len() != m {
                return Err(Error::MalformedMatrix(format!(
                    "block row {} has {} blocks, expected {m}",
                    i + 1,
                    row.len()
                )));
            }
            for (j, block) in row.iter().enumerate() {
                let nj = shape.dims()[j];
                if block.len() != nj {
                    return Err(Error::MalformedMatrix(format!(
                        "block ({},{}) has length {}, expected n_{} = {nj}",
                        i + 1,
                        j + 1,
                        block.len(),
                        j + 1
                    )));
                }
                entries.extend_from_slice(block);
            }
        }
        Self::from_flat(shape, mode, entries)
    }

    /// Builds from the flattened `m × n` rows `a_1, …, a_m`.
    pub fn from_rows(shape: Shape, mode: CoefficientMode, rows: &[Vec<i64>]) -> Result<Self> {
        let (m, n) = (shape.factors(), shape.dim());
        if rows.len() != m || rows.iter().any(|r| r.len() != n) {
            return Err(Error::MalformedMatrix(format!("expected {m} rows of length {n}")));
        }
        Self::from_flat(shape, mode, rows.concat())
    }

    pub(crate) fn from_flat(shape: Shape, mode: CoefficientMode, entries: Vec<i64>) -> Result<Self> {
        debug_assert_eq!(entries.len(), shape.factors() * shape.dim());
        if mode == CoefficientMode::Gf2 {
            if let Some(v) = entries.iter().find(|&&v| v != 0 && v != 1) {
                return Err(Error::MalformedMatrix(format!("gf2 entries must be 0 or 1, found {v}")));
            }
        }
        Ok(VectorMatrix { shape, mode, entries })
    }

    /// Diagonal blocks `𝟏`, off-diagonal blocks `𝟎`: the product of
    /// projective spaces.
    pub fn identity(shape: Shape, mode: CoefficientMode) -> Self {
        let (m, n) = (shape.factors(), shape.dim());
        let mut entries = vec![0; m * n];
        for i in 0..m {
            let off = shape.offset(i);
            for p in 0..shape.dims()[i] {
                entries[i * n + off + p] = 1;
            }
        }
        VectorMatrix { shape, mode, entries }
    }

    pub(crate) fn flat(&self) -> &[i64] {
        &self.entries
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn mode(&self) -> CoefficientMode {
        self.mode
    }

    pub fn factors(&self) -> usize {
        self.shape.factors()
    }

    /// Component `p` of the block vector `a_i^j` (all 0-based).
    pub fn entry(&self, i: usize, j: usize, p: usize) -> i64 {
        self.entries[i * self.shape.dim() + self.shape.offset(j) + p]
    }

    pub fn block(&self, i: usize, j: usize) -> &[i64] {
        let n = self.shape.dim();
        let start = i * n + self.shape.offset(j);
        &self.entries[start..start + self.shape.dims()[j]]
    }

    /// Row `a_i ∈ ℤ^n`.
    pub fn row(&self, i: usize) -> &[i64] {
        let n = self.shape.dim();
        &self.entries[i * n..(i + 1) * n]
    }

    pub fn blocks(&self) -> Vec<Vec<Vec<i64>>> {
        let m = self.factors();
        (0..m).map(|i| (0..m).map(|j| self.block(i, j).to_vec()).collect()).collect()
    }

    pub fn is_zero_block(&self, i: usize, j: usize) -> bool {
        self.block(i, j).iter().all(|&v| v == 0)
    }

    /// True when every diagonal component `a^i_{ik}` equals 1.
    pub fn is_normalized(&self) -> bool {
        (0..self.factors()).all(|i| self.block(i, i).iter().all(|&v| v == 1))
    }

    /// Reduces entries mod 2.
    pub fn to_gf2(&self) -> VectorMatrix {
        VectorMatrix {
            shape: self.shape.clone(),
            mode: CoefficientMode::Gf2,
            entries: self.entries.iter().map(|v| v.rem_euclid(2)).collect(),
        }
    }

    /// The `m × m` scalar matrix `A_{k_1…k_m}` whose column `j` is column
    /// `k_j` of block column `j`.
    pub fn submatrix(&self, k: &MultiIndex) -> Result<Vec<Vec<i64>>> {
        let k = MultiIndex::new(&self.shape, k.entries().to_vec())?;
        let m = self.factors();
        Ok((0..m)
            .map(|i| (0..m).map(|j| self.entry(i, j, k.entries()[j])).collect())
            .collect())
    }

    fn minor(&self, k: &[usize], subset: &[usize], buf: &mut Vec<i64>) -> BigInt {
        buf.clear();
        for &r in subset {
            for &c in subset {
                buf.push(self.entry(r, c, k[c]));
            }
        }
        let det = determinant(buf, subset.len());
        match self.mode {
            CoefficientMode::Integer => det,
            CoefficientMode::Gf2 => BigInt::from(if det.is_odd() { 1 } else { 0 }),
        }
    }

    fn is_unit(&self, value: &BigInt) -> bool {
        match self.mode {
            CoefficientMode::Integer => value.abs().is_one(),
            CoefficientMode::Gf2 => value.is_one(),
        }
    }

    /// Every principal minor of every `A_{k_1…k_m}`. GF(2) values are
    /// reduced mod 2.
    pub fn principal_minors(&self) -> MinorReport {
        let subsets = subsets(self.factors());
        let mut buf = Vec::new();
        let mut records = Vec::new();
        for k in self.shape.multi_indices() {
            for s in &subsets {
                let value = self.minor(k.entries(), s, &mut buf);
                records.push(MinorRecord {
                    multi_index: k.clone(),
                    subset: s.clone(),
                    value,
                });
            }
        }
        MinorReport { records }
    }

    /// Integer mode: all principal minors are `±1`. GF(2): all equal 1.
    pub fn is_valid(&self) -> Validity {
        let subsets = subsets(self.factors());
        let mut buf = Vec::new();
        for k in self.shape.multi_indices() {
            for s in &subsets {
                let value = self.minor(k.entries(), s, &mut buf);
                if !self.is_unit(&value) {
                    return Validity {
                        valid: false,
                        violation: Some(MinorRecord {
                            multi_index: k,
                            subset: s.clone(),
                            value,
                        }),
                    };
                }
            }
        }
        Validity { valid: true, violation: None }
    }

    /// Negates each scalar column whose diagonal component is `-1`. Columns
    /// are negated in full, which multiplies each affected minor by `-1`, so
    /// validity is unchanged. GF(2) matrices are returned unchanged.
    pub fn normalize_signs(&self) -> Result<(VectorMatrix, SignFlips)> {
        if self.mode == CoefficientMode::Gf2 {
            return Ok((self.clone(), SignFlips::default()));
        }
        let mut out = self.clone();
        let mut flips = Vec::new();
        let n = self.shape.dim();
        for j in 0..self.factors() {
            for (p, &d) in self.block(j, j).iter().enumerate() {
                match d {
                    1 => {}
                    -1 => {
                        let col = self.shape.offset(j) + p;
                        for i in 0..self.factors() {
                            out.entries[i * n + col] = -out.entries[i * n + col];
                        }
                        flips.push((j, p));
                    }
                    value => {
                        return Err(Error::InvalidDiagonal {
                            block: j + 1,
                            component: p + 1,
                            value,
                        })
                    }
                }
            }
        }
        Ok((out, SignFlips(flips)))
    }

    /// The `(n+m) × n` matrix of all facet images: the rows `a_1, …, a_m`
    /// (facets `F^1_0, …, F^m_0`) over `I_n` (facets `F^1_1, …, F^m_{n_m}`).
    pub fn characteristic_matrix(&self) -> Vec<Vec<i64>> {
        let n = self.shape.dim();
        let mut rows: Vec<Vec<i64>> = (0..self.factors()).map(|i| self.row(i).to_vec()).collect();
        for r in 0..n {
            let mut e = vec![0; n];
            e[r] = 1;
            rows.push(e);
        }
        rows
    }

    /// Deletes row `j` and block column `j`: the matrix of the facial
    /// submanifold over the product without factor `j`.
    pub fn delete_factor(&self, j: usize) -> Result<VectorMatrix> {
        let shape = self.shape.without(j)?;
        let blocks: Vec<Vec<Vec<i64>>> = (0..self.factors())
            .filter(|&i| i != j)
            .map(|i| {
                (0..self.factors())
                    .filter(|&c| c != j)
                    .map(|c| self.block(i, c).to_vec())
                    .collect()
            })
            .collect();
        VectorMatrix::from_blocks(shape, self.mode, &blocks)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("matrix serializes")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("matrix serializes")
    }

    pub fn from_json_str(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

impl fmt::Display for VectorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.factors() {
            let blocks: Vec<String> = (0..self.factors())
                .map(|j| {
                    let parts: Vec<String> = self.block(i, j).iter().map(|v| v.to_string()).collect();
                    format!("({})", parts.join(","))
                })
                .collect();
            writeln!(f, "[{}]", blocks.join(" "))?;
        }
        Ok(())
    }
}
