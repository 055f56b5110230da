//! Freeness of the torus action on the product of odd spheres, checked
//! through lattice arithmetic.
//!
//! `K = (S¹)^m` acts on `∏ S^{2n_i+1}`; on the coordinate `z^i_0` through
//! `g_i` and on `z^i_j` (`j ≥ 1`) through the character with exponent
//! vector `(a^i_{1j}, …, a^i_{mj})`. The stabilizer of a point depends only
//! on which coordinates are nonzero. It is the dual of `ℤ^m / L` where `L`
//! is spanned by the exponent vectors of the nonzero coordinates, so the
//! Smith normal form of those rows gives its free rank and torsion.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{CheckedMul, CheckedSub, One, Signed, Zero};
use serde_json::{json, Value};

use crate::charmat::{to_json_int, CoefficientMode, VectorMatrix};
use crate::error::{Error, Result};

/// Invariant factors `d_1 | d_2 | …` (nonnegative, length `min(rows, cols)`)
/// of an integer matrix given by rows. Trailing zeros mark rank deficiency.
pub fn smith_normal_form(rows: &[Vec<i64>]) -> Vec<BigInt> {
    let ncols = rows.first().map_or(0, Vec::len);
    assert!(rows.iter().all(|r| r.len() == ncols), "ragged matrix");
    let small: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
    if let Some(d) = snf_diagonal(small) {
        return d.into_iter().map(BigInt::from).collect();
    }
    let big: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
    snf_diagonal(big).expect("BigInt arithmetic does not overflow")
}

/// [`smith_normal_form`] for arbitrary-precision entries.
pub fn smith_normal_form_big(rows: &[Vec<BigInt>]) -> Vec<BigInt> {
    let ncols = rows.first().map_or(0, Vec::len);
    assert!(rows.iter().all(|r| r.len() == ncols), "ragged matrix");
    let small: Option<Vec<Vec<i128>>> =
        rows.iter().map(|r| r.iter().map(|v| i64::try_from(v).ok().map(i128::from)).collect()).collect();
    if let Some(d) = small.and_then(snf_diagonal) {
        return d.into_iter().map(BigInt::from).collect();
    }
    snf_diagonal(rows.to_vec()).expect("BigInt arithmetic does not overflow")
}

/// Diagonalizes by unimodular row and column operations, always pivoting
/// on the smallest nonzero absolute value left. `None` on overflow.
fn snf_diagonal<T>(mut a: Vec<Vec<T>>) -> Option<Vec<T>>
where
    T: Integer + Signed + Clone + CheckedMul + CheckedSub,
{
    let nrows = a.len();
    let ncols = a.first().map_or(0, Vec::len);
    let size = nrows.min(ncols);
    let mut diag = Vec::with_capacity(size);
    for t in 0..size {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..nrows {
                for j in t..ncols {
                    if !a[i][j].is_zero() && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                diag.resize(size, T::zero());
                return Some(diag);
            };
            a.swap(t, pi);
            for row in a.iter_mut() {
                row.swap(t, pj);
            }

            let mut clean = true;
            for i in t + 1..nrows {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].div_floor(&a[t][t]);
                for j in t..ncols {
                    let sub = q.checked_mul(&a[t][j])?;
                    a[i][j] = a[i][j].checked_sub(&sub)?;
                }
                clean &= a[i][t].is_zero();
            }
            for j in t + 1..ncols {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].div_floor(&a[t][t]);
                for row in a.iter_mut().skip(t) {
                    let sub = q.checked_mul(&row[t])?;
                    row[j] = row[j].checked_sub(&sub)?;
                }
                clean &= a[t][j].is_zero();
            }
            if !clean {
                continue;
            }
            // The pivot must divide the rest of the block; otherwise fold
            // an offending row into row t and start over.
            let offending = (t + 1..nrows).find(|&i| (t + 1..ncols).any(|j| !a[i][j].is_multiple_of(&a[t][t])));
            match offending {
                Some(i) => {
                    for j in t..ncols {
                        a[t][j] = a[t][j].clone() + a[i][j].clone();
                    }
                }
                None => break,
            }
        }
        diag.push(a[t][t].abs());
    }
    Some(diag)
}

/// Which homogeneous coordinates are nonzero, per factor: `P_i ⊆ {0, …, n_i}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoordinatePattern(Vec<Vec<usize>>);

impl CoordinatePattern {
    pub fn new(a: &VectorMatrix, pattern: Vec<Vec<usize>>) -> Result<Self> {
        let dims = a.shape().dims();
        if pattern.len() != dims.len() {
            return Err(Error::IndexOutOfRange(format!(
                "pattern has {} factors, matrix has {}",
                pattern.len(),
                dims.len()
            )));
        }
        for (i, (p, &n)) in pattern.iter().zip(dims).enumerate() {
            if p.is_empty() {
                return Err(Error::IndexOutOfRange(format!(
                    "factor {} has no nonzero coordinate; points lie on a sphere",
                    i + 1
                )));
            }
            if let Some(&j) = p.iter().find(|&&j| j > n) {
                return Err(Error::IndexOutOfRange(format!("coordinate {j} of factor {} exceeds n = {n}", i + 1)));
            }
        }
        Ok(CoordinatePattern(pattern))
    }

    pub fn coordinates(&self) -> &[Vec<usize>] {
        &self.0
    }
}

/// An abelian group `ℤ^free_rank ⊕ ⊕ ℤ/d`, reported through its character
/// lattice: the stabilizer is `(S¹)^free_rank × ∏ ℤ/d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsotropyGroup {
    pub free_rank: usize,
    pub torsion: Vec<BigInt>,
}

impl IsotropyGroup {
    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "free_rank": self.free_rank,
            "torsion": self.torsion.iter().map(to_json_int).collect::<Vec<_>>(),
            "trivial": self.is_trivial(),
        })
    }
}

fn require_integer(a: &VectorMatrix) -> Result<()> {
    match a.mode() {
        CoefficientMode::Integer => Ok(()),
        CoefficientMode::Gf2 => Err(Error::ModeMismatch { expected: "integer" }),
    }
}

/// Exponent rows of the characters acting on the nonzero coordinates.
pub fn relation_rows(a: &VectorMatrix, pattern: &CoordinatePattern) -> Vec<Vec<i64>> {
    let m = a.factors();
    let mut rows = Vec::new();
    for (i, coords) in pattern.coordinates().iter().enumerate() {
        for &j in coords {
            if j == 0 {
                let mut e = vec![0; m];
                e[i] = 1;
                rows.push(e);
            } else {
                rows.push((0..m).map(|k| a.entry(k, i, j - 1)).collect());
            }
        }
    }
    rows
}

fn group_of_rows(m: usize, rows: &[Vec<i64>]) -> IsotropyGroup {
    let factors = smith_normal_form(rows);
    let rank = factors.iter().filter(|d| !d.is_zero()).count();
    IsotropyGroup {
        free_rank: m - rank,
        torsion: factors.into_iter().filter(|d| !d.is_zero() && !d.is_one()).collect(),
    }
}

/// Stabilizer of any point with the given nonzero-coordinate pattern.
pub fn isotropy_of_pattern(a: &VectorMatrix, pattern: &CoordinatePattern) -> Result<IsotropyGroup> {
    require_integer(a)?;
    Ok(group_of_rows(a.factors(), &relation_rows(a, pattern)))
}

/// True iff every point has trivial stabilizer. Enlarging a pattern only
/// adds rows, so the `∏ (n_i + 1)` singleton patterns suffice.
pub fn is_action_free(a: &VectorMatrix) -> Result<bool> {
    require_integer(a)?;
    for v in a.shape().vertices() {
        let pattern = CoordinatePattern(v.0.iter().map(|&j| vec![j]).collect());
        if !group_of_rows(a.factors(), &relation_rows(a, &pattern)).is_trivial() {
            return Ok(false);
        }
    }
    Ok(true)
}
