//! Exact scalar arithmetic shared by the other modules.
//!
//! Integer determinants run in checked `i128` first and fall back to
//! `BigInt` on overflow, so results are exact for every input. Linear
//! algebra over fields is generic over [`Scalar`], implemented for the
//! rationals and for GF(2).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{CheckedMul, CheckedSub, One, Signed, Zero};

pub type Rational = BigRational;

/// A field usable by the elimination routines.
pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
{
    /// Short label used in reports: `"rational"` or `"gf2"`.
    const NAME: &'static str;

    fn from_i64(v: i64) -> Self;

    fn from_bigint(v: &BigInt) -> Self;

    /// Multiplicative inverse. Panics on zero.
    fn inverse(&self) -> Self;
}

impl Scalar for BigRational {
    const NAME: &'static str = "rational";

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_bigint(v: &BigInt) -> Self {
        BigRational::from_integer(v.clone())
    }

    fn inverse(&self) -> Self {
        self.recip()
    }
}

/// The two-element field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Gf2(pub bool);

impl fmt::Display for Gf2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.0 { "1" } else { "0" })
    }
}

impl Add for Gf2 {
    type Output = Gf2;
    fn add(self, rhs: Gf2) -> Gf2 {
        Gf2(self.0 ^ rhs.0)
    }
}

impl<'a> Add<&'a Gf2> for Gf2 {
    type Output = Gf2;
    fn add(self, rhs: &Gf2) -> Gf2 {
        self + *rhs
    }
}

impl Sub for Gf2 {
    type Output = Gf2;
    fn sub(self, rhs: Gf2) -> Gf2 {
        Gf2(self.0 ^ rhs.0)
    }
}

impl<'a> Sub<&'a Gf2> for Gf2 {
    type Output = Gf2;
    fn sub(self, rhs: &Gf2) -> Gf2 {
        self - *rhs
    }
}

impl Mul for Gf2 {
    type Output = Gf2;
    fn mul(self, rhs: Gf2) -> Gf2 {
        Gf2(self.0 & rhs.0)
    }
}

impl<'a> Mul<&'a Gf2> for Gf2 {
    type Output = Gf2;
    fn mul(self, rhs: &Gf2) -> Gf2 {
        self * *rhs
    }
}

impl Neg for Gf2 {
    type Output = Gf2;
    fn neg(self) -> Gf2 {
        self
    }
}

impl Zero for Gf2 {
    fn zero() -> Self {
        Gf2(false)
    }
    fn is_zero(&self) -> bool {
        !self.0
    }
}

impl One for Gf2 {
    fn one() -> Self {
        Gf2(true)
    }
}

impl Scalar for Gf2 {
    const NAME: &'static str = "gf2";

    fn from_i64(v: i64) -> Self {
        Gf2(v.rem_euclid(2) == 1)
    }

    fn from_bigint(v: &BigInt) -> Self {
        Gf2(v.mod_floor(&BigInt::from(2)).is_one())
    }

    fn inverse(&self) -> Self {
        assert!(self.0, "inverse of zero in GF(2)");
        *self
    }
}

/// Determinant of a `k × k` integer matrix stored row-major.
pub fn determinant(entries: &[i64], k: usize) -> BigInt {
    assert_eq!(entries.len(), k * k, "determinant needs a square matrix");
    if let Some(d) = small_determinant(entries, k) {
        return BigInt::from(d);
    }
    let big: Vec<BigInt> = entries.iter().map(|&v| BigInt::from(v)).collect();
    bareiss(big, k).expect("BigInt arithmetic does not overflow")
}

/// Determinant in checked `i128`, `None` if an intermediate overflows.
pub fn small_determinant(entries: &[i64], k: usize) -> Option<i128> {
    let e = |i: usize, j: usize| entries[i * k + j] as i128;
    match k {
        0 => Some(1),
        1 => Some(e(0, 0)),
        2 => e(0, 0).checked_mul(e(1, 1))?.checked_sub(e(0, 1).checked_mul(e(1, 0))?),
        3 => {
            let minor = |a: usize, b: usize| -> Option<i128> {
                e(1, a).checked_mul(e(2, b))?.checked_sub(e(1, b).checked_mul(e(2, a))?)
            };
            let t0 = e(0, 0).checked_mul(minor(1, 2)?)?;
            let t1 = e(0, 1).checked_mul(minor(0, 2)?)?;
            let t2 = e(0, 2).checked_mul(minor(0, 1)?)?;
            t0.checked_sub(t1)?.checked_add(t2)
        }
        _ => bareiss(entries.iter().map(|&v| v as i128).collect(), k),
    }
}

/// Fraction-free Gaussian elimination. Every division is exact.
fn bareiss<T>(mut a: Vec<T>, k: usize) -> Option<T>
where
    T: Integer + Signed + Clone + CheckedMul + CheckedSub,
{
    if k == 0 {
        return Some(T::one());
    }
    let mut negate = false;
    let mut prev = T::one();
    for p in 0..k {
        if a[p * k + p].is_zero() {
            let Some(r) = (p + 1..k).find(|&r| !a[r * k + p].is_zero()) else {
                return Some(T::zero());
            };
            for j in 0..k {
                a.swap(p * k + j, r * k + j);
            }
            negate = !negate;
        }
        for i in p + 1..k {
            for j in p + 1..k {
                let lhs = a[i * k + j].checked_mul(&a[p * k + p])?;
                let rhs = a[i * k + p].checked_mul(&a[p * k + j])?;
                a[i * k + j] = lhs.checked_sub(&rhs)? / prev.clone();
            }
            a[i * k + p] = T::zero();
        }
        prev = a[p * k + p].clone();
    }
    let det = a[k * k - 1].clone();
    Some(if negate { -det } else { det })
}

/// Reduces `rows` to reduced row echelon form in place and returns the
/// pivot column of each nonzero row, in order. Zero rows end up last.
pub fn row_reduce<F: Scalar>(rows: &mut [Vec<F>]) -> Vec<usize> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].inverse();
        if !inv.is_one() {
            for v in rows[r].iter_mut().skip(c) {
                *v = v.clone() * &inv;
            }
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row).skip(c) {
                if !pv.is_zero() {
                    *v = v.clone() - factor.clone() * pv;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Rank of a matrix over `F`.
pub fn rank<F: Scalar>(rows: &[Vec<F>]) -> usize {
    let mut copy = rows.to_vec();
    row_reduce(&mut copy).len()
}
