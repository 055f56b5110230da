//! The cohomology ring `F[y_1, …, y_m] / (g_1, …, g_m)` with
//!
//! ```text
//! g_k = y_k · ∏_{j=1}^{n_k} ( Σ_i a^k_{ij} y_i )
//! ```
//!
//! where `a^k_{ij}` is component `j` of the block `a_i^k`, so `g_k` reads the
//! coefficients of block column `k`.
//!
//! Each graded piece is computed by exact linear elimination: the degree-`d`
//! part of the ideal is spanned by `μ · g_k` over monomials `μ` of degree
//! `d - n_k - 1`, and every degree-`d` monomial is rewritten in the fixed
//! basis `{ y^e : e_k ≤ n_k }`. The elimination must leave exactly that
//! basis, whose size is the coefficient of `t^d` in `∏ (1 + t + … + t^{n_i})`;
//! anything else aborts with [`Error::RankMismatch`].

mod product;
mod search;

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde_json::{json, Value};

pub use product::{product_structure, DisproofCertificate, ProductSearchOutcome};
pub use search::{rational_grid, search_nilpotents, NilpotentSearch};

use crate::charmat::{to_json_int, CoefficientMode, VectorMatrix};
use crate::error::{Error, Result};
use crate::exact::{row_reduce, Rational, Scalar};
use crate::isotropy::smith_normal_form_big;
use crate::polytope::Shape;

/// Exponent vector of a monomial in `y_1, …, y_m`.
pub type Monomial = Vec<u32>;

/// Integer polynomial, sparse in monomials.
pub type IntPolynomial = BTreeMap<Monomial, BigInt>;

pub type RationalRing = GradedRing<Rational>;

static NEXT_RING_ID: AtomicU64 = AtomicU64::new(1);

/// All monomials of total degree `d` in `m` variables, lexicographically
/// descending (`y_1^d` first).
pub fn monomials(m: usize, d: usize) -> Vec<Monomial> {
    fn go(m: usize, left: u32, cur: &mut Monomial, out: &mut Vec<Monomial>) {
        if cur.len() + 1 == m {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for e in (0..=left).rev() {
            cur.push(e);
            go(m, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if m > 0 {
        go(m, d as u32, &mut Vec::with_capacity(m), &mut out);
    }
    out
}

fn in_basis(e: &[u32], dims: &[usize]) -> bool {
    e.iter().zip(dims).all(|(&x, &n)| x as usize <= n)
}

fn mul_monomial(a: &[u32], b: &[u32]) -> Monomial {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Coefficients of `∏ (1 + t + … + t^{n_i})`.
pub fn poincare_polynomial(shape: &Shape) -> Vec<usize> {
    let mut coeffs = vec![1usize];
    for &n in shape.dims() {
        let mut next = vec![0; coeffs.len() + n];
        for (i, &c) in coeffs.iter().enumerate() {
            for slot in next.iter_mut().skip(i).take(n + 1) {
                *slot += c;
            }
        }
        coeffs = next;
    }
    coeffs
}

/// The relations `g_1, …, g_m` with integer coefficients.
pub fn relations(a: &VectorMatrix) -> Vec<IntPolynomial> {
    let m = a.factors();
    (0..m)
        .map(|k| {
            let mut unit = vec![0u32; m];
            unit[k] = 1;
            let mut poly: IntPolynomial = BTreeMap::from([(unit, BigInt::one())]);
            for j in 0..a.shape().dims()[k] {
                let mut next = IntPolynomial::new();
                for (mono, c) in &poly {
                    for i in 0..m {
                        let coeff = a.entry(i, k, j);
                        if coeff == 0 {
                            continue;
                        }
                        let mut e = mono.clone();
                        e[i] += 1;
                        *next.entry(e).or_insert_with(BigInt::zero) += c * BigInt::from(coeff);
                    }
                }
                next.retain(|_, c| !c.is_zero());
                poly = next;
            }
            poly
        })
        .collect()
}

/// Span of the degree-`d` part of the ideal, as rows over `monomials`
/// (indexed by `index`).
fn ideal_rows(
    relations: &[IntPolynomial],
    dims: &[usize],
    d: usize,
    index: &HashMap<Monomial, usize>,
) -> Vec<Vec<BigInt>> {
    let m = dims.len();
    let mut rows = Vec::new();
    for (k, g) in relations.iter().enumerate() {
        let gdeg = dims[k] + 1;
        if gdeg > d {
            continue;
        }
        for mu in monomials(m, d - gdeg) {
            let mut row = vec![BigInt::zero(); index.len()];
            for (e, c) in g {
                row[index[&mul_monomial(&mu, e)]] += c;
            }
            rows.push(row);
        }
    }
    rows
}

#[derive(Clone, Debug)]
struct DegreePiece<F> {
    index: HashMap<Monomial, usize>,
    basis: Vec<Monomial>,
    /// Coordinates over `basis` of every monomial in `monomials`.
    reduction: Vec<Vec<F>>,
}

/// Homogeneous element of a [`GradedRing`].
#[derive(Clone, Debug, PartialEq)]
pub struct RingElement<F> {
    ring_id: u64,
    degree: usize,
    coords: Vec<F>,
}

impl<F: Scalar> RingElement<F> {
    /// Degree in the `y` variables; cohomological degree is twice this for
    /// quasitoric manifolds and equal to it for small covers.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Coordinates over the degree's monomial basis (empty above the top
    /// degree).
    pub fn coords(&self) -> &[F] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }
}

/// The graded ring attached to a valid, sign-normalized vector matrix.
#[derive(Clone, Debug)]
pub struct GradedRing<F> {
    id: u64,
    matrix: VectorMatrix,
    relations: Vec<IntPolynomial>,
    pieces: Vec<DegreePiece<F>>,
}

/// Builds the ring over `F` (rationals or GF(2)).
pub fn build_ring<F: Scalar>(a: &VectorMatrix) -> Result<GradedRing<F>> {
    if a.mode() == CoefficientMode::Gf2 && F::NAME != "gf2" {
        return Err(Error::ModeMismatch { expected: "integer" });
    }
    if a.mode() == CoefficientMode::Integer && !a.is_normalized() {
        return Err(Error::NotNormalized);
    }
    if !a.is_valid().valid {
        return Err(Error::NotValid);
    }
    build_unchecked(a)
}

fn build_unchecked<F: Scalar>(a: &VectorMatrix) -> Result<GradedRing<F>> {
    let dims = a.shape().dims().to_vec();
    let m = dims.len();
    let top = a.shape().dim();
    let relations = relations(a);
    let expected = poincare_polynomial(a.shape());
    let mut pieces = Vec::with_capacity(top + 1);
    for d in 0..=top {
        let monos = monomials(m, d);
        let (basis, other): (Vec<Monomial>, Vec<Monomial>) = monos.iter().cloned().partition(|e| in_basis(e, &dims));
        // Columns: non-basis monomials first so that they become pivots.
        let order: Vec<Monomial> = other.iter().chain(&basis).cloned().collect();
        let index: HashMap<Monomial, usize> = order.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let mut rows: Vec<Vec<F>> = ideal_rows(&relations, &dims, d, &index)
            .iter()
            .map(|r| r.iter().map(F::from_bigint).collect())
            .collect();
        let pivots = row_reduce(&mut rows);
        let quotient = monos.len() - pivots.len();
        if quotient != expected[d] {
            return Err(Error::RankMismatch {
                degree: d,
                expected: expected[d],
                found: quotient,
            });
        }
        if pivots.iter().enumerate().any(|(r, &c)| r != c) {
            return Err(Error::InvariantViolation(format!(
                "degree {d}: the monomials y^e with e <= n are dependent modulo the relations"
            )));
        }
        let nb = other.len();
        let mut reduction = Vec::with_capacity(order.len());
        for (c, _) in order.iter().enumerate() {
            let coords: Vec<F> = if c < nb {
                rows[c][nb..].iter().map(|v| -v.clone()).collect()
            } else {
                (0..basis.len()).map(|b| if b == c - nb { F::one() } else { F::zero() }).collect()
            };
            reduction.push(coords);
        }
        pieces.push(DegreePiece {
            index,
            basis,
            reduction,
        });
    }
    Ok(GradedRing {
        id: NEXT_RING_ID.fetch_add(1, Ordering::Relaxed),
        matrix: a.clone(),
        relations,
        pieces,
    })
}

/// Ring of the facial submanifold over the product without factor `j`.
pub fn facial_restriction<F: Scalar>(a: &VectorMatrix, j: usize) -> Result<GradedRing<F>> {
    if a.factors() < 2 {
        return Err(Error::SingleFactor);
    }
    build_ring(&a.delete_factor(j)?)
}

impl<F: Scalar> GradedRing<F> {
    pub fn matrix(&self) -> &VectorMatrix {
        &self.matrix
    }

    pub fn shape(&self) -> &Shape {
        self.matrix.shape()
    }

    pub fn generators(&self) -> usize {
        self.matrix.factors()
    }

    /// Top `y`-degree `n`.
    pub fn top_degree(&self) -> usize {
        self.pieces.len() - 1
    }

    pub fn relations(&self) -> &[IntPolynomial] {
        &self.relations
    }

    pub fn basis(&self, d: usize) -> &[Monomial] {
        self.pieces.get(d).map_or(&[], |p| p.basis.as_slice())
    }

    pub fn rank(&self, d: usize) -> usize {
        self.basis(d).len()
    }

    pub fn poincare_ranks(&self) -> Vec<usize> {
        self.pieces.iter().map(|p| p.basis.len()).collect()
    }

    pub fn zero(&self, degree: usize) -> RingElement<F> {
        RingElement {
            ring_id: self.id,
            degree,
            coords: vec![F::zero(); self.rank(degree)],
        }
    }

    pub fn one(&self) -> RingElement<F> {
        self.monomial(&vec![0; self.generators()])
    }

    /// The class of `y^e`.
    pub fn monomial(&self, e: &[u32]) -> RingElement<F> {
        let degree = e.iter().sum::<u32>() as usize;
        let coords = match self.pieces.get(degree) {
            Some(piece) => piece.reduction[piece.index[e]].clone(),
            None => Vec::new(),
        };
        RingElement {
            ring_id: self.id,
            degree,
            coords,
        }
    }

    /// `y_k` (0-based).
    pub fn generator(&self, k: usize) -> RingElement<F> {
        let mut e = vec![0; self.generators()];
        e[k] = 1;
        self.monomial(&e)
    }

    /// `Σ c_k y_k`.
    pub fn linear(&self, coeffs: &[F]) -> RingElement<F> {
        assert_eq!(coeffs.len(), self.generators(), "one coefficient per generator");
        let mut out = self.zero(1);
        for (k, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                out = self.add(&out, &self.scale(&self.generator(k), c)).expect("same ring");
            }
        }
        out
    }

    /// Reduces a homogeneous polynomial of degree `d`.
    pub fn reduce(&self, d: usize, poly: &BTreeMap<Monomial, F>) -> RingElement<F> {
        let mut out = self.zero(d);
        let Some(piece) = self.pieces.get(d) else { return out };
        for (e, c) in poly {
            assert_eq!(e.iter().sum::<u32>() as usize, d, "polynomial is not homogeneous of degree {d}");
            for (slot, r) in out.coords.iter_mut().zip(&piece.reduction[piece.index[e]]) {
                if !r.is_zero() {
                    *slot = slot.clone() + c.clone() * r;
                }
            }
        }
        out
    }

    fn check(&self, u: &RingElement<F>) -> Result<()> {
        if u.ring_id == self.id {
            Ok(())
        } else {
            Err(Error::MixedRings)
        }
    }

    pub fn add(&self, u: &RingElement<F>, v: &RingElement<F>) -> Result<RingElement<F>> {
        self.check(u)?;
        self.check(v)?;
        if u.degree != v.degree {
            return Err(Error::InvariantViolation(format!(
                "adding elements of degrees {} and {}",
                u.degree, v.degree
            )));
        }
        Ok(RingElement {
            ring_id: self.id,
            degree: u.degree,
            coords: u.coords.iter().zip(&v.coords).map(|(a, b)| a.clone() + b).collect(),
        })
    }

    pub fn scale(&self, u: &RingElement<F>, c: &F) -> RingElement<F> {
        RingElement {
            ring_id: u.ring_id,
            degree: u.degree,
            coords: u.coords.iter().map(|a| a.clone() * c).collect(),
        }
    }

    pub fn multiply(&self, u: &RingElement<F>, v: &RingElement<F>) -> Result<RingElement<F>> {
        self.check(u)?;
        self.check(v)?;
        let d = u.degree + v.degree;
        let mut out = self.zero(d);
        let Some(piece) = self.pieces.get(d) else { return Ok(out) };
        let bu = self.basis(u.degree);
        let bv = self.basis(v.degree);
        for (cu, eu) in u.coords.iter().zip(bu) {
            if cu.is_zero() {
                continue;
            }
            for (cv, ev) in v.coords.iter().zip(bv) {
                if cv.is_zero() {
                    continue;
                }
                let coef = cu.clone() * cv;
                let row = &piece.reduction[piece.index[&mul_monomial(eu, ev)]];
                for (slot, r) in out.coords.iter_mut().zip(row) {
                    if !r.is_zero() {
                        *slot = slot.clone() + coef.clone() * r;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn power(&self, u: &RingElement<F>, k: usize) -> Result<RingElement<F>> {
        self.check(u)?;
        let mut acc = self.one();
        for _ in 0..k {
            if acc.degree > self.top_degree() {
                return Ok(self.zero(u.degree * k));
            }
            acc = self.multiply(&acc, u)?;
        }
        Ok(acc)
    }

    /// Smallest `k ≥ 1` with `u^k = 0`; at most `n + 1` for positive degree.
    pub fn nilpotency_degree(&self, u: &RingElement<F>) -> Result<Option<usize>> {
        self.check(u)?;
        let mut acc = u.clone();
        for k in 1..=self.top_degree() + 1 {
            if acc.is_zero() {
                return Ok(Some(k));
            }
            acc = self.multiply(&acc, u)?;
        }
        Ok(acc.is_zero().then_some(self.top_degree() + 2))
    }

    /// Ranks of `F[y] / (g_1, …, g_m, y_j)` in degrees `0..=n`, by direct
    /// elimination on the enlarged ideal.
    pub fn killed_generator_ranks(&self, j: usize) -> Vec<usize> {
        let dims = self.shape().dims();
        let m = dims.len();
        (0..=self.top_degree())
            .map(|d| {
                let monos = monomials(m, d);
                let index: HashMap<Monomial, usize> = monos.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
                let mut rows: Vec<Vec<F>> = ideal_rows(&self.relations, dims, d, &index)
                    .iter()
                    .map(|r| r.iter().map(F::from_bigint).collect())
                    .collect();
                if d >= 1 {
                    for mu in monomials(m, d - 1) {
                        let mut row = vec![F::zero(); monos.len()];
                        let mut e = mu.clone();
                        e[j] += 1;
                        row[index[&e]] = F::one();
                        rows.push(row);
                    }
                }
                monos.len() - row_reduce(&mut rows).len()
            })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        let relations: Vec<Value> = self
            .relations
            .iter()
            .enumerate()
            .map(|(k, g)| {
                let terms: Vec<Value> =
                    g.iter().map(|(e, c)| json!({ "monomial": e, "coefficient": to_json_int(c) })).collect();
                json!({ "factor": k + 1, "terms": terms })
            })
            .collect();
        let scale = match self.matrix.mode() {
            CoefficientMode::Integer => 2,
            CoefficientMode::Gf2 => 1,
        };
        let degrees: Vec<Value> = self
            .pieces
            .iter()
            .enumerate()
            .map(|(d, p)| json!({ "degree": d, "cohomological_degree": scale * d, "basis": p.basis, "rank": p.basis.len() }))
            .collect();
        json!({
            "coefficients": F::NAME,
            "relations": relations,
            "degrees": degrees,
            "ranks": self.poincare_ranks(),
        })
    }
}

/// Torsion in the integral ring, degree by degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorsionReport {
    /// Invariant factors larger than 1 of each degree's relation lattice.
    pub torsion: Vec<Vec<BigInt>>,
    /// Every monomial reduces to integer coordinates in the monomial basis.
    pub integral_basis: bool,
}

impl TorsionReport {
    pub fn is_torsion_free(&self) -> bool {
        self.torsion.iter().all(Vec::is_empty)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "torsion_free": self.is_torsion_free(),
            "integral_basis": self.integral_basis,
            "torsion": self.torsion.iter().map(|t| t.iter().map(to_json_int).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
}

/// Checks that `ℤ[y]_d / L_d` is free in every degree and that the
/// monomial basis is a `ℤ`-basis.
pub fn integral_torsion(a: &VectorMatrix) -> Result<TorsionReport> {
    if a.mode() != CoefficientMode::Integer {
        return Err(Error::ModeMismatch { expected: "integer" });
    }
    let ring: RationalRing = build_ring(a)?;
    let dims = a.shape().dims();
    let m = dims.len();
    let mut torsion = Vec::new();
    for d in 0..=ring.top_degree() {
        let monos = monomials(m, d);
        let index: HashMap<Monomial, usize> = monos.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let rows = ideal_rows(&ring.relations, dims, d, &index);
        let factors = if rows.is_empty() { Vec::new() } else { smith_normal_form_big(&rows) };
        torsion.push(factors.into_iter().filter(|f| !f.is_zero() && !f.is_one()).collect());
    }
    let integral_basis = ring
        .pieces
        .iter()
        .all(|p| p.reduction.iter().flatten().all(|c| c.is_integer()));
    Ok(TorsionReport { torsion, integral_basis })
}
