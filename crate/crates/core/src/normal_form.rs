//! Reordering the simplex factors and the normal forms it reaches.
//!
//! Reordering factors by `σ` conjugates the vector matrix by the block
//! permutation matrix. A valid sign-normalized matrix whose principal
//! minors are all `+1` is conjugate to a unipotent upper triangular form,
//! i.e. it comes from a generalized Bott tower. If only the full
//! determinants may be `-1` it is conjugate to the cyclic form with nonzero
//! blocks on the superdiagonal and in the `(m, 1)` corner. Anything else is
//! reported with a witness minor.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_bigint::BigInt;
use num_traits::One;
use serde_json::{json, Value};

use crate::charmat::{CoefficientMode, MinorRecord, VectorMatrix};
use crate::error::{Error, Result};
use crate::polytope::Shape;

/// Largest `m` for which the cyclic branch searches all `m!` orderings.
pub const PERMUTATION_SEARCH_LIMIT: usize = 10;

/// A bijection of `{0, …, m-1}`, stored as the list of images `σ(i)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &v in &images {
            if v >= images.len() || std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidPermutation(format!("{images:?} is not a bijection")));
            }
        }
        Ok(Permutation(images))
    }

    pub fn identity(m: usize) -> Self {
        Permutation((0..m).collect())
    }

    /// From 1-based images as written on the command line.
    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        if images.contains(&0) {
            return Err(Error::InvalidPermutation("images are 1-based".into()));
        }
        Self::new(images.iter().map(|v| v - 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|v| v + 1).collect()
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (i, &v) in self.0.iter().enumerate() {
            inv[v] = i;
        }
        Permutation(inv)
    }

    /// The permutation sending `order[p]` to `p`.
    fn from_order(order: &[usize]) -> Permutation {
        Permutation(order.to_vec()).inverse()
    }

    /// All permutations of `0..m` in lexicographic order of images.
    pub fn all(m: usize) -> impl Iterator<Item = Permutation> {
        let mut next = Some((0..m).collect::<Vec<usize>>());
        std::iter::from_fn(move || {
            let cur = next.take()?;
            let mut p = cur.clone();
            if let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) {
                let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
                p.swap(i - 1, j);
                p[i..].reverse();
                next = Some(p);
            }
            Some(Permutation(cur))
        })
    }
}

/// `E_σ A E_σ^{-1}`: block `(i, j)` of the result is block
/// `(σ⁻¹(i), σ⁻¹(j))` of `a`, and factor `i` of the new shape is factor
/// `σ⁻¹(i)` of the old one.
pub fn conjugate(a: &VectorMatrix, sigma: &Permutation) -> Result<VectorMatrix> {
    let m = a.factors();
    if sigma.len() != m {
        return Err(Error::InvalidPermutation(format!(
            "permutation of {} elements applied to {m} factors",
            sigma.len()
        )));
    }
    let inv = sigma.inverse();
    let dims: Vec<usize> = (0..m).map(|i| a.shape().dims()[inv.apply(i)]).collect();
    let blocks: Vec<Vec<Vec<i64>>> = (0..m)
        .map(|i| (0..m).map(|j| a.block(inv.apply(i), inv.apply(j)).to_vec()).collect())
        .collect();
    VectorMatrix::from_blocks(Shape::new(dims)?, a.mode(), &blocks)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NormalFormResult {
    /// Conjugate by `sigma` to a unipotent upper triangular matrix.
    Unipotent { sigma: Permutation, normal_form: VectorMatrix },
    /// Conjugate by `sigma` to the cyclic form; `components[i]` is the
    /// common nonzero component of `b^{i+1}`.
    Cyclic {
        sigma: Permutation,
        normal_form: VectorMatrix,
        components: Vec<i64>,
    },
    /// Valid, but a proper principal minor differs from 1.
    GeneralNonBott { witness: MinorRecord },
    Invalid { violation: MinorRecord },
}

impl NormalFormResult {
    pub fn status(&self) -> &'static str {
        match self {
            NormalFormResult::Unipotent { .. } => "unipotent",
            NormalFormResult::Cyclic { .. } => "cyclic",
            NormalFormResult::GeneralNonBott { .. } => "non_bott",
            NormalFormResult::Invalid { .. } => "invalid",
        }
    }

    pub fn is_unipotent(&self) -> bool {
        matches!(self, NormalFormResult::Unipotent { .. })
    }

    pub fn to_json(&self) -> Value {
        let (sigma, normal_form, certificates) = match self {
            NormalFormResult::Unipotent { sigma, normal_form } => {
                (json!(sigma.one_based()), normal_form.to_json(), json!({}))
            }
            NormalFormResult::Cyclic {
                sigma,
                normal_form,
                components,
            } => (
                json!(sigma.one_based()),
                normal_form.to_json(),
                json!({ "components": components, "product": components.iter().product::<i64>() }),
            ),
            NormalFormResult::GeneralNonBott { witness } => (Value::Null, Value::Null, json!({ "witness": witness.to_json() })),
            NormalFormResult::Invalid { violation } => (Value::Null, Value::Null, json!({ "violation": violation.to_json() })),
        };
        json!({
            "status": self.status(),
            "sigma": sigma,
            "normal_form": normal_form,
            "certificates": certificates,
        })
    }
}

/// Decides which normal form `a` reaches.
///
/// Integer matrices must be sign-normalized. The Bott branch orders the
/// factors topologically along the nonzero off-diagonal blocks (smallest
/// index first among ready factors). A cycle there, a failed triangularity
/// check, or a cyclic-type matrix with no cyclic ordering contradicts the
/// normal-form classification and is raised as an invariant violation.
pub fn classify(a: &VectorMatrix) -> Result<NormalFormResult> {
    if a.mode() == CoefficientMode::Integer && !a.is_normalized() {
        return Err(Error::NotNormalized);
    }
    let validity = a.is_valid();
    if let Some(violation) = validity.violation {
        return Ok(NormalFormResult::Invalid { violation });
    }
    let m = a.factors();
    let report = a.principal_minors();
    let proper_witness = report
        .records
        .iter()
        .find(|r| r.subset.len() < m && !r.value.is_one())
        .cloned();
    let all_dets_one = report.records.iter().filter(|r| r.subset.len() == m).all(|r| r.value.is_one());

    if let Some(witness) = proper_witness {
        return Ok(NormalFormResult::GeneralNonBott { witness });
    }
    if all_dets_one {
        let (sigma, normal_form) = triangularize(a)?;
        return Ok(NormalFormResult::Unipotent { sigma, normal_form });
    }
    let (sigma, normal_form, components) = cyclic_form(a)?;
    Ok(NormalFormResult::Cyclic {
        sigma,
        normal_form,
        components,
    })
}

fn triangularize(a: &VectorMatrix) -> Result<(Permutation, VectorMatrix)> {
    let m = a.factors();
    let mut indegree = vec![0usize; m];
    for (i, j) in off_diagonal(m) {
        if !a.is_zero_block(i, j) {
            indegree[j] += 1;
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> = (0..m).filter(|&v| indegree[v] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(m);
    while let Some(Reverse(u)) = ready.pop() {
        order.push(u);
        for v in 0..m {
            if v != u && !a.is_zero_block(u, v) {
                indegree[v] -= 1;
                if indegree[v] == 0 {
                    ready.push(Reverse(v));
                }
            }
        }
    }
    if order.len() != m {
        return Err(Error::InvariantViolation(format!(
            "all principal minors are 1 but the block digraph has a cycle:\n{a}"
        )));
    }
    let sigma = Permutation::from_order(&order);
    let normal_form = conjugate(a, &sigma)?;
    if !is_unipotent_upper(&normal_form) {
        return Err(Error::InvariantViolation(format!(
            "topological order did not triangularize:\n{normal_form}"
        )));
    }
    Ok((sigma, normal_form))
}

fn off_diagonal(m: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..m).flat_map(move |i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
}

/// Diagonal `𝟏` and zero blocks strictly below it.
pub fn is_unipotent_upper(a: &VectorMatrix) -> bool {
    let m = a.factors();
    a.is_normalized() && (0..m).all(|i| (0..i).all(|j| a.is_zero_block(i, j)))
}

/// In cyclic position: superdiagonal `(i, i+1)` or the corner `(m-1, 0)`.
fn is_cyclic_slot(m: usize, i: usize, j: usize) -> bool {
    j == i + 1 || (i == m - 1 && j == 0)
}

fn cyclic_form(a: &VectorMatrix) -> Result<(Permutation, VectorMatrix, Vec<i64>)> {
    let m = a.factors();
    if m > PERMUTATION_SEARCH_LIMIT {
        return Err(Error::PermutationSearchExceeded {
            m,
            limit: PERMUTATION_SEARCH_LIMIT,
        });
    }
    for sigma in Permutation::all(m) {
        let c = conjugate(a, &sigma)?;
        let fits = off_diagonal(m).all(|(i, j)| c.is_zero_block(i, j) != is_cyclic_slot(m, i, j));
        if !fits {
            continue;
        }
        // b^1 sits in the corner, b^{i+1} at (i, i+1).
        let mut components = Vec::with_capacity(m);
        for i in 0..m {
            let block = if i == 0 { c.block(m - 1, 0) } else { c.block(i - 1, i) };
            let nonzero: Vec<i64> = block.iter().copied().filter(|&v| v != 0).collect();
            if nonzero.windows(2).any(|w| w[0] != w[1]) {
                return Err(Error::InvariantViolation(format!(
                    "cyclic block b^{} has unequal nonzero components {block:?}",
                    i + 1
                )));
            }
            components.push(nonzero[0]);
        }
        let product: BigInt = components.iter().map(|&v| BigInt::from(v)).product();
        let expected = BigInt::from(if m % 2 == 0 { 2 } else { -2 });
        if product != expected {
            return Err(Error::InvariantViolation(format!(
                "cyclic components {components:?} multiply to {product}, expected {expected}"
            )));
        }
        return Ok((sigma, c, components));
    }
    Err(Error::InvariantViolation(format!(
        "proper minors are 1 and some determinant is -1, but no ordering reaches the cyclic form:\n{a}"
    )))
}

/// One stage `B_j = P(ℂ ⊕ ξ_j)` of a generalized Bott tower.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TowerStage {
    /// `n_j`: the fiber is `ℂP^{n_j}` (`ℝP^{n_j}` for small covers).
    pub fiber_dim: usize,
    /// Exponent vectors `b_i^j ∈ ℤ^{n_j}` for the earlier stages `i < j`.
    pub exponents: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BottTowerDescription {
    pub mode: CoefficientMode,
    pub stages: Vec<TowerStage>,
}

impl BottTowerDescription {
    /// The unipotent upper triangular matrix with these exponent vectors.
    pub fn to_matrix(&self) -> Result<VectorMatrix> {
        let m = self.stages.len();
        let dims: Vec<usize> = self.stages.iter().map(|s| s.fiber_dim).collect();
        let mut blocks = vec![vec![Vec::new(); m]; m];
        for (j, stage) in self.stages.iter().enumerate() {
            if stage.exponents.len() != j {
                return Err(Error::MalformedMatrix(format!(
                    "stage {} carries {} exponent vectors, expected {j}",
                    j + 1,
                    stage.exponents.len()
                )));
            }
            for (i, row) in blocks.iter_mut().enumerate() {
                row[j] = match i.cmp(&j) {
                    std::cmp::Ordering::Less => stage.exponents[i].clone(),
                    std::cmp::Ordering::Equal => vec![1; stage.fiber_dim],
                    std::cmp::Ordering::Greater => vec![0; stage.fiber_dim],
                };
            }
        }
        VectorMatrix::from_blocks(Shape::new(dims)?, self.mode, &blocks)
    }

    pub fn to_json(&self) -> Value {
        let stages: Vec<Value> = self
            .stages
            .iter()
            .enumerate()
            .map(|(j, s)| json!({ "stage": j + 1, "fiber_dim": s.fiber_dim, "exponents": s.exponents }))
            .collect();
        json!({ "stages": stages })
    }
}

/// Reads the tower off the unipotent normal form: stage `j` has fiber
/// dimension `n_j` and exponent vectors `b_i^j` from block `(i, j)`.
pub fn bott_tower(a: &VectorMatrix) -> Result<(Permutation, BottTowerDescription)> {
    let NormalFormResult::Unipotent { sigma, normal_form } = classify(a)? else {
        return Err(Error::NotUnipotent);
    };
    let m = normal_form.factors();
    let stages = (0..m)
        .map(|j| TowerStage {
            fiber_dim: normal_form.shape().dims()[j],
            exponents: (0..j).map(|i| normal_form.block(i, j).to_vec()).collect(),
        })
        .collect();
    Ok((
        sigma,
        BottTowerDescription {
            mode: normal_form.mode(),
            stages,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(d: &[usize]) -> Shape {
        Shape::new(d.to_vec()).unwrap()
    }

    fn int(dims: &[usize], blocks: &[Vec<Vec<i64>>]) -> VectorMatrix {
        VectorMatrix::from_blocks(shape(dims), CoefficientMode::Integer, blocks).unwrap()
    }

    fn cylinder() -> VectorMatrix {
        int(&[2, 1], &[vec![vec![1, 1], vec![3]], vec![vec![-2, 5], vec![1]]])
    }

    #[test]
    fn permutations_enumerate_lexicographically() {
        let all: Vec<Vec<usize>> = Permutation::all(3).map(|p| p.images().to_vec()).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![0, 1, 2]);
        assert_eq!(all[5], vec![2, 1, 0]);
        assert_eq!(Permutation::all(1).count(), 1);
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::new(vec![1, 2]).is_err());
    }

    #[test]
    fn conjugate_examples() {
        let a = cylinder();
        assert_eq!(conjugate(&a, &Permutation::identity(2)).unwrap(), a);
        let swap = Permutation::new(vec![1, 0]).unwrap();
        let s = conjugate(&a, &swap).unwrap();
        assert_eq!(s.shape().dims(), &[1, 2]);
        assert_eq!(s.block(0, 0), a.block(1, 1));
        assert_eq!(s.block(0, 1), a.block(1, 0));
        assert_eq!(s.block(1, 0), a.block(0, 1));
        assert_eq!(s.block(1, 1), a.block(0, 0));
        let sigma = Permutation::new(vec![2, 0, 1]).unwrap();
        let b = int(
            &[1, 2, 3],
            &[
                vec![vec![1], vec![2, 3], vec![4, 5, 6]],
                vec![vec![7], vec![1, 1], vec![8, 9, 10]],
                vec![vec![11], vec![12, 13], vec![1, 1, 1]],
            ],
        );
        let there = conjugate(&b, &sigma).unwrap();
        assert_eq!(there.shape().dims(), &[2, 3, 1]);
        assert_eq!(conjugate(&there, &sigma.inverse()).unwrap(), b);
    }

    #[test]
    fn classify_triangular_square() {
        let a = int(&[1, 1], &[vec![vec![1], vec![3]], vec![vec![0], vec![1]]]);
        match classify(&a).unwrap() {
            NormalFormResult::Unipotent { sigma, normal_form } => {
                assert_eq!(sigma, Permutation::identity(2));
                assert_eq!(normal_form, a);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn classify_lower_triangular_needs_swap() {
        let a = int(&[2, 1], &[vec![vec![1, 1], vec![0]], vec![vec![4, -1], vec![1]]]);
        let NormalFormResult::Unipotent { sigma, normal_form } = classify(&a).unwrap() else {
            panic!()
        };
        assert_eq!(sigma.images(), &[1, 0]);
        assert_eq!(normal_form.shape().dims(), &[1, 2]);
        assert_eq!(normal_form.block(0, 1), &[4, -1]);
    }

    #[test]
    fn classify_cyclic_square() {
        let a = int(&[1, 1], &[vec![vec![1], vec![1]], vec![vec![2], vec![1]]]);
        let NormalFormResult::Cyclic { sigma, components, .. } = classify(&a).unwrap() else {
            panic!()
        };
        assert_eq!(sigma, Permutation::identity(2));
        // b^1 is the corner block (2), b^2 the superdiagonal block (1).
        assert_eq!(components, vec![2, 1]);
        assert_eq!(components.iter().product::<i64>(), 2);
    }

    #[test]
    fn classify_general_non_bott() {
        // Found by exhaustive search over entries in [-2, 2]: the {1,2}
        // minor is 1 - (-2)(-1) = -1.
        let a = int(
            &[1, 1, 1],
            &[vec![vec![1], vec![-2], vec![-2]], vec![vec![-1], vec![1], vec![-2]], vec![vec![0], vec![0], vec![1]]],
        );
        let NormalFormResult::GeneralNonBott { witness } = classify(&a).unwrap() else {
            panic!()
        };
        assert_eq!(witness.subset, vec![0, 1]);
        assert_eq!(witness.value, BigInt::from(-1));
    }

    #[test]
    fn classify_invalid_and_unnormalized() {
        let bad = int(&[1, 1], &[vec![vec![1], vec![1]], vec![vec![1], vec![1]]]);
        assert_eq!(classify(&bad).unwrap().status(), "invalid");
        let flipped = int(&[1, 1], &[vec![vec![-1], vec![0]], vec![vec![0], vec![1]]]);
        assert_eq!(classify(&flipped), Err(Error::NotNormalized));
    }

    #[test]
    fn gf2_matrices_are_unipotent() {
        let a = VectorMatrix::from_blocks(shape(&[1, 1]), CoefficientMode::Gf2, &[vec![vec![1], vec![1]], vec![vec![0], vec![1]]])
            .unwrap();
        assert!(classify(&a).unwrap().is_unipotent());
    }

    #[test]
    fn tower_examples() {
        let id = VectorMatrix::identity(shape(&[2, 3]), CoefficientMode::Integer);
        let (_, t) = bott_tower(&id).unwrap();
        assert_eq!(t.stages[0].exponents, Vec::<Vec<i64>>::new());
        assert_eq!(t.stages[1].exponents, vec![vec![0, 0, 0]]);

        let hirzebruch = int(&[1, 1], &[vec![vec![1], vec![-3]], vec![vec![0], vec![1]]]);
        let (_, t) = bott_tower(&hirzebruch).unwrap();
        assert_eq!(t.stages.iter().map(|s| s.fiber_dim).collect::<Vec<_>>(), vec![1, 1]);
        assert_eq!(t.stages[1].exponents, vec![vec![-3]]);

        let a = int(&[1, 2], &[vec![vec![1], vec![1, 2]], vec![vec![0], vec![1, 1]]]);
        let (_, t) = bott_tower(&a).unwrap();
        assert_eq!(t.stages[1].fiber_dim, 2);
        assert_eq!(t.stages[1].exponents, vec![vec![1, 2]]);
        assert_eq!(t.to_matrix().unwrap(), a);

        let cyclic = int(&[1, 1], &[vec![vec![1], vec![1]], vec![vec![2], vec![1]]]);
        assert_eq!(bott_tower(&cyclic).unwrap_err(), Error::NotUnipotent);
    }

    #[test]
    fn tower_embedding_round_trip() {
        let t = BottTowerDescription {
            mode: CoefficientMode::Integer,
            stages: vec![
                TowerStage { fiber_dim: 2, exponents: vec![] },
                TowerStage { fiber_dim: 1, exponents: vec![vec![-1]] },
                TowerStage { fiber_dim: 3, exponents: vec![vec![0, 2, 0], vec![1, 1, -4]] },
            ],
        };
        let (sigma, back) = bott_tower(&t.to_matrix().unwrap()).unwrap();
        assert_eq!(sigma, Permutation::identity(3));
        assert_eq!(back, t);
    }

    #[test]
    fn conjugation_preserves_minor_multiset() {
        let s = shape(&[1, 1, 1]);
        let slots = 6;
        let sigmas: Vec<Permutation> = Permutation::all(3).collect();
        let mut code = vec![0usize; slots];
        loop {
            let vals: Vec<i64> = code.iter().map(|&c| c as i64 - 1).collect();
            let rows = vec![vec![1, vals[0], vals[1]], vec![vals[2], 1, vals[3]], vec![vals[4], vals[5], 1]];
            let a = VectorMatrix::from_rows(s.clone(), CoefficientMode::Integer, &rows).unwrap();
            let key = |m: &VectorMatrix| {
                let mut v: Vec<(usize, BigInt)> =
                    m.principal_minors().records.into_iter().map(|r| (r.subset.len(), r.value)).collect();
                v.sort();
                v
            };
            let base = key(&a);
            for sigma in &sigmas {
                assert_eq!(key(&conjugate(&a, sigma).unwrap()), base);
            }
            let Some(pos) = code.iter().position(|&c| c < 2) else { break };
            for c in code.iter_mut().take(pos) {
                *c = 0;
            }
            code[pos] += 1;
        }
    }
}
