//! Exhaustive census of normalized valid vector matrices with bounded
//! off-diagonal entries.
//!
//! The search assigns off-diagonal entries block column by block column.
//! Each principal minor of each `A_k` of size at least two is checked as
//! soon as the last entry it reads is assigned, so invalid prefixes are
//! cut off early.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::charmat::{subsets, CoefficientMode, VectorMatrix};
use crate::error::Result;
use crate::exact::small_determinant;
use crate::normal_form::{classify, conjugate, NormalFormResult, Permutation};
use crate::polytope::Shape;

/// A principal minor, as the flat entry indices of its `|S| × |S|` matrix.
#[derive(Clone, Debug)]
struct MinorCheck {
    size: usize,
    cells: Vec<usize>,
}

#[derive(Clone, Debug)]
struct SearchPlan {
    shape: Shape,
    mode: CoefficientMode,
    /// Flat indices of the free entries, in assignment order.
    vars: Vec<usize>,
    values: Vec<i64>,
    /// Checks that become decidable once variable `d` is assigned.
    checks: Vec<Vec<MinorCheck>>,
    base: Vec<i64>,
}

impl SearchPlan {
    fn new(shape: &Shape, mode: CoefficientMode, bound: i64) -> Self {
        let m = shape.factors();
        let n = shape.dim();
        let flat = |i: usize, j: usize, p: usize| i * n + shape.offset(j) + p;
        let mut vars = Vec::new();
        for j in 0..m {
            for p in 0..shape.dims()[j] {
                for i in (0..m).filter(|&i| i != j) {
                    vars.push(flat(i, j, p));
                }
            }
        }
        let position: BTreeMap<usize, usize> = vars.iter().enumerate().map(|(d, &v)| (v, d)).collect();
        let mut checks = vec![Vec::new(); vars.len()];
        let mut seen = HashSet::new();
        for k in shape.multi_indices() {
            for subset in subsets(m).into_iter().filter(|s| s.len() >= 2) {
                let key: Vec<(usize, usize)> = subset.iter().map(|&c| (c, k.entries()[c])).collect();
                if !seen.insert(key) {
                    continue;
                }
                let cells: Vec<usize> = subset
                    .iter()
                    .flat_map(|&r| subset.iter().map(move |&c| (r, c)))
                    .map(|(r, c)| flat(r, c, k.entries()[c]))
                    .collect();
                let last = cells.iter().filter_map(|c| position.get(c)).max().copied().expect("off-diagonal cell");
                checks[last].push(MinorCheck { size: subset.len(), cells });
            }
        }
        let values = match mode {
            CoefficientMode::Integer => (-bound..=bound).collect(),
            CoefficientMode::Gf2 => vec![0, 1],
        };
        let base = VectorMatrix::identity(shape.clone(), mode).flat().to_vec();
        SearchPlan {
            shape: shape.clone(),
            mode,
            vars,
            values,
            checks,
            base,
        }
    }

    fn passes(&self, d: usize, entries: &[i64], buf: &mut Vec<i64>) -> bool {
        self.checks[d].iter().all(|check| {
            buf.clear();
            buf.extend(check.cells.iter().map(|&c| entries[c]));
            let det = small_determinant(buf, check.size).expect("bounded entries fit in i128");
            match self.mode {
                CoefficientMode::Integer => det.abs() == 1,
                CoefficientMode::Gf2 => det.rem_euclid(2) == 1,
            }
        })
    }

    fn candidates(&self) -> u128 {
        (self.values.len() as u128).pow(self.vars.len() as u32)
    }
}

/// Lazy depth-first stream of normalized valid matrices.
pub struct ValidMatrices {
    plan: SearchPlan,
    /// Value choices for the first variable; the rest range over all values.
    first: Vec<i64>,
    next_choice: Vec<usize>,
    entries: Vec<i64>,
    depth: usize,
    done: bool,
    buf: Vec<i64>,
}

impl ValidMatrices {
    fn from_plan(plan: SearchPlan, first: Option<i64>) -> Self {
        let first = first.map_or_else(|| plan.values.clone(), |v| vec![v]);
        ValidMatrices {
            next_choice: vec![0; plan.vars.len()],
            entries: plan.base.clone(),
            first,
            plan,
            depth: 0,
            done: false,
            buf: Vec::new(),
        }
    }

    fn values_at(&self, d: usize) -> &[i64] {
        if d == 0 {
            &self.first
        } else {
            &self.plan.values
        }
    }
}

impl Iterator for ValidMatrices {
    type Item = VectorMatrix;

    fn next(&mut self) -> Option<VectorMatrix> {
        let nvars = self.plan.vars.len();
        loop {
            if self.done {
                return None;
            }
            if self.depth == nvars {
                let out = VectorMatrix::from_flat(self.plan.shape.clone(), self.plan.mode, self.entries.clone())
                    .expect("enumerated entries are in range");
                if nvars == 0 {
                    self.done = true;
                } else {
                    self.depth -= 1;
                }
                return Some(out);
            }
            let d = self.depth;
            let choice = self.next_choice[d];
            if choice == self.values_at(d).len() {
                self.next_choice[d] = 0;
                if d == 0 {
                    self.done = true;
                } else {
                    self.depth -= 1;
                }
                continue;
            }
            self.next_choice[d] += 1;
            self.entries[self.plan.vars[d]] = self.values_at(d)[choice];
            let mut buf = std::mem::take(&mut self.buf);
            if self.plan.passes(d, &self.entries, &mut buf) {
                self.depth += 1;
            }
            self.buf = buf;
        }
    }
}

/// Every normalized valid matrix of the shape whose off-diagonal entries
/// lie in `[-bound, bound]` (or `{0, 1}` over GF(2), where `bound` is
/// ignored), each exactly once.
pub fn enumerate_valid(shape: &Shape, mode: CoefficientMode, bound: i64) -> ValidMatrices {
    ValidMatrices::from_plan(SearchPlan::new(shape, mode, bound), None)
}

/// Conjugations that keep the shape, i.e. `n_{σ⁻¹(i)} = n_i` for all `i`.
pub fn shape_preserving_permutations(shape: &Shape) -> Vec<Permutation> {
    let dims = shape.dims();
    Permutation::all(dims.len())
        .filter(|s| {
            let inv = s.inverse();
            (0..dims.len()).all(|i| dims[inv.apply(i)] == dims[i])
        })
        .collect()
}

/// Smallest JSON serialization among the shape-preserving conjugates.
pub fn canonical_form(a: &VectorMatrix, perms: &[Permutation]) -> Result<String> {
    let mut best: Option<String> = None;
    for sigma in perms {
        let s = conjugate(a, sigma)?.to_json_string();
        if best.as_ref().is_none_or(|b| s < *b) {
            best = Some(s);
        }
    }
    Ok(best.unwrap_or_else(|| a.to_json_string()))
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CensusCounts {
    /// Size of the full search space before pruning.
    pub candidates: u128,
    pub valid: u64,
    pub unipotent: u64,
    pub cyclic: u64,
    pub general_non_bott: u64,
}

impl CensusCounts {
    fn merge(mut self, other: CensusCounts) -> CensusCounts {
        self.valid += other.valid;
        self.unipotent += other.unipotent;
        self.cyclic += other.cyclic;
        self.general_non_bott += other.general_non_bott;
        self
    }

    fn record(&mut self, result: &NormalFormResult) {
        self.valid += 1;
        match result {
            NormalFormResult::Unipotent { .. } => self.unipotent += 1,
            NormalFormResult::Cyclic { .. } => self.cyclic += 1,
            NormalFormResult::GeneralNonBott { .. } => self.general_non_bott += 1,
            NormalFormResult::Invalid { .. } => unreachable!("enumeration yields valid matrices"),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "candidates": u64::try_from(self.candidates).map_or_else(|_| json!(self.candidates.to_string()), Value::from),
            "valid": self.valid,
            "unipotent": self.unipotent,
            "cyclic": self.cyclic,
            "general_non_bott": self.general_non_bott,
        })
    }
}

/// One conjugation class in a deduplicated census.
#[derive(Clone, Debug, PartialEq)]
pub struct Representative {
    pub matrix: VectorMatrix,
    pub status: &'static str,
    /// Number of enumerated matrices in the class.
    pub members: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CensusReport {
    pub shape: Shape,
    pub mode: CoefficientMode,
    pub bound: i64,
    pub counts: CensusCounts,
    /// Present when deduplication was requested; sorted by canonical form.
    pub representatives: Option<Vec<Representative>>,
}

impl CensusReport {
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "shape": self.shape.dims(),
            "mode": self.mode.as_str(),
            "bound": self.bound,
            "counts": self.counts.to_json(),
        });
        if let Some(reps) = &self.representatives {
            v["classes"] = json!(reps.len());
            v["representatives"] = reps
                .iter()
                .map(|r| json!({ "matrix": r.matrix.to_json(), "status": r.status, "members": r.members }))
                .collect();
        }
        v
    }
}

type Partial = (CensusCounts, BTreeMap<String, (VectorMatrix, &'static str, u64)>);

fn census_part(plan: SearchPlan, first: Option<i64>, perms: Option<&[Permutation]>) -> Result<Partial> {
    let mut counts = CensusCounts::default();
    let mut classes = BTreeMap::new();
    for a in ValidMatrices::from_plan(plan, first) {
        let result = classify(&a)?;
        counts.record(&result);
        if let Some(perms) = perms {
            let key = canonical_form(&a, perms)?;
            let entry = classes.entry(key.clone()).or_insert_with(|| {
                let rep = VectorMatrix::from_json_str(&key).expect("canonical form parses");
                (rep, result.status(), 0)
            });
            entry.2 += 1;
        }
    }
    Ok((counts, classes))
}

/// Classifies every enumerated matrix. With `jobs > 1` the search tree is
/// split on the first entry and the parts run on a thread pool.
pub fn census(shape: &Shape, mode: CoefficientMode, bound: i64, dedupe: bool, jobs: usize) -> Result<CensusReport> {
    let plan = SearchPlan::new(shape, mode, bound);
    let candidates = plan.candidates();
    let perms = dedupe.then(|| shape_preserving_permutations(shape));
    let perms = perms.as_deref();
    let (counts, classes) = if jobs <= 1 || plan.vars.is_empty() {
        census_part(plan, None, perms)?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| crate::Error::InvariantViolation(format!("thread pool: {e}")))?;
        let parts: Vec<Result<Partial>> = pool.install(|| {
            plan.values
                .par_iter()
                .map(|&v| census_part(plan.clone(), Some(v), perms))
                .collect()
        });
        let mut counts = CensusCounts::default();
        let mut classes: BTreeMap<String, (VectorMatrix, &'static str, u64)> = BTreeMap::new();
        for part in parts {
            let (c, cl) = part?;
            counts = counts.merge(c);
            for (k, (rep, status, n)) in cl {
                classes.entry(k).or_insert((rep, status, 0)).2 += n;
            }
        }
        (counts, classes)
    };
    let counts = CensusCounts { candidates, ..counts };
    let representatives = dedupe.then(|| {
        classes
            .into_values()
            .map(|(matrix, status, members)| Representative { matrix, status, members })
            .collect()
    });
    Ok(CensusReport {
        shape: shape.clone(),
        mode,
        bound: if mode == CoefficientMode::Gf2 { 1 } else { bound },
        counts,
        representatives,
    })
}
