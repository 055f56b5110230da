//! Decides, as far as it soundly can, whether the rational ring is
//! isomorphic to `⊗_i ℚ[x_i] / (x_i^{n_i+1})` with `x_1, …, x_m` a basis of
//! the degree-one piece.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use super::search::{rational_row_json, search_nilpotents};
use super::{build_ring, RationalRing};
use crate::charmat::{CoefficientMode, VectorMatrix};
use crate::error::{Error, Result};
use crate::exact::{rank, Rational, Scalar};
use crate::normal_form::{classify, NormalFormResult};

/// Why a product structure cannot exist.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DisproofCertificate {
    /// The matrix conjugates to the cyclic form, for which no nonzero
    /// degree-one class has vanishing `(N+1)`-st power, `N = min n_i`.
    CyclicObstruction,
    /// Every search ran on at most two coordinates and was solved exactly.
    ExactSolve,
}

impl DisproofCertificate {
    pub fn as_str(self) -> &'static str {
        match self {
            DisproofCertificate::CyclicObstruction => "cyclic-form obstruction",
            DisproofCertificate::ExactSolve => "exact m<=2 solve",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProductSearchOutcome {
    /// Row `i` holds the coefficients of `x_i` over `y_1, …, y_m`.
    Found { witness: Vec<Vec<Rational>> },
    NoneUpToBound { height: u64 },
    Disproved { certificate: DisproofCertificate },
}

impl ProductSearchOutcome {
    pub fn status(&self) -> &'static str {
        match self {
            ProductSearchOutcome::Found { .. } => "found",
            ProductSearchOutcome::NoneUpToBound { .. } => "none_up_to_bound",
            ProductSearchOutcome::Disproved { .. } => "disproved",
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, ProductSearchOutcome::Found { .. })
    }

    pub fn to_json(&self) -> Value {
        match self {
            ProductSearchOutcome::Found { witness } => json!({
                "status": self.status(),
                "witness": witness.iter().map(|r| rational_row_json(r)).collect::<Vec<_>>(),
            }),
            ProductSearchOutcome::NoneUpToBound { height } => json!({ "status": self.status(), "height": height }),
            ProductSearchOutcome::Disproved { certificate } => {
                json!({ "status": self.status(), "certificate": certificate.as_str() })
            }
        }
    }
}

/// Scales to a primitive integer vector whose first nonzero entry is positive.
fn primitive(v: &[Rational]) -> Vec<Rational> {
    let lcm = v.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = v.iter().map(|c| (c * Rational::from_bigint(&lcm)).to_integer()).collect();
    let mut g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    if g.is_zero() {
        return v.to_vec();
    }
    if ints.iter().find(|c| !c.is_zero()).is_some_and(Signed::is_negative) {
        g = -g;
    }
    ints.iter().map(|c| Rational::from_bigint(&(c / &g))).collect()
}

fn assign(lists: &[Vec<Vec<Rational>>], chosen: &mut Vec<Vec<Rational>>) -> bool {
    let depth = chosen.len();
    if depth == lists.len() {
        return true;
    }
    for cand in &lists[depth] {
        chosen.push(cand.clone());
        if rank(chosen) == chosen.len() && assign(lists, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// Searches for a product basis `x_1, …, x_m` of the degree-one piece with
/// `x_i^{n_i+1} = 0`, trying coefficients of height at most `height` where
/// an exact solve is unavailable.
pub fn product_structure(a: &VectorMatrix, height: u64) -> Result<ProductSearchOutcome> {
    if a.mode() != CoefficientMode::Integer {
        return Err(Error::ModeMismatch { expected: "integer" });
    }
    let ring: RationalRing = build_ring(a)?;
    if matches!(classify(a)?, NormalFormResult::Cyclic { .. }) {
        return Ok(ProductSearchOutcome::Disproved {
            certificate: DisproofCertificate::CyclicObstruction,
        });
    }
    let dims = a.shape().dims();
    let m = dims.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| dims[j].cmp(&dims[i]));
    let mut lists = Vec::with_capacity(m);
    let mut exhaustive = true;
    for &i in &order {
        let support: Vec<usize> = (0..m).filter(|&j| dims[j] <= dims[i]).collect();
        let search = search_nilpotents(&ring, dims[i], height, Some(&support))?;
        exhaustive &= search.exhaustive;
        let empty = search.witnesses.is_empty();
        lists.push(search.witnesses);
        if empty {
            break;
        }
    }
    let mut chosen = Vec::new();
    if lists.len() == m && assign(&lists, &mut chosen) {
        let mut witness = vec![Vec::new(); m];
        for (&i, row) in order.iter().zip(chosen) {
            witness[i] = primitive(&row);
        }
        for (i, row) in witness.iter().enumerate() {
            if !ring.power(&ring.linear(row), dims[i] + 1)?.is_zero() {
                return Err(Error::InvariantViolation(format!("product witness row {} is not nilpotent", i + 1)));
            }
        }
        if rank(&witness) != m {
            return Err(Error::InvariantViolation("product witness is singular".into()));
        }
        return Ok(ProductSearchOutcome::Found { witness });
    }
    if exhaustive && m <= 2 {
        Ok(ProductSearchOutcome::Disproved {
            certificate: DisproofCertificate::ExactSolve,
        })
    } else {
        Ok(ProductSearchOutcome::NoneUpToBound { height })
    }
}
