//! Search for degree-one classes `x ≠ 0` with `x^{N+1} = 0`.
//!
//! The power map `x ↦ x^{N+1}` restricted to a support `S ⊆ {y_1, …, y_m}`
//! is a vector of homogeneous polynomials in the coefficients of `x`, whose
//! terms are read off from the multinomial expansion and the degree-`(N+1)`
//! reduction map. Directions are normalized so the first nonzero coordinate
//! is 1. With two free coordinates the zero set is found exactly from the
//! rational roots of the gcd of those polynomials; otherwise a bounded grid
//! of rationals is scanned.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use super::{monomials, Monomial, RationalRing};
use crate::error::{Error, Result};
use crate::exact::{Rational, Scalar};

/// Outcome of [`search_nilpotents`].
#[derive(Clone, Debug, PartialEq)]
pub struct NilpotentSearch {
    /// `N`; the condition is `x^{N+1} = 0`.
    pub degree: usize,
    pub height: u64,
    /// 0-based generator indices allowed in `x`.
    pub support: Vec<usize>,
    /// Normalized coefficient vectors of length `m`, each re-verified.
    pub witnesses: Vec<Vec<Rational>>,
    /// True when `witnesses` is the complete set of normalized solutions.
    pub exhaustive: bool,
}

impl NilpotentSearch {
    /// `"found"`, `"disproved"` or `"none_up_to_bound"`.
    pub fn status(&self) -> &'static str {
        match (self.witnesses.is_empty(), self.exhaustive) {
            (false, _) => "found",
            (true, true) => "disproved",
            (true, false) => "none_up_to_bound",
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "status": self.status(),
            "degree": self.degree,
            "height": self.height,
            "support": self.support.iter().map(|s| s + 1).collect::<Vec<_>>(),
            "exhaustive": self.exhaustive,
            "witnesses": self.witnesses.iter().map(|w| rational_row_json(w)).collect::<Vec<_>>(),
        })
    }
}

pub(crate) fn rational_json(q: &Rational) -> Value {
    if q.is_integer() {
        crate::charmat::to_json_int(q.numer())
    } else {
        Value::String(q.to_string())
    }
}

pub(crate) fn rational_row_json(row: &[Rational]) -> Value {
    Value::Array(row.iter().map(rational_json).collect())
}

/// `0` and every `±p/q` in lowest terms with `1 ≤ p, q ≤ height`, simplest
/// first.
pub fn rational_grid(height: u64) -> Vec<Rational> {
    let mut out = vec![(0u64, Rational::zero())];
    for q in 1..=height {
        for p in 1..=height {
            if p.gcd(&q) == 1 {
                let v = Rational::new(BigInt::from(p), BigInt::from(q));
                out.push((p.max(q), v.clone()));
                out.push((p.max(q), -v));
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.abs().cmp(&b.1.abs())).then_with(|| b.1.cmp(&a.1)));
    out.into_iter().map(|(_, v)| v).collect()
}

fn height_of(v: &Rational) -> BigInt {
    v.numer().abs().max(v.denom().clone())
}

/// `x^k` on the support as integer polynomials: one weight vector (over the
/// degree-`k` basis) per exponent `α` on the support.
struct PowerForm {
    terms: Vec<(Vec<u32>, Vec<BigInt>)>,
    exponents: Vec<Vec<u32>>,
    /// Per basis coordinate, the nonzero `(term, weight)` pairs in `i128`.
    columns: Option<Vec<Vec<(usize, i128)>>>,
    width: usize,
}

impl PowerForm {
    fn new(ring: &RationalRing, support: &[usize], k: usize) -> Self {
        let m = ring.generators();
        let piece = &ring.pieces[k];
        let width = piece.basis.len();
        let mut rational = Vec::new();
        for alpha in monomials(support.len(), k) {
            let mut e: Monomial = vec![0; m];
            for (s, &a) in support.iter().zip(&alpha) {
                e[*s] = a;
            }
            let multinomial = alpha.iter().fold(factorial(k), |num, &a| num / factorial(a as usize));
            let row: Vec<Rational> = piece.reduction[piece.index[&e]]
                .iter()
                .map(|c| c * Rational::from_bigint(&multinomial))
                .collect();
            rational.push((alpha, row));
        }
        let lcm = rational
            .iter()
            .flat_map(|(_, r)| r.iter())
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let terms: Vec<(Vec<u32>, Vec<BigInt>)> = rational
            .into_iter()
            .map(|(alpha, row)| (alpha, row.iter().map(|c| (c * Rational::from_bigint(&lcm)).to_integer()).collect()))
            .filter(|(_, row): &(Vec<u32>, Vec<BigInt>)| row.iter().any(|c| !c.is_zero()))
            .collect();
        let exponents = terms.iter().map(|(a, _)| a.clone()).collect();
        let columns = (0..width)
            .map(|b| {
                terms
                    .iter()
                    .enumerate()
                    .filter(|(_, (_, row))| !row[b].is_zero())
                    .map(|(t, (_, row))| Some((t, row[b].to_i128()?)))
                    .collect::<Option<Vec<_>>>()
            })
            .collect();
        PowerForm { terms, exponents, columns, width }
    }

    /// Checked `i128` evaluation; `None` on overflow or when the weights
    /// do not fit.
    fn vanishes_at(&self, v: &[i128], monos: &mut Vec<i128>) -> Option<bool> {
        let columns = self.columns.as_ref()?;
        monos.clear();
        for alpha in &self.exponents {
            let mut mono = 1i128;
            for (&x, &a) in v.iter().zip(alpha) {
                for _ in 0..a {
                    mono = mono.checked_mul(x)?;
                }
            }
            monos.push(mono);
        }
        for column in columns {
            let mut acc = 0i128;
            for &(t, w) in column {
                acc = acc.checked_add(w.checked_mul(monos[t])?)?;
            }
            if acc != 0 {
                return Some(false);
            }
        }
        Some(true)
    }

    /// Whether `x^k = 0` at the integer coefficient vector `v`.
    fn vanishes(&self, v: &[BigInt]) -> bool {
        let sv: Option<Vec<i128>> = v.iter().map(|x| x.to_i128()).collect();
        if let Some(r) = sv.and_then(|sv| self.vanishes_at(&sv, &mut Vec::new())) {
            return r;
        }
        let mut acc = vec![BigInt::zero(); self.width];
        for (alpha, row) in &self.terms {
            let mono = v.iter().zip(alpha).fold(BigInt::one(), |p, (x, &a)| p * x.pow(a));
            for (slot, w) in acc.iter_mut().zip(row) {
                *slot += w * &mono;
            }
        }
        acc.iter().all(Zero::is_zero)
    }

    /// Coefficient polynomials in `t` along `(1, t)` for a two-element
    /// support, lowest degree first.
    fn along_line(&self, k: usize) -> Vec<Vec<Rational>> {
        (0..self.width)
            .map(|b| {
                let mut p = vec![Rational::zero(); k + 1];
                for (alpha, row) in &self.terms {
                    p[alpha[1] as usize] += Rational::from_bigint(&row[b]);
                }
                trim(p)
            })
            .collect()
    }
}

fn factorial(k: usize) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

fn trim(mut p: Vec<Rational>) -> Vec<Rational> {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

fn poly_rem(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut r = a.to_vec();
    let lead = b.last().expect("nonzero divisor").clone();
    while r.len() >= b.len() && !r.is_empty() {
        let shift = r.len() - b.len();
        let f = r.last().expect("nonempty").clone() / &lead;
        for (i, c) in b.iter().enumerate() {
            r[shift + i] = r[shift + i].clone() - f.clone() * c;
        }
        r = trim(r);
    }
    r
}

fn poly_gcd(mut a: Vec<Rational>, mut b: Vec<Rational>) -> Vec<Rational> {
    while !b.is_empty() {
        let r = poly_rem(&a, &b);
        a = b;
        b = r;
    }
    if let Some(lead) = a.last().cloned() {
        for c in &mut a {
            *c = c.clone() / &lead;
        }
    }
    a
}

fn divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let n = n.abs().to_u64()?;
    if n > 1_000_000_000_000 {
        return None;
    }
    let mut out = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(BigInt::from(d));
            out.push(BigInt::from(n / d));
        }
        d += 1;
    }
    Some(out)
}

/// Distinct rational roots of a nonzero polynomial, or `None` when its
/// coefficients are too large to enumerate candidates.
fn rational_roots(p: &[Rational]) -> Option<Vec<Rational>> {
    let lcm = p.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let mut ints: Vec<BigInt> = p.iter().map(|c| (c * Rational::from_bigint(&lcm)).to_integer()).collect();
    let mut roots = Vec::new();
    let zeros = ints.iter().take_while(|c| c.is_zero()).count();
    if zeros > 0 {
        roots.push(Rational::zero());
        ints.drain(..zeros);
    }
    if ints.len() > 1 {
        let (c0, cd) = (ints[0].clone(), ints[ints.len() - 1].clone());
        for num in divisors(&c0)? {
            for den in divisors(&cd)? {
                for sign in [1, -1] {
                    let t = Rational::new(BigInt::from(sign) * &num, den.clone());
                    let val = ints.iter().rev().fold(Rational::zero(), |acc, c| acc * &t + Rational::from_bigint(c));
                    if val.is_zero() && !roots.contains(&t) {
                        roots.push(t);
                    }
                }
            }
        }
    }
    Some(roots)
}

/// Finds `x = Σ_{s ∈ support} c_s y_s` with `x ≠ 0`, `x^{N+1} = 0`.
///
/// With no support given every generator is allowed.
pub fn search_nilpotents(
    ring: &RationalRing,
    degree: usize,
    height: u64,
    support: Option<&[usize]>,
) -> Result<NilpotentSearch> {
    let m = ring.generators();
    let support: Vec<usize> = match support {
        Some(s) => {
            let mut s = s.to_vec();
            s.sort_unstable();
            s.dedup();
            if let Some(&bad) = s.iter().find(|&&i| i >= m) {
                return Err(Error::IndexOutOfRange(format!("support index {} with {m} generators", bad + 1)));
            }
            s
        }
        None => (0..m).collect(),
    };
    let k = degree + 1;
    let embed = |coeffs: &[Rational]| -> Vec<Rational> {
        let mut full = vec![Rational::zero(); m];
        for (s, c) in support.iter().zip(coeffs) {
            full[*s] = c.clone();
        }
        full
    };
    let mut result = NilpotentSearch {
        degree,
        height,
        support: support.clone(),
        witnesses: Vec::new(),
        exhaustive: true,
    };
    if support.is_empty() {
        return Ok(result);
    }
    if k > ring.top_degree() {
        // Every class qualifies; report the generators.
        result.witnesses = support
            .iter()
            .map(|&s| (0..m).map(|i| if i == s { Rational::one() } else { Rational::zero() }).collect())
            .collect();
        result.exhaustive = false;
        return Ok(result);
    }
    let form = PowerForm::new(ring, &support, k);
    let mut candidates: Vec<Vec<Rational>> = Vec::new();
    let exact = match support.len() {
        1 => {
            if form.terms.is_empty() {
                candidates.push(vec![Rational::one()]);
            }
            true
        }
        2 => {
            if form.vanishes(&[BigInt::zero(), BigInt::one()]) {
                candidates.push(vec![Rational::zero(), Rational::one()]);
            }
            let g = form.along_line(k).into_iter().fold(Vec::new(), poly_gcd);
            if g.is_empty() {
                false
            } else if let Some(roots) = rational_roots(&g) {
                candidates.extend(roots.into_iter().map(|t| vec![Rational::one(), t]));
                true
            } else {
                false
            }
        }
        _ => false,
    };
    if !exact {
        candidates = grid_search(&form, support.len(), height);
    }
    candidates.sort_by(|a, b| {
        let ha = a.iter().map(height_of).max();
        let hb = b.iter().map(height_of).max();
        ha.cmp(&hb).then_with(|| a.iter().position(|c| !c.is_zero()).cmp(&b.iter().position(|c| !c.is_zero())))
            .then_with(|| b.cmp(a))
    });
    for c in candidates {
        let full = embed(&c);
        let x = ring.linear(&full);
        if !ring.power(&x, k)?.is_zero() {
            return Err(Error::InvariantViolation(format!(
                "nilpotent witness {c:?} failed exact verification"
            )));
        }
        result.witnesses.push(full);
    }
    result.exhaustive = exact;
    Ok(result)
}

fn grid_search(form: &PowerForm, len: usize, height: u64) -> Vec<Vec<Rational>> {
    let grid: Vec<(i64, i64)> = rational_grid(height)
        .iter()
        .map(|v| (v.numer().to_i64().expect("small grid"), v.denom().to_i64().expect("small grid")))
        .collect();
    let mut found = Vec::new();
    for lead in 0..len {
        let free = len - lead - 1;
        let check = |tail: &[(i64, i64)], monos: &mut Vec<i128>| -> Option<Vec<Rational>> {
            let l = tail.iter().fold(1i64, |acc, &(_, q)| acc.lcm(&q));
            let mut v = vec![0i128; len];
            v[lead] = l as i128;
            for (slot, &(p, q)) in v[lead + 1..].iter_mut().zip(tail) {
                *slot = (p * (l / q)) as i128;
            }
            let hit = form.vanishes_at(&v, monos).unwrap_or_else(|| {
                form.vanishes(&v.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>())
            });
            hit.then(|| {
                let mut out = vec![Rational::zero(); len];
                out[lead] = Rational::one();
                for (slot, &(p, q)) in out[lead + 1..].iter_mut().zip(tail) {
                    *slot = Rational::new(BigInt::from(p), BigInt::from(q));
                }
                out
            })
        };
        if free == 0 {
            found.extend(check(&[], &mut Vec::new()));
            continue;
        }
        let part: Vec<Vec<Rational>> = grid
            .par_iter()
            .flat_map_iter(|&first| {
                let mut local = Vec::new();
                let mut monos = Vec::new();
                let mut idx = vec![0usize; free - 1];
                let mut tail = vec![first; free];
                loop {
                    for (slot, &i) in tail[1..].iter_mut().zip(&idx) {
                        *slot = grid[i];
                    }
                    local.extend(check(&tail, &mut monos));
                    let Some(pos) = (0..idx.len()).rev().find(|&p| idx[p] + 1 < grid.len()) else { break };
                    idx[pos] += 1;
                    for later in &mut idx[pos + 1..] {
                        *later = 0;
                    }
                }
                local
            })
            .collect();
        found.extend(part);
    }
    found
}
