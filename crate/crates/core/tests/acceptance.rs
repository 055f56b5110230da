//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always reach the output.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use qtlab::cohomology::{
    build_ring, facial_restriction, integral_torsion, poincare_polynomial, product_structure, search_nilpotents,
    ProductSearchOutcome, RationalRing,
};
use qtlab::enumeration::{census, enumerate_valid};
use qtlab::exact::{determinant, Rational, Scalar};
use qtlab::isotropy::is_action_free;
use qtlab::normal_form::{classify, conjugate, is_unipotent_upper, NormalFormResult};
use qtlab::{CoefficientMode, MultiIndex, Shape, VectorMatrix};
use rand::{Rng, SeedableRng};

const BOUND: i64 = 2;
const HEIGHT: u64 = 8;
const CENSUS_SHAPES: &[&[usize]] = &[
    &[1, 1],
    &[2, 1],
    &[1, 2],
    &[2, 2],
    &[3, 1],
    &[3, 2],
    &[4, 1],
    &[1, 1, 1],
    &[2, 1, 1],
];

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome { ok: true, detail: detail.into() }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome { ok: false, detail: detail.into() }
}

fn shape(d: &[usize]) -> Shape {
    Shape::new(d.to_vec()).unwrap()
}

fn census_pool() -> Vec<VectorMatrix> {
    CENSUS_SHAPES
        .iter()
        .flat_map(|d| enumerate_valid(&shape(d), CoefficientMode::Integer, BOUND))
        .collect()
}

/// `(b, c)` off-diagonal entries of a normalized (1,1) matrix.
fn square(b: i64, c: i64) -> VectorMatrix {
    VectorMatrix::from_blocks(shape(&[1, 1]), CoefficientMode::Integer, &[vec![vec![1], vec![b]], vec![vec![c], vec![1]]])
        .unwrap()
}

fn criterion_1() -> Outcome {
    let mut cases = 0;
    for b in -4..=4 {
        for c in -4..=4 {
            cases += 1;
            let a = square(b, c);
            // Minors of the 2×2 matrix [[1, b], [c, 1]]: 1, 1, 1 - bc.
            let oracle = [1i64, 1, 1 - b * c].iter().all(|m| m.abs() == 1);
            if a.is_valid().valid != oracle || oracle != (b * c == 0 || b * c == 2) {
                return fail(format!("disagreement at b={b}, c={c}"));
            }
        }
    }
    pass(format!("{cases} cases"))
}

/// Every integer matrix of the shape with entries in `[-2, 2]`, diagonal
/// included.
fn all_matrices(shape: &Shape) -> impl Iterator<Item = VectorMatrix> + '_ {
    let cells = shape.factors() * shape.dim();
    let total = 5usize.pow(cells as u32);
    (0..total).map(move |mut code| {
        let rows: Vec<Vec<i64>> = (0..shape.factors())
            .map(|_| {
                (0..shape.dim())
                    .map(|_| {
                        let v = (code % 5) as i64 - 2;
                        code /= 5;
                        v
                    })
                    .collect()
            })
            .collect();
        VectorMatrix::from_rows(shape.clone(), CoefficientMode::Integer, &rows).unwrap()
    })
}

fn criterion_2() -> Outcome {
    let mut checked = 0usize;
    let mut valid = 0usize;
    for d in [&[1, 1][..], &[2, 1], &[1, 1, 1]] {
        let s = shape(d);
        for a in all_matrices(&s) {
            checked += 1;
            let v = a.is_valid().valid;
            valid += v as usize;
            if v != is_action_free(&a).unwrap() {
                return fail(format!("discrepancy at\n{a}"));
            }
        }
    }
    let mut rng = rand::rngs::StdRng::seed_from_u64(20240601);
    let mut random_valid = 0;
    for trial in 0..600 {
        let dims: Vec<usize> = (0..3).map(|_| rng.gen_range(1..=3)).collect();
        let s = shape(&dims);
        let mut rows: Vec<Vec<i64>> = (0..3).map(|_| (0..s.dim()).map(|_| rng.gen_range(-3..=3)).collect()).collect();
        if trial % 2 == 0 {
            // A Bott tower (valid) under a random block order and random
            // column signs, then one entry perturbed half of the time.
            let order = {
                let mut o = vec![0usize, 1, 2];
                for i in (1..3).rev() {
                    o.swap(i, rng.gen_range(0..=i));
                }
                o
            };
            for (pos_i, &i) in order.iter().enumerate() {
                for (pos_j, &j) in order.iter().enumerate() {
                    for p in 0..dims[j] {
                        let c = s.offset(j) + p;
                        rows[i][c] = match pos_i.cmp(&pos_j) {
                            std::cmp::Ordering::Equal => 1,
                            std::cmp::Ordering::Greater => 0,
                            std::cmp::Ordering::Less => rows[i][c],
                        };
                    }
                }
            }
            for c in 0..s.dim() {
                if rng.gen_bool(0.5) {
                    for row in rows.iter_mut() {
                        row[c] = -row[c];
                    }
                }
            }
            if rng.gen_bool(0.5) {
                let (i, c) = (rng.gen_range(0..3), rng.gen_range(0..s.dim()));
                rows[i][c] = rng.gen_range(-3..=3);
            }
        }
        let a = VectorMatrix::from_rows(s, CoefficientMode::Integer, &rows).unwrap();
        checked += 1;
        let v = a.is_valid().valid;
        random_valid += v as usize;
        if v != is_action_free(&a).unwrap() {
            return fail(format!("discrepancy at random\n{a}"));
        }
    }
    pass(format!(
        "{checked} matrices, {valid} valid exhaustive, {random_valid} valid among 600 random m=3, zero discrepancies"
    ))
}

fn superdiagonal_product(nf: &VectorMatrix) -> Option<i64> {
    let m = nf.factors();
    let mut product = 1i64;
    for i in 0..m {
        let (r, c) = if i == 0 { (m - 1, 0) } else { (i - 1, i) };
        let nonzero: Vec<i64> = nf.block(r, c).iter().copied().filter(|&v| v != 0).collect();
        if nonzero.is_empty() || nonzero.iter().any(|&v| v != nonzero[0]) {
            return None;
        }
        product *= nonzero[0];
    }
    Some(product)
}

fn criterion_3(pool: &[VectorMatrix]) -> Outcome {
    let (mut uni, mut cyc, mut other) = (0, 0, 0);
    for a in pool {
        let m = a.factors();
        let records = a.principal_minors().records;
        let all_one = records.iter().all(|r| r.value.is_one());
        let proper_one = records.iter().filter(|r| r.subset.len() < m).all(|r| r.value.is_one());
        let result = match classify(a) {
            Ok(r) => r,
            Err(e) => return fail(format!("{e} on\n{a}")),
        };
        match (&result, all_one, proper_one) {
            (NormalFormResult::Unipotent { sigma, normal_form }, true, _) => {
                if conjugate(a, sigma).unwrap() != *normal_form || !is_unipotent_upper(normal_form) {
                    return fail(format!("bad unipotent form for\n{a}"));
                }
                uni += 1;
            }
            (NormalFormResult::Cyclic { sigma, normal_form, components }, false, true) => {
                let want = if m % 2 == 0 { 2 } else { -2 };
                let product = superdiagonal_product(normal_form);
                if conjugate(a, sigma).unwrap() != *normal_form
                    || product != Some(want)
                    || components.iter().product::<i64>() != want
                {
                    return fail(format!("bad cyclic form for\n{a}"));
                }
                cyc += 1;
            }
            (NormalFormResult::GeneralNonBott { .. }, false, false) => other += 1,
            _ => return fail(format!("status {} disagrees with minors for\n{a}", result.status())),
        }
    }
    pass(format!(
        "{} valid matrices: {uni} unipotent, {cyc} cyclic with verified product, {other} non-Bott, zero invariant violations",
        pool.len()
    ))
}

fn criterion_4() -> Outcome {
    let expected = [(&[1, 1][..], 3), (&[2, 1], 5), (&[1, 1, 1], 25), (&[2, 2], 7)];
    let mut total = 0;
    for (d, count) in expected {
        let r = match census(&shape(d), CoefficientMode::Gf2, 1, false, 1) {
            Ok(r) => r,
            Err(e) => return fail(format!("{d:?}: {e}")),
        };
        if r.counts.valid != count || r.counts.unipotent != r.counts.valid {
            return fail(format!("{d:?}: {:?}", r.counts));
        }
        total += r.counts.valid;
    }
    pass(format!("{total} valid GF(2) matrices, all unipotent"))
}

fn criterion_5(pool: &[VectorMatrix]) -> Outcome {
    let mut n = 0;
    for a in pool.iter().filter(|a| a.shape().dim() <= 5) {
        let ring: RationalRing = match build_ring(a) {
            Ok(r) => r,
            Err(e) => return fail(format!("{e} on\n{a}")),
        };
        if ring.poincare_ranks() != poincare_polynomial(a.shape())
            || ring.poincare_ranks().iter().sum::<usize>() != a.shape().vertex_count()
        {
            return fail(format!("rank identity fails on\n{a}"));
        }
        match integral_torsion(a) {
            Ok(t) if t.is_torsion_free() => {}
            Ok(t) => return fail(format!("torsion {:?} on\n{a}", t.torsion)),
            Err(e) => return fail(format!("{e} on\n{a}")),
        }
        n += 1;
    }
    pass(format!("{n} rings, ranks match and no torsion"))
}

fn criterion_6(pool: &[VectorMatrix]) -> Outcome {
    let mut checks = 0;
    for a in pool.iter().filter(|a| a.factors() <= 3) {
        let ring: RationalRing = build_ring(a).unwrap();
        for j in 0..a.factors() {
            let face: RationalRing = match facial_restriction(a, j) {
                Ok(r) => r,
                Err(e) => return fail(format!("{e} on\n{a}")),
            };
            let mut ranks = face.poincare_ranks();
            ranks.resize(ring.top_degree() + 1, 0);
            if ranks != ring.killed_generator_ranks(j) {
                return fail(format!("factor {} of\n{a}", j + 1));
            }
            checks += 1;
        }
    }
    pass(format!("{checks} facial restrictions agree"))
}

fn criterion_7(pool: &[VectorMatrix]) -> Outcome {
    let (mut cyclic, mut found) = (0, 0);
    for a in pool {
        let ring: RationalRing = build_ring(a).unwrap();
        let class = classify(a).unwrap();
        if matches!(class, NormalFormResult::Cyclic { .. }) {
            let min = *a.shape().dims().iter().min().unwrap();
            let s = search_nilpotents(&ring, min, HEIGHT, None).unwrap();
            if !s.witnesses.is_empty() {
                return fail(format!("nilpotent class on cyclic matrix\n{a}"));
            }
            cyclic += 1;
        }
        match product_structure(a, HEIGHT) {
            Ok(ProductSearchOutcome::Found { witness }) => {
                let dims = a.shape().dims();
                let rows: Vec<Vec<Rational>> = witness.clone();
                let verified = witness.iter().enumerate().all(|(i, row)| {
                    ring.power(&ring.linear(row), dims[i] + 1).unwrap().is_zero()
                }) && qtlab::exact::rank(&rows) == a.factors();
                if !verified || !class.is_unipotent() {
                    return fail(format!("product witness {witness:?} rejected on\n{a}"));
                }
                found += 1;
            }
            Ok(_) => {}
            Err(e) => return fail(format!("{e} on\n{a}")),
        }
    }
    let ring: RationalRing = build_ring(&square(1, 2)).unwrap();
    let s = search_nilpotents(&ring, 1, HEIGHT, None).unwrap();
    if s.status() != "disproved" {
        return fail("cyclic (1,1) matrix not disproved exactly");
    }
    pass(format!(
        "{} matrices: {cyclic} cyclic with no nilpotent class, {found} product witnesses verified and unipotent; cyclic (1,1) disproved exactly",
        pool.len()
    ))
}

fn criterion_8() -> Outcome {
    let mut slowest = Duration::ZERO;
    for b in (-4..=4).filter(|&b| b != 0) {
        let start = Instant::now();
        let a = square(b, 0);
        let ring: RationalRing = build_ring(&a).unwrap();
        let x = ring.linear(&[Rational::from_i64(b), Rational::from_i64(2)]);
        if !ring.multiply(&x, &x).unwrap().is_zero() {
            return fail(format!("(2y2 + {b} y1)^2 != 0"));
        }
        let Ok(ProductSearchOutcome::Found { witness }) = product_structure(&a, HEIGHT) else {
            return fail(format!("b = {b}: no product structure"));
        };
        // Some witness row must be proportional to (b, 2).
        let proportional = witness
            .iter()
            .any(|r| r[0].clone() * Rational::from_i64(2) == r[1].clone() * Rational::from_i64(b) && !r[1].is_zero());
        if !proportional {
            return fail(format!("b = {b}: witness {witness:?}"));
        }
        slowest = slowest.max(start.elapsed());
    }
    if slowest >= Duration::from_secs(1) {
        return fail(format!("slowest case {slowest:?}"));
    }
    pass(format!("8 values of b, slowest {slowest:?}"))
}

fn criterion_9() -> Outcome {
    // a^1_{11}, a^1_{12}, a^2_{11} / a^1_{21}, a^1_{22}, a^2_{21} as distinct values.
    let (a111, a112, a211, a121, a122, a221) = (11, 12, 13, 21, 22, 23);
    let s = shape(&[2, 1]);
    let a = VectorMatrix::from_rows(s.clone(), CoefficientMode::Integer, &[vec![a111, a112, a211], vec![a121, a122, a221]])
        .unwrap();
    let a11 = a.submatrix(&MultiIndex::from_one_based(&s, &[1, 1]).unwrap()).unwrap();
    let a21 = a.submatrix(&MultiIndex::from_one_based(&s, &[2, 1]).unwrap()).unwrap();
    if a11 != vec![vec![a111, a211], vec![a121, a221]] || a21 != vec![vec![a112, a211], vec![a122, a221]] {
        return fail(format!("submatrices {a11:?} {a21:?}"));
    }
    // Facet normals: F^1_0 -> a_1, F^1_1 -> e_1, F^1_2 -> e_2, F^2_0 -> a_2, F^2_1 -> e_3.
    let mut rng = rand::rngs::StdRng::seed_from_u64(34);
    for _ in 0..200 {
        let rows: Vec<Vec<i64>> = (0..2).map(|_| (0..3).map(|_| rng.gen_range(-3..=3)).collect()).collect();
        let a = VectorMatrix::from_rows(s.clone(), CoefficientMode::Integer, &rows).unwrap();
        let normal = |facet: (usize, usize)| -> Vec<i64> {
            match facet {
                (1, 0) => rows[0].clone(),
                (2, 0) => rows[1].clone(),
                (1, k) => (0..3).map(|c| (c == k - 1) as i64).collect(),
                (_, _) => vec![0, 0, 1],
            }
        };
        let vertex_det = |i: usize, j: usize| -> BigInt {
            let facets: Vec<(usize, usize)> =
                (0..3).filter(|&k| k != i).map(|k| (1, k)).chain((0..2).filter(|&k| k != j).map(|k| (2, k))).collect();
            let flat: Vec<i64> = facets.iter().flat_map(|&f| normal(f)).collect();
            determinant(&flat, 3)
        };
        let minors = |k: &[usize]| -> Vec<BigInt> {
            let sub = a.submatrix(&MultiIndex::from_one_based(&s, k).unwrap()).unwrap();
            vec![
                BigInt::from(sub[0][0]),
                BigInt::from(sub[1][1]),
                determinant(&[sub[0][0], sub[0][1], sub[1][0], sub[1][1]], 2),
            ]
        };
        let abs = |v: BigInt| if v < BigInt::zero() { -v } else { v };
        let m21 = minors(&[2, 1]);
        let m11 = minors(&[1, 1]);
        let checks = [
            (abs(vertex_det(2, 1)), abs(m21[2].clone())),
            (abs(vertex_det(0, 1)), abs(BigInt::from(rows[1][2]))),
            (abs(vertex_det(2, 0)), abs(BigInt::from(rows[0][1]))),
            (abs(vertex_det(2, 0)), abs(m21[0].clone())),
            (abs(vertex_det(0, 1)), abs(m21[1].clone())),
            (abs(vertex_det(1, 0)), abs(m11[0].clone())),
            (abs(vertex_det(0, 1)), abs(m11[1].clone())),
            (abs(vertex_det(1, 1)), abs(m11[2].clone())),
            (abs(vertex_det(0, 0)), BigInt::one()),
        ];
        if let Some((got, want)) = checks.iter().find(|(g, w)| g != w) {
            return fail(format!("vertex determinant {got} vs minor {want} for {rows:?}"));
        }
        let all_vertices = (0..3).all(|i| (0..2).all(|j| abs(vertex_det(i, j)).is_one()));
        if all_vertices != a.is_valid().valid {
            return fail(format!("vertex conditions disagree with minors for {rows:?}"));
        }
    }
    pass("submatrix layout and per-vertex determinants on 200 random matrices")
}

fn main() -> ExitCode {
    let start = Instant::now();
    let pool = census_pool();
    println!("census pool: {} valid matrices over {} shapes, entries in [-{BOUND}, {BOUND}]", pool.len(), CENSUS_SHAPES.len());
    type Runner<'a> = Box<dyn Fn() -> Outcome + 'a>;
    let criteria: Vec<(&str, Option<u64>, Runner)> = vec![
        ("1 validity of (1,1) matrices iff bc in {0,2}", Some(1), Box::new(criterion_1)),
        ("2 validity iff free action", Some(60), Box::new(criterion_2)),
        ("3 unipotent and cyclic normal forms", Some(120), Box::new(|| criterion_3(&pool))),
        ("4 GF(2) census is unipotent", Some(30), Box::new(criterion_4)),
        ("5 ring ranks and torsion freeness", Some(120), Box::new(|| criterion_5(&pool))),
        ("6 facial restriction equals killing a generator", None, Box::new(|| criterion_6(&pool))),
        ("7 cyclic obstruction and product witnesses", None, Box::new(|| criterion_7(&pool))),
        ("8 Hirzebruch product witnesses", None, Box::new(criterion_8)),
        ("9 triangular cylinder submatrices", None, Box::new(criterion_9)),
    ];
    let mut failures = 0;
    for (name, limit, run) in &criteria {
        let t = Instant::now();
        let mut outcome = run();
        let elapsed = t.elapsed();
        if let Some(limit) = limit {
            if elapsed > Duration::from_secs(*limit) {
                outcome = fail(format!("{} (took {elapsed:.2?}, limit {limit} s)", outcome.detail));
            }
        }
        failures += !outcome.ok as usize;
        println!(
            "{} criterion {name}: {} [{elapsed:.2?}]",
            if outcome.ok { "PASS" } else { "FAIL" },
            outcome.detail
        );
    }
    println!("{} of {} criteria passed in {:.2?}", criteria.len() - failures, criteria.len(), start.elapsed());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
