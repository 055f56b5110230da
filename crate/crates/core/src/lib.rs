//! Exact decision procedures for quasitoric manifolds and small covers whose
//! orbit polytope is a product of simplices `Δ^{n_1} × … × Δ^{n_m}`.
//!
//! A manifold of this kind is encoded by its *vector matrix*: an `m × m`
//! block matrix whose `(i, j)` entry is an integer vector of length `n_j`
//! (or a vector over GF(2) for small covers). Everything in this crate works
//! on that encoding with exact integer or rational arithmetic:
//!
//! * [`charmat`]: the matrix type, principal minors and validity.
//! * [`isotropy`]: Smith normal form and the freeness check of the torus
//!   action on the product of odd spheres.
//! * [`normal_form`]: conjugation by block permutations, Bott-tower and
//!   cyclic normal forms, tower extraction.
//! * [`cohomology`]: the graded cohomology ring, element arithmetic,
//!   facial restriction and the search for product generators.
//! * [`enumeration`]: exhaustive census of valid matrices with bounded
//!   entries.
//!
//! Indexing convention: factor indices, block components, multi-index
//! entries and permutations are 0-based in the API and 1-based when
//! rendered as JSON. Vertex labels `(j_1, …, j_m)` with `0 ≤ j_i ≤ n_i` are
//! 0-based in both places.

pub mod charmat;
pub mod cohomology;
pub mod enumeration;
mod error;
pub mod exact;
pub mod isotropy;
pub mod normal_form;
pub mod polytope;

pub use charmat::{CoefficientMode, MinorRecord, MinorReport, SignFlips, Validity, VectorMatrix};
pub use error::{Error, Result};
pub use normal_form::{BottTowerDescription, NormalFormResult, Permutation};
pub use polytope::{MultiIndex, Shape, Vertex};
