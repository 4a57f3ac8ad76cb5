//! Local unitary invariants of multipartite quantum states.
//!
//! The algebra of LU-invariant polynomials, taken in the limit of large local
//! dimensions, is freely generated by invariants indexed by connected finite
//! coverings of the bouquet graph with `k - 1` loops, i.e. by transitive
//! `(k-1)`-tuples of permutations up to simultaneous conjugation. This crate
//! enumerates those tuples, counts them, evaluates the invariants on dense
//! states and checks the structural properties numerically.
//!
//! Degrees are reported as `m`, the degree in the state coefficients (and
//! separately in their conjugates); the total polynomial degree is `2m`.

mod contract;
pub mod counting;
pub mod error;
pub mod invariants;
pub mod io;
pub mod perm;
pub mod states;
pub mod verify;

pub use error::{Error, Result};
pub use num_bigint::BigUint;
pub use num_complex::Complex64;
