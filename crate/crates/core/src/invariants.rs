//! Evaluation of the LU-invariant polynomials attached to tuple orbits.
//!
//! For a tuple `(σ_1, …, σ_{k-1})` of permutations of `m` points the pure
//! state invariant is
//!
//! ```text
//! f(ψ) = Σ  ∏_l ψ[i^l_1 … i^l_k] · ∏_l conj ψ[i^{σ_1(l)}_1 … i^{σ_{k-1}(l)}_{k-1}, i^l_k]
//! ```
//!
//! summed over all `k·m` indices. Summing out each `i^l_k` first turns every
//! pair of factors into an entry of the reduced density matrix
//! `ρ = Tr_k |ψ⟩⟨ψ|`, giving the mixed-state form
//!
//! ```text
//! f(ρ) = Σ  ∏_l ρ[(i^l_1 … i^l_r), (i^{σ_1(l)}_1 … i^{σ_r(l)}_r)]
//! ```
//!
//! which is what [`eval_pure`] computes. [`eval_pure_direct`] sums the
//! first form as written and serves as an independent route.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contract::{Axis, IndexSum, Operand};
use crate::error::{Error, Result};
use crate::perm::{enumerate_orbits, OrbitKey, PermTuple};
use crate::states::{MixedState, PureState};

/// Refuse evaluations with more terms than this.
pub const DEFAULT_CONTRACTION_BUDGET: u128 = 1_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InvariantKind {
    Pure,
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InvariantSpec {
    pub kind: InvariantKind,
    pub orbit: OrbitKey,
}

impl InvariantSpec {
    pub fn pure(orbit: OrbitKey) -> Self {
        Self {
            kind: InvariantKind::Pure,
            orbit,
        }
    }

    pub fn mixed(orbit: OrbitKey) -> Self {
        Self {
            kind: InvariantKind::Mixed,
            orbit,
        }
    }

    /// Homogeneous degree `m` (degree `m` in ψ and `m` in its conjugate).
    pub fn degree(&self) -> usize {
        self.orbit.degree()
    }

    /// Number of parties of the states this invariant applies to.
    pub fn parties(&self) -> usize {
        match self.kind {
            InvariantKind::Pure => self.orbit.arity() + 1,
            InvariantKind::Mixed => self.orbit.arity(),
        }
    }
}

/// Mixed-state invariant of any representative tuple.
pub fn eval_mixed_tuple(tuple: &PermTuple, rho: &MixedState, budget: u128) -> Result<Complex64> {
    let shape = rho.shape();
    let parties = shape.k();
    if tuple.arity() != parties {
        return Err(Error::ShapeMismatch(format!(
            "tuple of arity {} on a {parties}-party mixed state",
            tuple.arity()
        )));
    }
    let d = shape.total_dim();
    let strides = shape.strides();
    let operands = (0..tuple.m())
        .map(|l| {
            let rows = (0..parties).map(|j| Axis {
                copy: l,
                party: j,
                stride: strides[j] * d,
            });
            let cols = tuple.perms().iter().enumerate().map(|(j, sigma)| Axis {
                copy: sigma.apply(l),
                party: j,
                stride: strides[j],
            });
            Operand {
                data: rho.coeffs(),
                conj: false,
                axes: rows.chain(cols).collect(),
            }
        })
        .collect();
    Ok(IndexSum::new(shape.dims().to_vec(), tuple.m(), operands, budget)?.evaluate())
}

fn check_pure_arity(tuple: &PermTuple, psi: &PureState) -> Result<()> {
    let k = psi.shape().k();
    if tuple.arity() + 1 != k {
        return Err(Error::ShapeMismatch(format!(
            "tuple of arity {} on a {k}-party pure state",
            tuple.arity()
        )));
    }
    Ok(())
}

/// Pure-state invariant of any representative tuple, via the reduced
/// density matrix of the first `k-1` parties.
pub fn eval_pure_tuple(tuple: &PermTuple, psi: &PureState, budget: u128) -> Result<Complex64> {
    check_pure_arity(tuple, psi)?;
    eval_mixed_tuple(tuple, &psi.reduce_last()?, budget)
}

/// Pure-state invariant summed over all `k·m` indices without reducing.
/// Costs `(∏ n_j)^m` terms rather than `(∏_{j<k} n_j)^m`.
pub fn eval_pure_direct(tuple: &PermTuple, psi: &PureState, budget: u128) -> Result<Complex64> {
    check_pure_arity(tuple, psi)?;
    let shape = psi.shape();
    let k = shape.k();
    let strides = shape.strides();
    let mut operands = Vec::with_capacity(2 * tuple.m());
    for l in 0..tuple.m() {
        operands.push(Operand {
            data: psi.coeffs(),
            conj: false,
            axes: (0..k)
                .map(|j| Axis {
                    copy: l,
                    party: j,
                    stride: strides[j],
                })
                .collect(),
        });
        let mut axes: Vec<Axis> = tuple
            .perms()
            .iter()
            .enumerate()
            .map(|(j, sigma)| Axis {
                copy: sigma.apply(l),
                party: j,
                stride: strides[j],
            })
            .collect();
        axes.push(Axis {
            copy: l,
            party: k - 1,
            stride: strides[k - 1],
        });
        operands.push(Operand {
            data: psi.coeffs(),
            conj: true,
            axes,
        });
    }
    Ok(IndexSum::new(shape.dims().to_vec(), tuple.m(), operands, budget)?.evaluate())
}

pub fn eval_pure(spec: &InvariantSpec, psi: &PureState, budget: u128) -> Result<Complex64> {
    if spec.kind != InvariantKind::Pure {
        return Err(Error::Precondition("eval_pure needs a pure-kind invariant".into()));
    }
    eval_pure_tuple(spec.orbit.tuple(), psi, budget)
}

pub fn eval_mixed(spec: &InvariantSpec, rho: &MixedState, budget: u128) -> Result<Complex64> {
    if spec.kind != InvariantKind::Mixed {
        return Err(Error::Precondition("eval_mixed needs a mixed-kind invariant".into()));
    }
    eval_mixed_tuple(spec.orbit.tuple(), rho, budget)
}

/// Evaluates several pure invariants on one state, reducing it only once.
pub fn eval_pure_many(tuples: &[&PermTuple], psi: &PureState, budget: u128) -> Result<Vec<Complex64>> {
    let rho = psi.reduce_last()?;
    tuples
        .iter()
        .map(|t| {
            check_pure_arity(t, psi)?;
            eval_mixed_tuple(t, &rho, budget)
        })
        .collect()
}

/// The free generators of degree `≤ max_m`: one per connected orbit, sorted
/// by degree and then by canonical order.
pub fn generators(k: usize, max_m: usize, budget: u128) -> Result<Vec<InvariantSpec>> {
    let mut out = Vec::new();
    for m in 1..=max_m {
        out.extend(enumerate_orbits(k, m, true, budget)?.into_iter().map(InvariantSpec::pure));
    }
    Ok(out)
}

/// Connected components of the orbit; their invariants multiply to the
/// orbit's invariant.
pub fn factorize_invariant(orbit: &OrbitKey) -> Vec<OrbitKey> {
    orbit.components()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::{Permutation, DEFAULT_ENUMERATION_BUDGET};
    use crate::states::SystemShape;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const B: u128 = DEFAULT_CONTRACTION_BUDGET;

    fn t(perms: &[&[usize]]) -> PermTuple {
        PermTuple::from_one_based(&perms.iter().map(|p| p.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn shape(d: &[usize]) -> SystemShape {
        SystemShape::new(d.to_vec()).unwrap()
    }

    /// Plain odometer over all `k·m` indices, one product per term.
    #[allow(clippy::needless_range_loop)]
    fn brute_pure(tuple: &PermTuple, psi: &PureState) -> Complex64 {
        let dims = psi.shape().dims();
        let strides = psi.shape().strides();
        let (k, m) = (dims.len(), tuple.m());
        let idx_dims: Vec<usize> = (0..m).flat_map(|_| dims.iter().copied()).collect();
        let mut idx = vec![0usize; k * m];
        let at = |idx: &[usize], l: usize, j: usize| idx[l * k + j];
        let mut total = Complex64::new(0.0, 0.0);
        loop {
            let mut term = Complex64::new(1.0, 0.0);
            for l in 0..m {
                let a: usize = (0..k).map(|j| at(&idx, l, j) * strides[j]).sum();
                let mut b = at(&idx, l, k - 1) * strides[k - 1];
                for j in 0..k - 1 {
                    b += at(&idx, tuple.perms()[j].apply(l), j) * strides[j];
                }
                term *= psi.coeffs()[a] * psi.coeffs()[b].conj();
            }
            total += term;
            let mut pos = idx.len();
            loop {
                if pos == 0 {
                    return total;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < idx_dims[pos] {
                    break;
                }
                idx[pos] = 0;
            }
        }
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * a.norm().max(b.norm()).max(1e-300)
    }

    #[test]
    fn degree_one_is_norm() {
        let psi = PureState::random(shape(&[2, 3, 2]), 1, false).unwrap();
        let f = eval_pure_tuple(&PermTuple::identity(1, 2).unwrap(), &psi, B).unwrap();
        assert!(close(f, Complex64::new(psi.norm_sqr(), 0.0), 1e-13));
        let unit = PureState::random(shape(&[2, 3, 2]), 1, true).unwrap();
        let f = eval_pure_tuple(&PermTuple::identity(1, 2).unwrap(), &unit, B).unwrap();
        assert!((f.re - 1.0).abs() < 1e-13 && f.im.abs() < 1e-13);
    }

    #[test]
    fn bell_and_ghz_values() {
        let bell = PureState::ghz(2, 2).unwrap();
        let f = eval_pure_tuple(&t(&[&[2, 1]]), &bell, B).unwrap();
        assert!(close(f, Complex64::new(0.5, 0.0), 1e-14));
        assert!(close(brute_pure(&t(&[&[2, 1]]), &bell), Complex64::new(0.5, 0.0), 1e-14));

        let ghz = PureState::ghz(3, 2).unwrap();
        for tuple in [t(&[&[2, 1], &[2, 1]]), t(&[&[2, 1], &[1, 2]])] {
            let f = eval_pure_tuple(&tuple, &ghz, B).unwrap();
            assert!(close(f, Complex64::new(0.5, 0.0), 1e-14), "{tuple}: {f}");
            assert!(close(brute_pure(&tuple, &ghz), f, 1e-14));
        }
    }

    #[test]
    fn both_routes_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (dims, m) in [(vec![2, 3], 3), (vec![2, 2, 2], 2), (vec![2, 1, 3], 2), (vec![2, 2, 2, 2], 2), (vec![3, 2], 1)] {
            let psi = PureState::random(shape(&dims), 7, false).unwrap();
            for _ in 0..5 {
                let tuple = PermTuple::random(m, dims.len() - 1, &mut rng).unwrap();
                let oracle = brute_pure(&tuple, &psi);
                assert!(close(eval_pure_tuple(&tuple, &psi, B).unwrap(), oracle, 1e-12));
                assert!(close(eval_pure_direct(&tuple, &psi, B).unwrap(), oracle, 1e-12));
            }
        }
    }

    #[test]
    fn mixed_examples() {
        let rho = MixedState::maximally_mixed(shape(&[2, 2])).unwrap();
        let f = eval_mixed_tuple(&PermTuple::identity(1, 2).unwrap(), &rho, B).unwrap();
        assert!(close(f, Complex64::new(1.0, 0.0), 1e-14));
        let swap = t(&[&[2, 1], &[2, 1]]);
        let f = eval_mixed_tuple(&swap, &rho, B).unwrap();
        assert!(close(f, Complex64::new(0.25, 0.0), 1e-14));

        let spec = InvariantSpec::mixed(OrbitKey::of(&swap));
        assert!(close(eval_mixed(&spec, &rho, B).unwrap(), f, 0.0));
        assert!(eval_mixed(&InvariantSpec::pure(OrbitKey::of(&swap)), &rho, B).is_err());
    }

    #[test]
    fn pure_matches_mixed_of_reduction() {
        let psi = PureState::random(shape(&[3, 2, 2]), 3, true).unwrap();
        let rho = psi.reduce_last().unwrap();
        let tuple = t(&[&[2, 3, 1], &[1, 3, 2]]);
        let a = eval_pure_direct(&tuple, &psi, B).unwrap();
        let b = eval_mixed_tuple(&tuple, &rho, B).unwrap();
        assert!(close(a, b, 1e-12));
    }

    #[test]
    fn arity_and_budget_errors() {
        let psi = PureState::random(shape(&[2, 2, 2]), 0, true).unwrap();
        let bad = t(&[&[2, 1]]);
        assert!(matches!(eval_pure_tuple(&bad, &psi, B), Err(Error::ShapeMismatch(_))));
        assert!(matches!(eval_pure_direct(&bad, &psi, B), Err(Error::ShapeMismatch(_))));
        let big = PermTuple::identity(6, 2).unwrap();
        assert!(matches!(eval_pure_tuple(&big, &psi, 100), Err(Error::BudgetExceeded { .. })));
        let spec = InvariantSpec::mixed(OrbitKey::of(&t(&[&[1], &[1]])));
        assert!(eval_pure(&spec, &psi, B).is_err());
    }

    #[test]
    fn representative_independence() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let psi = PureState::random(shape(&[3, 3, 2]), 4, true).unwrap();
        for _ in 0..10 {
            let tuple = PermTuple::random(3, 2, &mut rng).unwrap();
            let pi = Permutation::random(3, &mut rng);
            let a = eval_pure_tuple(&tuple, &psi, B).unwrap();
            let b = eval_pure_tuple(&tuple.conjugate(&pi).unwrap(), &psi, B).unwrap();
            assert!(close(a, b, 1e-12));
        }
    }

    #[test]
    fn conjugation_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let psi = PureState::random(shape(&[2, 3, 2]), 6, true).unwrap();
        for _ in 0..10 {
            let tuple = PermTuple::random(3, 2, &mut rng).unwrap();
            let a = eval_pure_tuple(&tuple, &psi, B).unwrap().conj();
            let b = eval_pure_tuple(&tuple.inverse(), &psi, B).unwrap();
            assert!(close(a, b, 1e-12));
        }
    }

    #[test]
    fn generator_examples() {
        let g = generators(2, 5, DEFAULT_ENUMERATION_BUDGET).unwrap();
        assert_eq!(g.len(), 5);
        for (m, spec) in (1..).zip(&g) {
            assert_eq!(spec.degree(), m);
            let cycle: Vec<usize> = (2..=m).chain([1]).collect();
            assert_eq!(spec.orbit.tuple(), &t(&[&cycle]));
        }
        let g = generators(3, 2, DEFAULT_ENUMERATION_BUDGET).unwrap();
        assert_eq!(g.iter().map(|s| s.degree()).collect::<Vec<_>>(), vec![1, 2, 2, 2]);
        assert_eq!(generators(3, 4, DEFAULT_ENUMERATION_BUDGET).unwrap().len(), 37);
    }

    #[test]
    fn factorization_examples() {
        let connected = OrbitKey::of(&t(&[&[2, 1], &[1, 2]]));
        assert_eq!(factorize_invariant(&connected), vec![connected.clone()]);

        let one = OrbitKey::of(&PermTuple::identity(1, 2).unwrap());
        let two_ids = OrbitKey::of(&PermTuple::identity(2, 2).unwrap());
        assert_eq!(factorize_invariant(&two_ids), vec![one.clone(), one.clone()]);
        let psi = PureState::random(shape(&[2, 2, 2]), 2, false).unwrap();
        let f = eval_pure(&InvariantSpec::pure(two_ids), &psi, B).unwrap();
        assert!(close(f, Complex64::new(psi.norm_sqr().powi(2), 0.0), 1e-13));

        let mixed = OrbitKey::of(&t(&[&[2, 1, 3], &[1, 2, 3]]));
        assert_eq!(factorize_invariant(&mixed), vec![one, connected]);
    }

    #[test]
    fn multiplicativity_spot_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let psi = PureState::random(shape(&[2, 2, 3]), 9, true).unwrap();
        for _ in 0..10 {
            let a = PermTuple::random(2, 2, &mut rng).unwrap();
            let b = PermTuple::random(2, 2, &mut rng).unwrap();
            let joint = eval_pure_tuple(&a.star(&b).unwrap(), &psi, B).unwrap();
            let prod = eval_pure_tuple(&a, &psi, B).unwrap() * eval_pure_tuple(&b, &psi, B).unwrap();
            assert!(close(joint, prod, 1e-12));
        }
    }
}
