//! Numerical and exact checks of the structure of the invariant algebra,
//! each producing a [`CheckReport`] with per-case residuals.
//!
//! Every check is a pure function of its arguments: per-trial seeds are drawn
//! up front from the master seed and trials are merged in order.

use nalgebra::DMatrix;
use num_bigint::BigUint;
use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::counting::{connected_counts, dim_invariants, euler_product};
use crate::error::{Error, Result};
use crate::invariants::{eval_mixed_tuple, eval_pure_direct, eval_pure_many, eval_pure_tuple, generators, DEFAULT_CONTRACTION_BUDGET};
use crate::perm::{check_enumeration_budget, enumerate_orbits, OrbitKey, Permutation, DEFAULT_ENUMERATION_BUDGET};
use crate::states::{random_local_unitary, PureState, SystemShape};

/// Relative singular-value threshold for ranks of value matrices.
pub const VALUE_RANK_THRESHOLD: f64 = 1e-8;
/// Relative singular-value threshold for finite-difference Jacobians.
pub const JACOBIAN_RANK_THRESHOLD: f64 = 1e-6;
/// Central-difference step.
pub const FD_STEP: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budgets {
    pub enumeration: u128,
    pub contraction: u128,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            enumeration: DEFAULT_ENUMERATION_BUDGET,
            contraction: DEFAULT_CONTRACTION_BUDGET,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseRecord {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub max_residual: f64,
    /// `None` for exact checks.
    pub tolerance: Option<f64>,
    pub summary: String,
    pub details: Vec<CaseRecord>,
}

impl CheckReport {
    fn numerical(name: &str, tolerance: f64, summary: String, details: Vec<CaseRecord>) -> Self {
        let max_residual = details.iter().map(|d| d.residual).fold(0.0, f64::max);
        let nan = details.iter().any(|d| d.residual.is_nan());
        Self {
            name: name.into(),
            passed: !nan && max_residual <= tolerance,
            max_residual: if nan { f64::NAN } else { max_residual },
            tolerance: Some(tolerance),
            summary,
            details,
        }
    }

    fn exact(name: &str, summary: String, details: Vec<CaseRecord>) -> Self {
        let max_residual = details.iter().map(|d| d.residual).fold(0.0, f64::max);
        Self {
            name: name.into(),
            passed: max_residual == 0.0,
            max_residual,
            tolerance: None,
            summary,
            details,
        }
    }
}

/// `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_residual(a: Complex64, b: Complex64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

/// Number of singular values above `rel_threshold` times the largest.
pub fn numerical_rank(singular_values: &[f64], rel_threshold: f64) -> usize {
    let largest = singular_values.iter().copied().fold(0.0, f64::max);
    if largest == 0.0 {
        return 0;
    }
    singular_values.iter().filter(|&&s| s > rel_threshold * largest).count()
}

fn sorted_singular_values<T>(svals: impl IntoIterator<Item = T>) -> Vec<f64>
where
    T: Into<f64>,
{
    let mut s: Vec<f64> = svals.into_iter().map(Into::into).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

fn trial_seeds(seed: u64, trials: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials).map(|_| rng.next_u64()).collect()
}

fn check_shape(k: usize, shape: &SystemShape) -> Result<()> {
    if k < 2 {
        return Err(Error::InvalidShape(format!("k must be at least 2, got {k}")));
    }
    if shape.k() != k {
        return Err(Error::ShapeMismatch(format!("shape {:?} does not have {k} parties", shape.dims())));
    }
    Ok(())
}

fn check_stable_range(shape: &SystemShape, m: usize) -> Result<()> {
    if shape.dims().iter().any(|&n| n < m) {
        return Err(Error::Precondition(format!(
            "shape {:?} is below the stable range for degree {m}; every dimension must be at least {m}",
            shape.dims()
        )));
    }
    Ok(())
}

fn tuples(orbits: &[OrbitKey]) -> Vec<&crate::perm::PermTuple> {
    orbits.iter().map(OrbitKey::tuple).collect()
}

/// Every degree-`m` invariant is unchanged by random local unitaries.
pub fn check_invariance(
    k: usize,
    m: usize,
    shape: &SystemShape,
    trials: usize,
    seed: u64,
    tol: f64,
    budgets: &Budgets,
) -> Result<CheckReport> {
    check_shape(k, shape)?;
    let orbits = enumerate_orbits(k, m, false, budgets.enumeration)?;
    let ts = tuples(&orbits);
    let details = trial_seeds(seed, trials)
        .into_par_iter()
        .enumerate()
        .map(|(i, s)| {
            let psi = PureState::random(shape.clone(), s, true)?;
            let us = random_local_unitary(shape, s.wrapping_add(1));
            let moved = psi.apply_local_unitary(&us)?;
            let before = eval_pure_many(&ts, &psi, budgets.contraction)?;
            let after = eval_pure_many(&ts, &moved, budgets.contraction)?;
            let residual = before
                .iter()
                .zip(&after)
                .map(|(a, b)| relative_residual(*a, *b))
                .fold(0.0, f64::max);
            Ok(CaseRecord {
                label: format!("trial {i}"),
                seed: Some(s),
                residual,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = format!(
        "k={k} m={m} shape={:?}: {} invariants x {trials} trials",
        shape.dims(),
        orbits.len()
    );
    Ok(CheckReport::numerical("invariance", tol, summary, details))
}

/// `f_{s⋆t} = f_s f_t` on random orbits and states; residual
/// `|f_{s⋆t} - f_s f_t| / (1 + |f_s f_t|)`.
#[allow(clippy::too_many_arguments)]
pub fn check_multiplicativity(
    k: usize,
    m1: usize,
    m2: usize,
    shape: &SystemShape,
    trials: usize,
    seed: u64,
    tol: f64,
    budgets: &Budgets,
) -> Result<CheckReport> {
    check_shape(k, shape)?;
    let left = enumerate_orbits(k, m1, false, budgets.enumeration)?;
    let right = enumerate_orbits(k, m2, false, budgets.enumeration)?;
    let details = trial_seeds(seed, trials)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let a = &left[rng.random_range(0..left.len())];
            let b = &right[rng.random_range(0..right.len())];
            let joint = a.star(b)?;
            let psi = PureState::random(shape.clone(), rng.next_u64(), true)?;
            let values = eval_pure_many(&[a.tuple(), b.tuple(), joint.tuple()], &psi, budgets.contraction)?;
            let prod = values[0] * values[1];
            Ok(CaseRecord {
                label: format!("{a} * {b} = {joint}"),
                seed: Some(s),
                residual: (values[2] - prod).norm() / (1.0 + prod.norm()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = format!("k={k} degrees {m1}+{m2} shape={:?}, {trials} trials", shape.dims());
    Ok(CheckReport::numerical("multiplicativity", tol, summary, details))
}

fn value_matrix_rank(
    orbits: &[OrbitKey],
    shape: &SystemShape,
    num_states: usize,
    seed: u64,
    budgets: &Budgets,
) -> Result<(usize, Vec<f64>)> {
    let ts = tuples(orbits);
    let columns = trial_seeds(seed, num_states)
        .into_par_iter()
        .map(|s| eval_pure_many(&ts, &PureState::random(shape.clone(), s, true)?, budgets.contraction))
        .collect::<Result<Vec<_>>>()?;
    let d = orbits.len();
    let values = DMatrix::from_fn(2 * d, num_states, |r, c| {
        let z = columns[c][r % d];
        if r < d {
            z.re
        } else {
            z.im
        }
    });
    let s = sorted_singular_values(values.singular_values().iter().copied());
    Ok((numerical_rank(&s, VALUE_RANK_THRESHOLD), s))
}

/// Values of all `d_{k,m}` degree-`m` invariants at `num_states` random
/// states, real and imaginary parts as separate rows, have rank `d_{k,m}`.
/// Refused below the stable range `n ≥ (m, …, m)`.
pub fn check_basis_rank(
    k: usize,
    m: usize,
    shape: &SystemShape,
    num_states: usize,
    seed: u64,
    budgets: &Budgets,
) -> Result<CheckReport> {
    check_shape(k, shape)?;
    check_stable_range(shape, m)?;
    let orbits = enumerate_orbits(k, m, false, budgets.enumeration)?;
    let d = orbits.len();
    if num_states < d {
        return Err(Error::Precondition(format!("{num_states} states cannot reveal rank {d}")));
    }
    let (rank, s) = value_matrix_rank(&orbits, shape, num_states, seed, budgets)?;
    Ok(rank_report("basis_rank", rank, d, &s, seed, format!("k={k} m={m} shape={:?} states={num_states}", shape.dims())))
}

/// Observed rank of the degree-`m` value matrix at any shape, without the
/// stable-range precondition. Returns `(observed rank, d_{k,m})`; nothing is
/// asserted about shapes below the stable range.
pub fn basis_rank_diagnostic(
    k: usize,
    m: usize,
    shape: &SystemShape,
    num_states: usize,
    seed: u64,
    budgets: &Budgets,
) -> Result<(usize, usize)> {
    check_shape(k, shape)?;
    let orbits = enumerate_orbits(k, m, false, budgets.enumeration)?;
    let (rank, _) = value_matrix_rank(&orbits, shape, num_states.max(orbits.len()), seed, budgets)?;
    Ok((rank, orbits.len()))
}

fn rank_report(name: &str, rank: usize, expected: usize, s: &[f64], seed: u64, context: String) -> CheckReport {
    let largest = s.first().copied().unwrap_or(0.0);
    let ratio = |i: usize| s.get(i).map_or(0.0, |v| v / largest);
    let summary = format!(
        "{context}: rank {rank}, expected {expected}; last kept sigma/sigma_max = {:.3e}, first dropped = {:.3e}",
        if rank > 0 { ratio(rank - 1) } else { 0.0 },
        ratio(rank)
    );
    CheckReport::exact(
        name,
        summary,
        vec![CaseRecord {
            label: format!("rank {rank} vs {expected}"),
            seed: Some(seed),
            residual: rank.abs_diff(expected) as f64,
        }],
    )
}

/// Central-difference Jacobian of the generators of degree `≤ max_m` with
/// respect to the real and imaginary parts of ψ has full row rank.
pub fn check_algebraic_independence(
    k: usize,
    max_m: usize,
    shape: &SystemShape,
    seed: u64,
    budgets: &Budgets,
) -> Result<CheckReport> {
    check_shape(k, shape)?;
    check_stable_range(shape, max_m)?;
    let gens = generators(k, max_m, budgets.enumeration)?;
    let g = gens.len();
    let coords = 2 * shape.total_dim();
    if coords < g {
        return Err(Error::Precondition(format!("{coords} real coordinates cannot carry {g} independent generators")));
    }
    let ts: Vec<_> = gens.iter().map(|s| s.orbit.tuple()).collect();
    let psi = PureState::random(shape.clone(), seed, true)?;
    let columns = (0..coords)
        .into_par_iter()
        .map(|c| {
            let delta = if c % 2 == 0 {
                Complex64::new(FD_STEP, 0.0)
            } else {
                Complex64::new(0.0, FD_STEP)
            };
            let mut plus = psi.clone();
            plus.coeffs_mut()[c / 2] += delta;
            let mut minus = psi.clone();
            minus.coeffs_mut()[c / 2] -= delta;
            let fp = eval_pure_many(&ts, &plus, budgets.contraction)?;
            let fm = eval_pure_many(&ts, &minus, budgets.contraction)?;
            Ok(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * FD_STEP)).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let jacobian = DMatrix::from_fn(g, coords, |r, c| columns[c][r]);
    let s = sorted_singular_values(jacobian.singular_values().iter().copied());
    let rank = numerical_rank(&s, JACOBIAN_RANK_THRESHOLD);
    Ok(rank_report(
        "algebraic_independence",
        rank,
        g,
        &s,
        seed,
        format!("k={k} max_m={max_m} shape={:?} generators={g}", shape.dims()),
    ))
}

/// The direct `k`-party summation agrees with the mixed-state summation on
/// the reduced density matrix, for every degree-`m` orbit (under a random
/// relabelling) and random states.
pub fn check_pure_mixed(
    k: usize,
    m: usize,
    shape: &SystemShape,
    trials: usize,
    seed: u64,
    tol: f64,
    budgets: &Budgets,
) -> Result<CheckReport> {
    check_shape(k, shape)?;
    let orbits = enumerate_orbits(k, m, false, budgets.enumeration)?;
    let details = trial_seeds(seed, trials)
        .into_par_iter()
        .enumerate()
        .map(|(i, s)| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let psi = PureState::random(shape.clone(), rng.next_u64(), true)?;
            let rho = psi.reduce_last()?;
            let mut worst: f64 = 0.0;
            for orbit in &orbits {
                let tuple = orbit.tuple().conjugate(&Permutation::random(m, &mut rng))?;
                let direct = eval_pure_direct(&tuple, &psi, budgets.contraction)?;
                let reduced = eval_mixed_tuple(&tuple, &rho, budgets.contraction)?;
                worst = worst.max(relative_residual(direct, reduced));
            }
            Ok(CaseRecord {
                label: format!("trial {i}"),
                seed: Some(s),
                residual: worst,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = format!("k={k} m={m} shape={:?}: {} invariants x {trials} trials", shape.dims(), orbits.len());
    Ok(CheckReport::numerical("pure_mixed", tol, summary, details))
}

/// Invariants are unchanged by zero-padding the state into a larger shape.
#[allow(clippy::too_many_arguments)]
pub fn check_padding(
    k: usize,
    m: usize,
    shape: &SystemShape,
    bigger: &SystemShape,
    trials: usize,
    seed: u64,
    tol: f64,
    budgets: &Budgets,
) -> Result<CheckReport> {
    check_shape(k, shape)?;
    if !bigger.contains(shape) {
        return Err(Error::ShapeMismatch(format!(
            "{:?} does not contain {:?}",
            bigger.dims(),
            shape.dims()
        )));
    }
    let orbits = enumerate_orbits(k, m, false, budgets.enumeration)?;
    let ts = tuples(&orbits);
    let details = trial_seeds(seed, trials)
        .into_par_iter()
        .enumerate()
        .map(|(i, s)| {
            let psi = PureState::random(shape.clone(), s, true)?;
            let small = eval_pure_many(&ts, &psi, budgets.contraction)?;
            let large = eval_pure_many(&ts, &psi.embed(bigger)?, budgets.contraction)?;
            let residual = small
                .iter()
                .zip(&large)
                .map(|(a, b)| relative_residual(*a, *b))
                .fold(0.0, f64::max);
            Ok(CaseRecord {
                label: format!("trial {i}"),
                seed: Some(s),
                residual,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = format!("k={k} m={m} {:?} -> {:?}, {trials} trials", shape.dims(), bigger.dims());
    Ok(CheckReport::numerical("padding", tol, summary, details))
}

/// For `m ≤ max_m`: orbit enumeration count, partition-sum formula and the
/// Euler product of the extracted generator counts agree exactly. The
/// enumeration leg is skipped for degrees beyond the enumeration budget.
pub fn check_series_consistency(k: usize, max_m: usize, budgets: &Budgets) -> Result<CheckReport> {
    let table = connected_counts(k, max_m, budgets.enumeration)?;
    let series = euler_product(&table.connected, max_m);
    let mut details = Vec::new();
    let mut skipped = Vec::new();
    for m in 1..=max_m {
        let formula = dim_invariants(k, m)?;
        let euler = series.coeff(m).clone();
        let mut label = format!("m={m}: formula={formula} euler={euler}");
        let mut equal = formula == euler && formula == table.dims[m - 1];
        if check_enumeration_budget(k - 1, m, budgets.enumeration).is_ok() {
            let direct = BigUint::from(enumerate_orbits(k, m, false, budgets.enumeration)?.len());
            label.push_str(&format!(" enumerated={direct}"));
            equal &= direct == formula;
        } else {
            skipped.push(m);
        }
        label.push_str(&format!(" connected={}", table.connected[m - 1]));
        details.push(CaseRecord {
            label,
            seed: None,
            residual: if equal { 0.0 } else { 1.0 },
        });
    }
    let join = |v: &[BigUint]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",");
    let mut summary = format!("k={k}: dims ({}), connected ({})", join(&table.dims), join(&table.connected));
    if !skipped.is_empty() {
        summary.push_str(&format!("; enumeration leg skipped for m in {skipped:?}"));
    }
    Ok(CheckReport::exact("series_consistency", summary, details))
}

/// `conj(f_σ(ψ)) = f_{σ⁻¹}(ψ)`; in particular inverse-closed orbits give
/// real values.
pub fn check_conjugation_symmetry(
    k: usize,
    m: usize,
    shape: &SystemShape,
    trials: usize,
    seed: u64,
    tol: f64,
    budgets: &Budgets,
) -> Result<CheckReport> {
    check_shape(k, shape)?;
    let orbits = enumerate_orbits(k, m, false, budgets.enumeration)?;
    let inverses: Vec<_> = orbits.iter().map(|o| o.tuple().inverse()).collect();
    let self_inverse: Vec<bool> = orbits.iter().map(|o| &o.inverse() == o).collect();
    let details = trial_seeds(seed, trials)
        .into_par_iter()
        .enumerate()
        .map(|(i, s)| {
            let psi = PureState::random(shape.clone(), s, true)?;
            let mut worst: f64 = 0.0;
            for ((orbit, inv), &closed) in orbits.iter().zip(&inverses).zip(&self_inverse) {
                let f = eval_pure_tuple(orbit.tuple(), &psi, budgets.contraction)?;
                let g = eval_pure_tuple(inv, &psi, budgets.contraction)?;
                worst = worst.max(relative_residual(f.conj(), g));
                if closed {
                    worst = worst.max(relative_residual(f, Complex64::new(f.re, 0.0)));
                }
            }
            Ok(CaseRecord {
                label: format!("trial {i}"),
                seed: Some(s),
                residual: worst,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let closed = self_inverse.iter().filter(|&&c| c).count();
    let summary = format!(
        "k={k} m={m} shape={:?}: {} invariants ({closed} inverse-closed) x {trials} trials",
        shape.dims(),
        orbits.len()
    );
    Ok(CheckReport::numerical("conjugation_symmetry", tol, summary, details))
}
