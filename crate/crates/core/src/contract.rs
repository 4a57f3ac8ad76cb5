//! Nested index summation for the invariant polynomials.
//!
//! The summation variables come in `copies` groups, each group a multi-index
//! over the same parties. Every operand is a dense tensor whose axes are each
//! bound to one `(copy, party)` variable. Groups are bound in order; an
//! operand is multiplied in as soon as the last group it reads is bound, so
//! partial products are shared by every completion of a prefix. The terms of
//! each level are added pairwise.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Parallelize the outermost level above this many total terms.
const PARALLEL_THRESHOLD: u128 = 1 << 14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug)]
pub(crate) struct Axis {
    pub copy: usize,
    pub party: usize,
    pub stride: usize,
}

pub(crate) struct Operand<'a> {
    pub data: &'a [Complex64],
    pub conj: bool,
    pub axes: Vec<Axis>,
}

struct Ready<'a> {
    data: &'a [Complex64],
    conj: bool,
    /// axes bound at earlier levels
    earlier: Vec<Axis>,
    /// offset contribution of this level's multi-index value
    table: Vec<usize>,
}

pub(crate) struct IndexSum<'a> {
    party_dims: Vec<usize>,
    group_size: usize,
    levels: Vec<Vec<Ready<'a>>>,
    /// `digits[v * parties + j]`: party-`j` index of multi-index value `v`
    digits: Vec<usize>,
}

/// Number of terms in the full expansion.
pub(crate) fn term_count(party_dims: &[usize], copies: usize) -> u128 {
    let group: u128 = party_dims.iter().map(|&n| n as u128).product();
    (0..copies).fold(1u128, |acc, _| acc.saturating_mul(group))
}

impl<'a> IndexSum<'a> {
    pub fn new(party_dims: Vec<usize>, copies: usize, operands: Vec<Operand<'a>>, budget: u128) -> Result<Self> {
        let needed = term_count(&party_dims, copies);
        if needed > budget {
            return Err(Error::BudgetExceeded { needed, budget });
        }
        let parties = party_dims.len();
        let group_size: usize = party_dims.iter().product();
        let mut digits = vec![0usize; group_size * parties];
        for v in 0..group_size {
            let mut rest = v;
            for j in (0..parties).rev() {
                digits[v * parties + j] = rest % party_dims[j];
                rest /= party_dims[j];
            }
        }
        let mut levels: Vec<Vec<Ready<'a>>> = (0..copies).map(|_| Vec::new()).collect();
        for op in operands {
            let depth = op.axes.iter().map(|a| a.copy).max().unwrap_or(0);
            let (now, earlier): (Vec<Axis>, Vec<Axis>) = op.axes.iter().partition(|a| a.copy == depth);
            let table = (0..group_size)
                .map(|v| now.iter().map(|a| a.stride * digits[v * parties + a.party]).sum())
                .collect();
            levels[depth].push(Ready {
                data: op.data,
                conj: op.conj,
                earlier,
                table,
            });
        }
        Ok(Self {
            party_dims,
            group_size,
            levels,
            digits,
        })
    }

    pub fn evaluate(&self) -> Complex64 {
        let copies = self.levels.len();
        if copies == 0 {
            return ONE;
        }
        let total = term_count(&self.party_dims, copies);
        if total >= PARALLEL_THRESHOLD && copies > 1 {
            let terms: Vec<Complex64> = (0..self.group_size)
                .into_par_iter()
                .map(|v| {
                    let mut bound = vec![0usize; copies];
                    self.term(0, v, &mut bound)
                })
                .collect();
            pairwise_sum(&terms)
        } else {
            let mut bound = vec![0usize; copies];
            self.level(0, &mut bound)
        }
    }

    fn level(&self, depth: usize, bound: &mut [usize]) -> Complex64 {
        let mut terms = Vec::with_capacity(self.group_size);
        for v in 0..self.group_size {
            terms.push(self.term(depth, v, bound));
        }
        pairwise_sum(&terms)
    }

    fn term(&self, depth: usize, v: usize, bound: &mut [usize]) -> Complex64 {
        let parties = self.party_dims.len();
        let mut prod = ONE;
        for op in &self.levels[depth] {
            let base: usize = op
                .earlier
                .iter()
                .map(|a| a.stride * self.digits[bound[a.copy] * parties + a.party])
                .sum();
            let x = op.data[base + op.table[v]];
            prod *= if op.conj { x.conj() } else { x };
        }
        if depth + 1 == self.levels.len() || prod == ZERO {
            return prod;
        }
        bound[depth] = v;
        prod * self.level(depth + 1, bound)
    }
}

pub(crate) fn pairwise_sum(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= 8 {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}
