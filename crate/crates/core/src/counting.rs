//! Graded dimensions of the invariant algebra and the number of generators
//! per degree.
//!
//! The degree-`m` dimension is `d_{k,m} = Σ_{a ⊢ m} z_a^{k-2}` where
//! `z_a = ∏ i^{a_i} a_i!` is the centralizer order of the cycle type `a`.
//! The Hilbert series `1 + Σ d_{k,m} t^m` factors as `∏_d (1 - t^d)^{-u_d}`
//! where `u_d` counts connected `d`-fold coverings of the bouquet with `k-1`
//! loops. All arithmetic here is exact.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::perm::{check_enumeration_budget, enumerate_orbits};

/// A partition of `m` in multiplicity form: `a_i` parts of size `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    m: usize,
    multiplicities: Vec<usize>,
}

impl Partition {
    /// `multiplicities[i - 1]` is the number of parts equal to `i`.
    pub fn from_multiplicities(multiplicities: Vec<usize>) -> Result<Self> {
        let m: usize = multiplicities.iter().enumerate().map(|(i, a)| (i + 1) * a).sum();
        if m == 0 {
            return Err(Error::Precondition("partitions of 0 are not represented".into()));
        }
        let mut multiplicities = multiplicities;
        multiplicities.resize(m, 0);
        Ok(Self { m, multiplicities })
    }

    fn from_parts(m: usize, parts: &[usize]) -> Self {
        let mut multiplicities = vec![0; m];
        for &p in parts {
            multiplicities[p - 1] += 1;
        }
        Self { m, multiplicities }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `a_1, …, a_m`.
    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    /// Parts in non-increasing order.
    pub fn parts(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (i, &a) in self.multiplicities.iter().enumerate().rev() {
            out.extend(std::iter::repeat_n(i + 1, a));
        }
        out
    }

    /// `∏ i^{a_i} a_i!`, the order of the centralizer of a permutation with
    /// this cycle type.
    pub fn centralizer_order(&self) -> BigUint {
        let mut z = BigUint::one();
        for (i, &a) in self.multiplicities.iter().enumerate() {
            for j in 1..=a {
                z *= (i + 1) as u64;
                z *= j as u64;
            }
        }
        z
    }
}

/// All partitions of `m`, ordered by their non-increasing part sequences in
/// decreasing lexicographic order: `(m)`, `(m-1, 1)`, …, `(1, …, 1)`.
pub fn partitions(m: usize) -> Vec<Partition> {
    fn rec(m: usize, remaining: usize, max_part: usize, parts: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition::from_parts(m, parts));
            return;
        }
        for p in (1..=max_part.min(remaining)).rev() {
            parts.push(p);
            rec(m, remaining - p, p, parts, out);
            parts.pop();
        }
    }
    let mut out = Vec::new();
    if m > 0 {
        rec(m, m, m, &mut Vec::new(), &mut out);
    }
    out
}

fn check_k(k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::InvalidShape(format!("k must be at least 2, got {k}")));
    }
    Ok(())
}

/// `d_{k,m}`: dimension of the degree-`m` part of the algebra of LU invariants
/// of `k`-partite states.
pub fn dim_invariants(k: usize, m: usize) -> Result<BigUint> {
    check_k(k)?;
    if m == 0 {
        return Ok(BigUint::one());
    }
    let exp = (k - 2) as u32;
    Ok(partitions(m).iter().map(|a| a.centralizer_order().pow(exp)).sum())
}

/// Integer power series truncated after `t^order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntSeries {
    coeffs: Vec<BigUint>,
}

impl IntSeries {
    pub fn one(order: usize) -> Self {
        let mut coeffs = vec![BigUint::zero(); order + 1];
        coeffs[0] = BigUint::one();
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigUint] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> &BigUint {
        &self.coeffs[n]
    }

    /// Multiplies in place by `(1 - t^d)^{-u} = Σ_j C(u + j - 1, j) t^{dj}`.
    fn mul_euler_factor(&mut self, d: usize, u: &BigUint) {
        if u.is_zero() {
            return;
        }
        let order = self.order();
        let mut factor = vec![BigUint::zero(); order / d + 1];
        factor[0] = BigUint::one();
        for j in 1..factor.len() {
            factor[j] = &factor[j - 1] * (u + BigUint::from(j - 1)) / BigUint::from(j);
        }
        let old = std::mem::replace(&mut self.coeffs, vec![BigUint::zero(); order + 1]);
        for (n, c) in old.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (j, f) in factor.iter().enumerate() {
                let pos = n + j * d;
                if pos > order {
                    break;
                }
                self.coeffs[pos] += c * f;
            }
        }
    }
}

/// Expands `∏_{d ≥ 1} (1 - t^d)^{-u_d}` to order `order`; `u[0]` is `u_1`.
pub fn euler_product(u: &[BigUint], order: usize) -> IntSeries {
    let mut series = IntSeries::one(order);
    for (i, ud) in u.iter().enumerate().take(order) {
        series.mul_euler_factor(i + 1, ud);
    }
    series
}

/// Inverts the Euler product: finds the unique `u_1, …, u_M` with
/// `∏ (1 - t^d)^{-u_d} = 1 + Σ dims[m-1] t^m` up to order `M`.
///
/// Order by order, the factors for `d' < d` are already multiplied in and
/// `(1 - t^d)^{-u_d}` contributes `u_d t^d` at degree `d`, so `u_d` is the
/// remaining deficit.
pub fn euler_inverse(dims: &[BigUint]) -> Result<Vec<BigUint>> {
    let order = dims.len();
    let mut running = IntSeries::one(order);
    let mut u = Vec::with_capacity(order);
    for d in 1..=order {
        let deficit = BigInt::from(dims[d - 1].clone()) - BigInt::from(running.coeff(d).clone());
        if deficit.is_negative() {
            return Err(Error::Inconsistency(format!(
                "negative generator count at degree {d}: {deficit}"
            )));
        }
        let ud = deficit.to_biguint().unwrap();
        running.mul_euler_factor(d, &ud);
        u.push(ud);
    }
    Ok(u)
}

fn serialize_biguints<S: Serializer>(values: &[BigUint], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(values.len()))?;
    for v in values {
        let n: serde_json::Number = v.to_string().parse().map_err(serde::ser::Error::custom)?;
        seq.serialize_element(&n)?;
    }
    seq.end()
}

/// Graded dimensions and generator counts for degrees `1..=max_m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountTable {
    pub k: usize,
    #[serde(skip)]
    pub max_m: usize,
    /// `d_{k,1}, …, d_{k,max_m}`.
    #[serde(serialize_with = "serialize_biguints")]
    pub dims: Vec<BigUint>,
    /// `u_1, …, u_max_m`: connected coverings per degree.
    #[serde(serialize_with = "serialize_biguints")]
    pub connected: Vec<BigUint>,
    /// Degrees whose generator count was also confirmed by direct enumeration.
    #[serde(skip)]
    pub enumerated: Vec<usize>,
}

impl CountTable {
    /// Whether the Euler product of `connected` reproduces `dims`.
    pub fn euler_check(&self) -> bool {
        let series = euler_product(&self.connected, self.max_m);
        series.coeffs()[1..] == self.dims[..]
    }
}

/// Computes `d_{k,m}` and `u_m` for `m ≤ max_m`. Each `u_m` whose enumeration
/// fits in `cross_check_budget` is recounted from the connected orbits, and a
/// disagreement is an error.
pub fn connected_counts(k: usize, max_m: usize, cross_check_budget: u128) -> Result<CountTable> {
    check_k(k)?;
    let dims = (1..=max_m).map(|m| dim_invariants(k, m)).collect::<Result<Vec<_>>>()?;
    let connected = euler_inverse(&dims)?;
    let mut enumerated = Vec::new();
    for m in 1..=max_m {
        if check_enumeration_budget(k - 1, m, cross_check_budget).is_err() {
            break;
        }
        let direct = enumerate_orbits(k, m, true, cross_check_budget)?.len();
        if BigUint::from(direct) != connected[m - 1] {
            return Err(Error::Inconsistency(format!(
                "k={k}, m={m}: Euler inversion gives {} connected orbits, enumeration finds {direct}",
                connected[m - 1]
            )));
        }
        enumerated.push(m);
    }
    Ok(CountTable {
        k,
        max_m,
        dims,
        connected,
        enumerated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::DEFAULT_ENUMERATION_BUDGET;

    fn big(v: &[u64]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    /// Independent count of partitions of `n` with parts ≤ `max`.
    fn count_partitions(n: usize, max: usize) -> usize {
        if n == 0 {
            return 1;
        }
        (1..=max.min(n)).map(|p| count_partitions(n - p, p)).sum()
    }

    #[test]
    fn partition_examples() {
        let p1 = partitions(1);
        assert_eq!(p1.len(), 1);
        assert_eq!(p1[0].multiplicities(), &[1]);
        assert_eq!(partitions(4).len(), 5);
        assert_eq!(partitions(6).len(), 11);
        for m in 1..=12 {
            let ps = partitions(m);
            assert_eq!(ps.len(), count_partitions(m, m));
            for p in &ps {
                assert_eq!(p.parts().iter().sum::<usize>(), m);
            }
        }
    }

    #[test]
    fn partition_order_is_fixed() {
        let parts: Vec<Vec<usize>> = partitions(4).iter().map(Partition::parts).collect();
        assert_eq!(
            parts,
            vec![vec![4], vec![3, 1], vec![2, 2], vec![2, 1, 1], vec![1, 1, 1, 1]]
        );
    }

    #[test]
    fn centralizer_examples() {
        let fact = |n: u64| (1..=n).product::<u64>();
        for m in 1..=8 {
            let ones = Partition::from_multiplicities(vec![m]).unwrap();
            assert_eq!(ones.centralizer_order(), BigUint::from(fact(m as u64)));
            let mut mult = vec![0; m];
            mult[m - 1] = 1;
            let cycle = Partition::from_multiplicities(mult).unwrap();
            assert_eq!(cycle.centralizer_order(), BigUint::from(m));
        }
        let twos = Partition::from_multiplicities(vec![0, 2]).unwrap();
        assert_eq!(twos.m(), 4);
        assert_eq!(twos.centralizer_order(), BigUint::from(8u32));
    }

    #[test]
    fn centralizer_orders_sum_to_class_count() {
        // Σ_a m!/z_a = m! (class sizes add up to the group order)
        for m in 1..=9 {
            let fact: BigUint = (1..=m as u64).product::<u64>().into();
            let total: BigUint = partitions(m).iter().map(|a| &fact / a.centralizer_order()).sum();
            assert_eq!(total, fact);
        }
    }

    #[test]
    fn dimension_examples() {
        for m in 1..=10 {
            assert_eq!(dim_invariants(2, m).unwrap(), BigUint::from(count_partitions(m, m)));
        }
        assert_eq!(dim_invariants(3, 2).unwrap(), BigUint::from(4u32));
        assert_eq!(dim_invariants(3, 4).unwrap(), BigUint::from(43u32));
        assert_eq!(dim_invariants(4, 3).unwrap(), BigUint::from(49u32));
        assert!(dim_invariants(1, 3).is_err());
    }

    #[test]
    fn dimensions_match_enumeration() {
        for (k, max_m) in [(2, 7), (3, 5), (4, 4), (5, 3)] {
            for m in 1..=max_m {
                let n = enumerate_orbits(k, m, false, DEFAULT_ENUMERATION_BUDGET).unwrap().len();
                assert_eq!(dim_invariants(k, m).unwrap(), BigUint::from(n), "k={k} m={m}");
            }
        }
    }

    #[test]
    fn euler_product_examples() {
        let geometric = euler_product(&big(&[1, 0, 0, 0, 0, 0]), 6);
        assert_eq!(geometric.coeffs(), &big(&[1; 7])[..]);

        let p = euler_product(&big(&[1; 8]), 8);
        assert_eq!(p.coeffs(), &big(&[1, 1, 2, 3, 5, 7, 11, 15, 22])[..]);

        let s = euler_product(&big(&[1, 3, 7, 26]), 4);
        assert_eq!(s.coeffs(), &big(&[1, 1, 4, 11, 43])[..]);
    }

    #[test]
    fn euler_factor_with_large_exponent() {
        // (1 - t)^{-u} has coefficients C(u + j - 1, j)
        let u = BigUint::from(10u32).pow(30);
        let s = euler_product(std::slice::from_ref(&u), 3);
        let c2 = &u * (&u + 1u32) / 2u32;
        assert_eq!(s.coeff(1), &u);
        assert_eq!(s.coeff(2), &c2);
    }

    #[test]
    fn inversion_round_trip() {
        let u = big(&[2, 0, 5, 1, 9, 3]);
        let s = euler_product(&u, 6);
        assert_eq!(euler_inverse(&s.coeffs()[1..]).unwrap(), u);
        assert!(matches!(euler_inverse(&big(&[3, 1])), Err(Error::Inconsistency(_))));
    }

    #[test]
    fn connected_count_examples() {
        let b = DEFAULT_ENUMERATION_BUDGET;
        let t = connected_counts(2, 6, b).unwrap();
        assert_eq!(t.connected, big(&[1; 6]));
        assert_eq!(t.enumerated, vec![1, 2, 3, 4, 5, 6]);
        let t = connected_counts(3, 4, b).unwrap();
        assert_eq!(t.connected, big(&[1, 3, 7, 26]));
        assert!(t.euler_check());
        let t = connected_counts(4, 2, b).unwrap();
        assert_eq!(t.connected, big(&[1, 7]));
    }

    #[test]
    fn connected_counts_skip_enumeration_beyond_budget() {
        let t = connected_counts(3, 6, 10_000).unwrap();
        assert_eq!(t.enumerated, vec![1, 2, 3, 4]);
        assert_eq!(t.dims, big(&[1, 4, 11, 43, 161, 901]));
        assert!(t.euler_check());
    }

    #[test]
    fn degree_one_is_always_single() {
        for k in 2..=7 {
            assert_eq!(dim_invariants(k, 1).unwrap(), BigUint::one());
            let t = connected_counts(k, 1, 0).unwrap();
            assert_eq!(t.connected, big(&[1]));
        }
    }

    #[test]
    fn count_table_json() {
        let t = connected_counts(3, 3, DEFAULT_ENUMERATION_BUDGET).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(json, r#"{"k":3,"dims":[1,4,11],"connected":[1,3,7]}"#);
    }
}
