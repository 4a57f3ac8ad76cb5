//! Permutations, permutation tuples and their orbits under simultaneous
//! conjugation.
//!
//! A tuple `(σ_1, …, σ_r)` of permutations of `m` points is the same thing
//! as an `m`-fold covering of the bouquet with `r` directed coloured loops:
//! vertex `l` has a colour-`i` edge to `σ_i(l)`. Relabelling the vertices
//! conjugates every slot by the same permutation, so isomorphism classes of
//! coverings are orbits of tuples. Each orbit is identified by its
//! lexicographically least member, the [`OrbitKey`].
//!
//! Externally permutations use 1-based one-line notation; internally
//! everything is 0-based.

use std::fmt;

use petgraph::unionfind::UnionFind;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Default cap on the nominal size `(m!)^r` of an enumeration.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 1_000_000_000;

const UNSET: usize = usize::MAX;

/// A bijection of `{0, …, m-1}` stored in one-line notation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(size: usize) -> Self {
        Self { images: (0..size).collect() }
    }

    /// Builds a permutation from 0-based images, checking bijectivity.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let size = images.len();
        if size == 0 {
            return Err(Error::InvalidPermutation { size, images });
        }
        let mut seen = vec![false; size];
        for &x in &images {
            if x >= size || seen[x] {
                let images = images.iter().map(|v| v.wrapping_add(1)).collect();
                return Err(Error::InvalidPermutation { size, images });
            }
            seen[x] = true;
        }
        Ok(Self { images })
    }

    /// Builds a permutation from 1-based one-line notation.
    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        if images.contains(&0) {
            return Err(Error::InvalidPermutation {
                size: images.len(),
                images: images.to_vec(),
            });
        }
        Self::from_images(images.iter().map(|&x| x - 1).collect())
    }

    pub fn random<R: Rng + ?Sized>(size: usize, rng: &mut R) -> Self {
        let mut images: Vec<usize> = (0..size).collect();
        images.shuffle(rng);
        Self { images }
    }

    pub fn size(&self) -> usize {
        self.images.len()
    }

    #[inline]
    pub fn apply(&self, point: usize) -> usize {
        self.images[point]
    }

    /// 0-based images.
    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.images.iter().map(|&x| x + 1).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(l, &x)| l == x)
    }

    /// `self ∘ other`, i.e. `l ↦ self(other(l))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.size() != other.size() {
            return Err(Error::SizeMismatch {
                left: self.size(),
                right: other.size(),
            });
        }
        Ok(Self {
            images: other.images.iter().map(|&x| self.images[x]).collect(),
        })
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.size()];
        for (l, &x) in self.images.iter().enumerate() {
            images[x] = l;
        }
        Self { images }
    }

    /// `π σ π⁻¹` where `self = σ`.
    fn conjugated_by(&self, pi: &Permutation) -> Permutation {
        let mut images = vec![0; self.size()];
        for (x, &y) in self.images.iter().enumerate() {
            images[pi.images[x]] = pi.images[y];
        }
        Self { images }
    }

    /// Next permutation in lexicographic order, or `None` after the last.
    fn next_lex(&self) -> Option<Permutation> {
        let mut images = self.images.clone();
        let n = images.len();
        let pivot = (0..n.saturating_sub(1)).rev().find(|&i| images[i] < images[i + 1])?;
        let succ = (pivot + 1..n).rev().find(|&j| images[j] > images[pivot]).unwrap();
        images.swap(pivot, succ);
        images[pivot + 1..].reverse();
        Some(Self { images })
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.images.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", x + 1)?;
        }
        write!(f, ")")
    }
}

/// All permutations of `size` points in lexicographic order.
pub fn all_permutations(size: usize) -> Vec<Permutation> {
    let mut out = Vec::new();
    let mut cur = Some(Permutation::identity(size));
    while let Some(p) = cur {
        cur = p.next_lex();
        out.push(p);
    }
    out
}

/// An `r`-tuple of permutations of the same `m` points, `r ≥ 1`.
///
/// The derived order compares `m` first and then the concatenated one-line
/// notations, which is the canonical total order on orbit representatives.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PermTuple {
    m: usize,
    perms: Vec<Permutation>,
}

impl PermTuple {
    pub fn new(perms: Vec<Permutation>) -> Result<Self> {
        let Some(first) = perms.first() else {
            return Err(Error::InvalidTuple("a tuple needs at least one permutation".into()));
        };
        let m = first.size();
        if let Some(p) = perms.iter().find(|p| p.size() != m) {
            return Err(Error::SizeMismatch {
                left: m,
                right: p.size(),
            });
        }
        Ok(Self { m, perms })
    }

    pub fn from_one_based(perms: &[Vec<usize>]) -> Result<Self> {
        let perms = perms
            .iter()
            .map(|p| Permutation::from_one_based(p))
            .collect::<Result<Vec<_>>>()?;
        Self::new(perms)
    }

    pub fn identity(m: usize, arity: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidTuple("tuples act on at least one point".into()));
        }
        Self::new(vec![Permutation::identity(m); arity])
    }

    pub fn random<R: Rng + ?Sized>(m: usize, arity: usize, rng: &mut R) -> Result<Self> {
        Self::new((0..arity).map(|_| Permutation::random(m, rng)).collect())
    }

    /// Number of points acted on; the degree of the associated invariant.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn arity(&self) -> usize {
        self.perms.len()
    }

    pub fn perms(&self) -> &[Permutation] {
        &self.perms
    }

    pub fn to_one_based(&self) -> Vec<Vec<usize>> {
        self.perms.iter().map(Permutation::to_one_based).collect()
    }

    /// Slot-wise inverse `(σ_1⁻¹, …, σ_r⁻¹)`.
    pub fn inverse(&self) -> PermTuple {
        Self {
            m: self.m,
            perms: self.perms.iter().map(Permutation::inverse).collect(),
        }
    }

    /// Simultaneous conjugation `(π σ_1 π⁻¹, …, π σ_r π⁻¹)`.
    pub fn conjugate(&self, pi: &Permutation) -> Result<PermTuple> {
        if pi.size() != self.m {
            return Err(Error::SizeMismatch {
                left: self.m,
                right: pi.size(),
            });
        }
        Ok(Self {
            m: self.m,
            perms: self.perms.iter().map(|s| s.conjugated_by(pi)).collect(),
        })
    }

    /// Block-diagonal join: `self` acts on the first `m₁` points and `other`,
    /// shifted by `m₁`, on the remaining ones.
    pub fn star(&self, other: &PermTuple) -> Result<PermTuple> {
        if self.arity() != other.arity() {
            return Err(Error::ArityMismatch {
                left: self.arity(),
                right: other.arity(),
            });
        }
        let shift = self.m;
        let perms = self
            .perms
            .iter()
            .zip(&other.perms)
            .map(|(a, b)| {
                let images = a
                    .images
                    .iter()
                    .copied()
                    .chain(b.images.iter().map(|&x| x + shift))
                    .collect();
                Permutation { images }
            })
            .collect();
        Ok(Self {
            m: self.m + other.m,
            perms,
        })
    }

    fn point_classes(&self) -> UnionFind<usize> {
        let mut uf = UnionFind::new(self.m);
        for sigma in &self.perms {
            for (x, &y) in sigma.images.iter().enumerate() {
                uf.union(x, y);
            }
        }
        uf
    }

    /// Whether the generated group is transitive on the points.
    pub fn is_connected(&self) -> bool {
        let uf = self.point_classes();
        let root = uf.find(0);
        (1..self.m).all(|x| uf.find(x) == root)
    }

    /// Blocks of the generated group's orbits on the points, each sorted,
    /// ordered by least element.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let uf = self.point_classes();
        let mut block_of_root = vec![UNSET; self.m];
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for x in 0..self.m {
            let r = uf.find(x);
            if block_of_root[r] == UNSET {
                block_of_root[r] = blocks.len();
                blocks.push(Vec::new());
            }
            blocks[block_of_root[r]].push(x);
        }
        blocks
    }

    /// Restriction to an invariant block, relabelled to `0..block.len()`
    /// preserving the relative order of the original labels.
    fn restrict(&self, block: &[usize]) -> PermTuple {
        let mut relabel = vec![UNSET; self.m];
        for (new, &old) in block.iter().enumerate() {
            relabel[old] = new;
        }
        let perms = self
            .perms
            .iter()
            .map(|s| Permutation {
                images: block.iter().map(|&x| relabel[s.images[x]]).collect(),
            })
            .collect();
        PermTuple {
            m: block.len(),
            perms,
        }
    }

    /// Connected components as a sorted multiset of orbit keys.
    pub fn components(&self) -> Vec<OrbitKey> {
        let mut out: Vec<OrbitKey> = self
            .blocks()
            .iter()
            .map(|b| self.restrict(b).canonical_form().0)
            .collect();
        out.sort();
        out
    }

    /// Lexicographically least member of the orbit, together with a
    /// permutation `π` such that `conjugate(self, π)` equals it.
    pub fn canonical_form(&self) -> (OrbitKey, Permutation) {
        let mut search = CanonicalSearch::new(self, false);
        search.run();
        let tuple = search.best_tuple();
        let witness = Permutation {
            images: search.best_label,
        };
        (OrbitKey::from_canonical(tuple), witness)
    }

    /// Whether `self` is its own canonical form. Stops at the first
    /// conjugate that is strictly smaller.
    pub fn is_canonical(&self) -> bool {
        let mut search = CanonicalSearch::new(self, true);
        search.run();
        !search.improved
    }

    pub fn to_covering_graph(&self) -> CoveringGraph {
        let mut edges = Vec::with_capacity(self.m * self.arity());
        for (c, sigma) in self.perms.iter().enumerate() {
            for (x, &y) in sigma.images.iter().enumerate() {
                edges.push(CoveringEdge {
                    source: x + 1,
                    target: y + 1,
                    color: c + 1,
                });
            }
        }
        CoveringGraph {
            num_vertices: self.m,
            num_colors: self.arity(),
            edges,
        }
    }
}

impl fmt::Display for PermTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.perms.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// Branch-and-bound search for the lexicographically least conjugate.
///
/// A conjugate is a relabelling of the points; label `j` goes to the point
/// `point[j]`. The compared sequence is `τ_i(j) = label[σ_i(point[j])]`, slot
/// by slot. While scanning the first slot, whenever label `j` has no point
/// yet every unlabelled point is tried; an unlabelled image always receives
/// the smallest free label, which is forced by minimality. After the first
/// slot the labelling is complete and later slots are only compared.
struct CanonicalSearch<'a> {
    tuple: &'a PermTuple,
    label: Vec<usize>,
    point: Vec<usize>,
    current: Vec<usize>,
    best: Vec<usize>,
    best_label: Vec<usize>,
    stop_on_improvement: bool,
    improved: bool,
    /// incremented whenever `best` is replaced
    updates: u64,
}

impl<'a> CanonicalSearch<'a> {
    fn new(tuple: &'a PermTuple, stop_on_improvement: bool) -> Self {
        let m = tuple.m;
        let best = tuple.perms.iter().flat_map(|p| p.images.iter().copied()).collect();
        Self {
            tuple,
            label: vec![UNSET; m],
            point: vec![UNSET; m],
            current: vec![0; m * tuple.arity()],
            best,
            best_label: (0..m).collect(),
            stop_on_improvement,
            improved: false,
            updates: 0,
        }
    }

    fn run(&mut self) {
        self.first_slot(0, 0, false);
    }

    fn done(&self) -> bool {
        self.stop_on_improvement && self.improved
    }

    /// Compares the value at `pos` against the incumbent. Returns the new
    /// "strictly less" flag, or `None` to prune.
    #[inline]
    fn admit(&mut self, pos: usize, value: usize, less: bool) -> Option<bool> {
        if less {
            return Some(true);
        }
        let incumbent = self.best[pos];
        if value > incumbent {
            None
        } else if value < incumbent {
            if self.stop_on_improvement {
                self.improved = true;
                None
            } else {
                Some(true)
            }
        } else {
            Some(false)
        }
    }

    fn first_slot(&mut self, j: usize, fresh: usize, mut less: bool) {
        let m = self.tuple.m;
        if j == m {
            self.later_slots(less);
            return;
        }
        if self.point[j] == UNSET {
            debug_assert_eq!(fresh, j);
            for x in 0..m {
                if self.label[x] != UNSET {
                    continue;
                }
                self.label[x] = j;
                self.point[j] = x;
                let before = self.updates;
                self.follow(j, x, fresh + 1, less);
                // a new incumbent found below shares this prefix
                if self.updates != before {
                    less = false;
                }
                self.label[x] = UNSET;
                self.point[j] = UNSET;
                if self.done() {
                    return;
                }
            }
        } else {
            let x = self.point[j];
            self.follow(j, x, fresh, less);
        }
    }

    fn follow(&mut self, j: usize, x: usize, fresh: usize, less: bool) {
        let y = self.tuple.perms[0].images[x];
        let assigned = self.label[y] == UNSET;
        let (value, next_fresh) = if assigned {
            self.label[y] = fresh;
            self.point[fresh] = y;
            (fresh, fresh + 1)
        } else {
            (self.label[y], fresh)
        };
        if let Some(less) = self.admit(j, value, less) {
            self.current[j] = value;
            self.first_slot(j + 1, next_fresh, less);
        }
        if assigned {
            self.point[fresh] = UNSET;
            self.label[y] = UNSET;
        }
    }

    fn later_slots(&mut self, mut less: bool) {
        let m = self.tuple.m;
        for (i, sigma) in self.tuple.perms.iter().enumerate().skip(1) {
            for j in 0..m {
                let pos = i * m + j;
                let value = self.label[sigma.images[self.point[j]]];
                match self.admit(pos, value, less) {
                    Some(l) => less = l,
                    None => return,
                }
                self.current[pos] = value;
            }
        }
        if less {
            self.best.copy_from_slice(&self.current);
            self.best_label.copy_from_slice(&self.label);
            self.updates += 1;
        }
    }

    fn best_tuple(&self) -> PermTuple {
        let m = self.tuple.m;
        let perms = self
            .best
            .chunks(m)
            .map(|c| Permutation { images: c.to_vec() })
            .collect();
        PermTuple { m, perms }
    }
}

/// Canonical representative of a tuple orbit. Identifies an isomorphism class
/// of coverings and one invariant polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrbitKey {
    tuple: PermTuple,
    connected: bool,
}

impl OrbitKey {
    fn from_canonical(tuple: PermTuple) -> Self {
        let connected = tuple.is_connected();
        Self { tuple, connected }
    }

    /// Canonicalizes an arbitrary representative.
    pub fn of(tuple: &PermTuple) -> Self {
        tuple.canonical_form().0
    }

    pub fn tuple(&self) -> &PermTuple {
        &self.tuple
    }

    pub fn degree(&self) -> usize {
        self.tuple.m
    }

    pub fn arity(&self) -> usize {
        self.tuple.arity()
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    /// Orbit of the disjoint union.
    pub fn star(&self, other: &OrbitKey) -> Result<OrbitKey> {
        Ok(OrbitKey::of(&self.tuple.star(&other.tuple)?))
    }

    pub fn components(&self) -> Vec<OrbitKey> {
        self.tuple.components()
    }

    /// Orbit of the slot-wise inverse tuple.
    pub fn inverse(&self) -> OrbitKey {
        OrbitKey::of(&self.tuple.inverse())
    }
}

impl fmt::Display for OrbitKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.tuple.fmt(f)
    }
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).fold(1u128, |acc, x| acc.saturating_mul(x))
}

/// Nominal work `(m!)^arity` of enumerating all tuples.
pub fn enumeration_cost(arity: usize, m: usize) -> u128 {
    let f = factorial(m);
    (0..arity).fold(1u128, |acc, _| acc.saturating_mul(f))
}

/// Checks arguments and budget for an enumeration of `arity`-tuples on `m`
/// points.
pub fn check_enumeration_budget(arity: usize, m: usize, budget: u128) -> Result<()> {
    if arity == 0 {
        return Err(Error::InvalidTuple("arity must be at least 1".into()));
    }
    if m == 0 {
        return Err(Error::InvalidTuple("degree must be at least 1".into()));
    }
    let needed = enumeration_cost(arity, m);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    Ok(())
}

/// One orbit key per orbit of `arity`-tuples on `m` points, sorted by the
/// canonical order.
///
/// Walks the tuples in lexicographic order and keeps those equal to their
/// own canonical form. The first slot of a canonical tuple is itself the
/// least member of its conjugacy class, so only class minima are tried there.
pub fn enumerate_tuple_orbits(
    arity: usize,
    m: usize,
    connected_only: bool,
    budget: u128,
) -> Result<Vec<OrbitKey>> {
    check_enumeration_budget(arity, m, budget)?;
    let all = all_permutations(m);
    let class_minima: Vec<&Permutation> = all
        .iter()
        .filter(|p| PermTuple::new(vec![(*p).clone()]).unwrap().is_canonical())
        .collect();

    let keep = |t: &PermTuple| t.is_canonical() && (!connected_only || t.is_connected());

    if arity == 1 {
        return Ok(class_minima
            .into_iter()
            .map(|p| PermTuple::new(vec![p.clone()]).unwrap())
            .filter(keep)
            .map(OrbitKey::from_canonical)
            .collect());
    }

    let heads: Vec<(&Permutation, &Permutation)> = class_minima
        .iter()
        .flat_map(|&a| all.iter().map(move |b| (a, b)))
        .collect();

    let chunks: Vec<Vec<OrbitKey>> = heads
        .par_iter()
        .map(|&(a, b)| {
            let mut found = Vec::new();
            // odometer over the remaining slots
            let rest = arity - 2;
            let mut digits = vec![0usize; rest];
            loop {
                let mut perms = Vec::with_capacity(arity);
                perms.push(a.clone());
                perms.push(b.clone());
                perms.extend(digits.iter().map(|&d| all[d].clone()));
                let t = PermTuple { m, perms };
                if keep(&t) {
                    found.push(OrbitKey::from_canonical(t));
                }
                let mut pos = rest;
                loop {
                    if pos == 0 {
                        return found;
                    }
                    pos -= 1;
                    digits[pos] += 1;
                    if digits[pos] < all.len() {
                        break;
                    }
                    digits[pos] = 0;
                }
            }
        })
        .collect();
    Ok(chunks.into_iter().flatten().collect())
}

/// Orbits relevant to `k`-partite pure states (tuples of arity `k - 1`).
pub fn enumerate_orbits(k: usize, m: usize, connected_only: bool, budget: u128) -> Result<Vec<OrbitKey>> {
    if k < 2 {
        return Err(Error::InvalidShape(format!("k must be at least 2, got {k}")));
    }
    enumerate_tuple_orbits(k - 1, m, connected_only, budget)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CoveringEdge {
    pub source: usize,
    pub target: usize,
    pub color: usize,
}

/// Covering of the bouquet with `num_colors` loops. Vertices are `1..=m`,
/// colours `1..=r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoveringGraph {
    pub num_vertices: usize,
    pub num_colors: usize,
    pub edges: Vec<CoveringEdge>,
}

impl CoveringGraph {
    /// Reads the permutations back off the edges, checking that every vertex
    /// has exactly one outgoing and one incoming edge of each colour.
    pub fn to_tuple(&self) -> Result<PermTuple> {
        let (m, r) = (self.num_vertices, self.num_colors);
        let mut images = vec![vec![UNSET; m]; r];
        for e in &self.edges {
            if e.color == 0 || e.color > r || e.source == 0 || e.source > m || e.target == 0 || e.target > m {
                return Err(Error::InvalidTuple(format!("edge out of range: {e:?}")));
            }
            let slot = &mut images[e.color - 1][e.source - 1];
            if *slot != UNSET {
                return Err(Error::InvalidTuple(format!(
                    "vertex {} has two outgoing edges of colour {}",
                    e.source, e.color
                )));
            }
            *slot = e.target - 1;
        }
        let perms = images
            .into_iter()
            .map(|im| {
                if im.contains(&UNSET) {
                    return Err(Error::InvalidTuple("missing outgoing edge".into()));
                }
                Permutation::from_images(im)
            })
            .collect::<Result<Vec<_>>>()?;
        PermTuple::new(perms)
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("digraph {name} {{\n");
        for v in 1..=self.num_vertices {
            out.push_str(&format!("  {v};\n"));
        }
        for e in &self.edges {
            out.push_str(&format!("  {} -> {} [label=\"c{}\"];\n", e.source, e.target, e.color));
        }
        out.push_str("}\n");
        out
    }
}
