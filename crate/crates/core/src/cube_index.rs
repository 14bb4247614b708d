//! Index calculus on the discrete cube `{0,1}^d`.
//!
//! A vertex is a subset of `[d] = {1, .., d}` stored as a bitmask with digit
//! `i` at bit `i - 1`, so the integer value of the mask is the binary rank
//! `sigma(eps) = sum eps_k 2^(k-1)`. Tuples indexed by vertices are always laid
//! out in increasing rank: the empty vertex first, the full vertex `[d]` last.

use std::fmt;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported cube dimension; every routine here enumerates `2^d` vertices.
pub const MAX_DIM: usize = 16;

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&dim) {
        Ok(())
    } else {
        Err(Error::DimensionOutOfRange(dim))
    }
}

/// Number of vertices of the cube of dimension `dim`.
pub fn vertex_count(dim: usize) -> usize {
    1usize << dim
}

/// A vertex of `{0,1}^d`, viewed as a subset of `[d]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexIndex {
    dim: usize,
    bits: u32,
}

impl VertexIndex {
    pub fn new(dim: usize, bits: u32) -> Result<Self> {
        check_dim(dim)?;
        if (bits as u64) >= (1u64 << dim) {
            return Err(Error::VertexOutOfRange { dim, bits });
        }
        Ok(VertexIndex { dim, bits })
    }

    pub fn empty(dim: usize) -> Result<Self> {
        Self::new(dim, 0)
    }

    /// The full vertex `[d]`, i.e. `11..1`.
    pub fn full(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(VertexIndex { dim, bits: ((1u64 << dim) - 1) as u32 })
    }

    /// Builds a vertex from the digits `eps_1 .. eps_d` (each 0 or 1).
    pub fn from_digits(digits: &[u8]) -> Result<Self> {
        check_dim(digits.len())?;
        let mut bits = 0u32;
        for (i, &b) in digits.iter().enumerate() {
            match b {
                0 => {}
                1 => bits |= 1 << i,
                _ => return Err(Error::InvalidArgument(format!("digit {b} is not 0 or 1"))),
            }
        }
        Ok(VertexIndex { dim: digits.len(), bits })
    }

    /// Builds a vertex from the 1-based members of the subset.
    pub fn from_subset(dim: usize, members: &[usize]) -> Result<Self> {
        check_dim(dim)?;
        let mut bits = 0u32;
        for &i in members {
            if i == 0 || i > dim {
                return Err(Error::InvalidArgument(format!("{i} is not in [{dim}]")));
            }
            bits |= 1 << (i - 1);
        }
        Ok(VertexIndex { dim, bits })
    }

    /// Parses the bitstring `eps_1 .. eps_d`.
    pub fn parse(s: &str) -> Result<Self> {
        let digits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Parse(format!("bad vertex bitstring {s:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::from_digits(&digits)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Whether digit `i` (1-based) is set.
    pub fn contains(&self, i: usize) -> bool {
        i >= 1 && i <= self.dim && self.bits & (1 << (i - 1)) != 0
    }

    /// `|eps|`, the number of set digits.
    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn is_full(&self) -> bool {
        self.bits as u64 == (1u64 << self.dim) - 1
    }

    pub fn digits(&self) -> Vec<u8> {
        (0..self.dim).map(|i| ((self.bits >> i) & 1) as u8).collect()
    }

    /// All vertices of `{0,1}^dim` in rank order.
    pub fn all(dim: usize) -> Result<impl Iterator<Item = VertexIndex>> {
        check_dim(dim)?;
        Ok((0..(1u64 << dim)).map(move |b| VertexIndex { dim, bits: b as u32 }))
    }
}

impl fmt::Display for VertexIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim {
            write!(f, "{}", (self.bits >> i) & 1)?;
        }
        Ok(())
    }
}

/// Side lengths `n = (n_1, .., n_d)` of a parallelepiped.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SideVector(pub Vec<i64>);

impl SideVector {
    pub fn new(entries: Vec<i64>) -> Self {
        SideVector(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        SideVector(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    /// Sum of all entries, i.e. `n . [d]`.
    pub fn total(&self) -> i64 {
        self.0.iter().sum()
    }

    /// `n . eps` for a raw mask, without dimension checks.
    pub(crate) fn dot_bits(&self, bits: u32) -> i64 {
        self.0.iter().enumerate().filter(|(i, _)| bits & (1 << i) != 0).map(|(_, v)| v).sum()
    }

    /// `n . eps` for every vertex, in rank order.
    pub fn vertex_sums(&self) -> Vec<i64> {
        let d = self.dim();
        let mut sums = vec![0i64; 1 << d];
        for (j, &nj) in self.0.iter().enumerate() {
            let half = 1usize << j;
            for mask in 0..half {
                sums[mask | half] = sums[mask] + nj;
            }
        }
        sums
    }
}

impl From<Vec<i64>> for SideVector {
    fn from(v: Vec<i64>) -> Self {
        SideVector(v)
    }
}

/// `n . eps = sum_{i in eps} n_i`.
pub fn dot(n: &SideVector, eps: &VertexIndex) -> Result<i64> {
    if n.dim() != eps.dim() {
        return Err(Error::DimensionMismatch { expected: eps.dim(), found: n.dim() });
    }
    Ok(n.dot_bits(eps.bits))
}

/// Binary rank of a vertex, digit 1 least significant.
pub fn sigma(eps: &VertexIndex) -> u64 {
    eps.bits as u64
}

/// `E(d, j)`: the vertices of rank at most `j`, in rank order.
pub fn lower_set(d: usize, j: u64) -> Result<Vec<VertexIndex>> {
    check_dim(d)?;
    let count = 1u64 << d;
    if j >= count {
        return Err(Error::IndexOutOfRange { index: j as i64, lo: 0, hi: count as i64 - 1 });
    }
    Ok((0..=j).map(|b| VertexIndex { dim: d, bits: b as u32 }).collect())
}

/// Inserts a `0` digit at position `k` of a vertex of dimension `d - 1`.
pub fn phi_embed(k: usize, eps: &VertexIndex) -> Result<VertexIndex> {
    let d = eps.dim + 1;
    check_dim(d)?;
    if k == 0 || k > d {
        return Err(Error::IndexOutOfRange { index: k as i64, lo: 1, hi: d as i64 });
    }
    let low_mask = (1u32 << (k - 1)) - 1;
    let low = eps.bits & low_mask;
    let high = (eps.bits & !low_mask) << 1;
    Ok(VertexIndex { dim: d, bits: high | low })
}

/// Deletes digit `k` of a vertex of dimension `d >= 2`.
pub fn psi_project(k: usize, eps: &VertexIndex) -> Result<VertexIndex> {
    let d = eps.dim;
    if d < 2 {
        return Err(Error::DimensionOutOfRange(d - 1));
    }
    if k == 0 || k > d {
        return Err(Error::IndexOutOfRange { index: k as i64, lo: 1, hi: d as i64 });
    }
    let low_mask = (1u32 << (k - 1)) - 1;
    let low = eps.bits & low_mask;
    let high = (eps.bits >> k) << (k - 1);
    Ok(VertexIndex { dim: d - 1, bits: high | low })
}

/// An isometry of the unit cube: a permutation of the digits followed by
/// reflections `eps_i -> 1 - eps_i` on a set of digits.
///
/// `digit_perm[i] = j` (0-based) sends digit `i + 1` to position `j + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EuclideanPerm {
    digit_perm: Vec<usize>,
    reflection_mask: u32,
}

impl EuclideanPerm {
    pub fn new(digit_perm: Vec<usize>, reflection_mask: u32) -> Result<Self> {
        let d = digit_perm.len();
        check_dim(d)?;
        let mut seen = vec![false; d];
        for &j in &digit_perm {
            if j >= d || seen[j] {
                return Err(Error::InvalidPermutation(d));
            }
            seen[j] = true;
        }
        if (reflection_mask as u64) >= (1u64 << d) {
            return Err(Error::VertexOutOfRange { dim: d, bits: reflection_mask });
        }
        Ok(EuclideanPerm { digit_perm, reflection_mask })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new((0..dim).collect(), 0)
    }

    /// Exchanges digits `a` and `b` (1-based).
    pub fn swap(dim: usize, a: usize, b: usize) -> Result<Self> {
        if a == 0 || b == 0 || a > dim || b > dim {
            return Err(Error::InvalidPermutation(dim));
        }
        let mut p: Vec<usize> = (0..dim).collect();
        p.swap(a - 1, b - 1);
        Self::new(p, 0)
    }

    /// Reflects digit `i` (1-based).
    pub fn reflection(dim: usize, i: usize) -> Result<Self> {
        if i == 0 || i > dim {
            return Err(Error::InvalidPermutation(dim));
        }
        Self::new((0..dim).collect(), 1 << (i - 1))
    }

    pub fn dim(&self) -> usize {
        self.digit_perm.len()
    }

    pub fn digit_perm(&self) -> &[usize] {
        &self.digit_perm
    }

    pub fn reflection_mask(&self) -> u32 {
        self.reflection_mask
    }

    fn permute_bits(&self, bits: u32) -> u32 {
        let mut out = 0u32;
        for (i, &j) in self.digit_perm.iter().enumerate() {
            if bits & (1 << i) != 0 {
                out |= 1 << j;
            }
        }
        out
    }

    pub(crate) fn apply_bits(&self, bits: u32) -> u32 {
        self.permute_bits(bits) ^ self.reflection_mask
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &EuclideanPerm) -> Result<EuclideanPerm> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        let digit_perm = other.digit_perm.iter().map(|&j| self.digit_perm[j]).collect();
        let reflection_mask = self.reflection_mask ^ self.permute_bits(other.reflection_mask);
        Ok(EuclideanPerm { digit_perm, reflection_mask })
    }

    pub fn inverse(&self) -> EuclideanPerm {
        let d = self.dim();
        let mut inv = vec![0usize; d];
        for (i, &j) in self.digit_perm.iter().enumerate() {
            inv[j] = i;
        }
        let inv_perm = EuclideanPerm { digit_perm: inv, reflection_mask: 0 };
        let reflection_mask = inv_perm.permute_bits(self.reflection_mask);
        EuclideanPerm { digit_perm: inv_perm.digit_perm, reflection_mask }
    }
}

pub fn apply_perm(p: &EuclideanPerm, eps: &VertexIndex) -> Result<VertexIndex> {
    if p.dim() != eps.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: eps.dim() });
    }
    Ok(VertexIndex { dim: eps.dim, bits: p.apply_bits(eps.bits) })
}

/// Rewrites the generator `(x, n)` of a parallelepiped under a cube isometry.
///
/// Returns `(m, shift)` with `m . p(eps) + shift = n . eps` for every vertex,
/// so moving each coordinate `eps` to `p(eps)` turns the parallelepiped with
/// base `x` and sides `n` into the one with base `T^shift x` and sides `m`.
pub fn perm_action_on_generators(p: &EuclideanPerm, n: &SideVector) -> Result<(SideVector, i64)> {
    if p.dim() != n.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: n.dim() });
    }
    let mut m = vec![0i64; n.dim()];
    let mut shift = 0i64;
    for (i, &j) in p.digit_perm.iter().enumerate() {
        if p.reflection_mask & (1 << j) != 0 {
            m[j] = -n.0[i];
            shift += n.0[i];
        } else {
            m[j] = n.0[i];
        }
    }
    Ok((SideVector(m), shift))
}

/// Whether the full vertex takes part in the subset-sum filter of
/// [`for_each_side_vector`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopVertex {
    Check,
    Skip,
}

/// Enumerates side vectors `n` with every `n_i` drawn from `candidates`
/// (which must be sorted ascending) and `accept(n . eps)` true for every
/// nonempty vertex, the full vertex only when `top == Check`.
///
/// Vectors are visited in lexicographic order with `n_1` most significant.
/// Partial sums are checked as soon as they are determined, so rejected
/// prefixes are never extended. The visitor receives `n` and the table of
/// `n . eps` in rank order.
pub fn for_each_side_vector<A, V>(d: usize, candidates: &[i64], accept: A, top: TopVertex, mut visit: V) -> Result<()>
where
    A: Fn(i64) -> bool,
    V: FnMut(&[i64], &[i64]) -> ControlFlow<()>,
{
    check_dim(d)?;
    let mut n = vec![0i64; d];
    let mut sums = vec![0i64; 1 << d];
    let _ = descend(0, d, candidates, &accept, top, &mut n, &mut sums, &mut visit);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn descend<A, V>(
    j: usize,
    d: usize,
    candidates: &[i64],
    accept: &A,
    top: TopVertex,
    n: &mut [i64],
    sums: &mut [i64],
    visit: &mut V,
) -> ControlFlow<()>
where
    A: Fn(i64) -> bool,
    V: FnMut(&[i64], &[i64]) -> ControlFlow<()>,
{
    if j == d {
        return visit(n, sums);
    }
    let half = 1usize << j;
    let full = (1usize << d) - 1;
    'cand: for &c in candidates {
        for mask in 0..half {
            let s = sums[mask] + c;
            let idx = mask | half;
            if !(idx == full && top == TopVertex::Skip) && !accept(s) {
                continue 'cand;
            }
            sums[idx] = s;
        }
        n[j] = c;
        descend(j + 1, d, candidates, accept, top, n, sums, visit)?;
    }
    ControlFlow::Continue(())
}
