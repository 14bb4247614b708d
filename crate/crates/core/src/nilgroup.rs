//! Unipotent upper-triangular groups modulo their integer lattice.
//!
//! An element of the group of `D x D` unit upper-triangular real matrices is
//! stored by its strictly-upper entries in row-major order. For the
//! Heisenberg group (`D = 3`) that order is `(x, z, y)` where `x = g[0][1]`,
//! `y = g[1][2]` and `z = g[0][2]`; the `heisenberg*` helpers use the
//! customary `(x, y, z)` order instead.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Offset of entry `(i, j)`, `i < j`, in the row-major strictly-upper layout.
#[inline]
fn idx(size: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < size);
    i * (2 * size - i - 1) / 2 + (j - i - 1)
}

/// Number of strictly-upper entries of a `size x size` matrix.
pub fn entry_count(size: usize) -> usize {
    size * (size - 1) / 2
}

/// Largest orbit exponent accepted for a matrix of the given size.
///
/// Entries of `g^n` grow like `n^(D-1)`; past these bounds the fractional
/// parts that define the nilmanifold point lose too many digits.
pub fn max_exponent(size: usize) -> i64 {
    if size <= 4 {
        1_000_000
    } else {
        10_000
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnipotentElement {
    size: usize,
    upper: Vec<f64>,
}

impl UnipotentElement {
    pub fn new(size: usize, upper: Vec<f64>) -> Result<Self> {
        if size < 2 {
            return Err(Error::UnsupportedSize(size, "size >= 2"));
        }
        if upper.len() != entry_count(size) {
            return Err(Error::DimensionMismatch { expected: entry_count(size), found: upper.len() });
        }
        if upper.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite matrix entry".into()));
        }
        Ok(UnipotentElement { size, upper })
    }

    pub fn identity(size: usize) -> Self {
        assert!(size >= 2, "unipotent matrices need size >= 2");
        UnipotentElement { size, upper: vec![0.0; entry_count(size)] }
    }

    /// Heisenberg element with `x = g[0][1]`, `y = g[1][2]`, `z = g[0][2]`.
    pub fn heisenberg(x: f64, y: f64, z: f64) -> Self {
        UnipotentElement { size: 3, upper: vec![x, z, y] }
    }

    /// `(x, y, z)` coordinates of a Heisenberg element.
    pub fn heisenberg_coords(&self) -> Option<(f64, f64, f64)> {
        (self.size == 3).then(|| (self.upper[0], self.upper[2], self.upper[1]))
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.upper[idx(self.size, i, j)],
            std::cmp::Ordering::Equal => 1.0,
            std::cmp::Ordering::Greater => 0.0,
        }
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = idx(self.size, i, j);
        self.upper[k] = v;
    }

    pub fn is_integral(&self) -> bool {
        self.upper.iter().all(|v| v.fract() == 0.0)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.upper.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest entrywise difference to `other`.
    pub fn distance_sup(&self, other: &UnipotentElement) -> f64 {
        self.upper.iter().zip(&other.upper).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

fn check_sizes(g: &UnipotentElement, h: &UnipotentElement) -> Result<()> {
    if g.size != h.size {
        return Err(Error::SizeMismatch { left: g.size, right: h.size });
    }
    Ok(())
}

pub fn multiply(g: &UnipotentElement, h: &UnipotentElement) -> Result<UnipotentElement> {
    check_sizes(g, h)?;
    Ok(mul_unchecked(g, h))
}

pub(crate) fn mul_unchecked(g: &UnipotentElement, h: &UnipotentElement) -> UnipotentElement {
    let d = g.size;
    let mut out = UnipotentElement::identity(d);
    for i in 0..d {
        for j in i + 1..d {
            let mut v = g.entry(i, j) + h.entry(i, j);
            for k in i + 1..j {
                v += g.entry(i, k) * h.entry(k, j);
            }
            out.set(i, j, v);
        }
    }
    out
}

pub fn inverse(g: &UnipotentElement) -> UnipotentElement {
    let d = g.size;
    let mut inv = UnipotentElement::identity(d);
    // (g g')_ij = 0 gives g'_ij = -g_ij - sum_{i<k<j} g_ik g'_kj, filled by band.
    for band in 1..d {
        for i in 0..d - band {
            let j = i + band;
            let mut v = -g.entry(i, j);
            for k in i + 1..j {
                v -= g.entry(i, k) * inv.entry(k, j);
            }
            inv.set(i, j, v);
        }
    }
    inv
}

/// Entrywise binomial coefficient `C(n, k)` as a float, `n` any integer.
fn binomial(n: i64, k: usize) -> f64 {
    let mut num = 1.0f64;
    let mut den = 1.0f64;
    for t in 0..k {
        num *= (n - t as i64) as f64;
        den *= (t + 1) as f64;
    }
    num / den
}

/// `g^n` for any integer `n`.
///
/// Uses the terminating binomial series `g^n = sum_{k<D} C(n,k) (g - I)^k`,
/// which is exact as a polynomial in `n` and evaluates every entry as a sum
/// of at most `D - 1` terms, instead of chaining `O(log n)` rounded products.
pub fn power(g: &UnipotentElement, n: i64) -> UnipotentElement {
    let d = g.size;
    if n == 0 {
        return UnipotentElement::identity(d);
    }
    // nil_pows[k-1] holds the strictly-upper entries of (g - I)^k.
    let m = entry_count(d);
    let mut nil_pows: Vec<Vec<f64>> = Vec::with_capacity(d - 1);
    nil_pows.push(g.upper.clone());
    for k in 2..d {
        let prev = &nil_pows[k - 2];
        let mut next = vec![0.0; m];
        for i in 0..d {
            // (N^k)_ij vanishes unless j - i >= k
            for j in i + k..d {
                let mut v = 0.0;
                for t in i + 1..j {
                    v += g.upper[idx(d, i, t)] * prev[idx(d, t, j)];
                }
                next[idx(d, i, j)] = v;
            }
        }
        nil_pows.push(next);
    }
    let coeffs: Vec<f64> = (1..d).map(|k| binomial(n, k)).collect();
    let mut out = UnipotentElement::identity(d);
    for i in 0..d {
        for j in i + 1..d {
            let e = idx(d, i, j);
            let mut v = 0.0;
            for k in 1..=(j - i) {
                v += coeffs[k - 1] * nil_pows[k - 1][e];
            }
            out.upper[e] = v;
        }
    }
    out
}

/// `(a, b, c)^n = (n a, n b, n c + n(n-1)/2 a b)` in Heisenberg coordinates.
pub fn heisenberg_power(a: f64, b: f64, c: f64, n: i64) -> UnipotentElement {
    let nf = n as f64;
    let pairs = (n as f64) * ((n - 1) as f64) / 2.0;
    UnipotentElement::heisenberg(nf * a, nf * b, nf * c + pairs * (a * b))
}

/// A point of `G / Gamma` in canonical coordinates, each in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedPoint {
    size: usize,
    coords: Vec<f64>,
}

impl ReducedPoint {
    /// Validates and wraps coordinates already in `[0, 1)`.
    pub fn new(size: usize, coords: Vec<f64>) -> Result<Self> {
        if size < 2 {
            return Err(Error::UnsupportedSize(size, "size >= 2"));
        }
        if coords.len() != entry_count(size) {
            return Err(Error::DimensionMismatch { expected: entry_count(size), found: coords.len() });
        }
        if coords.iter().any(|c| !(0.0..1.0).contains(c)) {
            return Err(Error::InvalidArgument("reduced coordinates must lie in [0, 1)".into()));
        }
        Ok(ReducedPoint { size, coords })
    }

    /// Reduces arbitrary coordinates to the canonical representative.
    pub fn from_coords(size: usize, coords: Vec<f64>) -> Result<Self> {
        let g = UnipotentElement::new(size, coords)?;
        Ok(reduce(&g).0)
    }

    pub fn origin(size: usize) -> Self {
        ReducedPoint { size, coords: vec![0.0; entry_count(size)] }
    }

    pub fn heisenberg(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::from_coords(3, vec![x, z, y])
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn heisenberg_coords(&self) -> Option<(f64, f64, f64)> {
        (self.size == 3).then(|| (self.coords[0], self.coords[2], self.coords[1]))
    }

    /// The coset representative as a group element.
    pub fn lift(&self) -> UnipotentElement {
        UnipotentElement { size: self.size, upper: self.coords.clone() }
    }
}

/// `(floor, fractional part)` with the fractional part strictly below 1.
fn split_frac(v: f64) -> (f64, f64) {
    let fl = v.floor();
    let f = v - fl;
    if f >= 1.0 {
        (fl + 1.0, 0.0)
    } else {
        (fl, f)
    }
}

/// Canonical representative of the coset `g Gamma`.
///
/// Returns the reduced point and the integral `gamma` with `g gamma` equal to
/// it. Entries are fixed one superdiagonal at a time, nearest the diagonal
/// first: the `(i, j)` entry of `g gamma` is `g_ij + gamma_ij` plus terms
/// `g_ik gamma_kj` from bands already settled, so each corrective is the
/// unique integer that lands the entry in `[0, 1)`.
pub fn reduce(g: &UnipotentElement) -> (ReducedPoint, UnipotentElement) {
    let d = g.size;
    let mut gamma = UnipotentElement::identity(d);
    let mut coords = vec![0.0; entry_count(d)];
    for band in 1..d {
        for i in 0..d - band {
            let j = i + band;
            let mut v = g.entry(i, j);
            for k in i + 1..j {
                v += g.entry(i, k) * gamma.entry(k, j);
            }
            let (fl, f) = split_frac(v);
            gamma.set(i, j, -fl);
            coords[idx(d, i, j)] = f;
        }
    }
    (ReducedPoint { size: d, coords }, gamma)
}

/// A nilsystem: left translation by `tau` on `G / Gamma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NilSystem {
    tau: UnipotentElement,
    #[serde(skip)]
    correctives: OnceLock<Correctives>,
}

impl NilSystem {
    pub fn new(tau: UnipotentElement) -> Self {
        NilSystem { tau, correctives: OnceLock::new() }
    }

    pub fn from_entries(size: usize, tau: Vec<f64>) -> Result<Self> {
        Ok(NilSystem::new(UnipotentElement::new(size, tau)?))
    }

    /// Rotation of the circle by `alpha`.
    pub fn rotation(alpha: f64) -> Self {
        NilSystem::new(UnipotentElement { size: 2, upper: vec![alpha] })
    }

    /// The skew product `(u, v) -> (u + alpha, v + u)` on the 2-torus,
    /// realised on the sub-nilmanifold `x = 0` of the Heisenberg manifold
    /// with `u = y`, `v = z`.
    pub fn skew_product(alpha: f64) -> Self {
        NilSystem::new(UnipotentElement::heisenberg(1.0, alpha, 0.0))
    }

    pub fn size(&self) -> usize {
        self.tau.size
    }

    pub fn step(&self) -> usize {
        self.tau.size - 1
    }

    pub fn tau(&self) -> &UnipotentElement {
        &self.tau
    }

    /// [`manifold_distance`] with the corrective set cached on the system.
    pub fn distance(&self, x: &ReducedPoint, y: &ReducedPoint) -> f64 {
        debug_assert!(x.size == self.size() && y.size == self.size());
        let c = self.correctives.get_or_init(|| Correctives::new(self.size()));
        distance_with(x, y, c)
    }

    /// `tau^n` applied to the lift of `x0`, before reduction.
    pub fn orbit_element(&self, x0: &ReducedPoint, n: i64) -> Result<UnipotentElement> {
        if x0.size != self.size() {
            return Err(Error::SizeMismatch { left: self.size(), right: x0.size });
        }
        let bound = max_exponent(self.size());
        if n.abs() > bound {
            return Err(Error::PrecisionLimit { exponent: n, bound, size: self.size() });
        }
        Ok(mul_unchecked(&power(&self.tau, n), &x0.lift()))
    }
}

/// `tau^n . x0`, reduced.
pub fn orbit_point(sys: &NilSystem, x0: &ReducedPoint, n: i64) -> Result<ReducedPoint> {
    Ok(reduce(&sys.orbit_element(x0, n)?).0)
}

/// All integral unipotent matrices with entries in `{-1, 0, 1}`.
fn correctives(size: usize) -> Vec<UnipotentElement> {
    let m = entry_count(size);
    let total = 3usize.pow(m as u32);
    (0..total)
        .map(|mut code| {
            let upper = (0..m)
                .map(|_| {
                    let t = (code % 3) as f64 - 1.0;
                    code /= 3;
                    t
                })
                .collect();
            UnipotentElement { size, upper }
        })
        .collect()
}

fn one_sided(x: &ReducedPoint, y: &ReducedPoint, gammas: &[UnipotentElement]) -> f64 {
    let ly = y.lift();
    gammas
        .iter()
        .map(|g| {
            let moved = mul_unchecked(&ly, g);
            x.coords.iter().zip(&moved.upper).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
        .sqrt()
}

/// Distance on `G / Gamma` between reduced points.
///
/// Smallest Euclidean distance between the coordinates of one point and those
/// of `y gamma` for an integral corrective `gamma` with entries in
/// `{-1, 0, 1}`, symmetrised over the two points.
pub fn manifold_distance(x: &ReducedPoint, y: &ReducedPoint) -> Result<f64> {
    if x.size != y.size {
        return Err(Error::SizeMismatch { left: x.size, right: y.size });
    }
    Ok(distance_with(x, y, &Correctives::new(x.size)))
}

/// Precomputed corrective set for repeated distance evaluations.
#[derive(Debug, Clone, PartialEq)]
pub struct Correctives {
    size: usize,
    gammas: Vec<UnipotentElement>,
}

impl Correctives {
    pub fn new(size: usize) -> Self {
        Correctives { size, gammas: correctives(size) }
    }

    pub fn size(&self) -> usize {
        self.size
    }
}

pub(crate) fn distance_with(x: &ReducedPoint, y: &ReducedPoint, c: &Correctives) -> f64 {
    if x.size == 2 {
        let t = (x.coords[0] - y.coords[0]).abs();
        return t.min(1.0 - t);
    }
    one_sided(x, y, &c.gammas).min(one_sided(y, x, &c.gammas))
}
