//! Dynamical parallelepipeds: generator cubes `(T^{n.e} x)_e`, the face
//! group action, face projections, bounded searches for regionally
//! proximal witnesses, and completion of a missing top vertex.
//!
//! Membership in the closure `Q^[d]` is never decided. Every statement is
//! about generator cubes with explicit bounds on `n`.
//!
//! Searches scan integer parameters in the order `0, 1, -1, 2, -2, ..` and
//! side vectors lexicographically in that order, returning the first hit.

use std::ops::ControlFlow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cube_index::{
    check_dim, for_each_side_vector, vertex_count, EuclideanPerm, SideVector, TopVertex, VertexIndex,
};
use crate::error::{Error, Result};
use crate::nilgroup::{NilSystem, ReducedPoint};
use crate::system::{DynamicalSystem, ProductSystem};

/// A point of `X^{2^d}`, vertices in `sigma` order.
#[derive(Debug, Clone, PartialEq)]
pub struct CubePoint<P> {
    dim: usize,
    vertices: Vec<P>,
}

impl<P: Clone> CubePoint<P> {
    /// `dim == 0` is the single-vertex cube.
    pub fn new(dim: usize, vertices: Vec<P>) -> Result<Self> {
        if dim > 0 {
            check_dim(dim)?;
        }
        if vertices.len() != 1usize << dim {
            return Err(Error::DimensionMismatch { expected: 1 << dim, found: vertices.len() });
        }
        Ok(CubePoint { dim, vertices })
    }

    pub fn diagonal(dim: usize, x: P) -> Result<Self> {
        Self::new(dim, vec![x; 1 << dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[P] {
        &self.vertices
    }

    pub fn vertex(&self, eps: &VertexIndex) -> Result<&P> {
        if eps.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: eps.dim() });
        }
        Ok(&self.vertices[eps.bits() as usize])
    }

    /// All vertices except the full one.
    pub fn without_top(&self) -> &[P] {
        &self.vertices[..self.vertices.len() - 1]
    }
}

impl<P: Serialize> Serialize for CubePoint<P> {
    fn serialize<Ser: serde::Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        use serde::ser::SerializeSeq;
        #[derive(Serialize)]
        struct Entry<'a, P> {
            vertex: String,
            point: &'a P,
        }
        let mut seq = s.serialize_seq(Some(self.vertices.len()))?;
        for (bits, p) in self.vertices.iter().enumerate() {
            let vertex = (0..self.dim).map(|i| if bits >> i & 1 == 1 { '1' } else { '0' }).collect();
            seq.serialize_element(&Entry { vertex, point: p })?;
        }
        seq.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceLetter {
    /// `T^e` at every vertex.
    Diagonal { exponent: i64 },
    /// `T^e` at the vertices containing digit `j` (1-based).
    Face { j: usize, exponent: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FaceWord(pub Vec<FaceLetter>);

impl FaceWord {
    /// `prod_j Face{j, n_j}`.
    pub fn from_side_vector(n: &SideVector) -> Self {
        FaceWord(n.entries().iter().enumerate().map(|(i, &e)| FaceLetter::Face { j: i + 1, exponent: e }).collect())
    }

    /// Net exponent of `T` at each vertex.
    pub fn exponents(&self, dim: usize) -> Result<Vec<i64>> {
        let mut out = vec![0i64; 1 << dim];
        for letter in &self.0 {
            match *letter {
                FaceLetter::Diagonal { exponent } => out.iter_mut().for_each(|e| *e += exponent),
                FaceLetter::Face { j, exponent } => {
                    if j == 0 || j > dim {
                        return Err(Error::IndexOutOfRange { index: j as i64, lo: 1, hi: dim as i64 });
                    }
                    for (bits, e) in out.iter_mut().enumerate() {
                        if bits >> (j - 1) & 1 == 1 {
                            *e += exponent;
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// The cube with vertex `e` equal to `T^{n.e} x`.
pub fn generate_cube<S: DynamicalSystem>(sys: &S, x: &S::Point, n: &SideVector) -> Result<CubePoint<S::Point>> {
    check_dim(n.dim())?;
    let vertices = n.vertex_sums().iter().map(|&s| sys.iterate(x, s)).collect::<Result<_>>()?;
    CubePoint::new(n.dim(), vertices)
}

pub fn apply_face_word<S: DynamicalSystem>(
    sys: &S,
    w: &FaceWord,
    c: &CubePoint<S::Point>,
) -> Result<CubePoint<S::Point>> {
    let exps = w.exponents(c.dim())?;
    let vertices = c
        .vertices()
        .iter()
        .zip(exps)
        .map(|(p, e)| if e == 0 { Ok(p.clone()) } else { sys.iterate(p, e) })
        .collect::<Result<_>>()?;
    CubePoint::new(c.dim(), vertices)
}

/// Keeps the vertices with `e_j = xi_j` for every `j` in `face` (1-based
/// digits, paired with `xi`), reindexed on the remaining digits in order.
pub fn face_project<P: Clone>(c: &CubePoint<P>, face: &[usize], xi: &[u8]) -> Result<CubePoint<P>> {
    if face.len() != xi.len() {
        return Err(Error::InvalidArgument("face and assignment lengths differ".into()));
    }
    let mut fixed_mask = 0usize;
    let mut fixed_bits = 0usize;
    for (&j, &b) in face.iter().zip(xi) {
        if j == 0 || j > c.dim() || b > 1 {
            return Err(Error::InvalidArgument(format!("bad face digit {j} or bit {b}")));
        }
        if fixed_mask >> (j - 1) & 1 == 1 {
            return Err(Error::InvalidArgument(format!("digit {j} repeated")));
        }
        fixed_mask |= 1 << (j - 1);
        fixed_bits |= (b as usize) << (j - 1);
    }
    let free: Vec<usize> = (0..c.dim()).filter(|i| fixed_mask >> i & 1 == 0).collect();
    let vertices = (0..1usize << free.len())
        .map(|local| {
            let bits = free.iter().enumerate().fold(fixed_bits, |acc, (k, &i)| acc | (local >> k & 1) << i);
            c.vertices()[bits].clone()
        })
        .collect();
    CubePoint::new(free.len(), vertices)
}

/// `(c, c)` as a cube of one more dimension.
pub fn duplicate<P: Clone>(c: &CubePoint<P>) -> Result<CubePoint<P>> {
    let mut vertices = c.vertices().to_vec();
    vertices.extend_from_slice(c.vertices());
    CubePoint::new(c.dim() + 1, vertices)
}

/// Moves the coordinate at `e` to position `p(e)`.
pub fn permute<P: Clone>(c: &CubePoint<P>, p: &EuclideanPerm) -> Result<CubePoint<P>> {
    if p.dim() != c.dim() {
        return Err(Error::DimensionMismatch { expected: c.dim(), found: p.dim() });
    }
    let mut out = c.vertices().to_vec();
    for (bits, v) in c.vertices().iter().enumerate() {
        out[p.apply_bits(bits as u32) as usize] = v.clone();
    }
    CubePoint::new(c.dim(), out)
}

/// Largest vertexwise distance between two cubes of equal dimension.
pub fn cube_distance<S: DynamicalSystem>(sys: &S, a: &CubePoint<S::Point>, b: &CubePoint<S::Point>) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(a.vertices().iter().zip(b.vertices()).fold(0.0, |m, (p, q)| m.max(sys.distance(p, q))))
}

fn small_first(r: i64) -> impl Iterator<Item = i64> {
    std::iter::once(0).chain((1..=r).flat_map(|n| [n, -n]))
}

fn check_search(d: usize, delta: f64, nmax: i64) -> Result<()> {
    check_dim(d)?;
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("delta = {delta} must be positive")));
    }
    if nmax < 1 {
        return Err(Error::InvalidArgument(format!("nmax = {nmax} < 1")));
    }
    Ok(())
}

/// `T^m p` for `m` in `[-reach, reach]`, indexed by `m + reach`.
fn orbit_table<S: DynamicalSystem>(sys: &S, p: &S::Point, reach: i64) -> Result<Vec<S::Point>> {
    (-reach..=reach).into_par_iter().map(|m| sys.iterate(p, m)).collect()
}

/// Exponents `i` with `|i| <= nmax` and `d(T^i p, p) < delta`, small first.
fn returns<S: DynamicalSystem>(sys: &S, p: &S::Point, delta: f64, nmax: i64) -> Result<Vec<(i64, S::Point)>> {
    let order: Vec<i64> = small_first(nmax).collect();
    let hits: Vec<Option<(i64, S::Point)>> = order
        .into_par_iter()
        .map(|i| {
            let q = sys.iterate(p, i)?;
            Ok((sys.distance(&q, p) < delta).then_some((i, q)))
        })
        .collect::<Result<_>>()?;
    Ok(hits.into_iter().flatten().collect())
}

/// The first side vector, in small-first lexicographic order, whose
/// nonempty vertex sums all lie in the sorted set `a`.
fn first_side_vector(d: usize, a: &[i64], nmax: i64) -> Option<SideVector> {
    let candidates: Vec<i64> = small_first(nmax).filter(|m| a.binary_search(m).is_ok()).collect();
    let mut found = None;
    for_each_side_vector(
        d,
        &candidates,
        |s| a.binary_search(&s).is_ok(),
        TopVertex::Check,
        |n, _| {
            found = Some(SideVector::new(n.to_vec()));
            ControlFlow::Break(())
        },
    )
    .expect("dimension checked");
    found
}

/// How `x'` is chosen in [`rp_witness_search`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XPrime {
    /// Any orbit point `T^i x` within `delta` of `x`.
    #[default]
    Orbit,
    /// `x' = x`. Cheaper, and complete only for distal systems.
    Fixed,
}

/// `x' = T^{i_x} x`, `y' = T^{i_y} y` and `n` such that every nonempty
/// vertex pair `(T^{n.e} x', T^{n.e} y')` is close.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RPWitness<P> {
    pub x_prime: P,
    pub y_prime: P,
    pub i_x: i64,
    pub i_y: i64,
    pub n: SideVector,
    /// Largest of the defining distances.
    pub achieved: f64,
}

impl<P: Clone + std::fmt::Debug + PartialEq + Send + Sync + Serialize> RPWitness<P> {
    pub fn new<S: DynamicalSystem<Point = P>>(
        sys: &S,
        x: &P,
        y: &P,
        i_x: i64,
        i_y: i64,
        n: SideVector,
    ) -> Result<Self> {
        let x_prime = sys.iterate(x, i_x)?;
        let y_prime = sys.iterate(y, i_y)?;
        let mut achieved = sys.distance(x, &x_prime).max(sys.distance(y, &y_prime));
        for &s in &n.vertex_sums()[1..] {
            achieved = achieved.max(sys.distance(&sys.iterate(&x_prime, s)?, &sys.iterate(&y_prime, s)?));
        }
        Ok(RPWitness { x_prime, y_prime, i_x, i_y, n, achieved })
    }
}

/// Bounded search for a witness that `(x, y)` is regionally proximal of
/// order `d` at scale `delta`. `None` only means nothing was found within
/// `nmax`.
pub fn rp_witness_search<S: DynamicalSystem>(
    sys: &S,
    x: &S::Point,
    y: &S::Point,
    d: usize,
    delta: f64,
    nmax: i64,
    mode: XPrime,
) -> Result<Option<RPWitness<S::Point>>> {
    check_search(d, delta, nmax)?;
    let reach = d as i64 * nmax;
    let xs = match mode {
        XPrime::Orbit => returns(sys, x, delta, nmax)?,
        XPrime::Fixed => vec![(0, sys.iterate(x, 0)?)],
    };
    let ys = returns(sys, y, delta, nmax)?;
    let x_tables = xs.iter().map(|(_, p)| orbit_table(sys, p, reach)).collect::<Result<Vec<_>>>()?;
    let y_tables = ys.iter().map(|(_, p)| orbit_table(sys, p, reach)).collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(usize, usize)> = (0..xs.len()).flat_map(|a| (0..ys.len()).map(move |b| (a, b))).collect();
    let hit = pairs.par_iter().find_map_first(|&(a, b)| {
        let close: Vec<i64> = (-reach..=reach)
            .filter(|&m| {
                let k = (m + reach) as usize;
                sys.distance(&x_tables[a][k], &y_tables[b][k]) < delta
            })
            .collect();
        first_side_vector(d, &close, nmax).map(|n| (xs[a].0, ys[b].0, n))
    });
    hit.map(|(i_x, i_y, n)| RPWitness::new(sys, x, y, i_x, i_y, n)).transpose()
}

/// Generator parameters of a cube of dimension `d + 1` close to the
/// pattern `(x, a, y, a)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CubeWitness<P> {
    /// `z = T^i x`.
    pub z: P,
    pub i: i64,
    pub n: SideVector,
    pub achieved: f64,
}

impl<P: Clone + std::fmt::Debug + PartialEq + Send + Sync + Serialize> CubeWitness<P> {
    pub fn new<S: DynamicalSystem<Point = P>>(sys: &S, x: &P, y: &P, i: i64, n: SideVector) -> Result<Self> {
        if n.dim() < 2 {
            return Err(Error::InvalidArgument("cube witnesses need dimension at least 2".into()));
        }
        let z = sys.iterate(x, i)?;
        let cube = generate_cube(sys, &z, &n)?;
        let v = cube.vertices();
        let half = v.len() / 2;
        let mut achieved = sys.distance(&v[0], x).max(sys.distance(&v[half], y));
        for bits in 1..half {
            achieved = achieved.max(sys.distance(&v[bits], &v[bits + half]));
        }
        Ok(CubeWitness { z, i, n, achieved })
    }
}

/// Bounded search over generator cubes of `Q^[d+1]` with vertex `0`
/// near `x`, vertex `{d+1}` near `y`, and each `(e, e + {d+1})` pair close.
pub fn rp_cube_witness<S: DynamicalSystem>(
    sys: &S,
    x: &S::Point,
    y: &S::Point,
    d: usize,
    delta: f64,
    nmax: i64,
) -> Result<Option<CubeWitness<S::Point>>> {
    check_search(d + 1, delta, nmax)?;
    let reach = d as i64 * nmax;
    for (i, z) in returns(sys, x, delta, nmax)? {
        let table = orbit_table(sys, &z, reach + nmax)?;
        let at = |m: i64| &table[(m + reach + nmax) as usize];
        let shifts: Vec<i64> = small_first(nmax).filter(|&t| sys.distance(at(t), y) < delta).collect();
        let hit = shifts.par_iter().find_map_first(|&t| {
            let close: Vec<i64> = (-reach..=reach).filter(|&m| sys.distance(at(m), at(m + t)) < delta).collect();
            first_side_vector(d, &close, nmax).map(|n| (t, n))
        });
        if let Some((t, n)) = hit {
            let mut entries = n.0;
            entries.push(t);
            return CubeWitness::new(sys, x, y, i, SideVector::new(entries)).map(Some);
        }
    }
    Ok(None)
}

/// Systems whose points are tuples of circle coordinates and whose
/// transformation is a rotation.
pub trait Rotation: DynamicalSystem {
    fn angles(&self, p: &Self::Point) -> Result<Vec<f64>>;
    fn from_angles(&self, angles: Vec<f64>) -> Result<Self::Point>;
}

impl Rotation for NilSystem {
    fn angles(&self, p: &ReducedPoint) -> Result<Vec<f64>> {
        if self.size() != 2 || p.size() != 2 {
            return Err(Error::UnsupportedSize(self.size(), "2 (a circle rotation)"));
        }
        Ok(p.coords().to_vec())
    }

    fn from_angles(&self, angles: Vec<f64>) -> Result<ReducedPoint> {
        ReducedPoint::from_coords(2, angles)
    }
}

impl Rotation for ProductSystem {
    fn angles(&self, p: &Vec<ReducedPoint>) -> Result<Vec<f64>> {
        if !self.is_rotation() {
            return Err(Error::InvalidArgument("not a torus rotation".into()));
        }
        if p.len() != self.factors().len() {
            return Err(Error::DimensionMismatch { expected: self.factors().len(), found: p.len() });
        }
        Ok(p.iter().map(|q| q.coords()[0]).collect())
    }

    fn from_angles(&self, angles: Vec<f64>) -> Result<Vec<ReducedPoint>> {
        self.point(&angles.into_iter().map(|a| vec![a]).collect::<Vec<_>>())
    }
}

/// Tolerance for the consistency of the given faces.
pub const FACE_TOL: f64 = 1e-9;

fn circle_gap(a: f64) -> f64 {
    let r = a.rem_euclid(1.0);
    r.min(1.0 - r)
}

/// The missing vertex `[d]` of a rotation cube, as the alternating sum
/// `sum_{e != [d]} (-1)^{d - |e| + 1} x_e` taken coordinatewise mod 1.
/// `given` holds the other `2^d - 1` vertices in `sigma` order.
pub fn complete_vertex_rotation<S: Rotation>(sys: &S, given: &[S::Point], d: usize) -> Result<S::Point> {
    check_dim(d)?;
    if given.len() != vertex_count(d) - 1 {
        return Err(Error::DimensionMismatch { expected: vertex_count(d) - 1, found: given.len() });
    }
    let coords: Vec<Vec<f64>> = given.iter().map(|p| sys.angles(p)).collect::<Result<_>>()?;
    let base = &coords[0];
    let k = base.len();
    // A rotation cube is x_e = x_0 + sum_{i in e} (x_{i} - x_0).
    let mut worst = 0.0f64;
    for (bits, c) in coords.iter().enumerate().skip(1) {
        for t in 0..k {
            let predicted =
                base[t] + (0..d).filter(|i| bits >> i & 1 == 1).map(|i| coords[1 << i][t] - base[t]).sum::<f64>();
            worst = worst.max(circle_gap(c[t] - predicted));
        }
    }
    if worst > FACE_TOL {
        return Err(Error::InconsistentFaces(worst));
    }
    let out = (0..k)
        .map(|t| {
            coords
                .iter()
                .enumerate()
                .map(|(bits, c)| {
                    let sign = if (d - bits.count_ones() as usize + 1) % 2 == 0 { 1.0 } else { -1.0 };
                    sign * c[t]
                })
                .sum::<f64>()
                .rem_euclid(1.0)
        })
        .map(|v| if v >= 1.0 { 0.0 } else { v })
        .collect();
    sys.from_angles(out)
}

/// Result of [`complete_vertex_search`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Completion<P> {
    pub point: P,
    /// Base `z = T^i x_0`.
    pub i: i64,
    pub n: SideVector,
    /// Largest distance between the generator cube and the given vertices.
    pub achieved: f64,
}

/// Brute-force completion: over `z = T^i x_0` and `|n_j| <= nmax`, the
/// generator cube closest (in the largest vertex distance) to the given
/// `2^d - 1` vertices. Returns its top vertex when that distance is below
/// `delta`.
pub fn complete_vertex_search<S: DynamicalSystem>(
    sys: &S,
    given: &[S::Point],
    d: usize,
    delta: f64,
    nmax: i64,
) -> Result<Option<Completion<S::Point>>> {
    check_search(d, delta, nmax)?;
    if given.len() != vertex_count(d) - 1 {
        return Err(Error::DimensionMismatch { expected: vertex_count(d) - 1, found: given.len() });
    }
    let bases = returns(sys, &given[0], delta, nmax)?;
    let best: Vec<Option<(f64, i64, Vec<i64>)>> = bases
        .par_iter()
        .map(|(i, z)| -> Result<Option<(f64, i64, Vec<i64>)>> {
            let table = orbit_table(sys, z, d as i64 * nmax)?;
            let reach = d as i64 * nmax;
            let at = |m: i64| &table[(m + reach) as usize];
            let dist0 = sys.distance(z, &given[0]);
            let per_digit: Vec<Vec<i64>> = (0..d)
                .map(|j| small_first(nmax).filter(|&t| sys.distance(at(t), &given[1 << j]) < delta).collect())
                .collect();
            let mut best: Option<(f64, Vec<i64>)> = None;
            let mut n = vec![0i64; d];
            let mut sums = vec![0i64; 1 << d];
            let mut dists = vec![dist0; d + 1];
            descend(0, d, &per_digit, &given, &at, sys, delta, &mut n, &mut sums, &mut dists, &mut best);
            Ok(best.map(|(m, n)| (m, *i, n)))
        })
        .collect::<Result<_>>()?;
    let mut winner: Option<(f64, i64, Vec<i64>)> = None;
    for cand in best.into_iter().flatten() {
        if winner.as_ref().map_or(true, |w| cand.0 < w.0) {
            winner = Some(cand);
        }
    }
    let Some((_, i, n)) = winner else {
        return Ok(None);
    };
    let z = sys.iterate(&given[0], i)?;
    let n = SideVector::new(n);
    let cube = generate_cube(sys, &z, &n)?;
    let achieved = cube.without_top().iter().zip(given).fold(0.0f64, |m, (p, q)| m.max(sys.distance(p, q)));
    let point = cube.vertices()[cube.vertices().len() - 1].clone();
    Ok(Some(Completion { point, i, n, achieved }))
}

#[allow(clippy::too_many_arguments)]
fn descend<'t, S: DynamicalSystem, F: Fn(i64) -> &'t S::Point>(
    j: usize,
    d: usize,
    per_digit: &[Vec<i64>],
    given: &[S::Point],
    at: &F,
    sys: &S,
    delta: f64,
    n: &mut [i64],
    sums: &mut [i64],
    dists: &mut [f64],
    best: &mut Option<(f64, Vec<i64>)>,
) where
    S::Point: 't,
{
    if j == d {
        if best.as_ref().map_or(true, |b| dists[d] < b.0) {
            *best = Some((dists[d], n.to_vec()));
        }
        return;
    }
    let half = 1usize << j;
    let full = (1usize << d) - 1;
    'cand: for &c in &per_digit[j] {
        let mut worst = dists[j];
        for mask in 0..half {
            let idx = mask | half;
            sums[idx] = sums[mask] + c;
            if idx != full {
                worst = worst.max(sys.distance(at(sums[idx]), &given[idx]));
                if !(worst < delta) || best.as_ref().is_some_and(|b| worst >= b.0) {
                    continue 'cand;
                }
            }
        }
        n[j] = c;
        dists[j + 1] = worst;
        descend(j + 1, d, per_digit, given, at, sys, delta, n, sums, dists, best);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube_index::{apply_perm, perm_action_on_generators};
    use crate::nilgroup::NilSystem;

    const GOLDEN: f64 = 0.618_033_988_749_894_9;

    fn circle(a: f64) -> ReducedPoint {
        ReducedPoint::new(2, vec![a]).unwrap()
    }

    #[test]
    fn generator_cube_examples() {
        let rot = NilSystem::rotation(GOLDEN);
        let x = circle(0.0);
        let c = generate_cube(&rot, &x, &SideVector::zeros(3)).unwrap();
        assert!(c.vertices().iter().all(|v| *v == x));

        let c = generate_cube(&rot, &x, &SideVector::new(vec![1, 2])).unwrap();
        for (v, k) in c.vertices().iter().zip([0.0, 1.0, 2.0, 3.0]) {
            assert!(circle_gap(v.coords()[0] - k * GOLDEN) < 1e-12);
        }

        // (x, T^m x, T^n x, T^{m+n} x, T^p x, T^{m+p} x, T^{n+p} x, T^{m+n+p} x)
        let (m, n, p) = (3, -5, 11);
        let c = generate_cube(&rot, &x, &SideVector::new(vec![m, n, p])).unwrap();
        for (v, e) in c.vertices().iter().zip([0, m, n, m + n, p, m + p, n + p, m + n + p]) {
            assert_eq!(*v, rot.iterate(&x, e).unwrap());
        }
    }

    #[test]
    fn face_words() {
        let rot = NilSystem::rotation(GOLDEN);
        let x = circle(0.25);
        let diag = CubePoint::diagonal(2, x.clone()).unwrap();
        let c = apply_face_word(&rot, &FaceWord(vec![FaceLetter::Face { j: 1, exponent: 1 }]), &diag).unwrap();
        let tx = rot.iterate(&x, 1).unwrap();
        assert_eq!(c.vertices(), &[x.clone(), tx.clone(), x.clone(), tx.clone()]);
        let c = apply_face_word(&rot, &FaceWord(vec![FaceLetter::Diagonal { exponent: 1 }]), &diag).unwrap();
        assert!(c.vertices().iter().all(|v| *v == tx));
        let bad = FaceWord(vec![FaceLetter::Face { j: 3, exponent: 1 }]);
        assert!(apply_face_word(&rot, &bad, &diag).is_err());
    }

    #[test]
    fn face_word_exponents_match_generators() {
        for d in 1..=4 {
            let n = SideVector::new((1..=d as i64).map(|i| 7 * i - 13).collect());
            assert_eq!(FaceWord::from_side_vector(&n).exponents(d).unwrap(), n.vertex_sums());
        }
    }

    #[test]
    fn projections() {
        let rot = NilSystem::rotation(GOLDEN);
        let x = circle(0.1);
        let c = generate_cube(&rot, &x, &SideVector::new(vec![4, 9])).unwrap();
        assert_eq!(face_project(&c, &[], &[]).unwrap(), c);
        let low = face_project(&c, &[2], &[0]).unwrap();
        assert_eq!(low, generate_cube(&rot, &x, &SideVector::new(vec![4])).unwrap());
        let one = face_project(&c, &[1, 2], &[1, 0]).unwrap();
        assert_eq!((one.dim(), one.vertices()), (0, &c.vertices()[1..2]));
        assert!(face_project(&c, &[3], &[0]).is_err());
        assert!(face_project(&c, &[1], &[2]).is_err());
        assert!(face_project(&c, &[1, 1], &[0, 0]).is_err());
    }

    #[test]
    fn duplication_and_permutation() {
        let rot = NilSystem::rotation(GOLDEN);
        let x = circle(0.3);
        let n = SideVector::new(vec![2, -7, 5]);
        let c = generate_cube(&rot, &x, &n).unwrap();
        let dup = duplicate(&c).unwrap();
        assert_eq!(dup, generate_cube(&rot, &x, &SideVector::new(vec![2, -7, 5, 0])).unwrap());

        let p = EuclideanPerm::new(vec![2, 0, 1], 0b010).unwrap();
        let (m, shift) = perm_action_on_generators(&p, &n).unwrap();
        let exps = CubePoint::new(3, n.vertex_sums()).unwrap();
        let moved_exps = permute(&exps, &p).unwrap();
        assert_eq!(moved_exps.vertices(), &m.vertex_sums().iter().map(|s| s + shift).collect::<Vec<_>>()[..]);
        let moved = permute(&c, &p).unwrap();
        let target = generate_cube(&rot, &rot.iterate(&x, shift).unwrap(), &m).unwrap();
        assert!(cube_distance(&rot, &moved, &target).unwrap() < 1e-12);
        for eps in VertexIndex::all(3).unwrap() {
            assert_eq!(moved.vertex(&apply_perm(&p, &eps).unwrap()).unwrap(), c.vertex(&eps).unwrap());
        }
    }

    #[test]
    fn serializes_with_vertex_keys() {
        let c = CubePoint::new(2, vec![1, 2, 3, 4]).unwrap();
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v[1]["vertex"], "10");
        assert_eq!(v[3]["point"], 4);
    }

    #[test]
    fn rp_trivial_cases() {
        let rot = NilSystem::rotation(GOLDEN);
        let x = circle(0.4);
        let w = rp_witness_search(&rot, &x, &x, 2, 0.01, 10, XPrime::Orbit).unwrap().unwrap();
        assert_eq!((w.i_x, w.i_y, &w.n.0[..], w.achieved), (0, 0, &[0, 0][..], 0.0));
        let w = rp_cube_witness(&rot, &x, &x, 2, 0.01, 10).unwrap().unwrap();
        assert_eq!((w.i, &w.n.0[..], w.achieved), (0, &[0, 0, 0][..], 0.0));

        let y = circle(0.5);
        for nmax in [10, 200] {
            assert!(rp_witness_search(&rot, &x, &y, 1, 0.03, nmax, XPrime::Orbit).unwrap().is_none());
            assert!(rp_cube_witness(&rot, &x, &y, 1, 0.03, nmax).unwrap().is_none());
        }
        assert!(rp_witness_search(&rot, &x, &y, 1, 0.0, 5, XPrime::Orbit).is_err());
    }

    #[test]
    fn rotation_completion() {
        let rot = NilSystem::rotation(GOLDEN);
        let x = circle(0.2);
        let given = [circle(0.2), circle(0.5), circle(0.9)];
        let top = complete_vertex_rotation(&rot, &given, 2).unwrap();
        assert!(circle_gap(top.coords()[0] - 0.2) < 1e-12);
        let flat = vec![x.clone(); 7];
        assert_eq!(complete_vertex_rotation(&rot, &flat, 3).unwrap(), x);

        let c = generate_cube(&rot, &x, &SideVector::new(vec![17, -4, 30])).unwrap();
        let top = complete_vertex_rotation(&rot, c.without_top(), 3).unwrap();
        assert!(rot.distance(&top, &c.vertices()[7]) < 1e-9);

        let mut bent = c.without_top().to_vec();
        bent[3] = circle(0.77);
        assert!(matches!(complete_vertex_rotation(&rot, &bent, 3), Err(Error::InconsistentFaces(_))));
    }

    #[test]
    fn search_completion_agrees_with_rotation() {
        let rot = NilSystem::rotation(GOLDEN);
        let x = circle(0.6);
        let c = generate_cube(&rot, &x, &SideVector::new(vec![12, -9])).unwrap();
        let found = complete_vertex_search(&rot, c.without_top(), 2, 1e-6, 40).unwrap().unwrap();
        let exact = complete_vertex_rotation(&rot, c.without_top(), 2).unwrap();
        assert!(rot.distance(&found.point, &exact) < 1e-6);
        assert!(found.achieved < 1e-6);

        let junk = [circle(0.1), circle(0.45), circle(0.93)];
        assert!(complete_vertex_search(&rot, &junk, 2, 1e-6, 40).unwrap().is_none());
    }
}
