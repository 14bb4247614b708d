//! The common interface of the invertible systems `(X, T)` used by the cube
//! and sequence machinery.

use std::fmt::Debug;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nilgroup::{orbit_point, NilSystem, ReducedPoint};

pub trait DynamicalSystem: Sync {
    type Point: Clone + Debug + PartialEq + Send + Sync + Serialize;

    /// `T^n x`.
    fn iterate(&self, x: &Self::Point, n: i64) -> Result<Self::Point>;

    /// The metric `d_X`.
    fn distance(&self, x: &Self::Point, y: &Self::Point) -> f64;
}

impl DynamicalSystem for NilSystem {
    type Point = ReducedPoint;

    fn iterate(&self, x: &ReducedPoint, n: i64) -> Result<ReducedPoint> {
        orbit_point(self, x, n)
    }

    fn distance(&self, x: &ReducedPoint, y: &ReducedPoint) -> f64 {
        NilSystem::distance(self, x, y)
    }
}

/// A finite product of nilsystems acting coordinatewise, with the Euclidean
/// combination of the factor metrics. Rotations of `T^k` are products of
/// `k` circle rotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductSystem {
    factors: Vec<NilSystem>,
}

impl ProductSystem {
    pub fn new(factors: Vec<NilSystem>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument("a product needs at least one factor".into()));
        }
        Ok(ProductSystem { factors })
    }

    /// The rotation of `T^k` by the vector `alphas`.
    pub fn torus_rotation(alphas: &[f64]) -> Result<Self> {
        Self::new(alphas.iter().map(|&a| NilSystem::rotation(a)).collect())
    }

    pub fn factors(&self) -> &[NilSystem] {
        &self.factors
    }

    /// Whether every factor is a circle rotation.
    pub fn is_rotation(&self) -> bool {
        self.factors.iter().all(|f| f.size() == 2)
    }

    /// Builds a point from one coordinate list per factor.
    pub fn point(&self, coords: &[Vec<f64>]) -> Result<Vec<ReducedPoint>> {
        if coords.len() != self.factors.len() {
            return Err(Error::DimensionMismatch { expected: self.factors.len(), found: coords.len() });
        }
        self.factors.iter().zip(coords).map(|(f, c)| ReducedPoint::from_coords(f.size(), c.clone())).collect()
    }
}

impl DynamicalSystem for ProductSystem {
    type Point = Vec<ReducedPoint>;

    fn iterate(&self, x: &Vec<ReducedPoint>, n: i64) -> Result<Vec<ReducedPoint>> {
        if x.len() != self.factors.len() {
            return Err(Error::DimensionMismatch { expected: self.factors.len(), found: x.len() });
        }
        self.factors.iter().zip(x).map(|(f, p)| orbit_point(f, p, n)).collect()
    }

    fn distance(&self, x: &Vec<ReducedPoint>, y: &Vec<ReducedPoint>) -> f64 {
        self.factors
            .iter()
            .zip(x.iter().zip(y))
            .map(|(f, (a, b))| {
                let t = f.distance(a, b);
                t * t
            })
            .sum::<f64>()
            .sqrt()
    }
}
