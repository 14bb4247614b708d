//! Functions on nilmanifolds used to read off nilsequences `f(tau^n x)`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nilgroup::{reduce, ReducedPoint, UnipotentElement};

/// `e(t) = exp(2 pi i t)`.
pub fn e(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * t)
}

/// `e(t)` with `t` taken mod 1 first, which keeps the phase accurate for large `t`.
pub(crate) fn e_mod1(t: f64) -> Complex64 {
    e(t - t.floor())
}

/// A compactly supported, continuous, piecewise-linear function on `R`.
///
/// Nodes are `(t, value)` pairs with strictly increasing `t`; the function is
/// zero outside `[t_first, t_last]` and both end values must be zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    nodes: Vec<(f64, f64)>,
}

impl Bump {
    pub fn new(nodes: Vec<(f64, f64)>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidArgument("a bump needs at least two nodes".into()));
        }
        if nodes.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidArgument("bump nodes must increase".into()));
        }
        if nodes.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite bump node".into()));
        }
        if nodes[0].1 != 0.0 || nodes[nodes.len() - 1].1 != 0.0 {
            return Err(Error::InvalidArgument("bump must vanish at its support ends".into()));
        }
        Ok(Bump { nodes })
    }

    /// `t -> max(0, 1 - |t| / radius)`.
    pub fn triangle(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("bad bump radius {radius}")));
        }
        Bump::new(vec![(-radius, 0.0), (0.0, 1.0), (radius, 0.0)])
    }

    pub fn support(&self) -> (f64, f64) {
        (self.nodes[0].0, self.nodes[self.nodes.len() - 1].0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (lo, hi) = self.support();
        if t <= lo || t >= hi {
            return 0.0;
        }
        let k = self.nodes.partition_point(|(s, _)| *s <= t);
        let (t0, v0) = self.nodes[k - 1];
        let (t1, v1) = self.nodes[k];
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    /// `sum_m psi(y + m) e(m x)` over the finitely many `m` with `y + m` in the support.
    fn theta_sum(&self, x: f64, y: f64) -> Complex64 {
        let (lo, hi) = self.support();
        let m_lo = (lo - y).ceil() as i64;
        let m_hi = (hi - y).floor() as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        for m in m_lo..=m_hi {
            let w = self.eval(y + m as f64);
            if w != 0.0 {
                acc += w * e_mod1(m as f64 * x);
            }
        }
        acc
    }
}

impl Default for Bump {
    fn default() -> Self {
        Bump::triangle(1.0).expect("unit triangle is valid")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Observable {
    /// `e(sum_e k_e c_e)` over the first-superdiagonal reduced coordinates.
    TorusCharacter { frequencies: Vec<i64> },
    /// `F(x, y, z) = e(z) sum_m psi(y + m) e(m x)` on the Heisenberg manifold.
    Theta { bump: Bump },
    /// A raw reduced coordinate; discontinuous where the fundamental domain wraps.
    RawCoordinate { index: usize },
}

impl Observable {
    pub fn character(frequencies: Vec<i64>) -> Self {
        Observable::TorusCharacter { frequencies }
    }

    pub fn theta(bump: Bump) -> Self {
        Observable::Theta { bump }
    }

    /// Whether the observable is a continuous function on `G / Gamma`.
    pub fn is_continuous(&self) -> bool {
        !matches!(self, Observable::RawCoordinate { .. })
    }

    /// Checks that the observable makes sense on `size x size` matrices.
    pub fn check_size(&self, size: usize) -> Result<()> {
        match self {
            Observable::TorusCharacter { frequencies } if frequencies.len() > size - 1 => {
                Err(Error::DimensionMismatch { expected: size - 1, found: frequencies.len() })
            }
            Observable::Theta { .. } if size != 3 => Err(Error::UnsupportedSize(size, "theta observables need size 3")),
            Observable::RawCoordinate { index } if *index >= size * (size - 1) / 2 => {
                Err(Error::IndexOutOfRange { index: *index as i64, lo: 0, hi: (size * (size - 1) / 2) as i64 - 1 })
            }
            _ => Ok(()),
        }
    }
}

/// Evaluates `obs` at the coset of `g`.
pub fn eval(obs: &Observable, g: &UnipotentElement) -> Result<Complex64> {
    obs.check_size(g.size())?;
    Ok(match obs {
        Observable::TorusCharacter { frequencies } => {
            let p = reduce(g).0;
            character_on(frequencies, &p)
        }
        Observable::Theta { bump } => {
            let (x, y, z) = g.heisenberg_coords().expect("size checked");
            e_mod1(z) * bump.theta_sum(x, y)
        }
        Observable::RawCoordinate { index } => {
            let p = reduce(g).0;
            Complex64::new(p.coords()[*index], 0.0)
        }
    })
}

/// Evaluates `obs` at a reduced point.
pub fn eval_point(obs: &Observable, p: &ReducedPoint) -> Result<Complex64> {
    eval(obs, &p.lift())
}

fn character_on(frequencies: &[i64], p: &ReducedPoint) -> Complex64 {
    let size = p.size();
    // first superdiagonal (i, i+1) sits at row-major offset i * (2 size - i - 1) / 2
    let phase: f64 =
        frequencies.iter().enumerate().map(|(i, &k)| k as f64 * p.coords()[i * (2 * size - i - 1) / 2]).sum();
    e_mod1(phase)
}

/// `e(n(n-1)/2 alpha beta) sum_m psi(n beta + m) e(m n alpha)`: the theta
/// observable along the orbit of the identity under `(alpha, beta, 0)`.
pub fn closed_form_heisenberg_nilseq(alpha: f64, beta: f64, bump: &Bump, n: i64) -> Complex64 {
    let nf = n as f64;
    let pairs = (n as f64) * ((n - 1) as f64) / 2.0;
    e_mod1(pairs * (alpha * beta)) * bump.theta_sum(nf * alpha, nf * beta)
}
