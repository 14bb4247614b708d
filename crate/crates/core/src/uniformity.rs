//! Cube averages, uniformity seminorms and dual functions on `Z/N`.
//!
//! Complex functions carry the parity conjugation: the value at vertex `e`
//! is conjugated when `|e|` is odd in cube averages and seminorms, and when
//! `|e|` is even in dual functions. On real functions both are the plain
//! products.
//!
//! Every sum runs in parallel over `x` and is reduced in index order, so
//! results do not depend on the thread count.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::cube_index::{check_dim, SideVector};
use crate::error::{Error, Result};
use crate::sequences::ComplexSequence;

/// Default largest modulus.
pub const DEFAULT_MAX_N: usize = 512;

/// Tolerance used by the identity checks.
pub const CHECK_TOL: f64 = 1e-9;

/// Label for reports.
pub const CONJUGATION: &str = "parity: conjugate odd vertices (dual: even vertices)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct CyclicFunction {
    values: Vec<Complex64>,
}

impl TryFrom<Vec<Complex64>> for CyclicFunction {
    type Error = Error;

    fn try_from(values: Vec<Complex64>) -> Result<Self> {
        CyclicFunction::new(values)
    }
}

impl From<CyclicFunction> for Vec<Complex64> {
    fn from(f: CyclicFunction) -> Self {
        f.values
    }
}

impl CyclicFunction {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        Self::with_cap(values, DEFAULT_MAX_N)
    }

    pub fn with_cap(values: Vec<Complex64>, cap: usize) -> Result<Self> {
        let n = values.len();
        if n < 2 {
            return Err(Error::InvalidArgument(format!("modulus {n} < 2")));
        }
        if n > cap {
            return Err(Error::ModulusCap { n, cap });
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite function value".into()));
        }
        Ok(CyclicFunction { values })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn constant(n: usize, c: Complex64) -> Result<Self> {
        Self::new(vec![c; n])
    }

    /// `x -> e(kx/N)`.
    pub fn character(n: usize, k: i64) -> Result<Self> {
        let m = n as i64;
        Self::new((0..m).map(|x| crate::observables::e((k * x).rem_euclid(m) as f64 / n as f64)).collect())
    }

    /// The indicator of `set`, whose members are taken mod `n`.
    pub fn indicator(n: usize, set: &[usize]) -> Result<Self> {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        for &x in set {
            v[x % n] = Complex64::new(1.0, 0.0);
        }
        Self::new(v)
    }

    pub fn modulus(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    #[inline]
    fn at(&self, x: usize) -> Complex64 {
        self.values[x % self.values.len()]
    }

    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.modulus() as f64
    }

    /// `f o p` on `Z/N` for the reduction `p: Z/N -> Z/M`.
    pub fn lift(&self, n: usize) -> Result<Self> {
        let m = self.modulus();
        if n % m != 0 {
            return Err(Error::NotAFactor { m, n });
        }
        Self::new((0..n).map(|x| self.values[x % m]).collect())
    }
}

fn conj_if(v: Complex64, odd: bool) -> Complex64 {
    if odd {
        v.conj()
    } else {
        v
    }
}

/// Calls `visit` on the vertex sums `n . e mod N` of every `n` in `(Z/N)^d`,
/// in row-major order of `n`.
fn for_each_cube<F: FnMut(&[usize])>(modulus: usize, d: usize, mut visit: F) {
    let mut n = vec![0usize; d];
    let mut sums = vec![0usize; 1 << d];
    loop {
        for (bits, s) in sums.iter_mut().enumerate() {
            *s = (0..d).filter(|i| bits >> i & 1 == 1).map(|i| n[i]).sum::<usize>() % modulus;
        }
        visit(&sums);
        let mut i = d;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            n[i] += 1;
            if n[i] < modulus {
                break;
            }
            n[i] = 0;
        }
    }
}

fn check_moduli(g: &CyclicFunction, fs: &[CyclicFunction]) -> Result<()> {
    for f in fs {
        if f.modulus() != g.modulus() {
            return Err(Error::SizeMismatch { left: g.modulus(), right: f.modulus() });
        }
    }
    Ok(())
}

/// `(1/N^{d+1}) sum_{x, n} g(x) prod_{e != 0} f_e(x + n.e)`, with `fs[i]`
/// attached to the vertex of rank `i + 1`.
pub fn cube_average(fs: &[CyclicFunction], d: usize, g: &CyclicFunction) -> Result<Complex64> {
    check_dim(d)?;
    if fs.len() != (1 << d) - 1 {
        return Err(Error::DimensionMismatch { expected: (1 << d) - 1, found: fs.len() });
    }
    check_moduli(g, fs)?;
    let n = g.modulus();
    let per_x: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut acc = Complex64::new(0.0, 0.0);
            for_each_cube(n, d, |sums| {
                let mut p = g.at(x);
                for (i, f) in fs.iter().enumerate() {
                    let bits = i + 1;
                    p *= conj_if(f.at(x + sums[bits]), bits.count_ones() % 2 == 1);
                }
                acc += p;
            });
            acc
        })
        .collect();
    Ok(per_x.into_iter().sum::<Complex64>() / (n as f64).powi(d as i32 + 1))
}

/// `|||f|||_d^{2^d}`, computed as `E_h |E_x prod_{e in {0,1}^{d-1}} C^{|e|} f(x + h.e)|^2`.
pub fn seminorm_power(f: &CyclicFunction, d: usize) -> Result<f64> {
    check_dim(d)?;
    let n = f.modulus();
    let count = n.pow(d as u32 - 1);
    let per_h: Vec<f64> = (0..count)
        .into_par_iter()
        .map(|code| {
            let mut h = vec![0usize; d - 1];
            let mut rest = code;
            for slot in h.iter_mut().rev() {
                *slot = rest % n;
                rest /= n;
            }
            let offsets: Vec<(usize, bool)> = (0..1usize << (d - 1))
                .map(|bits| {
                    let s = (0..d - 1).filter(|i| bits >> i & 1 == 1).map(|i| h[i]).sum::<usize>();
                    (s % n, bits.count_ones() % 2 == 1)
                })
                .collect();
            let mut inner = Complex64::new(0.0, 0.0);
            for x in 0..n {
                let mut p = Complex64::new(1.0, 0.0);
                for &(s, odd) in &offsets {
                    p *= conj_if(f.at(x + s), odd);
                }
                inner += p;
            }
            (inner / n as f64).norm_sqr()
        })
        .collect();
    Ok(per_h.into_iter().sum::<f64>() / count as f64)
}

/// `|||f|||_d`.
pub fn seminorm(f: &CyclicFunction, d: usize) -> Result<f64> {
    Ok(seminorm_power(f, d)?.powf(1.0 / (1u64 << d) as f64))
}

/// `D_d f(x) = (1/N^d) sum_n prod_{e != 0} C^{|e|+1} f(x + n.e)`.
pub fn dual_function(f: &CyclicFunction, d: usize) -> Result<CyclicFunction> {
    check_dim(d)?;
    let n = f.modulus();
    let scale = (n as f64).powi(d as i32);
    let values: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut acc = Complex64::new(0.0, 0.0);
            for_each_cube(n, d, |sums| {
                let mut p = Complex64::new(1.0, 0.0);
                for (bits, &s) in sums.iter().enumerate().skip(1) {
                    p *= conj_if(f.at(x + s), bits.count_ones() % 2 == 0);
                }
                acc += p;
            });
            acc / scale
        })
        .collect();
    CyclicFunction::with_cap(values, usize::MAX)
}

/// One line of a check report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub params: serde_json::Value,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub pass: bool,
}

fn params(f: &CyclicFunction, d: usize) -> serde_json::Value {
    json!({ "N": f.modulus(), "d": d, "real": f.is_real(), "conjugation": CONJUGATION })
}

/// `|E[conj(f) D_d f] - |||f|||_d^{2^d}|`. The seminorm side goes through
/// [`seminorm_power`], the other through [`dual_function`].
pub fn check_duality(f: &CyclicFunction, d: usize) -> Result<CheckReport> {
    let dual = dual_function(f, d)?;
    let pairing =
        f.values().iter().zip(dual.values()).map(|(a, b)| a.conj() * b).sum::<Complex64>() / f.modulus() as f64;
    let power = seminorm_power(f, d)?;
    let residual = (pairing - power).norm();
    Ok(CheckReport {
        check: "duality".into(),
        params: params(f, d),
        lhs: pairing.re,
        rhs: power,
        residual,
        pass: residual < CHECK_TOL,
    })
}

/// `max |D_d f| <= E |f|^{2^d - 1}`.
pub fn check_dual_bound(f: &CyclicFunction, d: usize) -> Result<CheckReport> {
    let dual = dual_function(f, d)?;
    let lhs = dual.values().iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let k = ((1u64 << d) - 1) as i32;
    let rhs = f.values().iter().map(|v| v.norm().powi(k)).sum::<f64>() / f.modulus() as f64;
    Ok(CheckReport {
        check: "dual_bound".into(),
        params: params(f, d),
        lhs,
        rhs,
        residual: (lhs - rhs).max(0.0),
        pass: lhs <= rhs + CHECK_TOL,
    })
}

/// `|E f| <= |||f|||_d`.
pub fn check_mean_bound(f: &CyclicFunction, d: usize) -> Result<CheckReport> {
    let lhs = f.mean().norm();
    let rhs = seminorm(f, d)?;
    Ok(CheckReport {
        check: "mean_bound".into(),
        params: params(f, d),
        lhs,
        rhs,
        residual: (lhs - rhs).max(0.0),
        pass: lhs <= rhs + CHECK_TOL,
    })
}

/// `|||f o p|||_d` on `Z/N` against `|||f|||_d` on `Z/M`.
pub fn check_factor_invariance(f: &CyclicFunction, d: usize, n: usize) -> Result<CheckReport> {
    let lifted = f.lift(n)?;
    let lhs = seminorm(&lifted, d)?;
    let rhs = seminorm(f, d)?;
    let residual = (lhs - rhs).abs();
    let mut p = params(f, d);
    p["M"] = json!(f.modulus());
    p["N"] = json!(n);
    Ok(CheckReport { check: "factor_invariance".into(), params: p, lhs, rhs, residual, pass: residual < CHECK_TOL })
}

/// `(1/n^d) sum_{m in [0,n)^d} prod_{e != 0} C^{|e|+1} a_{m.e}`, the
/// truncated dual average along an orbit with values `a_t = F(T^t x)`.
pub fn orbit_dual_average(a: &ComplexSequence, d: usize, n: usize) -> Result<Complex64> {
    check_dim(d)?;
    if n == 0 {
        return Err(Error::InvalidArgument("empty average".into()));
    }
    let top = (d * (n - 1)) as i64;
    a.check_window(0, top)?;
    let side = n as i64;
    let mut total = Complex64::new(0.0, 0.0);
    let count = n.pow(d as u32);
    let per_first: Vec<Complex64> = (0..side)
        .into_par_iter()
        .map(|m0| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut m = vec![0i64; d];
            m[0] = m0;
            for code in 0..count / n {
                let mut rest = code;
                for slot in m[1..].iter_mut().rev() {
                    *slot = (rest % n) as i64;
                    rest /= n;
                }
                let sums = SideVector::new(m.clone()).vertex_sums();
                let mut p = Complex64::new(1.0, 0.0);
                for (bits, &s) in sums.iter().enumerate().skip(1) {
                    p *= conj_if(a.at(s), bits.count_ones() % 2 == 0);
                }
                acc += p;
            }
            acc
        })
        .collect();
    for v in per_first {
        total += v;
    }
    Ok(total / count as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorStep {
    pub n: usize,
    pub re: f64,
    pub im: f64,
    /// Distance to the previous estimate.
    pub increment: Option<f64>,
}

/// [`orbit_dual_average`] at `n0, 2 n0, 4 n0, ..` with the Cauchy increments.
pub fn orbit_dual_monitor(a: &ComplexSequence, d: usize, n0: usize, doublings: usize) -> Result<Vec<MonitorStep>> {
    let mut out: Vec<MonitorStep> = Vec::new();
    let mut prev: Option<Complex64> = None;
    for i in 0..=doublings {
        let n = n0 << i;
        let v = orbit_dual_average(a, d, n)?;
        out.push(MonitorStep { n, re: v.re, im: v.im, increment: prev.map(|p| (v - p).norm()) });
        prev = Some(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_real(n: usize, seed: u64) -> CyclicFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CyclicFunction::from_real(&(0..n).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>()).unwrap()
    }

    fn random_complex(n: usize, seed: u64) -> CyclicFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CyclicFunction::new((0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()).unwrap()
    }

    // Plain triple loop for d = 2.
    fn naive_seminorm2(f: &CyclicFunction) -> f64 {
        let n = f.modulus();
        let v = f.values();
        let mut s = c(0.0, 0.0);
        for x in 0..n {
            for a in 0..n {
                for b in 0..n {
                    s += v[x] * v[(x + a) % n].conj() * v[(x + b) % n].conj() * v[(x + a + b) % n];
                }
            }
        }
        (s / (n * n * n) as f64).re
    }

    #[test]
    fn constants() {
        let one = CyclicFunction::constant(16, c(1.0, 0.0)).unwrap();
        let fs = vec![one.clone(); 3];
        assert!((cube_average(&fs, 2, &one).unwrap() - 1.0).norm() < 1e-15);
        let f = CyclicFunction::constant(10, c(0.7, 0.0)).unwrap();
        for d in 1..=3 {
            assert!((seminorm(&f, d).unwrap() - 0.7).abs() < 1e-14);
            let k = (1 << d) - 1;
            for v in dual_function(&f, d).unwrap().values() {
                assert!((v - c(0.7f64.powi(k), 0.0)).norm() < 1e-14);
            }
        }
        assert!(check_duality(&one, 3).unwrap().residual < 1e-15);
    }

    #[test]
    fn mean_zero_weight_kills_average() {
        let n = 12;
        let one = CyclicFunction::constant(n, c(1.0, 0.0)).unwrap();
        let mut g = vec![c(-1.0 / n as f64, 0.0); n];
        g[3] += 1.0;
        let g = CyclicFunction::new(g).unwrap();
        assert!(cube_average(&vec![one; 3], 2, &g).unwrap().norm() < 1e-15);
    }

    #[test]
    fn characters_have_unit_seminorm() {
        for k in [1, 5, 12] {
            let f = CyclicFunction::character(32, k).unwrap();
            for d in 2..=3 {
                assert!((seminorm(&f, d).unwrap() - 1.0).abs() < 1e-12);
            }
            assert!((naive_seminorm2(&f) - 1.0).abs() < 1e-12);
            assert!(seminorm(&f, 1).unwrap() < 1e-12);
        }
    }

    #[test]
    fn seminorm_matches_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f =
            CyclicFunction::from_real(&(0..64).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect::<Vec<_>>())
                .unwrap();
        assert!((seminorm_power(&f, 2).unwrap() - naive_seminorm2(&f)).abs() < 1e-12);
        let g = random_complex(24, 4);
        assert!((seminorm_power(&g, 2).unwrap() - naive_seminorm2(&g)).abs() < 1e-12);
    }

    #[test]
    fn cube_average_with_equal_entries_is_the_seminorm() {
        let f = random_complex(20, 9);
        for d in 1..=3 {
            let fs = vec![f.clone(); (1 << d) - 1];
            let v = cube_average(&fs, d, &f).unwrap();
            assert!(v.im.abs() < 1e-12);
            assert!((v.re - seminorm_power(&f, d).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_checks_on_random_inputs() {
        for seed in 0..5 {
            let f = random_real(48, seed);
            assert!(check_duality(&f, 2).unwrap().pass);
            assert!(check_mean_bound(&f, 3).unwrap().pass);
            let g = random_complex(48, seed);
            let r = check_duality(&g, 2).unwrap();
            assert!(r.pass, "{r:?}");
            assert!(check_dual_bound(&g, 2).unwrap().pass);
        }
        assert!(check_duality(&random_complex(16, 1), 3).unwrap().pass);
    }

    #[test]
    fn indicator_duals() {
        let set = [0, 3, 4, 9, 17];
        let f = CyclicFunction::indicator(20, &set).unwrap();
        let dual = dual_function(&f, 2).unwrap();
        for &x in &set {
            assert!(dual.values()[x].re >= 1.0 / 400.0 - 1e-15);
        }
        let r = check_dual_bound(&f, 2).unwrap();
        assert!((r.rhs - 0.25).abs() < 1e-15 && r.lhs <= 0.25 + 1e-12);
    }

    #[test]
    fn dual_is_monotone_on_nonnegative_functions() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let f: Vec<f64> = (0..16).map(|_| rng.gen_range(0.0..1.0)).collect();
            let g: Vec<f64> = f.iter().map(|v| v + rng.gen_range(0.0..0.5)).collect();
            let df = dual_function(&CyclicFunction::from_real(&f).unwrap(), 2).unwrap();
            let dg = dual_function(&CyclicFunction::from_real(&g).unwrap(), 2).unwrap();
            for (a, b) in df.values().iter().zip(dg.values()) {
                assert!(a.re >= 0.0 && a.re <= b.re + 1e-15);
            }
        }
    }

    #[test]
    fn factor_invariance() {
        let f = random_real(12, 3);
        assert!(check_factor_invariance(&f, 2, 60).unwrap().residual < 1e-10);
        assert_eq!(check_factor_invariance(&f, 2, 12).unwrap().residual, 0.0);
        assert!(matches!(check_factor_invariance(&f, 2, 50), Err(Error::NotAFactor { .. })));
    }

    #[test]
    fn caps_and_shapes() {
        assert!(matches!(CyclicFunction::new(vec![c(0.0, 0.0); 600]), Err(Error::ModulusCap { .. })));
        assert!(CyclicFunction::with_cap(vec![c(0.0, 0.0); 600], 1000).is_ok());
        assert!(CyclicFunction::new(vec![c(0.0, 0.0)]).is_err());
        let f = random_real(8, 0);
        assert!(cube_average(&[f.clone(), f.clone()], 2, &f).is_err());
        assert!(cube_average(&[f.clone(), random_real(9, 0), f.clone()], 2, &f).is_err());
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(serde_json::from_str::<CyclicFunction>(&json).unwrap(), f);
    }

    #[test]
    fn orbit_monitor_on_a_rotation() {
        use crate::sequences::{generate, GeneratorSpec};
        // For a character of a rotation the product telescopes to |a|^{2^d - 1} = 1
        // times a phase that is constant along the orbit.
        let a = generate(&GeneratorSpec::PolynomialPhase { coeffs: vec![0.0, 0.3819660112501051] }, 0, 400).unwrap();
        let steps = orbit_dual_monitor(&a, 2, 25, 2).unwrap();
        assert_eq!(steps.len(), 3);
        for s in &steps {
            assert!((c(s.re, s.im) - 1.0).norm() < 1e-9);
        }
        assert!(steps[2].increment.unwrap() < 1e-9);
        assert!(orbit_dual_average(&a, 2, 300).is_err());
    }
}
