//! Finite complex sequences, their generators, and window comparison.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nilgroup::{NilSystem, ReducedPoint};
use crate::observables::{e_mod1, eval, Observable};
use crate::system::DynamicalSystem;

/// Largest window `generate` will materialise.
pub const MAX_WINDOW_LEN: u64 = 50_000_000;

/// Highest degree accepted for polynomial phases.
pub const MAX_PHASE_DEGREE: usize = 8;

/// The values `a_offset, a_{offset+1}, ..` of a sequence over a finite window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexSequence {
    offset: i64,
    values: Vec<Complex64>,
    /// Set when the values come from a discontinuous observable.
    #[serde(default)]
    discontinuous_source: bool,
}

impl ComplexSequence {
    pub fn new(offset: i64, values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("empty sequence".into()));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite sequence value".into()));
        }
        Ok(ComplexSequence { offset, values, discontinuous_source: false })
    }

    pub fn with_discontinuous_source(mut self, flag: bool) -> Self {
        self.discontinuous_source = flag;
        self
    }

    pub fn discontinuous_source(&self) -> bool {
        self.discontinuous_source
    }

    pub fn first(&self) -> i64 {
        self.offset
    }

    pub fn last(&self) -> i64 {
        self.offset + self.values.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, n: i64) -> Option<Complex64> {
        if n < self.first() || n > self.last() {
            None
        } else {
            Some(self.values[(n - self.offset) as usize])
        }
    }

    /// `a_n` for an index the caller has already range-checked.
    #[inline]
    pub(crate) fn at(&self, n: i64) -> Complex64 {
        self.values[(n - self.offset) as usize]
    }

    pub fn sup_modulus(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub(crate) fn check_window(&self, lo: i64, hi: i64) -> Result<()> {
        if lo < self.first() || hi > self.last() {
            return Err(Error::WindowOutOfRange { lo, hi, first: self.first(), last: self.last() });
        }
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.values.iter().enumerate().map(move |(i, v)| (self.offset + i as i64, *v))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GeneratorSpec {
    /// `a_n = e(sum_j c_j n^j)`.
    PolynomialPhase { coeffs: Vec<f64> },
    /// `a_n = sum_j A_j e(n theta_j)`, terms given as `(A_j, theta_j)`.
    TrigPoly { terms: Vec<(f64, f64)> },
    /// `a_n = f(tau^n x)`.
    NilOrbit { system: NilSystem, start: ReducedPoint, observable: Observable },
    /// Independent uniform phases, a deterministic function of `(seed, n)`.
    RandomUnitModulus { seed: u64 },
}

impl GeneratorSpec {
    fn validate(&self) -> Result<()> {
        match self {
            GeneratorSpec::PolynomialPhase { coeffs } => {
                if coeffs.is_empty() || coeffs.len() > MAX_PHASE_DEGREE + 1 {
                    return Err(Error::InvalidArgument(format!(
                        "polynomial phase needs 1..={} coefficients",
                        MAX_PHASE_DEGREE + 1
                    )));
                }
                if coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidArgument("non-finite phase coefficient".into()));
                }
            }
            GeneratorSpec::TrigPoly { terms } => {
                if terms.is_empty() || terms.iter().any(|(a, t)| !a.is_finite() || !t.is_finite()) {
                    return Err(Error::InvalidArgument("bad trigonometric polynomial".into()));
                }
            }
            GeneratorSpec::NilOrbit { system, start, observable } => {
                if start.size() != system.size() {
                    return Err(Error::SizeMismatch { left: system.size(), right: start.size() });
                }
                observable.check_size(system.size())?;
            }
            GeneratorSpec::RandomUnitModulus { .. } => {}
        }
        Ok(())
    }
}

/// `c m` modulo 1, with the rounding error of the product recovered by a
/// fused multiply-add so large `m` do not wash out the fractional part.
fn frac_product(c: f64, m: f64) -> f64 {
    let p = c * m;
    let err = c.mul_add(m, -p);
    (p - p.floor()) + err
}

fn int_power(n: i64, j: usize) -> f64 {
    let mut acc: i128 = 1;
    for _ in 0..j {
        match acc.checked_mul(n as i128) {
            Some(v) => acc = v,
            None => return (n as f64).powi(j as i32),
        }
    }
    acc as f64
}

fn random_phase(seed: u64, n: i64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slot = (n as i128 - i64::MIN as i128) as u128;
    rng.set_word_pos(slot * 2);
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Materialises `a_n` for `from <= n <= to`.
pub fn generate(spec: &GeneratorSpec, from: i64, to: i64) -> Result<ComplexSequence> {
    if from > to {
        return Err(Error::InvalidArgument(format!("empty range {from}..={to}")));
    }
    let len = (to as i128 - from as i128 + 1) as u64;
    if len > MAX_WINDOW_LEN {
        return Err(Error::WindowTooLarge { len, budget: MAX_WINDOW_LEN });
    }
    spec.validate()?;
    let values = (from..=to).map(|n| value_at(spec, n)).collect::<Result<Vec<_>>>()?;
    let discontinuous = matches!(
        spec,
        GeneratorSpec::NilOrbit { observable, .. } if !observable.is_continuous()
    );
    Ok(ComplexSequence::new(from, values)?.with_discontinuous_source(discontinuous))
}

fn value_at(spec: &GeneratorSpec, n: i64) -> Result<Complex64> {
    Ok(match spec {
        GeneratorSpec::PolynomialPhase { coeffs } => {
            let phase: f64 = coeffs.iter().enumerate().map(|(j, &c)| frac_product(c, int_power(n, j))).sum();
            e_mod1(phase)
        }
        GeneratorSpec::TrigPoly { terms } => {
            terms.iter().map(|&(amp, theta)| amp * e_mod1(frac_product(theta, n as f64))).sum()
        }
        GeneratorSpec::NilOrbit { system, start, observable } => eval(observable, &system.orbit_element(start, n)?)?,
        GeneratorSpec::RandomUnitModulus { seed } => e_mod1(random_phase(*seed, n)),
    })
}

/// How two windows are compared in `=_delta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowMetric {
    /// Largest entrywise modulus difference.
    #[default]
    Sup,
    /// Mean entrywise modulus difference.
    MeanAbs,
}

fn check_window_args(l: i64, delta: f64) -> Result<()> {
    if l < 1 {
        return Err(Error::InvalidArgument(format!("window half-width {l} < 1")));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {delta} must be positive")));
    }
    Ok(())
}

/// `a_[k-L, k+L] =_delta a_[j-L, j+L]` under the sup metric.
pub fn window_close(a: &ComplexSequence, k: i64, j: i64, l: i64, delta: f64) -> Result<bool> {
    window_close_with(WindowMetric::Sup, a, k, j, l, delta)
}

pub fn window_close_with(
    metric: WindowMetric,
    a: &ComplexSequence,
    k: i64,
    j: i64,
    l: i64,
    delta: f64,
) -> Result<bool> {
    check_window_args(l, delta)?;
    a.check_window(k - l, k + l)?;
    a.check_window(j - l, j + l)?;
    let diffs = (-l..=l).map(|i| (a.at(k + i) - a.at(j + i)).norm());
    Ok(match metric {
        WindowMetric::Sup => diffs.into_iter().all(|t| t <= delta),
        WindowMetric::MeanAbs => diffs.sum::<f64>() / (2 * l + 1) as f64 <= delta,
    })
}

/// Extremes of `d(T^n x, T^n y)` over `|n| <= N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProximalityProfile {
    pub min: f64,
    pub argmin: i64,
    pub max: f64,
    pub argmax: i64,
    pub horizon: i64,
}

/// Scans `n = 0, 1, -1, 2, -2, ..`; ties keep the first index in that order.
pub fn proximality_profile<S: DynamicalSystem>(
    sys: &S,
    x: &S::Point,
    y: &S::Point,
    horizon: i64,
) -> Result<ProximalityProfile> {
    if horizon < 1 {
        return Err(Error::InvalidArgument(format!("horizon {horizon} < 1")));
    }
    let mut prof = ProximalityProfile { min: f64::INFINITY, argmin: 0, max: -1.0, argmax: 0, horizon };
    let order = std::iter::once(0).chain((1..=horizon).flat_map(|n| [n, -n]));
    for n in order {
        let dist = sys.distance(&sys.iterate(x, n)?, &sys.iterate(y, n)?);
        if dist < prof.min {
            prof.min = dist;
            prof.argmin = n;
        }
        if dist > prof.max {
            prof.max = dist;
            prof.argmax = n;
        }
    }
    Ok(prof)
}

/// One line of a sequence file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SequenceRecord {
    pub n: i64,
    pub re: f64,
    pub im: f64,
}

/// Builds a sequence from records covering a contiguous index range, in any order.
pub fn from_records(mut records: Vec<SequenceRecord>) -> Result<ComplexSequence> {
    records.sort_by_key(|r| r.n);
    let first = records.first().ok_or_else(|| Error::Parse("no records".into()))?.n;
    for (i, r) in records.iter().enumerate() {
        if r.n != first + i as i64 {
            return Err(Error::Parse(format!("records are not contiguous at n = {}", r.n)));
        }
    }
    ComplexSequence::new(first, records.iter().map(|r| Complex64::new(r.re, r.im)).collect())
}

pub fn write_jsonl<W: Write>(a: &ComplexSequence, mut out: W) -> Result<()> {
    for (n, v) in a.iter() {
        let rec = SequenceRecord { n, re: v.re, im: v.im };
        let line = serde_json::to_string(&rec).map_err(|e| Error::Io(e.to_string()))?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn write_csv<W: Write>(a: &ComplexSequence, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (n, v) in a.iter() {
        w.serialize(SequenceRecord { n, re: v.re, im: v.im }).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads JSON Lines records `{"n", "re", "im"}`.
pub fn read_jsonl<R: BufRead>(input: R) -> Result<ComplexSequence> {
    let mut records = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SequenceRecord =
            serde_json::from_str(&line).map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        records.push(rec);
    }
    from_records(records)
}

/// Reads CSV rows `n,re,im`, with or without that header.
pub fn read_csv<R: BufRead>(input: R) -> Result<ComplexSequence> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(input);
    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| Error::Parse(e.to_string()))?;
        if i == 0 && row.get(0) == Some("n") {
            continue;
        }
        if row.len() != 3 {
            return Err(Error::Parse(format!("row {}: expected n,re,im", i + 1)));
        }
        let field = |k: usize| row.get(k).unwrap_or("");
        let parse_err = |e: &dyn std::fmt::Display| Error::Parse(format!("row {}: {e}", i + 1));
        records.push(SequenceRecord {
            n: field(0).parse().map_err(|e| parse_err(&e))?,
            re: field(1).parse().map_err(|e| parse_err(&e))?,
            im: field(2).parse().map_err(|e| parse_err(&e))?,
        });
    }
    from_records(records)
}

/// Reads either format, chosen by the first non-blank character.
pub fn read_sequence<R: BufRead>(mut input: R) -> Result<ComplexSequence> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    if text.trim_start().starts_with('{') {
        read_jsonl(text.as_bytes())
    } else {
        read_csv(text.as_bytes())
    }
}
