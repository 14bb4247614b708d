//! The JSON run configuration and its resolution into library objects.

use std::path::PathBuf;

use nilcube::cube_struct::XPrime;
use nilcube::nilgroup::{NilSystem, ReducedPoint};
use nilcube::observables::{Bump, Observable};
use nilcube::sequences::{GeneratorSpec, WindowMetric};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub size: usize,
    /// Strictly upper triangular entries of `tau`, row by row.
    pub tau: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpKind {
    Triangle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservableConfig {
    Character { k: Vec<i64> },
    Theta { bump: BumpKind, radius: f64 },
    Coord { index: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorConfig {
    PolynomialPhase {
        coeffs: Vec<f64>,
    },
    TrigPoly {
        terms: Vec<(f64, f64)>,
    },
    /// Uses `system`, `start` and `observable`.
    NilOrbit,
    /// Uses `seed`.
    RandomUnitModulus,
}

/// Everything a run can be told. Flags override the `--spec` file; the
/// resolved value is echoed in every report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subcommand: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observable: Option<ObservableConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range: Option<(i64, i64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<(i64, f64)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_range: Option<(i64, i64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric: Option<WindowMetric>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_cap: Option<usize>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<XPrime>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side: Option<Vec<i64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub given: Option<Vec<Vec<f64>>>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub seq: Option<PathBuf>,
    #[serde(rename = "fn", skip_serializing_if = "Option::is_none")]
    pub function: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_n: Option<usize>,
}

fn missing(key: &str) -> CliError {
    CliError::Config(format!("missing `{key}` (flag or spec key)"))
}

fn bad<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Config(e.to_string())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("spec: {e}")))
    }

    pub fn require<T: Clone>(v: &Option<T>, key: &str) -> Result<T, CliError> {
        v.clone().ok_or_else(|| missing(key))
    }

    pub fn system(&self) -> Result<NilSystem, CliError> {
        let s = Self::require(&self.system, "system")?;
        NilSystem::from_entries(s.size, s.tau).map_err(bad)
    }

    /// A point of the configured system given by its coordinates, reduced
    /// to the fundamental domain.
    pub fn point(&self, sys: &NilSystem, coords: &[f64]) -> Result<ReducedPoint, CliError> {
        ReducedPoint::from_coords(sys.size(), coords.to_vec()).map_err(bad)
    }

    pub fn observable(&self) -> Result<Observable, CliError> {
        Ok(match Self::require(&self.observable, "observable")? {
            ObservableConfig::Character { k } => Observable::character(k),
            ObservableConfig::Theta { bump: BumpKind::Triangle, radius } => {
                Observable::theta(Bump::triangle(radius).map_err(bad)?)
            }
            ObservableConfig::Coord { index } => Observable::RawCoordinate { index },
        })
    }

    /// Fills the generator default (`nil_orbit` when a system is given)
    /// and the start point.
    pub fn resolve_generator(&mut self) -> Result<(), CliError> {
        if self.generator.is_none() {
            self.generator = if self.system.is_some() { Some(GeneratorConfig::NilOrbit) } else { None };
        }
        match self.generator {
            Some(GeneratorConfig::NilOrbit) => {
                if self.start.is_none() {
                    let sys = self.system()?;
                    self.start = Some(ReducedPoint::origin(sys.size()).coords().to_vec());
                }
            }
            Some(GeneratorConfig::RandomUnitModulus) => {
                self.seed.get_or_insert(0);
            }
            Some(_) => {}
            None => return Err(missing("generator")),
        }
        Ok(())
    }

    pub fn generator_spec(&self) -> Result<GeneratorSpec, CliError> {
        Ok(match Self::require(&self.generator, "generator")? {
            GeneratorConfig::PolynomialPhase { coeffs } => GeneratorSpec::PolynomialPhase { coeffs },
            GeneratorConfig::TrigPoly { terms } => GeneratorSpec::TrigPoly { terms },
            GeneratorConfig::RandomUnitModulus => GeneratorSpec::RandomUnitModulus { seed: self.seed.unwrap_or(0) },
            GeneratorConfig::NilOrbit => {
                let system = self.system()?;
                let start = self.point(&system, &Self::require(&self.start, "start")?)?;
                let observable = self.observable()?;
                observable.check_size(system.size()).map_err(bad)?;
                GeneratorSpec::NilOrbit { system, start, observable }
            }
        })
    }
}

/// Parses `a:b`.
pub fn parse_range(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected a:b, got `{s}`"))?;
    let a: i64 = a.trim().parse().map_err(|e| format!("`{a}`: {e}"))?;
    let b: i64 = b.trim().parse().map_err(|e| format!("`{b}`: {e}"))?;
    if a > b {
        return Err(format!("empty range {a}:{b}"));
    }
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::parse(r#"{"d": 2, "bogus": 1}"#).is_err());
        assert!(RunConfig::parse(r#"{"system": {"size": 2, "tau": [0.1], "extra": 0}}"#).is_err());
        assert!(RunConfig::parse(r#"{"observable": {"type": "character", "k": [1], "z": 0}}"#).is_err());
        let c = RunConfig::parse(r#"{"observable": {"type": "theta", "bump": "triangle", "radius": 0.6}}"#).unwrap();
        assert!(c.observable().is_ok());
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("-1000:1000"), Ok((-1000, 1000)));
        assert!(parse_range("3:1").is_err());
        assert!(parse_range("3").is_err());
    }
}
