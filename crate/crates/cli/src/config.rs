//! Experiment configuration.
//!
//! A config is a TOML document: top-level `key = value` pairs plus
//! `[[system]]`, `[[observable]]`, `[finite]`, `[random]` and `[assert]`
//! sections. Unknown keys are rejected.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use cubelab::dynsys::{CirclePoint, InitialDatum, Observable, SystemSpec};
use cubelab::Rational;
use serde::Deserialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
}

pub(crate) fn field_err(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Lemma1,
    Converge2,
    Converge3,
    Twisted,
    Cor1,
    Khintchine,
    Syndetic,
    Supdecay,
    Eq4decay,
}

impl Kind {
    pub const ALL: [Kind; 9] = [
        Kind::Lemma1,
        Kind::Converge2,
        Kind::Converge3,
        Kind::Twisted,
        Kind::Cor1,
        Kind::Khintchine,
        Kind::Syndetic,
        Kind::Supdecay,
        Kind::Eq4decay,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Lemma1 => "lemma1",
            Kind::Converge2 => "converge2",
            Kind::Converge3 => "converge3",
            Kind::Twisted => "twisted",
            Kind::Cor1 => "cor1",
            Kind::Khintchine => "khintchine",
            Kind::Syndetic => "syndetic",
            Kind::Supdecay => "supdecay",
            Kind::Eq4decay => "eq4decay",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

/// A rational written as a TOML integer or as a string `"p/q"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RationalText {
    Int(i64),
    Text(String),
}

impl RationalText {
    pub fn parse(&self, field: &str) -> Result<Rational, ConfigError> {
        match self {
            RationalText::Int(v) => Ok(Rational::from(*v as i128)),
            RationalText::Text(s) => Rational::from_str(s.trim())
                .map_err(|_| field_err(field, format!("`{s}` is not a rational p/q"))),
        }
    }
}

/// A circle point written as a float, or exactly as a string `"p/q"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CircleText {
    Float(f64),
    Text(String),
}

impl CircleText {
    pub fn parse(&self, field: &str) -> Result<CirclePoint, ConfigError> {
        match self {
            CircleText::Float(x) if x.is_finite() => Ok(CirclePoint::from_f64(*x)),
            CircleText::Float(x) => Err(field_err(field, format!("{x} is not finite"))),
            CircleText::Text(s) => {
                let q = Rational::from_str(s.trim())
                    .map_err(|_| field_err(field, format!("`{s}` is not a rational p/q")))?;
                // floor(2^64 * frac(q)), exact
                let den = *q.denom();
                let num = q.numer().rem_euclid(den);
                let raw = ((num as u128) << 64) / den as u128;
                Ok(CirclePoint(raw as u64))
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(rename = "type")]
    pub kind: String,
    pub probs: Option<Vec<RationalText>>,
    pub matrix: Option<Vec<Vec<RationalText>>>,
    pub initial: Option<Vec<RationalText>>,
    /// Stream index for shifts; mixed with the run seed.
    #[serde(default)]
    pub seed: u64,
    pub alpha: Option<CircleText>,
    pub start: Option<CircleText>,
    pub perm: Option<Vec<usize>>,
    pub point: Option<usize>,
}

impl SystemConfig {
    /// System spec for one run; shift seeds are derived from `run_seed`.
    pub fn build(
        &self,
        index: usize,
        run_seed: u64,
    ) -> Result<(SystemSpec, InitialDatum), ConfigError> {
        let f = |name: &str| format!("system[{index}].{name}");
        let need = |name: &str| field_err(f(name), format!("required for type `{}`", self.kind));
        let rationals = |v: &[RationalText], name: &str| {
            v.iter()
                .map(|r| r.parse(&f(name)))
                .collect::<Result<Vec<_>, _>>()
        };
        let seed = crate::seeds::derive_seed(run_seed, self.seed);
        let (spec, start) = match self.kind.as_str() {
            "rotation" => (
                SystemSpec::Rotation {
                    alpha: self.alpha.as_ref().ok_or_else(|| need("alpha"))?.parse(&f("alpha"))?,
                },
                InitialDatum::Circle(match &self.start {
                    Some(s) => s.parse(&f("start"))?,
                    None => CirclePoint::ZERO,
                }),
            ),
            "bernoulli" => (
                SystemSpec::BernoulliShift {
                    probs: rationals(self.probs.as_deref().ok_or_else(|| need("probs"))?, "probs")?,
                    seed,
                },
                InitialDatum::Stream,
            ),
            "markov" => {
                let matrix = self
                    .matrix
                    .as_ref()
                    .ok_or_else(|| need("matrix"))?
                    .iter()
                    .map(|row| rationals(row, "matrix"))
                    .collect::<Result<Vec<_>, _>>()?;
                (
                    SystemSpec::MarkovShift {
                        matrix,
                        initial: rationals(self.initial.as_deref().ok_or_else(|| need("initial"))?, "initial")?,
                        seed,
                    },
                    InitialDatum::Stream,
                )
            }
            "permutation" => (
                SystemSpec::FinitePermutation {
                    perm: self.perm.clone().ok_or_else(|| need("perm"))?,
                },
                InitialDatum::Point(self.point.unwrap_or(0)),
            ),
            other => {
                return Err(field_err(
                    f("type"),
                    format!("unknown system type `{other}` (expected rotation, bernoulli, markov, permutation)"),
                ))
            }
        };
        spec.validate()
            .map_err(|e| field_err(format!("system[{index}]"), e.to_string()))?;
        Ok((spec, start))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableConfig {
    #[serde(rename = "type")]
    pub kind: String,
    /// Index into the `[[system]]` list.
    #[serde(default)]
    pub system: usize,
    pub k: Option<i64>,
    pub set: Option<Vec<usize>>,
    pub word: Option<Vec<usize>>,
    pub value: Option<RationalText>,
    pub table: Option<Vec<RationalText>>,
}

impl ObservableConfig {
    pub fn build(&self, index: usize) -> Result<Observable, ConfigError> {
        let f = |name: &str| format!("observable[{index}].{name}");
        let need = |name: &str| field_err(f(name), format!("required for type `{}`", self.kind));
        Ok(match self.kind.as_str() {
            "character" => Observable::Character(self.k.ok_or_else(|| need("k"))?),
            "symbol" => Observable::SymbolIndicator(self.set.clone().ok_or_else(|| need("set"))?),
            "cylinder" => Observable::CylinderIndicator(self.word.clone().ok_or_else(|| need("word"))?),
            "constant" => Observable::Constant(self.value.as_ref().ok_or_else(|| need("value"))?.parse(&f("value"))?),
            "meanzero" => Observable::MeanZeroSymbol(
                self.table
                    .as_ref()
                    .ok_or_else(|| need("table"))?
                    .iter()
                    .map(|r| r.parse(&f("table")))
                    .collect::<Result<_, _>>()?,
            ),
            other => {
                return Err(field_err(
                    f("type"),
                    format!("unknown observable type `{other}` (expected character, symbol, cylinder, constant, meanzero)"),
                ))
            }
        })
    }
}

/// An explicit finite permutation system for `cor1` / `khintchine`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteConfig {
    pub pi1: Vec<usize>,
    pub pi2: Vec<usize>,
    pub set: Vec<usize>,
}

/// Randomly drawn inputs.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomConfig {
    /// Number of random instances per run seed.
    pub count: usize,
    /// Largest ground set for random finite systems.
    pub max_points: Option<usize>,
    /// `"cycle"` forces `pi1` to be a single cycle.
    pub first: Option<String>,
    /// Largest polynomial degree for `supdecay` certification.
    pub max_degree: Option<usize>,
    /// Dense-grid size for `supdecay` certification.
    pub dense_points: Option<usize>,
}

/// Assertion thresholds. Which ones apply depends on the experiment kind.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssertConfig {
    /// Largest allowed relative error of the FFT path against the naive path.
    pub max_rel_err: Option<f64>,
    /// `|M_N - limit|` at the largest `N` must not exceed this.
    pub final_abs_err: Option<f64>,
    /// `|M_N|` at the largest `N` must not exceed this.
    pub final_abs: Option<f64>,
    /// How many run seeds must satisfy the per-seed final check.
    pub min_seeds_passing: Option<usize>,
    /// Every seed needs at least this many non-increasing steps of `|M_N - limit|`.
    pub min_nonincreasing_steps: Option<usize>,
    /// Every Cauchy gap must be at most this.
    pub max_cauchy_gap: Option<f64>,
    /// Upper bound on the per-axis max gap of return-set scans.
    pub max_gap: Option<usize>,
    /// Upper bound on `mean hi(N_last) / mean hi(N_first)`.
    pub max_ratio: Option<f64>,
    /// Require strictly decreasing estimates along the grid.
    pub strictly_decreasing: Option<bool>,
    /// Require every random finite system to have nested partitions.
    pub require_nested: Option<bool>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    #[serde(default)]
    pub grid: Vec<usize>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    pub trials: Option<usize>,
    pub lambda: Option<f64>,
    pub window: Option<usize>,
    pub oversample: Option<usize>,
    pub phases: Option<Vec<f64>>,
    /// `"fft"` (default) or `"naive"` for cube averages; `"decay"` or `"certify"` for supdecay.
    pub mode: Option<String>,
    /// For `syndetic`: redraw streams until the start point lies in A.
    pub condition_start: Option<bool>,
    /// For `cor1`: also evaluate at N = lcm of all cycle lengths.
    pub include_period: Option<bool>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    #[serde(default)]
    pub system: Vec<SystemConfig>,
    #[serde(default)]
    pub observable: Vec<ObservableConfig>,
    pub finite: Option<FiniteConfig>,
    pub random: Option<RandomConfig>,
    #[serde(default, rename = "assert")]
    pub checks: AssertConfig,
}

/// A parsed config together with its canonical text and hash.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub canonical: String,
    pub hash: String,
}

fn describe_toml_error(source: &str, err: toml::de::Error) -> ConfigError {
    let location = err
        .span()
        .map(|span| {
            let line = source[..span.start.min(source.len())].matches('\n').count() + 1;
            format!("line {line}: ")
        })
        .unwrap_or_default();
    ConfigError::Parse(format!("{location}{}", err.message().trim()))
}

/// Parse a config from text.
pub fn parse_config(source: &str) -> Result<LoadedConfig, ConfigError> {
    let table: toml::Table = toml::from_str(source).map_err(|e| describe_toml_error(source, e))?;
    let config: ExperimentConfig =
        toml::from_str(source).map_err(|e| describe_toml_error(source, e))?;
    // toml::Table is ordered by key, so serializing it sorts every level
    let canonical = toml::to_string(&table).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let hash = hex::encode(Sha256::digest(canonical.as_bytes()));
    let loaded = LoadedConfig {
        config,
        canonical,
        hash,
    };
    crate::validate::validate(&loaded.config)?;
    Ok(loaded)
}

pub fn load_config(path: &Path) -> Result<LoadedConfig, ConfigError> {
    let source = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&source)
}
