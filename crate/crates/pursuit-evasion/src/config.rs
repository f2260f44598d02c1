//! Run configuration: a strict JSON schema for a game instance plus solver
//! and simulation knobs.
//!
//! Matrices are row-major arrays of arrays. Prices accept either a number or
//! the string `"inf"` (a side that never observes). Unknown keys anywhere are
//! rejected so that typos fail loudly instead of silently using a default.

use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::GameSpec;

/// Top-level run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub game: GameSection,
    #[serde(default)]
    pub numerics: NumericsSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
}

/// The game instance: dynamics, weights, prices, horizon, start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSection {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "Bp")]
    pub bp: Vec<Vec<f64>>,
    #[serde(rename = "Be")]
    pub be: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<f64>>,
    #[serde(rename = "Q")]
    pub q: Vec<Vec<f64>>,
    #[serde(rename = "QT")]
    pub qt: Vec<Vec<f64>>,
    #[serde(rename = "Rp")]
    pub rp: Vec<Vec<f64>>,
    #[serde(rename = "Re")]
    pub re: Vec<Vec<f64>>,
    /// Pursuer price per snapshot; `"inf"` means the pursuer never observes.
    #[serde(rename = "Op", serialize_with = "ser_price", deserialize_with = "de_price")]
    pub op: f64,
    /// Evader price per snapshot; `"inf"` means the evader never observes.
    #[serde(rename = "Oe", serialize_with = "ser_price", deserialize_with = "de_price")]
    pub oe: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub x0: Vec<f64>,
}

/// Solver and simulator resolution knobs; every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSection {
    /// Backward value-recursion steps over the horizon.
    #[serde(default = "default_riccati_steps")]
    pub riccati_steps: usize,
    /// Uniform simulation steps per path.
    #[serde(default = "default_sim_steps")]
    pub sim_steps: usize,
    /// Outer bisection tolerance; when omitted it scales with the horizon as
    /// `1e-5·max(1, T)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    /// Base seed for simulation noise.
    #[serde(default = "default_seed")]
    pub seed: u64,
}

/// Experiment sizing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    /// Paths per Monte Carlo batch.
    #[serde(default = "default_paths")]
    pub monte_carlo_paths: usize,
}

fn default_riccati_steps() -> usize {
    4096
}
fn default_sim_steps() -> usize {
    6000
}
fn default_seed() -> u64 {
    42
}
fn default_paths() -> usize {
    1000
}

impl Default for NumericsSection {
    fn default() -> Self {
        NumericsSection {
            riccati_steps: default_riccati_steps(),
            sim_steps: default_sim_steps(),
            eps: None,
            seed: default_seed(),
        }
    }
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            monte_carlo_paths: default_paths(),
        }
    }
}

fn ser_price<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() && *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

fn de_price<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    struct PriceVisitor;
    impl Visitor<'_> for PriceVisitor {
        type Value = f64;
        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a nonnegative number or the string \"inf\"")
        }
        fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<f64, E> {
            Ok(v)
        }
        fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<f64, E> {
            Ok(v as f64)
        }
        fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<f64, E> {
            Ok(v as f64)
        }
        fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<f64, E> {
            if v == "inf" {
                Ok(f64::INFINITY)
            } else {
                Err(E::custom(format!(
                    "price must be a number or \"inf\", got \"{v}\""
                )))
            }
        }
    }
    d.deserialize_any(PriceVisitor)
}

impl RunConfig {
    /// Parses a configuration from JSON text. Malformed JSON maps to
    /// [`Error::Parse`] with the position; schema violations map to
    /// [`Error::Schema`] naming the offending field path.
    pub fn from_json_str(text: &str) -> Result<RunConfig> {
        let mut de = serde_json::Deserializer::from_str(text);
        match serde_path_to_error::deserialize::<_, RunConfig>(&mut de) {
            Ok(cfg) => Ok(cfg),
            Err(err) => {
                let path = err.path().to_string();
                let inner = err.into_inner();
                if inner.is_syntax() || inner.is_eof() {
                    Err(Error::Parse(format!(
                        "invalid JSON at line {} column {}: {inner}",
                        inner.line(),
                        inner.column()
                    )))
                } else {
                    Err(Error::Schema {
                        field: path,
                        message: inner.to_string(),
                    })
                }
            }
        }
    }

    /// Reads and parses a configuration file.
    pub fn from_path<P: AsRef<Path>>(path: P) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        RunConfig::from_json_str(&text)
    }

    /// Serializes back to pretty JSON (stable field order, prices round-trip
    /// through `"inf"`).
    pub fn to_json_string(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Parse(format!("serialization failed: {e}")))
    }

    /// Effective bisection tolerance: the explicit override, or
    /// `1e-5·max(1, T)`.
    pub fn effective_eps(&self) -> f64 {
        self.numerics
            .eps
            .unwrap_or_else(|| 1e-5 * self.game.horizon.max(1.0))
    }

    /// Builds and validates the dense game specification.
    pub fn to_spec(&self) -> Result<GameSpec> {
        let g = &self.game;
        GameSpec::new(
            matrix("game.A", &g.a)?,
            matrix("game.Bp", &g.bp)?,
            matrix("game.Be", &g.be)?,
            matrix("game.C", &g.c)?,
            matrix("game.Q", &g.q)?,
            matrix("game.QT", &g.qt)?,
            matrix("game.Rp", &g.rp)?,
            matrix("game.Re", &g.re)?,
            g.op,
            g.oe,
            g.horizon,
            DVector::from_column_slice(&g.x0),
        )
    }
}

/// Row-major nested arrays to a dense matrix; must be rectangular and
/// nonempty.
fn matrix(field: &str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::Schema {
            field: field.into(),
            message: "matrix must have at least one row and one column".into(),
        });
    }
    let ncols = rows[0].len();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(Error::Schema {
                field: field.into(),
                message: format!(
                    "row {i} has {} entries but row 0 has {ncols}; matrices must be rectangular",
                    row.len()
                ),
            });
        }
    }
    Ok(DMatrix::from_row_iterator(
        rows.len(),
        ncols,
        rows.iter().flatten().copied(),
    ))
}
