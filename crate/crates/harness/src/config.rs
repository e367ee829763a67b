//! Experiment configuration.
//!
//! Configs are TOML files whose keys mirror the [`ExperimentConfig`]
//! fields exactly. Weight-like values (`lambda`, `Lambda`, `epsilon`) may
//! be written as decimal strings, integers, or floats; they are parsed
//! into exact rationals, so `"0.2"` means exactly one fifth.

use std::fmt;
use std::path::PathBuf;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use deastar_core::dea::PacParams;
use deastar_core::offline::{
    parse_decimal_weight, AlphaParams, PerimeterAxis, PerimeterKind, Weight,
};
use deastar_core::realtime::{PlannerPolicy, SensingMode};

#[derive(Error, Debug)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("runtime failure: {0}")]
    Runtime(String),
}

impl HarnessError {
    pub fn config(msg: impl fmt::Display) -> Self {
        HarnessError::Config(msg.to_string())
    }

    pub fn runtime(msg: impl fmt::Display) -> Self {
        HarnessError::Runtime(msg.to_string())
    }

    /// Process exit code: 1 for configuration errors, 2 for runtime
    /// failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            HarnessError::Runtime(_) => 2,
        }
    }
}

/// Serde adapter: exact rational weights written as decimal strings,
/// integers, or floats; serialized back in canonical rational form.
pub mod weightfmt {
    use super::*;

    pub fn serialize<S: Serializer>(w: &Weight, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&w.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Weight, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Str(String),
        }
        let text = match Raw::deserialize(de)? {
            Raw::Int(i) => return Ok(Weight::from_integer(i)),
            Raw::Float(f) => format!("{f}"),
            Raw::Str(s) => s,
        };
        parse_decimal_weight(&text).map_err(D::Error::custom)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum CorpusSpec {
    /// Seeded random obstacle fields.
    Field {
        width: u32,
        height: u32,
        density: f64,
        count: u32,
    },
    /// Seeded perfect mazes (odd dimensions).
    Maze { width: u32, height: u32, count: u32 },
    /// Pre-existing map files in the ASCII format.
    Files { files: Vec<PathBuf> },
}

fn default_axis() -> PerimeterAxis {
    PerimeterAxis::G
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlgorithmSpec {
    /// Plain best-first baseline, replanning around observed obstacles.
    AstarReplan,
    /// Fixed-perimeter weighted search.
    AlphaStar {
        #[serde(with = "weightfmt")]
        lambda: Weight,
        #[serde(rename = "Lambda", with = "weightfmt")]
        upper_lambda: Weight,
        perimeter: PerimeterKind,
    },
    /// Stochastically gated perimeter switching.
    DeaStar {
        #[serde(with = "weightfmt")]
        epsilon: Weight,
        delta: f64,
        #[serde(with = "weightfmt")]
        lambda: Weight,
        #[serde(rename = "Lambda", with = "weightfmt")]
        upper_lambda: Weight,
        /// Which perimeter family the gate switches within.
        #[serde(default = "default_axis")]
        axis: PerimeterAxis,
    },
}

impl AlgorithmSpec {
    /// Canonical identifier used in result rows. Comma-free by
    /// construction so CSV fields never need quoting.
    pub fn id(&self) -> String {
        match self {
            AlgorithmSpec::AstarReplan => "astar_replan".to_string(),
            AlgorithmSpec::AlphaStar {
                lambda,
                upper_lambda,
                perimeter,
            } => {
                let p = match perimeter {
                    PerimeterKind::GNonAggressive => "g_nonaggressive",
                    PerimeterKind::HNonAggressive => "h_nonaggressive",
                    PerimeterKind::GAggressive => "g_aggressive",
                    PerimeterKind::HAggressive => "h_aggressive",
                };
                format!("alpha_star(l={lambda} L={upper_lambda} p={p})")
            }
            AlgorithmSpec::DeaStar {
                epsilon,
                delta,
                lambda,
                upper_lambda,
                axis,
            } => {
                let a = match axis {
                    PerimeterAxis::G => "g",
                    PerimeterAxis::H => "h",
                };
                format!("dea_star(e={epsilon} d={delta} l={lambda} L={upper_lambda} a={a})")
            }
        }
    }

    /// Builds the planner policy, validating the parameters.
    pub fn to_policy(&self) -> Result<PlannerPolicy, HarnessError> {
        match self {
            AlgorithmSpec::AstarReplan => Ok(PlannerPolicy::AstarReplan),
            AlgorithmSpec::AlphaStar {
                lambda,
                upper_lambda,
                perimeter,
            } => {
                let params = AlphaParams::new(*lambda, *upper_lambda, *perimeter)
                    .map_err(HarnessError::config)?;
                Ok(PlannerPolicy::AlphaStar(params))
            }
            AlgorithmSpec::DeaStar {
                epsilon,
                delta,
                lambda,
                upper_lambda,
                axis,
            } => {
                let base = AlphaParams::new(*lambda, *upper_lambda, axis.aggressive())
                    .map_err(HarnessError::config)?;
                let pac =
                    PacParams::new(*epsilon, *delta, base).map_err(HarnessError::config)?;
                Ok(PlannerPolicy::DeaStar(pac))
            }
        }
    }

    /// The tolerance used for this algorithm's per-row exceedance flag:
    /// zero for the baseline (any suboptimality counts), the weight
    /// pair's guarantee floor for fixed-perimeter searches, and the
    /// configured epsilon for the gated policy.
    pub fn exceedance_epsilon(&self) -> Result<Weight, HarnessError> {
        match self {
            AlgorithmSpec::AstarReplan => Ok(Weight::from_integer(0)),
            AlgorithmSpec::AlphaStar { .. } => match self.to_policy()? {
                PlannerPolicy::AlphaStar(params) => {
                    Ok(deastar_core::offline::epsilon_bound(&params))
                }
                _ => unreachable!(),
            },
            AlgorithmSpec::DeaStar { epsilon, .. } => Ok(*epsilon),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub csv: PathBuf,
    pub json: PathBuf,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Root of all randomness: corpus seeds and per-trial seeds are
    /// derived from it, never drawn from ambient state.
    pub master_seed: u64,
    pub trials_per_map: u32,
    pub corpus: CorpusSpec,
    pub algorithms: Vec<AlgorithmSpec>,
    pub sensing: SensingMode,
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let config: ExperimentConfig = toml::from_str(text).map_err(HarnessError::config)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trials_per_map == 0 {
            return Err(HarnessError::config("trials_per_map must be at least 1"));
        }
        if self.algorithms.is_empty() {
            return Err(HarnessError::config("at least one algorithm is required"));
        }
        match &self.corpus {
            CorpusSpec::Field { count, density, .. } => {
                if *count == 0 {
                    return Err(HarnessError::config("corpus count must be at least 1"));
                }
                if !(0.0..1.0).contains(density) {
                    return Err(HarnessError::config(format!(
                        "density must lie in [0, 1), got {density}"
                    )));
                }
            }
            CorpusSpec::Maze { count, .. } => {
                if *count == 0 {
                    return Err(HarnessError::config("corpus count must be at least 1"));
                }
            }
            CorpusSpec::Files { files } => {
                if files.is_empty() {
                    return Err(HarnessError::config("corpus file list is empty"));
                }
            }
        }
        if let SensingMode::Radius { radius } = self.sensing {
            if radius < 1 {
                return Err(HarnessError::config("sensing radius must be at least 1"));
            }
        }
        for spec in &self.algorithms {
            spec.to_policy()?; // validates parameter ranges
        }
        Ok(())
    }
}
