//! Evaluation model configuration: categories mapped to weighted metric bindings.
//!
//! The on-disk format is JSON. Parsing goes through a JSON5 reader so
//! snippets copied from JavaScript column definitions, with unquoted keys or
//! trailing commas, load unchanged.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::record::Metric;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    HigherBetter,
    LowerBetter,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricBinding {
    #[serde(rename = "Header")]
    pub header: String,
    pub accessor: Metric,
    pub direction: Direction,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategorySpec {
    pub name: String,
    pub weight: f64,
    pub metrics: Vec<MetricBinding>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationModel {
    pub model_name: String,
    pub categories: Vec<CategorySpec>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InvalidConfig {
    #[error("cannot read config {path}: {message}")]
    Io { path: String, message: String },
    #[error("config is not valid JSON: {0}")]
    Syntax(String),
    #[error("unknown accessor \"{accessor}\" in category \"{category}\"; valid accessors: {valid}")]
    UnknownAccessor {
        accessor: String,
        category: String,
        valid: String,
    },
    #[error("weight of {what} must be a positive finite number, got {weight}")]
    NonPositiveWeight { what: String, weight: f64 },
    #[error("duplicate category \"{0}\"")]
    DuplicateCategory(String),
    #[error("accessor \"{accessor}\" appears twice in category \"{category}\"")]
    DuplicateAccessor { category: String, accessor: String },
    #[error("config declares no categories")]
    NoCategories,
    #[error("no category binds any metric")]
    NoMetrics,
}

fn default_weight() -> f64 {
    1.0
}

fn default_model_name() -> String {
    "custom".to_string()
}

#[derive(Deserialize)]
struct RawModel {
    #[serde(default = "default_model_name")]
    model_name: String,
    #[serde(default)]
    categories: Vec<RawCategory>,
}

#[derive(Deserialize)]
struct RawCategory {
    name: String,
    #[serde(default = "default_weight")]
    weight: f64,
    #[serde(default)]
    metrics: Vec<RawBinding>,
}

#[derive(Deserialize)]
struct RawBinding {
    #[serde(rename = "Header", alias = "header")]
    header: String,
    accessor: String,
    #[serde(default)]
    direction: Direction,
    #[serde(default = "default_weight")]
    weight: f64,
}

fn check_weight(what: impl FnOnce() -> String, weight: f64) -> Result<(), InvalidConfig> {
    if weight.is_finite() && weight > 0.0 {
        Ok(())
    } else {
        Err(InvalidConfig::NonPositiveWeight {
            what: what(),
            weight,
        })
    }
}

impl EvaluationModel {
    pub fn from_json_str(text: &str) -> Result<Self, InvalidConfig> {
        let raw: RawModel =
            json5::from_str(text).map_err(|e| InvalidConfig::Syntax(e.to_string()))?;
        Self::validate(raw)
    }

    /// Loads a config file; defaults fill `direction` (higher_better) and weights (1).
    pub fn load(path: &Path) -> Result<Self, InvalidConfig> {
        let text = fs::read_to_string(path).map_err(|e| InvalidConfig::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json_str(&text)
    }

    fn validate(raw: RawModel) -> Result<Self, InvalidConfig> {
        if raw.categories.is_empty() {
            return Err(InvalidConfig::NoCategories);
        }
        let mut seen = HashSet::new();
        let mut categories = Vec::with_capacity(raw.categories.len());
        for cat in raw.categories {
            if !seen.insert(cat.name.clone()) {
                return Err(InvalidConfig::DuplicateCategory(cat.name));
            }
            check_weight(|| format!("category \"{}\"", cat.name), cat.weight)?;
            let mut accessors = HashSet::new();
            let mut metrics = Vec::with_capacity(cat.metrics.len());
            for b in cat.metrics {
                let accessor: Metric =
                    b.accessor
                        .parse()
                        .map_err(|_| InvalidConfig::UnknownAccessor {
                            accessor: b.accessor.clone(),
                            category: cat.name.clone(),
                            valid: Metric::valid_names(),
                        })?;
                if !accessors.insert(accessor) {
                    return Err(InvalidConfig::DuplicateAccessor {
                        category: cat.name,
                        accessor: b.accessor,
                    });
                }
                check_weight(
                    || format!("metric \"{}\" in category \"{}\"", b.accessor, cat.name),
                    b.weight,
                )?;
                metrics.push(MetricBinding {
                    header: b.header,
                    accessor,
                    direction: b.direction,
                    weight: b.weight,
                });
            }
            categories.push(CategorySpec {
                name: cat.name,
                weight: cat.weight,
                metrics,
            });
        }
        if categories.iter().all(|c| c.metrics.is_empty()) {
            return Err(InvalidConfig::NoMetrics);
        }
        Ok(EvaluationModel {
            model_name: raw.model_name,
            categories,
        })
    }

    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn category(&self, name: &str) -> Option<&CategorySpec> {
        self.categories.iter().find(|c| c.name == name)
    }

    pub fn category_names(&self) -> Vec<&str> {
        self.categories.iter().map(|c| c.name.as_str()).collect()
    }

    /// The bundled OSSPAL-derived default.
    pub fn osspal() -> Self {
        Self::from_json_str(crate::bundled::OSSPAL).expect("bundled OSSPAL config is valid")
    }
}
