//! Scoring of a candidate set under an evaluation model.
//!
//! Raw metric values are min-max normalized across the compared candidates,
//! averaged with weights inside each category, and the category scores are
//! combined into an overall weighted score. Missing values drop out and the
//! remaining weights are renormalized. Scores are relative to the compared
//! set, not absolute.

mod model;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::datastore::Dataset;
use crate::record::Metric;

pub use model::{CategorySpec, Direction, EvaluationModel, InvalidConfig, MetricBinding};

/// Scores closer than this are ranked as ties.
pub const TIE_EPSILON: f64 = 1e-12;

/// Candidate full_name → optional value.
pub type ScoreMap = BTreeMap<String, Option<f64>>;

/// Min-max normalization of the present values onto [0, 1].
///
/// A constant vector maps every present value to 0.5. `LowerBetter`
/// flips the scale. Missing values stay missing.
pub fn normalize(values: &[Option<f64>], direction: Direction) -> Vec<Option<f64>> {
    let present = values.iter().flatten().copied();
    let (lo, hi) = present.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    values
        .iter()
        .map(|v| {
            v.map(|v| {
                if hi == lo {
                    0.5
                } else {
                    let x = (v - lo) / (hi - lo);
                    match direction {
                        Direction::HigherBetter => x,
                        Direction::LowerBetter => 1.0 - x,
                    }
                }
            })
        })
        .collect()
}

/// [`normalize`] over a candidate-keyed map.
pub fn normalize_metric(values: &ScoreMap, direction: Direction) -> ScoreMap {
    let raw: Vec<Option<f64>> = values.values().copied().collect();
    values
        .keys()
        .cloned()
        .zip(normalize(&raw, direction))
        .collect()
}

/// Weighted mean over the present values, weights renormalized over them.
pub fn weighted_mean(items: impl IntoIterator<Item = (f64, Option<f64>)>) -> Option<f64> {
    let (num, den) = items
        .into_iter()
        .filter_map(|(w, v)| v.map(|v| (w, v)))
        .fold((0.0, 0.0), |(n, d), (w, v)| (n + w * v, d + w));
    (den > 0.0).then(|| (num / den).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankEntry {
    pub candidate: String,
    /// Dense rank starting at 1; `None` for candidates without a score.
    pub rank: Option<u32>,
}

/// Dense descending ranking. Ties share a rank and list by name; unscored
/// candidates come last, unranked.
pub fn rank(scores: &ScoreMap) -> Vec<RankEntry> {
    let mut scored: Vec<(&String, f64)> = scores
        .iter()
        .filter_map(|(c, s)| s.map(|s| (c, s)))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));

    let mut out = Vec::with_capacity(scores.len());
    let mut group: Vec<&String> = Vec::new();
    let mut leader = f64::NAN;
    let mut current = 0u32;
    let flush = |group: &mut Vec<&String>, rank: u32, out: &mut Vec<RankEntry>| {
        group.sort();
        out.extend(group.drain(..).map(|c| RankEntry {
            candidate: c.clone(),
            rank: Some(rank),
        }));
    };
    for (cand, s) in scored {
        if group.is_empty() || leader - s > TIE_EPSILON {
            if !group.is_empty() {
                flush(&mut group, current, &mut out);
            }
            current += 1;
            leader = s;
        }
        group.push(cand);
    }
    if !group.is_empty() {
        flush(&mut group, current, &mut out);
    }
    out.extend(
        scores
            .iter()
            .filter(|(_, s)| s.is_none())
            .map(|(c, _)| RankEntry {
                candidate: c.clone(),
                rank: None,
            }),
    );
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricResult {
    #[serde(rename = "Header")]
    pub header: String,
    pub accessor: Metric,
    pub direction: Direction,
    pub weight: f64,
    pub raw: ScoreMap,
    pub normalized: ScoreMap,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryResult {
    pub name: String,
    pub weight: f64,
    pub metrics: Vec<MetricResult>,
    pub scores: ScoreMap,
    pub ranking: Vec<RankEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverallResult {
    pub scores: ScoreMap,
    pub ranking: Vec<RankEntry>,
}

/// Everything needed to compare a candidate set: raw and normalized values,
/// category scores, overall scores and rankings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonResult {
    pub model_name: String,
    /// Compared candidates in dataset order.
    pub candidates: Vec<String>,
    pub categories: Vec<CategoryResult>,
    /// Omitted when the result is filtered to a single category.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overall: Option<OverallResult>,
}

impl ComparisonResult {
    /// Restricts the result to one category block; `None` if no such category.
    pub fn only_category(&self, name: &str) -> Option<ComparisonResult> {
        let cat = self.categories.iter().find(|c| c.name == name)?;
        Some(ComparisonResult {
            model_name: self.model_name.clone(),
            candidates: self.candidates.clone(),
            categories: vec![cat.clone()],
            overall: None,
        })
    }

    pub fn category(&self, name: &str) -> Option<&CategoryResult> {
        self.categories.iter().find(|c| c.name == name)
    }

    /// Canonical JSON rendering shared by the CLI and the HTTP API.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("comparison serializes");
        s.push('\n');
        s
    }
}

fn evaluate_metric(binding: &MetricBinding, dataset: &Dataset) -> MetricResult {
    let raw: ScoreMap = dataset
        .records()
        .iter()
        .map(|r| (r.full_name.clone(), r.metric(binding.accessor)))
        .collect();
    let normalized = normalize_metric(&raw, binding.direction);
    MetricResult {
        header: binding.header.clone(),
        accessor: binding.accessor,
        direction: binding.direction,
        weight: binding.weight,
        raw,
        normalized,
    }
}

fn combine_metrics(metrics: &[MetricResult], dataset: &Dataset) -> ScoreMap {
    dataset
        .full_names()
        .map(|name| {
            let score = weighted_mean(
                metrics
                    .iter()
                    .map(|m| (m.weight, m.normalized.get(name).copied().flatten())),
            );
            (name.to_string(), score)
        })
        .collect()
}

fn evaluate_category(category: &CategorySpec, dataset: &Dataset) -> CategoryResult {
    let metrics: Vec<MetricResult> = category
        .metrics
        .iter()
        .map(|b| evaluate_metric(b, dataset))
        .collect();
    let scores = combine_metrics(&metrics, dataset);
    CategoryResult {
        name: category.name.clone(),
        weight: category.weight,
        ranking: rank(&scores),
        metrics,
        scores,
    }
}

/// Per-candidate category score: weighted mean of the candidate's present
/// normalized metric values. Missing when nothing is present.
pub fn score_category(category: &CategorySpec, dataset: &Dataset) -> ScoreMap {
    evaluate_category(category, dataset).scores
}

/// Full comparison of every candidate in `dataset` under `model`.
pub fn score_overall(model: &EvaluationModel, dataset: &Dataset) -> ComparisonResult {
    let categories: Vec<CategoryResult> = model
        .categories
        .iter()
        .map(|c| evaluate_category(c, dataset))
        .collect();
    let scores: ScoreMap = dataset
        .full_names()
        .map(|name| {
            let score = weighted_mean(
                categories
                    .iter()
                    .map(|c| (c.weight, c.scores.get(name).copied().flatten())),
            );
            (name.to_string(), score)
        })
        .collect();
    ComparisonResult {
        model_name: model.model_name.clone(),
        candidates: dataset.full_names().map(str::to_string).collect(),
        categories,
        overall: Some(OverallResult {
            ranking: rank(&scores),
            scores,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(pairs: &[(&str, Option<f64>)]) -> ScoreMap {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn normalize_examples() {
        let v = [Some(1.0), Some(2.0), Some(3.0)];
        assert_eq!(
            normalize(&v, Direction::HigherBetter),
            vec![Some(0.0), Some(0.5), Some(1.0)]
        );
        assert_eq!(
            normalize(&v, Direction::LowerBetter),
            vec![Some(1.0), Some(0.5), Some(0.0)]
        );
        assert_eq!(
            normalize(&[Some(7.0); 3], Direction::HigherBetter),
            vec![Some(0.5); 3]
        );
        assert_eq!(
            normalize(&[Some(7.0), None], Direction::LowerBetter),
            vec![Some(0.5), None]
        );
        assert!(normalize(&[], Direction::HigherBetter).is_empty());
    }

    #[test]
    fn weighted_mean_examples() {
        assert_eq!(weighted_mean([(3.0, Some(0.25))]), Some(0.25));
        assert_eq!(weighted_mean([(1.0, Some(1.0)), (1.0, Some(0.0))]), Some(0.5));
        assert_eq!(weighted_mean([(1.0, Some(1.0)), (5.0, None)]), Some(1.0));
        assert_eq!(weighted_mean([(1.0, None)]), None);
        assert_eq!(weighted_mean(std::iter::empty()), None);
    }

    #[test]
    fn rank_examples() {
        let r = rank(&map(&[("a", Some(0.9)), ("b", Some(0.1))]));
        assert_eq!(r[0], RankEntry { candidate: "a".into(), rank: Some(1) });
        assert_eq!(r[1], RankEntry { candidate: "b".into(), rank: Some(2) });

        let r = rank(&map(&[("b", Some(0.5)), ("a", Some(0.5))]));
        assert_eq!(r.iter().map(|e| e.rank).collect::<Vec<_>>(), [Some(1), Some(1)]);
        assert_eq!(r[0].candidate, "a");

        let r = rank(&map(&[("a", Some(0.5)), ("b", None)]));
        assert_eq!(r[0], RankEntry { candidate: "a".into(), rank: Some(1) });
        assert_eq!(r[1], RankEntry { candidate: "b".into(), rank: None });
    }

    #[test]
    fn dense_ranks_after_ties() {
        let r = rank(&map(&[("a", Some(0.9)), ("b", Some(0.9)), ("c", Some(0.2)), ("d", Some(0.1))]));
        let ranks: Vec<_> = r.iter().map(|e| (e.candidate.as_str(), e.rank)).collect();
        assert_eq!(ranks, [("a", Some(1)), ("b", Some(1)), ("c", Some(2)), ("d", Some(3))]);
    }
}
