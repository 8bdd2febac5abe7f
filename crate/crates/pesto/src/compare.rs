//! Comparison requests shared by `pesto compare` and `GET /api/comparison`,
//! plus the table and CSV renderings used by the CLI.

use std::collections::BTreeMap;

use pesto_core::datastore::format_real;
use pesto_core::evaluation::{score_overall, CategoryResult, ComparisonResult, RankEntry, ScoreMap};
use pesto_core::{Dataset, EvaluationModel};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompareError {
    #[error("unknown category {name:?}; valid categories: {valid}")]
    UnknownCategory { name: String, valid: String },
    #[error("unknown candidate {0:?}; not in the dataset")]
    UnknownCandidate(String),
}

/// What to compare: an optional category and an optional candidate subset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CompareRequest {
    pub category: Option<String>,
    pub candidates: Option<Vec<String>>,
}

impl CompareRequest {
    /// Splits comma-separated candidate lists; blank entries are dropped.
    pub fn parse_candidates<'a>(values: impl IntoIterator<Item = &'a str>) -> Option<Vec<String>> {
        let names: Vec<String> = values
            .into_iter()
            .flat_map(|v| v.split(','))
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect();
        (!names.is_empty()).then_some(names)
    }
}

/// Scores the (optionally filtered) dataset. The candidate filter is applied
/// before scoring, so normalization runs over the chosen subset only.
pub fn compare(
    model: &EvaluationModel,
    dataset: &Dataset,
    req: &CompareRequest,
) -> Result<ComparisonResult, CompareError> {
    if let Some(name) = &req.category {
        if model.category(name).is_none() {
            return Err(CompareError::UnknownCategory {
                name: name.clone(),
                valid: model.category_names().join(", "),
            });
        }
    }
    let filtered;
    let data = match &req.candidates {
        Some(names) => {
            if let Some(missing) = names.iter().find(|n| dataset.get(n).is_none()) {
                return Err(CompareError::UnknownCandidate(missing.clone()));
            }
            filtered = dataset.filter(names);
            &filtered
        }
        None => dataset,
    };
    let result = score_overall(model, data);
    Ok(match &req.category {
        Some(name) => result.only_category(name).expect("category checked above"),
        None => result,
    })
}

fn fmt_opt(v: Option<f64>, norm: bool) -> String {
    match v {
        None => "-".to_string(),
        Some(x) if norm => format!("{x:.4}"),
        Some(x) => format_real(x),
    }
}

fn rank_of(ranking: &[RankEntry]) -> BTreeMap<&str, Option<u32>> {
    ranking.iter().map(|e| (e.candidate.as_str(), e.rank)).collect()
}

fn fmt_rank(r: Option<Option<u32>>) -> String {
    match r.flatten() {
        Some(r) => r.to_string(),
        None => "-".to_string(),
    }
}

fn render_grid(rows: &[Vec<String>], out: &mut String) {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    for row in rows {
        let mut line = String::new();
        for (c, cell) in row.iter().enumerate() {
            let pad = widths[c] - cell.chars().count();
            if c == 0 {
                line.push_str(cell);
                line.push_str(&" ".repeat(pad));
            } else {
                line.push_str("  ");
                line.push_str(&" ".repeat(pad));
                line.push_str(cell);
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
}

fn score_rows(candidates: &[String], scores: &ScoreMap, ranking: &[RankEntry]) -> [Vec<String>; 2] {
    let ranks = rank_of(ranking);
    let mut score = vec!["score".to_string(), String::new()];
    let mut rank = vec!["rank".to_string(), String::new()];
    for c in candidates {
        score.push(fmt_opt(scores.get(c).copied().flatten(), true));
        rank.push(fmt_rank(ranks.get(c.as_str()).copied()));
    }
    [score, rank]
}

fn render_category(cat: &CategoryResult, candidates: &[String], out: &mut String) {
    out.push_str(&format!("== {} (weight {}) ==\n", cat.name, format_real(cat.weight)));
    if cat.metrics.is_empty() {
        out.push_str("(no metrics configured)\n\n");
        return;
    }
    let mut rows = Vec::new();
    let mut head = vec!["metric".to_string(), "weight".to_string()];
    head.extend(candidates.iter().cloned());
    rows.push(head);
    for m in &cat.metrics {
        let arrow = match m.direction {
            pesto_core::Direction::HigherBetter => "+",
            pesto_core::Direction::LowerBetter => "-",
        };
        let mut row = vec![format!("{} ({arrow})", m.header), format_real(m.weight)];
        for c in candidates {
            row.push(format!(
                "{} / {}",
                fmt_opt(m.raw.get(c).copied().flatten(), false),
                fmt_opt(m.normalized.get(c).copied().flatten(), true)
            ));
        }
        rows.push(row);
    }
    rows.extend(score_rows(candidates, &cat.scores, &cat.ranking));
    render_grid(&rows, out);
    out.push('\n');
}

/// Human-readable blocks: per category, each metric's `raw / normalized`
/// value per candidate, then category scores and ranks; overall last.
pub fn render_table(result: &ComparisonResult) -> String {
    let mut out = format!(
        "model: {}\ncandidates: {}\n\n",
        result.model_name,
        result.candidates.len()
    );
    for cat in &result.categories {
        render_category(cat, &result.candidates, &mut out);
    }
    if let Some(overall) = &result.overall {
        out.push_str("== Overall ==\n");
        let mut head = vec![String::new(), String::new()];
        head.extend(result.candidates.iter().cloned());
        let mut rows = vec![head];
        rows.extend(score_rows(&result.candidates, &overall.scores, &overall.ranking));
        render_grid(&rows, &mut out);
    }
    out
}

/// Flat `candidate,category,score,rank` rows, overall scores under `Overall`.
pub fn render_csv(result: &ComparisonResult) -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(["candidate", "category", "score", "rank"]).unwrap();
    let mut blocks: Vec<(&str, &ScoreMap, &[RankEntry])> = result
        .categories
        .iter()
        .map(|c| (c.name.as_str(), &c.scores, c.ranking.as_slice()))
        .collect();
    if let Some(o) = &result.overall {
        blocks.push(("Overall", &o.scores, o.ranking.as_slice()));
    }
    for (name, scores, ranking) in blocks {
        let ranks = rank_of(ranking);
        for c in &result.candidates {
            let score = scores.get(c).copied().flatten().map(format_real).unwrap_or_default();
            let rank = ranks.get(c.as_str()).copied().flatten().map(|r| r.to_string()).unwrap_or_default();
            w.write_record([c.as_str(), name, &score, &rank]).unwrap();
        }
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn candidate_lists_split_on_commas() {
        assert_eq!(
            CompareRequest::parse_candidates(["a/b, c/d", "e/f"]),
            Some(vec!["a/b".into(), "c/d".into(), "e/f".into()])
        );
        assert_eq!(CompareRequest::parse_candidates([" , "]), None);
        assert_eq!(CompareRequest::parse_candidates([]), None);
    }
}
