//! Independent recomputation of crawl output and scores straight from the
//! mock fixtures and the config JSON, sharing no code with the crate.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use pesto_mockhub::FixtureRepo;
use serde_json::Value;

pub type Row = BTreeMap<String, Option<f64>>;
pub type Scores = BTreeMap<String, Option<f64>>;

fn days(from: DateTime<Utc>, to: DateTime<Utc>) -> f64 {
    (to - from).num_milliseconds() as f64 / 86_400_000.0
}

fn micro(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

/// Expected metric row for a fixture repository crawled at `at`.
pub fn expected_row(repo: &FixtureRepo, at: DateTime<Utc>) -> Row {
    let issues = &repo.issues;
    let n = issues.len() as f64;
    let closed: Vec<f64> = issues
        .iter()
        .filter_map(|i| i.closed_at.map(|c| days(i.created_at, c)))
        .collect();
    let login = |a: &Option<String>| a.clone().unwrap_or_else(|| "ghost".into());
    let mut raisers: Vec<String> = issues.iter().map(|i| login(&i.author)).collect();
    raisers.sort();
    raisers.dedup();
    let mut org: Vec<String> = issues
        .iter()
        .filter(|i| i.author_is_org || i.company.as_deref().is_some_and(|c| !c.trim().is_empty()))
        .map(|i| login(&i.author))
        .collect();
    org.sort();
    org.dedup();
    let open_issues = issues.iter().filter(|i| i.closed_at.is_none()).count() as f64;

    let mut row = Row::new();
    let mut put = |k: &str, v: Option<f64>| {
        row.insert(k.to_string(), v);
    };
    put("star_count", Some(repo.stars as f64));
    put("watcher_count", Some(repo.watchers as f64));
    put("age_days", Some(micro(days(repo.created_at, at).max(0.0))));
    put(
        "avg_issue_active_time_days",
        (n > 0.0).then(|| micro(issues.iter().map(|i| days(i.created_at, i.closed_at.unwrap_or(at))).sum::<f64>() / n)),
    );
    put(
        "avg_issue_close_time_days",
        (!closed.is_empty()).then(|| micro(closed.iter().sum::<f64>() / closed.len() as f64)),
    );
    put(
        "avg_issue_comments",
        (n > 0.0).then(|| micro(issues.iter().map(|i| i.comments as f64).sum::<f64>() / n)),
    );
    put("issue_raiser_count", Some(raisers.len() as f64));
    put("org_issue_raiser_count", Some(org.len() as f64));
    put("pull_request_count", Some(repo.pull_requests as f64));
    put("contributor_count", Some(repo.contributors.len() as f64));
    put("open_issue_count", Some(open_issues));
    put("dependency_count", repo.sbom.as_ref().map(|s| s.len() as f64));
    put("download_total", Some(repo.releases.iter().flatten().sum::<u64>() as f64));
    put("issue_sample_size", Some(n));
    row
}

fn min_max(values: &[Option<f64>], lower_better: bool) -> Vec<Option<f64>> {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    let lo = present.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = present.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .map(|v| {
            v.map(|x| {
                let t = if hi > lo { (x - lo) / (hi - lo) } else { 0.5 };
                if lower_better && hi > lo {
                    1.0 - t
                } else {
                    t
                }
            })
        })
        .collect()
}

fn wmean(pairs: &[(f64, Option<f64>)]) -> Option<f64> {
    let present: Vec<(f64, f64)> = pairs.iter().filter_map(|(w, v)| v.map(|v| (*w, v))).collect();
    let den: f64 = present.iter().map(|(w, _)| w).sum();
    (den > 0.0).then(|| present.iter().map(|(w, v)| w * v).sum::<f64>() / den)
}

fn weight(v: &Value) -> f64 {
    v.get("weight").and_then(Value::as_f64).unwrap_or(1.0)
}

/// (category name → scores, overall scores) for `rows` under a plain-JSON config.
pub fn scores(config: &Value, rows: &[(String, Row)]) -> (Vec<(String, Scores)>, Scores) {
    let mut cats = Vec::new();
    for cat in config["categories"].as_array().unwrap() {
        let metrics = cat["metrics"].as_array().unwrap();
        let normalized: Vec<(f64, Vec<Option<f64>>)> = metrics
            .iter()
            .map(|m| {
                let acc = m["accessor"].as_str().unwrap();
                let lower = m.get("direction").and_then(Value::as_str) == Some("lower_better");
                let raw: Vec<Option<f64>> = rows.iter().map(|(_, r)| r[acc]).collect();
                (weight(m), min_max(&raw, lower))
            })
            .collect();
        let s: Scores = rows
            .iter()
            .enumerate()
            .map(|(i, (name, _))| {
                let pairs: Vec<(f64, Option<f64>)> = normalized.iter().map(|(w, n)| (*w, n[i])).collect();
                (name.clone(), wmean(&pairs))
            })
            .collect();
        cats.push((cat["name"].as_str().unwrap().to_string(), s, weight(cat)));
    }
    let overall: Scores = rows
        .iter()
        .map(|(name, _)| {
            let pairs: Vec<(f64, Option<f64>)> = cats.iter().map(|(_, s, w)| (*w, s[name])).collect();
            (name.clone(), wmean(&pairs))
        })
        .collect();
    (cats.into_iter().map(|(n, s, _)| (n, s)).collect(), overall)
}

/// Dense ranks, best first; unscored candidates get `None`.
pub fn ranks(scores: &Scores) -> BTreeMap<String, Option<u32>> {
    let mut distinct: Vec<f64> = scores.values().flatten().copied().collect();
    distinct.sort_by(|a, b| b.total_cmp(a));
    distinct.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    scores
        .iter()
        .map(|(k, v)| {
            let r = v.map(|s| distinct.iter().position(|d| (d - s).abs() <= 1e-12).unwrap() as u32 + 1);
            (k.clone(), r)
        })
        .collect()
}
