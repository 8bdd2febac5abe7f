//! Proptest strategies for records, datasets and evaluation models.

use chrono::{DateTime, Duration, TimeZone, Utc};
use proptest::collection::vec;
use proptest::prelude::*;

use crate::datastore::Dataset;
use crate::evaluation::{CategorySpec, Direction, EvaluationModel, MetricBinding};
use crate::record::{CandidateRecord, IssueRecord, IssueState, Metric};

fn base_time() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2015, 1, 1, 0, 0, 0).unwrap()
}

/// A real with at most six fractional digits, as stored in CSV.
pub fn micro_real(max_units: i64) -> impl Strategy<Value = f64> {
    (0..=max_units).prop_map(|k| k as f64 / 1e6)
}

pub fn timestamp() -> impl Strategy<Value = DateTime<Utc>> {
    (0i64..400_000_000, 0u32..1_000_000_000)
        .prop_map(|(s, ns)| base_time() + Duration::seconds(s) + Duration::nanoseconds(ns as i64))
}

/// Names that stress RFC-4180 quoting: commas, quotes, spaces, newlines, non-ASCII.
pub fn full_name() -> impl Strategy<Value = String> {
    "[a-z0-9\\-]{1,8}/[a-zA-Z0-9._ ,\"\n\u{e9}\u{4e2d}-]{1,12}"
}

pub fn candidate_record() -> impl Strategy<Value = CandidateRecord> {
    let counts = vec(0u64..1_000_000, 10);
    let reals = (
        micro_real(5_000_000_000),
        proptest::option::of(micro_real(500_000_000)),
        proptest::option::of(micro_real(500_000_000)),
        proptest::option::of(micro_real(100_000_000)),
    );
    (
        full_name(),
        timestamp(),
        counts,
        reals,
        proptest::option::of(0u64..10_000),
    )
        .prop_map(|(full_name, crawled_at, c, (age, active, close, comments), deps)| {
            CandidateRecord {
                full_name,
                crawled_at,
                star_count: c[0],
                watcher_count: c[1],
                age_days: age,
                avg_issue_active_time_days: active,
                avg_issue_close_time_days: close,
                avg_issue_comments: comments,
                issue_raiser_count: c[2],
                org_issue_raiser_count: c[3],
                pull_request_count: c[4],
                contributor_count: c[5],
                open_issue_count: c[6],
                dependency_count: deps,
                download_total: c[7],
                issue_sample_size: c[8],
            }
        })
}

pub fn dataset(max_rows: usize) -> impl Strategy<Value = Dataset> {
    vec(candidate_record(), 0..=max_rows).prop_map(Dataset::from_records)
}

pub fn direction() -> impl Strategy<Value = Direction> {
    prop_oneof![Just(Direction::HigherBetter), Just(Direction::LowerBetter)]
}

pub fn metric() -> impl Strategy<Value = Metric> {
    proptest::sample::select(Metric::ALL.to_vec())
}

pub fn weight() -> impl Strategy<Value = f64> {
    (1u32..=40).prop_map(|w| w as f64 / 4.0)
}

pub fn category(name: String) -> impl Strategy<Value = CategorySpec> {
    (
        weight(),
        proptest::sample::subsequence(Metric::ALL.to_vec(), 0..=5),
        vec((direction(), weight()), 5),
    )
        .prop_map(move |(w, metrics, dw)| CategorySpec {
            name: name.clone(),
            weight: w,
            metrics: metrics
                .into_iter()
                .zip(dw)
                .map(|(m, (direction, weight))| MetricBinding {
                    header: format!("#{m}"),
                    accessor: m,
                    direction,
                    weight,
                })
                .collect(),
        })
}

/// A valid model: 1-4 categories, at least one populated.
pub fn model() -> impl Strategy<Value = EvaluationModel> {
    (1usize..=4)
        .prop_flat_map(|n| {
            (0..n)
                .map(|i| category(format!("Category {i}")))
                .collect::<Vec<_>>()
        })
        .prop_filter("at least one populated category", |cats| {
            cats.iter().any(|c| !c.metrics.is_empty())
        })
        .prop_map(|categories| EvaluationModel {
            model_name: "generated".into(),
            categories,
        })
}

/// Issues with timestamps on whole seconds in a one-year window after 2015-01-01.
pub fn issue() -> impl Strategy<Value = IssueRecord> {
    (
        proptest::option::of("[a-e]"),
        any::<bool>(),
        0i64..31_536_000,
        proptest::option::of(0i64..5_000_000),
        0u64..50,
        proptest::bool::weighted(0.2),
    )
        .prop_map(|(author, org, created, close_after, comments, is_pr)| {
            let created_at = base_time() + Duration::seconds(created);
            IssueRecord {
                author,
                author_org_affiliated: org,
                created_at,
                closed_at: close_after.map(|d| created_at + Duration::seconds(d)),
                comment_count: comments,
                state: if close_after.is_some() {
                    IssueState::Closed
                } else {
                    IssueState::Open
                },
                is_pull_request: is_pr,
            }
        })
}

/// A crawl time later than every issue [`issue`] can produce.
pub fn crawl_time() -> DateTime<Utc> {
    base_time() + Duration::seconds(31_536_000 + 5_000_000 + 1)
}
