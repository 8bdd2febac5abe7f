//! Derived repository metrics.
//!
//! Every issue metric ignores rows flagged as pull requests. Time metrics
//! are fractional days. Undefined averages are `None`, never zero.

use std::collections::BTreeSet;

use chrono::{DateTime, Duration, Utc};
use thiserror::Error;

use crate::record::{CandidateRecord, IssueRecord, RawRepoData};

const MILLIS_PER_DAY: f64 = 86_400_000.0;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("issue_sample_size is {declared} but {actual} issues were supplied")]
    SampleSizeMismatch { declared: u64, actual: u64 },
    #[error("crawl timestamp {crawled} precedes repository creation {created}")]
    CrawlBeforeCreation {
        crawled: DateTime<Utc>,
        created: DateTime<Utc>,
    },
}

fn days(d: Duration) -> f64 {
    d.num_milliseconds() as f64 / MILLIS_PER_DAY
}

/// Rounds to six fractional digits, the precision carried in CSV files.
pub fn round_micro(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

fn issues_only(issues: &[IssueRecord]) -> impl Iterator<Item = &IssueRecord> {
    issues.iter().filter(|i| !i.is_pull_request)
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Repository age in days; clamps to zero if `now` precedes creation.
pub fn compute_age_days(created_at: DateTime<Utc>, now: DateTime<Utc>) -> f64 {
    days(now - created_at).max(0.0)
}

/// Mean lifetime of sampled issues: closed issues up to their close time,
/// open ones up to `now`.
pub fn compute_avg_issue_active_time(issues: &[IssueRecord], now: DateTime<Utc>) -> Option<f64> {
    mean(issues_only(issues).map(|i| days(i.closed_at.unwrap_or(now) - i.created_at)))
}

/// Mean time to close, over closed issues only.
pub fn compute_avg_issue_close_time(issues: &[IssueRecord]) -> Option<f64> {
    mean(issues_only(issues).filter_map(|i| i.closed_at.map(|c| days(c - i.created_at))))
}

pub fn compute_avg_issue_comments(issues: &[IssueRecord]) -> Option<f64> {
    mean(issues_only(issues).map(|i| i.comment_count as f64))
}

/// Distinct issue authors; deleted accounts count once.
pub fn count_issue_raisers(issues: &[IssueRecord]) -> u64 {
    issues_only(issues)
        .map(IssueRecord::author_login)
        .collect::<BTreeSet<_>>()
        .len() as u64
}

/// Distinct issue authors flagged as organization-affiliated on any of their issues.
pub fn count_org_issue_raisers(issues: &[IssueRecord]) -> u64 {
    issues_only(issues)
        .filter(|i| i.author_org_affiliated)
        .map(IssueRecord::author_login)
        .collect::<BTreeSet<_>>()
        .len() as u64
}

/// Assembles the full metric row for one repository.
///
/// Real-valued metrics are rounded to six fractional digits so the record
/// equals what a CSV round trip would produce.
pub fn build_candidate_record(raw: &RawRepoData) -> Result<CandidateRecord, MetricsError> {
    let actual = raw.issues.len() as u64;
    if raw.issue_sample_size != actual {
        return Err(MetricsError::SampleSizeMismatch {
            declared: raw.issue_sample_size,
            actual,
        });
    }
    let now = raw.crawl_timestamp;
    if now < raw.summary.created_at {
        return Err(MetricsError::CrawlBeforeCreation {
            crawled: now,
            created: raw.summary.created_at,
        });
    }
    let issues = &raw.issues;
    Ok(CandidateRecord {
        full_name: raw.summary.full_name(),
        crawled_at: now,
        star_count: raw.summary.star_count,
        watcher_count: raw.summary.watcher_count,
        age_days: round_micro(compute_age_days(raw.summary.created_at, now)),
        avg_issue_active_time_days: compute_avg_issue_active_time(issues, now).map(round_micro),
        avg_issue_close_time_days: compute_avg_issue_close_time(issues).map(round_micro),
        avg_issue_comments: compute_avg_issue_comments(issues).map(round_micro),
        issue_raiser_count: count_issue_raisers(issues),
        org_issue_raiser_count: count_org_issue_raisers(issues),
        pull_request_count: raw.pull_request_count,
        contributor_count: raw.contributor_count,
        open_issue_count: raw
            .summary
            .open_issues_reported
            .saturating_sub(raw.open_pull_request_count),
        dependency_count: raw.dependency_count,
        download_total: raw.download_total,
        issue_sample_size: raw.issue_sample_size,
    })
}
