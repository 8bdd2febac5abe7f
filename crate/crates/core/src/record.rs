//! Raw repository data as fetched from GitHub and the per-candidate metric
//! record derived from it.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

/// Login used for issues whose author account was deleted.
pub const GHOST_LOGIN: &str = "ghost";

/// Repository-level facts from a single summary request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepoSummary {
    pub owner: String,
    pub name: String,
    pub created_at: DateTime<Utc>,
    pub star_count: u64,
    /// Subscriber count. The REST `watchers` field mirrors stars and is ignored.
    pub watcher_count: u64,
    /// Open issues as reported by GitHub, which includes open pull requests.
    pub open_issues_reported: u64,
    pub default_branch: String,
    pub archived: bool,
    pub fetched_at: DateTime<Utc>,
}

impl RepoSummary {
    pub fn full_name(&self) -> String {
        format!("{}/{}", self.owner, self.name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueState {
    Open,
    Closed,
}

/// One sampled issue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IssueRecord {
    /// `None` when the author account no longer exists.
    pub author: Option<String>,
    /// Author exposes a company affiliation or is an Organization account.
    pub author_org_affiliated: bool,
    pub created_at: DateTime<Utc>,
    pub closed_at: Option<DateTime<Utc>>,
    pub comment_count: u64,
    pub state: IssueState,
    pub is_pull_request: bool,
}

impl IssueRecord {
    /// Author login with deleted accounts collapsed onto [`GHOST_LOGIN`].
    pub fn author_login(&self) -> &str {
        self.author.as_deref().unwrap_or(GHOST_LOGIN)
    }
}

/// Everything fetched for one repository before aggregation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRepoData {
    pub summary: RepoSummary,
    /// Newest-first issue sample, possibly containing pull-request rows.
    pub issues: Vec<IssueRecord>,
    pub pull_request_count: u64,
    pub open_pull_request_count: u64,
    pub contributor_count: u64,
    /// `None` when the dependency graph yields nothing.
    pub dependency_count: Option<u64>,
    pub download_total: u64,
    pub crawl_timestamp: DateTime<Utc>,
    pub issue_sample_size: u64,
}

/// One candidate's row: identity plus every computed metric.
///
/// Field names double as CSV column headers and JSON keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub full_name: String,
    pub crawled_at: DateTime<Utc>,
    pub star_count: u64,
    pub watcher_count: u64,
    pub age_days: f64,
    pub avg_issue_active_time_days: Option<f64>,
    pub avg_issue_close_time_days: Option<f64>,
    pub avg_issue_comments: Option<f64>,
    pub issue_raiser_count: u64,
    pub org_issue_raiser_count: u64,
    pub pull_request_count: u64,
    pub contributor_count: u64,
    pub open_issue_count: u64,
    pub dependency_count: Option<u64>,
    pub download_total: u64,
    pub issue_sample_size: u64,
}

impl CandidateRecord {
    /// Value of a numeric metric, `None` when undefined for this candidate.
    pub fn metric(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::StarCount => Some(self.star_count as f64),
            Metric::WatcherCount => Some(self.watcher_count as f64),
            Metric::AgeDays => Some(self.age_days),
            Metric::AvgIssueActiveTimeDays => self.avg_issue_active_time_days,
            Metric::AvgIssueCloseTimeDays => self.avg_issue_close_time_days,
            Metric::AvgIssueComments => self.avg_issue_comments,
            Metric::IssueRaiserCount => Some(self.issue_raiser_count as f64),
            Metric::OrgIssueRaiserCount => Some(self.org_issue_raiser_count as f64),
            Metric::PullRequestCount => Some(self.pull_request_count as f64),
            Metric::ContributorCount => Some(self.contributor_count as f64),
            Metric::OpenIssueCount => Some(self.open_issue_count as f64),
            Metric::DependencyCount => self.dependency_count.map(|v| v as f64),
            Metric::DownloadTotal => Some(self.download_total as f64),
            Metric::IssueSampleSize => Some(self.issue_sample_size as f64),
        }
    }
}

/// The numeric columns of a [`CandidateRecord`] that evaluation models may bind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    StarCount,
    WatcherCount,
    AgeDays,
    AvgIssueActiveTimeDays,
    AvgIssueCloseTimeDays,
    AvgIssueComments,
    IssueRaiserCount,
    OrgIssueRaiserCount,
    PullRequestCount,
    ContributorCount,
    OpenIssueCount,
    DependencyCount,
    DownloadTotal,
    IssueSampleSize,
}

impl Metric {
    pub const ALL: [Metric; 14] = [
        Metric::StarCount,
        Metric::WatcherCount,
        Metric::AgeDays,
        Metric::AvgIssueActiveTimeDays,
        Metric::AvgIssueCloseTimeDays,
        Metric::AvgIssueComments,
        Metric::IssueRaiserCount,
        Metric::OrgIssueRaiserCount,
        Metric::PullRequestCount,
        Metric::ContributorCount,
        Metric::OpenIssueCount,
        Metric::DependencyCount,
        Metric::DownloadTotal,
        Metric::IssueSampleSize,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::StarCount => "star_count",
            Metric::WatcherCount => "watcher_count",
            Metric::AgeDays => "age_days",
            Metric::AvgIssueActiveTimeDays => "avg_issue_active_time_days",
            Metric::AvgIssueCloseTimeDays => "avg_issue_close_time_days",
            Metric::AvgIssueComments => "avg_issue_comments",
            Metric::IssueRaiserCount => "issue_raiser_count",
            Metric::OrgIssueRaiserCount => "org_issue_raiser_count",
            Metric::PullRequestCount => "pull_request_count",
            Metric::ContributorCount => "contributor_count",
            Metric::OpenIssueCount => "open_issue_count",
            Metric::DependencyCount => "dependency_count",
            Metric::DownloadTotal => "download_total",
            Metric::IssueSampleSize => "issue_sample_size",
        }
    }

    /// Comma-separated list of every accessor name, for error messages.
    pub fn valid_names() -> String {
        Metric::ALL
            .iter()
            .map(|m| m.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownMetric(pub String);

impl FromStr for Metric {
    type Err = UnknownMetric;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .iter()
            .copied()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| UnknownMetric(s.to_string()))
    }
}

impl Serialize for Metric {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Metric {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(|UnknownMetric(name)| {
            serde::de::Error::custom(format!(
                "unknown accessor \"{name}\"; valid accessors: {}",
                Metric::valid_names()
            ))
        })
    }
}
