//! Crawl orchestration: GitHub → metrics → CSV, one repository at a time.
//!
//! Each finished repository is merged into the output file immediately, so an
//! interrupted session keeps its completed rows. Per-repository failures are
//! collected in the [`CrawlReport`]; only a rejected token aborts the run.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use chrono::Utc;
use pesto_core::{build_candidate_record, Dataset, DatastoreError};
use serde::Serialize;
use thiserror::Error;

use crate::github::{GithubClient, GithubError, RepoId};

#[derive(Debug, Error)]
pub enum CrawlError {
    #[error("GitHub rejected the token (401); check --token or GITHUB_TOKEN")]
    FatalAuth,
    #[error(transparent)]
    Datastore(#[from] DatastoreError),
    #[error("{0}")]
    InvalidInput(String),
    #[error(transparent)]
    Github(#[from] GithubError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RepoStatus {
    Ok,
    Failed { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepoOutcome {
    pub repo: String,
    #[serde(flatten)]
    pub status: RepoStatus,
    pub requests: u64,
}

impl RepoOutcome {
    pub fn is_ok(&self) -> bool {
        self.status == RepoStatus::Ok
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CrawlReport {
    pub outcomes: Vec<RepoOutcome>,
    /// Requests issued over the whole session, retries included.
    pub request_count: u64,
    #[serde(rename = "elapsed_secs", serialize_with = "secs")]
    pub elapsed: Duration,
}

fn secs<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

impl CrawlReport {
    fn empty() -> Self {
        CrawlReport {
            outcomes: Vec::new(),
            request_count: 0,
            elapsed: Duration::ZERO,
        }
    }

    pub fn succeeded(&self) -> usize {
        self.outcomes.iter().filter(|o| o.is_ok()).count()
    }

    pub fn failed(&self) -> usize {
        self.outcomes.len() - self.succeeded()
    }

    pub fn all_ok(&self) -> bool {
        self.failed() == 0
    }

    pub fn to_text(&self) -> String {
        let width = self.outcomes.iter().map(|o| o.repo.len()).max().unwrap_or(0);
        let mut out = String::new();
        for o in &self.outcomes {
            let reqs = match o.requests {
                1 => "1 request".to_string(),
                n => format!("{n} requests"),
            };
            match &o.status {
                RepoStatus::Ok => writeln!(out, "ok      {:width$}  ({reqs})", o.repo),
                RepoStatus::Failed { reason } => {
                    writeln!(out, "FAILED  {:width$}  ({reqs}): {reason}", o.repo)
                }
            }
            .unwrap();
        }
        writeln!(
            out,
            "{} repos: {} ok, {} failed; {} requests in {:.2}s",
            self.outcomes.len(),
            self.succeeded(),
            self.failed(),
            self.request_count,
            self.elapsed.as_secs_f64()
        )
        .unwrap();
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn load_existing(path: &Path) -> Result<Dataset, DatastoreError> {
    if path.exists() {
        Dataset::read_csv(path)
    } else {
        Ok(Dataset::empty())
    }
}

async fn crawl_one(client: &GithubClient, repo: &RepoId) -> Result<pesto_core::CandidateRecord, GithubError> {
    let raw = client.fetch_raw_repo(repo).await?;
    build_candidate_record(&raw).map_err(|e| GithubError::Decode {
        path: repo.to_string(),
        message: e.to_string(),
    })
}

/// Crawls `repos` in order, merging each success into the CSV at `out_path`.
///
/// Existing rows in `out_path` are kept; a re-crawled repository replaces its
/// row in place. Names that fail validation are reported as failures without
/// spending requests.
pub async fn crawl_candidates(
    client: &GithubClient,
    repos: &[String],
    out_path: &Path,
) -> Result<CrawlReport, CrawlError> {
    if repos.is_empty() {
        return Err(CrawlError::InvalidInput("no repositories to crawl".into()));
    }
    let started = Instant::now();
    let start_requests = client.request_count();
    let mut dataset = load_existing(out_path)?;
    let mut outcomes = Vec::with_capacity(repos.len());
    let mut exhausted: Option<String> = None;

    for name in repos {
        if let Some(reason) = &exhausted {
            outcomes.push(RepoOutcome {
                repo: name.clone(),
                status: RepoStatus::Failed { reason: reason.clone() },
                requests: 0,
            });
            continue;
        }
        let repo = match name.parse::<RepoId>() {
            Ok(r) => r,
            Err(e) => {
                outcomes.push(RepoOutcome {
                    repo: name.clone(),
                    status: RepoStatus::Failed { reason: e.to_string() },
                    requests: 0,
                });
                continue;
            }
        };
        let before = client.request_count();
        log::info!("crawling {repo}");
        let mut result = crawl_one(client, &repo).await;
        if let Err(GithubError::RateLimited { reset_at }) = &result {
            let wait = (*reset_at - Utc::now()).to_std().unwrap_or_default();
            log::warn!("{repo}: rate limited; retrying after {:.1}s", wait.as_secs_f64());
            tokio::time::sleep(wait).await;
            result = crawl_one(client, &repo).await;
        }
        let requests = client.request_count() - before;
        let status = match result {
            Ok(record) => {
                dataset = dataset.merge([record]);
                dataset.write_csv(out_path)?;
                RepoStatus::Ok
            }
            Err(GithubError::Unauthorized) => return Err(CrawlError::FatalAuth),
            Err(e) => {
                let reason = client.redact(&e.to_string());
                if matches!(e, GithubError::BudgetExhausted(_)) {
                    exhausted = Some(reason.clone());
                }
                log::warn!("{repo}: {reason}");
                RepoStatus::Failed { reason }
            }
        };
        outcomes.push(RepoOutcome {
            repo: repo.to_string(),
            status,
            requests,
        });
    }

    Ok(CrawlReport {
        outcomes,
        request_count: client.request_count() - start_requests,
        elapsed: started.elapsed(),
    })
}

/// Candidate names in a star range, most-starred first. Nothing is crawled.
pub async fn discover_by_stars(
    client: &GithubClient,
    min_stars: u64,
    max_stars: Option<u64>,
    limit: usize,
) -> Result<Vec<RepoId>, GithubError> {
    client.search_repos_by_stars(min_stars, max_stars, limit).await
}

/// Re-crawls every repository already in the dataset, replacing rows in place.
pub async fn recrawl(client: &GithubClient, dataset_path: &Path) -> Result<CrawlReport, CrawlError> {
    let existing = Dataset::read_csv(dataset_path)?;
    let names: Vec<String> = existing.full_names().map(str::to_string).collect();
    if names.is_empty() {
        return Ok(CrawlReport::empty());
    }
    crawl_candidates(client, &names, dataset_path).await
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_text_and_json() {
        let report = CrawlReport {
            outcomes: vec![
                RepoOutcome {
                    repo: "a/b".into(),
                    status: RepoStatus::Ok,
                    requests: 7,
                },
                RepoOutcome {
                    repo: "c/dd".into(),
                    status: RepoStatus::Failed {
                        reason: "not found".into(),
                    },
                    requests: 1,
                },
            ],
            request_count: 8,
            elapsed: Duration::from_millis(250),
        };
        assert_eq!(
            report.to_text(),
            "ok      a/b   (7 requests)\nFAILED  c/dd  (1 request): not found\n2 repos: 1 ok, 1 failed; 8 requests in 0.25s\n"
        );
        let v: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(v["outcomes"][0]["status"], "ok");
        assert_eq!(v["outcomes"][1]["reason"], "not found");
        assert_eq!(v["request_count"], 8);
        assert_eq!(v["elapsed_secs"], 0.25);
        assert!(!report.all_ok());
    }
}
