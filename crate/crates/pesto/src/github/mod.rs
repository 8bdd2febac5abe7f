//! Rate-limit-aware access to the GitHub REST and GraphQL APIs.
//!
//! A [`GithubClient`] is one crawl session: it owns the credentials, the
//! request budget and the last observed quota. Every request goes through
//! [`GithubClient::execute`], which enforces the budget, waits out low
//! quota, and retries transport failures and 5xx responses with
//! exponential backoff.

mod api;
mod ratelimit;

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use chrono::{DateTime, Utc};
use reqwest::header::{HeaderMap, ACCEPT, AUTHORIZATION, USER_AGENT};
use reqwest::{Method, StatusCode};
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;
use tokio::sync::Semaphore;

pub use api::{validate_star_range, PullRequestCounts};
pub use ratelimit::RateLimitState;

pub const DEFAULT_API_BASE: &str = "https://api.github.com";
pub const TOKEN_ENV: &str = "GITHUB_TOKEN";
pub const API_BASE_ENV: &str = "PESTO_API_BASE";
/// The search API never returns more than this many results per query.
pub const SEARCH_RESULT_CEILING: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GithubError {
    #[error("not found: {0} (misspelled or private repository?)")]
    NotFound(String),
    #[error("GitHub rejected the token (401 Unauthorized)")]
    Unauthorized,
    #[error("rate limited until {reset_at}")]
    RateLimited { reset_at: DateTime<Utc> },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("HTTP {status} from {path}: {message}")]
    Http {
        status: u16,
        path: String,
        message: String,
    },
    #[error("request budget of {0} requests exhausted")]
    BudgetExhausted(u64),
    #[error("invalid star range: {0}")]
    InvalidRange(String),
    #[error("invalid repository name {0:?}: expected owner/name using letters, digits, '-', '.', '_'")]
    InvalidName(String),
    #[error("unexpected response from {path}: {message}")]
    Decode { path: String, message: String },
    #[error("no GitHub token: pass --token or set {TOKEN_ENV}")]
    MissingToken,
    #[error("invalid crawl budget: {0}")]
    InvalidBudget(String),
}

impl GithubError {
    fn retryable(&self) -> bool {
        matches!(self, GithubError::Transport(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CredentialSource {
    Flag,
    EnvVar,
}

/// A personal access token. Never printed: `Debug` redacts it.
#[derive(Clone)]
pub struct ApiCredentials {
    token: String,
    pub source: CredentialSource,
}

impl ApiCredentials {
    pub fn new(token: impl Into<String>, source: CredentialSource) -> Result<Self, GithubError> {
        let token = token.into().trim().to_string();
        if token.is_empty() {
            return Err(GithubError::MissingToken);
        }
        Ok(ApiCredentials { token, source })
    }

    /// The flag wins over the environment.
    pub fn resolve(flag: Option<String>) -> Result<Self, GithubError> {
        match flag {
            Some(t) => Self::new(t, CredentialSource::Flag),
            None => match std::env::var(TOKEN_ENV) {
                Ok(t) => Self::new(t, CredentialSource::EnvVar),
                Err(_) => Err(GithubError::MissingToken),
            },
        }
    }

    fn bearer(&self) -> String {
        format!("Bearer {}", self.token)
    }

    /// Removes any occurrence of the token from `text`.
    pub fn redact(&self, text: &str) -> String {
        text.replace(&self.token, "[REDACTED]")
    }
}

impl fmt::Debug for ApiCredentials {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ApiCredentials")
            .field("token", &"[REDACTED]")
            .field("source", &self.source)
            .finish()
    }
}

/// Limits governing one crawl session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CrawlBudget {
    pub max_requests: u64,
    pub max_issue_sample: u64,
    pub request_timeout: Duration,
    pub max_retries: u32,
    pub min_remaining_headroom: u64,
}

impl Default for CrawlBudget {
    fn default() -> Self {
        CrawlBudget {
            max_requests: 5000,
            max_issue_sample: 500,
            request_timeout: Duration::from_secs(30),
            max_retries: 3,
            min_remaining_headroom: 50,
        }
    }
}

impl CrawlBudget {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_requests == 0 {
            return Err("max_requests must be positive".into());
        }
        if self.max_issue_sample == 0 {
            return Err("max_issue_sample must be positive".into());
        }
        if self.request_timeout.is_zero() {
            return Err("request_timeout must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ClientConfig {
    pub api_base: String,
    pub budget: CrawlBudget,
    /// Items per page for REST and GraphQL listings (GitHub maximum: 100).
    pub page_size: u32,
    /// Maximum in-flight requests.
    pub concurrency: usize,
    /// First retry delay; doubles on each further attempt.
    pub backoff_base: Duration,
}

impl Default for ClientConfig {
    fn default() -> Self {
        ClientConfig {
            api_base: DEFAULT_API_BASE.to_string(),
            budget: CrawlBudget::default(),
            page_size: 100,
            concurrency: 4,
            backoff_base: Duration::from_secs(1),
        }
    }
}

impl ClientConfig {
    /// Defaults, with the API base taken from `PESTO_API_BASE` when set.
    pub fn from_env() -> Self {
        let mut cfg = ClientConfig::default();
        if let Ok(base) = std::env::var(API_BASE_ENV) {
            if !base.trim().is_empty() {
                cfg.api_base = base.trim().to_string();
            }
        }
        cfg
    }
}

/// `owner/name` with GitHub's naming rules enforced.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct RepoId {
    pub owner: String,
    pub name: String,
}

fn valid_segment(s: &str) -> bool {
    !s.is_empty()
        && s != "."
        && s != ".."
        && s
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '.' | '_'))
}

impl RepoId {
    pub fn new(owner: &str, name: &str) -> Result<Self, GithubError> {
        if valid_segment(owner) && valid_segment(name) {
            Ok(RepoId {
                owner: owner.to_string(),
                name: name.to_string(),
            })
        } else {
            Err(GithubError::InvalidName(format!("{owner}/{name}")))
        }
    }
}

impl FromStr for RepoId {
    type Err = GithubError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s.split_once('/') {
            Some((owner, name)) => RepoId::new(owner, name),
            None => Err(GithubError::InvalidName(s.to_string())),
        }
    }
}

impl fmt::Display for RepoId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.owner, self.name)
    }
}

/// One page of a listing. No cursor means the listing is exhausted.
#[derive(Debug, Clone, PartialEq)]
pub struct Page<T> {
    pub items: Vec<T>,
    pub next_cursor: Option<String>,
}

pub(crate) struct ApiResponse {
    pub status: StatusCode,
    pub headers: HeaderMap,
    pub body: Value,
}

pub struct GithubClient {
    http: reqwest::Client,
    creds: ApiCredentials,
    config: ClientConfig,
    requests: AtomicU64,
    rate: Mutex<Option<RateLimitState>>,
    permits: Semaphore,
}

impl fmt::Debug for GithubClient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GithubClient")
            .field("api_base", &self.config.api_base)
            .field("creds", &self.creds)
            .field("requests", &self.request_count())
            .finish()
    }
}

impl GithubClient {
    pub fn new(creds: ApiCredentials, config: ClientConfig) -> Result<Self, GithubError> {
        config.budget.validate().map_err(GithubError::InvalidBudget)?;
        let http = reqwest::Client::builder()
            .timeout(config.budget.request_timeout)
            .build()
            .map_err(|e| GithubError::Transport(e.to_string()))?;
        Ok(GithubClient {
            http,
            creds,
            permits: Semaphore::new(config.concurrency.max(1)),
            config,
            requests: AtomicU64::new(0),
            rate: Mutex::new(None),
        })
    }

    pub fn config(&self) -> &ClientConfig {
        &self.config
    }

    pub fn budget(&self) -> &CrawlBudget {
        &self.config.budget
    }

    /// Requests issued so far in this session, retries included.
    pub fn request_count(&self) -> u64 {
        self.requests.load(Ordering::SeqCst)
    }

    pub fn rate_limit(&self) -> Option<RateLimitState> {
        *self.rate.lock().unwrap()
    }

    /// Strips this session's token from `text`.
    pub fn redact(&self, text: &str) -> String {
        self.creds.redact(text)
    }

    pub(crate) fn url(&self, path: &str) -> String {
        format!("{}{}", self.config.api_base.trim_end_matches('/'), path)
    }

    fn reserve_request(&self) -> Result<(), GithubError> {
        let max = self.config.budget.max_requests;
        self.requests
            .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |n| (n < max).then_some(n + 1))
            .map(|_| ())
            .map_err(|_| GithubError::BudgetExhausted(max))
    }

    async fn wait_for_quota(&self) {
        loop {
            let wait = {
                let rate = self.rate.lock().unwrap();
                rate.and_then(|r| r.wait_needed(self.config.budget.min_remaining_headroom, Utc::now()))
            };
            match wait {
                Some(d) => {
                    log::info!("quota below headroom; waiting {:.1}s for reset", d.as_secs_f64());
                    tokio::time::sleep(d).await;
                }
                None => break,
            }
        }
        if let Some(r) = self.rate.lock().unwrap().as_mut() {
            r.spend_one();
        }
    }

    fn observe(&self, headers: &HeaderMap) {
        if let Some(seen) = RateLimitState::from_headers(headers, Utc::now()) {
            let mut rate = self.rate.lock().unwrap();
            *rate = Some(RateLimitState::merge(*rate, seen));
        }
    }

    fn backoff(&self, attempt: u32) -> Duration {
        let delay = self.config.backoff_base.saturating_mul(1 << attempt.min(16));
        let until_reset = self
            .rate_limit()
            .and_then(|r| (r.reset_at - Utc::now()).to_std().ok())
            .filter(|d| !d.is_zero());
        match until_reset {
            Some(cap) => delay.min(cap),
            None => delay,
        }
    }

    /// Sends one logical request, retrying transport errors and 5xx.
    pub(crate) async fn execute(
        &self,
        method: Method,
        url: &str,
        body: Option<&Value>,
    ) -> Result<ApiResponse, GithubError> {
        let path = self.display_path(url);
        let mut attempt = 0;
        loop {
            let result = self.attempt(method.clone(), url, &path, body).await;
            match result {
                Err(e) if e.retryable() && attempt < self.config.budget.max_retries => {
                    let delay = self.backoff(attempt);
                    log::warn!("{path}: {e}; retrying in {:.2}s", delay.as_secs_f64());
                    tokio::time::sleep(delay).await;
                    attempt += 1;
                }
                other => return other,
            }
        }
    }

    async fn attempt(
        &self,
        method: Method,
        url: &str,
        path: &str,
        body: Option<&Value>,
    ) -> Result<ApiResponse, GithubError> {
        let _permit = self.permits.acquire().await.expect("semaphore open");
        self.wait_for_quota().await;
        self.reserve_request()?;
        log::debug!("{method} {path}");

        let mut req = self
            .http
            .request(method, url)
            .header(AUTHORIZATION, self.creds.bearer())
            .header(USER_AGENT, concat!("pesto/", env!("CARGO_PKG_VERSION")))
            .header(ACCEPT, "application/vnd.github+json")
            .header("X-GitHub-Api-Version", "2022-11-28");
        if let Some(b) = body {
            req = req.json(b);
        }
        let resp = req
            .send()
            .await
            .map_err(|e| GithubError::Transport(self.creds.redact(&e.without_url().to_string())))?;
        let status = resp.status();
        let headers = resp.headers().clone();
        self.observe(&headers);
        let bytes = resp
            .bytes()
            .await
            .map_err(|e| GithubError::Transport(self.creds.redact(&e.without_url().to_string())))?;
        let body: Value = if bytes.is_empty() {
            Value::Null
        } else {
            serde_json::from_slice(&bytes).unwrap_or(Value::Null)
        };
        classify(status, headers, body, path)
    }

    fn display_path(&self, url: &str) -> String {
        let base = self.config.api_base.trim_end_matches('/');
        let p = url.strip_prefix(base).unwrap_or(url);
        self.creds.redact(p.split('?').next().unwrap_or(p))
    }
}

fn reset_from(headers: &HeaderMap) -> DateTime<Utc> {
    let now = Utc::now();
    if let Some(s) = RateLimitState::from_headers(headers, now) {
        return s.reset_at;
    }
    let retry_after = headers
        .get("retry-after")
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.trim().parse::<i64>().ok())
        .unwrap_or(60);
    now + chrono::Duration::seconds(retry_after)
}

fn classify(
    status: StatusCode,
    headers: HeaderMap,
    body: Value,
    path: &str,
) -> Result<ApiResponse, GithubError> {
    let message = || {
        body.get("message")
            .and_then(Value::as_str)
            .unwrap_or("")
            .to_string()
    };
    if status.is_success() {
        return Ok(ApiResponse {
            status,
            headers,
            body,
        });
    }
    let quota_exhausted = headers
        .get("x-ratelimit-remaining")
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.trim() == "0")
        || headers.contains_key("retry-after");
    match status.as_u16() {
        401 => Err(GithubError::Unauthorized),
        404 => Err(GithubError::NotFound(path.to_string())),
        429 => Err(GithubError::RateLimited {
            reset_at: reset_from(&headers),
        }),
        403 if quota_exhausted || message().to_lowercase().contains("rate limit") => {
            Err(GithubError::RateLimited {
                reset_at: reset_from(&headers),
            })
        }
        s if status.is_server_error() => Err(GithubError::Transport(format!(
            "HTTP {s} from {path}"
        ))),
        s => Err(GithubError::Http {
            status: s,
            path: path.to_string(),
            message: message(),
        }),
    }
}
