//! A local stand-in for the parts of the GitHub API that pesto uses.
//!
//! Repositories are described by [`Fixtures`]; every response is derived
//! from them, so a fixture file doubles as the oracle for what a crawl
//! should produce. Faults (status codes, rate-limit rejections, low
//! remaining-quota headers) can be injected per repository and endpoint,
//! and every request is logged with its arrival time.

use std::net::SocketAddr;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::extract::{Path, Query, Request, State};
use axum::http::{HeaderMap, HeaderValue, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::oneshot;

pub const DEFAULT_PAGE_SIZE: usize = 100;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixtureIssue {
    /// `None` models a deleted account.
    pub author: Option<String>,
    #[serde(default)]
    pub company: Option<String>,
    #[serde(default)]
    pub author_is_org: bool,
    pub created_at: DateTime<Utc>,
    #[serde(default)]
    pub closed_at: Option<DateTime<Utc>>,
    #[serde(default)]
    pub comments: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixtureRepo {
    pub full_name: String,
    pub created_at: DateTime<Utc>,
    pub stars: u64,
    pub watchers: u64,
    #[serde(default = "default_branch")]
    pub default_branch: String,
    #[serde(default)]
    pub archived: bool,
    #[serde(default)]
    pub issues: Vec<FixtureIssue>,
    #[serde(default)]
    pub pull_requests: u64,
    #[serde(default)]
    pub open_pull_requests: u64,
    #[serde(default)]
    pub contributors: Vec<String>,
    /// Non-root SBOM package names; `None` means no dependency graph.
    #[serde(default)]
    pub sbom: Option<Vec<String>>,
    /// Asset download counts, one list per release.
    #[serde(default)]
    pub releases: Vec<Vec<u64>>,
}

fn default_branch() -> String {
    "main".to_string()
}

impl FixtureRepo {
    pub fn new(full_name: &str, created_at: &str, stars: u64, watchers: u64) -> Self {
        FixtureRepo {
            full_name: full_name.to_string(),
            created_at: created_at.parse().expect("fixture timestamp"),
            stars,
            watchers,
            default_branch: default_branch(),
            archived: false,
            issues: Vec::new(),
            pull_requests: 0,
            open_pull_requests: 0,
            contributors: Vec::new(),
            sbom: None,
            releases: Vec::new(),
        }
    }

    /// `open_issues_count` as GitHub reports it: open issues plus open PRs.
    pub fn open_issues_reported(&self) -> u64 {
        self.issues.iter().filter(|i| i.closed_at.is_none()).count() as u64
            + self.open_pull_requests
    }

    fn issues_newest_first(&self) -> Vec<&FixtureIssue> {
        let mut v: Vec<&FixtureIssue> = self.issues.iter().collect();
        v.sort_by_key(|i| std::cmp::Reverse(i.created_at));
        v
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Fixtures {
    pub repos: Vec<FixtureRepo>,
}

impl Fixtures {
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn repo(&self, full_name: &str) -> Option<&FixtureRepo> {
        self.repos.iter().find(|r| r.full_name == full_name)
    }

    pub fn repo_mut(&mut self, full_name: &str) -> Option<&mut FixtureRepo> {
        self.repos.iter_mut().find(|r| r.full_name == full_name)
    }

    /// Three synthetic candidates with issues, PRs, contributors, SBOMs and releases.
    pub fn three_repos() -> Self {
        Self::from_json(include_str!("../fixtures/three_repos.json")).expect("bundled fixture")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    Summary,
    Issues,
    PullRequests,
    Contributors,
    Sbom,
    Releases,
    Search,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultKind {
    /// Reply with this status and a JSON message.
    Status(u16),
    /// Reply 429 with zero remaining quota, resetting after the given seconds.
    RateLimited { reset_in_secs: u64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Fault {
    /// Repository full name, or `None` for any.
    pub repo: Option<String>,
    /// Endpoint, or `None` for any.
    pub endpoint: Option<Endpoint>,
    pub kind: FaultKind,
    /// Number of requests to affect; `None` for all.
    pub times: Option<u32>,
}

impl Fault {
    pub fn status(repo: &str, endpoint: Option<Endpoint>, status: u16, times: Option<u32>) -> Self {
        Fault {
            repo: Some(repo.to_string()),
            endpoint,
            kind: FaultKind::Status(status),
            times,
        }
    }
}

/// Forced rate-limit headers for every response.
#[derive(Debug, Clone, Copy)]
pub struct QuotaHeaders {
    pub remaining: u64,
    pub reset_in: Duration,
}

#[derive(Debug, Clone)]
pub struct LoggedRequest {
    pub method: String,
    pub path: String,
    pub operation: Option<String>,
    pub at: Instant,
    pub authorization: Option<String>,
}

struct Inner {
    fixtures: RwLock<Fixtures>,
    faults: Mutex<Vec<Fault>>,
    quota: Mutex<Option<QuotaHeaders>>,
    log: Mutex<Vec<LoggedRequest>>,
    token: Option<String>,
    page_size: usize,
}

/// Shared handle to the mock's fixtures, faults and request log.
#[derive(Clone)]
pub struct MockState(Arc<Inner>);

impl MockState {
    pub fn new(fixtures: Fixtures, token: Option<String>) -> Self {
        Self::with_page_size(fixtures, token, DEFAULT_PAGE_SIZE)
    }

    pub fn with_page_size(fixtures: Fixtures, token: Option<String>, page_size: usize) -> Self {
        MockState(Arc::new(Inner {
            fixtures: RwLock::new(fixtures),
            faults: Mutex::new(Vec::new()),
            quota: Mutex::new(None),
            log: Mutex::new(Vec::new()),
            token,
            page_size: page_size.max(1),
        }))
    }

    pub fn add_fault(&self, fault: Fault) {
        self.0.faults.lock().unwrap().push(fault);
    }

    pub fn clear_faults(&self) {
        self.0.faults.lock().unwrap().clear();
    }

    pub fn set_quota_headers(&self, quota: Option<QuotaHeaders>) {
        *self.0.quota.lock().unwrap() = quota;
    }

    pub fn update_fixtures(&self, f: impl FnOnce(&mut Fixtures)) {
        f(&mut self.0.fixtures.write().unwrap());
    }

    pub fn requests(&self) -> Vec<LoggedRequest> {
        self.0.log.lock().unwrap().clone()
    }

    pub fn request_count(&self) -> usize {
        self.0.log.lock().unwrap().len()
    }

    pub fn clear_log(&self) {
        self.0.log.lock().unwrap().clear();
    }

    fn take_fault(&self, repo: &str, endpoint: Endpoint) -> Option<FaultKind> {
        let mut faults = self.0.faults.lock().unwrap();
        let idx = faults.iter().position(|f| {
            f.repo.as_deref().is_none_or(|r| r == repo)
                && f.endpoint.is_none_or(|e| e == endpoint)
                && f.times != Some(0)
        })?;
        let fault = &mut faults[idx];
        if let Some(n) = fault.times.as_mut() {
            *n -= 1;
        }
        Some(fault.kind)
    }

    // Err is the ready-made response handlers return early
    #[allow(clippy::result_large_err)]
    fn gate(&self, repo: &str, endpoint: Endpoint) -> Result<(), Response> {
        match self.take_fault(repo, endpoint) {
            None => Ok(()),
            Some(FaultKind::Status(code)) => {
                let status = StatusCode::from_u16(code).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
                Err((status, Json(json!({"message": format!("injected {code}")}))).into_response())
            }
            Some(FaultKind::RateLimited { reset_in_secs }) => {
                let reset = Utc::now().timestamp() as u64 + reset_in_secs;
                let mut resp = (
                    StatusCode::TOO_MANY_REQUESTS,
                    Json(json!({"message": "API rate limit exceeded"})),
                )
                    .into_response();
                let h = resp.headers_mut();
                h.insert("x-ratelimit-remaining", HeaderValue::from(0u64));
                h.insert("x-ratelimit-reset", HeaderValue::from(reset));
                h.insert("retry-after", HeaderValue::from(reset_in_secs));
                Err(resp)
            }
        }
    }
}

fn not_found() -> Response {
    (
        StatusCode::NOT_FOUND,
        Json(json!({"message": "Not Found", "documentation_url": "https://docs.github.com/rest"})),
    )
        .into_response()
}

#[derive(Deserialize)]
struct PageQuery {
    per_page: Option<usize>,
    page: Option<usize>,
    q: Option<String>,
}

impl PageQuery {
    fn bounds(&self, page_size: usize) -> (usize, usize) {
        let per = self.per_page.unwrap_or(30).clamp(1, page_size);
        let page = self.page.unwrap_or(1).max(1);
        (per, page)
    }
}

/// Slices `items` and builds a `Link` header pointing at the next page, if any.
fn paginate<T: Clone>(
    items: &[T],
    q: &PageQuery,
    page_size: usize,
    headers: &HeaderMap,
    path: &str,
    extra: &str,
) -> (Vec<T>, Option<String>) {
    let (per, page) = q.bounds(page_size);
    let start = (page - 1) * per;
    let slice: Vec<T> = items.iter().skip(start).take(per).cloned().collect();
    let next = (start + per < items.len()).then(|| {
        let host = headers
            .get("host")
            .and_then(|h| h.to_str().ok())
            .unwrap_or("127.0.0.1");
        format!(
            "<http://{host}{path}?{extra}per_page={per}&page={}>; rel=\"next\"",
            page + 1
        )
    });
    (slice, next)
}

fn with_link(body: Value, link: Option<String>) -> Response {
    let mut resp = Json(body).into_response();
    if let Some(link) = link {
        resp.headers_mut()
            .insert("link", HeaderValue::from_str(&link).expect("ascii link"));
    }
    resp
}

async fn repo_summary(
    State(st): State<MockState>,
    Path((owner, name)): Path<(String, String)>,
) -> Response {
    let full = format!("{owner}/{name}");
    if let Err(r) = st.gate(&full, Endpoint::Summary) {
        return r;
    }
    let fx = st.0.fixtures.read().unwrap();
    let Some(repo) = fx.repo(&full) else {
        return not_found();
    };
    Json(json!({
        "full_name": repo.full_name,
        "name": name,
        "owner": {"login": owner},
        "created_at": repo.created_at,
        "stargazers_count": repo.stars,
        "watchers_count": repo.stars,
        "subscribers_count": repo.watchers,
        "open_issues_count": repo.open_issues_reported(),
        "default_branch": repo.default_branch,
        "archived": repo.archived,
    }))
    .into_response()
}

async fn contributors(
    State(st): State<MockState>,
    Path((owner, name)): Path<(String, String)>,
    Query(q): Query<PageQuery>,
    headers: HeaderMap,
) -> Response {
    let full = format!("{owner}/{name}");
    if let Err(r) = st.gate(&full, Endpoint::Contributors) {
        return r;
    }
    let fx = st.0.fixtures.read().unwrap();
    let Some(repo) = fx.repo(&full) else {
        return not_found();
    };
    if repo.contributors.is_empty() {
        return StatusCode::NO_CONTENT.into_response();
    }
    let items: Vec<Value> = repo
        .contributors
        .iter()
        .enumerate()
        .map(|(i, login)| json!({"login": login, "type": "User", "contributions": 100 - (i % 100)}))
        .collect();
    let path = format!("/repos/{full}/contributors");
    let (page, link) = paginate(&items, &q, st.0.page_size, &headers, &path, "");
    with_link(Value::Array(page), link)
}

async fn releases(
    State(st): State<MockState>,
    Path((owner, name)): Path<(String, String)>,
    Query(q): Query<PageQuery>,
    headers: HeaderMap,
) -> Response {
    let full = format!("{owner}/{name}");
    if let Err(r) = st.gate(&full, Endpoint::Releases) {
        return r;
    }
    let fx = st.0.fixtures.read().unwrap();
    let Some(repo) = fx.repo(&full) else {
        return not_found();
    };
    let items: Vec<Value> = repo
        .releases
        .iter()
        .enumerate()
        .map(|(i, assets)| {
            json!({
                "tag_name": format!("v{i}"),
                "assets": assets.iter().enumerate().map(|(j, d)| json!({"name": format!("asset-{j}"), "download_count": d})).collect::<Vec<_>>(),
            })
        })
        .collect();
    let path = format!("/repos/{full}/releases");
    let (page, link) = paginate(&items, &q, st.0.page_size, &headers, &path, "");
    with_link(Value::Array(page), link)
}

async fn sbom(
    State(st): State<MockState>,
    Path((owner, name)): Path<(String, String)>,
) -> Response {
    let full = format!("{owner}/{name}");
    if let Err(r) = st.gate(&full, Endpoint::Sbom) {
        return r;
    }
    let fx = st.0.fixtures.read().unwrap();
    let Some(repo) = fx.repo(&full) else {
        return not_found();
    };
    let Some(packages) = &repo.sbom else {
        return not_found();
    };
    let root_id = format!("SPDXRef-com.github.{}", full.replace('/', "-"));
    let mut pkgs = vec![json!({"SPDXID": root_id, "name": format!("com.github.{full}")})];
    let mut rels = vec![json!({
        "spdxElementId": "SPDXRef-DOCUMENT",
        "relationshipType": "DESCRIBES",
        "relatedSpdxElement": root_id,
    })];
    for (i, p) in packages.iter().enumerate() {
        let id = format!("SPDXRef-pkg-{i}");
        pkgs.push(json!({"SPDXID": id, "name": p}));
        rels.push(json!({"spdxElementId": root_id, "relationshipType": "DEPENDS_ON", "relatedSpdxElement": id}));
    }
    Json(json!({"sbom": {
        "SPDXID": "SPDXRef-DOCUMENT",
        "name": format!("com.github.{full}"),
        "packages": pkgs,
        "relationships": rels,
    }}))
    .into_response()
}

fn parse_star_query(q: &str) -> Option<(u64, Option<u64>)> {
    let term = q.split_whitespace().find_map(|t| t.strip_prefix("stars:"))?;
    if let Some(min) = term.strip_prefix(">=") {
        return Some((min.parse().ok()?, None));
    }
    let (lo, hi) = term.split_once("..")?;
    let hi = if hi == "*" { None } else { Some(hi.parse().ok()?) };
    Some((lo.parse().ok()?, hi))
}

async fn search(
    State(st): State<MockState>,
    Query(q): Query<PageQuery>,
    headers: HeaderMap,
) -> Response {
    if let Err(r) = st.gate("", Endpoint::Search) {
        return r;
    }
    let Some((min, max)) = q.q.as_deref().and_then(parse_star_query) else {
        return (
            StatusCode::UNPROCESSABLE_ENTITY,
            Json(json!({"message": "Validation Failed"})),
        )
            .into_response();
    };
    let fx = st.0.fixtures.read().unwrap();
    let mut hits: Vec<&FixtureRepo> = fx
        .repos
        .iter()
        .filter(|r| r.stars >= min && max.is_none_or(|m| r.stars <= m))
        .collect();
    hits.sort_by(|a, b| b.stars.cmp(&a.stars).then(a.full_name.cmp(&b.full_name)));
    let items: Vec<Value> = hits
        .iter()
        .map(|r| {
            let (owner, name) = r.full_name.split_once('/').unwrap_or(("", &r.full_name));
            json!({"full_name": r.full_name, "name": name, "owner": {"login": owner}, "stargazers_count": r.stars})
        })
        .collect();
    let query = q.q.clone().unwrap_or_default().replace(' ', "+");
    let extra = format!("q={query}&sort=stars&order=desc&");
    let (page, link) = paginate(&items, &q, st.0.page_size, &headers, "/search/repositories", &extra);
    with_link(
        json!({"total_count": items.len(), "incomplete_results": false, "items": page}),
        link,
    )
}

#[derive(Deserialize)]
struct GraphqlRequest {
    #[serde(rename = "operationName")]
    operation_name: Option<String>,
    #[serde(default)]
    variables: Value,
}

fn graphql_not_found(owner: &str, name: &str) -> Response {
    Json(json!({
        "data": {"repository": null},
        "errors": [{
            "type": "NOT_FOUND",
            "path": ["repository"],
            "message": format!("Could not resolve to a Repository with the name '{owner}/{name}'."),
        }],
    }))
    .into_response()
}

async fn graphql(State(st): State<MockState>, Json(req): Json<GraphqlRequest>) -> Response {
    let var = |k: &str| req.variables.get(k).and_then(Value::as_str).unwrap_or("").to_string();
    let (owner, name) = (var("owner"), var("name"));
    let full = format!("{owner}/{name}");
    match req.operation_name.as_deref() {
        Some("IssuePage") => {
            if let Err(r) = st.gate(&full, Endpoint::Issues) {
                return r;
            }
            let fx = st.0.fixtures.read().unwrap();
            let Some(repo) = fx.repo(&full) else {
                return graphql_not_found(&owner, &name);
            };
            let first = req
                .variables
                .get("first")
                .and_then(Value::as_u64)
                .unwrap_or(DEFAULT_PAGE_SIZE as u64)
                .clamp(1, st.0.page_size as u64) as usize;
            let start = req
                .variables
                .get("after")
                .and_then(Value::as_str)
                .and_then(|c| c.strip_prefix("cursor:"))
                .and_then(|c| c.parse::<usize>().ok())
                .unwrap_or(0);
            let issues = repo.issues_newest_first();
            let nodes: Vec<Value> = issues
                .iter()
                .skip(start)
                .take(first)
                .map(|i| {
                    let author = i.author.as_ref().map(|login| {
                        if i.author_is_org {
                            json!({"__typename": "Organization", "login": login})
                        } else {
                            json!({"__typename": "User", "login": login, "company": i.company})
                        }
                    });
                    json!({
                        "author": author,
                        "createdAt": i.created_at,
                        "closedAt": i.closed_at,
                        "state": if i.closed_at.is_some() { "CLOSED" } else { "OPEN" },
                        "comments": {"totalCount": i.comments},
                    })
                })
                .collect();
            let end = start + nodes.len();
            let has_next = end < issues.len();
            Json(json!({"data": {"repository": {"issues": {
                "pageInfo": {"hasNextPage": has_next, "endCursor": if nodes.is_empty() { Value::Null } else { json!(format!("cursor:{end}")) }},
                "nodes": nodes,
            }}}}))
            .into_response()
        }
        Some("PullRequestCounts") => {
            if let Err(r) = st.gate(&full, Endpoint::PullRequests) {
                return r;
            }
            let fx = st.0.fixtures.read().unwrap();
            let Some(repo) = fx.repo(&full) else {
                return graphql_not_found(&owner, &name);
            };
            Json(json!({"data": {"repository": {
                "all": {"totalCount": repo.pull_requests},
                "open": {"totalCount": repo.open_pull_requests},
            }}}))
            .into_response()
        }
        other => (
            StatusCode::BAD_REQUEST,
            Json(json!({"message": format!("unsupported operation {other:?}")})),
        )
            .into_response(),
    }
}

/// Logs the request, enforces the token and stamps rate-limit headers.
async fn observe(State(st): State<MockState>, req: Request, next: Next) -> Response {
    let authorization = req
        .headers()
        .get("authorization")
        .and_then(|v| v.to_str().ok())
        .map(str::to_string);
    let (parts, body) = req.into_parts();
    let bytes = axum::body::to_bytes(body, 1 << 20).await.unwrap_or_default();
    let operation = serde_json::from_slice::<Value>(&bytes)
        .ok()
        .and_then(|v| v.get("operationName").and_then(Value::as_str).map(str::to_string));
    st.0.log.lock().unwrap().push(LoggedRequest {
        method: parts.method.to_string(),
        path: parts.uri.path().to_string(),
        operation,
        at: Instant::now(),
        authorization: authorization.clone(),
    });

    let quota = *st.0.quota.lock().unwrap();
    let (remaining, reset_in) = quota
        .map(|q| (q.remaining, q.reset_in))
        .unwrap_or((4999, Duration::from_secs(3600)));
    let reset = (Utc::now() + reset_in).timestamp() as u64;

    let mut resp = match &st.0.token {
        Some(token) if authorization.as_deref() != Some(&format!("Bearer {token}")) => (
            StatusCode::UNAUTHORIZED,
            Json(json!({"message": "Bad credentials"})),
        )
            .into_response(),
        _ => next.run(Request::from_parts(parts, Body::from(bytes))).await,
    };
    let h = resp.headers_mut();
    if !h.contains_key("x-ratelimit-remaining") {
        h.insert("x-ratelimit-limit", HeaderValue::from(5000u64));
        h.insert("x-ratelimit-remaining", HeaderValue::from(remaining));
        h.insert("x-ratelimit-reset", HeaderValue::from(reset));
    }
    resp
}

pub fn router(state: MockState) -> Router {
    Router::new()
        .route("/repos/{owner}/{name}", get(repo_summary))
        .route("/repos/{owner}/{name}/contributors", get(contributors))
        .route("/repos/{owner}/{name}/releases", get(releases))
        .route("/repos/{owner}/{name}/dependency-graph/sbom", get(sbom))
        .route("/search/repositories", get(search))
        .route("/graphql", post(graphql))
        .layer(middleware::from_fn_with_state(state.clone(), observe))
        .with_state(state)
}

/// A running mock server on its own thread and runtime; stops when dropped.
pub struct MockHub {
    pub addr: SocketAddr,
    pub state: MockState,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<()>>,
}

impl MockHub {
    /// Serves `state` on an ephemeral localhost port.
    pub fn spawn(state: MockState) -> MockHub {
        Self::spawn_on(state, 0).expect("bind mock server")
    }

    pub fn spawn_on(state: MockState, port: u16) -> std::io::Result<MockHub> {
        let listener = std::net::TcpListener::bind(("127.0.0.1", port))?;
        listener.set_nonblocking(true)?;
        let addr = listener.local_addr()?;
        let (tx, rx) = oneshot::channel::<()>();
        let app = router(state.clone());
        let thread = std::thread::spawn(move || {
            let rt = tokio::runtime::Builder::new_multi_thread()
                .worker_threads(2)
                .enable_all()
                .build()
                .expect("mock runtime");
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::from_std(listener).expect("listener");
                axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = rx.await;
                    })
                    .await
                    .expect("mock server");
            });
        });
        Ok(MockHub {
            addr,
            state,
            shutdown: Some(tx),
            thread: Some(thread),
        })
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }
}

impl Drop for MockHub {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_queries() {
        assert_eq!(parse_star_query("stars:100..1000"), Some((100, Some(1000))));
        assert_eq!(parse_star_query("stars:>=5"), Some((5, None)));
        assert_eq!(parse_star_query("stars:5..*"), Some((5, None)));
        assert_eq!(parse_star_query("language:rust"), None);
    }

    #[test]
    fn bundled_fixture_loads() {
        let fx = Fixtures::three_repos();
        let a = fx.repo("alpha/a").unwrap();
        assert_eq!(a.stars, 120);
        assert_eq!(a.watchers, 30);
        assert_eq!(a.created_at.to_rfc3339(), "2020-01-01T00:00:00+00:00");
    }

    #[test]
    fn faults_are_consumed() {
        let st = MockState::new(Fixtures::default(), None);
        st.add_fault(Fault::status("a/b", Some(Endpoint::Summary), 502, Some(2)));
        assert!(st.take_fault("a/b", Endpoint::Issues).is_none());
        assert!(st.take_fault("x/y", Endpoint::Summary).is_none());
        assert_eq!(st.take_fault("a/b", Endpoint::Summary), Some(FaultKind::Status(502)));
        assert_eq!(st.take_fault("a/b", Endpoint::Summary), Some(FaultKind::Status(502)));
        assert!(st.take_fault("a/b", Endpoint::Summary).is_none());
    }
}
