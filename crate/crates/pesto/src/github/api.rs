//! Typed GitHub operations. REST serves the repository summary,
//! contributors, releases, the SBOM and search; GraphQL serves issue pages
//! (author, affiliation and comment counts in one query) and PR counts.

use std::collections::BTreeSet;

use chrono::{DateTime, Utc};
use pesto_core::record::{IssueRecord, IssueState, RawRepoData, RepoSummary};
use reqwest::header::HeaderMap;
use reqwest::Method;
use serde_json::{json, Value};

use super::{ApiResponse, GithubClient, GithubError, Page, RepoId, SEARCH_RESULT_CEILING};

const ISSUE_PAGE_QUERY: &str = r#"query IssuePage($owner: String!, $name: String!, $first: Int!, $after: String) {
  repository(owner: $owner, name: $name) {
    issues(first: $first, after: $after, orderBy: {field: CREATED_AT, direction: DESC}) {
      pageInfo { hasNextPage endCursor }
      nodes {
        author { __typename login ... on User { company } }
        createdAt
        closedAt
        state
        comments { totalCount }
      }
    }
  }
}"#;

const PULL_REQUEST_COUNTS_QUERY: &str = r#"query PullRequestCounts($owner: String!, $name: String!) {
  repository(owner: $owner, name: $name) {
    all: pullRequests { totalCount }
    open: pullRequests(states: OPEN) { totalCount }
  }
}"#;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PullRequestCounts {
    pub total: u64,
    pub open: u64,
}

fn next_link(headers: &HeaderMap) -> Option<String> {
    let link = headers.get("link")?.to_str().ok()?;
    link.split(',').find_map(|part| {
        let (url, rel) = part.split_once(';')?;
        rel.contains("rel=\"next\"")
            .then(|| url.trim().trim_start_matches('<').trim_end_matches('>').to_string())
    })
}

fn decode_err(path: &str, message: impl Into<String>) -> GithubError {
    GithubError::Decode {
        path: path.to_string(),
        message: message.into(),
    }
}

fn u64_field(v: &Value, key: &str, path: &str) -> Result<u64, GithubError> {
    v.get(key)
        .and_then(Value::as_u64)
        .ok_or_else(|| decode_err(path, format!("missing integer field {key}")))
}

fn time_field(v: &Value, key: &str, path: &str) -> Result<Option<DateTime<Utc>>, GithubError> {
    match v.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => s
            .parse::<DateTime<Utc>>()
            .map(Some)
            .map_err(|e| decode_err(path, format!("{key}: {e}"))),
        Some(other) => Err(decode_err(path, format!("{key}: expected timestamp, got {other}"))),
    }
}

impl GithubClient {
    async fn get(&self, url: &str) -> Result<ApiResponse, GithubError> {
        self.execute(Method::GET, url, None).await
    }

    async fn graphql(&self, repo: &RepoId, query: &str, operation: &str, variables: Value) -> Result<Value, GithubError> {
        let body = json!({"query": query, "operationName": operation, "variables": variables});
        let url = self.url("/graphql");
        let resp = self.execute(Method::POST, &url, Some(&body)).await?;
        if let Some(errors) = resp.body.get("errors").and_then(Value::as_array) {
            let kind = |k: &str| errors.iter().any(|e| e.get("type").and_then(Value::as_str) == Some(k));
            if kind("NOT_FOUND") {
                return Err(GithubError::NotFound(repo.to_string()));
            }
            if kind("RATE_LIMITED") {
                return Err(GithubError::RateLimited {
                    reset_at: super::reset_from(&resp.headers),
                });
            }
            let message = errors
                .iter()
                .filter_map(|e| e.get("message").and_then(Value::as_str))
                .collect::<Vec<_>>()
                .join("; ");
            return Err(GithubError::Http {
                status: resp.status.as_u16(),
                path: "/graphql".into(),
                message,
            });
        }
        match resp.body.pointer("/data/repository") {
            Some(Value::Null) | None => Err(GithubError::NotFound(repo.to_string())),
            Some(v) => Ok(v.clone()),
        }
    }

    /// Walks a REST listing through its `Link: rel="next"` chain, folding
    /// each page's JSON array into `acc`.
    async fn fold_rest_pages<A>(
        &self,
        first_url: String,
        mut acc: A,
        mut f: impl FnMut(&mut A, &[Value], &str) -> Result<(), GithubError>,
    ) -> Result<A, GithubError> {
        let mut url = Some(first_url);
        while let Some(u) = url.take() {
            let page = self.rest_page(&u).await?;
            f(&mut acc, &page.items, &u)?;
            url = page.next_cursor;
        }
        Ok(acc)
    }

    async fn rest_page(&self, url: &str) -> Result<Page<Value>, GithubError> {
        let resp = self.get(url).await?;
        let items = match resp.body {
            Value::Null => Vec::new(),
            Value::Array(items) => items,
            other => return Err(decode_err(url, format!("expected an array, got {other}"))),
        };
        Ok(Page {
            items,
            next_cursor: next_link(&resp.headers),
        })
    }

    pub async fn fetch_repo_summary(&self, repo: &RepoId) -> Result<RepoSummary, GithubError> {
        let path = format!("/repos/{}/{}", repo.owner, repo.name);
        let resp = self.get(&self.url(&path)).await?;
        let b = &resp.body;
        Ok(RepoSummary {
            owner: repo.owner.clone(),
            name: repo.name.clone(),
            created_at: time_field(b, "created_at", &path)?
                .ok_or_else(|| decode_err(&path, "missing created_at"))?,
            star_count: u64_field(b, "stargazers_count", &path)?,
            watcher_count: u64_field(b, "subscribers_count", &path)?,
            open_issues_reported: u64_field(b, "open_issues_count", &path)?,
            default_branch: b
                .get("default_branch")
                .and_then(Value::as_str)
                .unwrap_or_default()
                .to_string(),
            archived: b.get("archived").and_then(Value::as_bool).unwrap_or(false),
            fetched_at: Utc::now(),
        })
    }

    /// One newest-first page of issues (at most `first`, capped by the page size).
    pub async fn fetch_issue_page(
        &self,
        repo: &RepoId,
        cursor: Option<&str>,
        first: u32,
    ) -> Result<Page<IssueRecord>, GithubError> {
        let first = first.clamp(1, self.config().page_size.max(1));
        let vars = json!({"owner": repo.owner, "name": repo.name, "first": first, "after": cursor});
        let data = self.graphql(repo, ISSUE_PAGE_QUERY, "IssuePage", vars).await?;
        let path = "/graphql IssuePage";
        let conn = data
            .get("issues")
            .ok_or_else(|| decode_err(path, "missing issues connection"))?;
        let nodes = conn
            .get("nodes")
            .and_then(Value::as_array)
            .ok_or_else(|| decode_err(path, "missing nodes"))?;
        let items = nodes
            .iter()
            .map(|n| parse_issue(n, path))
            .collect::<Result<Vec<_>, _>>()?;
        let has_next = conn
            .pointer("/pageInfo/hasNextPage")
            .and_then(Value::as_bool)
            .unwrap_or(false);
        let next_cursor = if has_next {
            conn.pointer("/pageInfo/endCursor")
                .and_then(Value::as_str)
                .map(str::to_string)
        } else {
            None
        };
        Ok(Page { items, next_cursor })
    }

    /// Newest issues up to the budget's sample cap.
    pub async fn fetch_issue_sample(&self, repo: &RepoId) -> Result<Vec<IssueRecord>, GithubError> {
        let cap = self.budget().max_issue_sample as usize;
        let mut out = Vec::new();
        let mut cursor: Option<String> = None;
        loop {
            let want = (cap - out.len()).min(u32::MAX as usize) as u32;
            let page = self.fetch_issue_page(repo, cursor.as_deref(), want).await?;
            out.extend(page.items);
            match page.next_cursor {
                Some(c) if out.len() < cap => cursor = Some(c),
                _ => break,
            }
        }
        out.truncate(cap);
        Ok(out)
    }

    pub async fn fetch_pull_request_counts(&self, repo: &RepoId) -> Result<PullRequestCounts, GithubError> {
        let vars = json!({"owner": repo.owner, "name": repo.name});
        let data = self
            .graphql(repo, PULL_REQUEST_COUNTS_QUERY, "PullRequestCounts", vars)
            .await?;
        let count = |alias: &str| {
            data.pointer(&format!("/{alias}/totalCount"))
                .and_then(Value::as_u64)
                .ok_or_else(|| decode_err("/graphql PullRequestCounts", format!("missing {alias}.totalCount")))
        };
        Ok(PullRequestCounts {
            total: count("all")?,
            open: count("open")?,
        })
    }

    /// Pull requests in all states.
    pub async fn fetch_pull_request_count(&self, repo: &RepoId) -> Result<u64, GithubError> {
        Ok(self.fetch_pull_request_counts(repo).await?.total)
    }

    /// Distinct non-anonymous contributors across all pages.
    pub async fn fetch_contributor_count(&self, repo: &RepoId) -> Result<u64, GithubError> {
        let url = self.url(&format!(
            "/repos/{}/{}/contributors?per_page={}",
            repo.owner,
            repo.name,
            self.config().page_size
        ));
        let logins = self
            .fold_rest_pages(url, BTreeSet::new(), |acc, items, _| {
                acc.extend(
                    items
                        .iter()
                        .filter_map(|c| c.get("login").and_then(Value::as_str))
                        .map(str::to_string),
                );
                Ok(())
            })
            .await?;
        Ok(logins.len() as u64)
    }

    /// Packages in the dependency-graph SBOM, excluding the described root.
    /// `None` when the repository has no dependency graph.
    pub async fn fetch_dependency_count(&self, repo: &RepoId) -> Result<Option<u64>, GithubError> {
        let url = self.url(&format!("/repos/{}/{}/dependency-graph/sbom", repo.owner, repo.name));
        let resp = match self.get(&url).await {
            Ok(r) => r,
            Err(GithubError::NotFound(_)) => return Ok(None),
            Err(GithubError::Http { status: 403, .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        Ok(count_sbom_packages(&resp.body, repo))
    }

    /// Sum of asset download counts over all releases.
    pub async fn fetch_release_download_total(&self, repo: &RepoId) -> Result<u64, GithubError> {
        let url = self.url(&format!(
            "/repos/{}/{}/releases?per_page={}",
            repo.owner,
            repo.name,
            self.config().page_size
        ));
        self.fold_rest_pages(url, 0u64, |total, releases, _| {
            for rel in releases {
                for asset in rel.get("assets").and_then(Value::as_array).into_iter().flatten() {
                    *total += asset.get("download_count").and_then(Value::as_u64).unwrap_or(0);
                }
            }
            Ok(())
        })
        .await
    }

    /// Repositories with a star count in `[min_stars, max_stars]`, ordered by
    /// descending stars then full name, at most `limit` of them.
    pub async fn search_repos_by_stars(
        &self,
        min_stars: u64,
        max_stars: Option<u64>,
        limit: usize,
    ) -> Result<Vec<RepoId>, GithubError> {
        validate_star_range(min_stars, max_stars, limit)?;
        let q = match max_stars {
            Some(max) => format!("stars:{min_stars}..{max}"),
            None => format!("stars:>={min_stars}"),
        };
        let url = self.url(&format!(
            "/search/repositories?q={}&sort=stars&order=desc&per_page={}",
            q.replace('>', "%3E").replace('=', "%3D"),
            self.config().page_size
        ));
        let mut hits: Vec<(u64, RepoId)> = Vec::new();
        let mut next = Some(url);
        while let Some(u) = next.take() {
            let resp = self.get(&u).await?;
            let items = resp
                .body
                .get("items")
                .and_then(Value::as_array)
                .ok_or_else(|| decode_err("/search/repositories", "missing items"))?;
            for item in items {
                let stars = u64_field(item, "stargazers_count", "/search/repositories")?;
                let full = item.get("full_name").and_then(Value::as_str).unwrap_or_default();
                if stars >= min_stars && max_stars.is_none_or(|m| stars <= m) {
                    if let Ok(id) = full.parse::<RepoId>() {
                        hits.push((stars, id));
                    }
                }
            }
            if hits.len() < limit {
                next = next_link(&resp.headers);
            }
        }
        hits.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.to_string().cmp(&b.1.to_string())));
        hits.dedup_by(|a, b| a.1 == b.1);
        Ok(hits.into_iter().take(limit).map(|(_, id)| id).collect())
    }

    /// Everything needed to build one candidate record.
    ///
    /// The summary is fetched first so a missing repository fails fast; the
    /// remaining listings run concurrently within the session's in-flight limit.
    /// The first error wins, but only after every started request finished.
    pub async fn fetch_raw_repo(&self, repo: &RepoId) -> Result<RawRepoData, GithubError> {
        let crawl_timestamp = Utc::now();
        let summary = self.fetch_repo_summary(repo).await?;
        // join!, not try_join!: cancelling siblings mid-flight would leave
        // requests counted against the budget that the server never saw.
        let (issues, prs, contributors, deps, downloads) = tokio::join!(
            self.fetch_issue_sample(repo),
            self.fetch_pull_request_counts(repo),
            self.fetch_contributor_count(repo),
            self.fetch_dependency_count(repo),
            self.fetch_release_download_total(repo),
        );
        let (issues, prs, contributors, deps, downloads) = (issues?, prs?, contributors?, deps?, downloads?);
        Ok(RawRepoData {
            issue_sample_size: issues.len() as u64,
            summary,
            issues,
            pull_request_count: prs.total,
            open_pull_request_count: prs.open,
            contributor_count: contributors,
            dependency_count: deps,
            download_total: downloads,
            crawl_timestamp,
        })
    }
}

pub fn validate_star_range(min: u64, max: Option<u64>, limit: usize) -> Result<(), GithubError> {
    if limit == 0 {
        return Err(GithubError::InvalidRange("limit must be at least 1".into()));
    }
    if limit > SEARCH_RESULT_CEILING {
        return Err(GithubError::InvalidRange(format!(
            "limit {limit} exceeds the search API ceiling of {SEARCH_RESULT_CEILING}"
        )));
    }
    if let Some(max) = max {
        if min > max {
            return Err(GithubError::InvalidRange(format!("minimum {min} exceeds maximum {max}")));
        }
    }
    Ok(())
}

fn parse_issue(node: &Value, path: &str) -> Result<IssueRecord, GithubError> {
    let author = node.get("author").filter(|a| !a.is_null());
    let login = author
        .and_then(|a| a.get("login"))
        .and_then(Value::as_str)
        .map(str::to_string);
    let is_org = author
        .and_then(|a| a.get("__typename"))
        .and_then(Value::as_str)
        == Some("Organization");
    let has_company = author
        .and_then(|a| a.get("company"))
        .and_then(Value::as_str)
        .is_some_and(|c| !c.trim().is_empty());
    let closed_at = time_field(node, "closedAt", path)?;
    let state = match node.get("state").and_then(Value::as_str) {
        Some("CLOSED") => IssueState::Closed,
        Some("OPEN") => IssueState::Open,
        _ if closed_at.is_some() => IssueState::Closed,
        _ => IssueState::Open,
    };
    Ok(IssueRecord {
        author: login,
        author_org_affiliated: is_org || has_company,
        created_at: time_field(node, "createdAt", path)?
            .ok_or_else(|| decode_err(path, "issue without createdAt"))?,
        closed_at,
        comment_count: node
            .pointer("/comments/totalCount")
            .and_then(Value::as_u64)
            .unwrap_or(0),
        state,
        is_pull_request: node.get("pull_request").is_some_and(|p| !p.is_null()),
    })
}

/// Root packages are those the document DESCRIBES; if none are declared,
/// the package named after the repository is taken as root.
fn count_sbom_packages(body: &Value, repo: &RepoId) -> Option<u64> {
    let sbom = body.get("sbom")?;
    let packages = sbom.get("packages")?.as_array()?;
    if packages.is_empty() {
        return None;
    }
    let doc_id = sbom
        .get("SPDXID")
        .and_then(Value::as_str)
        .unwrap_or("SPDXRef-DOCUMENT");
    let mut roots: BTreeSet<&str> = sbom
        .get("documentDescribes")
        .and_then(Value::as_array)
        .into_iter()
        .flatten()
        .filter_map(Value::as_str)
        .collect();
    for rel in sbom.get("relationships").and_then(Value::as_array).into_iter().flatten() {
        let from = rel.get("spdxElementId").and_then(Value::as_str);
        let kind = rel.get("relationshipType").and_then(Value::as_str);
        if from == Some(doc_id) && kind == Some("DESCRIBES") {
            if let Some(to) = rel.get("relatedSpdxElement").and_then(Value::as_str) {
                roots.insert(to);
            }
        }
    }
    let repo_pkg = format!("com.github.{repo}");
    let is_root = |p: &Value| {
        let id = p.get("SPDXID").and_then(Value::as_str).unwrap_or("");
        if roots.is_empty() {
            p.get("name").and_then(Value::as_str) == Some(repo_pkg.as_str())
        } else {
            roots.contains(id)
        }
    };
    Some(packages.iter().filter(|p| !is_root(p)).count() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use reqwest::header::HeaderValue;

    #[test]
    fn link_header_next() {
        let mut h = HeaderMap::new();
        h.insert(
            "link",
            HeaderValue::from_static(
                "<https://api.github.com/x?page=2>; rel=\"next\", <https://api.github.com/x?page=5>; rel=\"last\"",
            ),
        );
        assert_eq!(next_link(&h).as_deref(), Some("https://api.github.com/x?page=2"));
        h.insert("link", HeaderValue::from_static("<https://api.github.com/x?page=1>; rel=\"prev\""));
        assert_eq!(next_link(&h), None);
        assert_eq!(next_link(&HeaderMap::new()), None);
    }

    #[test]
    fn star_range_validation() {
        assert!(validate_star_range(0, None, 0).is_err());
        assert!(validate_star_range(10, Some(5), 10).is_err());
        assert!(validate_star_range(0, None, 1001).is_err());
        assert!(validate_star_range(5, Some(5), 1000).is_ok());
    }

    #[test]
    fn issue_affiliation() {
        let user = json!({"author": {"__typename": "User", "login": "a", "company": "Acme"}, "createdAt": "2020-01-01T00:00:00Z", "closedAt": null, "state": "OPEN", "comments": {"totalCount": 3}});
        let i = parse_issue(&user, "p").unwrap();
        assert!(i.author_org_affiliated);
        assert_eq!(i.comment_count, 3);
        assert_eq!(i.state, IssueState::Open);

        let blank = json!({"author": {"__typename": "User", "login": "b", "company": "  "}, "createdAt": "2020-01-01T00:00:00Z", "state": "CLOSED", "closedAt": "2020-01-02T00:00:00Z", "comments": {"totalCount": 0}});
        let i = parse_issue(&blank, "p").unwrap();
        assert!(!i.author_org_affiliated);
        assert_eq!(i.state, IssueState::Closed);

        let org = json!({"author": {"__typename": "Organization", "login": "o"}, "createdAt": "2020-01-01T00:00:00Z", "comments": {"totalCount": 0}});
        assert!(parse_issue(&org, "p").unwrap().author_org_affiliated);

        let ghost = json!({"author": null, "createdAt": "2020-01-01T00:00:00Z", "comments": {"totalCount": 0}});
        let i = parse_issue(&ghost, "p").unwrap();
        assert_eq!(i.author, None);
        assert_eq!(i.author_login(), "ghost");
    }

    #[test]
    fn sbom_root_exclusion() {
        let repo: RepoId = "o/n".parse().unwrap();
        let described = json!({"sbom": {"SPDXID": "SPDXRef-DOCUMENT", "packages": [
            {"SPDXID": "SPDXRef-root", "name": "com.github.o/n"},
            {"SPDXID": "SPDXRef-a", "name": "a"},
            {"SPDXID": "SPDXRef-b", "name": "b"}
        ], "relationships": [{"spdxElementId": "SPDXRef-DOCUMENT", "relationshipType": "DESCRIBES", "relatedSpdxElement": "SPDXRef-root"}]}});
        assert_eq!(count_sbom_packages(&described, &repo), Some(2));

        let by_name = json!({"sbom": {"packages": [
            {"SPDXID": "SPDXRef-x", "name": "com.github.o/n"},
            {"SPDXID": "SPDXRef-a", "name": "a"}
        ]}});
        assert_eq!(count_sbom_packages(&by_name, &repo), Some(1));

        assert_eq!(count_sbom_packages(&json!({"sbom": {"packages": []}}), &repo), None);
        assert_eq!(count_sbom_packages(&json!({}), &repo), None);
    }
}
