mod common;

use std::time::{Duration, Instant};

use common::oracle::expected_row;
use common::*;
use pesto::crawler::{crawl_candidates, discover_by_stars, recrawl, CrawlError, RepoStatus};
use pesto_core::{CandidateRecord, Dataset, Metric};
use pesto_mockhub::{Endpoint, Fault, FaultKind, Fixtures};

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn assert_matches_fixture(rec: &CandidateRecord, fixtures: &Fixtures) {
    let repo = fixtures.repo(&rec.full_name).unwrap();
    let want = expected_row(repo, rec.crawled_at);
    for m in Metric::ALL {
        assert_eq!(rec.metric(m), want[m.as_str()], "{} {}", rec.full_name, m.as_str());
    }
}

#[tokio::test]
async fn three_fixture_repos_crawl_to_oracle_rows() {
    let fixtures = Fixtures::three_repos();
    let hub = hub(fixtures.clone());
    let c = client(&hub);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("data.csv");

    let started = Instant::now();
    let report = crawl_candidates(&c, &names(&["alpha/a", "bravo/b", "charlie/c"]), &out)
        .await
        .unwrap();
    assert!(started.elapsed() < Duration::from_secs(10));
    assert!(report.all_ok(), "{}", report.to_text());
    assert_eq!(report.request_count, hub.state.request_count() as u64);
    assert_eq!(
        report.outcomes.iter().map(|o| o.requests).sum::<u64>(),
        report.request_count
    );

    let ds = Dataset::read_csv(&out).unwrap();
    assert_eq!(ds.full_names().collect::<Vec<_>>(), ["alpha/a", "bravo/b", "charlie/c"]);
    for rec in ds.records() {
        assert_matches_fixture(rec, &fixtures);
    }

    // time-independent values, frozen
    let a = ds.get("alpha/a").unwrap();
    assert_eq!(
        (a.avg_issue_close_time_days, a.avg_issue_comments, a.issue_raiser_count, a.org_issue_raiser_count),
        (Some(4.5), Some(3.666667), 5, 2)
    );
    assert_eq!((a.open_issue_count, a.dependency_count, a.download_total), (2, Some(4), 35));
    let b = ds.get("bravo/b").unwrap();
    assert_eq!(
        (b.avg_issue_close_time_days, b.avg_issue_comments, b.issue_raiser_count, b.org_issue_raiser_count),
        (Some(8.875), Some(5.0), 3, 2)
    );
    assert_eq!((b.open_issue_count, b.dependency_count, b.contributor_count), (0, Some(0), 5));
    let ch = ds.get("charlie/c").unwrap();
    assert_eq!(
        (ch.avg_issue_active_time_days, ch.avg_issue_close_time_days, ch.avg_issue_comments),
        (None, None, None)
    );
    assert_eq!((ch.dependency_count, ch.download_total, ch.issue_sample_size), (None, 7, 0));
}

#[tokio::test]
async fn failures_are_isolated_per_repo() {
    let fixtures = Fixtures::three_repos();
    let hub = hub(fixtures.clone());
    hub.state.add_fault(Fault::status("bravo/b", Some(Endpoint::Contributors), 500, None));
    let c = client(&hub);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("data.csv");

    let list = names(&["alpha/a", "missing/repo", "bad name", "bravo/b", "charlie/c"]);
    let report = crawl_candidates(&c, &list, &out).await.unwrap();
    let status: Vec<bool> = report.outcomes.iter().map(|o| o.is_ok()).collect();
    assert_eq!(status, [true, false, false, false, true]);
    assert_eq!(report.outcomes[2].requests, 0);
    match &report.outcomes[1].status {
        RepoStatus::Failed { reason } => assert!(reason.contains("not found"), "{reason}"),
        s => panic!("{s:?}"),
    }
    assert_eq!(report.request_count, hub.state.request_count() as u64);

    let ds = Dataset::read_csv(&out).unwrap();
    assert_eq!(ds.full_names().collect::<Vec<_>>(), ["alpha/a", "charlie/c"]);
    for rec in ds.records() {
        assert_matches_fixture(rec, &fixtures);
    }
    let text = format!("{}{}", report.to_text(), report.to_json());
    assert!(!text.contains(TOKEN));
}

#[tokio::test]
async fn existing_rows_survive_a_failing_crawl() {
    let hub = hub(Fixtures::three_repos());
    let c = client(&hub);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("data.csv");
    crawl_candidates(&c, &names(&["alpha/a", "bravo/b"]), &out).await.unwrap();
    let before = std::fs::read_to_string(&out).unwrap();

    hub.state.add_fault(Fault {
        repo: None,
        endpoint: None,
        kind: FaultKind::Status(503),
        times: None,
    });
    let report = crawl_candidates(&c, &names(&["alpha/a", "charlie/c"]), &out).await.unwrap();
    assert_eq!(report.failed(), 2);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), before);
}

#[tokio::test]
async fn rejected_token_aborts_the_crawl() {
    let hub = hub(Fixtures::three_repos());
    let bad = pesto::github::GithubClient::new(
        pesto::github::ApiCredentials::new("nope", pesto::github::CredentialSource::EnvVar).unwrap(),
        config_for(&hub),
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("data.csv");
    let err = crawl_candidates(&bad, &names(&["alpha/a", "bravo/b"]), &out).await.unwrap_err();
    assert!(matches!(err, CrawlError::FatalAuth));
    assert!(!out.exists());
}

#[tokio::test]
async fn rate_limited_repo_is_retried_after_reset() {
    let fixtures = Fixtures::three_repos();
    let hub = hub(fixtures.clone());
    hub.state.add_fault(Fault {
        repo: Some("bravo/b".into()),
        endpoint: Some(Endpoint::Summary),
        kind: FaultKind::RateLimited { reset_in_secs: 1 },
        times: Some(1),
    });
    let c = client(&hub);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("data.csv");
    let report = crawl_candidates(&c, &names(&["alpha/a", "bravo/b"]), &out).await.unwrap();
    assert!(report.all_ok(), "{}", report.to_text());
    assert_eq!(report.request_count, hub.state.request_count() as u64);
    let ds = Dataset::read_csv(&out).unwrap();
    assert_matches_fixture(ds.get("bravo/b").unwrap(), &fixtures);
}

#[tokio::test]
async fn budget_exhaustion_stops_the_session() {
    let hub = hub(Fixtures::three_repos());
    let c = client_with(&hub, |cfg| cfg.budget.max_requests = 8);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("data.csv");
    let report = crawl_candidates(&c, &names(&["alpha/a", "bravo/b", "charlie/c"]), &out)
        .await
        .unwrap();
    assert!(report.outcomes[0].is_ok());
    assert!(!report.outcomes[1].is_ok() && !report.outcomes[2].is_ok());
    assert_eq!(report.outcomes[2].requests, 0);
    assert!(hub.state.request_count() <= 8);
    assert_eq!(report.request_count, hub.state.request_count() as u64);
    assert_eq!(Dataset::read_csv(&out).unwrap().len(), 1);
}

#[tokio::test]
async fn recrawl_updates_rows_in_place() {
    let hub = hub(Fixtures::three_repos());
    let c = client(&hub);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("data.csv");
    crawl_candidates(&c, &names(&["charlie/c", "alpha/a", "bravo/b"]), &out).await.unwrap();

    hub.state.update_fixtures(|f| {
        f.repo_mut("alpha/a").unwrap().stars = 999;
        f.repo_mut("charlie/c").unwrap().contributors = vec!["zed".into()];
    });
    let report = recrawl(&c, &out).await.unwrap();
    assert!(report.all_ok());
    let ds = Dataset::read_csv(&out).unwrap();
    assert_eq!(ds.full_names().collect::<Vec<_>>(), ["charlie/c", "alpha/a", "bravo/b"]);
    assert_eq!(ds.get("alpha/a").unwrap().star_count, 999);
    assert_eq!(ds.get("charlie/c").unwrap().contributor_count, 1);

    let empty = dir.path().join("empty.csv");
    Dataset::empty().write_csv(&empty).unwrap();
    let bytes = std::fs::read(&empty).unwrap();
    let before = hub.state.request_count();
    let report = recrawl(&c, &empty).await.unwrap();
    assert!(report.outcomes.is_empty());
    assert_eq!(hub.state.request_count(), before);
    assert_eq!(std::fs::read(&empty).unwrap(), bytes);
}

#[tokio::test]
async fn discovery_lists_without_crawling() {
    let hub = hub(star_repos(&[("o/a", 50), ("o/b", 500), ("o/c", 5000)]));
    let c = client(&hub);
    let found = discover_by_stars(&c, 100, Some(1000), 50).await.unwrap();
    assert_eq!(found.iter().map(|r| r.to_string()).collect::<Vec<_>>(), ["o/b"]);
    assert!(hub.state.requests().iter().all(|r| r.path == "/search/repositories"));
}
