#![allow(dead_code)]

pub mod oracle;

use std::time::Duration;

use pesto::github::{ApiCredentials, ClientConfig, CredentialSource, GithubClient};
use pesto_mockhub::{FixtureIssue, FixtureRepo, Fixtures, MockHub, MockState};

pub const TOKEN: &str = "ghp_TESTsecret0123456789abcdef";

pub fn hub(fixtures: Fixtures) -> MockHub {
    MockHub::spawn(MockState::new(fixtures, Some(TOKEN.to_string())))
}

pub fn hub_paged(fixtures: Fixtures, page_size: usize) -> MockHub {
    MockHub::spawn(MockState::with_page_size(fixtures, Some(TOKEN.to_string()), page_size))
}

pub fn config_for(hub: &MockHub) -> ClientConfig {
    ClientConfig {
        api_base: hub.base_url(),
        backoff_base: Duration::from_millis(5),
        ..ClientConfig::default()
    }
}

pub fn client_with(hub: &MockHub, tweak: impl FnOnce(&mut ClientConfig)) -> GithubClient {
    let mut cfg = config_for(hub);
    tweak(&mut cfg);
    GithubClient::new(ApiCredentials::new(TOKEN, CredentialSource::Flag).unwrap(), cfg).unwrap()
}

pub fn client(hub: &MockHub) -> GithubClient {
    client_with(hub, |_| {})
}

/// A repository with `n` closed issues, one per hour from 2023-01-01.
pub fn repo_with_issues(full_name: &str, n: usize) -> FixtureRepo {
    let mut r = FixtureRepo::new(full_name, "2020-01-01T00:00:00Z", 10, 2);
    let base: chrono::DateTime<chrono::Utc> = "2023-01-01T00:00:00Z".parse().unwrap();
    r.issues = (0..n)
        .map(|i| FixtureIssue {
            author: Some(format!("user{}", i % 7)),
            company: None,
            author_is_org: false,
            created_at: base + chrono::Duration::hours(i as i64),
            closed_at: Some(base + chrono::Duration::hours(i as i64 + 1)),
            comments: (i % 5) as u64,
        })
        .collect();
    r
}

pub fn star_repos(stars: &[(&str, u64)]) -> Fixtures {
    Fixtures {
        repos: stars
            .iter()
            .map(|(n, s)| FixtureRepo::new(n, "2020-01-01T00:00:00Z", *s, 1))
            .collect(),
    }
}

pub fn core_data(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/data")
        .join(name)
}

pub fn repo_root() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// A running API server on an ephemeral port; stops when dropped.
pub struct TestServer {
    pub base: String,
    pub state: std::sync::Arc<pesto::server::ServerState>,
    stop: Option<tokio::sync::oneshot::Sender<()>>,
}

impl TestServer {
    pub async fn start(
        data: &std::path::Path,
        config: &std::path::Path,
        static_dir: Option<std::path::PathBuf>,
    ) -> TestServer {
        let state = std::sync::Arc::new(pesto::server::ServerState::load(data, config).unwrap());
        let listener = pesto::server::bind(0).await.unwrap();
        let base = format!("http://{}", listener.local_addr().unwrap());
        let (tx, rx) = tokio::sync::oneshot::channel::<()>();
        let st = state.clone();
        tokio::spawn(async move {
            pesto::server::serve(listener, st, static_dir.as_deref(), async {
                let _ = rx.await;
            })
            .await
            .unwrap();
        });
        TestServer { base, state, stop: Some(tx) }
    }

    pub fn url(&self, path: &str) -> String {
        format!("{}{}", self.base, path)
    }
}

impl Drop for TestServer {
    fn drop(&mut self) {
        if let Some(tx) = self.stop.take() {
            let _ = tx.send(());
        }
    }
}

/// Copies the three-candidate fixture and the bundled OSSPAL config into `dir`.
pub fn setup(dir: &std::path::Path) -> (std::path::PathBuf, std::path::PathBuf) {
    let data = dir.join("data.csv");
    std::fs::copy(core_data("three_candidates.csv"), &data).unwrap();
    let config = dir.join("config.json");
    std::fs::write(&config, pesto_core::bundled::OSSPAL).unwrap();
    (data, config)
}

/// Concurrent reloads between two datasets while 100 readers compare: every
/// response must equal the comparison of exactly one whole dataset.
pub async fn reload_storm(readers: usize) -> Result<(), String> {
    let dir = tempfile::tempdir().unwrap();
    let (data, config) = setup(dir.path());
    let full = pesto_core::Dataset::read_csv(&data).unwrap();
    let subset = full.filter(&["angular/angular".to_string(), "reduxjs/redux".to_string()]);
    let model = pesto_core::EvaluationModel::osspal();
    let expect = [
        pesto::compare::compare(&model, &full, &pesto::compare::CompareRequest::default()).unwrap().to_json(),
        pesto::compare::compare(&model, &subset, &pesto::compare::CompareRequest::default()).unwrap().to_json(),
    ];
    let srv = TestServer::start(&data, &config, None).await;
    let http = reqwest::Client::new();

    let writer = {
        let (http, url, data) = (http.clone(), srv.url("/api/reload"), data.clone());
        let (full, subset) = (full.clone(), subset.clone());
        tokio::spawn(async move {
            for i in 0..40 {
                let ds = if i % 2 == 0 { &subset } else { &full };
                ds.write_csv(&data).unwrap();
                let s = http.post(&url).send().await.unwrap().status().as_u16();
                assert_eq!(s, 204);
            }
        })
    };
    let mut tasks = Vec::new();
    for _ in 0..readers {
        let (http, url) = (http.clone(), srv.url("/api/comparison"));
        tasks.push(tokio::spawn(async move {
            let r = http.get(&url).send().await.unwrap();
            (r.status().as_u16(), r.text().await.unwrap())
        }));
    }
    let mut seen = [0usize; 2];
    for t in tasks {
        let (status, body) = t.await.unwrap();
        if status != 200 {
            return Err(format!("reader got HTTP {status}"));
        }
        match expect.iter().position(|e| *e == body) {
            Some(i) => seen[i] += 1,
            None => return Err("response matched neither dataset".into()),
        }
    }
    writer.await.map_err(|e| e.to_string())?;

    std::fs::write(&data, "garbage\n\"unterminated").unwrap();
    let last_good = http.get(srv.url("/api/comparison")).send().await.unwrap().text().await.unwrap();
    let s = http.post(srv.url("/api/reload")).send().await.unwrap().status().as_u16();
    let after = http.get(srv.url("/api/comparison")).send().await.unwrap().text().await.unwrap();
    if s != 500 || after != last_good {
        return Err("invalid reload replaced the snapshot".into());
    }
    Ok(())
}

