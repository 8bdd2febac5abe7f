//! HTTP JSON API over one dataset and one evaluation model.
//!
//! State is a single `Arc<Snapshot>` behind a lock; every handler clones the
//! Arc once and computes against that pair, so a response never mixes two
//! reloads. Writers (reload, config PUT) are serialized and swap the whole
//! snapshot only after the new data validated.

use std::future::Future;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use pesto_core::{Dataset, DatastoreError, EvaluationModel, InvalidConfig};
use serde_json::json;
use thiserror::Error;
use tower_http::cors::{AllowOrigin, CorsLayer};
use tower_http::services::ServeDir;

use crate::compare::{compare, CompareError, CompareRequest};

pub const DEFAULT_PORT: u16 = 8030;

#[derive(Debug, Error)]
pub enum ServerError {
    #[error("cannot load dataset: {0}")]
    Data(#[from] DatastoreError),
    #[error("cannot load config: {0}")]
    Config(#[from] InvalidConfig),
    #[error("cannot listen on {addr}: {message}")]
    Bind { addr: SocketAddr, message: String },
    #[error("server failed: {0}")]
    Io(#[from] std::io::Error),
}

/// A consistent (dataset, model) pair.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub dataset: Dataset,
    pub model: EvaluationModel,
}

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub data_path: PathBuf,
    pub config_path: PathBuf,
    pub static_dir: Option<PathBuf>,
    pub port: u16,
}

pub struct ServerState {
    snapshot: RwLock<Arc<Snapshot>>,
    writer: tokio::sync::Mutex<()>,
    pub data_path: PathBuf,
    pub config_path: PathBuf,
    pub started_at: DateTime<Utc>,
}

impl ServerState {
    /// Reads the dataset (required) and the config; a missing config file
    /// means the bundled OSSPAL model.
    pub fn load(data_path: &Path, config_path: &Path) -> Result<Self, ServerError> {
        let dataset = Dataset::read_csv(data_path)?;
        let model = if config_path.exists() {
            EvaluationModel::load(config_path)?
        } else {
            log::info!("{} not found; using the bundled OSSPAL model", config_path.display());
            EvaluationModel::osspal()
        };
        Ok(ServerState {
            snapshot: RwLock::new(Arc::new(Snapshot { dataset, model })),
            writer: tokio::sync::Mutex::new(()),
            data_path: data_path.to_path_buf(),
            config_path: config_path.to_path_buf(),
            started_at: Utc::now(),
        })
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.snapshot.read().unwrap().clone()
    }

    fn swap(&self, next: Snapshot) {
        *self.snapshot.write().unwrap() = Arc::new(next);
    }

    /// Re-reads the CSV; on failure the current snapshot stays in place.
    pub async fn reload(&self) -> Result<(), DatastoreError> {
        let _w = self.writer.lock().await;
        let path = self.data_path.clone();
        let dataset = tokio::task::spawn_blocking(move || Dataset::read_csv(&path))
            .await
            .expect("reload task")?;
        let model = self.snapshot().model.clone();
        self.swap(Snapshot { dataset, model });
        Ok(())
    }

    /// Validates, persists, then activates a new model.
    pub async fn replace_model(&self, text: &str) -> Result<(), ApiError> {
        let model = EvaluationModel::from_json_str(text).map_err(|e| ApiError::Unprocessable(e.to_string()))?;
        let _w = self.writer.lock().await;
        write_atomic(&self.config_path, model.to_json_pretty().as_bytes())
            .map_err(|e| ApiError::Internal(format!("cannot persist config: {e}")))?;
        let dataset = self.snapshot().dataset.clone();
        self.swap(Snapshot { dataset, model });
        Ok(())
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}

#[derive(Debug)]
pub enum ApiError {
    NotFound(String),
    Unprocessable(String),
    Internal(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, msg) = match self {
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, m),
            ApiError::Unprocessable(m) => (StatusCode::UNPROCESSABLE_ENTITY, m),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, m),
        };
        (status, Json(json!({ "error": msg }))).into_response()
    }
}

type AppState = Arc<ServerState>;

async fn candidates(State(st): State<AppState>) -> Response {
    Json(st.snapshot().dataset.records().to_vec()).into_response()
}

async fn get_config(State(st): State<AppState>) -> Response {
    Json(st.snapshot().model.clone()).into_response()
}

async fn put_config(State(st): State<AppState>, body: Bytes) -> Result<StatusCode, ApiError> {
    let text = std::str::from_utf8(&body).map_err(|_| ApiError::Unprocessable("body is not UTF-8".into()))?;
    st.replace_model(text).await?;
    Ok(StatusCode::NO_CONTENT)
}

async fn comparison(
    State(st): State<AppState>,
    Query(params): Query<Vec<(String, String)>>,
) -> Result<Response, ApiError> {
    let category = params
        .iter()
        .find(|(k, _)| k == "category")
        .map(|(_, v)| v.clone());
    let candidates = CompareRequest::parse_candidates(
        params
            .iter()
            .filter(|(k, _)| k == "candidates")
            .map(|(_, v)| v.as_str()),
    );
    let snap = st.snapshot();
    let result = compare(&snap.model, &snap.dataset, &CompareRequest { category, candidates }).map_err(
        |e| match e {
            CompareError::UnknownCategory { .. } | CompareError::UnknownCandidate(_) => {
                ApiError::NotFound(e.to_string())
            }
        },
    )?;
    Ok((
        [(header::CONTENT_TYPE, HeaderValue::from_static("application/json"))],
        result.to_json(),
    )
        .into_response())
}

async fn reload(State(st): State<AppState>) -> Result<StatusCode, ApiError> {
    st.reload().await.map_err(|e| {
        log::warn!("reload failed; keeping previous dataset: {e}");
        ApiError::Internal(format!("reload failed, previous dataset kept: {e}"))
    })?;
    Ok(StatusCode::NO_CONTENT)
}

async fn health(State(st): State<AppState>) -> Response {
    let snap = st.snapshot();
    Json(json!({
        "status": "ok",
        "dataset_rows": snap.dataset.len(),
        "model_name": snap.model.model_name,
    }))
    .into_response()
}

fn local_origin(origin: &HeaderValue) -> bool {
    let Ok(o) = origin.to_str() else { return false };
    let host = o
        .strip_prefix("http://")
        .or_else(|| o.strip_prefix("https://"))
        .unwrap_or("");
    let host = host.rsplit_once(':').map_or(host, |(h, port)| {
        if port.chars().all(|c| c.is_ascii_digit()) {
            h
        } else {
            host
        }
    });
    matches!(host, "localhost" | "127.0.0.1" | "[::1]")
}

pub fn router(state: AppState, static_dir: Option<&Path>) -> Router {
    let cors = CorsLayer::new()
        .allow_origin(AllowOrigin::predicate(|o, _| local_origin(o)))
        .allow_methods(tower_http::cors::Any)
        .allow_headers([header::CONTENT_TYPE]);
    let api = Router::new()
        .route("/api/candidates", get(candidates))
        .route("/api/config", get(get_config).put(put_config))
        .route("/api/comparison", get(comparison))
        .route("/api/reload", post(reload))
        .route("/api/health", get(health))
        .with_state(state);
    let app = match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    };
    app.layer(cors)
}

/// Binds `127.0.0.1:port`; a busy port is reported as [`ServerError::Bind`].
pub async fn bind(port: u16) -> Result<tokio::net::TcpListener, ServerError> {
    let addr = SocketAddr::from(([127, 0, 0, 1], port));
    tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| ServerError::Bind {
            addr,
            message: e.to_string(),
        })
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    state: AppState,
    static_dir: Option<&Path>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<(), ServerError> {
    axum::serve(listener, router(state, static_dir))
        .with_graceful_shutdown(shutdown)
        .await?;
    Ok(())
}
