//! HTTP service over the outbreak model.
//!
//! Routes:
//!
//! | method | path | body |
//! |---|---|---|
//! | GET | `/model` | [`ModelDescriptor`] |
//! | POST | `/query` | [`QueryRequest`] → [`QueryResponse`] |
//! | POST | `/risk` | [`RiskRequest`] → [`RiskResponse`] |
//! | POST | `/scenarios/{id}/run` | [`ScenarioBody`], or CSV with `?format=csv` |
//! | GET, POST | `/sessions` | list, or [`NewSession`] → [`Session`] |
//! | GET, POST, DELETE | `/sessions/{id}` | load, [`SessionUpdate`], delete |
//!
//! Errors are `{"code": ..., "message": ...}` with a 4xx/5xx status.

mod error;
mod store;
mod wire;

use std::collections::BTreeMap;
use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use outbreak_core::model::{pi_table, ModelConfig, ModelInputs, NodeGroup};
use outbreak_core::model_file::LoadedModel;
use outbreak_core::risk::{error_rates_from_network, risk_scores, RiskParams};
use outbreak_core::scenario::{emit_report, run_builtin, ReportFormat};
use outbreak_core::{bn, Execution, Network};
use serde::Deserialize;

pub use error::{ApiError, ErrorBody};
pub use store::{Session, SessionStore, StoreError, LOG_FILE};
pub use wire::*;

pub const PORT_ENV: &str = "OUTBREAK_DSS_PORT";
pub const DEFAULT_PORT: u16 = 8080;

struct Shared {
    network: Network,
    groups: BTreeMap<String, NodeGroup>,
    pi_table: Option<PiTable>,
    sessions: SessionStore,
    exec: Execution,
}

/// Cheaply cloneable handle to the loaded model and session store.
#[derive(Clone)]
pub struct AppState(Arc<Shared>);

impl AppState {
    pub fn new(model: LoadedModel, sessions: SessionStore) -> Self {
        Self(Arc::new(Shared {
            network: model.network,
            groups: model.groups,
            pi_table: None,
            sessions,
            exec: Execution::default(),
        }))
    }

    /// The built-in model, with the behaviour-combination PI table attached.
    pub fn roosevelt(sessions: SessionStore) -> Self {
        let pairs = pi_table(&ModelConfig::default(), &ModelInputs::roosevelt())
            .expect("bundled model inputs are valid");
        let mut state = Self::new(LoadedModel::roosevelt(), sessions);
        Arc::get_mut(&mut state.0).expect("fresh state").pi_table = Some(PiTable::from_pairs(&pairs));
        state
    }

    pub fn network(&self) -> &Network {
        &self.0.network
    }

    pub fn sessions(&self) -> &SessionStore {
        &self.0.sessions
    }

    pub fn descriptor(&self) -> ModelDescriptor {
        let net = &self.0.network;
        ModelDescriptor {
            variables: net
                .variables()
                .iter()
                .map(|v| VariableDescriptor {
                    name: v.name().to_string(),
                    states: v.states().to_vec(),
                    parents: net.cpt(v.name()).map(|c| c.parents().to_vec()).unwrap_or_default(),
                    group: self.0.groups.get(v.name()).copied(),
                })
                .collect(),
            pi_table: self.0.pi_table.clone(),
        }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/model", get(model))
        .route("/query", post(query))
        .route("/risk", post(risk))
        .route("/scenarios/{id}/run", post(run_scenario))
        .route("/sessions", get(list_sessions).post(create_session))
        .route(
            "/sessions/{id}",
            get(load_session).post(update_session).delete(delete_session),
        )
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "NOT_FOUND", "no such route") })
        .with_state(state)
}

/// Serves until the listener fails.
pub async fn serve(listener: tokio::net::TcpListener, state: AppState) -> std::io::Result<()> {
    tracing::info!(addr = ?listener.local_addr().ok(), "serving");
    axum::serve(listener, router(state)).await
}

/// Runs blocking inference off the async workers.
async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
}

async fn model(State(state): State<AppState>) -> Json<ModelDescriptor> {
    Json(state.descriptor())
}

async fn query(
    State(state): State<AppState>,
    body: Result<Json<QueryRequest>, JsonRejection>,
) -> Result<Json<QueryResponse>, ApiError> {
    let Json(req) = body?;
    if req.targets.is_empty() {
        return Err(ApiError::bad_request("targets must not be empty"));
    }
    blocking(move || {
        let net = state.network();
        net.validate_evidence(&req.evidence)?;
        let posteriors = req
            .targets
            .iter()
            .map(|t| bn::posterior(net, &req.evidence, t).map(|p| PosteriorBody::from(&p)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Json(QueryResponse { posteriors }))
    })
    .await
}

async fn risk(
    State(state): State<AppState>,
    body: Result<Json<RiskRequest>, JsonRejection>,
) -> Result<Json<RiskResponse>, ApiError> {
    let Json(req) = body?;
    let (fpr, fnr) = match (req.fpr, req.fnr) {
        (Some(fpr), Some(fnr)) => (fpr, fnr),
        (fpr, fnr) => {
            let model = error_rates_from_network(state.network())?;
            (fpr.unwrap_or(model.fpr), fnr.unwrap_or(model.fnr))
        }
    };
    let d = RiskParams::DEFAULT_PROFILE;
    let impacts = req.impacts.unwrap_or(Impacts {
        u: d.impact_u,
        k: d.impact_k,
        q: d.impact_q,
        c: d.impact_c,
    });
    let params = RiskParams {
        impact_u: impacts.u,
        impact_k: impacts.k,
        impact_q: impacts.q,
        impact_c: impacts.c,
    };
    let scores = risk_scores(fpr, fnr, &params)?;
    Ok(Json(RiskResponse {
        fpr,
        fnr,
        impacts,
        risk_p: scores.risk_p,
        risk_n: scores.risk_n,
    }))
}

#[derive(Debug, Deserialize)]
struct FormatParam {
    format: Option<String>,
}

async fn run_scenario(
    State(state): State<AppState>,
    Path(id): Path<String>,
    params: Result<Query<FormatParam>, QueryRejection>,
) -> Result<Response, ApiError> {
    let Query(params) = params?;
    let id: u32 = id
        .parse()
        .map_err(|_| ApiError::new(StatusCode::NOT_FOUND, "SCENARIO_NOT_FOUND", format!("unknown scenario `{id}`")))?;
    let format = match params.format.as_deref() {
        None | Some("json") => None,
        Some(f) => Some(f.parse::<ReportFormat>().map_err(ApiError::bad_request)?),
    };
    let result = blocking(move || Ok(run_builtin(id, state.network(), state.0.exec)?)).await?;
    Ok(match format {
        None => Json(ScenarioBody::from(&result)).into_response(),
        Some(f) => {
            let content_type = match f {
                ReportFormat::Csv => "text/csv; charset=utf-8",
                ReportFormat::Table => "text/plain; charset=utf-8",
            };
            ([(header::CONTENT_TYPE, content_type)], emit_report(&result, f)).into_response()
        }
    })
}

async fn list_sessions(State(state): State<AppState>) -> Json<Vec<Session>> {
    Json(state.sessions().list())
}

async fn create_session(
    State(state): State<AppState>,
    body: Result<Json<NewSession>, JsonRejection>,
) -> Result<(StatusCode, Json<Session>), ApiError> {
    let Json(req) = body?;
    state.network().validate_evidence(&req.evidence)?;
    let session = blocking(move || Ok(state.sessions().create(req.label, req.evidence)?)).await?;
    Ok((StatusCode::CREATED, Json(session)))
}

async fn load_session(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<Session>, ApiError> {
    Ok(Json(state.sessions().get(&id)?))
}

async fn update_session(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<SessionUpdate>, JsonRejection>,
) -> Result<Json<Session>, ApiError> {
    let Json(req) = body?;
    if let Some(ev) = &req.evidence {
        state.network().validate_evidence(ev)?;
    }
    let session = blocking(move || Ok(state.sessions().update(&id, req.label, req.evidence)?)).await?;
    Ok(Json(session))
}

async fn delete_session(State(state): State<AppState>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    blocking(move || Ok(state.sessions().delete(&id)?)).await?;
    Ok(StatusCode::NO_CONTENT)
}
