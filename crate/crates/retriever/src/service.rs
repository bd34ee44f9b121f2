use std::net::{SocketAddr, TcpListener, ToSocketAddrs};
use std::sync::Arc;
use std::thread::JoinHandle;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::post;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::sync::oneshot;

use crate::index::{RetrievalIndex, DEFAULT_TOP_K};
use crate::RetrieverError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRequest {
    pub query: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top_k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WirePassage {
    pub title: String,
    pub body: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResponse {
    pub results: Vec<WirePassage>,
}

impl SearchResponse {
    /// Tool-response text: title line, body line, blank line between.
    pub fn to_tool_text(&self) -> String {
        self.results
            .iter()
            .map(|p| format!("{}\n{}", p.title, p.body))
            .collect::<Vec<_>>()
            .join("\n\n")
    }
}

fn bad_request(message: String) -> Response {
    (StatusCode::BAD_REQUEST, Json(serde_json::json!({ "error": message }))).into_response()
}

async fn search(State(index): State<Arc<RetrievalIndex>>, body: Bytes) -> Response {
    let req: SearchRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return bad_request(e.to_string()),
    };
    let top_k = req.top_k.unwrap_or(DEFAULT_TOP_K);
    if top_k == 0 {
        return bad_request("top_k must be at least 1".into());
    }
    let result = index.search(&req.query, top_k);
    let results = result
        .hits
        .iter()
        .filter_map(|h| {
            index.chunk(h.chunk_id).map(|c| WirePassage {
                title: c.title.clone(),
                body: c.body.clone(),
                score: h.score,
            })
        })
        .collect();
    Json(SearchResponse { results }).into_response()
}

pub fn router(index: Arc<RetrievalIndex>) -> Router {
    Router::new().route("/search", post(search)).with_state(index)
}

/// A running search service. Dropping the handle stops it.
pub struct ServiceHandle {
    addr: SocketAddr,
    stop: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<std::io::Result<()>>>,
}

impl ServiceHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}/search", self.addr)
    }

    /// Stop accepting connections, finish in-flight requests and wait.
    pub fn shutdown(mut self) -> std::io::Result<()> {
        self.stop_and_join()
    }

    /// Block until the service exits on its own.
    pub fn wait(mut self) -> std::io::Result<()> {
        match self.thread.take() {
            Some(t) => t.join().unwrap_or_else(|_| Err(std::io::Error::other("service thread panicked"))),
            None => Ok(()),
        }
    }

    fn stop_and_join(&mut self) -> std::io::Result<()> {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        match self.thread.take() {
            Some(t) => t.join().unwrap_or_else(|_| Err(std::io::Error::other("service thread panicked"))),
            None => Ok(()),
        }
    }
}

impl Drop for ServiceHandle {
    fn drop(&mut self) {
        let _ = self.stop_and_join();
    }
}

/// Bind `addr` and serve `POST /search` on a background thread.
pub fn serve(index: Arc<RetrievalIndex>, addr: impl ToSocketAddrs + std::fmt::Debug) -> Result<ServiceHandle, RetrieverError> {
    let bind_err = |source| RetrieverError::BindFailure {
        addr: format!("{addr:?}"),
        source,
    };
    let listener = TcpListener::bind(&addr).map_err(bind_err)?;
    listener.set_nonblocking(true).map_err(bind_err)?;
    let local = listener.local_addr().map_err(bind_err)?;
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_io().build()?;
    let (stop, stopped) = oneshot::channel::<()>();
    let app = router(index);
    let thread = std::thread::Builder::new()
        .name("retriever-service".into())
        .spawn(move || {
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::from_std(listener)?;
                axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = stopped.await;
                    })
                    .await
            })
        })?;
    log::info!("retriever listening on {local}");
    Ok(ServiceHandle {
        addr: local,
        stop: Some(stop),
        thread: Some(thread),
    })
}
