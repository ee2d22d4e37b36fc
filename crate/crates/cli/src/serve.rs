use std::time::Instant;

use axum::body::Body;
use axum::extract::{Path, Request};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::post;
use axum::Router;

use crate::args::ServeArgs;
use crate::commands::CliError;
use crate::protocol::{self, dispatch};

pub fn router() -> Router {
    Router::new()
        .route("/v1", post(root))
        .route("/v1/{op}", post(routed))
        .layer(middleware::from_fn(log_and_cors))
}

async fn root(body: String) -> Response {
    respond(None, body).await
}

async fn routed(Path(op): Path<String>, body: String) -> Response {
    respond(Some(op), body).await
}

async fn respond(op: Option<String>, body: String) -> Response {
    // Kernel work is CPU bound; keep it off the async workers.
    let result = tokio::task::spawn_blocking(move || dispatch(op.as_deref(), &body)).await;
    let reply = result.unwrap_or_else(|e| protocol::Response {
        status: 500,
        body: format!("{{\"error\": {{\"kind\": \"internal\", \"path\": \".\", \"message\": {:?}}}}}\n", e.to_string()),
    });
    let status = StatusCode::from_u16(reply.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    (status, [(header::CONTENT_TYPE, "application/json")], reply.body).into_response()
}

/// One log line per request; permissive CORS so a local UI on another port can call in.
async fn log_and_cors(req: Request, next: Next) -> Response {
    let start = Instant::now();
    let method = req.method().clone();
    let path = req.uri().path().to_owned();
    let mut response = if method == Method::OPTIONS {
        Response::builder().status(StatusCode::NO_CONTENT).body(Body::empty()).expect("static response")
    } else {
        next.run(req).await
    };
    let headers = response.headers_mut();
    headers.insert(header::ACCESS_CONTROL_ALLOW_ORIGIN, HeaderValue::from_static("*"));
    headers.insert(header::ACCESS_CONTROL_ALLOW_METHODS, HeaderValue::from_static("POST, OPTIONS"));
    headers.insert(header::ACCESS_CONTROL_ALLOW_HEADERS, HeaderValue::from_static("content-type"));
    eprintln!(
        "{method} {path} {} {:.1}ms",
        response.status().as_u16(),
        start.elapsed().as_secs_f64() * 1e3
    );
    response
}

pub fn run_serve(args: &ServeArgs) -> Result<(), CliError> {
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind((args.host.as_str(), args.port)).await.map_err(|e| {
            CliError::Input(format!("cannot listen on {}:{}: {e}", args.host, args.port))
        })?;
        let addr = listener.local_addr().map_err(|e| CliError::Internal(e.to_string()))?;
        eprintln!("listening on http://{addr}");
        axum::serve(listener, router())
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| CliError::Internal(e.to_string()))
    })
}
