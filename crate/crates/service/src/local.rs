//! Calls into the HTTP router without a socket.

use axum::body::Body;
use axum::http::{header, HeaderMap, Method, Request};
use axum::Router;
use serde::de::DeserializeOwned;
use serde::Serialize;
use tower::ServiceExt;

use crate::error::ErrorBody;

#[derive(Debug, Clone)]
pub struct LocalResponse {
    pub status: u16,
    pub headers: HeaderMap,
    pub body: Vec<u8>,
}

impl LocalResponse {
    pub fn json<T: DeserializeOwned>(&self) -> Result<T, String> {
        serde_json::from_slice(&self.body).map_err(|e| format!("{e}: {}", String::from_utf8_lossy(&self.body)))
    }

    pub fn text(&self) -> String {
        String::from_utf8_lossy(&self.body).into_owned()
    }

    /// The `{code, message}` of an error response.
    pub fn error(&self) -> Option<ErrorBody> {
        serde_json::from_slice(&self.body).ok()
    }
}

/// A router driven from blocking code on its own runtime.
pub struct LocalApi {
    router: Router,
    rt: tokio::runtime::Runtime,
}

impl LocalApi {
    pub fn new(router: Router) -> Self {
        let rt = tokio::runtime::Builder::new_current_thread()
            .enable_all()
            .build()
            .expect("tokio runtime");
        Self { router, rt }
    }

    pub fn call<B: Serialize>(&self, method: Method, path: &str, token: Option<&str>, body: Option<&B>) -> LocalResponse {
        let mut req = Request::builder().method(method).uri(path);
        if let Some(t) = token {
            req = req.header(header::AUTHORIZATION, format!("Bearer {t}"));
        }
        let req = match body {
            Some(b) => req
                .header(header::CONTENT_TYPE, "application/json")
                .body(Body::from(serde_json::to_vec(b).expect("body serializes"))),
            None => req.body(Body::empty()),
        }
        .expect("request builds");
        self.rt.block_on(async {
            let resp = self.router.clone().oneshot(req).await.expect("router is infallible");
            let status = resp.status().as_u16();
            let headers = resp.headers().clone();
            let body = axum::body::to_bytes(resp.into_body(), usize::MAX)
                .await
                .map(|b| b.to_vec())
                .unwrap_or_default();
            LocalResponse { status, headers, body }
        })
    }

    pub fn get(&self, path: &str, token: Option<&str>) -> LocalResponse {
        self.call::<()>(Method::GET, path, token, None)
    }

    pub fn post<B: Serialize>(&self, path: &str, token: Option<&str>, body: &B) -> LocalResponse {
        self.call(Method::POST, path, token, Some(body))
    }
}
