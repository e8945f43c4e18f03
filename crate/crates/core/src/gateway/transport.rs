//! Live HTTP transport behind the gateway.
//!
//! The gateway follows redirects itself so every hop lands in the
//! cache; the transport performs exactly one request per call and
//! reports the raw status plus the headers replay needs.

use std::collections::BTreeMap;
use std::io::Read;
use std::time::Duration;

use super::fixture::{RequestKey, StoredResponse};

#[derive(Debug, thiserror::Error)]
pub enum TransportError {
    #[error("could not resolve or connect to host: {0}")]
    Connect(String),
    #[error("request timed out: {0}")]
    Timeout(String),
    #[error("response body exceeds size cap of {cap} bytes")]
    TooLarge { cap: usize },
    #[error("transport failure: {0}")]
    Other(String),
}

impl TransportError {
    /// Connection-level failures and timeouts are worth retrying;
    /// anything with a definite answer is not.
    pub fn is_retryable(&self) -> bool {
        matches!(self, TransportError::Connect(_) | TransportError::Timeout(_))
    }
}

/// One request, one response. Implementations must be shareable across
/// worker threads.
pub trait Transport: Send + Sync {
    fn execute(&self, key: &RequestKey, options: &RequestOptions) -> Result<StoredResponse, TransportError>;
}

/// Per-request knobs decided by the gateway.
#[derive(Debug, Clone, Default)]
pub struct RequestOptions {
    /// Send API headers (JSON accept, auth token) rather than plain
    /// page headers.
    pub api: bool,
    pub token: Option<String>,
    pub body_cap: usize,
}

pub struct HttpTransport {
    client: reqwest::blocking::Client,
}

impl HttpTransport {
    pub fn new() -> Result<HttpTransport, TransportError> {
        let client = reqwest::blocking::Client::builder()
            .redirect(reqwest::redirect::Policy::none())
            .timeout(Duration::from_secs(30))
            .user_agent(concat!("repolink/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| TransportError::Other(e.to_string()))?;
        Ok(HttpTransport { client })
    }
}

impl Transport for HttpTransport {
    fn execute(&self, key: &RequestKey, options: &RequestOptions) -> Result<StoredResponse, TransportError> {
        let mut req = self.client.get(&key.url);
        if options.api {
            req = req.header("accept", "application/vnd.github+json");
            if let Some(token) = &options.token {
                req = req.header("authorization", format!("Bearer {token}"));
            }
        }
        let resp = req.send().map_err(classify_reqwest_error)?;

        let status = resp.status().as_u16();
        let mut headers = BTreeMap::new();
        for name in ["location", "content-type"] {
            if let Some(value) = resp.headers().get(name).and_then(|v| v.to_str().ok()) {
                headers.insert(name.to_string(), value.to_string());
            }
        }

        let cap = options.body_cap;
        let mut body_bytes = Vec::new();
        resp.take(cap as u64 + 1)
            .read_to_end(&mut body_bytes)
            .map_err(|e| TransportError::Other(e.to_string()))?;
        if body_bytes.len() > cap {
            return Err(TransportError::TooLarge { cap });
        }
        let body = String::from_utf8_lossy(&body_bytes).into_owned();

        Ok(StoredResponse {
            status,
            headers,
            body,
            fetched_at: Some(now_rfc3339()),
        })
    }
}

fn classify_reqwest_error(e: reqwest::Error) -> TransportError {
    if e.is_timeout() {
        TransportError::Timeout(e.to_string())
    } else if e.is_connect() {
        TransportError::Connect(e.to_string())
    } else {
        TransportError::Other(e.to_string())
    }
}

fn now_rfc3339() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}
