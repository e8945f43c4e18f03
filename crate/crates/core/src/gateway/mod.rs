//! Sole boundary to the network.
//!
//! Every repository-host query and page fetch goes through [`Gateway`],
//! which answers from the response cache first. In offline mode there
//! is no transport at all: a cache miss is a hard [`GatewayError::MissingFixture`]
//! naming the request key, never a silent empty result. Online, misses
//! are fetched with bounded retries under an hourly budget and stored
//! atomically, so every operation is idempotent with respect to the
//! cache and a recorded run can be replayed bit-for-bit.

mod fixture;
mod rate;
mod transport;

pub use fixture::{FixtureStore, RequestKey, StoredResponse, StoreError};
pub use rate::RateLimiter;
pub use transport::{HttpTransport, RequestOptions, Transport, TransportError};

use std::fmt;
use std::path::PathBuf;
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::classify::{NormalizedUrl, RepoRef, Scheme};

const PER_PAGE: usize = 100;
const MAX_REDIRECTS: usize = 5;
const MAX_PAGES: usize = 1000;

/// What the host knows about a repository reference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RepoStatus {
    Exists { canonical: RepoRef },
    Renamed { requested: RepoRef, current: RepoRef },
    NotFound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AccountKind {
    User,
    Organization,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccountProfile {
    /// The host's canonical spelling of the account name.
    pub name: String,
    pub kind: AccountKind,
    pub website: Option<String>,
    pub avatar: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AccountStatus {
    Exists(AccountProfile),
    NotFound,
}

#[derive(Debug, thiserror::Error)]
pub enum GatewayError {
    #[error("missing fixture for request {key:?} (expected at {path})")]
    MissingFixture { key: String, path: PathBuf },
    #[error("resource not found: {key}")]
    NotFound { key: String },
    #[error("rate budget exhausted: {0}")]
    RateLimited(String),
    #[error("unexpected status {status} for {key}")]
    Status { status: u16, key: String },
    #[error("could not resolve or connect: {0}")]
    Dns(String),
    #[error("request timed out: {0}")]
    Timeout(String),
    #[error("response for {key} exceeds the size cap")]
    TooLarge { key: String },
    #[error("more than {MAX_REDIRECTS} redirects starting from {key}")]
    TooManyRedirects { key: String },
    #[error("page fetch requires a scheme: {url}")]
    MissingScheme { url: String },
    #[error("unusable response for {key}: {message}")]
    BadResponse { key: String, message: String },
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("network failure: {0}")]
    Network(String),
}

impl GatewayError {
    /// Errors produced by an unreachable, refusing, or misbehaving
    /// page, as opposed to an absent fixture or a broken cache.
    pub fn is_fetch_failure(&self) -> bool {
        matches!(
            self,
            GatewayError::Dns(_)
                | GatewayError::Timeout(_)
                | GatewayError::Status { .. }
                | GatewayError::TooLarge { .. }
                | GatewayError::TooManyRedirects { .. }
                | GatewayError::Network(_)
                | GatewayError::NotFound { .. }
                | GatewayError::BadResponse { .. }
        )
    }
}

/// Bounded exponential backoff for transient failures.
#[derive(Debug, Clone, Copy)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub base_delay_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            attempts: 3,
            base_delay_ms: 250,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GatewayConfig {
    pub cache_dir: PathBuf,
    pub offline: bool,
    /// Host API token; anonymous when absent.
    pub token: Option<String>,
    /// Requests per hour. Defaults to the host's published anonymous or
    /// authenticated budget.
    pub rate_budget: Option<u32>,
    pub api_base: String,
    pub page_body_cap: usize,
    pub retry: RetryPolicy,
}

impl GatewayConfig {
    pub fn new(cache_dir: impl Into<PathBuf>) -> GatewayConfig {
        GatewayConfig {
            cache_dir: cache_dir.into(),
            offline: false,
            token: None,
            rate_budget: None,
            api_base: "https://api.github.com".to_string(),
            page_body_cap: 2_000_000,
            retry: RetryPolicy::default(),
        }
    }

    pub fn offline(cache_dir: impl Into<PathBuf>) -> GatewayConfig {
        GatewayConfig {
            offline: true,
            ..Self::new(cache_dir)
        }
    }

    fn effective_budget(&self) -> u32 {
        self.rate_budget
            .unwrap_or(if self.token.is_some() { 5000 } else { 60 })
    }
}

/// Logical operations, recorded per call for audit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CallKind {
    RepoStatus,
    AccountStatus,
    ListRepos,
    FetchPage,
    RootListing,
}

impl fmt::Display for CallKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CallKind::RepoStatus => "repo_status",
            CallKind::AccountStatus => "account_status",
            CallKind::ListRepos => "list_repos",
            CallKind::FetchPage => "fetch_page",
            CallKind::RootListing => "root_listing",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallRecord {
    pub kind: CallKind,
    pub target: String,
}

pub struct Gateway {
    store: FixtureStore,
    offline: bool,
    transport: Option<Box<dyn Transport>>,
    limiter: Option<RateLimiter>,
    token: Option<String>,
    api_base: String,
    page_body_cap: usize,
    retry: RetryPolicy,
    call_log: Mutex<Vec<CallRecord>>,
}

impl Gateway {
    /// Opens the gateway. Offline configurations get no transport and
    /// no rate limiter; they can only replay the cache.
    pub fn open(config: GatewayConfig) -> Result<Gateway, GatewayError> {
        if config.offline {
            Self::build(config, None)
        } else {
            let transport =
                HttpTransport::new().map_err(|e| GatewayError::Network(e.to_string()))?;
            Self::build(config, Some(Box::new(transport)))
        }
    }

    /// Opens the gateway over a caller-supplied transport. Ignored in
    /// offline mode.
    pub fn with_transport(
        config: GatewayConfig,
        transport: Box<dyn Transport>,
    ) -> Result<Gateway, GatewayError> {
        if config.offline {
            Self::build(config, None)
        } else {
            Self::build(config, Some(transport))
        }
    }

    fn build(
        config: GatewayConfig,
        transport: Option<Box<dyn Transport>>,
    ) -> Result<Gateway, GatewayError> {
        let store = FixtureStore::open(&config.cache_dir).map_err(|e| StoreError::Io {
            path: config.cache_dir.clone(),
            source: e,
        })?;
        let limiter = (!config.offline).then(|| {
            RateLimiter::new(
                config.effective_budget(),
                config.cache_dir.join("rate_budget.json"),
            )
        });
        Ok(Gateway {
            store,
            offline: config.offline,
            transport,
            limiter,
            token: config.token,
            api_base: config.api_base,
            page_body_cap: config.page_body_cap,
            retry: config.retry,
            call_log: Mutex::new(Vec::new()),
        })
    }

    pub fn is_offline(&self) -> bool {
        self.offline
    }

    pub fn cache(&self) -> &FixtureStore {
        &self.store
    }

    pub fn calls(&self) -> Vec<CallRecord> {
        self.call_log.lock().expect("call log lock").clone()
    }

    pub fn clear_calls(&self) {
        self.call_log.lock().expect("call log lock").clear();
    }

    fn log(&self, kind: CallKind, target: impl Into<String>) {
        self.call_log.lock().expect("call log lock").push(CallRecord {
            kind,
            target: target.into(),
        });
    }

    /// Repository lookup with rename detection. A redirect or a changed
    /// full name both count as a rename.
    pub fn repo_status(&self, requested: &RepoRef) -> Result<RepoStatus, GatewayError> {
        self.log(CallKind::RepoStatus, requested.full_name());
        let key = RequestKey::get(format!(
            "{}/repos/{}/{}",
            self.api_base, requested.owner, requested.repo
        ));
        let (final_key, response) = self.request_following_redirects(key, true)?;
        match response.status {
            200 => {
                let body = parse_json(&final_key, &response.body)?;
                let full_name = body
                    .get("full_name")
                    .and_then(|v| v.as_str())
                    .ok_or_else(|| bad(&final_key, "repository body lacks full_name"))?;
                let canonical = repo_ref_from_full_name(&final_key, full_name)?;
                if canonical == *requested {
                    Ok(RepoStatus::Exists { canonical })
                } else {
                    Ok(RepoStatus::Renamed {
                        requested: requested.clone(),
                        current: canonical,
                    })
                }
            }
            404 => Ok(RepoStatus::NotFound),
            status => Err(GatewayError::Status {
                status,
                key: final_key.canonical(),
            }),
        }
    }

    /// User or organization lookup.
    pub fn account_status(&self, name: &str) -> Result<AccountStatus, GatewayError> {
        self.log(CallKind::AccountStatus, name);
        let key = RequestKey::get(format!("{}/users/{}", self.api_base, name));
        let (final_key, response) = self.request_following_redirects(key, true)?;
        match response.status {
            200 => {
                let body = parse_json(&final_key, &response.body)?;
                let login = body
                    .get("login")
                    .and_then(|v| v.as_str())
                    .ok_or_else(|| bad(&final_key, "account body lacks login"))?;
                let kind = match body.get("type").and_then(|v| v.as_str()) {
                    Some("Organization") => AccountKind::Organization,
                    _ => AccountKind::User,
                };
                let website = body
                    .get("blog")
                    .and_then(|v| v.as_str())
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::to_string);
                let avatar = body
                    .get("avatar_url")
                    .and_then(|v| v.as_str())
                    .filter(|s| !s.is_empty())
                    .map(str::to_string);
                Ok(AccountStatus::Exists(AccountProfile {
                    name: login.to_string(),
                    kind,
                    website,
                    avatar,
                }))
            }
            404 => Ok(AccountStatus::NotFound),
            status => Err(GatewayError::Status {
                status,
                key: final_key.canonical(),
            }),
        }
    }

    /// Complete repository listing for an account, page by page in host
    /// order.
    pub fn list_repos(&self, name: &str) -> Result<Vec<String>, GatewayError> {
        self.log(CallKind::ListRepos, name);
        let mut names = Vec::new();
        for page in 1..=MAX_PAGES {
            let key = RequestKey::get(format!(
                "{}/users/{}/repos?page={}&per_page={}",
                self.api_base, name, page, PER_PAGE
            ));
            let (final_key, response) = self.request_following_redirects(key, true)?;
            match response.status {
                200 => {
                    let body = parse_json(&final_key, &response.body)?;
                    let items = body
                        .as_array()
                        .ok_or_else(|| bad(&final_key, "repository list is not an array"))?;
                    for item in items {
                        let repo_name = item
                            .get("name")
                            .and_then(|v| v.as_str())
                            .ok_or_else(|| bad(&final_key, "repository entry lacks name"))?;
                        names.push(repo_name.to_string());
                    }
                    if items.len() < PER_PAGE {
                        return Ok(names);
                    }
                }
                404 => {
                    return Err(GatewayError::NotFound {
                        key: final_key.canonical(),
                    })
                }
                status => {
                    return Err(GatewayError::Status {
                        status,
                        key: final_key.canonical(),
                    })
                }
            }
        }
        Err(bad(
            &RequestKey::get(format!("{}/users/{}/repos", self.api_base, name)),
            "pagination did not terminate",
        ))
    }

    /// File and directory names at the repository root on the default
    /// branch.
    pub fn fetch_repo_root_listing(&self, repo: &RepoRef) -> Result<Vec<String>, GatewayError> {
        self.log(CallKind::RootListing, repo.full_name());
        let key = RequestKey::get(format!(
            "{}/repos/{}/{}/contents",
            self.api_base, repo.owner, repo.repo
        ));
        let (final_key, response) = self.request_following_redirects(key, true)?;
        match response.status {
            200 => {
                let body = parse_json(&final_key, &response.body)?;
                let items = body
                    .as_array()
                    .ok_or_else(|| bad(&final_key, "contents listing is not an array"))?;
                items
                    .iter()
                    .map(|item| {
                        item.get("name")
                            .and_then(|v| v.as_str())
                            .map(str::to_string)
                            .ok_or_else(|| bad(&final_key, "contents entry lacks name"))
                    })
                    .collect()
            }
            404 => Err(GatewayError::NotFound {
                key: final_key.canonical(),
            }),
            status => Err(GatewayError::Status {
                status,
                key: final_key.canonical(),
            }),
        }
    }

    /// Fetches a web page as text. Requires a scheme, follows at most
    /// [`MAX_REDIRECTS`] redirects, and enforces the body size cap.
    pub fn fetch_page(&self, url: &NormalizedUrl) -> Result<String, GatewayError> {
        self.log(CallKind::FetchPage, url.render());
        if url.scheme == Scheme::None {
            return Err(GatewayError::MissingScheme { url: url.render() });
        }
        let key = RequestKey::get(url.render());
        let (final_key, response) = self.request_following_redirects(key, false)?;
        match response.status {
            200..=299 => {
                if response.body.len() > self.page_body_cap {
                    return Err(GatewayError::TooLarge {
                        key: final_key.canonical(),
                    });
                }
                Ok(response.body)
            }
            status => Err(GatewayError::Status {
                status,
                key: final_key.canonical(),
            }),
        }
    }

    fn request_following_redirects(
        &self,
        key: RequestKey,
        api: bool,
    ) -> Result<(RequestKey, StoredResponse), GatewayError> {
        let original = key.clone();
        let mut key = key;
        for _ in 0..=MAX_REDIRECTS {
            let response = self.request(&key, api)?;
            if matches!(response.status, 301 | 302 | 307 | 308) {
                let location = response
                    .location()
                    .ok_or_else(|| bad(&key, "redirect without location header"))?;
                key = RequestKey::get(resolve_location(&key.url, location)?);
                continue;
            }
            return Ok((key, response));
        }
        Err(GatewayError::TooManyRedirects {
            key: original.canonical(),
        })
    }

    /// Cache-first single request. Online misses go to the transport
    /// under the rate budget with bounded exponential backoff; the
    /// settled response is stored before it is returned.
    fn request(&self, key: &RequestKey, api: bool) -> Result<StoredResponse, GatewayError> {
        if let Some(hit) = self.store.lookup(key)? {
            return Ok(hit);
        }
        if self.offline {
            return Err(GatewayError::MissingFixture {
                key: key.canonical(),
                path: self.store.path_for(key),
            });
        }
        let transport = self
            .transport
            .as_ref()
            .expect("online gateway has a transport");
        let options = RequestOptions {
            api,
            token: self.token.clone(),
            body_cap: self.page_body_cap,
        };

        let mut last_error: Option<GatewayError> = None;
        for attempt in 0..self.retry.attempts {
            if attempt > 0 {
                let delay = self.retry.base_delay_ms.saturating_mul(1 << (attempt - 1));
                thread::sleep(Duration::from_millis(delay));
            }
            if let Some(limiter) = &self.limiter {
                if let Err(e) = limiter.acquire() {
                    last_error = Some(GatewayError::RateLimited(e.to_string()));
                    continue;
                }
            }
            match transport.execute(key, &options) {
                Ok(response) if matches!(response.status, 429 | 502 | 503) => {
                    last_error = Some(GatewayError::Status {
                        status: response.status,
                        key: key.canonical(),
                    });
                }
                Ok(response) => {
                    self.store.store(key, &response)?;
                    return Ok(response);
                }
                Err(e) if e.is_retryable() => last_error = Some(transport_error(key, e)),
                Err(e) => return Err(transport_error(key, e)),
            }
        }
        Err(last_error.unwrap_or_else(|| GatewayError::Network("no attempts made".into())))
    }
}

fn transport_error(key: &RequestKey, e: TransportError) -> GatewayError {
    match e {
        TransportError::Connect(m) => GatewayError::Dns(m),
        TransportError::Timeout(m) => GatewayError::Timeout(m),
        TransportError::TooLarge { .. } => GatewayError::TooLarge {
            key: key.canonical(),
        },
        TransportError::Other(m) => GatewayError::Network(m),
    }
}

fn bad(key: &RequestKey, message: &str) -> GatewayError {
    GatewayError::BadResponse {
        key: key.canonical(),
        message: message.to_string(),
    }
}

fn parse_json(key: &RequestKey, body: &str) -> Result<serde_json::Value, GatewayError> {
    serde_json::from_str(body).map_err(|e| bad(key, &format!("invalid JSON: {e}")))
}

fn repo_ref_from_full_name(key: &RequestKey, full_name: &str) -> Result<RepoRef, GatewayError> {
    let (owner, repo) = full_name
        .split_once('/')
        .ok_or_else(|| bad(key, "full_name is not owner/repo"))?;
    RepoRef::from_segments(owner, repo).ok_or_else(|| bad(key, "full_name has empty parts"))
}

fn resolve_location(base: &str, location: &str) -> Result<String, GatewayError> {
    let location = location.trim();
    if location.starts_with("http://") || location.starts_with("https://") {
        return Ok(location.to_string());
    }
    if let Some(rest) = location.strip_prefix('/') {
        let scheme_end = base.find("://").map(|i| i + 3).unwrap_or(0);
        let host_end = base[scheme_end..]
            .find('/')
            .map(|i| scheme_end + i)
            .unwrap_or(base.len());
        return Ok(format!("{}/{}", &base[..host_end], rest));
    }
    Err(GatewayError::BadResponse {
        key: base.to_string(),
        message: format!("unsupported redirect location {location:?}"),
    })
}
