//! URL normalization and link classification.
//!
//! Every collected link is normalized into a [`NormalizedUrl`] and then
//! assigned exactly one [`LinkCategory`]. The explicit-repository and
//! issues rules are regular expressions over the normalized rendering;
//! the remaining categories are decided from host and path shape.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::hash::{Hash, Hasher};
use std::io;
use std::path::Path;

use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Accepts an explicit GitHub repository link: scheme, host exactly
/// `github.com`, two path segments, an optional `.git` suffix or
/// trailing slash.
static REPO_RE: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"^https?://github\.com/([^/]+)/([^/]+?)(?:\.git|/)?$").unwrap());

/// Accepts the issues page of a repository: two path segments followed
/// by `/issues` and an optional trailing slash.
static ISSUES_RE: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"^https?://github\.com/([^/]+)/([^/]+)/issues/?$").unwrap());

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Http,
    Https,
    None,
}

impl Scheme {
    fn prefix(self) -> &'static str {
        match self {
            Scheme::Http => "http://",
            Scheme::Https => "https://",
            Scheme::None => "",
        }
    }
}

/// A URL reduced to the parts classification looks at.
///
/// The host is lowercased, consecutive slashes are collapsed, and query
/// and fragment are dropped. Path segment spelling and `www.` prefixes
/// are preserved; the rules decide what they mean.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedUrl {
    pub scheme: Scheme,
    pub host: String,
    pub path_segments: Vec<String>,
    pub had_trailing_slash: bool,
    /// The string normalization started from, trimmed.
    pub raw: String,
}

impl NormalizedUrl {
    /// Canonical rendering: scheme, host, segments, trailing slash.
    pub fn render(&self) -> String {
        let mut s = String::new();
        s.push_str(self.scheme.prefix());
        s.push_str(&self.host);
        for seg in &self.path_segments {
            s.push('/');
            s.push_str(seg);
        }
        if self.had_trailing_slash {
            s.push('/');
        }
        s
    }

    /// Same URL with `scheme` substituted when none was present.
    pub fn with_default_scheme(&self, scheme: Scheme) -> NormalizedUrl {
        let mut out = self.clone();
        if out.scheme == Scheme::None {
            out.scheme = scheme;
        }
        out
    }
}

impl fmt::Display for NormalizedUrl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// An `(account, repository)` pair on the code host.
///
/// The host treats names case-insensitively, so equality and hashing
/// ignore ASCII case while the stored spelling is preserved.
/// Serializes as `{"owner", "name", "url"}`, the record shape used in
/// dataset outputs.
#[derive(Debug, Clone)]
pub struct RepoRef {
    pub owner: String,
    pub repo: String,
}

impl Serialize for RepoRef {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("RepoRef", 3)?;
        s.serialize_field("owner", &self.owner)?;
        s.serialize_field("name", &self.repo)?;
        s.serialize_field("url", &self.url())?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for RepoRef {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Shape {
            owner: String,
            name: String,
        }
        let shape = Shape::deserialize(deserializer)?;
        Ok(RepoRef {
            owner: shape.owner,
            repo: shape.name,
        })
    }
}

impl RepoRef {
    /// Builds a reference from raw path segments. A `.git` suffix on
    /// the repository segment is dropped; empty parts are rejected.
    pub fn from_segments(owner: &str, repo: &str) -> Option<RepoRef> {
        let repo = repo.strip_suffix(".git").unwrap_or(repo);
        if owner.is_empty() || repo.is_empty() || owner.contains('/') || repo.contains('/') {
            return None;
        }
        Some(RepoRef {
            owner: owner.to_string(),
            repo: repo.to_string(),
        })
    }

    pub fn full_name(&self) -> String {
        format!("{}/{}", self.owner, self.repo)
    }

    pub fn url(&self) -> String {
        format!("https://github.com/{}/{}", self.owner, self.repo)
    }
}

impl PartialEq for RepoRef {
    fn eq(&self, other: &Self) -> bool {
        self.owner.eq_ignore_ascii_case(&other.owner) && self.repo.eq_ignore_ascii_case(&other.repo)
    }
}

impl Eq for RepoRef {}

impl Hash for RepoRef {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.owner.to_ascii_lowercase().hash(state);
        self.repo.to_ascii_lowercase().hash(state);
    }
}

impl fmt::Display for RepoRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.owner, self.repo)
    }
}

/// The classification of one normalized URL. Exactly one per URL.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinkCategory {
    /// Explicit, correctly structured repository link.
    GoodRepo(RepoRef),
    /// Issues page of a repository; the enclosing repo is recoverable.
    IssuesLink(RepoRef),
    /// `<username>.github.io` developer page.
    GitHubPage { username: String },
    /// `github.com/<username>` profile.
    UserProfile { username: String },
    /// Repository link pointing below the root; discarded since such
    /// repositories hold multiple packages or unrelated components.
    SubDirectory {
        owner: String,
        repo: String,
        extra_path: Vec<String>,
    },
    /// Generic or denylisted destination; never investigated.
    IrrelevantOrGeneric,
    /// Anything else off the code host; candidate for implicit
    /// resolution via the page itself.
    ExternalSite { host: String },
    /// Not a usable URL at all.
    Malformed,
}

impl LinkCategory {
    /// Stable tag used in serialized records and stats.
    pub fn tag(&self) -> &'static str {
        match self {
            LinkCategory::GoodRepo(_) => "good_repo",
            LinkCategory::IssuesLink(_) => "issues_link",
            LinkCategory::GitHubPage { .. } => "github_page",
            LinkCategory::UserProfile { .. } => "user_profile",
            LinkCategory::SubDirectory { .. } => "sub_directory",
            LinkCategory::IrrelevantOrGeneric => "irrelevant_or_generic",
            LinkCategory::ExternalSite { .. } => "external_site",
            LinkCategory::Malformed => "malformed",
        }
    }

    pub const ALL_TAGS: [&'static str; 8] = [
        "good_repo",
        "issues_link",
        "github_page",
        "user_profile",
        "sub_directory",
        "irrelevant_or_generic",
        "external_site",
        "malformed",
    ];
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MalformedUrl {
    #[error("url is empty")]
    Empty,
    #[error("url contains internal whitespace: {0:?}")]
    InternalWhitespace(String),
    #[error("url has no recognizable host: {0:?}")]
    NoHost(String),
}

/// Normalizes a raw link string.
///
/// The scheme is taken from a case-insensitive `http://` or `https://`
/// prefix, otherwise none. The host is lowercased and a numeric port is
/// dropped. Query and fragment are stripped. Idempotent over its own
/// rendering.
pub fn normalize_url(raw: &str) -> Result<NormalizedUrl, MalformedUrl> {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return Err(MalformedUrl::Empty);
    }
    if trimmed.chars().any(char::is_whitespace) {
        return Err(MalformedUrl::InternalWhitespace(trimmed.to_string()));
    }

    let lower = trimmed.to_lowercase();
    let (scheme, rest) = if let Some(r) = lower.strip_prefix("https://") {
        (Scheme::Https, &trimmed[trimmed.len() - r.len()..])
    } else if let Some(r) = lower.strip_prefix("http://") {
        (Scheme::Http, &trimmed[trimmed.len() - r.len()..])
    } else {
        (Scheme::None, trimmed)
    };

    // Split host from path, then drop query/fragment wherever they start.
    let rest = rest
        .split_once(['?', '#'])
        .map(|(before, _)| before)
        .unwrap_or(rest);
    let (host_part, path) = match rest.split_once('/') {
        Some((h, p)) => (h, p),
        None => (rest, ""),
    };

    let host_part = host_part.trim_end_matches('.');
    let host_part = match host_part.split_once(':') {
        Some((h, port)) if !port.is_empty() && port.bytes().all(|b| b.is_ascii_digit()) => h,
        Some(_) => return Err(MalformedUrl::NoHost(trimmed.to_string())),
        None => host_part,
    };
    if host_part.is_empty()
        || !host_part
            .chars()
            .all(|c| c.is_alphanumeric() || matches!(c, '.' | '-' | '_'))
    {
        return Err(MalformedUrl::NoHost(trimmed.to_string()));
    }

    let path_segments: Vec<String> = path
        .split('/')
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect();
    let had_trailing_slash = rest.ends_with('/');

    Ok(NormalizedUrl {
        scheme,
        host: host_part.to_lowercase(),
        path_segments,
        had_trailing_slash,
        raw: trimmed.to_string(),
    })
}

/// Applies the explicit-repository rule.
///
/// Accepts only a scheme plus host exactly `github.com` plus two path
/// segments, with an optional `.git` suffix or trailing slash. The
/// `www.` variant is deliberately excluded.
pub fn match_repo_regex(url: &NormalizedUrl) -> Option<RepoRef> {
    let rendered = url.render();
    let caps = REPO_RE.captures(&rendered)?;
    RepoRef::from_segments(&caps[1], &caps[2])
}

/// Applies the issues-page rule and recovers the enclosing repository.
pub fn match_issues_regex(url: &NormalizedUrl) -> Option<RepoRef> {
    let rendered = url.render();
    let caps = ISSUES_RE.captures(&rendered)?;
    RepoRef::from_segments(&caps[1], &caps[2])
}

/// Detects a `<username>.github.io` developer page. Path is ignored.
pub fn detect_github_page(url: &NormalizedUrl) -> Option<String> {
    let labels: Vec<&str> = url.host.split('.').collect();
    match labels.as_slice() {
        [username, "github", "io"] if !username.is_empty() => Some(username.to_string()),
        _ => None,
    }
}

/// Detects a `github.com/<username>` profile link.
pub fn detect_user_profile(url: &NormalizedUrl) -> Option<String> {
    if url.host == "github.com" && url.path_segments.len() == 1 {
        Some(url.path_segments[0].clone())
    } else {
        None
    }
}

/// Hosts whose links are classified irrelevant and never investigated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenyList {
    hosts: BTreeSet<String>,
}

impl Default for DenyList {
    fn default() -> Self {
        DenyList {
            hosts: [
                "google.com",
                "www.google.com",
                "php.net",
                "github.com",
                "www.github.com",
                "slideshare.net",
            ]
            .into_iter()
            .map(str::to_string)
            .collect(),
        }
    }
}

impl DenyList {
    pub fn from_hosts(hosts: impl IntoIterator<Item = String>) -> Self {
        DenyList {
            hosts: hosts.into_iter().map(|h| h.to_lowercase()).collect(),
        }
    }

    /// Loads a denylist file: one lowercase host per line, `#` comments
    /// and blank lines allowed.
    pub fn from_file(path: &Path) -> io::Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(Self::from_hosts(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_string),
        ))
    }

    pub fn contains(&self, host: &str) -> bool {
        self.hosts.contains(host)
    }
}

/// Assigns exactly one category to a normalized URL.
///
/// Order of decision: bare GitHub hosts and denylisted hosts are
/// irrelevant; then the repository rule, the issues rule, the developer
/// page, the profile; deeper `github.com` paths are sub-directories;
/// everything else is an external site. GitHub hosts on the denylist
/// only match when bare, so explicit repository links always reach the
/// repository rule.
pub fn classify(url: &NormalizedUrl, denylist: &DenyList) -> LinkCategory {
    let github_host = url.host == "github.com" || url.host == "www.github.com";
    if github_host && url.path_segments.is_empty() {
        return LinkCategory::IrrelevantOrGeneric;
    }
    if !github_host && denylist.contains(&url.host) {
        return LinkCategory::IrrelevantOrGeneric;
    }
    if let Some(r) = match_repo_regex(url) {
        return LinkCategory::GoodRepo(r);
    }
    if let Some(r) = match_issues_regex(url) {
        return LinkCategory::IssuesLink(r);
    }
    if let Some(username) = detect_github_page(url) {
        return LinkCategory::GitHubPage { username };
    }
    if let Some(username) = detect_user_profile(url) {
        return LinkCategory::UserProfile { username };
    }
    if url.host == "github.com" && url.path_segments.len() >= 3 {
        return LinkCategory::SubDirectory {
            owner: url.path_segments[0].clone(),
            repo: url.path_segments[1].clone(),
            extra_path: url.path_segments[2..].to_vec(),
        };
    }
    LinkCategory::ExternalSite {
        host: url.host.clone(),
    }
}

/// Normalizes and classifies in one step; unparseable input is
/// [`LinkCategory::Malformed`].
pub fn classify_raw(raw: &str, denylist: &DenyList) -> (Option<NormalizedUrl>, LinkCategory) {
    match normalize_url(raw) {
        Ok(url) => {
            let category = classify(&url, denylist);
            (Some(url), category)
        }
        Err(_) => (None, LinkCategory::Malformed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn norm(s: &str) -> NormalizedUrl {
        normalize_url(s).unwrap()
    }

    #[test]
    fn normalization_lowercases_and_strips() {
        let u = norm("HTTPS://GitHub.com/A/B/");
        assert_eq!(u.scheme, Scheme::Https);
        assert_eq!(u.host, "github.com");
        assert_eq!(u.path_segments, vec!["A", "B"]);
        assert!(u.had_trailing_slash);
    }

    #[test]
    fn schemeless_host_normalizes() {
        let u = norm("www.google.com");
        assert_eq!(u.scheme, Scheme::None);
        assert_eq!(u.host, "www.google.com");
        assert!(u.path_segments.is_empty());
    }

    #[test]
    fn bare_host_with_slash() {
        let u = norm("http://php.net/");
        assert_eq!(u.scheme, Scheme::Http);
        assert_eq!(u.host, "php.net");
        assert!(u.path_segments.is_empty());
        assert!(u.had_trailing_slash);
    }

    #[test]
    fn query_and_fragment_are_stripped() {
        assert_eq!(norm("https://github.com/a/b?tab=readme").render(), "https://github.com/a/b");
        assert_eq!(norm("https://github.com/a/b#readme").render(), "https://github.com/a/b");
        // query on the host itself
        assert_eq!(norm("https://example.com?x=1").host, "example.com");
    }

    #[test]
    fn consecutive_slashes_collapse() {
        assert_eq!(norm("https://github.com/a//b").path_segments, vec!["a", "b"]);
    }

    #[test]
    fn numeric_port_is_dropped() {
        assert_eq!(norm("http://example.com:8080/x").host, "example.com");
    }

    #[test]
    fn malformed_inputs() {
        assert_eq!(normalize_url("   "), Err(MalformedUrl::Empty));
        assert!(matches!(
            normalize_url("not a url"),
            Err(MalformedUrl::InternalWhitespace(_))
        ));
        assert!(matches!(
            normalize_url("mailto:dev@example.com"),
            Err(MalformedUrl::NoHost(_))
        ));
        assert!(matches!(
            normalize_url("ftp://example.com/x"),
            Err(MalformedUrl::NoHost(_))
        ));
        assert!(matches!(normalize_url("http:///path"), Err(MalformedUrl::NoHost(_))));
    }

    #[test]
    fn repo_regex_accepts_the_canonical_forms() {
        assert_eq!(
            match_repo_regex(&norm("https://github.com/rails/rails")),
            RepoRef::from_segments("rails", "rails")
        );
        assert_eq!(
            match_repo_regex(&norm("https://github.com/a/b.git")),
            RepoRef::from_segments("a", "b")
        );
        assert_eq!(
            match_repo_regex(&norm("https://github.com/a/b/")),
            RepoRef::from_segments("a", "b")
        );
        assert_eq!(
            match_repo_regex(&norm("http://github.com/a/b")),
            RepoRef::from_segments("a", "b")
        );
        // .git and trailing slash together still name the repo
        assert_eq!(
            match_repo_regex(&norm("https://github.com/a/b.git/")),
            RepoRef::from_segments("a", "b")
        );
    }

    #[test]
    fn repo_regex_rejections() {
        assert_eq!(match_repo_regex(&norm("https://github.com/a/b/tree/master")), None);
        assert_eq!(match_repo_regex(&norm("https://github.com/a")), None);
        assert_eq!(match_repo_regex(&norm("https://www.github.com/a/b")), None);
        assert_eq!(match_repo_regex(&norm("github.com/a/b")), None); // no scheme
        assert_eq!(match_repo_regex(&norm("https://gitlab.com/a/b")), None);
        // repo that is nothing but the suffix
        assert_eq!(match_repo_regex(&norm("https://github.com/a/.git")), None);
    }

    #[test]
    fn repo_regex_never_returns_git_suffix() {
        for s in [
            "https://github.com/a/b.git",
            "https://github.com/a/b.git/",
            "https://github.com/a/b",
        ] {
            if let Some(r) = match_repo_regex(&norm(s)) {
                assert!(!r.repo.ends_with(".git"), "{s} -> {r}");
            }
        }
    }

    #[test]
    fn issues_regex() {
        assert_eq!(
            match_issues_regex(&norm("https://github.com/a/b/issues")),
            RepoRef::from_segments("a", "b")
        );
        assert_eq!(
            match_issues_regex(&norm("https://github.com/a/b/issues/")),
            RepoRef::from_segments("a", "b")
        );
        assert_eq!(match_issues_regex(&norm("https://github.com/a/b/issues/42")), None);
        assert_eq!(match_issues_regex(&norm("https://github.com/a/b")), None);
    }

    // Ten hand-built issues URLs; stripping "/issues" must hand the
    // same reference to the repository rule.
    #[test]
    fn issues_strip_agrees_with_repo_rule() {
        let cases = [
            ("https://github.com/rails/rails/issues", "https://github.com/rails/rails"),
            ("https://github.com/a/b/issues", "https://github.com/a/b"),
            ("https://github.com/a/b/issues/", "https://github.com/a/b/"),
            ("http://github.com/x/y/issues", "http://github.com/x/y"),
            ("https://github.com/A/B/issues", "https://github.com/A/B"),
            ("https://github.com/a-b/c_d/issues", "https://github.com/a-b/c_d"),
            ("https://github.com/a.b/c.d/issues", "https://github.com/a.b/c.d"),
            ("https://github.com/own/repo.git/issues", "https://github.com/own/repo.git"),
            ("https://github.com/1/2/issues/", "https://github.com/1/2"),
            ("https://github.com/o/r/issues", "https://github.com/o/r/"),
        ];
        for (issues_url, repo_url) in cases {
            let via_issues = match_issues_regex(&norm(issues_url)).expect(issues_url);
            let via_repo = match_repo_regex(&norm(repo_url)).expect(repo_url);
            assert_eq!(via_issues, via_repo, "{issues_url} vs {repo_url}");
        }
    }

    // Hand-built host-pattern table for developer pages.
    #[test]
    fn github_page_host_table() {
        let cases = [
            ("https://alice.github.io", Some("alice")),
            ("https://alice.github.io/project", Some("alice")),
            ("http://bob.github.io/", Some("bob")),
            ("alice.github.io", Some("alice")),
            ("https://github.io", None),
            ("https://a.b.github.io", None),
            ("https://github.com/alice", None),
            ("https://alicegithub.io", None),
            ("https://alice.github.iox", None),
        ];
        for (url, expected) in cases {
            assert_eq!(detect_github_page(&norm(url)).as_deref(), expected, "{url}");
        }
    }

    #[test]
    fn user_profile_detection() {
        assert_eq!(
            detect_user_profile(&norm("https://github.com/username")).as_deref(),
            Some("username")
        );
        assert_eq!(detect_user_profile(&norm("https://github.com/")), None);
        assert_eq!(detect_user_profile(&norm("https://github.com/a/b")), None);
        assert_eq!(detect_user_profile(&norm("https://www.github.com/a")), None);
    }

    #[test]
    fn classify_covers_the_taxonomy() {
        let deny = DenyList::default();
        let cat = |s: &str| classify(&norm(s), &deny);

        assert_eq!(cat("www.github.com"), LinkCategory::IrrelevantOrGeneric);
        assert_eq!(cat("https://github.com/"), LinkCategory::IrrelevantOrGeneric);
        assert_eq!(cat("www.google.com"), LinkCategory::IrrelevantOrGeneric);
        assert_eq!(cat("http://php.net/"), LinkCategory::IrrelevantOrGeneric);
        assert_eq!(
            cat("https://github.com/u/r/tree/master/subgem"),
            LinkCategory::SubDirectory {
                owner: "u".into(),
                repo: "r".into(),
                extra_path: vec!["tree".into(), "master".into(), "subgem".into()],
            }
        );
        assert_eq!(
            cat("http://www.futureworkshops.com"),
            LinkCategory::ExternalSite { host: "www.futureworkshops.com".into() }
        );
        // scheme-less repo shape fails the regex and stays external
        assert_eq!(
            cat("github.com/a/b"),
            LinkCategory::ExternalSite { host: "github.com".into() }
        );
    }

    #[test]
    fn denylist_wins_over_page_detection_only_when_configured() {
        let deny = DenyList::from_hosts(["alice.github.io".to_string()]);
        assert_eq!(classify(&norm("https://alice.github.io"), &deny), LinkCategory::IrrelevantOrGeneric);
        assert_eq!(
            classify(&norm("https://alice.github.io"), &DenyList::default()),
            LinkCategory::GitHubPage { username: "alice".into() }
        );
    }

    #[test]
    fn denylisted_host_is_irrelevant_at_any_depth() {
        let deny = DenyList::default();
        assert_eq!(
            classify(&norm("https://www.google.com/search/results"), &deny),
            LinkCategory::IrrelevantOrGeneric
        );
    }

    #[test]
    fn classify_raw_folds_malformed() {
        let deny = DenyList::default();
        assert_eq!(classify_raw("mailto:x@y.z", &deny).1, LinkCategory::Malformed);
        assert_eq!(
            classify_raw("  https://github.com/a/b  ", &deny).1,
            LinkCategory::GoodRepo(RepoRef::from_segments("a", "b").unwrap())
        );
    }

    #[test]
    fn repo_ref_comparisons_ignore_case_but_keep_spelling() {
        let a = RepoRef::from_segments("FutureWorkshops", "notifiable-rails").unwrap();
        let b = RepoRef::from_segments("futureworkshops", "Notifiable-Rails").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.owner, "FutureWorkshops");
        assert_eq!(a.url(), "https://github.com/FutureWorkshops/notifiable-rails");
    }

    fn segment() -> impl Strategy<Value = String> {
        proptest::string::string_regex("[A-Za-z0-9._~!$&'()*+,;=:@-]{1,12}").unwrap()
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(raw in "[ -~]{0,40}") {
            if let Ok(once) = normalize_url(&raw) {
                let twice = normalize_url(&once.render()).unwrap();
                prop_assert_eq!(&once.scheme, &twice.scheme);
                prop_assert_eq!(&once.host, &twice.host);
                prop_assert_eq!(&once.path_segments, &twice.path_segments);
                prop_assert_eq!(once.had_trailing_slash, twice.had_trailing_slash);
            }
        }

        #[test]
        fn classification_is_deterministic_and_total(raw in "[ -~]{0,40}") {
            let deny = DenyList::default();
            let first = classify_raw(&raw, &deny);
            let second = classify_raw(&raw, &deny);
            prop_assert_eq!(first, second);
        }

        // Category shapes are mutually exclusive on github.com by
        // segment count: 1 profile, 2 repo, 2+issues issues, >=3 subdir.
        #[test]
        fn github_matchers_are_mutually_exclusive(
            a in segment(),
            b in segment(),
            extra in proptest::collection::vec(segment(), 0..3),
        ) {
            let mut url = format!("https://github.com/{a}/{b}");
            for e in &extra {
                url.push('/');
                url.push_str(e);
            }
            if let Ok(u) = normalize_url(&url) {
                let hits = [
                    match_repo_regex(&u).is_some(),
                    match_issues_regex(&u).is_some(),
                    detect_user_profile(&u).is_some(),
                ];
                prop_assert!(hits.iter().filter(|h| **h).count() <= 1, "{}", url);
            }
        }
    }
}
