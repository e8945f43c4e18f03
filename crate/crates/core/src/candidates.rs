//! Candidate repositories and the evidence that produced them.
//!
//! Recoverable link categories are transformed directly (a developer
//! page or profile plus the package name names a repository to try).
//! External homepages go through the implicit walk: fetch the page,
//! harvest account and repository links, fall back to inferring an
//! account from the domain name, confirm it by back-link, and search
//! its repositories for the package name. Logo similarity is never
//! decided here; it is handed to a human as a review item.

use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{LinkCategory, NormalizedUrl, RepoRef, Scheme};
use crate::gateway::{AccountProfile, AccountStatus, Gateway, GatewayError};
use crate::ingest::RawLink;
use crate::review::{ReviewItem, ReviewReason};

/// How a candidate was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateSource {
    Explicit,
    IssuesLink,
    GithubPage,
    UserProfile,
    HomepageScrape,
    InferredAccount,
}

impl CandidateSource {
    pub fn tag(self) -> &'static str {
        match self {
            CandidateSource::Explicit => "explicit",
            CandidateSource::IssuesLink => "issues_link",
            CandidateSource::GithubPage => "github_page",
            CandidateSource::UserProfile => "user_profile",
            CandidateSource::HomepageScrape => "homepage_scrape",
            CandidateSource::InferredAccount => "inferred_account",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceKind {
    FieldLink,
    PageFetched,
    PageFetchFailed,
    AccountLinkFound,
    AccountInferred,
    BacklinkConfirmed,
    LogoPending,
    RepoNameMatch,
    GemspecFound,
    CandidateRefuted,
    ReviewApproved,
    ReviewRejected,
}

/// One step of provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceStep {
    pub kind: EvidenceKind,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
}

impl EvidenceStep {
    pub fn new(kind: EvidenceKind, detail: impl Into<String>) -> EvidenceStep {
        EvidenceStep {
            kind,
            detail: detail.into(),
            url: None,
        }
    }

    pub fn with_url(mut self, url: impl Into<String>) -> EvidenceStep {
        self.url = Some(url.into());
        self
    }
}

/// An `(account, repository)` hypothesis plus the trail behind it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateRepo {
    pub repo: RepoRef,
    pub source: CandidateSource,
    pub evidence: Vec<EvidenceStep>,
}

/// Transforms one classified link into its direct candidates.
///
/// Only the categories with an evident repository behind them produce
/// anything: explicit links and issues links carry the reference
/// themselves; developer pages and profiles are paired with the
/// package name. Sub-directory links are ignored outright, and
/// external sites go through [`resolve_implicit`] instead.
pub fn candidates_from_category(
    category: &LinkCategory,
    link: &RawLink,
    gem_name: &str,
) -> Vec<CandidateRepo> {
    let fields = link
        .fields
        .iter()
        .map(|f| f.name())
        .collect::<Vec<_>>()
        .join(", ");
    let field_step = |detail: String| {
        vec![EvidenceStep::new(EvidenceKind::FieldLink, detail).with_url(link.url.clone())]
    };
    match category {
        LinkCategory::GoodRepo(r) => vec![CandidateRepo {
            repo: r.clone(),
            source: CandidateSource::Explicit,
            evidence: field_step(format!("explicit repository link in {fields}")),
        }],
        LinkCategory::IssuesLink(r) => vec![CandidateRepo {
            repo: r.clone(),
            source: CandidateSource::IssuesLink,
            evidence: field_step(format!("issues link in {fields} names the repository")),
        }],
        LinkCategory::GitHubPage { username } => vec![CandidateRepo {
            repo: RepoRef {
                owner: username.clone(),
                repo: gem_name.to_string(),
            },
            source: CandidateSource::GithubPage,
            evidence: field_step(format!(
                "developer page in {fields}; pairing {username} with the package name"
            )),
        }],
        LinkCategory::UserProfile { username } => vec![CandidateRepo {
            repo: RepoRef {
                owner: username.clone(),
                repo: gem_name.to_string(),
            },
            source: CandidateSource::UserProfile,
            evidence: field_step(format!(
                "profile link in {fields}; pairing {username} with the package name"
            )),
        }],
        LinkCategory::SubDirectory { .. }
        | LinkCategory::IrrelevantOrGeneric
        | LinkCategory::ExternalSite { .. }
        | LinkCategory::Malformed => Vec::new(),
    }
}

/// Account names and repository references found on a page, in order
/// of first appearance.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PageLinks {
    pub accounts: Vec<String>,
    pub repos: Vec<RepoRef>,
}

static HREF_RE: Lazy<Regex> =
    Lazy::new(|| Regex::new(r#"href\s*=\s*["']([^"']+)["']"#).unwrap());
static BARE_URL_RE: Lazy<Regex> =
    Lazy::new(|| Regex::new(r#"https?://[^\s"'<>()\[\]]+"#).unwrap());

/// Harvests GitHub account and repository links from page text.
///
/// Scans `href` attribute values and bare URL tokens. One-segment
/// links yield account names; two-segment links yield repository
/// references (whose owner also counts as an account). Duplicates are
/// removed case-insensitively, first spelling wins.
pub fn extract_github_accounts(page_text: &str) -> PageLinks {
    let mut found: Vec<(usize, &str)> = HREF_RE
        .captures_iter(page_text)
        .filter_map(|c| c.get(1).map(|m| (m.start(), m.as_str())))
        .chain(BARE_URL_RE.find_iter(page_text).map(|m| (m.start(), m.as_str())))
        .collect();
    found.sort();
    found.dedup();

    let mut links = PageLinks::default();
    let push_account = |accounts: &mut Vec<String>, name: &str| {
        if !accounts.iter().any(|a| a.eq_ignore_ascii_case(name)) {
            accounts.push(name.to_string());
        }
    };
    for (_, token) in found {
        let Ok(url) = crate::classify::normalize_url(token) else {
            continue;
        };
        if url.host != "github.com" && url.host != "www.github.com" {
            continue;
        }
        match url.path_segments.as_slice() {
            [account] => push_account(&mut links.accounts, account),
            [owner, repo] => {
                if let Some(r) = RepoRef::from_segments(owner, repo) {
                    if !links.repos.contains(&r) {
                        links.repos.push(r);
                    }
                    push_account(&mut links.accounts, owner);
                }
            }
            _ => {}
        }
    }
    links
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum UninferableHost {
    #[error("host {0:?} is an IP address")]
    IpAddress(String),
    #[error("host {0:?} has no registrable label")]
    BareSuffix(String),
}

/// Two-label public suffixes this toolkit knows about. Anything not
/// listed falls back to treating the final label as the suffix.
const TWO_LABEL_SUFFIXES: &[&str] = &[
    "ac.jp", "ac.uk", "co.in", "co.jp", "co.kr", "co.nz", "co.uk", "co.za", "com.ar", "com.au",
    "com.br", "com.cn", "com.hk", "com.mx", "com.sg", "com.tw", "edu.au", "gov.au", "gov.uk",
    "me.uk", "ne.jp", "net.au", "net.br", "net.cn", "net.in", "net.nz", "net.uk", "or.jp",
    "org.au", "org.br", "org.cn", "org.in", "org.nz", "org.uk",
];

fn labels_without_www(host: &str) -> Vec<&str> {
    let host = host.strip_prefix("www.").unwrap_or(host);
    host.split('.').filter(|l| !l.is_empty()).collect()
}

fn suffix_len(labels: &[&str]) -> usize {
    if labels.len() >= 2 {
        let last_two = format!("{}.{}", labels[labels.len() - 2], labels[labels.len() - 1]);
        if TWO_LABEL_SUFFIXES.contains(&last_two.as_str()) {
            return 2;
        }
    }
    1
}

/// Registrable domain of a host: the public suffix plus one label,
/// with any `www.` prefix ignored.
pub fn registrable_domain(host: &str) -> Option<String> {
    let labels = labels_without_www(host);
    let suffix = suffix_len(&labels);
    if labels.len() <= suffix {
        return None;
    }
    Some(labels[labels.len() - suffix - 1..].join("."))
}

/// Guesses an account name from a homepage host: the registrable
/// domain's leftmost label, with `www.` and the public suffix dropped.
pub fn infer_account_name(host: &str) -> Result<String, UninferableHost> {
    let labels = labels_without_www(host);
    if !labels.is_empty() && labels.iter().all(|l| l.bytes().all(|b| b.is_ascii_digit())) {
        return Err(UninferableHost::IpAddress(host.to_string()));
    }
    let suffix = suffix_len(&labels);
    if labels.len() <= suffix {
        return Err(UninferableHost::BareSuffix(host.to_string()));
    }
    Ok(labels[labels.len() - suffix - 1].to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerificationOutcome {
    Verified,
    NeedsReview,
    Rejected,
}

/// Result of checking an account against the homepage it was inferred
/// from. `Verified` is only reachable through a back-link match; a
/// logo comparison alone never verifies automatically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccountVerification {
    pub outcome: VerificationOutcome,
    pub backlink_match: bool,
    /// Always false here; comparing logos is a review task.
    pub logo_checked: bool,
    pub profile: Option<AccountProfile>,
}

/// Confirms an account belongs to the homepage's owner by comparing
/// registrable domains between the profile's declared website and the
/// homepage. No website or no match leaves the logo comparison, which
/// goes to review.
pub fn verify_account(
    account: &str,
    homepage: &NormalizedUrl,
    gateway: &Gateway,
) -> Result<AccountVerification, GatewayError> {
    let profile = match gateway.account_status(account)? {
        AccountStatus::Exists(profile) => profile,
        AccountStatus::NotFound => {
            return Ok(AccountVerification {
                outcome: VerificationOutcome::Rejected,
                backlink_match: false,
                logo_checked: false,
                profile: None,
            })
        }
    };
    let homepage_domain = registrable_domain(&homepage.host);
    let website_domain = profile
        .website
        .as_deref()
        .and_then(|w| crate::classify::normalize_url(w).ok())
        .and_then(|u| registrable_domain(&u.host));
    let backlink_match = match (&homepage_domain, &website_domain) {
        (Some(a), Some(b)) => a == b,
        _ => false,
    };
    Ok(AccountVerification {
        outcome: if backlink_match {
            VerificationOutcome::Verified
        } else {
            VerificationOutcome::NeedsReview
        },
        backlink_match,
        logo_checked: false,
        profile: Some(profile),
    })
}

/// Searches an account's repositories for one named exactly like the
/// package (ignoring case) and keeps the host's spelling.
pub fn find_repo_by_name(
    account: &str,
    gem_name: &str,
    gateway: &Gateway,
    source: CandidateSource,
) -> Result<Option<CandidateRepo>, GatewayError> {
    let names = gateway.list_repos(account)?;
    let Some(found) = names.iter().find(|n| n.eq_ignore_ascii_case(gem_name)) else {
        return Ok(None);
    };
    let repo = RepoRef {
        owner: account.to_string(),
        repo: found.clone(),
    };
    let step = EvidenceStep::new(
        EvidenceKind::RepoNameMatch,
        format!("account {account} has a repository named like the package"),
    )
    .with_url(repo.url());
    Ok(Some(CandidateRepo {
        repo,
        source,
        evidence: vec![step],
    }))
}

/// Outcome of the implicit walk over one external link.
#[derive(Debug, Default)]
pub struct ImplicitResolution {
    pub candidates: Vec<CandidateRepo>,
    pub review: Option<ReviewItem>,
    /// Every step walked, dead ends included.
    pub trail: Vec<EvidenceStep>,
}

/// Runs the implicit strategy against one external homepage.
///
/// Fetch the page; take repository links found there directly (a link
/// named like the package short-circuits the rest); search harvested
/// accounts for a same-name repository; with nothing harvested, infer
/// an account from the host name, stop if it does not exist, verify it
/// by back-link, and search it. An account that only a logo could
/// confirm yields a review item instead of a candidate.
pub fn resolve_implicit(
    external_url: &NormalizedUrl,
    gem_name: &str,
    gateway: &Gateway,
) -> Result<ImplicitResolution, GatewayError> {
    let mut out = ImplicitResolution::default();
    let fetch_url = external_url.with_default_scheme(Scheme::Http);
    let rendered = fetch_url.render();

    let page_text = match gateway.fetch_page(&fetch_url) {
        Ok(text) => text,
        Err(e) if e.is_fetch_failure() => {
            out.trail.push(
                EvidenceStep::new(EvidenceKind::PageFetchFailed, format!("page unreachable: {e}"))
                    .with_url(rendered),
            );
            return Ok(out);
        }
        Err(e) => return Err(e),
    };
    let fetched_step =
        EvidenceStep::new(EvidenceKind::PageFetched, "fetched homepage").with_url(rendered.clone());
    out.trail.push(fetched_step.clone());

    let links = extract_github_accounts(&page_text);
    let mut scraped: Vec<CandidateRepo> = Vec::new();
    for repo in &links.repos {
        let step = EvidenceStep::new(
            EvidenceKind::AccountLinkFound,
            "repository link found on page",
        )
        .with_url(repo.url());
        out.trail.push(step.clone());
        scraped.push(CandidateRepo {
            repo: repo.clone(),
            source: CandidateSource::HomepageScrape,
            evidence: vec![fetched_step.clone(), step],
        });
    }

    // A direct link named like the package settles the walk with no
    // further host queries; validation still follows.
    let name_matches: Vec<CandidateRepo> = scraped
        .iter()
        .filter(|c| c.repo.repo.eq_ignore_ascii_case(gem_name))
        .cloned()
        .collect();
    if !name_matches.is_empty() {
        out.candidates = name_matches;
        return Ok(out);
    }
    out.candidates = scraped;

    if !links.accounts.is_empty() {
        for account in &links.accounts {
            let step = EvidenceStep::new(
                EvidenceKind::AccountLinkFound,
                format!("account link found on page: {account}"),
            )
            .with_url(format!("https://github.com/{account}"));
            out.trail.push(step.clone());
            match find_repo_by_name(account, gem_name, gateway, CandidateSource::HomepageScrape) {
                Ok(Some(mut candidate)) => {
                    out.trail.extend(candidate.evidence.clone());
                    candidate.evidence =
                        [vec![fetched_step.clone(), step], candidate.evidence].concat();
                    out.candidates.push(candidate);
                }
                Ok(None) => {}
                Err(GatewayError::NotFound { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        return Ok(out);
    }

    // Nothing on the page points at the host; infer from the domain.
    let inferred = match infer_account_name(&external_url.host) {
        Ok(name) => name,
        Err(_) => return Ok(out),
    };
    let inferred_step = EvidenceStep::new(
        EvidenceKind::AccountInferred,
        format!(
            "no account links on page; inferred {inferred:?} from host {}",
            external_url.host
        ),
    )
    .with_url(format!("https://github.com/{inferred}"));
    out.trail.push(inferred_step.clone());

    let verification = verify_account(&inferred, external_url, gateway)?;
    let Some(profile) = verification.profile else {
        // account does not exist: the strategy stops here
        return Ok(out);
    };

    match verification.outcome {
        VerificationOutcome::Verified => {
            let website = profile.website.clone().unwrap_or_default();
            let backlink_step = EvidenceStep::new(
                EvidenceKind::BacklinkConfirmed,
                format!("account website {website:?} points back at the homepage domain"),
            )
            .with_url(website);
            out.trail.push(backlink_step.clone());
            if let Some(mut candidate) = find_repo_by_name(
                &profile.name,
                gem_name,
                gateway,
                CandidateSource::InferredAccount,
            )? {
                out.trail.extend(candidate.evidence.clone());
                candidate.evidence = [
                    vec![fetched_step, inferred_step, backlink_step],
                    candidate.evidence,
                ]
                .concat();
                out.candidates.push(candidate);
            }
        }
        VerificationOutcome::NeedsReview => {
            let logo_step = EvidenceStep::new(
                EvidenceKind::LogoPending,
                format!(
                    "account {} has no back-link to {}; logo comparison left to review",
                    profile.name, external_url.host
                ),
            )
            .with_url(profile.avatar.clone().unwrap_or_default());
            out.trail.push(logo_step);
            if let Some(candidate) = find_repo_by_name(
                &profile.name,
                gem_name,
                gateway,
                CandidateSource::InferredAccount,
            )? {
                out.trail.extend(candidate.evidence.clone());
                let mut item = ReviewItem::new(
                    gem_name,
                    ReviewReason::LogoPending,
                    candidate.repo.clone(),
                    candidate.source,
                    format!(
                        "confirm account {} owns {} by comparing the site logo with the avatar",
                        profile.name, external_url.host
                    ),
                );
                item.homepage_url = Some(external_url.raw.clone());
                item.avatar_url = profile.avatar.clone();
                out.review = Some(item);
            }
        }
        VerificationOutcome::Rejected => unreachable!("rejected outcome has no profile"),
    }
    Ok(out)
}
