//! Candidate validation and per-package arbitration.
//!
//! A candidate is confirmed by asking the host for the repository
//! (following renames), then checking that the repository root carries
//! the package's gemspec. Per package, candidates are tried in order
//! of decreasing directness: explicit links, issues links, developer
//! pages and profiles, then the implicit walk. The first confirmed
//! candidate wins; disagreeing explicit links go to review instead.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::candidates::{
    candidates_from_category, resolve_implicit, CandidateRepo, CandidateSource, EvidenceKind,
    EvidenceStep,
};
use crate::classify::{classify_raw, DenyList, LinkCategory, NormalizedUrl, RepoRef};
use crate::gateway::{Gateway, GatewayError, RepoStatus};
use crate::ingest::{collect_links, LinkField, PackageMetadata, RawLink};
use crate::review::{ReviewDecision, ReviewItem, ReviewReason, ReviewState, Verdict};

/// How many root entries a missing-gemspec review item quotes.
const LISTING_EXCERPT: usize = 8;

#[derive(Debug, Clone, Default)]
pub struct ResolveConfig {
    pub denylist: DenyList,
}

/// Outcome of validating one candidate against the host.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationOutcome {
    Validated {
        canonical: RepoRef,
        renamed_from: Option<RepoRef>,
        evidence: Vec<EvidenceStep>,
    },
    Refuted {
        reason: String,
        evidence: Vec<EvidenceStep>,
    },
    NeedsReview {
        item: ReviewItem,
        evidence: Vec<EvidenceStep>,
    },
}

/// Confirms a candidate repository.
///
/// The host is asked for the repository first: gone means refuted,
/// renamed means the walk continues against the current name and the
/// old one is recorded. Confirmation is a root file named
/// `<package>.gemspec` (case-insensitive). A live repository without
/// one is never refuted outright; it goes to review with an excerpt of
/// the listing.
pub fn validate_candidate(
    candidate: &CandidateRepo,
    gem_name: &str,
    gateway: &Gateway,
) -> Result<ValidationOutcome, GatewayError> {
    let (canonical, renamed_from) = match gateway.repo_status(&candidate.repo)? {
        RepoStatus::NotFound => {
            return Ok(ValidationOutcome::Refuted {
                reason: format!("repository {} is deleted or missing", candidate.repo),
                evidence: Vec::new(),
            })
        }
        RepoStatus::Exists { canonical } => (canonical, None),
        RepoStatus::Renamed { requested, current } => (current, Some(requested)),
    };

    let listing = match gateway.fetch_repo_root_listing(&canonical) {
        Ok(listing) => listing,
        Err(GatewayError::NotFound { .. }) => {
            return Ok(ValidationOutcome::Refuted {
                reason: format!("repository {canonical} vanished during validation"),
                evidence: Vec::new(),
            })
        }
        Err(e) => return Err(e),
    };

    let wanted = format!("{gem_name}.gemspec");
    if let Some(found) = listing.iter().find(|n| n.eq_ignore_ascii_case(&wanted)) {
        let step = EvidenceStep::new(
            EvidenceKind::GemspecFound,
            format!("repository root contains {found}"),
        )
        .with_url(canonical.url());
        return Ok(ValidationOutcome::Validated {
            canonical,
            renamed_from,
            evidence: vec![step],
        });
    }

    let mut excerpt: Vec<&str> = listing.iter().take(LISTING_EXCERPT).map(String::as_str).collect();
    if listing.len() > LISTING_EXCERPT {
        excerpt.push("...");
    }
    let mut item = ReviewItem::new(
        gem_name,
        ReviewReason::NoGemspec,
        canonical.clone(),
        candidate.source,
        format!(
            "repository {} exists but its root has no {wanted} (root: [{}])",
            canonical,
            excerpt.join(", ")
        ),
    );
    item.renamed_from = renamed_from;
    Ok(ValidationOutcome::NeedsReview {
        item,
        evidence: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResolutionStatus {
    Resolved,
    Discarded,
    NeedsReview,
    /// A gateway failure interrupted this package; rerunning with the
    /// same cache picks it up again.
    Unprocessed,
}

/// One classified link occurrence in the output record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkRecord {
    pub field: LinkField,
    pub url: String,
    pub category: String,
}

/// The per-package answer, serialized one per line in the results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolutionResult {
    pub package: String,
    pub links: Vec<LinkRecord>,
    pub status: ResolutionStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repo: Option<RepoRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<CandidateSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub renamed_from: Option<RepoRef>,
    pub evidence: Vec<EvidenceStep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub review_items: Option<Vec<ReviewItem>>,
}

impl ResolutionResult {
    pub fn pending_items(&self) -> impl Iterator<Item = &ReviewItem> {
        self.review_items
            .iter()
            .flatten()
            .filter(|i| i.state == ReviewState::Pending)
    }
}

struct Arbiter {
    package: String,
    links: Vec<LinkRecord>,
    evidence: Vec<EvidenceStep>,
    pending: Vec<ReviewItem>,
    saw_candidates: bool,
    winner: Option<Win>,
}

type Win = (RepoRef, Option<RepoRef>, CandidateSource);

impl Arbiter {
    /// Validates one candidate, folding its evidence and any review
    /// item into the package state.
    fn try_candidate(
        &mut self,
        candidate: &CandidateRepo,
        include_candidate_evidence: bool,
        gateway: &Gateway,
    ) -> Result<Option<Win>, GatewayError> {
        self.saw_candidates = true;
        if include_candidate_evidence {
            self.evidence.extend(candidate.evidence.iter().cloned());
        }
        match validate_candidate(candidate, &self.package, gateway)? {
            ValidationOutcome::Validated {
                canonical,
                renamed_from,
                evidence,
            } => {
                self.evidence.extend(evidence);
                Ok(Some((canonical, renamed_from, candidate.source)))
            }
            ValidationOutcome::Refuted { reason, evidence } => {
                self.evidence.extend(evidence);
                self.evidence.push(EvidenceStep::new(
                    EvidenceKind::CandidateRefuted,
                    format!("candidate {} refuted: {reason}", candidate.repo),
                ));
                Ok(None)
            }
            ValidationOutcome::NeedsReview { item, evidence } => {
                self.evidence.extend(evidence);
                self.push_pending(item);
                Ok(None)
            }
        }
    }

    fn push_pending(&mut self, item: ReviewItem) {
        if !self.pending.iter().any(|p| p.id == item.id) {
            self.pending.push(item);
        }
    }

    fn into_result(self) -> ResolutionResult {
        let (status, reason, repo, method, renamed_from, review_items) = match self.winner {
            Some((canonical, renamed_from, source)) => (
                ResolutionStatus::Resolved,
                None,
                Some(canonical),
                Some(source),
                renamed_from,
                None,
            ),
            None if !self.pending.is_empty() => (
                ResolutionStatus::NeedsReview,
                None,
                None,
                None,
                None,
                Some(self.pending),
            ),
            None => {
                let reason = if self.saw_candidates {
                    "all_candidates_refuted"
                } else {
                    "no_usable_links"
                };
                (
                    ResolutionStatus::Discarded,
                    Some(reason.to_string()),
                    None,
                    None,
                    None,
                    None,
                )
            }
        };
        ResolutionResult {
            package: self.package,
            links: self.links,
            status,
            reason,
            repo,
            method,
            renamed_from,
            evidence: self.evidence,
            review_items,
        }
    }
}

/// Resolves one package end to end.
///
/// Gateway failures other than replay-state problems produce an
/// `Unprocessed` result so the batch can finish and the package can be
/// rerun; a missing fixture or broken cache propagates as an error.
pub fn resolve_package(
    pkg: &PackageMetadata,
    config: &ResolveConfig,
    gateway: &Gateway,
) -> Result<ResolutionResult, GatewayError> {
    let classified = classify_links(pkg, &config.denylist);
    let links = link_records(pkg, &classified);

    match resolve_inner(pkg, &classified, links.clone(), gateway) {
        Ok(result) => Ok(result),
        Err(e @ (GatewayError::MissingFixture { .. } | GatewayError::Store(_))) => Err(e),
        Err(e) => Ok(ResolutionResult {
            package: pkg.name().to_string(),
            links,
            status: ResolutionStatus::Unprocessed,
            reason: Some(e.to_string()),
            repo: None,
            method: None,
            renamed_from: None,
            evidence: Vec::new(),
            review_items: None,
        }),
    }
}

type Classified = (RawLink, Option<NormalizedUrl>, LinkCategory);

fn classify_links(pkg: &PackageMetadata, denylist: &DenyList) -> Vec<Classified> {
    collect_links(pkg)
        .into_iter()
        .map(|link| {
            let (url, category) = classify_raw(&link.url, denylist);
            (link, url, category)
        })
        .collect()
}

fn link_records(pkg: &PackageMetadata, classified: &[Classified]) -> Vec<LinkRecord> {
    let mut records = Vec::new();
    for field in LinkField::ALL {
        let Some(raw) = pkg.link(field) else { continue };
        let url = raw.trim();
        if url.is_empty() {
            continue;
        }
        if let Some((link, _, category)) = classified.iter().find(|(l, _, _)| l.url == url) {
            records.push(LinkRecord {
                field,
                url: link.url.clone(),
                category: category.tag().to_string(),
            });
        }
    }
    records
}

fn resolve_inner(
    pkg: &PackageMetadata,
    classified: &[Classified],
    links: Vec<LinkRecord>,
    gateway: &Gateway,
) -> Result<ResolutionResult, GatewayError> {
    let gem_name = pkg.name();
    let mut arbiter = Arbiter {
        package: gem_name.to_string(),
        links,
        evidence: Vec::new(),
        pending: Vec::new(),
        saw_candidates: false,
        winner: None,
    };

    let tier = |keep: fn(&LinkCategory) -> bool| -> Vec<CandidateRepo> {
        let mut out: Vec<CandidateRepo> = Vec::new();
        for (link, _, category) in classified.iter().filter(|(_, _, c)| keep(c)) {
            for candidate in candidates_from_category(category, link, gem_name) {
                if !out.iter().any(|c| c.repo == candidate.repo) {
                    out.push(candidate);
                }
            }
        }
        out
    };

    // Explicit links are validated in full: two of them disagreeing is
    // a conflict for review, not a silent first-wins.
    let explicit = tier(|c| matches!(c, LinkCategory::GoodRepo(_)));
    let mut validated: Vec<Win> = Vec::new();
    for candidate in &explicit {
        if let Some(win) = arbiter.try_candidate(candidate, true, gateway)? {
            validated.push(win);
        }
    }
    if !validated.is_empty() {
        let distinct: Vec<Win> = validated
            .iter()
            .enumerate()
            .filter(|(i, (repo, _, _))| !validated[..*i].iter().any(|(r, _, _)| r == repo))
            .map(|(_, win)| win.clone())
            .collect();
        if distinct.len() == 1 {
            arbiter.winner = distinct.into_iter().next();
            return Ok(arbiter.into_result());
        }
        let count = distinct.len();
        for (repo, renamed_from, source) in distinct {
            let mut item = ReviewItem::new(
                gem_name,
                ReviewReason::Conflict,
                repo.clone(),
                source,
                format!("explicit links validate to {count} distinct repositories; {repo} is one of them"),
            );
            item.renamed_from = renamed_from;
            arbiter.push_pending(item);
        }
        return Ok(arbiter.into_result());
    }

    // Remaining tiers stop at the first confirmation.
    for keep in [
        (|c: &LinkCategory| matches!(c, LinkCategory::IssuesLink(_))) as fn(&LinkCategory) -> bool,
        |c: &LinkCategory| {
            matches!(
                c,
                LinkCategory::GitHubPage { .. } | LinkCategory::UserProfile { .. }
            )
        },
    ] {
        for candidate in tier(keep) {
            if let Some(win) = arbiter.try_candidate(&candidate, true, gateway)? {
                arbiter.winner = Some(win);
                return Ok(arbiter.into_result());
            }
        }
    }

    for (_, url, _) in classified
        .iter()
        .filter(|(_, _, c)| matches!(c, LinkCategory::ExternalSite { .. }))
    {
        let Some(url) = url else { continue };
        let walk = resolve_implicit(url, gem_name, gateway)?;
        arbiter.evidence.extend(walk.trail);
        if let Some(item) = walk.review {
            arbiter.push_pending(item);
        }
        for candidate in &walk.candidates {
            // walk candidates' evidence is already in the trail
            if let Some(win) = arbiter.try_candidate(candidate, false, gateway)? {
                arbiter.winner = Some(win);
                return Ok(arbiter.into_result());
            }
        }
    }

    Ok(arbiter.into_result())
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReviewError {
    #[error("package {package:?} has no review item {item_id:?}")]
    UnknownReviewItem { package: String, item_id: String },
}

/// Applies one recorded decision to a result.
///
/// Approving an item resolves the package with that item's repository
/// and appends an approval step; rejecting removes it from play, and a
/// package whose items are all rejected is discarded. Reapplying a
/// decision that is already recorded changes nothing.
pub fn apply_review_decision(
    result: &ResolutionResult,
    decision: &ReviewDecision,
) -> Result<ResolutionResult, ReviewError> {
    let items = result.review_items.clone().unwrap_or_default();
    let Some(index) = items.iter().position(|i| i.id == decision.item_id) else {
        return Err(ReviewError::UnknownReviewItem {
            package: result.package.clone(),
            item_id: decision.item_id.clone(),
        });
    };

    let target_state = match decision.verdict {
        Verdict::Approve => ReviewState::Approved,
        Verdict::Reject => ReviewState::Rejected,
    };
    if items[index].state == target_state {
        return Ok(result.clone());
    }
    if result.status != ResolutionStatus::NeedsReview {
        // settled by an earlier decision; nothing left to change
        return Ok(result.clone());
    }

    let mut updated = result.clone();
    let mut items = items;
    items[index].state = target_state;
    let item = items[index].clone();
    let note = decision
        .note
        .as_deref()
        .map(|n| format!(" ({n})"))
        .unwrap_or_default();

    match decision.verdict {
        Verdict::Approve => {
            updated.status = ResolutionStatus::Resolved;
            updated.reason = None;
            updated.repo = Some(item.repo.clone());
            updated.method = Some(item.method);
            updated.renamed_from = item.renamed_from.clone();
            updated.evidence.push(
                EvidenceStep::new(
                    EvidenceKind::ReviewApproved,
                    format!("review approved item {}{note}", item.id),
                )
                .with_url(item.repo.url()),
            );
        }
        Verdict::Reject => {
            updated.evidence.push(EvidenceStep::new(
                EvidenceKind::ReviewRejected,
                format!("review rejected item {}{note}", item.id),
            ));
            if !items.iter().any(|i| i.state == ReviewState::Pending) {
                updated.status = ResolutionStatus::Discarded;
                updated.reason = Some("reviewed_rejected".to_string());
            }
        }
    }
    updated.review_items = Some(items);
    Ok(updated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::{
        GatewayConfig, RequestKey, RequestOptions, StoredResponse, Transport, TransportError,
    };
    use crate::ingest::parse_package_record;

    fn rr(owner: &str, repo: &str) -> RepoRef {
        RepoRef::from_segments(owner, repo).unwrap()
    }

    fn offline_gateway(dir: &std::path::Path) -> Gateway {
        Gateway::open(GatewayConfig::offline(dir)).unwrap()
    }

    fn seed(gw: &Gateway, url: &str, response: StoredResponse) {
        gw.cache().store(&RequestKey::get(url), &response).unwrap();
    }

    fn seed_repo(gw: &Gateway, owner: &str, repo: &str, root: &[&str]) {
        seed(
            gw,
            &format!("https://api.github.com/repos/{owner}/{repo}"),
            StoredResponse::ok(format!(r#"{{"full_name":"{owner}/{repo}"}}"#)),
        );
        let listing: Vec<serde_json::Value> = root
            .iter()
            .map(|n| serde_json::json!({"name": n, "type": "file"}))
            .collect();
        seed(
            gw,
            &format!("https://api.github.com/repos/{owner}/{repo}/contents"),
            StoredResponse::ok(serde_json::to_string(&listing).unwrap()),
        );
    }

    fn explicit_candidate(owner: &str, repo: &str) -> CandidateRepo {
        CandidateRepo {
            repo: rr(owner, repo),
            source: CandidateSource::Explicit,
            evidence: vec![EvidenceStep::new(EvidenceKind::FieldLink, "test link")],
        }
    }

    #[test]
    fn gemspec_at_root_validates() {
        let dir = tempfile::tempdir().unwrap();
        let gw = offline_gateway(dir.path());
        seed_repo(&gw, "FutureWorkshops", "notifiable-rails", &["README.md", "notifiable-rails.gemspec"]);
        let outcome = validate_candidate(
            &explicit_candidate("FutureWorkshops", "notifiable-rails"),
            "notifiable-rails",
            &gw,
        )
        .unwrap();
        match outcome {
            ValidationOutcome::Validated { canonical, renamed_from, evidence } => {
                assert_eq!(canonical, rr("FutureWorkshops", "notifiable-rails"));
                assert_eq!(renamed_from, None);
                assert_eq!(evidence[0].kind, EvidenceKind::GemspecFound);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn deleted_repository_is_refuted() {
        let dir = tempfile::tempdir().unwrap();
        let gw = offline_gateway(dir.path());
        seed(&gw, "https://api.github.com/repos/a/gone", StoredResponse::status(404));
        assert!(matches!(
            validate_candidate(&explicit_candidate("a", "gone"), "gone", &gw).unwrap(),
            ValidationOutcome::Refuted { .. }
        ));
    }

    // Composite rename: requested name redirects, current root holds
    // the gemspec. Expected output traced by hand from the fixtures.
    #[test]
    fn renamed_repository_validates_against_current_name() {
        let dir = tempfile::tempdir().unwrap();
        let gw = offline_gateway(dir.path());
        seed(
            &gw,
            "https://api.github.com/repos/a/old",
            StoredResponse::redirect(301, "https://api.github.com/repos/a/new"),
        );
        seed_repo(&gw, "a", "new", &["mygem.gemspec"]);
        let outcome =
            validate_candidate(&explicit_candidate("a", "old"), "mygem", &gw).unwrap();
        match outcome {
            ValidationOutcome::Validated { canonical, renamed_from, .. } => {
                assert_eq!(canonical, rr("a", "new"));
                assert_eq!(renamed_from, Some(rr("a", "old")));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_gemspec_goes_to_review_with_listing_excerpt() {
        let dir = tempfile::tempdir().unwrap();
        let gw = offline_gateway(dir.path());
        seed_repo(&gw, "acme", "widget", &["README.md", "src"]);
        let outcome = validate_candidate(&explicit_candidate("acme", "widget"), "widget", &gw).unwrap();
        match outcome {
            ValidationOutcome::NeedsReview { item, .. } => {
                assert_eq!(item.reason, ReviewReason::NoGemspec);
                assert!(item.detail.contains("README.md"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gemspec_match_ignores_case() {
        let dir = tempfile::tempdir().unwrap();
        let gw = offline_gateway(dir.path());
        seed_repo(&gw, "acme", "widget", &["Widget.GEMSPEC"]);
        assert!(matches!(
            validate_candidate(&explicit_candidate("acme", "widget"), "widget", &gw).unwrap(),
            ValidationOutcome::Validated { .. }
        ));
    }

    fn pkg(json: &str) -> PackageMetadata {
        parse_package_record(json).unwrap()
    }

    fn resolve(gw: &Gateway, json: &str) -> ResolutionResult {
        resolve_package(&pkg(json), &ResolveConfig::default(), gw).unwrap()
    }

    #[test]
    fn explicit_good_link_resolves() {
        let dir = tempfile::tempdir().unwrap();
        let gw = offline_gateway(dir.path());
        seed_repo(&gw, "acme", "widget", &["widget.gemspec"]);
        let result = resolve(
            &gw,
            r#"{"name":"widget","source_code_uri":"https://github.com/acme/widget"}"#,
        );
        assert_eq!(result.status, ResolutionStatus::Resolved);
        assert_eq!(result.repo, Some(rr("acme", "widget")));
        assert_eq!(result.method, Some(CandidateSource::Explicit));
        assert!(result.evidence.iter().any(|s| s.kind == EvidenceKind::GemspecFound));
        assert_eq!(result.links[0].category, "good_repo");
    }

    #[test]
    fn duplicate_explicit_links_validate_once() {
        let dir = tempfile::tempdir().unwrap();
        let gw = offline_gateway(dir.path());
        seed_repo(&gw, "acme", "widget", &["widget.gemspec"]);
        let result = resolve(
            &gw,
            r#"{"name":"widget",
                "homepage_uri":"https://github.com/acme/widget",
                "source_code_uri":"https://github.com/acme/widget/"}"#,
        );
        assert_eq!(result.status, ResolutionStatus::Resolved);
        let lookups = gw
            .calls()
            .iter()
            .filter(|c| c.kind == crate::gateway::CallKind::RepoStatus)
            .count();
        assert_eq!(lookups, 1);
    }

    #[test]
    fn conflicting_explicit_links_need_review() {
        let dir = tempfile::tempdir().unwrap();
        let gw = offline_gateway(dir.path());
        seed_repo(&gw, "one", "widget", &["widget.gemspec"]);
        seed_repo(&gw, "two", "widget", &["widget.gemspec"]);
        let result = resolve(
            &gw,
            r#"{"name":"widget",
                "homepage_uri":"https://github.com/one/widget",
                "source_code_uri":"https://github.com/two/widget"}"#,
        );
        assert_eq!(result.status, ResolutionStatus::NeedsReview);
        let items = result.review_items.unwrap();
        assert_eq!(items.len(), 2);
        assert!(items.iter().all(|i| i.reason == ReviewReason::Conflict));
    }

    #[test]
    fn refuted_explicit_does_not_block_lower_tiers() {
        let dir = tempfile::tempdir().unwrap();
        let gw = offline_gateway(dir.path());
        seed(&gw, "https://api.github.com/repos/a/dead", StoredResponse::status(404));
        seed_repo(&gw, "alice", "widget", &["widget.gemspec"]);
        let result = resolve(
            &gw,
            r#"{"name":"widget",
                "source_code_uri":"https://github.com/a/dead",
                "homepage_uri":"https://github.com/alice"}"#,
        );
        assert_eq!(result.status, ResolutionStatus::Resolved);
        assert_eq!(result.method, Some(CandidateSource::UserProfile));
        assert_eq!(result.repo, Some(rr("alice", "widget")));
    }

    #[test]
    fn deleted_only_link_discards_the_package() {
        let dir = tempfile::tempdir().unwrap();
        let gw = offline_gateway(dir.path());
        seed(&gw, "https://api.github.com/repos/a/dead", StoredResponse::status(404));
        let result = resolve(
            &gw,
            r#"{"name":"dead","source_code_uri":"https://github.com/a/dead"}"#,
        );
        assert_eq!(result.status, ResolutionStatus::Discarded);
        assert_eq!(result.reason.as_deref(), Some("all_candidates_refuted"));
    }

    #[test]
    fn no_links_discards_with_no_usable_links() {
        let dir = tempfile::tempdir().unwrap();
        let gw = offline_gateway(dir.path());
        let result = resolve(&gw, r#"{"name":"empty"}"#);
        assert_eq!(result.status, ResolutionStatus::Discarded);
        assert_eq!(result.reason.as_deref(), Some("no_usable_links"));
    }

    #[test]
    fn subdirectory_and_denylisted_links_cost_zero_calls() {
        let dir = tempfile::tempdir().unwrap();
        let gw = offline_gateway(dir.path());
        let result = resolve(
            &gw,
            r#"{"name":"quiet",
                "homepage_uri":"www.google.com",
                "source_code_uri":"https://github.com/u/r/tree/master/subgem"}"#,
        );
        assert_eq!(result.status, ResolutionStatus::Discarded);
        assert_eq!(result.reason.as_deref(), Some("no_usable_links"));
        assert!(gw.calls().is_empty());
    }

    #[test]
    fn validated_explicit_skips_implicit_entirely() {
        let dir = tempfile::tempdir().unwrap();
        let gw = offline_gateway(dir.path());
        seed_repo(&gw, "acme", "widget", &["widget.gemspec"]);
        // no fixture for the homepage: reaching it would abort offline
        let result = resolve(
            &gw,
            r#"{"name":"widget",
                "source_code_uri":"https://github.com/acme/widget",
                "homepage_uri":"http://widget-corp.example"}"#,
        );
        assert_eq!(result.status, ResolutionStatus::Resolved);
        assert!(gw
            .calls()
            .iter()
            .all(|c| c.kind != crate::gateway::CallKind::FetchPage));
    }

    #[test]
    fn issues_link_resolves_via_second_tier() {
        let dir = tempfile::tempdir().unwrap();
        let gw = offline_gateway(dir.path());
        seed_repo(&gw, "acme", "widget", &["widget.gemspec"]);
        let result = resolve(
            &gw,
            r#"{"name":"widget","bug_tracker_uri":"https://github.com/acme/widget/issues"}"#,
        );
        assert_eq!(result.status, ResolutionStatus::Resolved);
        assert_eq!(result.method, Some(CandidateSource::IssuesLink));
    }

    #[test]
    fn github_page_resolves_via_third_tier() {
        let dir = tempfile::tempdir().unwrap();
        let gw = offline_gateway(dir.path());
        seed_repo(&gw, "alice", "widget", &["widget.gemspec"]);
        let result = resolve(
            &gw,
            r#"{"name":"widget","homepage_uri":"https://alice.github.io"}"#,
        );
        assert_eq!(result.status, ResolutionStatus::Resolved);
        assert_eq!(result.method, Some(CandidateSource::GithubPage));
    }

    #[test]
    fn transient_gateway_failure_marks_package_unprocessed() {
        struct AlwaysTimeout;
        impl Transport for AlwaysTimeout {
            fn execute(
                &self,
                _key: &RequestKey,
                _options: &RequestOptions,
            ) -> Result<StoredResponse, TransportError> {
                Err(TransportError::Timeout("scripted".into()))
            }
        }
        let dir = tempfile::tempdir().unwrap();
        let mut config = GatewayConfig::new(dir.path());
        config.retry = crate::gateway::RetryPolicy { attempts: 1, base_delay_ms: 0 };
        let gw = Gateway::with_transport(config, Box::new(AlwaysTimeout)).unwrap();
        let result = resolve(
            &gw,
            r#"{"name":"widget","source_code_uri":"https://github.com/acme/widget"}"#,
        );
        assert_eq!(result.status, ResolutionStatus::Unprocessed);
        assert!(result.reason.unwrap().contains("timed out"));
    }

    #[test]
    fn missing_fixture_propagates_instead_of_unprocessed() {
        let dir = tempfile::tempdir().unwrap();
        let gw = offline_gateway(dir.path());
        let outcome = resolve_package(
            &pkg(r#"{"name":"widget","source_code_uri":"https://github.com/acme/widget"}"#),
            &ResolveConfig::default(),
            &gw,
        );
        assert!(matches!(outcome, Err(GatewayError::MissingFixture { .. })));
    }

    fn needs_review_result(gw: &Gateway) -> ResolutionResult {
        seed(gw, "http://quiet.example", StoredResponse::ok("<html>brochure</html>"));
        seed(
            gw,
            "https://api.github.com/users/quiet",
            StoredResponse::ok(
                r#"{"login":"Quiet","type":"Organization","avatar_url":"https://avatars.example/q.png"}"#,
            ),
        );
        seed(
            gw,
            "https://api.github.com/users/Quiet/repos?page=1&per_page=100",
            StoredResponse::ok(r#"[{"name":"somegem"}]"#),
        );
        resolve(gw, r#"{"name":"somegem","homepage_uri":"http://quiet.example"}"#)
    }

    #[test]
    fn approve_decision_resolves_and_is_idempotent() {
        let dir = tempfile::tempdir().unwrap();
        let gw = offline_gateway(dir.path());
        let result = needs_review_result(&gw);
        assert_eq!(result.status, ResolutionStatus::NeedsReview);
        let item_id = result.pending_items().next().unwrap().id.clone();

        let decision = ReviewDecision {
            package: "somegem".into(),
            item_id,
            verdict: Verdict::Approve,
            note: Some("logo matches".into()),
        };
        let approved = apply_review_decision(&result, &decision).unwrap();
        assert_eq!(approved.status, ResolutionStatus::Resolved);
        assert_eq!(approved.repo, Some(rr("Quiet", "somegem")));
        assert_eq!(approved.method, Some(CandidateSource::InferredAccount));
        assert!(approved
            .evidence
            .iter()
            .any(|s| s.kind == EvidenceKind::ReviewApproved));

        let again = apply_review_decision(&approved, &decision).unwrap();
        assert_eq!(again, approved);
    }

    #[test]
    fn reject_all_discards() {
        let dir = tempfile::tempdir().unwrap();
        let gw = offline_gateway(dir.path());
        let result = needs_review_result(&gw);
        let item_id = result.pending_items().next().unwrap().id.clone();
        let decision = ReviewDecision {
            package: "somegem".into(),
            item_id,
            verdict: Verdict::Reject,
            note: None,
        };
        let rejected = apply_review_decision(&result, &decision).unwrap();
        assert_eq!(rejected.status, ResolutionStatus::Discarded);
        assert_eq!(rejected.reason.as_deref(), Some("reviewed_rejected"));
        let again = apply_review_decision(&rejected, &decision).unwrap();
        assert_eq!(again, rejected);
    }

    #[test]
    fn unknown_item_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let gw = offline_gateway(dir.path());
        let result = needs_review_result(&gw);
        let decision = ReviewDecision {
            package: "somegem".into(),
            item_id: "somegem:wrong/item:conflict".into(),
            verdict: Verdict::Approve,
            note: None,
        };
        assert_eq!(
            apply_review_decision(&result, &decision),
            Err(ReviewError::UnknownReviewItem {
                package: "somegem".into(),
                item_id: "somegem:wrong/item:conflict".into(),
            })
        );
    }

    #[test]
    fn results_serialize_with_the_record_schema() {
        let dir = tempfile::tempdir().unwrap();
        let gw = offline_gateway(dir.path());
        seed_repo(&gw, "acme", "widget", &["widget.gemspec"]);
        let result = resolve(
            &gw,
            r#"{"name":"widget","source_code_uri":"https://github.com/acme/widget"}"#,
        );
        let line = serde_json::to_string(&result).unwrap();
        let value: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(value["package"], "widget");
        assert_eq!(value["status"], "resolved");
        assert_eq!(value["repo"]["owner"], "acme");
        assert_eq!(value["repo"]["name"], "widget");
        assert_eq!(value["repo"]["url"], "https://github.com/acme/widget");
        assert_eq!(value["method"], "explicit");
        assert_eq!(value["links"][0]["field"], "source_code_uri");
        assert_eq!(value["links"][0]["category"], "good_repo");
        assert!(value["evidence"].as_array().unwrap().iter().any(|s| s["kind"] == "gemspec_found"));
        assert!(value.get("renamed_from").is_none());
        assert!(value.get("review_items").is_none());

        let back: ResolutionResult = serde_json::from_str(&line).unwrap();
        assert_eq!(back, result);
    }
}
