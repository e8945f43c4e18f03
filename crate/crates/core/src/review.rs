//! Human-triage requests and the decisions that settle them.
//!
//! Automated resolution stops short wherever the remaining check is a
//! human judgement (logo comparison, conflicting validated candidates,
//! a repository without the expected gemspec). Each such point becomes
//! a [`ReviewItem`] carrying everything needed to decide offline, and a
//! later run merges the recorded [`ReviewDecision`]s back in.

use serde::{Deserialize, Serialize};

use crate::candidates::CandidateSource;
use crate::classify::RepoRef;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReviewReason {
    /// Back-link matched nothing; only the logo comparison is left.
    LogoPending,
    /// Several same-tier candidates validated to different repositories.
    Conflict,
    /// Repository exists but its root has no matching gemspec.
    NoGemspec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReviewState {
    Pending,
    Approved,
    Rejected,
}

/// One deferred decision about one candidate repository.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewItem {
    pub id: String,
    pub package: String,
    pub reason: ReviewReason,
    pub repo: RepoRef,
    pub method: CandidateSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub renamed_from: Option<RepoRef>,
    /// Page the candidate was derived from, when one exists.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homepage_url: Option<String>,
    /// Account avatar, for the logo comparison.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub avatar_url: Option<String>,
    pub detail: String,
    pub state: ReviewState,
}

impl ReviewItem {
    pub fn new(
        package: &str,
        reason: ReviewReason,
        repo: RepoRef,
        method: CandidateSource,
        detail: impl Into<String>,
    ) -> ReviewItem {
        let reason_tag = match reason {
            ReviewReason::LogoPending => "logo_pending",
            ReviewReason::Conflict => "conflict",
            ReviewReason::NoGemspec => "no_gemspec",
        };
        ReviewItem {
            id: format!("{package}:{}:{reason_tag}", repo.full_name()),
            package: package.to_string(),
            reason,
            repo,
            method,
            renamed_from: None,
            homepage_url: None,
            avatar_url: None,
            detail: detail.into(),
            state: ReviewState::Pending,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Approve,
    Reject,
}

/// One line of the review decision file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewDecision {
    pub package: String,
    pub item_id: String,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}
