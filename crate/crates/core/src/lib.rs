//! Link resolution for package registries.
//!
//! Registry metadata carries developer-provided links (homepage, source
//! code, bug tracker, ...) that are the only machine-readable pointers
//! from a package to its source repository. Those links are explicit and
//! correct in the best case, broken or indirect in many others. This
//! crate extracts every link from a metadata record, classifies it,
//! repairs the recoverable cases, and validates candidates against the
//! code host until a single canonical repository remains.
//!
//! The stages are independent modules wired together by [`pipeline`]:
//!
//! - [`ingest`] parses registry records and collects links with field
//!   provenance.
//! - [`classify`] normalizes each URL and assigns it one category
//!   (explicit repo, issues link, GitHub page, user profile,
//!   sub-directory, irrelevant, external site, malformed).
//! - [`candidates`] turns recoverable categories and external homepages
//!   into candidate repositories with an evidence trail.
//! - [`gateway`] is the sole network boundary: host API calls, page
//!   fetches, response caching, rate limiting, and offline fixture
//!   replay.
//! - [`validate`] confirms candidates (gemspec check, rename handling)
//!   and arbitrates to a per-package result.
//! - [`pipeline`] runs the batch: JSONL in, results + review queue +
//!   stats out.

pub mod candidates;
pub mod classify;
pub mod gateway;
pub mod ingest;
pub mod pipeline;
pub mod review;
pub mod validate;
