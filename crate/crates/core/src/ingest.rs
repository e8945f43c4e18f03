//! Registry metadata parsing and link collection.
//!
//! A record is one registry entry: a package name plus seven link
//! fields. Values are kept exactly as found; trimming and URL
//! normalization happen later so provenance stays lossless.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The seven registry fields that can carry a link.
///
/// Declaration order is the canonical field order used everywhere a
/// deterministic ordering over fields is needed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkField {
    ProjectUri,
    HomepageUri,
    WikiUri,
    DocumentationUri,
    MailingListUri,
    SourceCodeUri,
    BugTrackerUri,
}

impl LinkField {
    pub const ALL: [LinkField; 7] = [
        LinkField::ProjectUri,
        LinkField::HomepageUri,
        LinkField::WikiUri,
        LinkField::DocumentationUri,
        LinkField::MailingListUri,
        LinkField::SourceCodeUri,
        LinkField::BugTrackerUri,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LinkField::ProjectUri => "project_uri",
            LinkField::HomepageUri => "homepage_uri",
            LinkField::WikiUri => "wiki_uri",
            LinkField::DocumentationUri => "documentation_uri",
            LinkField::MailingListUri => "mailing_list_uri",
            LinkField::SourceCodeUri => "source_code_uri",
            LinkField::BugTrackerUri => "bug_tracker_uri",
        }
    }
}

impl fmt::Display for LinkField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One registry record: package name plus the seven link fields.
///
/// Raw values are stored untouched (surrounding whitespace included).
/// A field is considered populated only if its value has content after
/// trimming; whitespace-only values count as absent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackageMetadata {
    name: String,
    links: [Option<String>; 7],
}

impl PackageMetadata {
    /// Builds a record from a name and `(field, value)` pairs. Later
    /// pairs overwrite earlier ones for the same field.
    pub fn new(
        name: impl Into<String>,
        links: impl IntoIterator<Item = (LinkField, String)>,
    ) -> Result<Self, MalformedRecord> {
        let name = name.into();
        if name.trim().is_empty() {
            return Err(MalformedRecord::MissingName);
        }
        let mut slots: [Option<String>; 7] = Default::default();
        for (field, value) in links {
            slots[field as usize] = Some(value);
        }
        Ok(Self { name, links: slots })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Raw value of one field, exactly as found in the record.
    pub fn link(&self, field: LinkField) -> Option<&str> {
        self.links[field as usize].as_deref()
    }

    /// Fields whose value is non-empty after trimming, in field order.
    pub fn populated_fields(&self) -> Vec<LinkField> {
        LinkField::ALL
            .into_iter()
            .filter(|f| self.link(*f).is_some_and(|v| !v.trim().is_empty()))
            .collect()
    }
}

/// One distinct URL string and every field it appeared in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawLink {
    /// Trimmed URL string. Dedup key across fields.
    pub url: String,
    /// Fields carrying this URL, in field order.
    pub fields: BTreeSet<LinkField>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MalformedRecord {
    #[error("record is not a JSON object: {0}")]
    NotAnObject(String),
    #[error("record has no package name")]
    MissingName,
    #[error("record could not be parsed: {0}")]
    Unparseable(String),
}

/// Parses one registry metadata document (a JSON object).
///
/// `name` is required; the seven link fields are optional and may be
/// null. Unknown keys are ignored so registry payload growth does not
/// break ingestion. Non-string field values count as absent.
pub fn parse_package_record(record: &str) -> Result<PackageMetadata, MalformedRecord> {
    let value: serde_json::Value = serde_json::from_str(record)
        .map_err(|e| MalformedRecord::Unparseable(e.to_string()))?;
    parse_package_value(&value)
}

/// Same as [`parse_package_record`] for an already-parsed JSON value.
pub fn parse_package_value(value: &serde_json::Value) -> Result<PackageMetadata, MalformedRecord> {
    let obj = value
        .as_object()
        .ok_or_else(|| MalformedRecord::NotAnObject(brief(value)))?;
    let name = obj
        .get("name")
        .and_then(|v| v.as_str())
        .ok_or(MalformedRecord::MissingName)?;
    let links = LinkField::ALL.into_iter().filter_map(|field| {
        obj.get(field.name())
            .and_then(|v| v.as_str())
            .map(|s| (field, s.to_string()))
    });
    PackageMetadata::new(name, links)
}

fn brief(value: &serde_json::Value) -> String {
    let mut s = value.to_string();
    if s.len() > 40 {
        s.truncate(40);
        s.push_str("...");
    }
    s
}

/// Collects every distinct link in a record.
///
/// Links are deduplicated by trimmed exact string only; variants that
/// differ by a trailing slash stay distinct here since equivalence is a
/// normalization question. Output order is the field order of each
/// URL's first appearance.
pub fn collect_links(pkg: &PackageMetadata) -> Vec<RawLink> {
    let mut out: Vec<RawLink> = Vec::new();
    for field in LinkField::ALL {
        let Some(raw) = pkg.link(field) else { continue };
        let url = raw.trim();
        if url.is_empty() {
            continue;
        }
        match out.iter_mut().find(|l| l.url == url) {
            Some(link) => {
                link.fields.insert(field);
            }
            None => out.push(RawLink {
                url: url.to_string(),
                fields: BTreeSet::from([field]),
            }),
        }
    }
    out
}
