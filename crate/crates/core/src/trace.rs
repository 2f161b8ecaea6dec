//! Trace links between artefacts and content items.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metamodel::{Artefact, ItemKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    Addresses,
    Refines,
    Realises,
    Shares,
    DerivesFrom,
}

impl LinkKind {
    pub const ALL: [LinkKind; 5] = [
        LinkKind::Addresses,
        LinkKind::Refines,
        LinkKind::Realises,
        LinkKind::Shares,
        LinkKind::DerivesFrom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LinkKind::Addresses => "addresses",
            LinkKind::Refines => "refines",
            LinkKind::Realises => "realises",
            LinkKind::Shares => "shares",
            LinkKind::DerivesFrom => "derives_from",
        }
    }

    /// Links that make up the requirements-tracing view.
    pub fn is_tracing(self) -> bool {
        matches!(self, LinkKind::Addresses | LinkKind::Realises)
    }
}

impl fmt::Display for LinkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LinkKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.replace('-', "_");
        LinkKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidKind(s.to_string()))
    }
}

/// Directed, kinded edge between two elements (artefacts or content items).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TraceLink {
    pub id: String,
    pub source: String,
    pub target: String,
    pub kind: LinkKind,
}

impl TraceLink {
    pub fn new(id: impl Into<String>, source: impl Into<String>, target: impl Into<String>, kind: LinkKind) -> Self {
        TraceLink {
            id: id.into(),
            source: source.into(),
            target: target.into(),
            kind,
        }
    }

    pub fn same_edge(&self, other: &TraceLink) -> bool {
        self.source == other.source && self.target == other.target && self.kind == other.kind
    }
}

/// What a link endpoint is, for matching against the link-kind matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EndpointClass {
    Artefact,
    Item(ItemKind),
}

impl fmt::Display for EndpointClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EndpointClass::Artefact => f.write_str("artefact"),
            EndpointClass::Item(kind) => kind.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementRef {
    /// Owning artefact; for artefact endpoints, the artefact itself.
    pub artefact: String,
    pub class: EndpointClass,
}

/// Lookup from element id to its owner and class.
#[derive(Debug, Clone, Default)]
pub struct ElementIndex {
    elements: BTreeMap<String, ElementRef>,
}

impl ElementIndex {
    pub fn build<'a>(artefacts: impl IntoIterator<Item = &'a Artefact>) -> Self {
        let mut elements = BTreeMap::new();
        for a in artefacts {
            elements.insert(
                a.id.clone(),
                ElementRef {
                    artefact: a.id.clone(),
                    class: EndpointClass::Artefact,
                },
            );
            for (_, item) in a.items() {
                elements.insert(
                    item.id.clone(),
                    ElementRef {
                        artefact: a.id.clone(),
                        class: EndpointClass::Item(item.kind),
                    },
                );
            }
        }
        ElementIndex { elements }
    }

    pub fn get(&self, id: &str) -> Option<&ElementRef> {
        self.elements.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.elements.contains_key(id)
    }
}

/// The requirements-tracing view of a link table: one line per `addresses`
/// or `realises` link, sorted.
pub fn tracing_projection(links: &[TraceLink]) -> Vec<String> {
    let mut lines: Vec<String> = links
        .iter()
        .filter(|l| l.kind.is_tracing())
        .map(|l| format!("{} {} {}", l.source, l.kind, l.target))
        .collect();
    lines.sort();
    lines.dedup();
    lines
}
