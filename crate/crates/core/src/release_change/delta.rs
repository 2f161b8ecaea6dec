use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::change::ReferenceProcessSnapshot;
use crate::error::{Error, Result};
use crate::metamodel::{ArtefactKind, ContentItem, ItemKind, Section, SPL_DELTA_REPORT};
use crate::repository::ProjectState;
use crate::trace::{LinkKind, TraceLink};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaOptions {
    /// Link kinds followed (backwards) when collecting affected elements.
    pub edge_kinds: BTreeSet<LinkKind>,
}

impl Default for DeltaOptions {
    fn default() -> Self {
        DeltaOptions {
            edge_kinds: BTreeSet::from([
                LinkKind::DerivesFrom,
                LinkKind::Refines,
                LinkKind::Realises,
                LinkKind::Addresses,
            ]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub changed_assets: BTreeSet<String>,
    pub affected_local: BTreeSet<String>,
    /// Ids of the links traversed, sorted, each once.
    pub closure_edges: Vec<String>,
}

/// Asset ids whose hash differs, or that exist in only one snapshot.
pub fn changed_assets(old: &ReferenceProcessSnapshot, new: &ReferenceProcessSnapshot) -> BTreeSet<String> {
    let ids: BTreeSet<&String> = old.assets.keys().chain(new.assets.keys()).collect();
    ids.into_iter()
        .filter(|id| old.assets.get(*id) != new.assets.get(*id))
        .cloned()
        .collect()
}

/// Elements reachable from `start` by walking links backwards (from target
/// to source), restricted to `kinds`, together with the links walked.
///
/// A start node is only part of the result if some other reached node
/// links to it.
pub fn reverse_closure(
    links: &[TraceLink],
    start: &BTreeSet<String>,
    kinds: &BTreeSet<LinkKind>,
) -> (BTreeSet<String>, BTreeSet<String>) {
    let mut incoming: BTreeMap<&str, Vec<&TraceLink>> = BTreeMap::new();
    for link in links.iter().filter(|l| kinds.contains(&l.kind)) {
        incoming.entry(link.target.as_str()).or_default().push(link);
    }
    let mut visited: BTreeSet<&str> = start.iter().map(String::as_str).collect();
    let mut queue: VecDeque<&str> = visited.iter().copied().collect();
    let mut affected = BTreeSet::new();
    let mut edges = BTreeSet::new();
    while let Some(node) = queue.pop_front() {
        for link in incoming.get(node).into_iter().flatten() {
            edges.insert(link.id.clone());
            affected.insert(link.source.clone());
            if visited.insert(link.source.as_str()) {
                queue.push_back(link.source.as_str());
            }
        }
    }
    (affected, edges)
}

pub fn compute_delta(state: &ProjectState, changed_assets: &BTreeSet<String>) -> Result<DeltaReport> {
    compute_delta_with(&state.links, changed_assets, &DeltaOptions::default())
}

/// Impact of upstream asset changes on the local trace graph.
pub fn compute_delta_with(
    links: &[TraceLink],
    changed_assets: &BTreeSet<String>,
    options: &DeltaOptions,
) -> Result<DeltaReport> {
    if changed_assets.is_empty() {
        return Err(Error::EmptyChangeSet);
    }
    let (affected_local, edges) = reverse_closure(links, changed_assets, &options.edge_kinds);
    Ok(DeltaReport {
        changed_assets: changed_assets.clone(),
        affected_local,
        closure_edges: edges.into_iter().collect(),
    })
}

/// Writes the report into the project's SPLDeltaReport artefact when that
/// support artefact is selected. Returns the artefact id if written.
pub fn record_delta(state: &mut ProjectState, report: &DeltaReport) -> Result<Option<String>> {
    if !state.profile().selected_supports.contains(SPL_DELTA_REPORT) {
        return Ok(None);
    }
    let kind = ArtefactKind::support(SPL_DELTA_REPORT)?;
    let existing = state.artefacts_of(&kind).next().map(|a| a.id.clone());
    let id = match existing {
        Some(id) => id,
        None => state.create_artefact(kind, SPL_DELTA_REPORT)?,
    };
    let mut artefact = state.get_artefact(&id)?.clone();
    let section = |key: &str, tag: &str, values: &mut dyn Iterator<Item = &String>| Section {
        spec_key: key.to_string(),
        items: values
            .enumerate()
            .map(|(n, v)| ContentItem::new(format!("{id}-{tag}-{}", n + 1), ItemKind::Note, v.clone()))
            .collect(),
        children: Vec::new(),
    };
    artefact.sections = vec![
        section("ChangedAssets", "CA", &mut report.changed_assets.iter()),
        section("AffectedElements", "AE", &mut report.affected_local.iter()),
        section("TraversedLinks", "TL", &mut report.closure_edges.iter()),
    ];
    state.put_artefact(artefact)?;
    Ok(Some(id))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn link(id: &str, s: &str, t: &str, k: LinkKind) -> TraceLink {
        TraceLink::new(id, s, t, k)
    }

    fn set(ids: &[&str]) -> BTreeSet<String> {
        ids.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn derived_and_refined_elements_are_affected() {
        let links = vec![
            link("L-1", "D", "B", LinkKind::DerivesFrom),
            link("L-2", "E", "D", LinkKind::Refines),
            link("L-3", "F", "A", LinkKind::DerivesFrom),
        ];
        let r = compute_delta_with(&links, &set(&["B"]), &DeltaOptions::default()).unwrap();
        assert_eq!(r.affected_local, set(&["D", "E"]));
        assert_eq!(r.closure_edges, ["L-1", "L-2"]);
    }

    #[test]
    fn isolated_asset_affects_nothing() {
        let r = compute_delta_with(&[], &set(&["X"]), &DeltaOptions::default()).unwrap();
        assert!(r.affected_local.is_empty());
        assert!(r.closure_edges.is_empty());
    }

    #[test]
    fn empty_change_set_is_an_error() {
        assert!(matches!(
            compute_delta_with(&[], &BTreeSet::new(), &DeltaOptions::default()),
            Err(Error::EmptyChangeSet)
        ));
    }

    #[test]
    fn shares_links_are_not_followed_by_default() {
        let links = vec![link("L-1", "X", "B", LinkKind::Shares)];
        let r = compute_delta_with(&links, &set(&["B"]), &DeltaOptions::default()).unwrap();
        assert!(r.affected_local.is_empty());
    }

    #[test]
    fn changed_assets_covers_added_and_removed() {
        let old = ReferenceProcessSnapshot {
            assets: [("A", "1"), ("B", "1")].map(|(a, b)| (a.into(), b.into())).into(),
            ..Default::default()
        };
        let new = ReferenceProcessSnapshot {
            assets: [("B", "2"), ("C", "1")].map(|(a, b)| (a.into(), b.into())).into(),
            ..Default::default()
        };
        assert_eq!(changed_assets(&old, &new), set(&["A", "B", "C"]));
    }
}
