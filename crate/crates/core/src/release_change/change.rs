use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::delta::DeltaOptions;
use crate::error::{Error, Result};
use crate::repository::ProjectState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChangeOrigin {
    Internal,
    ExternalUpdateTrigger,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChangeStatus {
    Submitted,
    Accepted,
    InProgress,
    Resolved,
    Rejected,
}

impl ChangeStatus {
    /// Still waiting for work.
    pub fn is_open(self) -> bool {
        matches!(self, ChangeStatus::Submitted | ChangeStatus::Accepted | ChangeStatus::InProgress)
    }
}

impl fmt::Display for ChangeStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChangeStatus::Submitted => "submitted",
            ChangeStatus::Accepted => "accepted",
            ChangeStatus::InProgress => "in_progress",
            ChangeStatus::Resolved => "resolved",
            ChangeStatus::Rejected => "rejected",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Triage {
    Accept,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeRequest {
    pub id: String,
    pub origin: ChangeOrigin,
    pub title: String,
    #[serde(default)]
    pub description: String,
    pub status: ChangeStatus,
    #[serde(default)]
    pub linked_assets: BTreeSet<String>,
    /// Release that resolved this change.
    #[serde(default)]
    pub resolved_by: Option<String>,
}

fn next_change_id(state: &ProjectState) -> String {
    let max = state
        .changes
        .iter()
        .filter_map(|c| c.id.strip_prefix("CR-")?.parse::<u64>().ok())
        .max()
        .unwrap_or(0);
    format!("CR-{}", max + 1)
}

pub fn submit_change(
    state: &mut ProjectState,
    origin: ChangeOrigin,
    title: &str,
    description: &str,
    linked_assets: BTreeSet<String>,
) -> Result<ChangeRequest> {
    if origin == ChangeOrigin::ExternalUpdateTrigger && linked_assets.is_empty() {
        return Err(Error::MissingLinkedAssets);
    }
    let change = ChangeRequest {
        id: next_change_id(state),
        origin,
        title: title.to_string(),
        description: description.to_string(),
        status: ChangeStatus::Submitted,
        linked_assets,
        resolved_by: None,
    };
    state.changes.push(change.clone());
    Ok(change)
}

pub fn triage_change(state: &mut ProjectState, id: &str, decision: Triage) -> Result<ChangeRequest> {
    let change = state
        .changes
        .iter_mut()
        .find(|c| c.id == id)
        .ok_or_else(|| Error::UnknownChange(id.to_string()))?;
    if change.status != ChangeStatus::Submitted {
        return Err(Error::InvalidTriageState {
            id: id.to_string(),
            status: change.status.to_string(),
        });
    }
    change.status = match decision {
        Triage::Accept => ChangeStatus::Accepted,
        Triage::Reject => ChangeStatus::Rejected,
    };
    Ok(change.clone())
}

/// Content hashes of a reference process's assets at one release.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceProcessSnapshot {
    /// Identity of the reference process; asset ids are stable within it.
    #[serde(default)]
    pub reference: String,
    #[serde(default)]
    pub label: String,
    pub assets: BTreeMap<String, String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SnapshotFile {
    Full(ReferenceProcessSnapshot),
    Bare(BTreeMap<String, String>),
}

impl ReferenceProcessSnapshot {
    /// Parses either a full snapshot object or a bare `{asset id: hash}` map.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: SnapshotFile = serde_json::from_str(text).map_err(|e| Error::CorruptFile {
            path: "<snapshot>".into(),
            line: e.line(),
            message: e.to_string(),
        })?;
        Ok(match file {
            SnapshotFile::Full(s) => s,
            SnapshotFile::Bare(assets) => ReferenceProcessSnapshot {
                assets,
                ..Default::default()
            },
        })
    }
}

struct DisjointSets {
    parent: BTreeMap<String, String>,
}

impl DisjointSets {
    fn find(&mut self, x: &str) -> String {
        let parent = self.parent.entry(x.to_string()).or_insert_with(|| x.to_string()).clone();
        if parent == x {
            return parent;
        }
        let root = self.find(&parent);
        self.parent.insert(x.to_string(), root.clone());
        root
    }

    fn union(&mut self, a: &str, b: &str) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller id becomes the root, keeps grouping deterministic
            let (root, child) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent.insert(child, root);
        }
    }
}

/// Turns a new upstream release into change requests: one per group of
/// changed assets that are connected in the local trace graph.
pub fn ingest_update_trigger(
    state: &mut ProjectState,
    old: &ReferenceProcessSnapshot,
    new: &ReferenceProcessSnapshot,
) -> Result<Vec<ChangeRequest>> {
    if old.reference != new.reference {
        return Err(Error::SnapshotMismatch {
            old: old.reference.clone(),
            new: new.reference.clone(),
        });
    }
    let changed = super::delta::changed_assets(old, new);
    if changed.is_empty() {
        return Ok(Vec::new());
    }
    let kinds = DeltaOptions::default().edge_kinds;
    let mut sets = DisjointSets {
        parent: BTreeMap::new(),
    };
    for link in state.links.iter().filter(|l| kinds.contains(&l.kind)) {
        sets.union(&link.source, &link.target);
    }
    let mut groups: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for asset in &changed {
        groups.entry(sets.find(asset)).or_default().insert(asset.clone());
    }
    let mut groups: Vec<BTreeSet<String>> = groups.into_values().collect();
    groups.sort_by(|a, b| a.first().cmp(&b.first()));

    let source = match (new.reference.as_str(), new.label.as_str()) {
        ("", "") => "reference process".to_string(),
        (r, "") => r.to_string(),
        ("", l) => l.to_string(),
        (r, l) => format!("{r} {l}"),
    };
    let mut created = Vec::new();
    for assets in groups {
        let listed: Vec<&str> = assets.iter().map(String::as_str).collect();
        let title = format!("Update trigger from {source}: {}", listed.join(", "));
        let description = format!(
            "Upstream release {source} changed {} asset(s): {}",
            listed.len(),
            listed.join(", ")
        );
        created.push(submit_change(
            state,
            ChangeOrigin::ExternalUpdateTrigger,
            &title,
            &description,
            assets,
        )?);
    }
    Ok(created)
}
