//! Project state and its file-backed store.
//!
//! [`ProjectState`] is the in-memory value of one SPI project: manifest,
//! artefacts, trace links, iterations, change requests and releases. All
//! engine operations work on it. [`ProjectStore`] binds a state to a
//! directory, holds the writer lock and persists it with [`ProjectStore::save`].

mod fs;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use fs::{
    init_project, parse_artefact, parse_changes, parse_iterations, parse_links, parse_manifest,
    parse_releases, to_canonical_json, ProjectStore, ARTEFACT_DIR, CHANGES_FILE, ITERATIONS_FILE,
    LINKS_FILE, LOCK_FILE, MANIFEST_FILE, RELEASES_FILE, SCHEMA_VERSION, TXN_DIR,
};

use crate::error::{Error, Result};
use crate::lifecycle::{Iteration, IterationState};
use crate::metamodel::{
    new_artefact, validate_id, Artefact, ArtefactKind, ContentItem, ItemKind, KindCode,
    SupportArtefactDescriptor, SupportRegistry, REQUIREMENTS_TRACING,
};
use crate::release_change::{ChangeRequest, Release};
use crate::tailoring::TailoringProfile;
use crate::trace::{tracing_projection, ElementIndex, LinkKind, TraceLink};
use crate::validation::LinkKindMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectManifest {
    pub project_name: String,
    pub profile: TailoringProfile,
    #[serde(default)]
    pub vision: String,
    #[serde(default)]
    pub actual_process_ref: Option<String>,
    pub schema_version: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectState {
    pub manifest: ProjectManifest,
    pub registry: SupportRegistry,
    /// In creation order.
    pub artefacts: Vec<Artefact>,
    pub links: Vec<TraceLink>,
    pub iterations: Vec<Iteration>,
    pub changes: Vec<ChangeRequest>,
    pub releases: Vec<Release>,
}

impl ProjectState {
    pub fn new(name: impl Into<String>, profile: TailoringProfile) -> Result<Self> {
        let registry = SupportRegistry::default();
        if let Some(unknown) = profile
            .selected_supports
            .iter()
            .find(|s| !registry.contains(s))
        {
            return Err(Error::ProfileInvalid(format!("unknown support artefact `{unknown}`")));
        }
        Ok(ProjectState {
            manifest: ProjectManifest {
                project_name: name.into(),
                profile,
                vision: String::new(),
                actual_process_ref: None,
                schema_version: SCHEMA_VERSION,
            },
            registry,
            artefacts: Vec::new(),
            links: Vec::new(),
            iterations: Vec::new(),
            changes: Vec::new(),
            releases: Vec::new(),
        })
    }

    pub fn profile(&self) -> &TailoringProfile {
        &self.manifest.profile
    }

    pub fn get_artefact(&self, id: &str) -> Result<&Artefact> {
        self.artefacts
            .iter()
            .find(|a| a.id == id)
            .ok_or_else(|| Error::UnknownId(id.to_string()))
    }

    /// Artefacts in creation order, optionally restricted to one kind code.
    pub fn list_artefacts(&self, kind: Option<KindCode>) -> Vec<&Artefact> {
        self.artefacts
            .iter()
            .filter(|a| kind.is_none_or(|k| a.kind.code() == k))
            .collect()
    }

    pub fn artefacts_of(&self, kind: &ArtefactKind) -> impl Iterator<Item = &Artefact> + '_ {
        let kind = kind.clone();
        self.artefacts.iter().filter(move |a| a.kind == kind)
    }

    pub fn element_index(&self) -> ElementIndex {
        ElementIndex::build(&self.artefacts)
    }

    /// Stores an artefact. A new id is inserted as given; an existing one is
    /// replaced and its version becomes the stored version plus one.
    ///
    /// The artefact must be permitted by the profile, conform to its section
    /// structure, use project-unique item ids and keep every item that a
    /// trace link points at.
    pub fn put_artefact(&mut self, mut artefact: Artefact) -> Result<&Artefact> {
        validate_id(&artefact.id)?;
        if !artefact.kind.permitted_under(&self.manifest.profile) {
            return Err(Error::KindNotPermitted {
                kind: artefact.kind.clone(),
            });
        }
        if let Some(name) = artefact.kind.support_name() {
            if !self.registry.contains(name) {
                return Err(Error::UnknownSupport(name.to_string()));
            }
        }
        artefact.check_structure()?;

        let mut taken: BTreeSet<&str> = BTreeSet::new();
        for other in self.artefacts.iter().filter(|a| a.id != artefact.id) {
            taken.insert(&other.id);
            taken.extend(other.items().map(|(_, i)| i.id.as_str()));
        }
        let mut own = BTreeSet::new();
        for (_, item) in artefact.items() {
            validate_id(&item.id)?;
            if taken.contains(item.id.as_str()) || item.id == artefact.id || !own.insert(item.id.as_str()) {
                return Err(Error::DuplicateId(item.id.clone()));
            }
        }

        let position = self.artefacts.iter().position(|a| a.id == artefact.id);
        if let Some(pos) = position {
            let old = &self.artefacts[pos];
            for (_, item) in old.items() {
                if !own.contains(item.id.as_str()) && self.is_link_endpoint(&item.id) {
                    return Err(Error::DanglingEndpoint(item.id.clone()));
                }
            }
            artefact.version = old.version + 1;
        }
        let id = artefact.id.clone();
        match position {
            Some(pos) => self.artefacts[pos] = artefact,
            None => self.artefacts.push(artefact),
        }
        self.mark_produced(&id);
        Ok(self.get_artefact(&id).expect("just stored"))
    }

    /// Creates and stores a fresh artefact, returning its id.
    pub fn create_artefact(&mut self, kind: ArtefactKind, name: impl Into<String>) -> Result<String> {
        let artefact = new_artefact(kind, name, &self.manifest.profile)?;
        Ok(self.put_artefact(artefact)?.id.clone())
    }

    /// Adds a content item to a section, allocating an id unless one is given.
    pub fn add_item(
        &mut self,
        artefact_id: &str,
        section_key: &str,
        kind: ItemKind,
        text: impl Into<String>,
        id: Option<String>,
    ) -> Result<String> {
        let id = match id {
            Some(id) => id,
            None => self.next_item_id(kind),
        };
        let mut artefact = self.get_artefact(artefact_id)?.clone();
        artefact.add_item(section_key, ContentItem::new(id.clone(), kind, text))?;
        self.put_artefact(artefact)?;
        Ok(id)
    }

    /// Removes all items of a section (e.g. to rewrite it).
    pub fn clear_section(&mut self, artefact_id: &str, section_key: &str) -> Result<()> {
        let mut artefact = self.get_artefact(artefact_id)?.clone();
        let kind = artefact.kind.clone();
        let section = artefact
            .section_mut(section_key)
            .ok_or_else(|| Error::UnknownSection {
                kind,
                key: section_key.to_string(),
            })?;
        section.items.clear();
        self.put_artefact(artefact)?;
        Ok(())
    }

    fn next_item_id(&self, kind: ItemKind) -> String {
        let prefix = format!("{}-", kind.id_prefix());
        let max = self
            .artefacts
            .iter()
            .flat_map(|a| a.items())
            .filter_map(|(_, i)| i.id.strip_prefix(&prefix)?.parse::<u64>().ok())
            .max()
            .unwrap_or(0);
        format!("{prefix}{}", max + 1)
    }

    fn is_link_endpoint(&self, id: &str) -> bool {
        self.links.iter().any(|l| l.source == id || l.target == id)
    }

    /// Records a trace link. An identical link (same source, target and
    /// kind) is a no-op and returns the existing id.
    pub fn add_trace(&mut self, source: &str, target: &str, kind: LinkKind) -> Result<String> {
        let index = self.element_index();
        let source_ref = index
            .get(source)
            .ok_or_else(|| Error::DanglingEndpoint(source.to_string()))?;
        let target_ref = index
            .get(target)
            .ok_or_else(|| Error::DanglingEndpoint(target.to_string()))?;
        if !LinkKindMatrix::standard().allows(source_ref.class, target_ref.class, kind) {
            return Err(Error::KindMatrixViolation {
                link: kind.to_string(),
                source_class: source_ref.class.to_string(),
                target_class: target_ref.class.to_string(),
            });
        }
        if let Some(existing) = self
            .links
            .iter()
            .find(|l| l.source == source && l.target == target && l.kind == kind)
        {
            return Ok(existing.id.clone());
        }
        let id = self.next_link_id();
        self.links.push(TraceLink::new(id.clone(), source, target, kind));
        if kind.is_tracing() {
            self.sync_requirements_tracing();
        }
        Ok(id)
    }

    fn next_link_id(&self) -> String {
        let max = self
            .links
            .iter()
            .filter_map(|l| l.id.strip_prefix("L-")?.parse::<u64>().ok())
            .max()
            .unwrap_or(0);
        format!("L-{}", max + 1)
    }

    /// Collapses links with identical (source, target, kind), keeping the
    /// first occurrence.
    pub fn dedup_links(&mut self) {
        let mut seen = BTreeSet::new();
        self.links
            .retain(|l| seen.insert((l.source.clone(), l.target.clone(), l.kind)));
    }

    /// Rewrites every materialised `RequirementsTracing` section as the
    /// projection of the link table. Artefacts whose section changes get a
    /// new version.
    pub fn sync_requirements_tracing(&mut self) {
        let lines = tracing_projection(&self.links);
        let mut changed = Vec::new();
        for artefact in &mut self.artefacts {
            let id = artefact.id.clone();
            let Some(section) = artefact.section_mut(REQUIREMENTS_TRACING) else {
                continue;
            };
            if section.texts() == lines {
                continue;
            }
            section.items = lines
                .iter()
                .enumerate()
                .map(|(n, line)| ContentItem::new(format!("{id}-RT-{}", n + 1), ItemKind::Note, line.clone()))
                .collect();
            artefact.version += 1;
            changed.push(id);
        }
        for id in changed {
            self.mark_produced(&id);
        }
    }

    pub fn register_support_artefact(&mut self, descriptor: SupportArtefactDescriptor) -> Result<()> {
        self.registry.register(descriptor)
    }

    pub fn running_iteration(&self) -> Option<&Iteration> {
        self.iterations
            .iter()
            .find(|i| i.state == IterationState::Running)
    }

    pub fn iteration(&self, index: u32) -> Result<&Iteration> {
        self.iterations
            .iter()
            .find(|i| i.index == index)
            .ok_or(Error::UnknownIteration(index))
    }

    pub(crate) fn iteration_mut(&mut self, index: u32) -> Result<&mut Iteration> {
        self.iterations
            .iter_mut()
            .find(|i| i.index == index)
            .ok_or(Error::UnknownIteration(index))
    }

    fn mark_produced(&mut self, id: &str) {
        if let Some(it) = self
            .iterations
            .iter_mut()
            .find(|i| i.state == IterationState::Running)
        {
            it.produced.insert(id.to_string());
        }
    }

    pub fn change(&self, id: &str) -> Result<&ChangeRequest> {
        self.changes
            .iter()
            .find(|c| c.id == id)
            .ok_or_else(|| Error::UnknownChange(id.to_string()))
    }

    pub fn release(&self, id: &str) -> Result<&Release> {
        self.releases
            .iter()
            .find(|r| r.id == id)
            .ok_or_else(|| Error::UnknownId(id.to_string()))
    }

    /// Link endpoints that resolve to nothing.
    pub fn dangling_endpoints(&self) -> Vec<String> {
        let index = self.element_index();
        let mut out = Vec::new();
        for l in &self.links {
            for end in [&l.source, &l.target] {
                if !index.contains(end) {
                    out.push(end.clone());
                }
            }
        }
        out
    }
}
