use std::fmt;

use serde::{Deserialize, Serialize};

use crate::metamodel::{spec_tree, Artefact};
use crate::repository::ProjectState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtefactStatus {
    pub id: String,
    pub kind: String,
    pub name: String,
    pub version: u32,
    /// Share of required sections with content, 0–100.
    pub completeness: u32,
}

/// One-screen status of a project: where the running iteration is, how
/// complete each artefact is, what is still open.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectReport {
    pub project: String,
    pub merge_designs: bool,
    pub selected_supports: Vec<String>,
    pub iterations: usize,
    pub running_iteration: Option<u32>,
    pub phase: Option<String>,
    pub shortened: bool,
    pub artefacts: Vec<ArtefactStatus>,
    pub open_changes: Vec<String>,
    pub last_release: Option<String>,
    pub actual_process: Option<String>,
}

pub fn completeness_percent(artefact: &Artefact) -> u32 {
    let tree = spec_tree(&artefact.kind);
    let required: Vec<&str> = tree
        .iter()
        .flat_map(|s| s.walk())
        .filter(|s| s.required)
        .map(|s| s.key.as_str())
        .collect();
    if required.is_empty() {
        // free-form kinds: complete once anything is written
        let any = artefact.sections.iter().any(|s| s.is_populated());
        return if any { 100 } else { 0 };
    }
    let done = required
        .iter()
        .filter(|k| artefact.section(k).is_some_and(|s| s.is_populated()))
        .count();
    (done * 100 / required.len()) as u32
}

pub fn project_report(state: &ProjectState) -> ProjectReport {
    let running = state.running_iteration();
    ProjectReport {
        project: state.manifest.project_name.clone(),
        merge_designs: state.profile().merge_designs,
        selected_supports: state.profile().selected_supports.iter().cloned().collect(),
        iterations: state.iterations.len(),
        running_iteration: running.map(|i| i.index),
        phase: running.and_then(|i| i.current_phase).map(|p| p.to_string()),
        shortened: running.is_some_and(|i| i.shortened),
        artefacts: state
            .artefacts
            .iter()
            .map(|a| ArtefactStatus {
                id: a.id.clone(),
                kind: a.kind.to_string(),
                name: a.name.clone(),
                version: a.version,
                completeness: completeness_percent(a),
            })
            .collect(),
        open_changes: state
            .changes
            .iter()
            .filter(|c| c.status.is_open())
            .map(|c| c.id.clone())
            .collect(),
        last_release: state.releases.last().map(|r| r.id.clone()),
        actual_process: state.manifest.actual_process_ref.clone(),
    }
}

impl fmt::Display for ProjectReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "project: {}", self.project)?;
        writeln!(
            f,
            "designs: {}",
            if self.merge_designs { "merged (PD)" } else { "split (CPD + TPD)" }
        )?;
        if !self.selected_supports.is_empty() {
            writeln!(f, "supports: {}", self.selected_supports.join(", "))?;
        }
        match (self.running_iteration, &self.phase) {
            (Some(i), Some(p)) => writeln!(
                f,
                "iteration {i} of {}: {p}{}",
                self.iterations,
                if self.shortened { " (shortened)" } else { "" }
            )?,
            _ => writeln!(f, "no iteration running ({} planned or closed)", self.iterations)?,
        }
        writeln!(f, "artefacts: {}", self.artefacts.len())?;
        for a in &self.artefacts {
            writeln!(f, "  {:<24} {:<28} v{:<3} {:>3}%", a.id, a.kind, a.version, a.completeness)?;
        }
        writeln!(
            f,
            "open changes: {}",
            if self.open_changes.is_empty() { "none".to_string() } else { self.open_changes.join(", ") }
        )?;
        writeln!(f, "last release: {}", self.last_release.as_deref().unwrap_or("none"))?;
        if let Some(actual) = &self.actual_process {
            writeln!(f, "actual process: {actual}")?;
        }
        Ok(())
    }
}
