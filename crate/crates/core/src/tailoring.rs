//! Project set-up: questionnaire answers become a [`TailoringProfile`].
//!
//! The questionnaire has five questions. The rule table is:
//!
//! | answer                    | effect                                              |
//! |---------------------------|-----------------------------------------------------|
//! | scale small or medium     | `merge_designs = true` (one Process Design)         |
//! | scale large               | `merge_designs = false` (separate CPD and TPD)      |
//! | training needed           | `TrainingMaterial` selected                         |
//! | process-line based        | `SPLDeltaReport` selected                           |
//! | no pre-existing process   | first of several planned iterations is shortened    |
//! | planned iteration count   | length of the suggested iteration plan              |
//!
//! `strict_realisation_coverage` is always on by default; it only matters for
//! split designs. The merge decision can be overridden after derivation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metamodel::{
    find_spec, new_artefact, sharing_group, spec_tree, Artefact, ArtefactKind, ContentItem, ItemKind, KindCode,
    SPL_DELTA_REPORT, TRAINING_MATERIAL,
};
use crate::repository::ProjectState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectScale {
    Small,
    Medium,
    Large,
}

impl ProjectScale {
    pub const ALL: [ProjectScale; 3] = [ProjectScale::Small, ProjectScale::Medium, ProjectScale::Large];
}

impl fmt::Display for ProjectScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProjectScale::Small => "small",
            ProjectScale::Medium => "medium",
            ProjectScale::Large => "large",
        })
    }
}

impl FromStr for ProjectScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "small" => Ok(ProjectScale::Small),
            "medium" => Ok(ProjectScale::Medium),
            "large" => Ok(ProjectScale::Large),
            _ => Err(Error::ProfileInvalid(format!("unknown project scale `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuestionnaireAnswers {
    pub project_scale: ProjectScale,
    pub preexisting_process: bool,
    pub training_needed: bool,
    pub process_line_based: bool,
    pub iteration_count_planned: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailoringProfile {
    pub merge_designs: bool,
    pub selected_supports: BTreeSet<String>,
    pub strict_realisation_coverage: bool,
    #[serde(default)]
    pub notes: String,
}

impl Default for TailoringProfile {
    fn default() -> Self {
        TailoringProfile {
            merge_designs: false,
            selected_supports: BTreeSet::new(),
            strict_realisation_coverage: true,
            notes: String::new(),
        }
    }
}

impl TailoringProfile {
    pub fn merged() -> Self {
        TailoringProfile {
            merge_designs: true,
            ..TailoringProfile::default()
        }
    }

    /// Key artefact kinds a project with this profile produces.
    pub fn key_kinds(&self) -> Vec<ArtefactKind> {
        if self.merge_designs {
            vec![ArtefactKind::PRQ, ArtefactKind::PD, ArtefactKind::PLC, ArtefactKind::PR]
        } else {
            vec![
                ArtefactKind::PRQ,
                ArtefactKind::CPD,
                ArtefactKind::TPD,
                ArtefactKind::PLC,
                ArtefactKind::PR,
            ]
        }
    }
}

pub fn derive_profile(answers: &QuestionnaireAnswers) -> TailoringProfile {
    let mut notes = Vec::new();
    let merge_designs = match answers.project_scale {
        ProjectScale::Small | ProjectScale::Medium => {
            notes.push(format!(
                "{} project: conceptual and technical design merged into one Process Design",
                answers.project_scale
            ));
            true
        }
        ProjectScale::Large => {
            notes.push("large project: separate conceptual and technical designs".to_string());
            false
        }
    };
    let mut selected_supports = BTreeSet::new();
    if answers.training_needed {
        selected_supports.insert(TRAINING_MATERIAL.to_string());
        notes.push("training needed: TrainingMaterial selected".to_string());
    }
    if answers.process_line_based {
        selected_supports.insert(SPL_DELTA_REPORT.to_string());
        notes.push("process-line variant: SPLDeltaReport selected".to_string());
    }
    let plan = suggest_plan(answers);
    if plan.first() == Some(&true) {
        notes.push("no pre-existing process: first iteration shortened (demonstrator only)".to_string());
    }
    notes.push(format!("{} iteration(s) planned", plan.len()));
    TailoringProfile {
        merge_designs,
        selected_supports,
        strict_realisation_coverage: true,
        notes: notes.join("; "),
    }
}

/// Shortened flags for the planned iterations.
///
/// Without a pre-existing process to build on, the first of several
/// iterations delivers a demonstrator only and skips deployment.
pub fn suggest_plan(answers: &QuestionnaireAnswers) -> Vec<bool> {
    let count = answers.iteration_count_planned.max(1) as usize;
    (0..count)
        .map(|i| i == 0 && count > 1 && !answers.preexisting_process)
        .collect()
}

/// Sets the store's profile and creates empty skeletons for newly selected
/// support artefacts.
pub fn apply_profile(state: &mut ProjectState, profile: TailoringProfile) -> Result<Vec<String>> {
    for name in &profile.selected_supports {
        if !state.registry.contains(name) {
            return Err(Error::UnknownSupport(name.clone()));
        }
    }
    if profile.merge_designs != state.manifest.profile.merge_designs {
        let blocking: Vec<&str> = state
            .artefacts
            .iter()
            .filter(|a| matches!(a.kind.code(), KindCode::Cpd | KindCode::Tpd | KindCode::Pd))
            .map(|a| a.kind.code().as_str())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if !blocking.is_empty() {
            return Err(Error::IncompatibleRetailoring(blocking.join("/")));
        }
    }
    let missing: Vec<String> = profile
        .selected_supports
        .iter()
        .filter(|name| {
            !state
                .artefacts
                .iter()
                .any(|a| a.kind.support_name() == Some(name.as_str()))
        })
        .cloned()
        .collect();
    state.manifest.profile = profile;
    let mut created = Vec::new();
    for name in missing {
        let kind = ArtefactKind::support(name.clone())?;
        let artefact = new_artefact(kind, name, &state.manifest.profile)?;
        created.push(state.put_artefact(artefact)?.id.clone());
    }
    Ok(created)
}

/// Builds a Process Design from a CPD and a TPD.
///
/// Sections keep CPD content first; TPD items follow. In shared sections
/// (e.g. Goals) a TPD item whose kind and text already appear in the CPD
/// section is the same shared content and is folded into it.
pub fn merge_designs(cpd: &Artefact, tpd: &Artefact) -> Result<Artefact> {
    if cpd.kind != ArtefactKind::CPD {
        return Err(Error::KindMismatch {
            expected: ArtefactKind::CPD,
            found: cpd.kind.clone(),
        });
    }
    if tpd.kind != ArtefactKind::TPD {
        return Err(Error::KindMismatch {
            expected: ArtefactKind::TPD,
            found: tpd.kind.clone(),
        });
    }
    let profile = TailoringProfile::merged();
    let mut pd = new_artefact(ArtefactKind::PD, cpd.name.clone(), &profile)?;
    let pd_tree = spec_tree(&ArtefactKind::PD);

    let mut cpd_texts: BTreeMap<&str, Vec<(ItemKind, &str)>> = BTreeMap::new();
    for s in cpd.walk_sections() {
        cpd_texts
            .entry(&s.spec_key)
            .or_default()
            .extend(s.items.iter().map(|i| (i.kind, i.text.as_str())));
    }
    for (from_tpd, section) in cpd
        .walk_sections()
        .map(|s| (false, s))
        .chain(tpd.walk_sections().map(|s| (true, s)))
    {
        if find_spec(&pd_tree, &section.spec_key).is_none() {
            return Err(Error::UnknownSection {
                kind: ArtefactKind::PD,
                key: section.spec_key.clone(),
            });
        }
        let shared = sharing_group(&section.spec_key).is_some();
        let target = pd.ensure_section(&section.spec_key)?;
        for item in &section.items {
            let folded = from_tpd
                && shared
                && cpd_texts
                    .get(section.spec_key.as_str())
                    .is_some_and(|t| t.contains(&(item.kind, item.text.as_str())));
            if !folded {
                target.items.push(ContentItem::clone(item));
            }
        }
    }
    Ok(pd)
}

/// Replaces a stored CPD/TPD pair by their merged Process Design.
///
/// Trace links pointing at either artefact are retargeted to the new PD;
/// links that become identical collapse. The store switches to the merged
/// profile.
pub fn merge_designs_in_store(state: &mut ProjectState, cpd_id: &str, tpd_id: &str) -> Result<String> {
    let cpd = state.get_artefact(cpd_id)?;
    let tpd = state.get_artefact(tpd_id)?;
    let pd = merge_designs(cpd, tpd)?;
    let pd_id = pd.id.clone();

    // folded TPD items live on as their CPD twin
    let mut renamed: BTreeMap<String, String> = BTreeMap::new();
    for (key, item) in tpd.items().filter(|(_, i)| pd.find_item(&i.id).is_none()) {
        let twin = cpd
            .walk_sections()
            .filter(|s| s.spec_key == key)
            .flat_map(|s| s.items.iter())
            .find(|c| c.kind == item.kind && c.text == item.text);
        if let Some(twin) = twin {
            renamed.insert(item.id.clone(), twin.id.clone());
        }
    }
    renamed.insert(cpd_id.to_string(), pd_id.clone());
    renamed.insert(tpd_id.to_string(), pd_id.clone());

    let mut next = state.clone();
    next.artefacts.retain(|a| a.id != cpd_id && a.id != tpd_id);
    next.manifest.profile.merge_designs = true;
    for link in &mut next.links {
        for end in [&mut link.source, &mut link.target] {
            if let Some(to) = renamed.get(end.as_str()) {
                *end = to.clone();
            }
        }
    }
    next.dedup_links();
    for iteration in &mut next.iterations {
        if iteration.produced.remove(cpd_id) | iteration.produced.remove(tpd_id) {
            iteration.produced.insert(pd_id.clone());
        }
    }
    next.put_artefact(pd)?;
    next.sync_requirements_tracing();
    *state = next;
    Ok(pd_id)
}
