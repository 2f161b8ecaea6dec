use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lifecycle::{IterationState, Phase};
use crate::metamodel::{ArtefactKind, ContentItem, ItemKind, KindCode, Section};
use crate::repository::ProjectState;
use crate::validation::check_release_readiness;

/// Release pipeline stages, in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReleaseStatus {
    Review,
    Beta,
    ReleaseCandidate,
    Released,
}

impl ReleaseStatus {
    pub fn next(self) -> Option<ReleaseStatus> {
        match self {
            ReleaseStatus::Review => Some(ReleaseStatus::Beta),
            ReleaseStatus::Beta => Some(ReleaseStatus::ReleaseCandidate),
            ReleaseStatus::ReleaseCandidate => Some(ReleaseStatus::Released),
            ReleaseStatus::Released => None,
        }
    }
}

impl fmt::Display for ReleaseStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReleaseStatus::Review => "review",
            ReleaseStatus::Beta => "beta",
            ReleaseStatus::ReleaseCandidate => "release_candidate",
            ReleaseStatus::Released => "released",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Release {
    pub id: String,
    pub version_label: String,
    pub status: ReleaseStatus,
    /// The PR artefact plus the artefacts it ships.
    pub payload: BTreeSet<String>,
    pub iteration_index: u32,
    #[serde(default)]
    pub parent_ref: Option<String>,
}

impl Release {
    /// The Process Release artefact in the payload.
    pub fn process_release<'a>(&self, state: &'a ProjectState) -> Option<&'a crate::metamodel::Artefact> {
        self.payload
            .iter()
            .filter_map(|id| state.get_artefact(id).ok())
            .find(|a| a.kind == ArtefactKind::PR)
    }
}

pub fn package_release(state: &mut ProjectState, iteration: u32, version_label: &str) -> Result<Release> {
    package_release_with_parent(state, iteration, version_label, None)
}

/// Packages the iteration's results into a Process Release in review.
///
/// The payload holds the design (PD, or TPD for split designs), the PLC and
/// the selected support artefacts; the PR gets one section per payload
/// artefact. A PR already produced in the iteration (and not yet shipped) is
/// reused, otherwise a new one is created.
pub fn package_release_with_parent(
    state: &mut ProjectState,
    iteration: u32,
    version_label: &str,
    parent_ref: Option<String>,
) -> Result<Release> {
    let it = state.iteration(iteration)?;
    if it.state != IterationState::Running {
        return Err(Error::IterationNotRunning(iteration));
    }
    let phase = it.current_phase.expect("running iterations have a phase");
    if phase != Phase::Deployment {
        return Err(Error::WrongPhase {
            index: iteration,
            found: phase.to_string(),
            expected: Phase::Deployment.to_string(),
        });
    }
    let blocking: Vec<_> = check_release_readiness(state, iteration)?
        .into_iter()
        .filter(|f| f.is_error())
        .collect();
    if !blocking.is_empty() {
        return Err(Error::NotReady(blocking));
    }

    let design = if state.profile().merge_designs { KindCode::Pd } else { KindCode::Tpd };
    let selected = &state.profile().selected_supports;
    let shipped: Vec<&crate::metamodel::Artefact> = state
        .artefacts
        .iter()
        .filter(|a| match a.kind.code() {
            KindCode::Plc => true,
            KindCode::Support => a.kind.support_name().is_some_and(|n| selected.contains(n)),
            code => code == design,
        })
        .collect();

    let shipped_prs: BTreeSet<&String> = state.releases.iter().flat_map(|r| r.payload.iter()).collect();
    let reusable: Vec<&crate::metamodel::Artefact> = state
        .artefacts
        .iter()
        .filter(|a| a.kind == ArtefactKind::PR && it.produced.contains(&a.id) && !shipped_prs.contains(&a.id))
        .collect();
    let mut pr = match reusable.as_slice() {
        [only] => (*only).clone(),
        _ => crate::metamodel::new_artefact(ArtefactKind::PR, version_label, state.profile())?,
    };
    pr.sections = shipped
        .iter()
        .enumerate()
        .map(|(n, a)| Section {
            spec_key: a.id.clone(),
            items: vec![ContentItem::new(
                format!("{}-P-{}", pr.id, n + 1),
                ItemKind::Note,
                format!("{} {} v{}", a.kind, a.name, a.version),
            )],
            children: Vec::new(),
        })
        .collect();
    let mut payload: BTreeSet<String> = shipped.iter().map(|a| a.id.clone()).collect();
    payload.insert(pr.id.clone());

    let id = format!(
        "R-{}",
        state
            .releases
            .iter()
            .filter_map(|r| r.id.strip_prefix("R-")?.parse::<u64>().ok())
            .max()
            .unwrap_or(0)
            + 1
    );
    state.put_artefact(pr)?;
    let release = Release {
        id,
        version_label: version_label.to_string(),
        status: ReleaseStatus::Review,
        payload,
        iteration_index: iteration,
        parent_ref,
    };
    state.releases.push(release.clone());
    Ok(release)
}

/// Moves a release one stage along review → beta → release candidate →
/// released. Reaching `released` makes it the Actual Process.
pub fn promote(state: &mut ProjectState, release_id: &str) -> Result<Release> {
    let release = state.release(release_id)?;
    let Some(next) = release.status.next() else {
        return Err(Error::AlreadyReleased(release_id.to_string()));
    };
    let iteration = release.iteration_index;
    if next == ReleaseStatus::Released {
        state.iteration_mut(iteration)?.released = Some(release_id.to_string());
        state.manifest.actual_process_ref = Some(release_id.to_string());
    }
    let release = state
        .releases
        .iter_mut()
        .find(|r| r.id == release_id)
        .expect("release exists");
    release.status = next;
    Ok(release.clone())
}
