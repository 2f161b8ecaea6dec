//! Iterations and their phases.
//!
//! An iteration runs Analysis → Conceptualisation → Realisation →
//! Deployment. Leaving a phase requires its key artefact to exist and be
//! complete (PRQ, then CPD or PD, then TPD or PD). A shortened iteration
//! stops after Realisation and never deploys; a full one closes once its
//! Process Release is released and a PLC exists.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metamodel::{ArtefactKind, KindCode};
use crate::release_change::ChangeStatus;
use crate::repository::ProjectState;
use crate::validation::{artefact_completeness, Finding, Rule, Subject};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Phase {
    Analysis,
    Conceptualisation,
    Realisation,
    Deployment,
}

impl Phase {
    pub const ALL: [Phase; 4] = [
        Phase::Analysis,
        Phase::Conceptualisation,
        Phase::Realisation,
        Phase::Deployment,
    ];

    pub fn next(self) -> Option<Phase> {
        match self {
            Phase::Analysis => Some(Phase::Conceptualisation),
            Phase::Conceptualisation => Some(Phase::Realisation),
            Phase::Realisation => Some(Phase::Deployment),
            Phase::Deployment => None,
        }
    }

    /// Key artefact kinds that gate leaving this phase; any one of them
    /// satisfies the gate.
    pub fn gating_kinds(self) -> &'static [KindCode] {
        match self {
            Phase::Analysis => &[KindCode::Prq],
            Phase::Conceptualisation => &[KindCode::Cpd, KindCode::Pd],
            Phase::Realisation => &[KindCode::Tpd, KindCode::Pd],
            Phase::Deployment => &[],
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IterationState {
    Planned,
    Running,
    Closed,
}

impl fmt::Display for IterationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IterationState::Planned => "planned",
            IterationState::Running => "running",
            IterationState::Closed => "closed",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationInputs {
    pub vision: String,
    pub changes: BTreeSet<String>,
    pub actual_process: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Iteration {
    pub index: u32,
    pub state: IterationState,
    pub current_phase: Option<Phase>,
    pub shortened: bool,
    #[serde(default)]
    pub produced: BTreeSet<String>,
    #[serde(default)]
    pub released: Option<String>,
    #[serde(default)]
    pub inputs: Option<IterationInputs>,
    /// Phases entered, in order.
    #[serde(default)]
    pub phase_history: Vec<Phase>,
}

impl Iteration {
    fn planned(index: u32, shortened: bool) -> Self {
        Iteration {
            index,
            state: IterationState::Planned,
            current_phase: None,
            shortened,
            produced: BTreeSet::new(),
            released: None,
            inputs: None,
            phase_history: Vec::new(),
        }
    }
}

/// Outcome of [`advance_phase`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Advance {
    Entered(Phase),
    /// A shortened iteration finished Realisation and closed.
    Closed,
}

fn require_running(state: &ProjectState, index: u32) -> Result<&Iteration> {
    let it = state.iteration(index)?;
    if it.state != IterationState::Running {
        return Err(Error::IterationNotRunning(index));
    }
    Ok(it)
}

/// Findings that block leaving `phase`. Empty means the gate is open.
pub fn gate_findings(state: &ProjectState, phase: Phase) -> Vec<Finding> {
    let kinds = phase.gating_kinds();
    if kinds.is_empty() {
        return Vec::new();
    }
    let candidates: Vec<_> = state
        .artefacts
        .iter()
        .filter(|a| kinds.contains(&a.kind.code()) && a.kind.permitted_under(state.profile()))
        .collect();
    if candidates.is_empty() {
        let kind = match (phase, state.profile().merge_designs) {
            (Phase::Analysis, _) => ArtefactKind::PRQ,
            (Phase::Conceptualisation, false) => ArtefactKind::CPD,
            (Phase::Realisation, false) => ArtefactKind::TPD,
            _ => ArtefactKind::PD,
        };
        return vec![Finding {
            severity: Rule::MissingKeyArtefact.severity(),
            rule_id: Rule::MissingKeyArtefact.id().into(),
            message: format!("{phase} cannot end without a {kind}"),
            subject: Subject::KeyArtefact { kind },
        }];
    }
    candidates
        .into_iter()
        .flat_map(|a| artefact_completeness(state, &a.id).expect("artefact exists"))
        .filter(Finding::is_error)
        .collect()
}

/// Starts the next iteration.
///
/// If iterations are planned, the lowest planned one starts; `shortened`
/// overrides its planned flag when given. Otherwise a new iteration is
/// appended.
pub fn start_iteration(state: &mut ProjectState, inputs: IterationInputs, shortened: Option<bool>) -> Result<Iteration> {
    if let Some(running) = state.running_iteration() {
        return Err(Error::IterationAlreadyRunning(running.index));
    }
    for id in &inputs.changes {
        let change = state.change(id)?;
        if change.status != ChangeStatus::Accepted {
            return Err(Error::ChangeNotAccepted {
                id: id.clone(),
                status: change.status.to_string(),
            });
        }
    }
    for change in state.changes.iter_mut().filter(|c| inputs.changes.contains(&c.id)) {
        change.status = ChangeStatus::InProgress;
    }
    let planned = state
        .iterations
        .iter()
        .filter(|i| i.state == IterationState::Planned)
        .map(|i| i.index)
        .min();
    let index = match planned {
        Some(index) => index,
        None => {
            let index = state.iterations.iter().map(|i| i.index).max().unwrap_or(0) + 1;
            state.iterations.push(Iteration::planned(index, false));
            index
        }
    };
    let it = state.iteration_mut(index)?;
    if let Some(flag) = shortened {
        it.shortened = flag;
    }
    it.state = IterationState::Running;
    it.current_phase = Some(Phase::Analysis);
    it.phase_history = vec![Phase::Analysis];
    it.inputs = Some(inputs);
    Ok(it.clone())
}

pub fn advance_phase(state: &mut ProjectState, index: u32) -> Result<Advance> {
    let it = require_running(state, index)?;
    let current = it.current_phase.expect("running iterations have a phase");
    let shortened = it.shortened;
    let Some(next) = current.next() else {
        return Err(Error::WrongPhase {
            index,
            found: current.to_string(),
            expected: "a phase with a successor (close the iteration instead)".into(),
        });
    };
    let blocking = gate_findings(state, current);
    if !blocking.is_empty() {
        return Err(Error::GateNotSatisfied(blocking));
    }
    if shortened && next == Phase::Deployment {
        close_shortened(state, index);
        return Ok(Advance::Closed);
    }
    let it = state.iteration_mut(index)?;
    it.current_phase = Some(next);
    it.phase_history.push(next);
    Ok(Advance::Entered(next))
}

/// Closes a shortened iteration. Its changes go back to `accepted` so the
/// next iteration can take them up.
fn close_shortened(state: &mut ProjectState, index: u32) {
    let it = state.iteration_mut(index).expect("iteration exists");
    it.state = IterationState::Closed;
    let changes = it.inputs.as_ref().map(|i| i.changes.clone()).unwrap_or_default();
    for change in state.changes.iter_mut().filter(|c| changes.contains(&c.id)) {
        if change.status == ChangeStatus::InProgress {
            change.status = ChangeStatus::Accepted;
        }
    }
}

pub fn close_iteration(state: &mut ProjectState, index: u32) -> Result<Iteration> {
    let it = require_running(state, index)?;
    let current = it.current_phase.expect("running iterations have a phase");
    if it.shortened {
        if current != Phase::Realisation {
            return Err(Error::WrongPhase {
                index,
                found: current.to_string(),
                expected: Phase::Realisation.to_string(),
            });
        }
        let blocking = gate_findings(state, current);
        if !blocking.is_empty() {
            return Err(Error::GateNotSatisfied(blocking));
        }
        close_shortened(state, index);
        return Ok(state.iteration(index)?.clone());
    }
    if current == Phase::Deployment && !state.artefacts.iter().any(|a| a.kind == ArtefactKind::PLC) {
        return Err(Error::PlcMissing(index));
    }
    let Some(release) = it.released.clone() else {
        return Err(Error::ReleaseMissing(index));
    };
    if !state.artefacts.iter().any(|a| a.kind == ArtefactKind::PLC) {
        return Err(Error::PlcMissing(index));
    }
    let changes = it.inputs.as_ref().map(|i| i.changes.clone()).unwrap_or_default();
    for change in state.changes.iter_mut().filter(|c| changes.contains(&c.id)) {
        if change.status == ChangeStatus::InProgress {
            change.status = ChangeStatus::Resolved;
            change.resolved_by = Some(release.clone());
        }
    }
    let it = state.iteration_mut(index)?;
    it.state = IterationState::Closed;
    Ok(it.clone())
}

/// Records planned iterations after the existing ones, replacing any
/// earlier plan that has not started yet.
pub fn plan_project(state: &mut ProjectState, iteration_count: usize, shortened_flags: &[bool]) -> Result<Vec<Iteration>> {
    if iteration_count == 0 {
        return Err(Error::InvalidCount);
    }
    if shortened_flags.len() != iteration_count {
        return Err(Error::CountMismatch {
            expected: iteration_count,
            found: shortened_flags.len(),
        });
    }
    state.iterations.retain(|i| i.state != IterationState::Planned);
    let first = state.iterations.iter().map(|i| i.index).max().unwrap_or(0) + 1;
    let plan: Vec<Iteration> = shortened_flags
        .iter()
        .zip(first..)
        .map(|(&shortened, index)| Iteration::planned(index, shortened))
        .collect();
    state.iterations.extend(plan.iter().cloned());
    Ok(plan)
}
