//! Exhaustive small-model check of the iteration and release lifecycle.

use std::collections::BTreeMap;

use arspi_engine::lifecycle::{advance_phase, close_iteration, plan_project, start_iteration, IterationInputs};
use arspi_engine::metamodel::{spec_tree, GOALS, REQUIREMENTS, REQUIREMENTS_TRACING};
use arspi_engine::release_change::{package_release, promote};
use arspi_engine::{
    ArtefactKind, IterationState, ItemKind, LinkKind, Phase, ProjectState, ReleaseStatus, TailoringProfile,
};

pub const GOAL: &str = "Predictable process releases";

/// Fills every empty required leaf section with a note (Goals with
/// [`GOAL`]); RequirementsTracing is left to the link projection.
pub fn fill_required(state: &mut ProjectState, id: &str) {
    let artefact = state.get_artefact(id).unwrap().clone();
    for spec in spec_tree(&artefact.kind).iter().flat_map(|s| s.walk()) {
        let leaf = !spec.children.iter().any(|c| c.required);
        let empty = artefact.section(&spec.key).is_none_or(|s| !s.is_populated());
        if !spec.required || !leaf || !empty || spec.key == REQUIREMENTS_TRACING {
            continue;
        }
        let (kind, text) = match spec.key.as_str() {
            GOALS => (ItemKind::Goal, GOAL.to_string()),
            REQUIREMENTS => (ItemKind::Requirement, "Releases are reviewed".to_string()),
            _ => (ItemKind::Note, format!("{} content", spec.title)),
        };
        state.add_item(id, &spec.key, kind, text, None).unwrap();
    }
}

/// A merged-profile store whose PRQ, PD and PLC are complete and
/// consistent, so only the lifecycle itself decides what may happen.
pub fn minimal_store() -> ProjectState {
    let mut s = ProjectState::new("model", TailoringProfile::merged()).unwrap();
    let prq = s.create_artefact(ArtefactKind::PRQ, "requirements").unwrap();
    fill_required(&mut s, &prq);
    let pd = s.create_artefact(ArtefactKind::PD, "design").unwrap();
    let de = s.add_item(&pd, "Processes", ItemKind::DesignElement, "review step", None).unwrap();
    let req = s
        .get_artefact(&prq)
        .unwrap()
        .items()
        .find(|(_, i)| i.kind == ItemKind::Requirement)
        .map(|(_, i)| i.id.clone())
        .unwrap();
    s.add_trace(&req, &de, LinkKind::Addresses).unwrap();
    fill_required(&mut s, &pd);
    let plc = s.create_artefact(ArtefactKind::PLC, "life cycle").unwrap();
    fill_required(&mut s, &plc);
    s
}

pub fn minimal_store_with_plan(flags: &[bool]) -> ProjectState {
    let mut s = minimal_store();
    plan_project(&mut s, flags.len(), flags).unwrap();
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Start,
    Advance,
    Close,
    Package,
    Promote,
}

pub const OPS: [Op; 5] = [Op::Start, Op::Advance, Op::Close, Op::Package, Op::Promote];

/// Applies `op`; Ok(true) if it succeeded, Ok(false) if the engine refused.
pub fn apply(state: &mut ProjectState, op: Op) -> bool {
    let running = state.running_iteration().map(|i| i.index);
    let outcome = match (op, running) {
        (Op::Start, _) => start_iteration(state, IterationInputs::default(), None).map(drop),
        (Op::Advance, Some(i)) => advance_phase(state, i).map(drop),
        (Op::Close, Some(i)) => close_iteration(state, i).map(drop),
        (Op::Package, Some(i)) => package_release(state, i, "v").map(drop),
        (Op::Promote, _) => match state.releases.last().map(|r| r.id.clone()) {
            Some(id) => promote(state, &id).map(drop),
            None => return false,
        },
        (_, None) => return false,
    };
    outcome.is_ok()
}

/// Invariants that must hold in every reachable state.
pub fn check_state(s: &ProjectState) -> Result<(), String> {
    let running = s.iterations.iter().filter(|i| i.state == IterationState::Running).count();
    if running > 1 {
        return Err(format!("{running} running iterations"));
    }
    for it in &s.iterations {
        if !Phase::ALL.starts_with(&it.phase_history) {
            return Err(format!("iteration {} phase history {:?}", it.index, it.phase_history));
        }
        let releases: Vec<_> = s.releases.iter().filter(|r| r.iteration_index == it.index).collect();
        if it.state != IterationState::Closed {
            continue;
        }
        if it.shortened {
            if !releases.is_empty() || it.phase_history.last() != Some(&Phase::Realisation) {
                return Err(format!("shortened iteration {} closed with {} release(s)", it.index, releases.len()));
            }
        } else {
            if releases.len() != 1 || releases[0].status != ReleaseStatus::Released {
                return Err(format!("full iteration {} closed with {} release(s)", it.index, releases.len()));
            }
            let prs = releases[0].payload.iter().filter(|id| {
                s.get_artefact(id).is_ok_and(|a| a.kind == ArtefactKind::PR)
            });
            if prs.count() != 1 || it.phase_history.last() != Some(&Phase::Deployment) {
                return Err(format!("full iteration {} payload or phases wrong", it.index));
            }
        }
    }
    if let Some(actual) = &s.manifest.actual_process_ref {
        let ok = s.releases.iter().any(|r| &r.id == actual && r.status == ReleaseStatus::Released);
        if !ok {
            return Err(format!("actual process {actual} is not a released release"));
        }
    }
    Ok(())
}

/// Release statuses never go back and releases never vanish.
pub fn check_step(before: &ProjectState, after: &ProjectState) -> Result<(), String> {
    let now: BTreeMap<&str, ReleaseStatus> = after.releases.iter().map(|r| (r.id.as_str(), r.status)).collect();
    for r in &before.releases {
        match now.get(r.id.as_str()) {
            Some(status) if *status >= r.status => {}
            other => return Err(format!("release {} went from {} to {other:?}", r.id, r.status)),
        }
    }
    Ok(())
}

#[derive(Debug, Default, Clone, Copy)]
pub struct Census {
    pub sequences: u64,
    pub successful_ops: u64,
    pub max_closed: usize,
    pub max_released: usize,
}

/// Visits every operation sequence of length ≤ `depth`.
pub fn explore(state: &ProjectState, depth: usize, trail: &mut Vec<Op>, census: &mut Census) -> Result<(), String> {
    census.sequences += 1;
    let closed = state.iterations.iter().filter(|i| i.state == IterationState::Closed).count();
    census.max_closed = census.max_closed.max(closed);
    let released = state.releases.iter().filter(|r| r.status == ReleaseStatus::Released).count();
    census.max_released = census.max_released.max(released);
    if depth == 0 {
        return Ok(());
    }
    for op in OPS {
        let mut next = state.clone();
        trail.push(op);
        let ok = apply(&mut next, op);
        let verdict = if ok {
            census.successful_ops += 1;
            check_state(&next).and_then(|_| check_step(state, &next))
        } else if &next != state {
            Err("a refused operation changed the store".into())
        } else {
            Ok(())
        };
        verdict.map_err(|e| format!("{e} after {trail:?}"))?;
        explore(&next, depth - 1, trail, census)?;
        trail.pop();
    }
    Ok(())
}
