//! Random project stores built from small blueprints.
//!
//! A blueprint is plain data (indices and strings) that proptest can shrink;
//! `build` turns it into a store through the public API, so generated
//! stores are reachable states unless a blueprint asks for raw links.

use std::collections::BTreeSet;

use arspi_engine::lifecycle::{advance_phase, close_iteration, plan_project, start_iteration, IterationInputs};
use arspi_engine::metamodel::{placement_allowed, spec_tree, REQUIREMENTS_TRACING};
use arspi_engine::release_change::{package_release, promote, ReleaseStatus};
use arspi_engine::{
    submit_change, triage_change, ArtefactKind, ChangeOrigin, ChangeStatus, ItemKind, LinkKind, ProjectState, Release,
    SupportArtefactDescriptor, TailoringProfile, TraceLink, Triage,
};
use proptest::collection::vec;
use proptest::prelude::*;

pub const SUPPORTS: [&str; 3] = ["UserEvaluationPlan", "TrainingMaterial", "SPLDeltaReport"];

#[derive(Debug, Clone)]
pub struct ItemSpec {
    pub artefact: usize,
    pub kind: usize,
    pub section: usize,
    pub text: String,
}

#[derive(Debug, Clone)]
pub struct StoreBlueprint {
    pub merged: bool,
    pub strict: bool,
    pub supports: Vec<bool>,
    pub extra_supports: Vec<String>,
    pub artefacts: Vec<usize>,
    pub items: Vec<ItemSpec>,
    pub links: Vec<(usize, usize, usize)>,
    /// Push links straight into the table instead of going through
    /// `add_trace`, as a hand-edited store would.
    pub raw_links: bool,
    pub ops: Vec<u8>,
    pub raw_releases: Vec<(String, usize)>,
    pub vision: String,
}

fn text() -> impl Strategy<Value = String> {
    prop_oneof![
        3 => "[a-z]{1,8}( [a-z]{1,8}){0,3}",
        1 => "\\PC{0,16}",
    ]
}

pub fn blueprint(
    max_artefacts: usize,
    max_items: usize,
    max_links: usize,
    raw_links: impl Strategy<Value = bool>,
    with_ops: bool,
) -> impl Strategy<Value = StoreBlueprint> {
    let items = vec(
        (0..64usize, 0..ItemKind::ALL.len(), 0..64usize, text()).prop_map(|(artefact, kind, section, text)| ItemSpec {
            artefact,
            kind,
            section,
            text,
        }),
        0..=max_items,
    );
    let ops_len = if with_ops { 12 } else { 0 };
    (
        any::<bool>(),
        any::<bool>(),
        vec(any::<bool>(), 3),
        vec("[A-Z][a-z]{2,10}", 0..3),
        vec(0..16usize, 0..=max_artefacts),
        items,
        vec((0..128usize, 0..128usize, 0..LinkKind::ALL.len()), 0..=max_links),
        raw_links,
        vec(0..8u8, 0..=ops_len),
        vec(("[0-9]\\.[0-9]", 0..4usize), 0..if with_ops { 3 } else { 1 }),
        text(),
    )
        .prop_map(
            |(merged, strict, supports, extra_supports, artefacts, items, links, raw_links, ops, raw_releases, vision)| {
                StoreBlueprint {
                    merged,
                    strict,
                    supports,
                    extra_supports,
                    artefacts,
                    items,
                    links,
                    raw_links,
                    ops,
                    raw_releases,
                    vision,
                }
            },
        )
}

/// Kinds a store with this profile may hold.
pub fn permitted_kinds(merged: bool, supports: &[String]) -> Vec<ArtefactKind> {
    let mut kinds = if merged {
        vec![ArtefactKind::PRQ, ArtefactKind::PD, ArtefactKind::PLC, ArtefactKind::PR]
    } else {
        vec![
            ArtefactKind::PRQ,
            ArtefactKind::CPD,
            ArtefactKind::TPD,
            ArtefactKind::PLC,
            ArtefactKind::PR,
        ]
    };
    kinds.extend(supports.iter().map(|s| ArtefactKind::support(s.clone()).unwrap()));
    kinds
}

/// Section keys an item of `item` kind may go to in an artefact of `kind`.
pub fn candidate_sections(kind: &ArtefactKind, item: ItemKind) -> Vec<String> {
    let keys: Vec<String> = if kind.is_free_form() {
        vec!["Overview".into(), "Notes".into()]
    } else {
        spec_tree(kind)
            .iter()
            .flat_map(|s| s.walk())
            .map(|s| s.key.clone())
            .filter(|k| k != REQUIREMENTS_TRACING)
            .collect()
    };
    keys.into_iter().filter(|k| placement_allowed(kind, k, item)).collect()
}

pub fn build(bp: &StoreBlueprint) -> ProjectState {
    let mut profile = if bp.merged { TailoringProfile::merged() } else { TailoringProfile::default() };
    profile.strict_realisation_coverage = bp.strict;
    for (name, on) in SUPPORTS.iter().zip(&bp.supports) {
        if *on {
            profile.selected_supports.insert(name.to_string());
        }
    }
    let mut state = ProjectState::new("generated", profile).unwrap();
    state.manifest.vision = bp.vision.clone();
    for extra in &bp.extra_supports {
        let _ = state.register_support_artefact(SupportArtefactDescriptor::new(extra.clone(), "extra"));
    }
    let mut supports: Vec<String> = state.profile().selected_supports.iter().cloned().collect();
    supports.extend(state.registry.extras().into_iter().map(|d| d.name));
    let kinds = permitted_kinds(bp.merged, &supports);
    for (n, k) in bp.artefacts.iter().enumerate() {
        let kind = kinds[k % kinds.len()].clone();
        state.create_artefact(kind, format!("artefact {n}")).unwrap();
    }
    if !state.artefacts.is_empty() {
        for spec in &bp.items {
            let artefact = &state.artefacts[spec.artefact % state.artefacts.len()];
            let item = ItemKind::ALL[spec.kind];
            let sections = candidate_sections(&artefact.kind, item);
            if sections.is_empty() {
                continue;
            }
            let id = artefact.id.clone();
            let key = sections[spec.section % sections.len()].clone();
            state.add_item(&id, &key, item, spec.text.clone(), None).unwrap();
        }
    }

    let mut endpoints: Vec<String> = state.artefacts.iter().map(|a| a.id.clone()).collect();
    for a in &state.artefacts {
        endpoints.extend(a.items().map(|(_, i)| i.id.clone()));
    }
    endpoints.push("GHOST-1".into());
    for (n, (s, t, k)) in bp.links.iter().enumerate() {
        let (source, target) = (&endpoints[s % endpoints.len()], &endpoints[t % endpoints.len()]);
        let kind = LinkKind::ALL[*k];
        if bp.raw_links {
            state.links.push(TraceLink::new(format!("L-{}", n + 1), source, target, kind));
        } else {
            let _ = state.add_trace(source, target, kind);
        }
    }

    for op in &bp.ops {
        apply_op(&mut state, *op);
    }
    for (n, (label, status)) in bp.raw_releases.iter().enumerate() {
        let status = [
            ReleaseStatus::Review,
            ReleaseStatus::Beta,
            ReleaseStatus::ReleaseCandidate,
            ReleaseStatus::Released,
        ][*status];
        state.releases.push(Release {
            id: format!("R-{}", 100 + n),
            version_label: label.clone(),
            status,
            payload: state.artefacts.iter().take(2).map(|a| a.id.clone()).collect(),
            iteration_index: 1,
            parent_ref: (n > 0).then(|| format!("R-{}", 99 + n)),
        });
    }
    state
}

/// One lifecycle or change operation; failures are ignored.
pub fn apply_op(state: &mut ProjectState, op: u8) {
    let running = state.running_iteration().map(|i| i.index);
    let _ = match op {
        0 => start_iteration(state, IterationInputs::default(), None).map(drop),
        1 => running.map_or(Ok(()), |i| advance_phase(state, i).map(drop)),
        2 => running.map_or(Ok(()), |i| close_iteration(state, i).map(drop)),
        3 => running.map_or(Ok(()), |i| package_release(state, i, "1.0").map(drop)),
        4 => match state.releases.last().map(|r| r.id.clone()) {
            Some(id) => promote(state, &id).map(drop),
            None => Ok(()),
        },
        5 => submit_change(state, ChangeOrigin::Internal, "change", "details", BTreeSet::new()).map(drop),
        6 => match state.changes.iter().find(|c| c.status == ChangeStatus::Submitted).map(|c| c.id.clone()) {
            Some(id) => triage_change(state, &id, Triage::Accept).map(drop),
            None => Ok(()),
        },
        _ => plan_project(state, 2, &[true, false]).map(drop),
    };
}
