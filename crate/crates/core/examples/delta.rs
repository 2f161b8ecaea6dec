//! A process derived from a reference process reacts to an upstream release:
//! changed assets, the local elements they affect, and the change requests
//! raised for them.

use std::collections::BTreeMap;

use arspi_engine::release_change::record_delta;
use arspi_engine::{
    compute_delta, ingest_update_trigger, ArtefactKind, ItemKind, LinkKind, ProjectState, ReferenceProcessSnapshot,
    TailoringProfile,
};

fn snapshot(label: &str, assets: &[(&str, &str)]) -> ReferenceProcessSnapshot {
    ReferenceProcessSnapshot {
        reference: "company-reference-process".into(),
        label: label.into(),
        assets: assets.iter().map(|(a, h)| (a.to_string(), h.to_string())).collect::<BTreeMap<_, _>>(),
    }
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut profile = TailoringProfile::merged();
    profile.selected_supports.insert("SPLDeltaReport".into());
    let mut project = ProjectState::new("variant", profile)?;

    let pd = project.create_artefact(ArtefactKind::PD, "Variant design")?;
    for asset in ["RP-REVIEW", "RP-TEST", "RP-DEPLOY"] {
        project.add_item(&pd, "Artefacts", ItemKind::Asset, format!("reference asset {asset}"), Some(asset.into()))?;
    }
    let review = project.add_item(&pd, "Processes", ItemKind::DesignElement, "Local review step", None)?;
    let checklist = project.add_item(&pd, "Processes", ItemKind::DesignElement, "Review checklist", None)?;
    let test = project.add_item(&pd, "Processes", ItemKind::DesignElement, "Local test step", None)?;
    project.add_trace(&review, "RP-REVIEW", LinkKind::DerivesFrom)?;
    project.add_trace(&checklist, &review, LinkKind::Refines)?;
    project.add_trace(&test, "RP-TEST", LinkKind::DerivesFrom)?;

    let old = snapshot("4.1", &[("RP-REVIEW", "a1"), ("RP-TEST", "b1"), ("RP-DEPLOY", "c1")]);
    let new = snapshot("4.2", &[("RP-REVIEW", "a2"), ("RP-TEST", "b1"), ("RP-DEPLOY", "c2")]);
    let changed = arspi_engine::release_change::changed_assets(&old, &new);
    let report = compute_delta(&project, &changed)?;
    println!("changed: {:?}", report.changed_assets);
    println!("affected: {:?}", report.affected_local);
    println!("links walked: {:?}", report.closure_edges);
    assert!(report.affected_local.contains(&checklist));
    assert!(!report.affected_local.contains(&test));

    if let Some(id) = record_delta(&mut project, &report)? {
        println!("report stored in {id}");
    }
    for change in ingest_update_trigger(&mut project, &old, &new)? {
        println!("{} [{}] {}", change.id, change.status, change.title);
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
