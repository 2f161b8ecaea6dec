//! Packaging a Process Release and walking it through review, beta and
//! release candidate to released.

use arspi_engine::metamodel::{spec_tree, REQUIREMENTS_TRACING};
use arspi_engine::{
    advance_phase, package_release, promote, start_iteration, ArtefactKind, Error, ItemKind, IterationInputs,
    LinkKind, ProjectState, TailoringProfile,
};

type Result<T> = std::result::Result<T, Box<dyn std::error::Error>>;

fn fill(project: &mut ProjectState, id: &str) -> Result<()> {
    let kind = project.get_artefact(id)?.kind.clone();
    for spec in spec_tree(&kind).iter().flat_map(|s| s.walk()) {
        if spec.required && !spec.children.iter().any(|c| c.required) && spec.key != REQUIREMENTS_TRACING {
            let item = if spec.key == "Goals" { ItemKind::Goal } else { ItemKind::Note };
            let text = if item == ItemKind::Goal { "One release per quarter".to_string() } else { spec.title.clone() };
            project.add_item(id, &spec.key, item, text, None)?;
        }
    }
    Ok(())
}

pub fn run_example() -> Result<()> {
    let mut project = ProjectState::new("release-demo", TailoringProfile::merged())?;
    start_iteration(&mut project, IterationInputs::default(), None)?;
    let prq = project.create_artefact(ArtefactKind::PRQ, "Requirements")?;
    fill(&mut project, &prq)?;
    let req = project.add_item(&prq, "Requirements", ItemKind::Requirement, "Every release is reviewed", None)?;
    advance_phase(&mut project, 1)?;
    let pd = project.create_artefact(ArtefactKind::PD, "Design")?;
    let de = project.add_item(&pd, "Processes", ItemKind::DesignElement, "Release review meeting", None)?;
    project.add_trace(&req, &de, LinkKind::Addresses)?;
    fill(&mut project, &pd)?;
    advance_phase(&mut project, 1)?;
    advance_phase(&mut project, 1)?;

    // no life cycle support yet: the release is blocked by findings
    match package_release(&mut project, 1, "2024.1") {
        Err(Error::NotReady(findings)) => {
            for f in &findings {
                println!("blocked: {f}");
            }
        }
        other => return Err(format!("expected NotReady, got {other:?}").into()),
    }

    let plc = project.create_artefact(ArtefactKind::PLC, "Life cycle support")?;
    fill(&mut project, &plc)?;
    let release = package_release(&mut project, 1, "2024.1")?;
    println!("{} {} payload: {:?}", release.id, release.status, release.payload);
    let pr = release.process_release(&project).expect("payload holds a PR");
    for section in &pr.sections {
        println!("  {} — {}", section.spec_key, section.items[0].text);
    }

    while project.release(&release.id)?.status != arspi_engine::ReleaseStatus::Released {
        let r = promote(&mut project, &release.id)?;
        println!("promoted to {}", r.status);
    }
    assert!(matches!(promote(&mut project, &release.id), Err(Error::AlreadyReleased(_))));
    assert!(matches!(package_release(&mut project, 1, "2024.2"), Err(Error::NotReady(_))));
    println!("actual process is now {}", project.manifest.actual_process_ref.as_deref().unwrap_or("-"));
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
