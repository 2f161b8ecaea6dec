//! A small SPI project over two iterations: a shortened first iteration that
//! ends with a demonstrator, then a full iteration that ships a release.

use std::collections::BTreeSet;

use arspi_engine::metamodel::{spec_tree, GOALS, REQUIREMENTS, REQUIREMENTS_TRACING};
use arspi_engine::tailoring::suggest_plan;
use arspi_engine::{
    advance_phase, apply_profile, close_iteration, derive_profile, package_release, plan_project, promote,
    start_iteration, submit_change, triage_change, validation, Advance, ArtefactKind, ChangeOrigin, ItemKind,
    IterationInputs, LinkKind, Phase, ProjectScale, ProjectState, QuestionnaireAnswers, TailoringProfile, Triage,
};

type Result<T> = std::result::Result<T, Box<dyn std::error::Error>>;

const GOAL: &str = "Shorten the onboarding of new developers";

/// Writes a note into every required section that is still empty; Goals get
/// the project goal so the shared sections agree.
fn fill(project: &mut ProjectState, id: &str) -> Result<()> {
    let artefact = project.get_artefact(id)?.clone();
    for spec in spec_tree(&artefact.kind).iter().flat_map(|s| s.walk()) {
        let leaf = !spec.children.iter().any(|c| c.required);
        let empty = artefact.section(&spec.key).is_none_or(|s| !s.is_populated());
        if !spec.required || !leaf || !empty || spec.key == REQUIREMENTS_TRACING || spec.key == REQUIREMENTS {
            continue;
        }
        if spec.key == GOALS {
            project.add_item(id, GOALS, ItemKind::Goal, GOAL, None)?;
        } else {
            project.add_item(id, &spec.key, ItemKind::Note, format!("{} (draft)", spec.title), None)?;
        }
    }
    Ok(())
}

pub fn run_example() -> Result<()> {
    let answers = QuestionnaireAnswers {
        project_scale: ProjectScale::Small,
        preexisting_process: false,
        training_needed: true,
        process_line_based: false,
        iteration_count_planned: 3,
    };
    let mut project = ProjectState::new("onboarding", TailoringProfile::default())?;
    apply_profile(&mut project, derive_profile(&answers))?;
    plan_project(&mut project, 3, &suggest_plan(&answers))?;

    // iteration 1: analysis, design, a demonstrator — no deployment
    start_iteration(&mut project, IterationInputs::default(), None)?;
    let prq = project.create_artefact(ArtefactKind::PRQ, "Process requirements")?;
    let req = project.add_item(&prq, REQUIREMENTS, ItemKind::Requirement, "Mentors are assigned on day one", None)?;
    fill(&mut project, &prq)?;
    assert_eq!(advance_phase(&mut project, 1)?, Advance::Entered(Phase::Conceptualisation));

    let pd = project.create_artefact(ArtefactKind::PD, "Process design")?;
    let de = project.add_item(&pd, "Processes", ItemKind::DesignElement, "Mentor assignment step", None)?;
    project.add_trace(&req, &de, LinkKind::Addresses)?;
    fill(&mut project, &pd)?;
    advance_phase(&mut project, 1)?;

    let demo = project.create_artefact(ArtefactKind::PR, "Demonstrator")?;
    project.add_item(&demo, "Demonstrator", ItemKind::Note, "Wiki prototype of the mentor step", None)?;
    assert_eq!(advance_phase(&mut project, 1)?, Advance::Closed);
    assert!(project.releases.is_empty());
    println!("iteration 1 closed after Realisation, demonstrator {demo} kept in-house");

    // feedback on the demonstrator becomes a change request for iteration 2
    let change = submit_change(&mut project, ChangeOrigin::Internal, "Add a mentor checklist", "", BTreeSet::new())?;
    triage_change(&mut project, &change.id, Triage::Accept)?;
    let inputs = IterationInputs {
        changes: BTreeSet::from([change.id.clone()]),
        ..Default::default()
    };
    start_iteration(&mut project, inputs, None)?;
    project.add_item(&pd, "Artefacts", ItemKind::DesignElement, "Mentor checklist", None)?;
    for _ in 0..3 {
        advance_phase(&mut project, 2)?;
    }
    let plc = project.create_artefact(ArtefactKind::PLC, "Life cycle support")?;
    fill(&mut project, &plc)?;

    let findings = validation::check_release_readiness(&project, 2)?;
    println!("readiness findings: {}", findings.len());
    let release = package_release(&mut project, 2, "1.0")?;
    for _ in 0..3 {
        let r = promote(&mut project, &release.id)?;
        println!("{} -> {}", r.id, r.status);
    }
    close_iteration(&mut project, 2)?;
    println!(
        "actual process: {}, change {} is {}",
        project.manifest.actual_process_ref.as_deref().unwrap_or("-"),
        change.id,
        project.change(&change.id)?.status
    );
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
