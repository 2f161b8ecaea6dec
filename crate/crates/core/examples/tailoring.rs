//! Questionnaire answers become a tailoring profile; a split design is later
//! merged into one Process Design.

use arspi_engine::tailoring::{merge_designs_in_store, suggest_plan};
use arspi_engine::{
    apply_profile, derive_profile, ArtefactKind, ItemKind, LinkKind, ProjectScale, ProjectState,
    QuestionnaireAnswers, TailoringProfile,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let answers = QuestionnaireAnswers {
        project_scale: ProjectScale::Large,
        preexisting_process: false,
        training_needed: true,
        process_line_based: true,
        iteration_count_planned: 3,
    };
    let profile = derive_profile(&answers);
    println!("merge designs: {}", profile.merge_designs);
    println!("supports: {:?}", profile.selected_supports);
    println!("plan (shortened flags): {:?}", suggest_plan(&answers));

    let mut project = ProjectState::new("tailoring-demo", TailoringProfile::default())?;
    let created = apply_profile(&mut project, profile)?;
    println!("created support skeletons: {created:?}");

    // a large project still decides to fold its designs together
    let prq = project.create_artefact(ArtefactKind::PRQ, "Requirements")?;
    let req = project.add_item(&prq, "Requirements", ItemKind::Requirement, "Reviews are recorded", None)?;
    let cpd = project.create_artefact(ArtefactKind::CPD, "Concept")?;
    let tpd = project.create_artefact(ArtefactKind::TPD, "Technical design")?;
    let de = project.add_item(&cpd, "Processes", ItemKind::DesignElement, "Review workflow", None)?;
    let re = project.add_item(&tpd, "Processes", ItemKind::RealisationElement, "Review form in the wiki", None)?;
    project.add_trace(&req, &de, LinkKind::Addresses)?;
    project.add_trace(&de, &re, LinkKind::Realises)?;

    let pd = merge_designs_in_store(&mut project, &cpd, &tpd)?;
    let merged = project.get_artefact(&pd)?;
    println!("merged into {pd} ({} items)", merged.items().count());
    assert!(project.profile().merge_designs);
    assert!(project.dangling_endpoints().is_empty());
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
