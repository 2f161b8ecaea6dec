//! Completeness and consistency findings on a half-finished split design.

use arspi_engine::validation::{validate, Rule};
use arspi_engine::{check_consistency, ArtefactKind, ItemKind, LinkKind, ProjectState, TailoringProfile};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut project = ProjectState::new("validation-demo", TailoringProfile::default())?;
    let prq = project.create_artefact(ArtefactKind::PRQ, "Requirements")?;
    let cpd = project.create_artefact(ArtefactKind::CPD, "Concept")?;
    let tpd = project.create_artefact(ArtefactKind::TPD, "Technical design")?;

    let traced = project.add_item(&prq, "Requirements", ItemKind::Requirement, "Tests run nightly", None)?;
    let orphan = project.add_item(&prq, "Requirements", ItemKind::Requirement, "Coverage is reported", None)?;
    let de = project.add_item(&cpd, "Processes", ItemKind::DesignElement, "Nightly build job", None)?;
    project.add_trace(&traced, &de, LinkKind::Addresses)?;
    project.add_item(&prq, "Goals", ItemKind::Goal, "Fewer regressions", None)?;
    project.add_item(&cpd, "Goals", ItemKind::Goal, "Faster releases", None)?;

    // coverage and shared-section rules: the orphan requirement, the
    // unrealised design element, and the diverging Goals
    let consistency = check_consistency(&project);
    for f in &consistency {
        println!("{f}");
    }
    assert!(consistency.iter().any(|f| f.rule_id == Rule::RequirementNotAddressed.id()
        && f.subject.to_string().ends_with(&orphan)));
    assert!(consistency.iter().any(|f| f.rule_id == Rule::DesignNotRealised.id()));
    assert!(consistency.iter().any(|f| f.rule_id == Rule::SharedSectionMismatch.id()));

    let re = project.add_item(&tpd, "Processes", ItemKind::RealisationElement, "CI pipeline file", None)?;
    project.add_trace(&de, &re, LinkKind::Realises)?;
    let after = check_consistency(&project);
    assert!(!after.iter().any(|f| f.rule_id == Rule::DesignNotRealised.id()));

    let all = validate(&project);
    println!("{} findings in total ({} after realising the design)", consistency.len(), after.len());
    println!("every finding is an error: {}", all.iter().all(|f| f.is_error()));
    for rule in Rule::ALL {
        println!("{:<24} {}", rule.id(), rule.description());
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
