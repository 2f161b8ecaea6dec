//! Prints the key-artefact catalog and extends the support registry.
//!
//! Run with `cargo run --example catalog`.

use arspi_engine::metamodel::{catalog_key_artefacts, required_sections, SectionSpec};
use arspi_engine::{ArtefactKind, ProjectState, SupportArtefactDescriptor, TailoringProfile};

fn print_tree(spec: &SectionSpec, depth: usize) {
    let marker = if spec.required { "" } else { " (optional)" };
    println!("{}{}{marker}", "  ".repeat(depth), spec.key);
    for child in &spec.children {
        print_tree(child, depth + 1);
    }
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for (kind, tree) in catalog_key_artefacts() {
        println!("{kind} — {}", kind.code().title());
        for spec in &tree {
            print_tree(spec, 1);
        }
    }

    // small projects use one Process Design: the union of CPD and TPD
    let pd = required_sections(&ArtefactKind::PD, &TailoringProfile::merged())?;
    let keys: Vec<&str> = pd.iter().map(|s| s.key.as_str()).collect();
    println!("PD top-level sections: {}", keys.join(", "));
    assert!(keys.contains(&"LogicalAndPhysicalModelOrganisation"));

    let mut project = ProjectState::new("catalog-demo", TailoringProfile::default())?;
    project.register_support_artefact(SupportArtefactDescriptor::new(
        "MeasurementPlan",
        "Metrics collected while the new process is piloted",
    ))?;
    let names: Vec<&str> = project.registry.iter().map(|d| d.name.as_str()).collect();
    println!("support artefacts: {}", names.join(", "));
    assert_eq!(project.registry.len(), 4);
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
