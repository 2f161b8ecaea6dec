//! Scripting the `arspi` command line in-process.

use arspi_engine::cli::run;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let project = dir.path().join("demo");
    let project = project.to_str().ok_or("non-utf8 temp path")?;

    let script: &[&[&str]] = &[
        &["init", "--name", "demo", "--vision", "Predictable releases"],
        &["tailor", "--scale", "small", "--training", "--iterations", "2"],
        &["artefact", "new", "--kind", "PRQ", "--name", "Requirements"],
        &["phase", "status"],
        &["change", "submit", "--title", "Document the review step"],
        &["artefact", "new", "--kind", "CPD"],
        &["validate"],
        &["report"],
    ];
    for args in script {
        let mut argv = vec!["arspi", "--project", project];
        argv.extend_from_slice(args);
        let result = run(argv);
        println!("$ arspi {}  # exit {}", args.join(" "), result.exit_code);
        print!("{}", result.stdout);
        print!("{}", result.stderr);
    }

    let report = run(["arspi", "--project", project, "--json", "report"]);
    let value: serde_json::Value = serde_json::from_str(&report.stdout)?;
    assert_eq!(value["project"], "demo");
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
