//! The `arspi` command-line front end.
//!
//! [`run`] parses arguments, executes one subcommand against the project
//! store and returns a [`CommandResult`] instead of printing, so the whole
//! surface is testable in-process. The store is written only when the
//! subcommand succeeds.
//!
//! Exit codes: 0 success or clean, 1 warnings only, 2 blocking findings,
//! 3 usage or domain errors, 4 store errors.

mod report;

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, ErrorCategory, Result};
use crate::lifecycle::{advance_phase, close_iteration, plan_project, start_iteration, Advance, IterationInputs};
use crate::metamodel::{catalog_key_artefacts, ArtefactKind, ItemKind, SectionSpec, SupportArtefactDescriptor};
use crate::release_change::{
    changed_assets, compute_delta, ingest_update_trigger, package_release_with_parent, promote, record_delta,
    submit_change, triage_change, ChangeOrigin, ReferenceProcessSnapshot, Triage,
};
use crate::repository::{init_project, to_canonical_json, ProjectStore};
use crate::tailoring::{
    apply_profile, derive_profile, merge_designs_in_store, suggest_plan, ProjectScale, QuestionnaireAnswers,
    TailoringProfile,
};
use crate::trace::LinkKind;
use crate::validation::{check_release_readiness, validate, Finding};

pub use report::{project_report, ProjectReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_WARNINGS: i32 = 1;
pub const EXIT_FINDINGS: i32 = 2;
pub const EXIT_USAGE: i32 = 3;
pub const EXIT_STORE: i32 = 4;

/// Outcome of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandResult {
    pub exit_code: i32,
    /// Human-readable text, or JSON with `--json`.
    pub stdout: String,
    /// Diagnostics and usage text.
    pub stderr: String,
    pub findings: Option<Vec<Finding>>,
}

#[derive(Debug, Parser)]
#[command(name = "arspi", version, about = "Artefact-based software process improvement engine")]
struct Cli {
    /// Project directory.
    #[arg(long, global = true, env = "ARSPI_PROJECT", default_value = ".")]
    project: PathBuf,
    /// Structured (JSON) output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Create a new project store.
    Init {
        #[arg(long)]
        name: String,
        #[arg(long, default_value = "")]
        vision: String,
        /// Start with a merged Process Design instead of CPD + TPD.
        #[arg(long)]
        merge: bool,
    },
    /// Derive a tailoring profile from questionnaire answers and apply it.
    Tailor(TailorArgs),
    /// Inspect or extend the artefact catalog.
    #[command(subcommand)]
    Catalog(CatalogCmd),
    /// Create, edit and inspect artefacts.
    #[command(subcommand)]
    Artefact(ArtefactCmd),
    /// Trace links between artefacts and content items.
    #[command(subcommand)]
    Trace(TraceCmd),
    /// Run every validation rule.
    Validate {
        /// Also check release readiness of this iteration.
        #[arg(long)]
        iteration: Option<u32>,
    },
    /// Plan, start and close iterations.
    #[command(subcommand)]
    Iteration(IterationCmd),
    /// Inspect and advance the phases of an iteration.
    #[command(subcommand)]
    Phase(PhaseCmd),
    /// Package and promote process releases.
    #[command(subcommand)]
    Release(ReleaseCmd),
    /// Submit and triage change requests.
    #[command(subcommand)]
    Change(ChangeCmd),
    /// Compare two reference-process snapshots.
    Delta {
        old: PathBuf,
        new: PathBuf,
        /// File change requests for the changed assets.
        #[arg(long)]
        ingest: bool,
    },
    /// Project status summary.
    Report,
}

#[derive(Debug, Args)]
struct TailorArgs {
    #[arg(long, value_enum)]
    scale: Option<ScaleArg>,
    /// A process already exists that this project improves.
    #[arg(long)]
    preexisting: bool,
    #[arg(long)]
    training: bool,
    #[arg(long)]
    process_line: bool,
    #[arg(long, default_value_t = 1)]
    iterations: u32,
    #[arg(long, conflicts_with = "no_merge")]
    merge: bool,
    #[arg(long)]
    no_merge: bool,
    /// Print the profile without applying it.
    #[arg(long)]
    dry_run: bool,
    /// Ask the questions on stdin.
    #[arg(long)]
    interactive: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScaleArg {
    Small,
    Medium,
    Large,
}

impl From<ScaleArg> for ProjectScale {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::Small => ProjectScale::Small,
            ScaleArg::Medium => ProjectScale::Medium,
            ScaleArg::Large => ProjectScale::Large,
        }
    }
}

#[derive(Debug, Subcommand)]
enum CatalogCmd {
    /// Print the section trees of all key artefacts and the support registry.
    Dump,
    /// Register an additional support artefact.
    Register {
        name: String,
        #[arg(long, default_value = "")]
        description: String,
    },
}

#[derive(Debug, Subcommand)]
enum ArtefactCmd {
    New {
        /// PRQ, CPD, TPD, PD, PLC, PR or SUPPORT:<name>.
        #[arg(long)]
        kind: String,
        #[arg(long)]
        name: Option<String>,
    },
    /// Edit one section of an artefact.
    Set {
        id: String,
        section: String,
        #[arg(long)]
        add_item: Option<String>,
        #[arg(long, default_value = "note")]
        item_kind: String,
        #[arg(long)]
        item_id: Option<String>,
        /// Remove all items of the section first.
        #[arg(long)]
        clear: bool,
    },
    Show {
        id: String,
    },
    List {
        #[arg(long)]
        kind: Option<String>,
    },
    /// Merge a CPD and a TPD into one Process Design.
    Merge {
        cpd: String,
        tpd: String,
    },
}

#[derive(Debug, Subcommand)]
enum TraceCmd {
    Add {
        source: String,
        target: String,
        #[arg(long)]
        kind: String,
    },
    List,
}

#[derive(Debug, Subcommand)]
enum IterationCmd {
    /// Record the planned iterations.
    Plan {
        #[arg(long)]
        count: usize,
        /// Comma-separated shortened flags, e.g. `true,false,false`.
        #[arg(long, value_delimiter = ',')]
        shortened: Vec<bool>,
    },
    Start {
        #[arg(long = "change")]
        changes: Vec<String>,
        #[arg(long, conflicts_with = "full")]
        shortened: bool,
        #[arg(long)]
        full: bool,
        /// Defaults to the project vision.
        #[arg(long)]
        vision: Option<String>,
    },
    Close {
        /// Defaults to the running iteration.
        index: Option<u32>,
    },
}

#[derive(Debug, Subcommand)]
enum PhaseCmd {
    Status,
    Advance { index: Option<u32> },
}

#[derive(Debug, Subcommand)]
enum ReleaseCmd {
    Package {
        #[arg(long)]
        label: String,
        #[arg(long)]
        iteration: Option<u32>,
        #[arg(long)]
        parent: Option<String>,
    },
    Promote {
        id: String,
    },
    List,
}

#[derive(Debug, Subcommand)]
enum ChangeCmd {
    Submit {
        #[arg(long)]
        title: String,
        #[arg(long, default_value = "")]
        description: String,
        /// Raised by an upstream reference-process release.
        #[arg(long)]
        external: bool,
        #[arg(long = "asset")]
        assets: Vec<String>,
    },
    Triage {
        id: String,
        #[arg(value_enum)]
        decision: TriageArg,
    },
    List,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TriageArg {
    Accept,
    Reject,
}

/// Successful subcommand output.
struct Output {
    text: String,
    json: Value,
    findings: Option<Vec<Finding>>,
    exit_code: i32,
}

impl Output {
    fn new(text: impl Into<String>, json: Value) -> Self {
        Output {
            text: text.into(),
            json,
            findings: None,
            exit_code: EXIT_OK,
        }
    }
}

fn to_value<T: Serialize + ?Sized>(value: &T) -> Value {
    serde_json::to_value(value).expect("engine types serialize")
}

pub fn run<I, T>(argv: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_input(argv, &mut std::io::stdin().lock())
}

/// Like [`run`], with interactive answers read from `input`.
pub fn run_with_input<I, T>(argv: I, input: &mut dyn BufRead) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                CommandResult {
                    exit_code: code,
                    stdout: text,
                    stderr: String::new(),
                    findings: None,
                }
            } else {
                CommandResult {
                    exit_code: code,
                    stdout: String::new(),
                    stderr: text,
                    findings: None,
                }
            };
        }
    };
    match dispatch(&cli, input) {
        Ok(out) => CommandResult {
            exit_code: out.exit_code,
            stdout: if cli.json {
                String::from_utf8(to_canonical_json(&out.json)).expect("json is utf-8")
            } else {
                out.text
            },
            stderr: String::new(),
            findings: out.findings,
        },
        Err(e) => error_result(&cli, e),
    }
}

fn error_result(cli: &Cli, e: Error) -> CommandResult {
    let exit_code = match e.category() {
        ErrorCategory::Findings => EXIT_FINDINGS,
        ErrorCategory::Usage => EXIT_USAGE,
        ErrorCategory::Store => EXIT_STORE,
    };
    let findings = e.findings().map(<[Finding]>::to_vec);
    let mut stderr = format!("error: {e}\n");
    for f in findings.iter().flatten() {
        stderr.push_str(&format!("  {f}\n"));
    }
    let stdout = if cli.json {
        let body = json!({ "error": e.to_string(), "findings": findings });
        String::from_utf8(to_canonical_json(&body)).expect("json is utf-8")
    } else {
        String::new()
    };
    CommandResult {
        exit_code,
        stdout,
        stderr,
        findings,
    }
}

/// Binary entry point: runs with the process arguments and prints.
pub fn main_entry() -> i32 {
    let result = run(std::env::args_os());
    print!("{}", result.stdout);
    if !result.stdout.is_empty() && !result.stdout.ends_with('\n') {
        println!();
    }
    eprint!("{}", result.stderr);
    let _ = std::io::stdout().flush();
    result.exit_code
}

fn open(root: &Path) -> Result<ProjectStore> {
    ProjectStore::load(root)
}

/// Runs `op` on a loaded store and saves only if it succeeds.
fn mutate<F>(root: &Path, op: F) -> Result<Output>
where
    F: FnOnce(&mut ProjectStore) -> Result<Output>,
{
    let mut store = open(root)?;
    let out = op(&mut store)?;
    store.save()?;
    Ok(out)
}

fn dispatch(cli: &Cli, input: &mut dyn BufRead) -> Result<Output> {
    let root = cli.project.as_path();
    match &cli.command {
        Command::Init { name, vision, merge } => {
            let profile = if *merge { TailoringProfile::merged() } else { TailoringProfile::default() };
            let mut store = init_project(root, name, profile)?;
            if !vision.is_empty() {
                store.manifest.vision = vision.clone();
                store.save()?;
            }
            Ok(Output::new(
                format!("initialised project `{name}` in {}\n", root.display()),
                to_value(&store.manifest),
            ))
        }
        Command::Tailor(args) => tailor(root, args, input),
        Command::Catalog(cmd) => catalog(root, cmd),
        Command::Artefact(cmd) => artefact(root, cmd),
        Command::Trace(cmd) => trace(root, cmd),
        Command::Validate { iteration } => {
            let state = ProjectStore::snapshot(root)?;
            let mut findings = validate(&state);
            if let Some(index) = iteration {
                findings.extend(check_release_readiness(&state, *index)?);
                findings = crate::validation::sorted(findings);
            }
            let exit_code = if findings.iter().any(Finding::is_error) {
                EXIT_FINDINGS
            } else if findings.is_empty() {
                EXIT_OK
            } else {
                EXIT_WARNINGS
            };
            let text = if findings.is_empty() {
                "no findings\n".to_string()
            } else {
                findings.iter().map(|f| format!("{f}\n")).collect()
            };
            Ok(Output {
                text,
                json: to_value(&findings),
                findings: Some(findings),
                exit_code,
            })
        }
        Command::Iteration(cmd) => iteration(root, cmd),
        Command::Phase(cmd) => phase(root, cmd),
        Command::Release(cmd) => release(root, cmd),
        Command::Change(cmd) => change(root, cmd),
        Command::Delta { old, new, ingest } => delta(root, old, new, *ingest),
        Command::Report => {
            let state = ProjectStore::snapshot(root)?;
            let report = project_report(&state);
            Ok(Output::new(report.to_string(), to_value(&report)))
        }
    }
}

fn prompt(input: &mut dyn BufRead, question: &str) -> Result<String> {
    eprint!("{question} ");
    let mut line = String::new();
    input
        .read_line(&mut line)
        .map_err(|e| Error::io("<stdin>", e))?;
    Ok(line.trim().to_string())
}

fn yes(answer: &str) -> bool {
    matches!(answer.to_ascii_lowercase().as_str(), "y" | "yes" | "true" | "1")
}

fn tailor(root: &Path, args: &TailorArgs, input: &mut dyn BufRead) -> Result<Output> {
    let answers = if args.interactive {
        let scale: ProjectScale = prompt(input, "Project scale (small/medium/large)?")?.parse()?;
        let preexisting_process = yes(&prompt(input, "Is there a pre-existing process (y/n)?")?);
        let training_needed = yes(&prompt(input, "Is training needed (y/n)?")?);
        let process_line_based = yes(&prompt(input, "Is the process derived from a process line (y/n)?")?);
        let count = prompt(input, "How many iterations are planned?")?;
        let iteration_count_planned = count.parse().map_err(|_| Error::InvalidCount)?;
        QuestionnaireAnswers {
            project_scale: scale,
            preexisting_process,
            training_needed,
            process_line_based,
            iteration_count_planned,
        }
    } else {
        let scale = args
            .scale
            .ok_or_else(|| Error::ProfileInvalid("--scale is required unless --interactive".into()))?;
        QuestionnaireAnswers {
            project_scale: scale.into(),
            preexisting_process: args.preexisting,
            training_needed: args.training,
            process_line_based: args.process_line,
            iteration_count_planned: args.iterations,
        }
    };
    let mut profile = derive_profile(&answers);
    if args.merge {
        profile.merge_designs = true;
    } else if args.no_merge {
        profile.merge_designs = false;
    }
    let plan = suggest_plan(&answers);

    let mut text = String::new();
    text.push_str(&format!(
        "merge_designs: {}\nselected_supports: {}\nstrict_realisation_coverage: {}\n",
        profile.merge_designs,
        profile.selected_supports.iter().cloned().collect::<Vec<_>>().join(", "),
        profile.strict_realisation_coverage,
    ));
    let plan_text: Vec<&str> = plan.iter().map(|s| if *s { "shortened" } else { "full" }).collect();
    text.push_str(&format!("plan: {}\n", plan_text.join(", ")));
    if !profile.notes.is_empty() {
        text.push_str(&format!("notes: {}\n", profile.notes));
    }
    let mut body = json!({ "profile": to_value(&profile), "plan": plan });
    if args.dry_run {
        return Ok(Output::new(text, body));
    }
    mutate(root, |store| {
        let created = apply_profile(store, profile)?;
        // the plan only shapes iterations that have not started yet
        let started = store.iterations.iter().any(|i| i.state != crate::lifecycle::IterationState::Planned);
        if !started {
            plan_project(store, plan.len(), &plan)?;
        }
        for id in &created {
            text.push_str(&format!("created {id}\n"));
        }
        body["created"] = to_value(&created);
        Ok(Output::new(text, body))
    })
}

fn spec_text(spec: &SectionSpec, depth: usize, out: &mut String) {
    let mut flags = Vec::new();
    if !spec.required {
        flags.push("optional".to_string());
    }
    if !spec.shared_with.is_empty() {
        let kinds: Vec<&str> = spec.shared_with.iter().map(|k| k.as_str()).collect();
        flags.push(format!("shared with {}", kinds.join(", ")));
    }
    let flags = if flags.is_empty() { String::new() } else { format!(" ({})", flags.join("; ")) };
    out.push_str(&format!("{}{} — {}{}\n", "  ".repeat(depth), spec.key, spec.title, flags));
    for child in &spec.children {
        spec_text(child, depth + 1, out);
    }
}

fn catalog(root: &Path, cmd: &CatalogCmd) -> Result<Output> {
    match cmd {
        CatalogCmd::Dump => {
            let catalog = catalog_key_artefacts();
            // a project is optional here; without one the built-ins are listed
            let registry = match ProjectStore::snapshot(root) {
                Ok(state) => state.registry,
                Err(_) => Default::default(),
            };
            let mut text = String::new();
            for (kind, tree) in &catalog {
                text.push_str(&format!("{kind} {}\n", kind.code().title()));
                for spec in tree {
                    spec_text(spec, 1, &mut text);
                }
            }
            text.push_str("support artefacts\n");
            let supports: Vec<&SupportArtefactDescriptor> = registry.iter().collect();
            for s in &supports {
                text.push_str(&format!("  {} — {}\n", s.name, s.description));
            }
            let kinds: Vec<Value> = catalog
                .iter()
                .map(|(kind, tree)| json!({ "kind": kind, "title": kind.code().title(), "sections": tree }))
                .collect();
            Ok(Output::new(text, json!({ "key_artefacts": kinds, "supports": supports })))
        }
        CatalogCmd::Register { name, description } => mutate(root, |store| {
            store.register_support_artefact(SupportArtefactDescriptor::new(name.clone(), description.clone()))?;
            let d = store.registry.get(name).expect("just registered").clone();
            Ok(Output::new(format!("registered support artefact {name}\n"), to_value(&d)))
        }),
    }
}

fn artefact(root: &Path, cmd: &ArtefactCmd) -> Result<Output> {
    match cmd {
        ArtefactCmd::New { kind, name } => mutate(root, |store| {
            let kind: ArtefactKind = kind.parse()?;
            let name = name.clone().unwrap_or_else(|| kind.code().title().to_string());
            let id = store.create_artefact(kind, name)?;
            let a = store.get_artefact(&id)?;
            Ok(Output::new(format!("{id}\n"), to_value(a)))
        }),
        ArtefactCmd::Set {
            id,
            section,
            add_item,
            item_kind,
            item_id,
            clear,
        } => mutate(root, |store| {
            if *clear {
                store.clear_section(id, section)?;
            }
            let mut text = String::new();
            if let Some(item) = add_item {
                let kind: ItemKind = item_kind.parse()?;
                let item_id = store.add_item(id, section, kind, item.clone(), item_id.clone())?;
                text.push_str(&format!("{item_id}\n"));
            } else if !clear {
                return Err(Error::ProfileInvalid("nothing to do: pass --add-item or --clear".into()));
            }
            let a = store.get_artefact(id)?;
            Ok(Output::new(text, to_value(a)))
        }),
        ArtefactCmd::Show { id } => {
            let state = ProjectStore::snapshot(root)?;
            let a = state.get_artefact(id)?;
            let mut text = format!("{} {} \"{}\" v{}\n", a.id, a.kind, a.name, a.version);
            for section in &a.sections {
                section_text(section, 1, &mut text);
            }
            Ok(Output::new(text, to_value(a)))
        }
        ArtefactCmd::List { kind } => {
            let state = ProjectStore::snapshot(root)?;
            let kind: Option<ArtefactKind> = kind.as_deref().map(str::parse).transpose()?;
            let listed: Vec<&crate::metamodel::Artefact> = state
                .artefacts
                .iter()
                .filter(|a| kind.as_ref().is_none_or(|k| &a.kind == k))
                .collect();
            let text = listed
                .iter()
                .map(|a| format!("{}\t{}\t{}\tv{}\n", a.id, a.kind, a.name, a.version))
                .collect::<String>();
            Ok(Output::new(text, to_value(&listed)))
        }
        ArtefactCmd::Merge { cpd, tpd } => mutate(root, |store| {
            let pd = merge_designs_in_store(store, cpd, tpd)?;
            let a = store.get_artefact(&pd)?;
            Ok(Output::new(format!("{pd}\n"), to_value(a)))
        }),
    }
}

fn section_text(section: &crate::metamodel::Section, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    out.push_str(&format!("{pad}{}\n", section.spec_key));
    for item in &section.items {
        out.push_str(&format!("{pad}  - [{}] {} {}\n", item.kind, item.id, item.text));
    }
    for child in &section.children {
        section_text(child, depth + 1, out);
    }
}

fn trace(root: &Path, cmd: &TraceCmd) -> Result<Output> {
    match cmd {
        TraceCmd::Add { source, target, kind } => mutate(root, |store| {
            let kind: LinkKind = kind.parse()?;
            let id = store.add_trace(source, target, kind)?;
            let link = store.links.iter().find(|l| l.id == id).expect("link stored");
            Ok(Output::new(format!("{id}\n"), to_value(link)))
        }),
        TraceCmd::List => {
            let state = ProjectStore::snapshot(root)?;
            let text = state
                .links
                .iter()
                .map(|l| format!("{}\t{} {} {}\n", l.id, l.source, l.kind, l.target))
                .collect::<String>();
            Ok(Output::new(text, to_value(&state.links)))
        }
    }
}

fn running_or(store: &crate::repository::ProjectState, index: Option<u32>) -> Result<u32> {
    match index {
        Some(i) => Ok(i),
        None => store
            .running_iteration()
            .map(|i| i.index)
            .ok_or(Error::IterationNotRunning(0)),
    }
}

fn iteration(root: &Path, cmd: &IterationCmd) -> Result<Output> {
    match cmd {
        IterationCmd::Plan { count, shortened } => mutate(root, |store| {
            let flags = if shortened.is_empty() { vec![false; *count] } else { shortened.clone() };
            let planned = plan_project(store, *count, &flags)?;
            let text = planned
                .iter()
                .map(|i| format!("iteration {}: {}\n", i.index, if i.shortened { "shortened" } else { "full" }))
                .collect::<String>();
            Ok(Output::new(text, to_value(&planned)))
        }),
        IterationCmd::Start {
            changes,
            shortened,
            full,
            vision,
        } => mutate(root, |store| {
            let inputs = IterationInputs {
                vision: vision.clone().unwrap_or_else(|| store.manifest.vision.clone()),
                changes: changes.iter().cloned().collect(),
                actual_process: store.manifest.actual_process_ref.clone(),
            };
            let over = if *shortened { Some(true) } else if *full { Some(false) } else { None };
            let it = start_iteration(store, inputs, over)?;
            Ok(Output::new(
                format!(
                    "started iteration {}{} in {}\n",
                    it.index,
                    if it.shortened { " (shortened)" } else { "" },
                    it.current_phase.expect("running")
                ),
                to_value(&it),
            ))
        }),
        IterationCmd::Close { index } => mutate(root, |store| {
            let index = running_or(store, *index)?;
            let it = close_iteration(store, index)?;
            Ok(Output::new(format!("closed iteration {}\n", it.index), to_value(&it)))
        }),
    }
}

fn phase(root: &Path, cmd: &PhaseCmd) -> Result<Output> {
    match cmd {
        PhaseCmd::Status => {
            let state = ProjectStore::snapshot(root)?;
            let mut text = String::new();
            for it in &state.iterations {
                let phase = it.current_phase.map(|p| p.to_string()).unwrap_or_else(|| "-".into());
                text.push_str(&format!(
                    "iteration {}\t{}\t{}{}\n",
                    it.index,
                    it.state,
                    phase,
                    if it.shortened { "\tshortened" } else { "" }
                ));
            }
            if text.is_empty() {
                text.push_str("no iterations\n");
            }
            Ok(Output::new(text, to_value(&state.iterations)))
        }
        PhaseCmd::Advance { index } => mutate(root, |store| {
            let index = running_or(store, *index)?;
            let outcome = advance_phase(store, index)?;
            let it = store.iteration(index)?;
            let text = match outcome {
                Advance::Entered(p) => format!("iteration {index} entered {p}\n"),
                Advance::Closed => format!("iteration {index} closed after Realisation\n"),
            };
            Ok(Output::new(text, to_value(it)))
        }),
    }
}

fn release(root: &Path, cmd: &ReleaseCmd) -> Result<Output> {
    match cmd {
        ReleaseCmd::Package {
            label,
            iteration,
            parent,
        } => mutate(root, |store| {
            let index = running_or(store, *iteration)?;
            let r = package_release_with_parent(store, index, label, parent.clone())?;
            Ok(Output::new(format!("{} {} ({})\n", r.id, r.version_label, r.status), to_value(&r)))
        }),
        ReleaseCmd::Promote { id } => mutate(root, |store| {
            let r = promote(store, id)?;
            Ok(Output::new(format!("{} is now {}\n", r.id, r.status), to_value(&r)))
        }),
        ReleaseCmd::List => {
            let state = ProjectStore::snapshot(root)?;
            let text = state
                .releases
                .iter()
                .map(|r| format!("{}\t{}\t{}\titeration {}\n", r.id, r.version_label, r.status, r.iteration_index))
                .collect::<String>();
            Ok(Output::new(text, to_value(&state.releases)))
        }
    }
}

fn change(root: &Path, cmd: &ChangeCmd) -> Result<Output> {
    match cmd {
        ChangeCmd::Submit {
            title,
            description,
            external,
            assets,
        } => mutate(root, |store| {
            let origin = if *external { ChangeOrigin::ExternalUpdateTrigger } else { ChangeOrigin::Internal };
            let c = submit_change(store, origin, title, description, assets.iter().cloned().collect())?;
            Ok(Output::new(format!("{}\n", c.id), to_value(&c)))
        }),
        ChangeCmd::Triage { id, decision } => mutate(root, |store| {
            let decision = match decision {
                TriageArg::Accept => Triage::Accept,
                TriageArg::Reject => Triage::Reject,
            };
            let c = triage_change(store, id, decision)?;
            Ok(Output::new(format!("{} is now {}\n", c.id, c.status), to_value(&c)))
        }),
        ChangeCmd::List => {
            let state = ProjectStore::snapshot(root)?;
            let text = state
                .changes
                .iter()
                .map(|c| format!("{}\t{}\t{}\n", c.id, c.status, c.title))
                .collect::<String>();
            Ok(Output::new(text, to_value(&state.changes)))
        }
    }
}

fn read_snapshot(path: &Path) -> Result<ReferenceProcessSnapshot> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ReferenceProcessSnapshot::from_json(&text).map_err(|e| match e {
        Error::CorruptFile { line, message, .. } => Error::CorruptFile {
            path: path.to_path_buf(),
            line,
            message,
        },
        other => other,
    })
}

fn delta(root: &Path, old: &Path, new: &Path, ingest: bool) -> Result<Output> {
    let (old, new) = (read_snapshot(old)?, read_snapshot(new)?);
    if old.reference != new.reference {
        return Err(Error::SnapshotMismatch {
            old: old.reference,
            new: new.reference,
        });
    }
    let changed: BTreeSet<String> = changed_assets(&old, &new);
    mutate(root, |store| {
        let mut text = String::new();
        let mut body = json!({});
        if changed.is_empty() {
            text.push_str("no asset changed\n");
            body["report"] = Value::Null;
        } else {
            let report = compute_delta(store, &changed)?;
            text.push_str(&format!("changed assets: {}\n", join(&report.changed_assets)));
            text.push_str(&format!("affected elements: {}\n", join(&report.affected_local)));
            text.push_str(&format!("traversed links: {}\n", report.closure_edges.join(", ")));
            if let Some(id) = record_delta(store, &report)? {
                text.push_str(&format!("recorded in {id}\n"));
                body["recorded_in"] = Value::String(id);
            }
            body["report"] = to_value(&report);
        }
        if ingest {
            let created = ingest_update_trigger(store, &old, &new)?;
            for c in &created {
                text.push_str(&format!("submitted {}: {}\n", c.id, c.title));
            }
            body["changes"] = to_value(&created);
        }
        Ok(Output::new(text, body))
    })
}

fn join<'a>(ids: impl IntoIterator<Item = &'a String>) -> String {
    ids.into_iter().map(String::as_str).collect::<Vec<_>>().join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arspi(dir: &Path, args: &[&str]) -> CommandResult {
        let mut argv = vec!["arspi", "--project", dir.to_str().unwrap()];
        argv.extend_from_slice(args);
        run_with_input(argv, &mut std::io::empty())
    }

    #[test]
    fn init_then_report() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("p");
        assert_eq!(arspi(&dir, &["init", "--name", "demo"]).exit_code, 0);
        let r = arspi(&dir, &["report"]);
        assert_eq!(r.exit_code, 0);
        assert!(r.stdout.contains("artefacts: 0"), "{}", r.stdout);
        assert!(r.stdout.contains("no iteration"), "{}", r.stdout);
    }

    #[test]
    fn missing_subcommand_is_a_usage_error() {
        let r = run_with_input(["arspi"], &mut std::io::empty());
        assert_eq!(r.exit_code, EXIT_USAGE);
        assert!(r.stderr.contains("Usage"));
    }

    #[test]
    fn cpd_in_merged_store_is_rejected() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("p");
        arspi(&dir, &["init", "--name", "demo", "--merge"]);
        let r = arspi(&dir, &["artefact", "new", "--kind", "CPD"]);
        assert_eq!(r.exit_code, EXIT_USAGE);
        assert!(r.stderr.contains("not permitted"), "{}", r.stderr);
    }

    #[test]
    fn missing_project_is_a_store_error() {
        let tmp = tempfile::tempdir().unwrap();
        let r = arspi(&tmp.path().join("none"), &["report"]);
        assert_eq!(r.exit_code, EXIT_STORE);
    }

    #[test]
    fn interactive_tailoring_reads_answers() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("p");
        arspi(&dir, &["init", "--name", "demo"]);
        let mut answers = "small\nn\ny\nn\n3\n".as_bytes();
        let argv = ["arspi", "--project", dir.to_str().unwrap(), "tailor", "--interactive", "--dry-run", "--json"];
        let r = run_with_input(argv, &mut answers);
        assert_eq!(r.exit_code, 0, "{}", r.stderr);
        let v: Value = serde_json::from_str(&r.stdout).unwrap();
        assert_eq!(v["profile"]["merge_designs"], true);
        assert_eq!(v["plan"], json!([true, false, false]));
    }
}
