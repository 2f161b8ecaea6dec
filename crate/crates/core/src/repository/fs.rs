//! Directory layout, locking and transactional saves.
//!
//! ```text
//! <root>/arspi.json            manifest (+ artefact order, registered supports)
//! <root>/artefacts/<id>.json   one file per artefact
//! <root>/links.json
//! <root>/iterations.json
//! <root>/changes.json
//! <root>/releases.json
//! <root>/.arspi.lock           writer lock
//! <root>/.arspi.txn/           staging area of an in-flight save
//! ```
//!
//! A save first stages every file under `.arspi.txn/`, then writes
//! `.arspi.txn/plan.json` (the commit point), then moves the staged files
//! into place. A load that finds a plan finishes the move; a staging area
//! without a plan is discarded. Every individual write is temp-file plus
//! rename, so the store on disk is always either the old or the new one.

use std::fs;
use std::io::{self, Write};
use std::ops::{Deref, DerefMut};
use std::path::{Path, PathBuf};
use std::thread;
use std::time::{Duration, Instant};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{ProjectManifest, ProjectState};
use crate::error::{Error, Result};
use crate::lifecycle::Iteration;
use crate::metamodel::{Artefact, SupportArtefactDescriptor, SupportRegistry};
use crate::release_change::{ChangeRequest, Release};
use crate::tailoring::TailoringProfile;
use crate::trace::TraceLink;

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "arspi.json";
pub const ARTEFACT_DIR: &str = "artefacts";
pub const LINKS_FILE: &str = "links.json";
pub const ITERATIONS_FILE: &str = "iterations.json";
pub const CHANGES_FILE: &str = "changes.json";
pub const RELEASES_FILE: &str = "releases.json";
pub const LOCK_FILE: &str = ".arspi.lock";
pub const TXN_DIR: &str = ".arspi.txn";
const PLAN_FILE: &str = "plan.json";

const DEFAULT_LOCK_WAIT: Duration = Duration::from_secs(2);

#[derive(Debug, Serialize, Deserialize)]
struct ManifestFile {
    #[serde(flatten)]
    manifest: ProjectManifest,
    /// Artefact ids in creation order.
    #[serde(default)]
    artefacts: Vec<String>,
    #[serde(default)]
    support_registry: Vec<SupportArtefactDescriptor>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct Plan {
    writes: Vec<String>,
    deletes: Vec<String>,
}

/// Serializes with lexicographically ordered keys and a trailing newline.
pub fn to_canonical_json<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    let value = serde_json::to_value(value).expect("engine types serialize");
    let mut out = serde_json::to_vec_pretty(&value).expect("json value serializes");
    out.push(b'\n');
    out
}

fn parse<T: DeserializeOwned>(path: &Path, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::CorruptFile {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

pub fn parse_artefact(text: &str) -> Result<Artefact> {
    parse(Path::new("<artefact>"), text)
}

pub fn parse_links(text: &str) -> Result<Vec<TraceLink>> {
    parse(Path::new(LINKS_FILE), text)
}

pub fn parse_iterations(text: &str) -> Result<Vec<Iteration>> {
    parse(Path::new(ITERATIONS_FILE), text)
}

pub fn parse_changes(text: &str) -> Result<Vec<ChangeRequest>> {
    parse(Path::new(CHANGES_FILE), text)
}

pub fn parse_releases(text: &str) -> Result<Vec<Release>> {
    parse(Path::new(RELEASES_FILE), text)
}

pub fn parse_manifest(text: &str) -> Result<ProjectManifest> {
    let file: ManifestFile = parse(Path::new(MANIFEST_FILE), text)?;
    Ok(file.manifest)
}

/// Budget of file operations before an injected failure.
struct Faults(Option<usize>);

impl Faults {
    fn step(&mut self, path: &Path) -> Result<()> {
        match &mut self.0 {
            Some(0) => Err(Error::io(
                path,
                io::Error::new(io::ErrorKind::Interrupted, "injected fault"),
            )),
            Some(n) => {
                *n -= 1;
                Ok(())
            }
            None => Ok(()),
        }
    }
}

fn write_atomic(path: &Path, bytes: &[u8], faults: &mut Faults) -> Result<()> {
    faults.step(path)?;
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    let mut file = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    file.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    file.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

struct LockGuard {
    path: PathBuf,
}

impl LockGuard {
    fn acquire(root: &Path, wait: Duration) -> Result<Self> {
        let path = root.join(LOCK_FILE);
        let deadline = Instant::now() + wait;
        loop {
            match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
                Ok(mut file) => {
                    let _ = writeln!(file, "pid {}", std::process::id());
                    return Ok(LockGuard { path });
                }
                Err(e) if e.kind() == io::ErrorKind::AlreadyExists => {
                    if Instant::now() >= deadline {
                        let holder = fs::read_to_string(&path)
                            .map(|s| s.trim().to_string())
                            .unwrap_or_else(|_| "unknown holder".into());
                        return Err(Error::Locked {
                            path: root.to_path_buf(),
                            holder,
                        });
                    }
                    thread::sleep(Duration::from_millis(20));
                }
                Err(e) => return Err(Error::io(&path, e)),
            }
        }
    }
}

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// A project state bound to its directory. Holds the writer lock until
/// dropped. Mutations happen in memory; [`ProjectStore::save`] persists them.
pub struct ProjectStore {
    root: PathBuf,
    state: ProjectState,
    _lock: LockGuard,
}

impl std::fmt::Debug for ProjectStore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProjectStore")
            .field("root", &self.root)
            .field("state", &self.state)
            .finish()
    }
}

impl Deref for ProjectStore {
    type Target = ProjectState;

    fn deref(&self) -> &ProjectState {
        &self.state
    }
}

impl DerefMut for ProjectStore {
    fn deref_mut(&mut self) -> &mut ProjectState {
        &mut self.state
    }
}

/// Creates a new project directory with an empty store.
pub fn init_project(root: impl AsRef<Path>, name: &str, profile: TailoringProfile) -> Result<ProjectStore> {
    let root = root.as_ref();
    if root.exists() {
        let occupied = fs::read_dir(root)
            .map_err(|e| Error::io(root, e))?
            .next()
            .is_some();
        if occupied || !root.is_dir() {
            return Err(Error::PathOccupied(root.to_path_buf()));
        }
    }
    let state = ProjectState::new(name, profile)?;
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    let lock = LockGuard::acquire(root, DEFAULT_LOCK_WAIT)?;
    let mut store = ProjectStore {
        root: root.to_path_buf(),
        state,
        _lock: lock,
    };
    store.save()?;
    Ok(store)
}

impl ProjectStore {
    /// Opens an existing project, waiting up to two seconds for the lock.
    pub fn load(root: impl AsRef<Path>) -> Result<Self> {
        Self::load_with_wait(root, DEFAULT_LOCK_WAIT)
    }

    pub fn load_with_wait(root: impl AsRef<Path>, wait: Duration) -> Result<Self> {
        let root = root.as_ref();
        if !root.join(MANIFEST_FILE).exists() && !root.join(TXN_DIR).join(PLAN_FILE).exists() {
            return Err(Error::NoProject(root.to_path_buf()));
        }
        let lock = LockGuard::acquire(root, wait)?;
        recover(root)?;
        let state = read_state(root)?;
        Ok(ProjectStore {
            root: root.to_path_buf(),
            state,
            _lock: lock,
        })
    }

    /// Reads a consistent copy of the project and releases the lock again.
    pub fn snapshot(root: impl AsRef<Path>) -> Result<ProjectState> {
        Ok(Self::load(root)?.into_state())
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn state(&self) -> &ProjectState {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut ProjectState {
        &mut self.state
    }

    pub fn replace_state(&mut self, state: ProjectState) {
        self.state = state;
    }

    pub fn into_state(self) -> ProjectState {
        self.state
    }

    pub fn save(&mut self) -> Result<()> {
        commit(&self.root, &self.state, &mut Faults(None))
    }

    /// Saves but fails with an injected I/O error after `ops` file operations.
    #[doc(hidden)]
    pub fn save_with_fault(&mut self, ops: usize) -> Result<()> {
        commit(&self.root, &self.state, &mut Faults(Some(ops)))
    }
}

fn artefact_rel(id: &str) -> String {
    format!("{ARTEFACT_DIR}/{id}.json")
}

fn render(state: &ProjectState) -> Vec<(String, Vec<u8>)> {
    let manifest = ManifestFile {
        manifest: state.manifest.clone(),
        artefacts: state.artefacts.iter().map(|a| a.id.clone()).collect(),
        support_registry: state.registry.extras(),
    };
    let mut files = vec![
        (LINKS_FILE.to_string(), to_canonical_json(&state.links)),
        (ITERATIONS_FILE.to_string(), to_canonical_json(&state.iterations)),
        (CHANGES_FILE.to_string(), to_canonical_json(&state.changes)),
        (RELEASES_FILE.to_string(), to_canonical_json(&state.releases)),
    ];
    files.extend(
        state
            .artefacts
            .iter()
            .map(|a| (artefact_rel(&a.id), to_canonical_json(a))),
    );
    files.push((MANIFEST_FILE.to_string(), to_canonical_json(&manifest)));
    files
}

fn commit(root: &Path, state: &ProjectState, faults: &mut Faults) -> Result<()> {
    // finish (or discard) whatever an earlier failed save left behind
    recover(root)?;
    let txn = root.join(TXN_DIR);
    let files = render(state);
    let mut plan = Plan::default();
    for (rel, bytes) in &files {
        if fs::read(root.join(rel)).ok().as_deref() == Some(bytes.as_slice()) {
            continue;
        }
        write_atomic(&txn.join(rel), bytes, faults)?;
        plan.writes.push(rel.clone());
    }
    let dir = root.join(ARTEFACT_DIR);
    if dir.exists() {
        for entry in fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
            let entry = entry.map_err(|e| Error::io(&dir, e))?;
            let name = entry.file_name().to_string_lossy().into_owned();
            let rel = format!("{ARTEFACT_DIR}/{name}");
            if !files.iter().any(|(r, _)| *r == rel) {
                plan.deletes.push(rel);
            }
        }
    }
    if plan.writes.is_empty() && plan.deletes.is_empty() {
        return Ok(());
    }
    write_atomic(&txn.join(PLAN_FILE), &to_canonical_json(&plan), faults)?;
    apply(root, &plan, faults)
}

fn apply(root: &Path, plan: &Plan, faults: &mut Faults) -> Result<()> {
    let txn = root.join(TXN_DIR);
    for rel in &plan.writes {
        let staged = txn.join(rel);
        if !staged.exists() {
            continue; // moved by an earlier, interrupted apply
        }
        let dest = root.join(rel);
        faults.step(&dest)?;
        if let Some(parent) = dest.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::rename(&staged, &dest).map_err(|e| Error::io(&dest, e))?;
    }
    for rel in &plan.deletes {
        let path = root.join(rel);
        faults.step(&path)?;
        match fs::remove_file(&path) {
            Err(e) if e.kind() != io::ErrorKind::NotFound => return Err(Error::io(&path, e)),
            _ => {}
        }
    }
    faults.step(&txn)?;
    fs::remove_dir_all(&txn).map_err(|e| Error::io(&txn, e))
}

fn recover(root: &Path) -> Result<()> {
    let txn = root.join(TXN_DIR);
    let plan_path = txn.join(PLAN_FILE);
    if plan_path.exists() {
        let plan: Plan = parse(&plan_path, &read_to_string(&plan_path)?)?;
        apply(root, &plan, &mut Faults(None))
    } else if txn.exists() {
        fs::remove_dir_all(&txn).map_err(|e| Error::io(&txn, e))
    } else {
        Ok(())
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    parse(path, &read_to_string(path)?)
}

fn read_state(root: &Path) -> Result<ProjectState> {
    let manifest_path = root.join(MANIFEST_FILE);
    let text = read_to_string(&manifest_path)?;
    let raw: serde_json::Value = parse(&manifest_path, &text)?;
    let found = raw
        .get("schema_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::CorruptFile {
            path: manifest_path.clone(),
            line: 1,
            message: "missing schema_version".into(),
        })?;
    if found != u64::from(SCHEMA_VERSION) {
        return Err(Error::SchemaMismatch {
            found: u32::try_from(found).unwrap_or(u32::MAX),
            expected: SCHEMA_VERSION,
        });
    }
    let file: ManifestFile = parse(&manifest_path, &text)?;
    let registry = SupportRegistry::from_extras(file.support_registry).map_err(|e| Error::CorruptFile {
        path: manifest_path.clone(),
        line: 1,
        message: e.to_string(),
    })?;
    let artefacts = file
        .artefacts
        .iter()
        .map(|id| read_json::<Artefact>(&root.join(artefact_rel(id))))
        .collect::<Result<Vec<_>>>()?;
    Ok(ProjectState {
        manifest: file.manifest,
        registry,
        artefacts,
        links: read_json(&root.join(LINKS_FILE))?,
        iterations: read_json(&root.join(ITERATIONS_FILE))?,
        changes: read_json(&root.join(CHANGES_FILE))?,
        releases: read_json(&root.join(RELEASES_FILE))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metamodel::{ArtefactKind, ItemKind, GOALS};

    #[test]
    fn init_creates_empty_project() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("demo");
        let store = init_project(&root, "demo", TailoringProfile::default()).unwrap();
        assert!(store.artefacts.is_empty());
        assert_eq!(store.manifest.schema_version, 1);
        assert!(root.join(MANIFEST_FILE).exists());
        assert!(root.join(LOCK_FILE).exists());
        drop(store);
        assert!(!root.join(LOCK_FILE).exists());
        let loaded = ProjectStore::load(&root).unwrap();
        assert_eq!(loaded.manifest.project_name, "demo");
    }

    #[test]
    fn init_refuses_occupied_path() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("x"), "y").unwrap();
        assert!(matches!(
            init_project(dir.path(), "demo", TailoringProfile::default()),
            Err(Error::PathOccupied(_))
        ));
    }

    #[test]
    fn init_refuses_unknown_support() {
        let dir = tempfile::tempdir().unwrap();
        let mut profile = TailoringProfile::default();
        profile.selected_supports.insert("Nope".into());
        assert!(matches!(
            init_project(dir.path().join("p"), "demo", profile),
            Err(Error::ProfileInvalid(_))
        ));
    }

    #[test]
    fn schema_mismatch_and_corrupt_files() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("p");
        drop(init_project(&root, "demo", TailoringProfile::default()).unwrap());
        let manifest = root.join(MANIFEST_FILE);
        let text = fs::read_to_string(&manifest).unwrap();
        fs::write(&manifest, text.replace("\"schema_version\": 1", "\"schema_version\": 99")).unwrap();
        assert!(matches!(
            ProjectStore::load(&root),
            Err(Error::SchemaMismatch { found: 99, .. })
        ));
        fs::write(&manifest, text).unwrap();
        fs::write(root.join(LINKS_FILE), "[\n  {\"id\": \n").unwrap();
        match ProjectStore::load(&root) {
            Err(Error::CorruptFile { path, line, .. }) => {
                assert!(path.ends_with(LINKS_FILE));
                assert!(line >= 2);
            }
            other => panic!("expected CorruptFile, got {other:?}"),
        }
    }

    #[test]
    fn keys_are_sorted_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("p");
        let mut store = init_project(&root, "demo", TailoringProfile::default()).unwrap();
        let id = store.create_artefact(ArtefactKind::PRQ, "reqs").unwrap();
        store.add_item(&id, GOALS, ItemKind::Goal, "g", None).unwrap();
        store.save().unwrap();
        let text = fs::read_to_string(root.join(artefact_rel(&id))).unwrap();
        let top: Vec<&str> = text
            .lines()
            .filter(|l| l.starts_with("  \""))
            .map(|l| l.trim().split('"').nth(1).unwrap())
            .collect();
        assert_eq!(top, ["id", "kind", "name", "sections", "version"]);
    }

    #[test]
    fn second_writer_times_out() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("p");
        let _first = init_project(&root, "demo", TailoringProfile::default()).unwrap();
        assert!(matches!(
            ProjectStore::load_with_wait(&root, Duration::from_millis(50)),
            Err(Error::Locked { .. })
        ));
    }

    #[test]
    fn interrupted_save_rolls_forward_once_committed() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("p");
        let mut store = init_project(&root, "demo", TailoringProfile::default()).unwrap();
        let old = store.state().clone();
        store.create_artefact(ArtefactKind::PRQ, "reqs").unwrap();
        let new = store.state().clone();
        // two staged files (artefact + manifest) and the plan: fail on the first move
        assert!(store.save_with_fault(3).is_err());
        drop(store);
        let loaded = ProjectStore::load(&root).unwrap();
        assert_eq!(loaded.state(), &new);
        assert_ne!(loaded.state(), &old);
        assert!(!root.join(TXN_DIR).exists());
    }
}
