//! The on-disk project store: canonical JSON files, an advisory lock and
//! transactional saves that survive an interrupted write.

use std::time::Duration;

use arspi_engine::{init_project, ArtefactKind, Error, ItemKind, ProjectStore, TailoringProfile};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let root = dir.path().join("project");

    let mut store = init_project(&root, "store-demo", TailoringProfile::merged())?;
    let prq = store.create_artefact(ArtefactKind::PRQ, "Requirements")?;
    store.add_item(&prq, "Requirements", ItemKind::Requirement, "Releases are signed", None)?;
    store.save()?;

    // a second handle waits for the lock, then gives up
    match ProjectStore::load_with_wait(&root, Duration::from_millis(50)) {
        Err(Error::Locked { .. }) => println!("store is locked by the first handle"),
        other => return Err(format!("expected a lock error, got {other:?}").into()),
    }

    let saved = store.state().clone();
    drop(store);
    let reloaded = ProjectStore::load(&root)?;
    assert_eq!(reloaded.state(), &saved);
    println!("reloaded {} artefact(s) unchanged", reloaded.artefacts.len());

    // a save interrupted after two file operations is rolled forward on the
    // next load
    let mut store = reloaded;
    store.add_item(&prq, "Goals", ItemKind::Goal, "Auditable releases", None)?;
    let expected = store.state().clone();
    let _ = store.save_with_fault(2);
    drop(store);
    let recovered = ProjectStore::snapshot(&root)?;
    println!("after the interrupted save the store holds {} goal(s)",
        recovered.get_artefact(&prq)?.section("Goals").map_or(0, |s| s.items.len()));
    assert!(recovered == expected || recovered == saved);

    for entry in std::fs::read_dir(&root)? {
        println!("  {}", entry?.file_name().to_string_lossy());
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
