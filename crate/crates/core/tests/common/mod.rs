//! Shared generators, oracles and fixtures for the integration tests.
#![allow(dead_code)]

pub mod gen;
pub mod model;
pub mod oracle;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use arspi_engine::{init_project, ProjectState, ProjectStore};

/// Writes `state` as a fresh store under `root` and releases the lock.
pub fn write_store(root: &Path, state: &ProjectState) -> arspi_engine::Result<()> {
    let mut store = init_project(root, &state.manifest.project_name, state.profile().clone())?;
    store.replace_state(state.clone());
    store.save()
}

pub fn load(root: &Path) -> arspi_engine::Result<ProjectState> {
    ProjectStore::snapshot(root)
}

/// Every file under `root` except the lock, keyed by relative path.
pub fn files(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if !path.ends_with(arspi_engine::repository::LOCK_FILE) {
                out.insert(path.strip_prefix(root).unwrap().display().to_string(), fs::read(&path).unwrap());
            }
        }
    }
    out
}
