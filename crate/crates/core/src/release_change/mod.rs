//! Releases, change requests and reference-process deltas.

mod change;
mod delta;
mod release;

pub use change::{
    ingest_update_trigger, submit_change, triage_change, ChangeOrigin, ChangeRequest, ChangeStatus,
    ReferenceProcessSnapshot, Triage,
};
pub use delta::{
    changed_assets, compute_delta, compute_delta_with, record_delta, reverse_closure, DeltaOptions,
    DeltaReport,
};
pub use release::{package_release, package_release_with_parent, promote, Release, ReleaseStatus};
