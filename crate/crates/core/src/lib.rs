//! Engine for artefact-based software process improvement (SPI) projects.
//!
//! The crate models an SPI project as a set of typed artefacts (process
//! requirements, conceptual and technical process designs, life cycle
//! support, process releases and optional support artefacts) connected by
//! trace links, and drives it through iterations of analysis,
//! conceptualisation, realisation and deployment.
//!
//! - [`metamodel`]: artefact kinds, their section structures, support registry
//! - [`tailoring`]: questionnaire → profile, design merging
//! - [`repository`]: in-memory project state and its on-disk store
//! - [`validation`]: completeness, consistency and release-readiness findings
//! - [`lifecycle`]: iterations and phase gates
//! - [`release_change`]: release pipeline, change requests, reference-process deltas
//! - [`cli`]: the `arspi` command-line front end

pub mod cli;
pub mod error;
pub mod lifecycle;
pub mod metamodel;
pub mod release_change;
pub mod repository;
pub mod tailoring;
pub mod trace;
pub mod validation;

pub use error::{Error, ErrorCategory, Result};
pub use lifecycle::{
    advance_phase, close_iteration, plan_project, start_iteration, Advance, Iteration, IterationInputs,
    IterationState, Phase,
};
pub use metamodel::{
    catalog_key_artefacts, new_artefact, required_sections, Artefact, ArtefactKind, ContentItem, ItemKind,
    KindCode, Section, SectionSpec, SupportArtefactDescriptor, SupportRegistry,
};
pub use release_change::{
    compute_delta, ingest_update_trigger, package_release, promote, submit_change, triage_change,
    ChangeOrigin, ChangeRequest, ChangeStatus, DeltaReport, ReferenceProcessSnapshot, Release,
    ReleaseStatus, Triage,
};
pub use repository::{init_project, ProjectManifest, ProjectState, ProjectStore};
pub use tailoring::{
    apply_profile, derive_profile, merge_designs, ProjectScale, QuestionnaireAnswers, TailoringProfile,
};
pub use trace::{LinkKind, TraceLink};
pub use validation::{
    check_completeness, check_consistency, check_release_readiness, Finding, Severity, Subject,
};
