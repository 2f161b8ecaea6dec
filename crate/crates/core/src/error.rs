use std::path::PathBuf;

use crate::metamodel::ArtefactKind;
use crate::validation::Finding;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the engine reports.
///
/// Variants are grouped roughly by the module that raises them. The CLI maps
/// them onto exit codes via [`Error::category`].
#[derive(Debug, thiserror::Error)]
pub enum Error {
    // metamodel
    #[error("artefact kind {kind} is not permitted under the current tailoring profile")]
    KindNotPermitted { kind: ArtefactKind },
    #[error("support artefact `{0}` is already registered")]
    DuplicateName(String),
    #[error("built-in support artefact `{0}` cannot be overwritten")]
    BuiltinOverwrite(String),
    #[error("unknown support artefact `{0}`")]
    UnknownSupport(String),
    #[error("invalid artefact kind `{0}`")]
    InvalidKind(String),
    #[error("section `{key}` does not exist in the structure of {kind}")]
    UnknownSection { kind: ArtefactKind, key: String },
    #[error("section `{key}` appears {count} times in artefact {artefact}")]
    DuplicateSection { artefact: String, key: String, count: usize },
    #[error("required section `{key}` is missing from artefact {artefact}")]
    MissingSection { artefact: String, key: String },
    #[error("a {item_kind} item may not be placed in section `{key}` of {kind}")]
    MisplacedItem {
        kind: ArtefactKind,
        key: String,
        item_kind: String,
    },
    #[error("identifier `{0}` is already in use in this project")]
    DuplicateId(String),
    #[error("invalid identifier `{0}`: use ASCII letters, digits, `-` or `_`")]
    InvalidId(String),

    // repository
    #[error("{} is not empty", .0.display())]
    PathOccupied(PathBuf),
    #[error("invalid tailoring profile: {0}")]
    ProfileInvalid(String),
    #[error("store schema version {found} is not supported (expected {expected})")]
    SchemaMismatch { found: u32, expected: u32 },
    #[error("{}:{line}: {message}", path.display())]
    CorruptFile {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("no project found at {}", .0.display())]
    NoProject(PathBuf),
    #[error("project at {} is locked by another writer ({})", path.display(), holder)]
    Locked { path: PathBuf, holder: String },
    #[error("unknown id `{0}`")]
    UnknownId(String),
    #[error("trace link endpoint `{0}` does not resolve to an artefact or content item")]
    DanglingEndpoint(String),
    #[error("a `{link}` link from {source_class} to {target_class} is not permitted")]
    KindMatrixViolation {
        link: String,
        source_class: String,
        target_class: String,
    },
    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    // tailoring
    #[error("cannot switch design merging on a store that already holds {0} artefacts")]
    IncompatibleRetailoring(String),
    #[error("expected a {expected} artefact, got {found}")]
    KindMismatch {
        expected: ArtefactKind,
        found: ArtefactKind,
    },

    // lifecycle
    #[error("iteration {0} is already running")]
    IterationAlreadyRunning(u32),
    #[error("unknown change request `{0}`")]
    UnknownChange(String),
    #[error("change request `{id}` is {status}, not accepted")]
    ChangeNotAccepted { id: String, status: String },
    #[error("phase gate not satisfied: {} blocking finding(s)", .0.len())]
    GateNotSatisfied(Vec<Finding>),
    #[error("iteration {0} is not running")]
    IterationNotRunning(u32),
    #[error("unknown iteration {0}")]
    UnknownIteration(u32),
    #[error("iteration {0} has no released Process Release")]
    ReleaseMissing(u32),
    #[error("iteration {0} cannot close without a Process Life Cycle Support artefact")]
    PlcMissing(u32),
    #[error("expected {expected} shortened flags, got {found}")]
    CountMismatch { expected: usize, found: usize },
    #[error("iteration count must be at least 1")]
    InvalidCount,
    #[error("iteration {index} is in {found}, expected {expected}")]
    WrongPhase {
        index: u32,
        found: String,
        expected: String,
    },

    // release / change
    #[error("release is not ready: {} blocking finding(s)", .0.len())]
    NotReady(Vec<Finding>),
    #[error("release `{0}` is already released")]
    AlreadyReleased(String),
    #[error("externally triggered change requests need at least one linked asset")]
    MissingLinkedAssets,
    #[error("change request `{id}` is {status}; only submitted requests can be triaged")]
    InvalidTriageState { id: String, status: String },
    #[error("snapshots belong to different reference processes (`{old}` vs `{new}`)")]
    SnapshotMismatch { old: String, new: String },
    #[error("the set of changed assets is empty")]
    EmptyChangeSet,
}

/// Coarse grouping used for CLI exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Blocked by validation findings.
    Findings,
    /// Rejected request: bad arguments or a violated precondition.
    Usage,
    /// The store could not be read, written or locked.
    Store,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::GateNotSatisfied(_) | Error::NotReady(_) => ErrorCategory::Findings,
            Error::PathOccupied(_)
            | Error::SchemaMismatch { .. }
            | Error::CorruptFile { .. }
            | Error::NoProject(_)
            | Error::Locked { .. }
            | Error::Io { .. } => ErrorCategory::Store,
            _ => ErrorCategory::Usage,
        }
    }

    /// Findings carried by gate and readiness failures.
    pub fn findings(&self) -> Option<&[Finding]> {
        match self {
            Error::GateNotSatisfied(f) | Error::NotReady(f) => Some(f),
            _ => None,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
