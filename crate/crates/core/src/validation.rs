//! Findings over a project: completeness, consistency and release readiness.
//!
//! Structural breaks are errors; process advice is a warning. Checks never
//! fail, they only report. Output is sorted so that identical stores yield
//! identical finding lists.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lifecycle::{IterationState, Phase};
use crate::metamodel::{
    sharing_group, spec_tree, ArtefactKind, ItemKind, KindCode, StructureIssue, GOALS,
    REQUIREMENTS_TRACING,
};
use crate::repository::ProjectState;
use crate::trace::{tracing_projection, EndpointClass, LinkKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// What a finding is about.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Subject {
    KeyArtefact { kind: ArtefactKind },
    Artefact { artefact: String },
    Section { artefact: String, section: String },
    Item { artefact: String, item: String },
    Link { link: String },
    Iteration { index: u32 },
}

impl Subject {
    /// Owning artefact, if the subject lives inside one.
    pub fn artefact(&self) -> Option<&str> {
        match self {
            Subject::Artefact { artefact }
            | Subject::Section { artefact, .. }
            | Subject::Item { artefact, .. } => Some(artefact),
            _ => None,
        }
    }

    fn sort_key(&self) -> (String, String) {
        match self {
            Subject::KeyArtefact { kind } => (String::new(), kind.to_string()),
            Subject::Artefact { artefact } => (artefact.clone(), String::new()),
            Subject::Section { artefact, section } => (artefact.clone(), section.clone()),
            Subject::Item { artefact, item } => (artefact.clone(), item.clone()),
            Subject::Link { link } => ("~link".into(), link.clone()),
            Subject::Iteration { index } => ("~iteration".into(), format!("{index:08}")),
        }
    }
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::KeyArtefact { kind } => write!(f, "{kind}"),
            Subject::Artefact { artefact } => write!(f, "{artefact}"),
            Subject::Section { artefact, section } => write!(f, "{artefact}/{section}"),
            Subject::Item { artefact, item } => write!(f, "{artefact}#{item}"),
            Subject::Link { link } => write!(f, "link {link}"),
            Subject::Iteration { index } => write!(f, "iteration {index}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub severity: Severity,
    pub rule_id: String,
    pub subject: Subject,
    pub message: String,
}

impl Finding {
    fn new(rule: Rule, subject: Subject, message: impl Into<String>) -> Self {
        Finding {
            severity: rule.severity(),
            rule_id: rule.id().to_string(),
            subject,
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}] {}: {}", self.severity, self.rule_id, self.subject, self.message)
    }
}

/// The published rule catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    MissingKeyArtefact,
    MissingSection,
    DuplicateSection,
    UnknownSection,
    MisplacedItem,
    EmptySection,
    RequirementNotAddressed,
    DesignNotRealised,
    SharedSectionMismatch,
    LinkKindViolation,
    DanglingEndpoint,
    ReleaseAlreadyShipped,
    ShortenedIteration,
}

impl Rule {
    pub const ALL: [Rule; 13] = [
        Rule::MissingKeyArtefact,
        Rule::MissingSection,
        Rule::DuplicateSection,
        Rule::UnknownSection,
        Rule::MisplacedItem,
        Rule::EmptySection,
        Rule::RequirementNotAddressed,
        Rule::DesignNotRealised,
        Rule::SharedSectionMismatch,
        Rule::LinkKindViolation,
        Rule::DanglingEndpoint,
        Rule::ReleaseAlreadyShipped,
        Rule::ShortenedIteration,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Rule::MissingKeyArtefact => "MissingKeyArtefact",
            Rule::MissingSection => "MissingSection",
            Rule::DuplicateSection => "DuplicateSection",
            Rule::UnknownSection => "UnknownSection",
            Rule::MisplacedItem => "MisplacedItem",
            Rule::EmptySection => "EmptySection",
            Rule::RequirementNotAddressed => "RequirementNotAddressed",
            Rule::DesignNotRealised => "DesignNotRealised",
            Rule::SharedSectionMismatch => "SharedSectionMismatch",
            Rule::LinkKindViolation => "LinkKindViolation",
            Rule::DanglingEndpoint => "DanglingEndpoint",
            Rule::ReleaseAlreadyShipped => "ReleaseAlreadyShipped",
            Rule::ShortenedIteration => "ShortenedIteration",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            Rule::ShortenedIteration => Severity::Warning,
            _ => Severity::Error,
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Rule::MissingKeyArtefact => "a key artefact due by the phase reached does not exist",
            Rule::MissingSection => "a required section is absent from an artefact",
            Rule::DuplicateSection => "a section key occurs more than once in an artefact",
            Rule::UnknownSection => "a section key is not defined for the artefact kind",
            Rule::MisplacedItem => "a content item sits in a section that may not hold its kind",
            Rule::EmptySection => "a required section holds no content",
            Rule::RequirementNotAddressed => "a requirement is not addressed by any design element",
            Rule::DesignNotRealised => "a design element is not realised by any realisation element",
            Rule::SharedSectionMismatch => "a shared section differs between the artefacts sharing it",
            Rule::LinkKindViolation => "a trace link connects element kinds the link kind does not allow",
            Rule::DanglingEndpoint => "a trace link endpoint does not resolve",
            Rule::ReleaseAlreadyShipped => "the iteration already packaged its Process Release",
            Rule::ShortenedIteration => "the iteration is shortened and has no deployment phase",
        }
    }
}

/// Allowed (source class, target class, link kind) triples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkKindMatrix {
    allowed: BTreeSet<(EndpointClass, EndpointClass, LinkKind)>,
}

impl LinkKindMatrix {
    /// Requirements are addressed by designs, designs realised by
    /// realisations and refined by other designs, artefacts share with and
    /// derive from each other. Local elements may also derive from assets of
    /// a reference process.
    pub fn standard() -> Self {
        use EndpointClass::{Artefact, Item};
        let mut allowed = BTreeSet::from([
            (Item(ItemKind::Requirement), Item(ItemKind::DesignElement), LinkKind::Addresses),
            (Item(ItemKind::DesignElement), Item(ItemKind::RealisationElement), LinkKind::Realises),
            (Item(ItemKind::DesignElement), Item(ItemKind::DesignElement), LinkKind::Refines),
            (Artefact, Artefact, LinkKind::Shares),
            (Artefact, Artefact, LinkKind::DerivesFrom),
        ]);
        for source in [
            Artefact,
            Item(ItemKind::Requirement),
            Item(ItemKind::DesignElement),
            Item(ItemKind::RealisationElement),
        ] {
            allowed.insert((source, Item(ItemKind::Asset), LinkKind::DerivesFrom));
        }
        LinkKindMatrix { allowed }
    }

    pub fn allows(&self, source: EndpointClass, target: EndpointClass, kind: LinkKind) -> bool {
        self.allowed.contains(&(source, target, kind))
    }

    pub fn triples(&self) -> impl Iterator<Item = &(EndpointClass, EndpointClass, LinkKind)> + '_ {
        self.allowed.iter()
    }
}

pub(crate) fn sorted(mut findings: Vec<Finding>) -> Vec<Finding> {
    findings.sort_by(|a, b| {
        (a.subject.sort_key(), a.rule_id.as_str(), a.message.as_str())
            .cmp(&(b.subject.sort_key(), b.rule_id.as_str(), b.message.as_str()))
    });
    findings.dedup();
    findings
}

/// Phases whose work is over, across all iterations.
fn ended_phases(state: &ProjectState) -> BTreeSet<Phase> {
    let mut ended = BTreeSet::new();
    for it in &state.iterations {
        match (it.state, it.current_phase) {
            (IterationState::Running, Some(current)) => {
                ended.extend(Phase::ALL.into_iter().filter(|p| *p < current));
            }
            (IterationState::Closed, Some(last)) => {
                ended.extend(Phase::ALL.into_iter().filter(|p| *p <= last));
            }
            _ => {}
        }
    }
    ended
}

fn current_phases(state: &ProjectState) -> BTreeSet<Phase> {
    state
        .iterations
        .iter()
        .filter(|i| i.state == IterationState::Running)
        .filter_map(|i| i.current_phase)
        .collect()
}

/// Key artefact kinds that must exist given the phases reached.
pub fn due_key_artefacts(state: &ProjectState) -> Vec<ArtefactKind> {
    let ended = ended_phases(state);
    let reached_deployment = ended.contains(&Phase::Deployment) || current_phases(state).contains(&Phase::Deployment);
    let merged = state.profile().merge_designs;
    let mut due = Vec::new();
    if ended.contains(&Phase::Analysis) {
        due.push(ArtefactKind::PRQ);
    }
    if ended.contains(&Phase::Conceptualisation) {
        due.push(if merged { ArtefactKind::PD } else { ArtefactKind::CPD });
    }
    if ended.contains(&Phase::Realisation) {
        due.push(if merged { ArtefactKind::PD } else { ArtefactKind::TPD });
    }
    if reached_deployment {
        due.push(ArtefactKind::PLC);
    }
    if ended.contains(&Phase::Deployment) {
        due.push(ArtefactKind::PR);
    }
    due.dedup();
    due
}

/// Section-level completeness of one artefact.
pub fn artefact_completeness(state: &ProjectState, artefact_id: &str) -> Result<Vec<Finding>> {
    let artefact = state.get_artefact(artefact_id)?;
    let mut out = Vec::new();
    let id = artefact.id.clone();
    let section = |key: &str| Subject::Section {
        artefact: id.clone(),
        section: key.to_string(),
    };
    for issue in artefact.structure_issues() {
        out.push(match issue {
            StructureIssue::MissingSection(key) => {
                Finding::new(Rule::MissingSection, section(&key), format!("required section {key} is missing"))
            }
            StructureIssue::DuplicateSection { key, count } => Finding::new(
                Rule::DuplicateSection,
                section(&key),
                format!("section {key} occurs {count} times"),
            ),
            StructureIssue::UnknownSection(key) => Finding::new(
                Rule::UnknownSection,
                section(&key),
                format!("section {key} is not defined for {}", artefact.kind),
            ),
            StructureIssue::MisplacedItem { key, item, item_kind } => Finding::new(
                Rule::MisplacedItem,
                Subject::Item {
                    artefact: id.clone(),
                    item: item.clone(),
                },
                format!("{item_kind} item {item} may not be placed in {key}"),
            ),
        });
    }
    let tree = spec_tree(&artefact.kind);
    for spec in tree.iter().flat_map(|s| s.walk()).filter(|s| s.required) {
        if let Some(s) = artefact.section(&spec.key) {
            if !s.is_populated() {
                out.push(Finding::new(
                    Rule::EmptySection,
                    section(&spec.key),
                    format!("required section {} is empty", spec.title),
                ));
            }
        }
    }
    Ok(sorted(out))
}

pub fn check_completeness(state: &ProjectState) -> Vec<Finding> {
    let mut out = Vec::new();
    for kind in due_key_artefacts(state) {
        if state.artefacts_of(&kind).next().is_none() {
            out.push(Finding::new(
                Rule::MissingKeyArtefact,
                Subject::KeyArtefact { kind: kind.clone() },
                format!("{} ({}) is due but does not exist", kind.code().title(), kind),
            ));
        }
    }
    for artefact in &state.artefacts {
        out.extend(artefact_completeness(state, &artefact.id).expect("artefact exists"));
    }
    sorted(out)
}

fn has_kind(state: &ProjectState, code: KindCode) -> bool {
    state.artefacts.iter().any(|a| a.kind.code() == code)
}

/// Requirements without an outgoing `addresses` link to a design element,
/// as (artefact id, item id). Empty until a CPD or PD exists.
pub fn unaddressed_requirements(state: &ProjectState) -> Vec<(String, String)> {
    if !has_kind(state, KindCode::Cpd) && !has_kind(state, KindCode::Pd) {
        return Vec::new();
    }
    let index = state.element_index();
    let mut out = Vec::new();
    for artefact in state.artefacts.iter().filter(|a| a.kind.code() == KindCode::Prq) {
        for (_, item) in artefact.items().filter(|(_, i)| i.kind == ItemKind::Requirement) {
            let covered = state.links.iter().any(|l| {
                l.kind == LinkKind::Addresses
                    && l.source == item.id
                    && index
                        .get(&l.target)
                        .is_some_and(|t| t.class == EndpointClass::Item(ItemKind::DesignElement))
            });
            if !covered {
                out.push((artefact.id.clone(), item.id.clone()));
            }
        }
    }
    out
}

/// Design elements without an outgoing `realises` link to a realisation
/// element. Empty unless a TPD exists, designs are split and strict
/// coverage is on.
pub fn unrealised_designs(state: &ProjectState) -> Vec<(String, String)> {
    let profile = state.profile();
    if profile.merge_designs || !profile.strict_realisation_coverage || !has_kind(state, KindCode::Tpd) {
        return Vec::new();
    }
    let index = state.element_index();
    let mut out = Vec::new();
    for artefact in &state.artefacts {
        for (_, item) in artefact.items().filter(|(_, i)| i.kind == ItemKind::DesignElement) {
            let covered = state.links.iter().any(|l| {
                l.kind == LinkKind::Realises
                    && l.source == item.id
                    && index
                        .get(&l.target)
                        .is_some_and(|t| t.class == EndpointClass::Item(ItemKind::RealisationElement))
            });
            if !covered {
                out.push((artefact.id.clone(), item.id.clone()));
            }
        }
    }
    out
}

fn shared_section_findings(state: &ProjectState) -> Vec<Finding> {
    let mut out = Vec::new();
    let group = sharing_group(GOALS).unwrap_or_default();
    let mut holders: Vec<_> = state
        .artefacts
        .iter()
        .filter(|a| group.contains(&a.kind.code()))
        .filter_map(|a| a.section(GOALS).map(|s| (a, s.texts())))
        .collect();
    // the PRQ is the reference when present
    holders.sort_by_key(|(a, _)| a.kind.code() != KindCode::Prq);
    if let Some(((reference, expected), rest)) = holders.split_first() {
        for (a, texts) in rest {
            if texts != expected {
                out.push(Finding::new(
                    Rule::SharedSectionMismatch,
                    Subject::Section {
                        artefact: a.id.clone(),
                        section: GOALS.into(),
                    },
                    format!("Goals differ from {} ({})", reference.id, reference.kind),
                ));
            }
        }
    }

    let projection = tracing_projection(&state.links);
    for a in &state.artefacts {
        if let Some(section) = a.section(REQUIREMENTS_TRACING) {
            if section.texts() != projection {
                out.push(Finding::new(
                    Rule::SharedSectionMismatch,
                    Subject::Section {
                        artefact: a.id.clone(),
                        section: REQUIREMENTS_TRACING.into(),
                    },
                    "Requirements Tracing does not match the trace links",
                ));
            }
        }
    }
    out
}

pub fn check_consistency(state: &ProjectState) -> Vec<Finding> {
    let mut out = Vec::new();
    for (artefact, item) in unaddressed_requirements(state) {
        out.push(Finding::new(
            Rule::RequirementNotAddressed,
            Subject::Item { artefact, item: item.clone() },
            format!("requirement {item} is not addressed by any design element"),
        ));
    }
    for (artefact, item) in unrealised_designs(state) {
        out.push(Finding::new(
            Rule::DesignNotRealised,
            Subject::Item { artefact, item: item.clone() },
            format!("design element {item} is not realised"),
        ));
    }
    out.extend(shared_section_findings(state));

    let index = state.element_index();
    let matrix = LinkKindMatrix::standard();
    for link in &state.links {
        let subject = || Subject::Link { link: link.id.clone() };
        let source = index.get(&link.source);
        let target = index.get(&link.target);
        for (end, resolved) in [(&link.source, source), (&link.target, target)] {
            if resolved.is_none() {
                out.push(Finding::new(
                    Rule::DanglingEndpoint,
                    subject(),
                    format!("endpoint {end} does not resolve"),
                ));
            }
        }
        if let (Some(s), Some(t)) = (source, target) {
            if !matrix.allows(s.class, t.class, link.kind) {
                out.push(Finding::new(
                    Rule::LinkKindViolation,
                    subject(),
                    format!("{} link from {} to {} is not permitted", link.kind, s.class, t.class),
                ));
            }
        }
    }
    sorted(out)
}

pub fn check_release_readiness(state: &ProjectState, iteration: u32) -> Result<Vec<Finding>> {
    let it = state.iteration(iteration)?;
    let mut out = Vec::new();
    if it.shortened {
        out.push(Finding::new(
            Rule::ShortenedIteration,
            Subject::Iteration { index: iteration },
            "shortened iteration has no deployment phase; no release can ship",
        ));
    }
    if let Some(release) = state.releases.iter().find(|r| r.iteration_index == iteration) {
        out.push(Finding::new(
            Rule::ReleaseAlreadyShipped,
            Subject::Iteration { index: iteration },
            format!("iteration {iteration} already packaged release {}", release.id),
        ));
    }
    let relevant = |f: &Finding| {
        f.is_error()
            && match f.subject.artefact() {
                Some(a) => it.produced.contains(a),
                None => true,
            }
    };
    out.extend(check_completeness(state).into_iter().filter(relevant));
    out.extend(check_consistency(state).into_iter().filter(relevant));
    Ok(sorted(out))
}

/// All findings of completeness and consistency.
pub fn validate(state: &ProjectState) -> Vec<Finding> {
    let mut all = check_completeness(state);
    all.extend(check_consistency(state));
    sorted(all)
}
