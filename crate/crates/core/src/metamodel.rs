//! The artefact catalog.
//!
//! Five key artefacts (PRQ, CPD, TPD, PLC, PR), the unified Process Design
//! (PD) that replaces CPD and TPD in merged projects, and support artefacts
//! drawn from an open registry. Each kind has a tree of [`SectionSpec`]s;
//! concrete [`Artefact`]s mirror that tree with [`Section`]s holding
//! [`ContentItem`]s.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tailoring::TailoringProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum KindCode {
    Prq,
    Cpd,
    Tpd,
    Pd,
    Plc,
    Pr,
    Support,
}

impl KindCode {
    pub const ALL: [KindCode; 7] = [
        KindCode::Prq,
        KindCode::Cpd,
        KindCode::Tpd,
        KindCode::Pd,
        KindCode::Plc,
        KindCode::Pr,
        KindCode::Support,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            KindCode::Prq => "PRQ",
            KindCode::Cpd => "CPD",
            KindCode::Tpd => "TPD",
            KindCode::Pd => "PD",
            KindCode::Plc => "PLC",
            KindCode::Pr => "PR",
            KindCode::Support => "SUPPORT",
        }
    }

    /// Full artefact name, e.g. "Conceptual Process Design".
    pub fn title(self) -> &'static str {
        match self {
            KindCode::Prq => "Process Requirements",
            KindCode::Cpd => "Conceptual Process Design",
            KindCode::Tpd => "Technical Process Design",
            KindCode::Pd => "Process Design",
            KindCode::Plc => "Process Life Cycle Support",
            KindCode::Pr => "Process Release",
            KindCode::Support => "Support Artefact",
        }
    }

    fn id_prefix(self) -> &'static str {
        match self {
            KindCode::Prq => "prq",
            KindCode::Cpd => "cpd",
            KindCode::Tpd => "tpd",
            KindCode::Pd => "pd",
            KindCode::Plc => "plc",
            KindCode::Pr => "pr",
            KindCode::Support => "sup",
        }
    }
}

impl fmt::Display for KindCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Kind of an artefact. Support artefacts carry their registry name.
///
/// The textual form is the code (`PRQ`, `PD`, ...) or `SUPPORT:<name>`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ArtefactKind {
    code: KindCode,
    support_name: Option<String>,
}

impl ArtefactKind {
    pub const PRQ: ArtefactKind = ArtefactKind::key(KindCode::Prq);
    pub const CPD: ArtefactKind = ArtefactKind::key(KindCode::Cpd);
    pub const TPD: ArtefactKind = ArtefactKind::key(KindCode::Tpd);
    pub const PD: ArtefactKind = ArtefactKind::key(KindCode::Pd);
    pub const PLC: ArtefactKind = ArtefactKind::key(KindCode::Plc);
    pub const PR: ArtefactKind = ArtefactKind::key(KindCode::Pr);

    const fn key(code: KindCode) -> Self {
        ArtefactKind {
            code,
            support_name: None,
        }
    }

    pub fn support(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::InvalidKind("SUPPORT:".into()));
        }
        Ok(ArtefactKind {
            code: KindCode::Support,
            support_name: Some(name),
        })
    }

    pub fn code(&self) -> KindCode {
        self.code
    }

    pub fn support_name(&self) -> Option<&str> {
        self.support_name.as_deref()
    }

    pub fn is_support(&self) -> bool {
        self.code == KindCode::Support
    }

    /// PR and support artefacts have no fixed structure; their sections are
    /// free-form.
    pub fn is_free_form(&self) -> bool {
        matches!(self.code, KindCode::Pr | KindCode::Support)
    }

    /// Whether this kind may exist in a project tailored with `profile`.
    pub fn permitted_under(&self, profile: &TailoringProfile) -> bool {
        match self.code {
            KindCode::Pd => profile.merge_designs,
            KindCode::Cpd | KindCode::Tpd => !profile.merge_designs,
            _ => true,
        }
    }
}

impl fmt::Display for ArtefactKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.support_name {
            Some(name) => write!(f, "SUPPORT:{name}"),
            None => f.write_str(self.code.as_str()),
        }
    }
}

impl FromStr for ArtefactKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(name) = s.strip_prefix("SUPPORT:") {
            return ArtefactKind::support(name);
        }
        let code = match s.to_ascii_uppercase().as_str() {
            "PRQ" => KindCode::Prq,
            "CPD" => KindCode::Cpd,
            "TPD" => KindCode::Tpd,
            "PD" => KindCode::Pd,
            "PLC" => KindCode::Plc,
            "PR" => KindCode::Pr,
            _ => return Err(Error::InvalidKind(s.to_string())),
        };
        Ok(ArtefactKind::key(code))
    }
}

impl TryFrom<String> for ArtefactKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ArtefactKind> for String {
    fn from(kind: ArtefactKind) -> String {
        kind.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionSpec {
    pub key: String,
    pub title: String,
    pub required: bool,
    pub shared_with: BTreeSet<KindCode>,
    pub children: Vec<SectionSpec>,
}

impl SectionSpec {
    fn leaf(key: &str, title: &str) -> Self {
        SectionSpec {
            key: key.to_string(),
            title: title.to_string(),
            required: true,
            shared_with: BTreeSet::new(),
            children: Vec::new(),
        }
    }

    fn with_children(mut self, children: Vec<SectionSpec>) -> Self {
        self.children = children;
        self
    }

    fn optional(mut self) -> Self {
        self.required = false;
        self
    }

    /// Depth-first walk over this spec and its descendants.
    pub fn walk(&self) -> impl Iterator<Item = &SectionSpec> + '_ {
        let mut stack = vec![self];
        std::iter::from_fn(move || {
            let next = stack.pop()?;
            stack.extend(next.children.iter().rev());
            Some(next)
        })
    }
}

/// Sections whose content is shared between artefact kinds.
pub const GOALS: &str = "Goals";
pub const REQUIREMENTS: &str = "Requirements";
pub const REQUIREMENTS_TRACING: &str = "RequirementsTracing";
pub const PLANNED_ADAPTATIONS: &str = "PlannedAdaptations";
pub const MODEL_ORGANISATION: &str = "LogicalAndPhysicalModelOrganisation";

const SHARING_GROUP: [KindCode; 4] = [KindCode::Prq, KindCode::Cpd, KindCode::Tpd, KindCode::Pd];

/// Kinds that carry a shared section with the given key, if the key is shared.
pub fn sharing_group(key: &str) -> Option<&'static [KindCode]> {
    match key {
        GOALS | REQUIREMENTS_TRACING => Some(&SHARING_GROUP),
        _ => None,
    }
}

fn shared(owner: KindCode, key: &str, title: &str) -> SectionSpec {
    let mut spec = SectionSpec::leaf(key, title);
    spec.shared_with = sharing_group(key)
        .unwrap_or_default()
        .iter()
        .copied()
        .filter(|k| *k != owner)
        .collect();
    spec
}

fn prq_tree() -> Vec<SectionSpec> {
    let owner = KindCode::Prq;
    vec![
        shared(owner, GOALS, "Goals"),
        SectionSpec::leaf("StakeholdersAndRoles", "Stakeholders and Roles"),
        SectionSpec::leaf(REQUIREMENTS, "Requirements").with_children(vec![shared(
            owner,
            REQUIREMENTS_TRACING,
            "Requirements Tracing",
        )
        .optional()]),
        SectionSpec::leaf("OverallProcessDraft", "Overall Process Draft"),
        SectionSpec::leaf("TechnicalInfrastructure", "Technical Infrastructure"),
        SectionSpec::leaf("BasicConditions", "Basic Conditions"),
    ]
}

fn design_tree(owner: KindCode) -> Vec<SectionSpec> {
    vec![
        shared(owner, GOALS, "Goals"),
        SectionSpec::leaf("Principles", "Principles"),
        SectionSpec::leaf(PLANNED_ADAPTATIONS, "Planned Adaptations").with_children(vec![
            SectionSpec::leaf("OrganisationAndRoles", "Organisation and Roles"),
            SectionSpec::leaf("Artefacts", "Artefacts"),
            SectionSpec::leaf("Processes", "Processes"),
        ]),
        SectionSpec::leaf("AdditionalRequirements", "Additional Requirements").with_children(vec![
            SectionSpec::leaf("Tailoring", "Tailoring"),
            SectionSpec::leaf("ProcessDocumentation", "Process Documentation"),
            SectionSpec::leaf("SupportingMaterial", "Supporting Material"),
        ]),
        shared(owner, REQUIREMENTS_TRACING, "Requirements Tracing"),
    ]
}

fn tpd_tree() -> Vec<SectionSpec> {
    let mut tree = design_tree(KindCode::Tpd);
    tree.push(SectionSpec::leaf(
        MODEL_ORGANISATION,
        "Logical and Physical Model Organisation",
    ));
    tree
}

/// Union of the CPD and TPD trees; keys present in both appear once, in CPD
/// order, followed by the TPD-only sections.
fn pd_tree() -> Vec<SectionSpec> {
    let mut tree = design_tree(KindCode::Pd);
    let known: BTreeSet<String> = tree
        .iter()
        .flat_map(|s| s.walk().map(|s| s.key.clone()))
        .collect();
    for spec in tpd_tree() {
        if !known.contains(&spec.key) {
            tree.push(spec);
        }
    }
    tree
}

fn plc_tree() -> Vec<SectionSpec> {
    vec![
        SectionSpec::leaf("Training", "Training"),
        SectionSpec::leaf(
            "DeploymentAndFurtherDevelopment",
            "Deployment and Further Development",
        ),
        SectionSpec::leaf("MeasurementAndEvaluation", "Measurement and Evaluation"),
        SectionSpec::leaf("ChangeManagement", "Change Management"),
    ]
}

/// Section structure of a kind, independent of tailoring.
pub fn spec_tree(kind: &ArtefactKind) -> Vec<SectionSpec> {
    match kind.code {
        KindCode::Prq => prq_tree(),
        KindCode::Cpd => design_tree(KindCode::Cpd),
        KindCode::Tpd => tpd_tree(),
        KindCode::Pd => pd_tree(),
        KindCode::Plc => plc_tree(),
        KindCode::Pr | KindCode::Support => Vec::new(),
    }
}

/// The five key artefacts plus the unified Process Design, each with its
/// section structure.
pub fn catalog_key_artefacts() -> Vec<(ArtefactKind, Vec<SectionSpec>)> {
    [
        ArtefactKind::PRQ,
        ArtefactKind::CPD,
        ArtefactKind::TPD,
        ArtefactKind::PLC,
        ArtefactKind::PR,
        ArtefactKind::PD,
    ]
    .into_iter()
    .map(|k| {
        let tree = spec_tree(&k);
        (k, tree)
    })
    .collect()
}

/// Section structure of `kind` in a project tailored with `profile`.
pub fn required_sections(kind: &ArtefactKind, profile: &TailoringProfile) -> Result<Vec<SectionSpec>> {
    if !kind.permitted_under(profile) {
        return Err(Error::KindNotPermitted { kind: kind.clone() });
    }
    Ok(spec_tree(kind))
}

/// Looks up a section spec by key anywhere in a tree.
pub fn find_spec<'a>(tree: &'a [SectionSpec], key: &str) -> Option<&'a SectionSpec> {
    tree.iter().flat_map(|s| s.walk()).find(|s| s.key == key)
}

/// Path of keys from the root of `tree` down to `key`, inclusive.
pub fn spec_path(tree: &[SectionSpec], key: &str) -> Option<Vec<String>> {
    fn go(specs: &[SectionSpec], key: &str, path: &mut Vec<String>) -> bool {
        for spec in specs {
            path.push(spec.key.clone());
            if spec.key == key || go(&spec.children, key, path) {
                return true;
            }
            path.pop();
        }
        false
    }
    let mut path = Vec::new();
    go(tree, key, &mut path).then_some(path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemKind {
    Goal,
    Requirement,
    DesignElement,
    RealisationElement,
    Asset,
    Note,
}

impl ItemKind {
    pub const ALL: [ItemKind; 6] = [
        ItemKind::Goal,
        ItemKind::Requirement,
        ItemKind::DesignElement,
        ItemKind::RealisationElement,
        ItemKind::Asset,
        ItemKind::Note,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ItemKind::Goal => "goal",
            ItemKind::Requirement => "requirement",
            ItemKind::DesignElement => "design_element",
            ItemKind::RealisationElement => "realisation_element",
            ItemKind::Asset => "asset",
            ItemKind::Note => "note",
        }
    }

    pub(crate) fn id_prefix(self) -> &'static str {
        match self {
            ItemKind::Goal => "G",
            ItemKind::Requirement => "REQ",
            ItemKind::DesignElement => "DE",
            ItemKind::RealisationElement => "RE",
            ItemKind::Asset => "A",
            ItemKind::Note => "N",
        }
    }
}

impl fmt::Display for ItemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ItemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ItemKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidKind(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContentItem {
    pub id: String,
    pub kind: ItemKind,
    pub text: String,
}

impl ContentItem {
    pub fn new(id: impl Into<String>, kind: ItemKind, text: impl Into<String>) -> Self {
        ContentItem {
            id: id.into(),
            kind,
            text: text.into(),
        }
    }
}

fn in_design_subtree(key: &str) -> bool {
    matches!(
        key,
        PLANNED_ADAPTATIONS | "OrganisationAndRoles" | "Artefacts" | "Processes"
    )
}

/// Whether an item of `item` kind may live in section `key` of `kind`.
///
/// Requirements belong in the PRQ `Requirements` section, design elements in
/// the planned-adaptation sections of CPD/PD, realisation elements in the
/// planned-adaptation and model-organisation sections of TPD/PD. Goals,
/// assets and notes may appear anywhere.
pub fn placement_allowed(kind: &ArtefactKind, key: &str, item: ItemKind) -> bool {
    match item {
        ItemKind::Requirement => kind.code == KindCode::Prq && key == REQUIREMENTS,
        ItemKind::DesignElement => {
            matches!(kind.code, KindCode::Cpd | KindCode::Pd) && in_design_subtree(key)
        }
        ItemKind::RealisationElement => {
            matches!(kind.code, KindCode::Tpd | KindCode::Pd)
                && (in_design_subtree(key) || key == MODEL_ORGANISATION)
        }
        ItemKind::Goal | ItemKind::Asset | ItemKind::Note => true,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub spec_key: String,
    #[serde(default)]
    pub items: Vec<ContentItem>,
    #[serde(default)]
    pub children: Vec<Section>,
}

impl Section {
    pub fn empty(key: impl Into<String>) -> Self {
        Section {
            spec_key: key.into(),
            items: Vec::new(),
            children: Vec::new(),
        }
    }

    fn from_spec(spec: &SectionSpec) -> Self {
        Section {
            spec_key: spec.key.clone(),
            items: Vec::new(),
            children: spec
                .children
                .iter()
                .filter(|c| c.required)
                .map(Section::from_spec)
                .collect(),
        }
    }

    /// True when this section or any descendant holds an item.
    pub fn is_populated(&self) -> bool {
        !self.items.is_empty() || self.children.iter().any(Section::is_populated)
    }

    pub fn walk(&self) -> impl Iterator<Item = &Section> + '_ {
        let mut stack = vec![self];
        std::iter::from_fn(move || {
            let next = stack.pop()?;
            stack.extend(next.children.iter().rev());
            Some(next)
        })
    }

    fn find_mut(&mut self, key: &str) -> Option<&mut Section> {
        if self.spec_key == key {
            return Some(self);
        }
        self.children.iter_mut().find_map(|c| c.find_mut(key))
    }

    pub fn texts(&self) -> Vec<&str> {
        self.items.iter().map(|i| i.text.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artefact {
    pub id: String,
    pub kind: ArtefactKind,
    pub name: String,
    pub version: u32,
    #[serde(default)]
    pub sections: Vec<Section>,
}

/// Problems with an artefact's section tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StructureIssue {
    MissingSection(String),
    DuplicateSection { key: String, count: usize },
    UnknownSection(String),
    MisplacedItem { key: String, item: String, item_kind: ItemKind },
}

impl Artefact {
    pub fn section(&self, key: &str) -> Option<&Section> {
        self.sections.iter().flat_map(|s| s.walk()).find(|s| s.spec_key == key)
    }

    pub fn section_mut(&mut self, key: &str) -> Option<&mut Section> {
        self.sections.iter_mut().find_map(|s| s.find_mut(key))
    }

    /// All sections, depth-first.
    pub fn walk_sections(&self) -> impl Iterator<Item = &Section> + '_ {
        self.sections.iter().flat_map(|s| s.walk())
    }

    /// All items with the key of the section that holds them.
    pub fn items(&self) -> impl Iterator<Item = (&str, &ContentItem)> + '_ {
        self.walk_sections()
            .flat_map(|s| s.items.iter().map(move |i| (s.spec_key.as_str(), i)))
    }

    pub fn find_item(&self, id: &str) -> Option<&ContentItem> {
        self.items().map(|(_, i)| i).find(|i| i.id == id)
    }

    /// Returns the section for `key`, creating it (and any missing ancestors)
    /// when the key is defined for this kind but not yet materialised.
    pub fn ensure_section(&mut self, key: &str) -> Result<&mut Section> {
        if self.section(key).is_some() {
            return Ok(self.section_mut(key).expect("section exists"));
        }
        if self.kind.is_free_form() {
            validate_key(key)?;
            self.sections.push(Section::empty(key));
            return Ok(self.sections.last_mut().expect("just pushed"));
        }
        let tree = spec_tree(&self.kind);
        let path = spec_path(&tree, key).ok_or_else(|| Error::UnknownSection {
            kind: self.kind.clone(),
            key: key.to_string(),
        })?;
        let mut level = &mut self.sections;
        let mut specs: &[SectionSpec] = &tree;
        for step in &path {
            let spec = specs.iter().find(|s| &s.key == step).expect("path follows tree");
            let pos = match level.iter().position(|s| &s.spec_key == step) {
                Some(pos) => pos,
                None => {
                    // keep catalog order among siblings
                    let rank = |k: &str| specs.iter().position(|s| s.key == k).unwrap_or(usize::MAX);
                    let mine = rank(step);
                    let at = level
                        .iter()
                        .position(|s| rank(&s.spec_key) > mine)
                        .unwrap_or(level.len());
                    level.insert(at, Section::empty(step.clone()));
                    at
                }
            };
            specs = &spec.children;
            if step == key {
                return Ok(&mut level[pos]);
            }
            level = &mut level[pos].children;
        }
        unreachable!("spec_path ends at key")
    }

    /// Adds an item to section `key`, enforcing placement rules.
    ///
    /// Does not check project-wide id uniqueness; the store does that.
    pub fn add_item(&mut self, key: &str, item: ContentItem) -> Result<()> {
        validate_id(&item.id)?;
        if !placement_allowed(&self.kind, key, item.kind) {
            return Err(Error::MisplacedItem {
                kind: self.kind.clone(),
                key: key.to_string(),
                item_kind: item.kind.to_string(),
            });
        }
        if self.find_item(&item.id).is_some() {
            return Err(Error::DuplicateId(item.id));
        }
        self.ensure_section(key)?.items.push(item);
        Ok(())
    }

    /// Conformance of the section tree against the kind's spec tree.
    pub fn structure_issues(&self) -> Vec<StructureIssue> {
        let mut issues = Vec::new();
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for s in self.walk_sections() {
            *counts.entry(s.spec_key.as_str()).or_default() += 1;
        }
        if !self.kind.is_free_form() {
            let tree = spec_tree(&self.kind);
            for spec in tree.iter().flat_map(|s| s.walk()) {
                if spec.required && !counts.contains_key(spec.key.as_str()) {
                    issues.push(StructureIssue::MissingSection(spec.key.clone()));
                }
            }
            for key in counts.keys() {
                if find_spec(&tree, key).is_none() {
                    issues.push(StructureIssue::UnknownSection(key.to_string()));
                }
            }
        }
        for (key, count) in &counts {
            if *count > 1 {
                issues.push(StructureIssue::DuplicateSection {
                    key: key.to_string(),
                    count: *count,
                });
            }
        }
        for (key, item) in self.items() {
            if !placement_allowed(&self.kind, key, item.kind) {
                issues.push(StructureIssue::MisplacedItem {
                    key: key.to_string(),
                    item: item.id.clone(),
                    item_kind: item.kind,
                });
            }
        }
        issues
    }

    /// Fails with the first structural problem, if any.
    pub fn check_structure(&self) -> Result<()> {
        match self.structure_issues().into_iter().next() {
            None => Ok(()),
            Some(StructureIssue::MissingSection(key)) => Err(Error::MissingSection {
                artefact: self.id.clone(),
                key,
            }),
            Some(StructureIssue::DuplicateSection { key, count }) => Err(Error::DuplicateSection {
                artefact: self.id.clone(),
                key,
                count,
            }),
            Some(StructureIssue::UnknownSection(key)) => Err(Error::UnknownSection {
                kind: self.kind.clone(),
                key,
            }),
            Some(StructureIssue::MisplacedItem { key, item_kind, .. }) => Err(Error::MisplacedItem {
                kind: self.kind.clone(),
                key,
                item_kind: item_kind.to_string(),
            }),
        }
    }
}

/// Creates an artefact at version 1 with an empty section for every required
/// section of its kind.
pub fn new_artefact(kind: ArtefactKind, name: impl Into<String>, profile: &TailoringProfile) -> Result<Artefact> {
    let tree = required_sections(&kind, profile)?;
    let suffix = uuid::Uuid::new_v4().simple().to_string();
    Ok(Artefact {
        id: format!("{}-{}", kind.code.id_prefix(), &suffix[..12]),
        name: name.into(),
        version: 1,
        sections: tree
            .iter()
            .filter(|s| s.required)
            .map(Section::from_spec)
            .collect(),
        kind,
    })
}

/// Ids and section keys: ASCII letters, digits, `-` and `_`.
pub fn validate_id(id: &str) -> Result<()> {
    let ok = !id.is_empty()
        && id
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_');
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidId(id.to_string()))
    }
}

fn validate_key(key: &str) -> Result<()> {
    validate_id(key)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportArtefactDescriptor {
    pub name: String,
    pub description: String,
    pub builtin: bool,
}

impl SupportArtefactDescriptor {
    pub fn new(name: impl Into<String>, description: impl Into<String>) -> Self {
        SupportArtefactDescriptor {
            name: name.into(),
            description: description.into(),
            builtin: false,
        }
    }
}

pub const USER_EVALUATION_PLAN: &str = "UserEvaluationPlan";
pub const TRAINING_MATERIAL: &str = "TrainingMaterial";
pub const SPL_DELTA_REPORT: &str = "SPLDeltaReport";

fn builtins() -> Vec<SupportArtefactDescriptor> {
    let builtin = |name: &str, description: &str| SupportArtefactDescriptor {
        name: name.into(),
        description: description.into(),
        builtin: true,
    };
    vec![
        builtin(
            USER_EVALUATION_PLAN,
            "Qualitative evaluation of how the released process is actually used.",
        ),
        builtin(
            TRAINING_MATERIAL,
            "Training material for process consumers, per stakeholder group and release.",
        ),
        builtin(
            SPL_DELTA_REPORT,
            "Deviations of the process variant from its process-line base process.",
        ),
    ]
}

/// Registry of support artefacts. Always holds the three built-ins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportRegistry {
    entries: BTreeMap<String, SupportArtefactDescriptor>,
}

impl Default for SupportRegistry {
    fn default() -> Self {
        SupportRegistry {
            entries: builtins().into_iter().map(|d| (d.name.clone(), d)).collect(),
        }
    }
}

impl SupportRegistry {
    pub fn register(&mut self, mut descriptor: SupportArtefactDescriptor) -> Result<()> {
        validate_id(&descriptor.name)?;
        match self.entries.get(&descriptor.name) {
            Some(existing) if existing.builtin => Err(Error::BuiltinOverwrite(descriptor.name)),
            Some(_) => Err(Error::DuplicateName(descriptor.name)),
            None => {
                descriptor.builtin = false;
                self.entries.insert(descriptor.name.clone(), descriptor);
                Ok(())
            }
        }
    }

    pub fn get(&self, name: &str) -> Option<&SupportArtefactDescriptor> {
        self.entries.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &SupportArtefactDescriptor> + '_ {
        self.entries.values()
    }

    /// User-registered descriptors, i.e. everything except the built-ins.
    pub fn extras(&self) -> Vec<SupportArtefactDescriptor> {
        self.entries.values().filter(|d| !d.builtin).cloned().collect()
    }

    pub fn from_extras(extras: impl IntoIterator<Item = SupportArtefactDescriptor>) -> Result<Self> {
        let mut registry = SupportRegistry::default();
        for d in extras {
            registry.register(d)?;
        }
        Ok(registry)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn keys(tree: &[SectionSpec]) -> Vec<&str> {
        tree.iter().map(|s| s.key.as_str()).collect()
    }

    fn all_keys(tree: &[SectionSpec]) -> BTreeSet<String> {
        tree.iter().flat_map(|s| s.walk()).map(|s| s.key.clone()).collect()
    }

    fn merged() -> TailoringProfile {
        TailoringProfile {
            merge_designs: true,
            ..TailoringProfile::default()
        }
    }

    #[test]
    fn prq_has_six_top_level_sections() {
        let tree = spec_tree(&ArtefactKind::PRQ);
        assert_eq!(
            keys(&tree),
            [
                "Goals",
                "StakeholdersAndRoles",
                "Requirements",
                "OverallProcessDraft",
                "TechnicalInfrastructure",
                "BasicConditions"
            ]
        );
    }

    #[test]
    fn pr_is_dynamic() {
        assert!(spec_tree(&ArtefactKind::PR).is_empty());
        let pr = new_artefact(ArtefactKind::PR, "release-1", &TailoringProfile::default()).unwrap();
        assert!(pr.sections.is_empty());
    }

    #[test]
    fn tpd_extends_cpd() {
        let cpd = all_keys(&spec_tree(&ArtefactKind::CPD));
        let tpd = all_keys(&spec_tree(&ArtefactKind::TPD));
        let mut expected = cpd.clone();
        expected.insert(MODEL_ORGANISATION.to_string());
        assert_eq!(tpd, expected);
    }

    #[test]
    fn pd_is_union_with_shared_keys_once() {
        let pd = required_sections(&ArtefactKind::PD, &merged()).unwrap();
        let count = |k: &str| pd.iter().flat_map(|s| s.walk()).filter(|s| s.key == k).count();
        assert_eq!(count(REQUIREMENTS_TRACING), 1);
        assert_eq!(count(MODEL_ORGANISATION), 1);
        let union: BTreeSet<String> = all_keys(&spec_tree(&ArtefactKind::CPD))
            .union(&all_keys(&spec_tree(&ArtefactKind::TPD)))
            .cloned()
            .collect();
        assert_eq!(all_keys(&pd), union);
    }

    #[test]
    fn pd_requires_merge() {
        let err = required_sections(&ArtefactKind::PD, &TailoringProfile::default()).unwrap_err();
        assert!(matches!(err, Error::KindNotPermitted { .. }));
        let err = new_artefact(ArtefactKind::CPD, "c", &merged()).unwrap_err();
        assert!(matches!(err, Error::KindNotPermitted { .. }));
    }

    #[test]
    fn profile_does_not_alter_prq() {
        assert_eq!(
            required_sections(&ArtefactKind::PRQ, &merged()).unwrap(),
            spec_tree(&ArtefactKind::PRQ)
        );
    }

    #[test]
    fn plc_artefact_has_four_empty_sections() {
        let plc = new_artefact(ArtefactKind::PLC, "lifecycle", &TailoringProfile::default()).unwrap();
        assert_eq!(plc.version, 1);
        assert_eq!(plc.sections.len(), 4);
        assert!(plc.sections.iter().all(|s| !s.is_populated()));
        assert!(plc.structure_issues().is_empty());
    }

    #[test]
    fn shared_with_is_symmetric() {
        let catalog = catalog_key_artefacts();
        for (kind, tree) in &catalog {
            for spec in tree.iter().flat_map(|s| s.walk()) {
                for other in &spec.shared_with {
                    let (_, other_tree) = catalog.iter().find(|(k, _)| k.code() == *other).unwrap();
                    let mirror = find_spec(other_tree, &spec.key)
                        .unwrap_or_else(|| panic!("{other} lacks {}", spec.key));
                    assert!(mirror.shared_with.contains(&kind.code()), "{kind}.{} -> {other}", spec.key);
                }
            }
        }
    }

    #[test]
    fn keys_unique_per_kind() {
        for (kind, tree) in catalog_key_artefacts() {
            let flat: Vec<_> = tree.iter().flat_map(|s| s.walk()).map(|s| s.key.clone()).collect();
            let set: BTreeSet<_> = flat.iter().cloned().collect();
            assert_eq!(flat.len(), set.len(), "{kind}");
            for key in &flat {
                validate_id(key).unwrap();
            }
        }
    }

    #[test]
    fn support_kind_round_trips_through_text() {
        let kind: ArtefactKind = "SUPPORT:SPLDeltaReport".parse().unwrap();
        assert_eq!(kind.support_name(), Some(SPL_DELTA_REPORT));
        assert_eq!(kind.to_string(), "SUPPORT:SPLDeltaReport");
        assert!("SUPPORT:".parse::<ArtefactKind>().is_err());
        assert!("XYZ".parse::<ArtefactKind>().is_err());
    }

    #[test]
    fn support_artefact_is_free_form() {
        let kind = ArtefactKind::support(SPL_DELTA_REPORT).unwrap();
        let mut a = new_artefact(kind, "delta", &TailoringProfile::default()).unwrap();
        assert!(a.id.starts_with("sup-"));
        assert!(a.sections.is_empty());
        a.add_item("ChangedAssets", ContentItem::new("N-1", ItemKind::Note, "x"))
            .unwrap();
        assert!(a.structure_issues().is_empty());
    }

    #[test]
    fn registry_protects_builtins() {
        let mut reg = SupportRegistry::default();
        assert_eq!(reg.len(), 3);
        reg.register(SupportArtefactDescriptor::new("TrainingPlan", "plan"))
            .unwrap();
        assert_eq!(reg.len(), 4);
        assert!(matches!(
            reg.register(SupportArtefactDescriptor::new(SPL_DELTA_REPORT, "x")),
            Err(Error::BuiltinOverwrite(_))
        ));
        assert!(matches!(
            reg.register(SupportArtefactDescriptor::new("TrainingPlan", "again")),
            Err(Error::DuplicateName(_))
        ));
    }

    #[test]
    fn registry_reaches_twenty_four() {
        let mut reg = SupportRegistry::default();
        for i in 0..21 {
            reg.register(SupportArtefactDescriptor::new(format!("Support{i}"), ""))
                .unwrap();
        }
        assert_eq!(reg.len(), 24);
        assert_eq!(reg.iter().filter(|d| d.builtin).count(), 3);
    }

    #[test]
    fn optional_section_is_created_in_catalog_position() {
        let mut prq = new_artefact(ArtefactKind::PRQ, "p", &TailoringProfile::default()).unwrap();
        assert!(prq.section(REQUIREMENTS_TRACING).is_none());
        prq.add_item(REQUIREMENTS_TRACING, ContentItem::new("N-1", ItemKind::Note, "t"))
            .unwrap();
        let req = prq.section(REQUIREMENTS).unwrap();
        assert_eq!(req.children[0].spec_key, REQUIREMENTS_TRACING);
        assert!(prq.structure_issues().is_empty());
    }

    #[test]
    fn placement_rules() {
        let profile = TailoringProfile::default();
        let mut cpd = new_artefact(ArtefactKind::CPD, "c", &profile).unwrap();
        assert!(matches!(
            cpd.add_item("Processes", ContentItem::new("REQ-1", ItemKind::Requirement, "r")),
            Err(Error::MisplacedItem { .. })
        ));
        cpd.add_item("Processes", ContentItem::new("DE-1", ItemKind::DesignElement, "d"))
            .unwrap();
        assert!(matches!(
            cpd.add_item("Principles", ContentItem::new("DE-2", ItemKind::DesignElement, "d")),
            Err(Error::MisplacedItem { .. })
        ));
        let mut tpd = new_artefact(ArtefactKind::TPD, "t", &profile).unwrap();
        tpd.add_item(MODEL_ORGANISATION, ContentItem::new("RE-1", ItemKind::RealisationElement, "r"))
            .unwrap();
        assert!(tpd
            .add_item("Processes", ContentItem::new("DE-3", ItemKind::DesignElement, "d"))
            .is_err());
        assert!(cpd
            .add_item("Nope", ContentItem::new("N-1", ItemKind::Note, "n"))
            .is_err());
    }
}
