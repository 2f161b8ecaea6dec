//! Brute-force reference implementations, written against the raw data
//! (sections, items, link table) without the engine's indexes or helpers.

use std::collections::{BTreeMap, BTreeSet};

use arspi_engine::{Artefact, Finding, ProjectState, Section, Subject, TraceLink};

/// (artefact id, artefact kind code, item id, item kind) for every item.
pub fn all_items(state: &ProjectState) -> Vec<(String, String, String, String)> {
    fn walk(a: &Artefact, s: &Section, out: &mut Vec<(String, String, String, String)>) {
        for i in &s.items {
            out.push((a.id.clone(), a.kind.code().as_str().to_string(), i.id.clone(), i.kind.as_str().to_string()));
        }
        for c in &s.children {
            walk(a, c, out);
        }
    }
    let mut out = Vec::new();
    for a in &state.artefacts {
        for s in &a.sections {
            walk(a, s, &mut out);
        }
    }
    out
}

/// Endpoint class by name: "artefact", an item kind, or None if unresolved.
fn class_of(state: &ProjectState, items: &[(String, String, String, String)], id: &str) -> Option<String> {
    if state.artefacts.iter().any(|a| a.id == id) {
        return Some("artefact".into());
    }
    items.iter().find(|i| i.2 == id).map(|i| i.3.clone())
}

pub const MATRIX: &[(&str, &str, &str)] = &[
    ("requirement", "design_element", "addresses"),
    ("design_element", "realisation_element", "realises"),
    ("design_element", "design_element", "refines"),
    ("artefact", "artefact", "shares"),
    ("artefact", "artefact", "derives_from"),
    ("artefact", "asset", "derives_from"),
    ("requirement", "asset", "derives_from"),
    ("design_element", "asset", "derives_from"),
    ("realisation_element", "asset", "derives_from"),
];

/// Expected (rule id, subject) pairs for the coverage rules and the link
/// rules, by exhaustive scan.
pub fn consistency_oracle(state: &ProjectState) -> BTreeSet<(String, String)> {
    let items = all_items(state);
    let kinds: BTreeSet<&str> = state.artefacts.iter().map(|a| a.kind.code().as_str()).collect();
    let mut out = BTreeSet::new();

    let covered_by = |item: &str, link_kind: &str, target_kind: &str| {
        state.links.iter().any(|l| {
            l.source == item
                && l.kind.as_str() == link_kind
                && class_of(state, &items, &l.target).as_deref() == Some(target_kind)
        })
    };

    if kinds.contains("CPD") || kinds.contains("PD") {
        for (a, kind, item, item_kind) in &items {
            if kind == "PRQ" && item_kind == "requirement" && !covered_by(item, "addresses", "design_element") {
                out.insert(("RequirementNotAddressed".into(), format!("{a}#{item}")));
            }
        }
    }
    let profile = state.profile();
    if kinds.contains("TPD") && !profile.merge_designs && profile.strict_realisation_coverage {
        for (a, _, item, item_kind) in &items {
            if item_kind == "design_element" && !covered_by(item, "realises", "realisation_element") {
                out.insert(("DesignNotRealised".into(), format!("{a}#{item}")));
            }
        }
    }
    for l in &state.links {
        let s = class_of(state, &items, &l.source);
        let t = class_of(state, &items, &l.target);
        if s.is_none() || t.is_none() {
            out.insert(("DanglingEndpoint".into(), format!("link {}", l.id)));
        }
        if let (Some(s), Some(t)) = (s, t) {
            if !MATRIX.contains(&(s.as_str(), t.as_str(), l.kind.as_str())) {
                out.insert(("LinkKindViolation".into(), format!("link {}", l.id)));
            }
        }
    }
    out
}

pub const ORACLE_RULES: [&str; 4] = [
    "RequirementNotAddressed",
    "DesignNotRealised",
    "DanglingEndpoint",
    "LinkKindViolation",
];

/// The engine's findings restricted to the rules the oracle covers.
pub fn engine_pairs(findings: &[Finding]) -> BTreeSet<(String, String)> {
    findings
        .iter()
        .filter(|f| ORACLE_RULES.contains(&f.rule_id.as_str()))
        .map(|f| {
            let subject = match &f.subject {
                Subject::Item { artefact, item } => format!("{artefact}#{item}"),
                other => other.to_string(),
            };
            (f.rule_id.clone(), subject)
        })
        .collect()
}

/// Nodes with a path of length ≥ 1 to some start node over `links`
/// (transitive closure by Floyd–Warshall), and the links whose target is a
/// start node or such a node.
pub fn reverse_reachability(links: &[&TraceLink], start: &BTreeSet<String>) -> (BTreeSet<String>, BTreeSet<String>) {
    let mut nodes: BTreeSet<&str> = start.iter().map(String::as_str).collect();
    for l in links {
        nodes.insert(&l.source);
        nodes.insert(&l.target);
    }
    let nodes: Vec<&str> = nodes.into_iter().collect();
    let index: BTreeMap<&str, usize> = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let n = nodes.len();
    let mut reach = vec![vec![false; n]; n];
    for l in links {
        reach[index[l.source.as_str()]][index[l.target.as_str()]] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    let affected: BTreeSet<String> = (0..n)
        .filter(|&i| start.iter().any(|s| reach[i][index[s.as_str()]]))
        .map(|i| nodes[i].to_string())
        .collect();
    let edges = links
        .iter()
        .filter(|l| start.contains(&l.target) || affected.contains(&l.target))
        .map(|l| l.id.clone())
        .collect();
    (affected, edges)
}

/// Multiset of (kind, text) over all items outside RequirementsTracing.
pub fn content_census<'a>(artefacts: impl IntoIterator<Item = &'a Artefact>) -> BTreeMap<(String, String), usize> {
    let mut census = BTreeMap::new();
    for a in artefacts {
        for (key, item) in a.items() {
            if key != "RequirementsTracing" {
                *census.entry((item.kind.as_str().to_string(), item.text.clone())).or_default() += 1;
            }
        }
    }
    census
}

/// What a merged PD must contain: every CPD item and every TPD item except
/// those in a shared section whose (kind, text) the CPD's section already has.
pub fn expected_merge_census(cpd: &Artefact, tpd: &Artefact) -> BTreeMap<(String, String), usize> {
    let mut census = content_census([cpd]);
    for (key, item) in tpd.items() {
        if key == "RequirementsTracing" {
            continue;
        }
        let shared = key == "Goals";
        let twin = cpd
            .items()
            .any(|(k, c)| k == key && c.kind == item.kind && c.text == item.text);
        if !(shared && twin) {
            *census.entry((item.kind.as_str().to_string(), item.text.clone())).or_default() += 1;
        }
    }
    census
}
