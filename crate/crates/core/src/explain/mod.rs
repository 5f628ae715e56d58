//! Domain explanations for certified theorems and their prioritization.
//!
//! The template verbalizer is deterministic: the same theorem and scenario
//! always give the same explanation. The optional external model only ever
//! replaces the prose, never the certification.

mod model;
mod scenario;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generator::{Certification, Theorem};
use crate::logic::Literal;

pub use model::{
    build_request,
    explain_via_model, ExternalModelClient, FixtureClient, HttpModelClient, ModelError, ModelRequest,
    ModelResponse, PROMPT_TEMPLATE, PROMPT_VERSION,
};
pub use scenario::{load_scenario, load_scenario_file, RemediationRule, Scenario, ScenarioAtom, ScenarioError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExplainError {
    #[error("theorem {0} is not certified; only verified theorems are explained")]
    UncertifiedTheorem(String),
    #[error("scenario `{scenario}` binds {expected} atoms but the theorem has {found}")]
    ArityMismatch { scenario: String, expected: usize, found: usize },
    #[error("nothing to rank")]
    EmptyInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Priority {
    Low,
    Medium,
    High,
}

impl Priority {
    fn band(self) -> f64 {
        match self {
            Priority::Low => 0.0,
            Priority::Medium => 1.0,
            Priority::High => 2.0,
        }
    }

    /// Band a score in `[0, 1]` falls into.
    pub fn from_score(score: f64) -> Self {
        if score >= 2.0 / 3.0 {
            Priority::High
        } else if score >= 1.0 / 3.0 {
            Priority::Medium
        } else {
            Priority::Low
        }
    }
}

impl fmt::Display for Priority {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Priority::Low => "Low",
            Priority::Medium => "Medium",
            Priority::High => "High",
        })
    }
}

/// Structural role of `D_i` within its FTSC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RoleLabel {
    #[serde(rename = "base-overconstraint")]
    BaseOverconstraint,
    #[serde(rename = "local-conditional")]
    LocalConditional,
    #[serde(rename = "intermediate-causal")]
    IntermediateCausal,
    #[serde(rename = "generic-chain")]
    GenericChain,
    #[serde(rename = "treatment/terminal")]
    TreatmentTerminal,
    #[serde(rename = "global-unsat")]
    GlobalUnsat,
}

impl RoleLabel {
    /// `D_1` is the base fact, `D_{n+1}` the global constraint, `D_2` the first
    /// conditional, `D_n` (for `n ≥ 3`) the terminal rule and `D_3` the
    /// intermediate link; longer chains label the rest generically.
    pub fn for_index(index: usize, n: usize) -> Self {
        if index == n + 1 {
            RoleLabel::GlobalUnsat
        } else if index == 1 {
            RoleLabel::BaseOverconstraint
        } else if index == 2 {
            RoleLabel::LocalConditional
        } else if index == n {
            RoleLabel::TreatmentTerminal
        } else if index == 3 {
            RoleLabel::IntermediateCausal
        } else {
            RoleLabel::GenericChain
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RoleLabel::BaseOverconstraint => "base-overconstraint",
            RoleLabel::LocalConditional => "local-conditional",
            RoleLabel::IntermediateCausal => "intermediate-causal",
            RoleLabel::GenericChain => "generic-chain",
            RoleLabel::TreatmentTerminal => "treatment/terminal",
            RoleLabel::GlobalUnsat => "global-unsat",
        }
    }
}

impl fmt::Display for RoleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Template,
    ExternalModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrioritySource {
    Declared,
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TheoremRef {
    pub permutation_rank: u128,
    pub removed_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub scenario: String,
    pub scenario_order: u32,
    pub domain: String,
    /// Ground instance label; empty for propositional scenarios.
    pub instance: String,
    pub theorem_ref: TheoremRef,
    pub statement: String,
    pub role_label: RoleLabel,
    /// Ground name of the literal the removed clause is about.
    pub conflicting_atom: String,
    pub narrative: String,
    pub remediation: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formal_annotation: Option<String>,
    pub priority: Priority,
    pub priority_source: PrioritySource,
    pub flagged: bool,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

/// Priority used when the scenario declares none at all: the global
/// constraint is Medium, the first conditional High, everything else Low.
/// A scenario that declares any priority gets Low for the rest.
pub fn heuristic_priority(index: usize, n: usize, scenario_declares_any: bool) -> Priority {
    if scenario_declares_any {
        Priority::Low
    } else if index == n + 1 {
        Priority::Medium
    } else if index == 2 {
        Priority::High
    } else {
        Priority::Low
    }
}

fn join_and(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {}", init.join(", "), last),
    }
}

struct Names<'a> {
    theorem: &'a Theorem,
    scenario: &'a Scenario,
}

impl Names<'_> {
    fn name(&self, lit: Literal) -> String {
        self.theorem.source.symbols().name(lit.var()).to_string()
    }

    fn glossed(&self, lit: Literal) -> String {
        let name = self.theorem.source.symbols().literal_name(lit);
        match self.scenario.gloss(lit.var().index()) {
            Some(g) => format!("{name} ({g})"),
            None => name,
        }
    }

    fn chain(&self, range: std::ops::Range<usize>) -> Vec<String> {
        self.theorem.source.chain()[range].iter().map(|&l| self.theorem.source.symbols().literal_name(l)).collect()
    }
}

fn role_sentence(role: RoleLabel, names: &Names<'_>, i: usize, n: usize) -> String {
    let all = join_and(&names.chain(0..n));
    if i == n + 1 {
        return format!(
            "The global constraint forbids {all} from holding together, while the remaining rules force every one of them."
        );
    }
    let head = names.theorem.source.symbols().literal_name(names.theorem.source.chain()[i - 1]);
    let prereqs = join_and(&names.chain(0..i - 1));
    match role {
        RoleLabel::BaseOverconstraint => format!(
            "{head} is asserted unconditionally, yet the downstream rules and the global constraint leave no room for it; the base predicate is overconstrained."
        ),
        RoleLabel::LocalConditional => format!(
            "The conditional rule deriving {head} from {prereqs} cannot hold alongside the rest of the chain; {head} is the conflicting predicate at the first dependency."
        ),
        RoleLabel::IntermediateCausal => format!(
            "The rule deriving {head} from {prereqs} is a causal link the rest of the chain refutes; {head} is the conflicting intermediate predicate."
        ),
        RoleLabel::TreatmentTerminal => format!(
            "The terminal rule concluding {head} from {prereqs} clashes with the constraint that not every upstream condition may hold; {head} is the conflicting outcome."
        ),
        _ => format!(
            "The dependency deriving {head} from {prereqs} is refuted by the surrounding chain; {head} is the conflicting link."
        ),
    }
}

fn generic_remediation(role: RoleLabel, names: &Names<'_>, i: usize, n: usize) -> String {
    let chain = names.theorem.source.chain();
    match role {
        RoleLabel::GlobalUnsat => format!(
            "Relax one upstream dependency or add a contextual qualifier so that {} need not all hold at once.",
            join_and(&names.chain(0..n))
        ),
        RoleLabel::BaseOverconstraint => {
            format!("Require explicit evidence before asserting {} unconditionally.", names.name(chain[0]))
        }
        _ => format!(
            "Qualify the rule concluding {} with additional conditions or exceptions.",
            names.name(chain[i - 1])
        ),
    }
}

/// Deterministic template explanation of a verified theorem.
pub fn verbalize(theorem: &Theorem, scenario: &Scenario) -> Result<Explanation, ExplainError> {
    verbalize_instance(theorem, scenario, "")
}

/// [`verbalize`] for one ground instance of a first-order scenario.
pub fn verbalize_instance(theorem: &Theorem, scenario: &Scenario, instance: &str) -> Result<Explanation, ExplainError> {
    if theorem.certified != Certification::Verified {
        return Err(ExplainError::UncertifiedTheorem(theorem.statement()));
    }
    let n = theorem.n();
    if scenario.n() != n {
        return Err(ExplainError::ArityMismatch { scenario: scenario.name.clone(), expected: scenario.n(), found: n });
    }
    let i = theorem.removed_index;
    let role = RoleLabel::for_index(i, n);
    let names = Names { theorem, scenario };
    let chain = theorem.source.chain();

    let conflicting_atom = if i <= n {
        names.name(chain[i - 1])
    } else {
        names.chain(0..n).join(" ∧ ")
    };

    let forced: Vec<String> = theorem.conclusion.iter().filter(|l| chain.contains(l)).map(|&l| names.glossed(l)).collect();
    let excluded: Vec<String> = theorem.conclusion.iter().filter(|l| !chain.contains(l)).map(|&l| names.glossed(l.negate())).collect();
    let mut consequence = String::from("Without it the remaining clauses are satisfiable, yet they refute it");
    if !forced.is_empty() {
        consequence.push_str(&format!(": they force {}", join_and(&forced)));
    }
    if !excluded.is_empty() {
        consequence.push_str(if forced.is_empty() { ": they rule out " } else { " and rule out " });
        consequence.push_str(&join_and(&excluded));
    }
    consequence.push('.');

    let mut narrative = format!("{} [{}] in scenario {} ({}", theorem.statement(), role, scenario.name, scenario.domain_label);
    if !instance.is_empty() {
        narrative.push_str(&format!(", {instance}"));
    }
    narrative.push_str(").\n");
    narrative.push_str(&format!("Removed clause: D{i} = {}.\n", theorem.source.display_clause(i)));
    if let Some(rule) = scenario.rule_texts.get(&i) {
        narrative.push_str(&format!("Rule: \"{rule}\"\n"));
    }
    narrative.push_str(&role_sentence(role, &names, i, n));
    narrative.push('\n');
    narrative.push_str(&consequence);
    narrative.push('\n');
    narrative.push_str(&format!("Derivation: {}.", theorem.trace_summary()));

    let declared = scenario.remediation_for(i);
    let remediation = declared
        .map(|r| r.suggestion_text.clone())
        .unwrap_or_else(|| generic_remediation(role, &names, i, n));
    let (priority, priority_source) = match scenario.priorities.get(&i) {
        Some(&p) => (p, PrioritySource::Declared),
        None => (heuristic_priority(i, n, !scenario.priorities.is_empty()), PrioritySource::Heuristic),
    };

    Ok(Explanation {
        scenario: scenario.name.clone(),
        scenario_order: scenario.order,
        domain: scenario.domain_label.clone(),
        instance: instance.to_string(),
        theorem_ref: TheoremRef { permutation_rank: theorem.source.rank(), removed_index: i },
        statement: theorem.statement(),
        role_label: role,
        conflicting_atom,
        narrative,
        remediation,
        formal_annotation: declared.and_then(|r| r.formal_annotation.clone()),
        priority,
        priority_source,
        flagged: scenario.flagged.contains(&i),
        provenance: Provenance::Template,
        model_score: None,
        diagnostics: Vec::new(),
    })
}

/// How [`rank`] scores explanations.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum RankingPolicy {
    /// Priority band plus a per-index weight in `[0, 1]` (default 0.5).
    #[default]
    Default,
    Weighted(BTreeMap<usize, f64>),
    /// Uses the external model's score where present, clamped to `[0, 1]`,
    /// and derives the priority from it. Explanations without one fall back
    /// to the default policy.
    ModelScores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub position: usize,
    pub priority: Priority,
    pub score: f64,
    pub explanation: Explanation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedReport {
    pub entries: Vec<RankedEntry>,
}

fn default_score(priority: Priority, weight: f64) -> f64 {
    (priority.band() + weight.clamp(0.0, 1.0)) / 3.0
}

/// Orders explanations by priority, then score, then scenario order, name,
/// instance, permutation rank and clause index, so ties are deterministic.
pub fn rank(explanations: &[Explanation], policy: &RankingPolicy) -> Result<RankedReport, ExplainError> {
    if explanations.is_empty() {
        return Err(ExplainError::EmptyInput);
    }
    let mut entries: Vec<RankedEntry> = explanations
        .iter()
        .map(|e| {
            let i = e.theorem_ref.removed_index;
            let (priority, score) = match (policy, e.model_score) {
                (RankingPolicy::ModelScores, Some(s)) => {
                    let s = if s.is_nan() { 0.0 } else { s.clamp(0.0, 1.0) };
                    (Priority::from_score(s), s)
                }
                (RankingPolicy::Weighted(w), _) => (e.priority, default_score(e.priority, *w.get(&i).unwrap_or(&0.5))),
                _ => (e.priority, default_score(e.priority, 0.5)),
            };
            RankedEntry { position: 0, priority, score, explanation: e.clone() }
        })
        .collect();
    entries.sort_by(|a, b| {
        b.priority
            .cmp(&a.priority)
            .then_with(|| b.score.total_cmp(&a.score))
            .then_with(|| tie_break(&a.explanation, &b.explanation))
    });
    for (k, e) in entries.iter_mut().enumerate() {
        e.position = k + 1;
    }
    Ok(RankedReport { entries })
}

fn tie_break(a: &Explanation, b: &Explanation) -> Ordering {
    a.scenario_order
        .cmp(&b.scenario_order)
        .then_with(|| a.scenario.cmp(&b.scenario))
        .then_with(|| a.instance.cmp(&b.instance))
        .then_with(|| a.theorem_ref.cmp(&b.theorem_ref))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{build_ftsc, derive_theorems};
    use crate::logic::Signature;
    use crate::verifier::check_theorem;

    const MEDICAL: &str = r#"
name = "medical"
domain = "Medical diagnosis"
[[atoms]]
symbol = "Infection"
gloss = "the patient has an infection"
[[atoms]]
symbol = "HighWBC"
gloss = "white blood cell count is elevated"
[[atoms]]
symbol = "Fever"
[[atoms]]
symbol = "RequiresAntibiotics"
[[remediations]]
index = 4
text = "Add qualifying criteria before automatic antibiotic recommendation."
"#;

    fn certified() -> Vec<Theorem> {
        let sig = Signature::from_names(&["Infection", "HighWBC", "Fever", "RequiresAntibiotics"]).unwrap();
        derive_theorems(&build_ftsc(&sig)).iter().map(check_theorem).collect()
    }

    #[test]
    fn roles_for_small_and_long_chains() {
        let four: Vec<RoleLabel> = (1..=5).map(|i| RoleLabel::for_index(i, 4)).collect();
        assert_eq!(
            four,
            [
                RoleLabel::BaseOverconstraint,
                RoleLabel::LocalConditional,
                RoleLabel::IntermediateCausal,
                RoleLabel::TreatmentTerminal,
                RoleLabel::GlobalUnsat
            ]
        );
        assert_eq!(RoleLabel::for_index(2, 2), RoleLabel::LocalConditional);
        assert_eq!(RoleLabel::for_index(1, 1), RoleLabel::BaseOverconstraint);
        assert_eq!(RoleLabel::for_index(2, 1), RoleLabel::GlobalUnsat);
        assert_eq!(RoleLabel::for_index(4, 6), RoleLabel::GenericChain);
        assert_eq!(RoleLabel::for_index(6, 6), RoleLabel::TreatmentTerminal);
    }

    #[test]
    fn verbalizes_terminal_rule() {
        let s = load_scenario(MEDICAL).unwrap();
        let e = verbalize(&certified()[3], &s).unwrap();
        assert_eq!(e.role_label, RoleLabel::TreatmentTerminal);
        assert_eq!(e.conflicting_atom, "RequiresAntibiotics");
        assert!(e.narrative.contains("D4 = (RequiresAntibiotics ∨ ¬Infection ∨ ¬HighWBC ∨ ¬Fever)"));
        assert!(e.narrative.contains("Infection (the patient has an infection)"));
        assert!(e.narrative.contains("rule out RequiresAntibiotics"));
        assert!(e.remediation.to_lowercase().contains("add qualifying criteria before automatic antibiotic recommendation"));
        assert_eq!(e.provenance, Provenance::Template);
        assert_eq!(verbalize(&certified()[3], &s).unwrap(), e);
    }

    #[test]
    fn falls_back_to_generic_remediation() {
        let s = load_scenario(MEDICAL).unwrap();
        let e = verbalize(&certified()[4], &s).unwrap();
        assert_eq!(e.role_label, RoleLabel::GlobalUnsat);
        assert!(e.remediation.starts_with("Relax one upstream dependency"));
        assert_eq!(e.priority, Priority::Medium);
        assert_eq!(e.priority_source, PrioritySource::Heuristic);
    }

    #[test]
    fn refuses_unverified_and_mismatched() {
        let s = load_scenario(MEDICAL).unwrap();
        let sig = Signature::from_names(&["A", "B", "C", "D"]).unwrap();
        let raw = derive_theorems(&build_ftsc(&sig));
        assert!(matches!(verbalize(&raw[0], &s), Err(ExplainError::UncertifiedTheorem(_))));
        let three = Signature::from_names(&["A", "B", "C"]).unwrap();
        let t = check_theorem(&derive_theorems(&build_ftsc(&three))[0]);
        assert!(matches!(verbalize(&t, &s), Err(ExplainError::ArityMismatch { expected: 4, found: 3, .. })));
    }

    #[test]
    fn ranking_orders_and_breaks_ties() {
        let s = load_scenario(MEDICAL).unwrap();
        let ex: Vec<Explanation> = certified().iter().map(|t| verbalize(t, &s).unwrap()).collect();
        assert_eq!(rank(&[], &RankingPolicy::Default), Err(ExplainError::EmptyInput));
        let r = rank(&ex, &RankingPolicy::Default).unwrap();
        let order: Vec<usize> = r.entries.iter().map(|e| e.explanation.theorem_ref.removed_index).collect();
        assert_eq!(order, [2, 5, 1, 3, 4]);
        let mut reversed = ex.clone();
        reversed.reverse();
        assert_eq!(rank(&reversed, &RankingPolicy::Default).unwrap(), r);
    }

    #[test]
    fn model_scores_are_clamped() {
        let s = load_scenario(MEDICAL).unwrap();
        let mut ex: Vec<Explanation> = certified().iter().map(|t| verbalize(t, &s).unwrap()).collect();
        ex[0].model_score = Some(7.0);
        ex[1].model_score = Some(-3.0);
        let r = rank(&ex, &RankingPolicy::ModelScores).unwrap();
        assert_eq!(r.entries[0].explanation.theorem_ref.removed_index, 1);
        assert_eq!(r.entries[0].score, 1.0);
        let low = r.entries.iter().find(|e| e.explanation.theorem_ref.removed_index == 2).unwrap();
        assert_eq!((low.score, low.priority), (0.0, Priority::Low));
    }
}
