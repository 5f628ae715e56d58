//! Scenario files: a TOML document binding abstract literals to domain
//! meanings, rule sentences, remediations and priorities.
//!
//! ```toml
//! name = "healthcare-data-sharing"
//! domain = "Healthcare"
//! order = 4
//! flagged = [3]
//!
//! [grounding]
//! h = ["mercy"]
//! p = ["alice"]
//!
//! [[atoms]]
//! symbol = "HoldsData"
//! args = ["h", "p"]
//! gloss = "the hospital holds the patient's data"
//!
//! [[rules]]
//! index = 3
//! text = "If data are held and shared, consent must exist."
//!
//! [[remediations]]
//! index = 3
//! text = "Require explicit consent or anonymization before sharing."
//! formal = "optional formula text, never evaluated"
//!
//! [[priorities]]
//! index = 3
//! level = "High"
//! ```
//!
//! An argument named in `[grounding]` is a variable; any other argument is a
//! constant.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Priority;
use crate::fol::{build_fol_ftsc, FolError, FolInstance, GroundingDomain, PredicateAtom, Term};
use crate::logic::Polarity;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse { line: Option<usize>, message: String },
    #[error("schema violation in `{field}`: {message}")]
    SchemaViolation { field: String, message: String },
    #[error("validation failed: {0}")]
    Validation(#[from] FolError),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn violation(field: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::SchemaViolation { field: field.into(), message: message.into() }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    domain: String,
    #[serde(default)]
    order: u32,
    #[serde(default)]
    description: Option<String>,
    #[serde(default)]
    flagged: Vec<usize>,
    #[serde(default)]
    grounding: BTreeMap<String, Vec<String>>,
    atoms: Vec<AtomEntry>,
    #[serde(default)]
    rules: Vec<RuleEntry>,
    #[serde(default)]
    remediations: Vec<RemediationEntry>,
    #[serde(default)]
    priorities: Vec<PriorityEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomEntry {
    symbol: String,
    #[serde(default)]
    arity: Option<usize>,
    #[serde(default)]
    args: Vec<String>,
    #[serde(default)]
    gloss: Option<String>,
    #[serde(default)]
    polarity: Option<Polarity>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleEntry {
    index: usize,
    text: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RemediationEntry {
    index: usize,
    text: String,
    #[serde(default)]
    formal: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PriorityEntry {
    index: usize,
    level: Priority,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioAtom {
    pub atom: PredicateAtom,
    pub gloss: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemediationRule {
    pub clause_index: usize,
    pub suggestion_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formal_annotation: Option<String>,
}

/// A validated domain binding for one predicate list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub name: String,
    pub domain_label: String,
    /// Position among sibling scenarios, used to break ranking ties.
    pub order: u32,
    pub description: Option<String>,
    pub atoms: Vec<ScenarioAtom>,
    pub grounding: GroundingDomain,
    pub rule_texts: BTreeMap<usize, String>,
    pub remediation_rules: Vec<RemediationRule>,
    pub priorities: BTreeMap<usize, Priority>,
    /// Clause indices the scenario singles out for review.
    pub flagged: Vec<usize>,
}

impl Scenario {
    pub fn n(&self) -> usize {
        self.atoms.len()
    }

    pub fn predicate_atoms(&self) -> Vec<PredicateAtom> {
        self.atoms.iter().map(|a| a.atom.clone()).collect()
    }

    /// One FTSC per ground instance, over the atoms in declaration order.
    pub fn instances(&self) -> Result<Vec<FolInstance>, FolError> {
        build_fol_ftsc(&self.predicate_atoms(), &self.grounding)
    }

    pub fn remediation_for(&self, index: usize) -> Option<&RemediationRule> {
        self.remediation_rules.iter().find(|r| r.clause_index == index)
    }

    pub fn gloss(&self, atom: usize) -> Option<&str> {
        self.atoms.get(atom).and_then(|a| a.gloss.as_deref())
    }

    pub fn is_first_order(&self) -> bool {
        self.atoms.iter().any(|a| a.atom.arity() > 0)
    }
}

pub fn load_scenario_file(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| ScenarioError::Io { path: path.display().to_string(), source })?;
    load_scenario(&text)
}

/// Parses and validates a scenario document.
pub fn load_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| ScenarioError::Parse {
        line: e.span().map(|s| text[..s.start.min(text.len())].lines().count().max(1)),
        message: e.message().to_string(),
    })?;

    if file.name.trim().is_empty() {
        return Err(violation("name", "must not be empty"));
    }
    if file.atoms.is_empty() {
        return Err(violation("atoms", "at least one atom is required"));
    }
    let mut grounding = GroundingDomain::new();
    for (var, values) in &file.grounding {
        grounding.insert(var.clone(), values.clone());
    }

    let mut atoms = Vec::with_capacity(file.atoms.len());
    for (k, a) in file.atoms.iter().enumerate() {
        if a.symbol.trim().is_empty() {
            return Err(violation(format!("atoms[{k}].symbol"), "must not be empty"));
        }
        if a.symbol.contains(|c: char| c == '(' || c == ')' || c == ',' || c.is_whitespace()) {
            return Err(violation(format!("atoms[{k}].symbol"), "must be a bare predicate name"));
        }
        let args = a
            .args
            .iter()
            .map(|name| {
                if grounding.is_variable(name) {
                    Term::Variable(name.clone())
                } else {
                    Term::Constant(name.clone())
                }
            })
            .collect();
        let mut atom = PredicateAtom::new(a.symbol.clone(), a.arity.unwrap_or(a.args.len()), args)?;
        atom.polarity = a.polarity.unwrap_or(Polarity::Positive);
        atoms.push(ScenarioAtom { atom, gloss: a.gloss.clone() });
    }

    let max = atoms.len() + 1;
    let in_range = |field: &str, index: usize| {
        if (1..=max).contains(&index) {
            Ok(())
        } else {
            Err(violation(field, format!("index {index} is outside 1..={max}")))
        }
    };

    let mut rule_texts = BTreeMap::new();
    for r in &file.rules {
        in_range("rules.index", r.index)?;
        if rule_texts.insert(r.index, r.text.clone()).is_some() {
            return Err(violation("rules.index", format!("index {} repeats", r.index)));
        }
    }
    let mut remediation_rules: Vec<RemediationRule> = Vec::new();
    for r in &file.remediations {
        in_range("remediations.index", r.index)?;
        if r.text.trim().is_empty() {
            return Err(violation("remediations.text", "must not be empty"));
        }
        if remediation_rules.iter().any(|x| x.clause_index == r.index) {
            return Err(violation("remediations.index", format!("index {} repeats", r.index)));
        }
        remediation_rules.push(RemediationRule {
            clause_index: r.index,
            suggestion_text: r.text.clone(),
            formal_annotation: r.formal.clone(),
        });
    }
    let mut priorities = BTreeMap::new();
    for p in &file.priorities {
        in_range("priorities.index", p.index)?;
        if priorities.insert(p.index, p.level).is_some() {
            return Err(violation("priorities.index", format!("index {} repeats", p.index)));
        }
    }
    for &f in &file.flagged {
        in_range("flagged", f)?;
    }

    let scenario = Scenario {
        name: file.name,
        domain_label: file.domain,
        order: file.order,
        description: file.description,
        atoms,
        grounding,
        rule_texts,
        remediation_rules,
        priorities,
        flagged: file.flagged,
    };
    scenario.instances()?;
    Ok(scenario)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::LogicError;

    const HEALTH: &str = r#"
name = "hc"
domain = "Healthcare"

[grounding]
h = ["mercy"]
r = ["lab"]
p = ["alice"]
t = ["t0"]

[[atoms]]
symbol = "HoldsData"
args = ["h", "p"]
[[atoms]]
symbol = "SharesData"
args = ["h", "r", "p"]
[[atoms]]
symbol = "HasConsent"
args = ["p"]
[[atoms]]
symbol = "Encrypts"
args = ["h", "p"]
[[atoms]]
symbol = "Retains"
args = ["h", "p", "t"]

[[remediations]]
index = 3
text = "Require explicit consent or anonymization before sharing."
"#;

    #[test]
    fn loads_first_order_scenario() {
        let s = load_scenario(HEALTH).unwrap();
        assert_eq!(s.n(), 5);
        assert!(s.is_first_order());
        let inst = s.instances().unwrap();
        assert_eq!(inst.len(), 1);
        assert_eq!(inst[0].ftsc.symbols().name(crate::logic::Var(4)), "Retains(mercy,alice,t0)");
        assert_eq!(s.remediation_for(3).unwrap().suggestion_text, "Require explicit consent or anonymization before sharing.");
    }

    #[test]
    fn duplicate_atom_is_a_validation_error() {
        let text = "name = \"d\"\ndomain = \"x\"\n[[atoms]]\nsymbol = \"A\"\n[[atoms]]\nsymbol = \"A\"\n";
        match load_scenario(text) {
            Err(ScenarioError::Validation(FolError::Validation(LogicError::DuplicateSymbol(s)))) => assert_eq!(s, "A"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_lines() {
        let text = "name = \"d\"\ndomain = \"x\"\n[[atoms]]\nsymbol = \n";
        match load_scenario(text) {
            Err(ScenarioError::Parse { line, .. }) => assert_eq!(line, Some(4)),
            other => panic!("unexpected {other:?}"),
        }
        let unknown = "name = \"d\"\ndomain = \"x\"\ncolour = 1\n[[atoms]]\nsymbol = \"A\"\n";
        assert!(matches!(load_scenario(unknown), Err(ScenarioError::Parse { .. })));
    }

    #[test]
    fn schema_violations() {
        let base = "name = \"d\"\ndomain = \"x\"\n[[atoms]]\nsymbol = \"A\"\n";
        let out_of_range = format!("{base}[[remediations]]\nindex = 3\ntext = \"t\"\n");
        assert!(matches!(load_scenario(&out_of_range), Err(ScenarioError::SchemaViolation { .. })));
        let empty_text = format!("{base}[[remediations]]\nindex = 1\ntext = \" \"\n");
        assert!(matches!(load_scenario(&empty_text), Err(ScenarioError::SchemaViolation { .. })));
        let no_atoms = "name = \"d\"\ndomain = \"x\"\natoms = []\n";
        assert!(matches!(load_scenario(no_atoms), Err(ScenarioError::SchemaViolation { .. })));
        let arity = "name = \"d\"\ndomain = \"x\"\n[[atoms]]\nsymbol = \"A\"\narity = 2\nargs = [\"a\"]\n";
        assert!(matches!(
            load_scenario(arity),
            Err(ScenarioError::Validation(FolError::ArityMismatch { .. }))
        ));
        let unbound_is_constant = "name = \"d\"\ndomain = \"x\"\n[[atoms]]\nsymbol = \"A\"\nargs = [\"c\"]\n";
        assert_eq!(load_scenario(unbound_is_constant).unwrap().instances().unwrap().len(), 1);
    }
}
