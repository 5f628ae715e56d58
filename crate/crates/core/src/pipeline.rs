//! End-to-end pipeline: inputs → FTSC → theorems → certification →
//! explanations → ranking.

use rayon::prelude::*;

use crate::explain::{explain_via_model, rank, ExplainError, Explanation, ExternalModelClient, RankedReport, RankingPolicy, Scenario};
use crate::fol::FolError;
use crate::generator::{build_ftsc_permuted, derive_theorems, Certification, Ftsc, GeneratorError, Theorem};
use crate::logic::Signature;
use crate::verifier::{check_mus, check_theorem, replay_theorem, MusReport};

/// A theorem with the outcome of both independent checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertifiedTheorem {
    /// `certified` is `Verified` only when the semantic check and the trace
    /// replay both pass.
    pub theorem: Theorem,
    pub semantic_check: bool,
    pub replay: Result<(), String>,
}

impl CertifiedTheorem {
    pub fn is_verified(&self) -> bool {
        self.theorem.certified == Certification::Verified
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertifiedInstance {
    /// Ground instance label; empty for propositional input.
    pub label: String,
    pub ftsc: Ftsc,
    pub mus: MusReport,
    pub theorems: Vec<CertifiedTheorem>,
}

impl CertifiedInstance {
    pub fn all_verified(&self) -> bool {
        self.mus.is_mus && self.theorems.iter().all(CertifiedTheorem::is_verified)
    }
}

pub fn certify_theorem(theorem: &Theorem) -> CertifiedTheorem {
    let mut checked = check_theorem(theorem);
    let semantic_check = checked.certified == Certification::Verified;
    let replay = replay_theorem(theorem).map_err(|e| e.to_string());
    if replay.is_err() {
        checked.certified = Certification::Failed;
    }
    CertifiedTheorem { theorem: checked, semantic_check, replay }
}

pub fn certify_ftsc(ftsc: Ftsc, label: impl Into<String>) -> CertifiedInstance {
    let mus = check_mus(ftsc.clause_set());
    let theorems = derive_theorems(&ftsc).par_iter().map(certify_theorem).collect();
    CertifiedInstance { label: label.into(), ftsc, mus, theorems }
}

/// Builds and certifies one FTSC; `None` uses the identity order.
pub fn analyze_signature(signature: &Signature, permutation: Option<&[usize]>) -> Result<CertifiedInstance, GeneratorError> {
    let identity: Vec<usize> = (0..signature.len()).collect();
    let ftsc = build_ftsc_permuted(signature, permutation.unwrap_or(&identity))?;
    Ok(certify_ftsc(ftsc, ""))
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Grounding(#[from] FolError),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Explain(#[from] ExplainError),
}

/// One certified FTSC per ground instance of the scenario. Instances are
/// independent and certified in parallel; output order is grounding order.
pub fn analyze_scenario(scenario: &Scenario, permutation: Option<&[usize]>) -> Result<Vec<CertifiedInstance>, PipelineError> {
    let identity: Vec<usize> = (0..scenario.n()).collect();
    let permutation = permutation.unwrap_or(&identity);
    let instances = scenario.instances()?;
    instances
        .into_par_iter()
        .map(|inst| {
            let label = inst.label();
            let ftsc = build_ftsc_permuted(inst.ftsc.signature(), permutation)?;
            Ok(certify_ftsc(ftsc, label))
        })
        .collect()
}

/// Which theorems to explain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    All,
    /// Only the indices the scenario flags; all of them when it flags none.
    Flagged,
}

/// Explains the verified theorems of every instance. Theorems that failed
/// certification are skipped, so they can never be explained.
pub fn explain_instances(
    scenario: &Scenario,
    instances: &[CertifiedInstance],
    selection: Selection,
    client: Option<&dyn ExternalModelClient>,
) -> Result<Vec<Explanation>, PipelineError> {
    let mut out = Vec::new();
    for inst in instances {
        for ct in &inst.theorems {
            let i = ct.theorem.removed_index;
            let wanted = match selection {
                Selection::All => true,
                Selection::Flagged => scenario.flagged.is_empty() || scenario.flagged.contains(&i),
            };
            if wanted && ct.is_verified() {
                out.push(explain_via_model(&ct.theorem, scenario, &inst.label, client)?);
            }
        }
    }
    Ok(out)
}

/// A scenario run end to end.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub scenario: Scenario,
    pub instances: Vec<CertifiedInstance>,
    pub explanations: Vec<Explanation>,
}

pub fn run_scenario(
    scenario: Scenario,
    permutation: Option<&[usize]>,
    selection: Selection,
    client: Option<&dyn ExternalModelClient>,
) -> Result<ScenarioRun, PipelineError> {
    let instances = analyze_scenario(&scenario, permutation)?;
    let explanations = explain_instances(&scenario, &instances, selection, client)?;
    Ok(ScenarioRun { scenario, instances, explanations })
}

/// Ranks explanations across runs; `None` when there is nothing to rank.
pub fn rank_runs(runs: &[ScenarioRun], policy: &RankingPolicy) -> Option<RankedReport> {
    let all: Vec<Explanation> = runs.iter().flat_map(|r| r.explanations.iter().cloned()).collect();
    rank(&all, policy).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explain::load_scenario;

    #[test]
    fn medical_pipeline_certifies_everything() {
        let sig = Signature::from_names(&["Infection", "HighWBC", "Fever", "RequiresAntibiotics"]).unwrap();
        let inst = analyze_signature(&sig, None).unwrap();
        assert!(inst.all_verified());
        assert_eq!(inst.theorems.len(), 5);
        assert!(inst.theorems.iter().all(|t| t.semantic_check && t.replay.is_ok()));
    }

    #[test]
    fn broken_trace_fails_certification() {
        let sig = Signature::from_names(&["a", "b"]).unwrap();
        let inst = analyze_signature(&sig, None).unwrap();
        let mut t = inst.theorems[0].theorem.clone();
        t.trace.steps.pop();
        let ct = certify_theorem(&t);
        assert!(ct.semantic_check);
        assert!(ct.replay.is_err());
        assert!(!ct.is_verified());
    }

    #[test]
    fn two_patients_give_two_instances() {
        let text = r#"
name = "m"
domain = "Medical"
flagged = [4]
[grounding]
p = ["alice", "bob"]
[[atoms]]
symbol = "Infection"
args = ["p"]
[[atoms]]
symbol = "HighWBC"
args = ["p"]
[[atoms]]
symbol = "Fever"
args = ["p"]
[[atoms]]
symbol = "RequiresAntibiotics"
args = ["p"]
"#;
        let run = run_scenario(load_scenario(text).unwrap(), None, Selection::Flagged, None).unwrap();
        assert_eq!(run.instances.len(), 2);
        assert!(run.instances.iter().all(CertifiedInstance::all_verified));
        let labels: Vec<&str> = run.explanations.iter().map(|e| e.instance.as_str()).collect();
        assert_eq!(labels, ["p=alice", "p=bob"]);
        assert_eq!(run.explanations[1].conflicting_atom, "RequiresAntibiotics(bob)");
    }
}
