//! Independent certification: satisfiability, minimal unsatisfiability,
//! literal-wise entailment and proof-trace replay.
//!
//! Everything is re-derived from clause lists. Generator metadata such as the
//! permutation or a theorem's recorded status is never consulted.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;

use crate::generator::{Certification, Premise, ProofTrace, StepKind, Theorem};
use crate::logic::{evaluate_set, Assignment, Clause, ClauseSet, Literal, Var};

/// Largest symbol count decided by exhaustive enumeration.
pub const TRUTH_TABLE_CUTOFF: usize = 16;

/// Hard ceiling for [`solve_truth_table`].
pub const TRUTH_TABLE_MAX: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SatStatus {
    Satisfiable,
    Unsatisfiable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SatMethod {
    TruthTable,
    Dpll,
}

impl fmt::Display for SatMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SatMethod::TruthTable => "truth-table",
            SatMethod::Dpll => "dpll",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatResult {
    pub status: SatStatus,
    /// Total assignment, present iff satisfiable.
    pub witness: Option<Assignment>,
    pub method: SatMethod,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        self.status == SatStatus::Satisfiable
    }

    fn sat(witness: Assignment, method: SatMethod) -> Self {
        SatResult { status: SatStatus::Satisfiable, witness: Some(witness), method }
    }

    fn unsat(method: SatMethod) -> Self {
        SatResult { status: SatStatus::Unsatisfiable, witness: None, method }
    }
}

/// Truth table up to [`TRUTH_TABLE_CUTOFF`] symbols, DPLL beyond.
pub fn is_satisfiable(set: &ClauseSet) -> SatResult {
    if set.num_vars() <= TRUTH_TABLE_CUTOFF {
        solve_truth_table(set).expect("below cutoff")
    } else {
        solve_dpll(set)
    }
}

/// Exhaustive enumeration in increasing bit order; the witness is the first
/// model found. `None` above [`TRUTH_TABLE_MAX`] symbols.
pub fn solve_truth_table(set: &ClauseSet) -> Option<SatResult> {
    let n = set.num_vars();
    if n > TRUTH_TABLE_MAX {
        return None;
    }
    // each clause as (positive mask, negative mask)
    let masks: Vec<(u64, u64)> = set
        .clauses()
        .iter()
        .map(|c| {
            c.literals().iter().fold((0u64, 0u64), |(p, q), l| {
                let bit = 1u64 << l.var().index();
                if l.is_positive() {
                    (p | bit, q)
                } else {
                    (p, q | bit)
                }
            })
        })
        .collect();
    let full = if n == 0 { 0 } else { u64::MAX >> (64 - n) };
    for bits in 0..=full {
        if masks.iter().all(|&(p, q)| bits & p != 0 || !bits & q != 0) {
            return Some(SatResult::sat(Assignment::from_bits(n, bits), SatMethod::TruthTable));
        }
    }
    Some(SatResult::unsat(SatMethod::TruthTable))
}

/// DPLL with unit propagation. Branches on the lowest-indexed unassigned
/// variable of an unsatisfied clause, trying `true` first. Variables left
/// open in a model are set to `false`.
pub fn solve_dpll(set: &ClauseSet) -> SatResult {
    let n = set.num_vars();
    let mut values: Vec<Option<bool>> = vec![None; n];
    if dpll(set.clauses(), &mut values) {
        let witness = Assignment::total(values.into_iter().map(|v| v.unwrap_or(false)).collect());
        debug_assert_eq!(evaluate_set(set, &witness), Ok(true));
        SatResult::sat(witness, SatMethod::Dpll)
    } else {
        SatResult::unsat(SatMethod::Dpll)
    }
}

fn lit_value(values: &[Option<bool>], lit: Literal) -> Option<bool> {
    values[lit.var().index()].map(|v| v == lit.is_positive())
}

enum Propagation {
    Conflict,
    Done { branch: Option<Var> },
}

fn propagate(clauses: &[Clause], values: &mut [Option<bool>]) -> Propagation {
    loop {
        let mut changed = false;
        let mut branch: Option<Var> = None;
        for clause in clauses {
            let mut open = 0usize;
            let mut last = None;
            let mut satisfied = false;
            for &lit in clause.literals() {
                match lit_value(values, lit) {
                    Some(true) => {
                        satisfied = true;
                        break;
                    }
                    Some(false) => {}
                    None => {
                        open += 1;
                        last = Some(lit);
                        branch = Some(branch.map_or(lit.var(), |b: Var| b.min(lit.var())));
                    }
                }
            }
            if satisfied {
                continue;
            }
            match (open, last) {
                (0, _) => return Propagation::Conflict,
                (1, Some(unit)) => {
                    values[unit.var().index()] = Some(unit.is_positive());
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            return Propagation::Done { branch };
        }
    }
}

fn dpll(clauses: &[Clause], values: &mut Vec<Option<bool>>) -> bool {
    match propagate(clauses, values) {
        Propagation::Conflict => false,
        Propagation::Done { branch: None } => true,
        Propagation::Done { branch: Some(var) } => {
            for choice in [true, false] {
                let mut trial = values.clone();
                trial[var.index()] = Some(choice);
                if dpll(clauses, &mut trial) {
                    *values = trial;
                    return true;
                }
            }
            false
        }
    }
}

/// Result of the deletion-based minimality check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MusReport {
    pub is_unsatisfiable: bool,
    pub full: SatResult,
    /// Satisfiability of `S ∖ {C_k}` for each clause position `k`.
    pub deletion_results: Vec<SatResult>,
    pub is_mus: bool,
}

impl MusReport {
    /// 0-based positions whose deletion leaves the set unsatisfiable.
    pub fn redundant_clauses(&self) -> Vec<usize> {
        self.deletion_results
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.is_sat())
            .map(|(k, _)| k)
            .collect()
    }
}

/// One satisfiability call on `S` and one per `S ∖ {C_k}`.
pub fn check_mus(set: &ClauseSet) -> MusReport {
    let full = is_satisfiable(set);
    let deletion_results: Vec<SatResult> = (0..set.len())
        .into_par_iter()
        .map(|k| is_satisfiable(&set.without(k)))
        .collect();
    let is_unsatisfiable = !full.is_sat();
    let is_mus = is_unsatisfiable && deletion_results.iter().all(SatResult::is_sat);
    MusReport { is_unsatisfiable, full, deletion_results, is_mus }
}

/// Outcome of each certification check on one theorem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoremCheck {
    /// Removed index in range and conclusion equal to the negated clause.
    pub conclusion_matches: bool,
    pub source_unsatisfiable: bool,
    pub remainder_satisfiable: bool,
    /// Per conclusion conjunct `l`: is `S ∖ {D_i} ∪ {¬l}` unsatisfiable.
    pub conjuncts_entailed: Vec<bool>,
}

impl TheoremCheck {
    pub fn passed(&self) -> bool {
        self.conclusion_matches
            && self.source_unsatisfiable
            && self.remainder_satisfiable
            && !self.conjuncts_entailed.is_empty()
            && self.conjuncts_entailed.iter().all(|&b| b)
    }
}

pub fn check_theorem_detailed(theorem: &Theorem) -> TheoremCheck {
    let set = theorem.source.clause_set();
    let Some(removed) = theorem.removed_clause() else {
        return TheoremCheck {
            conclusion_matches: false,
            source_unsatisfiable: !is_satisfiable(set).is_sat(),
            remainder_satisfiable: false,
            conjuncts_entailed: Vec::new(),
        };
    };
    let expected: BTreeSet<Literal> = removed.literals().iter().map(|l| l.negate()).collect();
    let claimed: BTreeSet<Literal> = theorem.conclusion.iter().copied().collect();
    let conclusion_matches = claimed.len() == theorem.conclusion.len() && claimed == expected;

    let remainder = theorem.premises();
    let conjuncts_entailed = theorem
        .conclusion
        .par_iter()
        .map(|&l| !is_satisfiable(&remainder.with_clause(Clause::unit(l.negate()))).is_sat())
        .collect();
    TheoremCheck {
        conclusion_matches,
        source_unsatisfiable: !is_satisfiable(set).is_sat(),
        remainder_satisfiable: is_satisfiable(&remainder).is_sat(),
        conjuncts_entailed,
    }
}

/// Returns a copy of the theorem marked verified or failed.
pub fn check_theorem(theorem: &Theorem) -> Theorem {
    let mut out = theorem.clone();
    out.certified = if check_theorem_detailed(theorem).passed() {
        Certification::Verified
    } else {
        Certification::Failed
    };
    out
}

/// Why a trace was rejected, with the offending step (`None` for the goal check).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayError {
    pub step: Option<usize>,
    pub reason: String,
}

impl fmt::Display for ReplayError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.step {
            Some(s) => write!(f, "step {s}: {}", self.reason),
            None => write!(f, "{}", self.reason),
        }
    }
}

impl std::error::Error for ReplayError {}

/// True iff every step of the trace is locally valid against `premises` and
/// every goal conjunct is established outside any open assumption.
pub fn replay_trace(trace: &ProofTrace, premises: &ClauseSet) -> bool {
    replay_trace_detailed(trace, premises).is_ok()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Fact {
    /// Holds given the premises alone.
    Global(Literal),
    /// Holds under the open assumption.
    Hyp(Literal),
    /// Empty clause derived under the open assumption.
    Bottom,
    /// Hypothetical fact from a discharged scope.
    Closed,
}

pub fn replay_trace_detailed(trace: &ProofTrace, premises: &ClauseSet) -> Result<(), ReplayError> {
    let fail = |step: usize, reason: String| Err(ReplayError { step: Some(step), reason });
    let mut facts: Vec<Fact> = Vec::with_capacity(trace.steps.len());
    let mut open: Option<(usize, Literal)> = None;

    for (s, step) in trace.steps.iter().enumerate() {
        if let Some(l) = step.literal {
            if !premises.symbols().contains(l.var()) {
                return fail(s, format!("literal over unknown variable {}", l.var().0));
            }
        }
        let mut clause: Option<&Clause> = None;
        let mut cited: Vec<Fact> = Vec::new();
        for p in &step.premises {
            match *p {
                Premise::Clause(pos) => {
                    let Some(c) = premises.clauses().get(pos) else {
                        return fail(s, format!("cites clause {pos} outside the premise set"));
                    };
                    if clause.replace(c).is_some() {
                        return fail(s, "cites more than one clause".into());
                    }
                }
                Premise::Step(j) => {
                    if j >= s {
                        return fail(s, format!("cites step {j} which is not earlier"));
                    }
                    cited.push(facts[j]);
                }
            }
        }

        let fact = match step.kind {
            StepKind::UnitDerivation | StepKind::Propagation => {
                let Some(lit) = step.literal else {
                    return fail(s, "derivation without a literal".into());
                };
                let Some(c) = clause else {
                    return fail(s, "derivation cites no clause".into());
                };
                let hyp_ok = step.kind == StepKind::Propagation;
                if hyp_ok && open.is_none() {
                    return fail(s, "propagation outside an assumption".into());
                }
                let known = known_literals(&cited, hyp_ok).map_err(|r| ReplayError { step: Some(s), reason: r })?;
                if !c.contains(lit) {
                    return fail(s, "derived literal is not in the cited clause".into());
                }
                if let Some(m) = c.literals().iter().find(|&&m| m != lit && !known.contains(&m.negate())) {
                    return fail(s, format!("clause literal {} is not falsified", m.to_dimacs()));
                }
                if hyp_ok {
                    Fact::Hyp(lit)
                } else {
                    Fact::Global(lit)
                }
            }
            StepKind::Assumption => {
                let Some(lit) = step.literal else {
                    return fail(s, "assumption without a literal".into());
                };
                if !step.premises.is_empty() {
                    return fail(s, "assumption with premises".into());
                }
                if open.is_some() {
                    return fail(s, "nested assumption".into());
                }
                open = Some((s, lit));
                Fact::Hyp(lit)
            }
            StepKind::EmptyClause => {
                if step.literal.is_some() {
                    return fail(s, "empty-clause step carries a literal".into());
                }
                if open.is_none() {
                    return fail(s, "empty clause outside an assumption".into());
                }
                let Some(c) = clause else {
                    return fail(s, "empty-clause step cites no clause".into());
                };
                let known = known_literals(&cited, true).map_err(|r| ReplayError { step: Some(s), reason: r })?;
                if let Some(m) = c.literals().iter().find(|&&m| !known.contains(&m.negate())) {
                    return fail(s, format!("clause literal {} is not falsified", m.to_dimacs()));
                }
                Fact::Bottom
            }
            StepKind::Discharge => {
                let Some(lit) = step.literal else {
                    return fail(s, "discharge without a literal".into());
                };
                let Some((a, assumed)) = open else {
                    return fail(s, "discharge without an open assumption".into());
                };
                let ok_premises = match step.premises.as_slice() {
                    [Premise::Step(x), Premise::Step(e)] => *x == a && facts[*e] == Fact::Bottom,
                    _ => false,
                };
                if !ok_premises {
                    return fail(s, "discharge must cite the assumption and an empty clause".into());
                }
                if lit != assumed.negate() {
                    return fail(s, "discharged literal is not the negated assumption".into());
                }
                for f in facts.iter_mut() {
                    if matches!(f, Fact::Hyp(_) | Fact::Bottom) {
                        *f = Fact::Closed;
                    }
                }
                open = None;
                Fact::Global(lit)
            }
        };
        facts.push(fact);
    }

    if let Some((a, _)) = open {
        return Err(ReplayError { step: Some(a), reason: "assumption never discharged".into() });
    }
    for goal in &trace.goal {
        if !facts.contains(&Fact::Global(*goal)) {
            return Err(ReplayError {
                step: None,
                reason: format!("goal literal {} is not established", goal.to_dimacs()),
            });
        }
    }
    Ok(())
}

fn known_literals(cited: &[Fact], allow_hyp: bool) -> Result<Vec<Literal>, String> {
    cited
        .iter()
        .map(|f| match *f {
            Fact::Global(l) => Ok(l),
            Fact::Hyp(l) if allow_hyp => Ok(l),
            Fact::Hyp(_) => Err("cites a hypothetical step outside propagation".into()),
            Fact::Bottom => Err("cites the empty clause".into()),
            Fact::Closed => Err("cites a step from a discharged assumption".into()),
        })
        .collect()
}

/// Replays a theorem's trace against its own premise set and checks that the
/// trace goal is the theorem's conclusion.
pub fn replay_theorem(theorem: &Theorem) -> Result<(), ReplayError> {
    let goal: BTreeSet<_> = theorem.trace.goal.iter().collect();
    let conclusion: BTreeSet<_> = theorem.conclusion.iter().collect();
    if goal != conclusion {
        return Err(ReplayError { step: None, reason: "trace goal differs from the conclusion".into() });
    }
    replay_trace_detailed(&theorem.trace, &theorem.premises())
}
