//! JSON report: the canonical, self-contained record of one run.
//!
//! Clauses and literals are stored by symbol name so a report can be
//! re-verified from scratch without trusting any recorded status.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::explain::{Explanation, Priority, RankedReport};
use crate::generator::{Certification, Ftsc, Premise, ProofTrace, StepKind, Theorem, TraceStep};
use crate::logic::{Clause, ClauseSet, Literal, Symbol, SymbolTable};
use crate::pipeline::{CertifiedInstance, CertifiedTheorem};
use crate::verifier::{check_mus, check_theorem_detailed, replay_theorem};

pub const SCHEMA_VERSION: &str = "1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("invalid report JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema version `{0}`")]
    SchemaVersion(String),
    #[error("instance {instance}: {message}")]
    Malformed { instance: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: String,
    pub metadata: Metadata,
    pub instances: Vec<InstanceRecord>,
    #[serde(default)]
    pub explanations: Vec<Explanation>,
    #[serde(default)]
    pub ranking: Vec<RankingRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool_version: String,
    /// RFC 3339; taken from `SOURCE_DATE_EPOCH` when set.
    pub timestamp: String,
    pub command: String,
    #[serde(default)]
    pub scenario: Option<String>,
    /// Set when every instance has the same `n`.
    #[serde(default)]
    pub n: Option<usize>,
    /// Set when every instance uses the same permutation.
    #[serde(default)]
    pub permutation: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceRecord {
    #[serde(default)]
    pub scenario: Option<String>,
    #[serde(default)]
    pub label: String,
    pub symbols: Vec<Symbol>,
    pub permutation: Vec<usize>,
    pub permutation_rank: u128,
    pub clauses: Vec<ClauseRecord>,
    pub unsatisfiable: bool,
    pub minimal: bool,
    pub theorems: Vec<TheoremRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseRecord {
    pub index: usize,
    /// Schema order: head first, then the negated predecessors.
    pub literals: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremRecord {
    pub removed_index: usize,
    pub statement: String,
    pub conclusion: Vec<String>,
    pub certified: String,
    pub semantic_check: bool,
    pub trace_replayed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replay_error: Option<String>,
    pub trace_steps: usize,
    pub trace_summary: String,
    pub trace: TraceRecord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub goal: Vec<String>,
    pub steps: Vec<StepRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub kind: String,
    #[serde(default)]
    pub literal: Option<String>,
    pub premises: Vec<PremiseRecord>,
}

/// A clause cited by its `D` index, or an earlier step by position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PremiseRecord {
    Clause(usize),
    Step(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingRow {
    pub position: usize,
    pub priority: Priority,
    pub score: f64,
    /// Index into `explanations`.
    pub explanation: usize,
}

/// Current time, or `SOURCE_DATE_EPOCH` when set for reproducible output.
pub fn timestamp() -> String {
    let now = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| chrono::DateTime::from_timestamp(secs, 0))
        .unwrap_or_else(chrono::Utc::now);
    now.to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn names(table: &SymbolTable, lits: &[Literal]) -> Vec<String> {
    lits.iter().map(|&l| table.literal_name(l)).collect()
}

impl TheoremRecord {
    pub fn from_certified(ct: &CertifiedTheorem) -> Self {
        let t = &ct.theorem;
        let table = t.source.symbols();
        let steps = t
            .trace
            .steps
            .iter()
            .map(|s| StepRecord {
                kind: s.kind.as_str().to_string(),
                literal: s.literal.map(|l| table.literal_name(l)),
                premises: s
                    .premises
                    .iter()
                    .map(|p| match *p {
                        Premise::Clause(pos) => PremiseRecord::Clause(t.premise_label(pos)),
                        Premise::Step(k) => PremiseRecord::Step(k),
                    })
                    .collect(),
            })
            .collect();
        TheoremRecord {
            removed_index: t.removed_index,
            statement: t.statement(),
            conclusion: names(table, &t.conclusion),
            certified: t.certified.as_str().to_string(),
            semantic_check: ct.semantic_check,
            trace_replayed: ct.replay.is_ok(),
            replay_error: ct.replay.clone().err(),
            trace_steps: t.trace.len(),
            trace_summary: t.trace_summary(),
            trace: TraceRecord { goal: names(table, &t.trace.goal), steps },
        }
    }

    /// The recorded theorem over `source`, with certification reset to
    /// unchecked.
    pub fn to_theorem(&self, source: &Ftsc) -> Result<Theorem, String> {
        let table = source.symbols();
        let n = source.n();
        let i = self.removed_index;
        if i == 0 || i > n + 1 {
            return Err(format!("removed index {i} outside 1..={}", n + 1));
        }
        let lit = |s: &str| table.parse_literal(s).ok_or_else(|| format!("unknown literal `{s}`"));
        let lits = |xs: &[String]| xs.iter().map(|s| lit(s)).collect::<Result<Vec<_>, _>>();
        let mut steps = Vec::with_capacity(self.trace.steps.len());
        for (k, s) in self.trace.steps.iter().enumerate() {
            let kind = StepKind::parse(&s.kind).ok_or_else(|| format!("step {k}: unknown kind `{}`", s.kind))?;
            let literal = s.literal.as_deref().map(lit).transpose()?;
            let premises = s
                .premises
                .iter()
                .map(|p| match *p {
                    PremiseRecord::Step(j) => Ok(Premise::Step(j)),
                    PremiseRecord::Clause(d) if d == 0 || d == i || d > n + 1 => {
                        Err(format!("step {k}: D{d} is not a premise of {}", self.statement))
                    }
                    PremiseRecord::Clause(d) => Ok(Premise::Clause(if d < i { d - 1 } else { d - 2 })),
                })
                .collect::<Result<Vec<_>, _>>()?;
            steps.push(TraceStep { kind, literal, premises });
        }
        Ok(Theorem {
            source: source.clone(),
            removed_index: i,
            conclusion: lits(&self.conclusion)?,
            trace: ProofTrace { steps, goal: lits(&self.trace.goal)? },
            certified: Certification::Unchecked,
        })
    }
}

impl InstanceRecord {
    pub fn from_certified(scenario: Option<&str>, inst: &CertifiedInstance) -> Self {
        let f = &inst.ftsc;
        InstanceRecord {
            scenario: scenario.map(str::to_string),
            label: inst.label.clone(),
            symbols: f.symbols().symbols().to_vec(),
            permutation: f.permutation().to_vec(),
            permutation_rank: f.rank(),
            clauses: (1..=f.n() + 1)
                .map(|i| ClauseRecord { index: i, literals: names(f.symbols(), &f.schema_literals(i)) })
                .collect(),
            unsatisfiable: inst.mus.is_unsatisfiable,
            minimal: inst.mus.is_mus,
            theorems: inst.theorems.iter().map(TheoremRecord::from_certified).collect(),
        }
    }

    /// Clause set `D_1..D_{n+1}` as recorded.
    pub fn clause_set(&self) -> Result<ClauseSet, String> {
        let table = SymbolTable::new(self.symbols.clone()).map_err(|e| e.to_string())?;
        let mut clauses = Vec::with_capacity(self.clauses.len());
        for (k, c) in self.clauses.iter().enumerate() {
            if c.index != k + 1 {
                return Err(format!("clause {} recorded at position {}", c.index, k + 1));
            }
            let lits = c
                .literals
                .iter()
                .map(|s| table.parse_literal(s).ok_or_else(|| format!("D{}: unknown literal `{s}`", c.index)))
                .collect::<Result<Vec<_>, _>>()?;
            clauses.push(Clause::new(lits));
        }
        ClauseSet::new(table, clauses).map_err(|e| e.to_string())
    }
}

impl Report {
    /// `instances` pairs each certified instance with its scenario name.
    pub fn build(
        command: &str,
        instances: &[(Option<&str>, &CertifiedInstance)],
        explanations: Vec<Explanation>,
        ranking: Option<&RankedReport>,
    ) -> Self {
        let records: Vec<InstanceRecord> =
            instances.iter().map(|(s, inst)| InstanceRecord::from_certified(*s, inst)).collect();
        let uniform = |f: &dyn Fn(&InstanceRecord) -> Vec<usize>| {
            let first = records.first().map(f)?;
            records.iter().all(|r| f(r) == first).then_some(first)
        };
        let mut scenarios: Vec<&str> = instances.iter().filter_map(|(s, _)| *s).collect();
        scenarios.dedup();
        let ranking = ranking
            .map(|r| {
                r.entries
                    .iter()
                    .filter_map(|e| {
                        let idx = explanations.iter().position(|x| x == &e.explanation)?;
                        Some(RankingRow { position: e.position, priority: e.priority, score: e.score, explanation: idx })
                    })
                    .collect()
            })
            .unwrap_or_default();
        Report {
            schema_version: SCHEMA_VERSION.to_string(),
            metadata: Metadata {
                tool_version: TOOL_VERSION.to_string(),
                timestamp: timestamp(),
                command: command.to_string(),
                scenario: (scenarios.len() == 1).then(|| scenarios[0].to_string()),
                n: uniform(&|r| vec![r.symbols.len()]).map(|v| v[0]),
                permutation: uniform(&|r| r.permutation.clone()),
            },
            instances: records,
            explanations,
            ranking,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        let report: Report = serde_json::from_str(text)?;
        if report.schema_version != SCHEMA_VERSION {
            return Err(ReportError::SchemaVersion(report.schema_version));
        }
        Ok(report)
    }

    /// Copy with the timestamp blanked, for comparisons across runs.
    pub fn without_timestamp(&self) -> Self {
        let mut r = self.clone();
        r.metadata.timestamp.clear();
        r
    }
}

/// Outcome of re-deriving a report from its clause lists.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Verification {
    pub lines: Vec<String>,
    pub failures: usize,
    pub warnings: usize,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    fn fail(&mut self, msg: String) {
        self.failures += 1;
        self.lines.push(format!("FAIL {msg}"));
    }
}

/// Rebuilds every instance from its recorded clauses and re-runs the
/// minimality check, both theorem checks and the trace replay. Recorded
/// statuses are ignored except to warn when they disagree.
pub fn verify_report(report: &Report) -> Result<Verification, ReportError> {
    let mut v = Verification::default();
    for (k, inst) in report.instances.iter().enumerate() {
        let malformed = |message: String| ReportError::Malformed { instance: k, message };
        let name = if inst.label.is_empty() { format!("instance {k}") } else { format!("instance {k} ({})", inst.label) };
        let set = inst.clause_set().map_err(malformed)?;
        let mus = check_mus(&set);
        if mus.is_mus {
            v.lines.push(format!("ok   {name}: minimally unsatisfiable ({} clauses)", set.len()));
        } else if !mus.is_unsatisfiable {
            v.fail(format!("{name}: clause set is satisfiable"));
        } else {
            v.fail(format!("{name}: not minimal, redundant positions {:?}", mus.redundant_clauses()));
        }
        let ftsc = match Ftsc::recognize(&set) {
            Ok(f) => f,
            Err(e) => {
                v.fail(format!("{name}: {e}"));
                continue;
            }
        };
        if ftsc.permutation() != inst.permutation.as_slice() {
            v.fail(format!("{name}: recorded permutation {:?} but clauses give {:?}", inst.permutation, ftsc.permutation()));
        }
        let mut seen = vec![false; ftsc.n() + 2];
        for rec in &inst.theorems {
            let theorem = match rec.to_theorem(&ftsc) {
                Ok(t) => t,
                Err(e) => {
                    v.fail(format!("{name}: {e}"));
                    continue;
                }
            };
            if std::mem::replace(&mut seen[rec.removed_index], true) {
                v.fail(format!("{name}: {} recorded twice", rec.statement));
            }
            let check = check_theorem_detailed(&theorem);
            let replay = replay_theorem(&theorem);
            match (check.passed(), replay) {
                (true, Ok(())) => {
                    v.lines.push(format!("ok   {name}: {}", theorem.statement()));
                    if rec.certified != Certification::Verified.as_str() {
                        v.warnings += 1;
                        v.lines.push(format!("warn {name}: {} recorded as {}", theorem.statement(), rec.certified));
                    }
                }
                (false, replay) => v.fail(format!(
                    "{name}: {} does not hold as recorded (conclusion matches: {}, entailed: {:?}{})",
                    theorem.statement(),
                    check.conclusion_matches,
                    check.conjuncts_entailed,
                    replay.err().map(|e| format!(", replay: {e}")).unwrap_or_default()
                )),
                (true, Err(e)) => v.fail(format!("{name}: {} trace rejected: {e}", theorem.statement())),
            }
        }
        if let Some(missing) = (1..=ftsc.n() + 1).find(|&i| !seen[i]) {
            v.fail(format!("{name}: no theorem recorded for D{missing}"));
        }
    }
    Ok(v)
}

/// Plain-text table for terminals.
pub fn render_text(report: &Report) -> String {
    let mut out = String::new();
    for inst in &report.instances {
        let mut title = inst.scenario.clone().unwrap_or_else(|| "FTSC".to_string());
        if !inst.label.is_empty() {
            title.push_str(&format!(" [{}]", inst.label));
        }
        let _ = writeln!(
            out,
            "{title}: n={} permutation={:?} unsat={} minimal={}",
            inst.symbols.len(),
            inst.permutation,
            inst.unsatisfiable,
            inst.minimal
        );
        for c in &inst.clauses {
            let _ = writeln!(out, "  D{} = ({})", c.index, c.literals.join(" ∨ "));
        }
        for t in &inst.theorems {
            let _ = writeln!(out, "  {:<14} {:<9} {}", t.statement, t.certified, t.conclusion.join(" ∧ "));
        }
    }
    if !report.ranking.is_empty() {
        let _ = writeln!(out, "\nRanking:");
        for row in &report.ranking {
            let e = &report.explanations[row.explanation];
            let _ = writeln!(
                out,
                "{:>3}. {:<6} {:.3}  {} {} {}  {}",
                row.position,
                row.priority.to_string(),
                row.score,
                e.scenario,
                if e.instance.is_empty() { String::new() } else { format!("[{}]", e.instance) },
                e.statement,
                e.remediation
            );
        }
    } else {
        for e in &report.explanations {
            let _ = writeln!(out, "\n{}\nRemediation: {}", e.narrative, e.remediation);
        }
    }
    out
}
