//! Construction of full triangular standard contradictions (FTSCs), their
//! permutation family, canonical entailment theorems and proof traces.
//!
//! For a chain `x_1..x_n` the FTSC is
//!
//! ```text
//! D_t     = x_t ∨ ¬x_1 ∨ … ∨ ¬x_{t-1}     (t = 1..n)
//! D_{n+1} = ¬x_1 ∨ … ∨ ¬x_n
//! ```
//!
//! Removing any `D_i` leaves a satisfiable remainder that entails `¬D_i`.
//! Nothing here searches; every trace follows the dependency chain directly.

use std::fmt;

use thiserror::Error;

use crate::logic::{Clause, ClauseSet, Literal, Signature, SymbolTable, Var};

/// Default largest `n` for which [`enumerate_ftscs`] will run.
pub const DEFAULT_ENUMERATION_CAP: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeneratorError {
    #[error("enumerating {n}! permutations exceeds the cap of n = {cap}")]
    EnumerationCapExceeded { n: usize, cap: usize },
    #[error("removed index {index} is outside 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("permutation is not a rearrangement of 0..{0}")]
    InvalidPermutation(usize),
    #[error("permutation rank {rank} is out of range for n = {n}")]
    RankOutOfRange { rank: u128, n: usize },
    #[error("clause set is not FTSC-shaped: {0}")]
    NotFtsc(String),
}

/// Counters for the elementary work done while building an FTSC.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounter {
    /// Literals written into clauses.
    pub emissions: u64,
    /// Duplicate checks against literals already in the clause under construction.
    pub comparisons: u64,
}

impl OpCounter {
    pub fn total(&self) -> u64 {
        self.emissions + self.comparisons
    }
}

/// One member of the FTSC family: a clause set `D_1..D_{n+1}` over a chain.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ftsc {
    signature: Signature,
    permutation: Vec<usize>,
    chain: Vec<Literal>,
    clause_set: ClauseSet,
}

impl Ftsc {
    pub fn n(&self) -> usize {
        self.chain.len()
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn symbols(&self) -> &SymbolTable {
        self.signature.table()
    }

    pub fn clause_set(&self) -> &ClauseSet {
        &self.clause_set
    }

    /// Signature positions in chain order; `permutation()[k]` supplies `x_{k+1}`.
    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// `x_1..x_n` in chain order.
    pub fn chain(&self) -> &[Literal] {
        &self.chain
    }

    /// Lexicographic rank of the permutation.
    pub fn rank(&self) -> u128 {
        permutation_rank(&self.permutation)
    }

    /// `D_index` (1-based).
    pub fn clause(&self, index: usize) -> Option<&Clause> {
        index.checked_sub(1).and_then(|k| self.clause_set.clauses().get(k))
    }

    /// Literals of `D_index` in schema order: head `x_t` first, then
    /// `¬x_1..¬x_{t-1}`.
    pub fn schema_literals(&self, index: usize) -> Vec<Literal> {
        let n = self.n();
        if index == 0 || index > n + 1 {
            return Vec::new();
        }
        let negs = self.chain[..index.min(n + 1) - 1].iter().map(|l| l.negate());
        if index <= n {
            std::iter::once(self.chain[index - 1]).chain(negs).collect()
        } else {
            self.chain.iter().map(|l| l.negate()).collect()
        }
    }

    /// `D_index` rendered in schema order, e.g. `(Fever ∨ ¬Infection ∨ ¬HighWBC)`.
    pub fn display_clause(&self, index: usize) -> String {
        crate::logic::display_literals(self.symbols(), &self.schema_literals(index))
    }

    /// Sorted clause list; equal keys mean equal clause sets.
    pub fn canonical_key(&self) -> Vec<Clause> {
        let mut key = self.clause_set.clauses().to_vec();
        key.sort();
        key
    }

    /// Recovers the chain of an ordered clause list `D_1..D_{n+1}`, checking
    /// every clause against the schema. Only the clause lists are trusted.
    pub fn recognize(set: &ClauseSet) -> Result<Ftsc, GeneratorError> {
        let clauses = set.clauses();
        if clauses.len() < 2 {
            return Err(GeneratorError::NotFtsc(format!(
                "expected at least 2 clauses, found {}",
                clauses.len()
            )));
        }
        let n = clauses.len() - 1;
        if set.num_vars() != n {
            return Err(GeneratorError::NotFtsc(format!(
                "{} clauses need exactly {} symbols, table has {}",
                clauses.len(),
                n,
                set.num_vars()
            )));
        }
        let mut chain: Vec<Literal> = Vec::with_capacity(n);
        for (k, clause) in clauses[..n].iter().enumerate() {
            if clause.len() != k + 1 {
                return Err(GeneratorError::NotFtsc(format!(
                    "D{} has {} literals, expected {}",
                    k + 1,
                    clause.len(),
                    k + 1
                )));
            }
            let mut head = None;
            for &lit in clause.literals() {
                if chain.iter().any(|x| x.negate() == lit) {
                    continue;
                }
                if head.replace(lit).is_some() || chain.iter().any(|x| x.var() == lit.var()) {
                    return Err(GeneratorError::NotFtsc(format!(
                        "D{} does not extend the chain by one fresh literal",
                        k + 1
                    )));
                }
            }
            match head {
                Some(h) => chain.push(h),
                None => {
                    return Err(GeneratorError::NotFtsc(format!("D{} has no fresh literal", k + 1)))
                }
            }
        }
        let last = Clause::new(chain.iter().map(|l| l.negate()));
        if clauses[n] != last {
            return Err(GeneratorError::NotFtsc(format!(
                "D{} is not the negation of the whole chain",
                n + 1
            )));
        }
        let mut inputs = vec![Literal::positive(Var(0)); n];
        for lit in &chain {
            inputs[lit.var().index()] = *lit;
        }
        let permutation = chain.iter().map(|l| l.var().index()).collect();
        Ok(Ftsc {
            signature: Signature::from_parts(set.symbols().clone(), inputs),
            permutation,
            chain,
            clause_set: set.clone(),
        })
    }
}

/// Builds the FTSC over the signature's input order.
pub fn build_ftsc(signature: &Signature) -> Ftsc {
    let identity: Vec<usize> = (0..signature.len()).collect();
    build_ftsc_counted(signature, &identity, &mut OpCounter::default())
        .expect("identity is a valid permutation")
}

/// Builds the FTSC whose chain takes the inputs in `permutation` order.
pub fn build_ftsc_permuted(signature: &Signature, permutation: &[usize]) -> Result<Ftsc, GeneratorError> {
    build_ftsc_counted(signature, permutation, &mut OpCounter::default())
}

/// [`build_ftsc_permuted`] with elementary operations tallied into `ops`.
pub fn build_ftsc_counted(
    signature: &Signature,
    permutation: &[usize],
    ops: &mut OpCounter,
) -> Result<Ftsc, GeneratorError> {
    let n = signature.len();
    if !is_permutation(permutation, n) {
        return Err(GeneratorError::InvalidPermutation(n));
    }
    let chain: Vec<Literal> = permutation.iter().map(|&k| signature.inputs()[k]).collect();

    let mut clauses = Vec::with_capacity(n + 1);
    for t in 0..=n {
        let mut lits: Vec<Literal> = Vec::with_capacity(t + 1);
        if t < n {
            push_unique(&mut lits, chain[t], ops);
        }
        for x in &chain[..t] {
            push_unique(&mut lits, x.negate(), ops);
        }
        clauses.push(Clause::new(lits));
    }
    let clause_set = ClauseSet::new(signature.table().clone(), clauses)
        .expect("chain literals come from the signature");
    Ok(Ftsc {
        signature: signature.clone(),
        permutation: permutation.to_vec(),
        chain,
        clause_set,
    })
}

fn push_unique(lits: &mut Vec<Literal>, lit: Literal, ops: &mut OpCounter) {
    for &existing in lits.iter() {
        ops.comparisons += 1;
        // a valid signature never produces repeats or complementary pairs here
        debug_assert!(existing.var() != lit.var());
    }
    ops.emissions += 1;
    lits.push(lit);
}

fn is_permutation(p: &[usize], n: usize) -> bool {
    if p.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    p.iter().all(|&k| k < n && !std::mem::replace(&mut seen[k], true))
}

pub fn factorial(n: usize) -> Option<u128> {
    (1..=n as u128).try_fold(1u128, |acc, k| acc.checked_mul(k))
}

/// Lexicographic rank of a permutation of `0..n` (Lehmer code).
pub fn permutation_rank(p: &[usize]) -> u128 {
    let n = p.len();
    let mut rank = 0u128;
    for i in 0..n {
        let smaller_after = p[i + 1..].iter().filter(|&&v| v < p[i]).count() as u128;
        rank += smaller_after * factorial(n - 1 - i).unwrap_or(u128::MAX);
    }
    rank
}

/// The permutation of `0..n` at lexicographic position `rank`.
pub fn permutation_at(n: usize, rank: u128) -> Result<Vec<usize>, GeneratorError> {
    let total = factorial(n).unwrap_or(u128::MAX);
    if rank >= total {
        return Err(GeneratorError::RankOutOfRange { rank, n });
    }
    let mut pool: Vec<usize> = (0..n).collect();
    let mut rest = rank;
    let mut out = Vec::with_capacity(n);
    for i in (0..n).rev() {
        let f = factorial(i).unwrap_or(u128::MAX);
        let digit = (rest / f) as usize;
        rest %= f;
        out.push(pool.remove(digit));
    }
    Ok(out)
}

/// Lazy lexicographic permutations of `0..n`, optionally over a rank window.
#[derive(Debug, Clone)]
pub struct Permutations {
    current: Option<Vec<usize>>,
    remaining: u128,
    ops: u64,
}

impl Permutations {
    pub fn new(n: usize) -> Self {
        Permutations {
            current: Some((0..n).collect()),
            remaining: factorial(n).unwrap_or(u128::MAX),
            ops: 0,
        }
    }

    /// Permutations with lexicographic rank in `start..end`.
    pub fn window(n: usize, start: u128, end: u128) -> Result<Self, GeneratorError> {
        let total = factorial(n).unwrap_or(u128::MAX);
        let end = end.min(total);
        if start >= end {
            return Ok(Permutations { current: None, remaining: 0, ops: 0 });
        }
        Ok(Permutations {
            current: Some(permutation_at(n, start)?),
            remaining: end - start,
            ops: 0,
        })
    }

    /// Swaps, comparisons and element writes performed so far.
    pub fn ops(&self) -> u64 {
        self.ops
    }

    fn advance(&mut self, p: &mut [usize]) -> bool {
        let n = p.len();
        if n < 2 {
            return false;
        }
        let mut i = n - 1;
        loop {
            self.ops += 1;
            if p[i - 1] < p[i] {
                break;
            }
            i -= 1;
            if i == 0 {
                return false;
            }
        }
        let mut j = n - 1;
        while {
            self.ops += 1;
            p[j] <= p[i - 1]
        } {
            j -= 1;
        }
        p.swap(i - 1, j);
        self.ops += 1;
        p[i..].reverse();
        self.ops += ((n - i) / 2) as u64;
        true
    }
}

impl Iterator for Permutations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.remaining == 0 {
            return None;
        }
        let mut current = self.current.take()?;
        let out = current.clone();
        self.ops += out.len() as u64;
        self.remaining -= 1;
        if self.remaining > 0 && self.advance(&mut current) {
            self.current = Some(current);
        } else {
            self.remaining = 0;
        }
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = usize::try_from(self.remaining).unwrap_or(usize::MAX);
        (r, usize::try_from(self.remaining).ok())
    }
}

/// Streams the FTSC of every permutation of a signature in lexicographic order.
#[derive(Debug, Clone)]
pub struct FtscEnumerator {
    signature: Signature,
    perms: Permutations,
    ops: OpCounter,
}

impl FtscEnumerator {
    /// Elementary operations spent generating permutations so far.
    pub fn permutation_ops(&self) -> u64 {
        self.perms.ops()
    }

    /// Operations spent building clause sets so far.
    pub fn build_ops(&self) -> OpCounter {
        self.ops
    }

    /// Number of FTSCs (`n!`) and canonical theorems (`n!·(n+1)`) in the
    /// full family, `None` on overflow.
    pub fn family_counts(n: usize) -> (Option<u128>, Option<u128>) {
        let f = factorial(n);
        (f, f.and_then(|f| f.checked_mul(n as u128 + 1)))
    }
}

impl Iterator for FtscEnumerator {
    type Item = Ftsc;

    fn next(&mut self) -> Option<Ftsc> {
        let p = self.perms.next()?;
        Some(
            build_ftsc_counted(&self.signature, &p, &mut self.ops)
                .expect("enumerated permutations are valid"),
        )
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.perms.size_hint()
    }
}

/// Every permutation FTSC of `signature` with the default cap.
pub fn enumerate_ftscs(signature: &Signature) -> Result<FtscEnumerator, GeneratorError> {
    enumerate_ftscs_with_cap(signature, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_ftscs_with_cap(signature: &Signature, cap: usize) -> Result<FtscEnumerator, GeneratorError> {
    let n = signature.len();
    if n > cap {
        return Err(GeneratorError::EnumerationCapExceeded { n, cap });
    }
    Ok(FtscEnumerator {
        signature: signature.clone(),
        perms: Permutations::new(n),
        ops: OpCounter::default(),
    })
}

/// The FTSCs with permutation rank in `start..end`, for partitioned consumers.
pub fn enumerate_window(
    signature: &Signature,
    cap: usize,
    start: u128,
    end: u128,
) -> Result<FtscEnumerator, GeneratorError> {
    let n = signature.len();
    if n > cap {
        return Err(GeneratorError::EnumerationCapExceeded { n, cap });
    }
    Ok(FtscEnumerator {
        signature: signature.clone(),
        perms: Permutations::window(n, start, end)?,
        ops: OpCounter::default(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StepKind {
    UnitDerivation,
    Assumption,
    Propagation,
    EmptyClause,
    Discharge,
}

impl StepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StepKind::UnitDerivation => "unit-derivation",
            StepKind::Assumption => "assumption",
            StepKind::Propagation => "propagation",
            StepKind::EmptyClause => "empty-clause",
            StepKind::Discharge => "discharge",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "unit-derivation" => StepKind::UnitDerivation,
            "assumption" => StepKind::Assumption,
            "propagation" => StepKind::Propagation,
            "empty-clause" => StepKind::EmptyClause,
            "discharge" => StepKind::Discharge,
            _ => return None,
        })
    }
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What a trace step leans on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Premise {
    /// 0-based position in the premise set `S ∖ {D_i}`.
    Clause(usize),
    /// 0-based index of an earlier step.
    Step(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TraceStep {
    pub kind: StepKind,
    /// Derived literal; `None` for the empty clause.
    pub literal: Option<Literal>,
    pub premises: Vec<Premise>,
}

/// Replayable derivation of a theorem's conclusion from `S ∖ {D_i}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ProofTrace {
    pub steps: Vec<TraceStep>,
    /// Conjuncts the trace claims to establish.
    pub goal: Vec<Literal>,
}

impl ProofTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Certification {
    #[default]
    Unchecked,
    Verified,
    Failed,
}

impl Certification {
    pub fn as_str(self) -> &'static str {
        match self {
            Certification::Unchecked => "unchecked",
            Certification::Verified => "verified",
            Certification::Failed => "failed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "unchecked" => Certification::Unchecked,
            "verified" => Certification::Verified,
            "failed" => Certification::Failed,
            _ => return None,
        })
    }
}

/// The canonical entailment `S ∖ {D_i} ⊢ ¬D_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Theorem {
    pub source: Ftsc,
    /// 1-based index `i` of the removed clause.
    pub removed_index: usize,
    /// Conjuncts of `¬D_i`, in chain order.
    pub conclusion: Vec<Literal>,
    pub trace: ProofTrace,
    pub certified: Certification,
}

impl Theorem {
    pub fn n(&self) -> usize {
        self.source.n()
    }

    pub fn removed_clause(&self) -> Option<&Clause> {
        self.source.clause(self.removed_index)
    }

    /// The premise set `S ∖ {D_i}`.
    pub fn premises(&self) -> ClauseSet {
        self.source
            .clause_set()
            .without(self.removed_index.saturating_sub(1))
    }

    /// Maps a premise position back to its `D` index.
    pub fn premise_label(&self, position: usize) -> usize {
        if position + 1 < self.removed_index {
            position + 1
        } else {
            position + 2
        }
    }

    /// `S∖{D4} ⊢ ¬D4`
    pub fn statement(&self) -> String {
        format!("S∖{{D{i}}} ⊢ ¬D{i}", i = self.removed_index)
    }

    pub fn conclusion_text(&self) -> String {
        let t = self.source.symbols();
        self.conclusion
            .iter()
            .map(|&l| t.literal_name(l))
            .collect::<Vec<_>>()
            .join(" ∧ ")
    }

    /// One-line account of the trace, citing clauses by their `D` index.
    pub fn trace_summary(&self) -> String {
        let t = self.source.symbols();
        let mut units = Vec::new();
        let mut parts = Vec::new();
        let mut props = Vec::new();
        for step in &self.trace.steps {
            let cited = step.premises.iter().find_map(|p| match p {
                Premise::Clause(pos) => Some(self.premise_label(*pos)),
                Premise::Step(_) => None,
            });
            let name = step.literal.map(|l| t.literal_name(l)).unwrap_or_default();
            match step.kind {
                StepKind::UnitDerivation => units.push(format!("{name} [D{}]", cited.unwrap_or(0))),
                StepKind::Assumption => parts.push(format!("assume {name}")),
                StepKind::Propagation => props.push(format!("{name} [D{}]", cited.unwrap_or(0))),
                StepKind::EmptyClause => {
                    if !props.is_empty() {
                        parts.push(format!("propagate {}", props.join(", ")));
                        props.clear();
                    }
                    parts.push(format!("contradiction with D{}", cited.unwrap_or(0)))
                }
                StepKind::Discharge => parts.push(format!("discharge to {name}")),
            }
        }
        let mut out = Vec::new();
        if !units.is_empty() {
            out.push(format!("units {}", units.join(", ")));
        }
        out.extend(parts);
        if out.is_empty() {
            "empty trace".to_string()
        } else {
            out.join("; ")
        }
    }
}

/// The `n+1` theorems of one FTSC, each with its trace, all unchecked.
pub fn derive_theorems(ftsc: &Ftsc) -> Vec<Theorem> {
    (1..=ftsc.n() + 1)
        .map(|i| {
            let trace = build_proof_trace(ftsc, i).expect("index in range");
            Theorem {
                source: ftsc.clone(),
                removed_index: i,
                conclusion: trace.goal.clone(),
                trace,
                certified: Certification::Unchecked,
            }
        })
        .collect()
}

/// Builds the trace for removing `D_index`.
///
/// Units `x_1..x_{i-1}` come from `D_1..D_{i-1}`. For `i ≤ n` the trace then
/// assumes `x_i`, propagates `x_{i+1}..x_n` through `D_{i+1}..D_n`, hits the
/// empty clause on `D_{n+1}` and discharges `¬x_i`. For `i = n+1` the units
/// alone are the conclusion.
pub fn build_proof_trace(ftsc: &Ftsc, index: usize) -> Result<ProofTrace, GeneratorError> {
    let n = ftsc.n();
    if index == 0 || index > n + 1 {
        return Err(GeneratorError::IndexOutOfRange { index, max: n + 1 });
    }
    let chain = ftsc.chain();
    // position of D_k inside S ∖ {D_index}
    let pos = |k: usize| if k < index { k - 1 } else { k - 2 };

    let mut steps: Vec<TraceStep> = Vec::with_capacity(n + 3);
    // step index holding x_k, for k = 1..
    let mut holder: Vec<usize> = Vec::with_capacity(n);
    let cite = |k: usize, holder: &[usize]| {
        let mut premises = vec![Premise::Clause(pos(k))];
        premises.extend(holder[..k - 1].iter().map(|&s| Premise::Step(s)));
        premises
    };

    for k in 1..index.min(n + 1) {
        steps.push(TraceStep {
            kind: StepKind::UnitDerivation,
            literal: Some(chain[k - 1]),
            premises: cite(k, &holder),
        });
        holder.push(steps.len() - 1);
    }

    let mut goal: Vec<Literal> = chain[..index - 1].to_vec();
    if index <= n {
        steps.push(TraceStep {
            kind: StepKind::Assumption,
            literal: Some(chain[index - 1]),
            premises: Vec::new(),
        });
        let assumption = steps.len() - 1;
        holder.push(assumption);
        for k in index + 1..=n {
            steps.push(TraceStep {
                kind: StepKind::Propagation,
                literal: Some(chain[k - 1]),
                premises: cite(k, &holder),
            });
            holder.push(steps.len() - 1);
        }
        let mut premises = vec![Premise::Clause(pos(n + 1))];
        premises.extend(holder.iter().map(|&s| Premise::Step(s)));
        steps.push(TraceStep { kind: StepKind::EmptyClause, literal: None, premises });
        let empty = steps.len() - 1;
        steps.push(TraceStep {
            kind: StepKind::Discharge,
            literal: Some(chain[index - 1].negate()),
            premises: vec![Premise::Step(assumption), Premise::Step(empty)],
        });
        goal.push(chain[index - 1].negate());
    }
    Ok(ProofTrace { steps, goal })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{Polarity, SymbolTable};

    fn medical() -> Signature {
        Signature::from_names(&["Infection", "HighWBC", "Fever", "RequiresAntibiotics"]).unwrap()
    }

    fn rendered(f: &Ftsc) -> Vec<String> {
        (1..=f.n() + 1).map(|i| f.display_clause(i)).collect()
    }

    #[test]
    fn n1_schema() {
        let f = build_ftsc(&Signature::from_names(&["x1"]).unwrap());
        assert_eq!(rendered(&f), vec!["(x1)", "(¬x1)"]);
    }

    #[test]
    fn medical_schema_matches_worked_example() {
        let f = build_ftsc(&medical());
        assert_eq!(
            rendered(&f),
            vec![
                "(Infection)",
                "(HighWBC ∨ ¬Infection)",
                "(Fever ∨ ¬Infection ∨ ¬HighWBC)",
                "(RequiresAntibiotics ∨ ¬Infection ∨ ¬HighWBC ∨ ¬Fever)",
                "(¬Infection ∨ ¬HighWBC ∨ ¬Fever ∨ ¬RequiresAntibiotics)",
            ]
        );
        assert_eq!(f.clause_set().literal_count(), 4 * 7 / 2);
    }

    #[test]
    fn abc_schema() {
        let f = build_ftsc(&Signature::from_names(&["a", "b", "c"]).unwrap());
        assert_eq!(rendered(&f), vec!["(a)", "(b ∨ ¬a)", "(c ∨ ¬a ∨ ¬b)", "(¬a ∨ ¬b ∨ ¬c)"]);
    }

    #[test]
    fn negative_inputs_flip_roles() {
        let sig = crate::logic::validate_input(&["p".parse().unwrap(), "¬q".parse().unwrap()]).unwrap();
        let f = build_ftsc(&sig);
        assert_eq!(rendered(&f), vec!["(p)", "(¬q ∨ ¬p)", "(¬p ∨ q)"]);
    }

    #[test]
    fn permuted_build_uses_chain_order() {
        let f = build_ftsc_permuted(&Signature::from_names(&["a", "b", "c"]).unwrap(), &[2, 0, 1]).unwrap();
        assert_eq!(rendered(&f), vec!["(c)", "(a ∨ ¬c)", "(b ∨ ¬c ∨ ¬a)", "(¬c ∨ ¬a ∨ ¬b)"]);
        assert_eq!(f.rank(), 4);
        assert!(build_ftsc_permuted(&medical(), &[0, 0, 1, 2]).is_err());
    }

    #[test]
    fn shape_invariants() {
        for n in 1..=12 {
            let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
            let f = build_ftsc(&Signature::from_names(&names).unwrap());
            for t in 1..=n {
                let c = f.clause(t).unwrap();
                assert_eq!(c.len(), t);
                assert!(c.contains(f.chain()[t - 1]));
                assert!(!c.is_tautology());
            }
            assert_eq!(f.clause(n + 1).unwrap().len(), n);
            assert_eq!(f.clause_set().literal_count(), n * (n + 3) / 2);
        }
    }

    #[test]
    fn build_is_deterministic() {
        assert_eq!(build_ftsc(&medical()), build_ftsc(&medical()));
    }

    #[test]
    fn permutations_lexicographic() {
        let all: Vec<_> = Permutations::new(3).collect();
        assert_eq!(
            all,
            vec![
                vec![0, 1, 2],
                vec![0, 2, 1],
                vec![1, 0, 2],
                vec![1, 2, 0],
                vec![2, 0, 1],
                vec![2, 1, 0]
            ]
        );
        for (rank, p) in all.iter().enumerate() {
            assert_eq!(permutation_rank(p), rank as u128);
            assert_eq!(&permutation_at(3, rank as u128).unwrap(), p);
        }
        assert_eq!(Permutations::new(1).count(), 1);
        assert_eq!(Permutations::new(0).count(), 1);
        assert!(permutation_at(3, 6).is_err());
    }

    #[test]
    fn windows_partition_the_rank_space() {
        let whole: Vec<_> = Permutations::new(4).collect();
        let mut parts = Vec::new();
        for start in (0..24).step_by(5) {
            parts.extend(Permutations::window(4, start, start + 5).unwrap());
        }
        assert_eq!(whole, parts);
    }

    #[test]
    fn enumeration_counts_and_cap() {
        let sig = Signature::from_names(&["a", "b", "c"]).unwrap();
        let fams: Vec<_> = enumerate_ftscs(&sig).unwrap().collect();
        assert_eq!(fams.len(), 6);
        let mut keys: Vec<_> = fams.iter().map(Ftsc::canonical_key).collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), 6);

        let names: Vec<String> = (0..11).map(|i| format!("p{i}")).collect();
        let big = Signature::from_names(&names).unwrap();
        assert_eq!(
            enumerate_ftscs(&big).err(),
            Some(GeneratorError::EnumerationCapExceeded { n: 11, cap: 10 })
        );
        assert!(enumerate_ftscs_with_cap(&big, 11).is_ok());
        assert_eq!(FtscEnumerator::family_counts(4), (Some(24), Some(120)));
    }

    #[test]
    fn derive_theorem_counts() {
        let one = build_ftsc(&Signature::from_names(&["x1"]).unwrap());
        let th = derive_theorems(&one);
        assert_eq!(th.len(), 2);
        let t = one.symbols();
        assert_eq!(t.literal_name(th[0].conclusion[0]), "¬x1");
        assert_eq!(t.literal_name(th[1].conclusion[0]), "x1");
        assert_eq!(derive_theorems(&build_ftsc(&medical())).len(), 5);
        assert!(th.iter().all(|t| t.certified == Certification::Unchecked));
    }

    #[test]
    fn medical_trace_for_d4() {
        let f = build_ftsc(&medical());
        let tr = build_proof_trace(&f, 4).unwrap();
        let kinds: Vec<_> = tr.steps.iter().map(|s| s.kind).collect();
        use StepKind::*;
        assert_eq!(kinds, vec![UnitDerivation, UnitDerivation, UnitDerivation, Assumption, EmptyClause, Discharge]);
        let names: Vec<String> = tr.goal.iter().map(|&l| f.symbols().literal_name(l)).collect();
        assert_eq!(names, vec!["Infection", "HighWBC", "Fever", "¬RequiresAntibiotics"]);
        // D5 sits at position 3 of S∖{D4}
        assert_eq!(tr.steps[4].premises[0], Premise::Clause(3));

        let tr5 = build_proof_trace(&f, 5).unwrap();
        assert!(tr5.steps.iter().all(|s| s.kind == UnitDerivation));
        assert_eq!(tr5.goal, f.chain().to_vec());
        assert_eq!(
            build_proof_trace(&f, 6),
            Err(GeneratorError::IndexOutOfRange { index: 6, max: 5 })
        );
        assert!(build_proof_trace(&f, 0).is_err());
    }

    #[test]
    fn trace_summary_reads_in_d_labels() {
        let th = derive_theorems(&build_ftsc(&medical()));
        assert_eq!(
            th[1].trace_summary(),
            "units Infection [D1]; assume HighWBC; propagate Fever [D3], RequiresAntibiotics [D4]; \
             contradiction with D5; discharge to ¬HighWBC"
        );
        assert_eq!(th[0].statement(), "S∖{D1} ⊢ ¬D1");
    }

    #[test]
    fn recognize_round_trips() {
        let sig = crate::logic::validate_input(&["a".parse().unwrap(), "¬b".parse().unwrap(), "c".parse().unwrap()]).unwrap();
        for p in Permutations::new(3) {
            let f = build_ftsc_permuted(&sig, &p).unwrap();
            let r = Ftsc::recognize(f.clause_set()).unwrap();
            assert_eq!(r.chain(), f.chain());
            assert_eq!(r.permutation(), f.permutation());
            assert_eq!(r.signature().inputs(), f.signature().inputs());
        }
        let t = SymbolTable::numbered(2);
        let x1 = Literal::positive(Var(0));
        let bad = ClauseSet::new(t, vec![Clause::unit(x1), Clause::unit(x1.negate()), Clause::unit(x1)]).unwrap();
        assert!(Ftsc::recognize(&bad).is_err());
        assert_eq!(sig.inputs()[1].polarity(), Polarity::Negative);
    }

    #[test]
    fn op_counter_is_cubic_ish() {
        let mut ops = OpCounter::default();
        let sig = Signature::from_names(&["a", "b", "c", "d"]).unwrap();
        build_ftsc_counted(&sig, &[0, 1, 2, 3], &mut ops).unwrap();
        assert_eq!(ops.emissions, 14);
        // D_1..D_4 scan 0, 1, 3, 6 literals; D_5 scans 0+1+2+3
        assert_eq!(ops.comparisons, 16);
    }
}
