//! Clause algebra: literals, clauses, clause sets, assignments and evaluation.
//!
//! Atom names are interned into a [`SymbolTable`]; everything below the
//! external surfaces works on small integer indices. All values are immutable
//! after construction.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised by the clause algebra and input validation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("input literal list is empty")]
    EmptyInput,
    #[error("symbol `{0}` occurs more than once")]
    DuplicateSymbol(String),
    #[error("symbol `{0}` occurs both positively and negatively")]
    ComplementaryPair(String),
    #[error("symbol name is empty")]
    EmptySymbol,
    #[error("symbol `{0}` is not bound by the assignment")]
    UnboundSymbol(String),
    #[error("variable index {0} is outside the symbol table")]
    UnknownVariable(u32),
}

/// Index of an interned atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Var(pub u32);

impl Var {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn flip(self) -> Self {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }
}

/// A literal (variable with polarity).
///
/// Encoded as `2 * var` for the positive literal and `2 * var + 1` for the
/// negative one, so the derived ordering is (variable, positive first).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal(u32);

impl Literal {
    #[inline]
    pub fn new(var: Var, polarity: Polarity) -> Self {
        match polarity {
            Polarity::Positive => Literal::positive(var),
            Polarity::Negative => Literal::negative(var),
        }
    }

    #[inline]
    pub fn positive(var: Var) -> Self {
        Literal(var.0 << 1)
    }

    #[inline]
    pub fn negative(var: Var) -> Self {
        Literal((var.0 << 1) | 1)
    }

    #[inline]
    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    #[inline]
    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    #[inline]
    pub fn polarity(self) -> Polarity {
        if self.is_positive() {
            Polarity::Positive
        } else {
            Polarity::Negative
        }
    }

    #[inline]
    pub fn negate(self) -> Self {
        Literal(self.0 ^ 1)
    }

    /// Signed 1-based DIMACS encoding.
    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var().0) + 1;
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    pub fn from_dimacs(value: i64) -> Option<Self> {
        if value == 0 {
            return None;
        }
        let var = u32::try_from(value.unsigned_abs() - 1).ok()?;
        Some(if value > 0 {
            Literal::positive(Var(var))
        } else {
            Literal::negative(Var(var))
        })
    }
}

/// An atom: a propositional symbol or a ground first-order atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Symbol {
    pub name: String,
    #[serde(default)]
    pub arity: usize,
}

impl Symbol {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        Symbol { name: name.into(), arity }
    }
}

/// Ordered table of distinct atoms; a symbol's position is its [`Var`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymbolTable {
    symbols: Vec<Symbol>,
}

impl SymbolTable {
    pub fn new(symbols: Vec<Symbol>) -> Result<Self, LogicError> {
        let mut seen = HashSet::with_capacity(symbols.len());
        for s in &symbols {
            if s.name.is_empty() {
                return Err(LogicError::EmptySymbol);
            }
            if !seen.insert(s.name.as_str()) {
                return Err(LogicError::DuplicateSymbol(s.name.clone()));
            }
        }
        Ok(SymbolTable { symbols })
    }

    /// Propositional table `x1..xn`.
    pub fn numbered(n: usize) -> Self {
        SymbolTable {
            symbols: (1..=n).map(|i| Symbol::new(format!("x{i}"), 0)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn get(&self, var: Var) -> Option<&Symbol> {
        self.symbols.get(var.index())
    }

    pub fn name(&self, var: Var) -> &str {
        self.symbols
            .get(var.index())
            .map(|s| s.name.as_str())
            .unwrap_or("?")
    }

    pub fn lookup(&self, name: &str) -> Option<Var> {
        self.symbols
            .iter()
            .position(|s| s.name == name)
            .map(|i| Var(i as u32))
    }

    pub fn contains(&self, var: Var) -> bool {
        var.index() < self.symbols.len()
    }

    /// `Name` or `¬Name`.
    pub fn literal_name(&self, lit: Literal) -> String {
        if lit.is_positive() {
            self.name(lit.var()).to_string()
        } else {
            format!("¬{}", self.name(lit.var()))
        }
    }

    /// Parses `Name`, `¬Name`, `~Name`, `-Name` or `!Name` against this table.
    pub fn parse_literal(&self, text: &str) -> Option<Literal> {
        let named: NamedLiteral = text.parse().ok()?;
        let var = self.lookup(&named.symbol)?;
        Some(Literal::new(var, named.polarity))
    }

    pub fn display_clause(&self, clause: &Clause) -> String {
        display_literals(self, clause.literals())
    }
}

pub(crate) fn display_literals(table: &SymbolTable, lits: &[Literal]) -> String {
    if lits.is_empty() {
        return "⊥".to_string();
    }
    let parts: Vec<String> = lits.iter().map(|&l| table.literal_name(l)).collect();
    format!("({})", parts.join(" ∨ "))
}

/// A literal named by its symbol, as it appears on external surfaces.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NamedLiteral {
    pub symbol: String,
    pub arity: usize,
    pub polarity: Polarity,
}

impl NamedLiteral {
    pub fn positive(symbol: impl Into<String>) -> Self {
        NamedLiteral { symbol: symbol.into(), arity: 0, polarity: Polarity::Positive }
    }

    pub fn negative(symbol: impl Into<String>) -> Self {
        NamedLiteral { symbol: symbol.into(), arity: 0, polarity: Polarity::Negative }
    }

    pub fn with_arity(mut self, arity: usize) -> Self {
        self.arity = arity;
        self
    }
}

impl FromStr for NamedLiteral {
    type Err = LogicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (polarity, rest) = ['¬', '~', '-', '!']
            .iter()
            .find_map(|p| s.strip_prefix(*p))
            .map(|r| (Polarity::Negative, r.trim_start()))
            .unwrap_or((Polarity::Positive, s));
        if rest.is_empty() {
            return Err(LogicError::EmptySymbol);
        }
        let arity = ground_arity(rest);
        Ok(NamedLiteral { symbol: rest.to_string(), arity, polarity })
    }
}

impl fmt::Display for NamedLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.polarity {
            Polarity::Positive => write!(f, "{}", self.symbol),
            Polarity::Negative => write!(f, "¬{}", self.symbol),
        }
    }
}

/// Arity of a name written as `P(a,b,c)`; 0 for a bare symbol.
pub(crate) fn ground_arity(name: &str) -> usize {
    match (name.find('('), name.ends_with(')')) {
        (Some(open), true) => {
            let inner = &name[open + 1..name.len() - 1];
            if inner.trim().is_empty() {
                0
            } else {
                inner.split(',').count()
            }
        }
        _ => 0,
    }
}

/// The validated input list `x_1..x_n`: distinct atoms, each used with one
/// polarity. Input order is preserved and becomes the identity permutation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature {
    table: SymbolTable,
    inputs: Vec<Literal>,
}

impl Signature {
    pub fn table(&self) -> &SymbolTable {
        &self.table
    }

    /// `x_1..x_n` in input order; `inputs()[k]` is over `Var(k)`.
    pub fn inputs(&self) -> &[Literal] {
        &self.inputs
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// Propositional signature over plain names.
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self, LogicError> {
        let lits: Vec<NamedLiteral> = names
            .iter()
            .map(|n| NamedLiteral::positive(n.as_ref()))
            .collect();
        validate_input(&lits)
    }

    pub(crate) fn from_parts(table: SymbolTable, inputs: Vec<Literal>) -> Self {
        Signature { table, inputs }
    }
}

/// Checks non-complementarity and uniqueness of an input literal list.
pub fn validate_input(literals: &[NamedLiteral]) -> Result<Signature, LogicError> {
    if literals.is_empty() {
        return Err(LogicError::EmptyInput);
    }
    let mut symbols: Vec<Symbol> = Vec::with_capacity(literals.len());
    let mut inputs = Vec::with_capacity(literals.len());
    for lit in literals {
        if lit.symbol.is_empty() {
            return Err(LogicError::EmptySymbol);
        }
        if let Some(pos) = symbols.iter().position(|s| s.name == lit.symbol) {
            let earlier = inputs[pos];
            return Err(if Literal::new(Var(pos as u32), lit.polarity) == earlier {
                LogicError::DuplicateSymbol(lit.symbol.clone())
            } else {
                LogicError::ComplementaryPair(lit.symbol.clone())
            });
        }
        let var = Var(symbols.len() as u32);
        symbols.push(Symbol::new(lit.symbol.clone(), lit.arity));
        inputs.push(Literal::new(var, lit.polarity));
    }
    Ok(Signature { table: SymbolTable { symbols }, inputs })
}

/// A disjunction of literals, kept sorted and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Clause {
    literals: Vec<Literal>,
}

impl Clause {
    pub fn new(literals: impl IntoIterator<Item = Literal>) -> Self {
        canonicalize(literals.into_iter().collect())
    }

    pub fn empty() -> Self {
        Clause { literals: Vec::new() }
    }

    pub fn unit(lit: Literal) -> Self {
        Clause { literals: vec![lit] }
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn contains(&self, lit: Literal) -> bool {
        self.literals.binary_search(&lit).is_ok()
    }

    /// True if the clause contains some `l` together with `¬l`.
    pub fn is_tautology(&self) -> bool {
        // sorted order puts x and ¬x next to each other
        self.literals
            .windows(2)
            .any(|w| w[0].var() == w[1].var())
    }

    pub fn with_literal(&self, lit: Literal) -> Clause {
        let mut lits = self.literals.clone();
        lits.push(lit);
        canonicalize(lits)
    }
}

/// Sorts by (signature index, polarity) and drops duplicates. Idempotent.
pub fn canonicalize(mut literals: Vec<Literal>) -> Clause {
    literals.sort_unstable();
    literals.dedup();
    Clause { literals }
}

/// A partial or total truth assignment over a symbol table.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    values: Vec<Option<bool>>,
}

impl Assignment {
    pub fn unassigned(n: usize) -> Self {
        Assignment { values: vec![None; n] }
    }

    pub fn total(values: Vec<bool>) -> Self {
        Assignment { values: values.into_iter().map(Some).collect() }
    }

    /// Total assignment with `Var(k)` set to bit `k` of `bits`.
    pub fn from_bits(n: usize, bits: u64) -> Self {
        Assignment::total((0..n).map(|k| bits >> k & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, var: Var) -> Option<bool> {
        self.values.get(var.index()).copied().flatten()
    }

    pub fn set(&mut self, var: Var, value: bool) {
        if var.index() >= self.values.len() {
            self.values.resize(var.index() + 1, None);
        }
        self.values[var.index()] = Some(value);
    }

    pub fn unset(&mut self, var: Var) {
        if let Some(v) = self.values.get_mut(var.index()) {
            *v = None;
        }
    }

    pub fn is_total(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    /// Value of a literal, `None` if its variable is unassigned.
    pub fn literal_value(&self, lit: Literal) -> Option<bool> {
        self.get(lit.var()).map(|v| v == lit.is_positive())
    }

    pub fn values(&self) -> impl Iterator<Item = Option<bool>> + '_ {
        self.values.iter().copied()
    }
}

/// Clause truth under an assignment that binds every symbol of the clause.
pub fn evaluate_clause(
    clause: &Clause,
    assignment: &Assignment,
    table: &SymbolTable,
) -> Result<bool, LogicError> {
    let mut satisfied = false;
    for &lit in clause.literals() {
        match assignment.literal_value(lit) {
            Some(true) => satisfied = true,
            Some(false) => {}
            None => return Err(LogicError::UnboundSymbol(table.name(lit.var()).to_string())),
        }
    }
    Ok(satisfied)
}

/// Conjunction semantics: true iff every clause holds.
pub fn evaluate_set(set: &ClauseSet, assignment: &Assignment) -> Result<bool, LogicError> {
    let mut all = true;
    for clause in set.clauses() {
        if !evaluate_clause(clause, assignment, set.symbols())? {
            all = false;
        }
    }
    Ok(all)
}

/// An ordered conjunction of clauses over a symbol table.
///
/// Clause order matters for indexing (`D_1` first) while [`ClauseSet::set_eq`]
/// compares clause sets irrespective of order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClauseSet {
    symbols: SymbolTable,
    clauses: Vec<Clause>,
}

impl ClauseSet {
    pub fn new(symbols: SymbolTable, clauses: Vec<Clause>) -> Result<Self, LogicError> {
        for clause in &clauses {
            for lit in clause.literals() {
                if !symbols.contains(lit.var()) {
                    return Err(LogicError::UnknownVariable(lit.var().0));
                }
            }
        }
        Ok(ClauseSet { symbols, clauses })
    }

    pub fn symbols(&self) -> &SymbolTable {
        &self.symbols
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn num_vars(&self) -> usize {
        self.symbols.len()
    }

    /// Copy of the set with the clause at 0-based `position` removed.
    pub fn without(&self, position: usize) -> ClauseSet {
        let clauses = self
            .clauses
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != position)
            .map(|(_, c)| c.clone())
            .collect();
        ClauseSet { symbols: self.symbols.clone(), clauses }
    }

    pub fn with_clause(&self, clause: Clause) -> ClauseSet {
        let mut clauses = self.clauses.clone();
        clauses.push(clause);
        ClauseSet { symbols: self.symbols.clone(), clauses }
    }

    pub fn literal_count(&self) -> usize {
        self.clauses.iter().map(Clause::len).sum()
    }

    /// Order-insensitive equality of the clauses, with symbols compared by name.
    pub fn set_eq(&self, other: &ClauseSet) -> bool {
        self.named_clause_set() == other.named_clause_set()
    }

    fn named_clause_set(&self) -> BTreeSet<BTreeSet<(String, bool)>> {
        self.clauses
            .iter()
            .map(|c| {
                c.literals()
                    .iter()
                    .map(|l| (self.symbols.name(l.var()).to_string(), l.is_positive()))
                    .collect()
            })
            .collect()
    }

    /// Structural equality: same symbols in the same order and the same clause list.
    pub fn structurally_eq(&self, other: &ClauseSet) -> bool {
        self == other
    }
}

impl fmt::Display for ClauseSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .clauses
            .iter()
            .map(|c| self.symbols.display_clause(c))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}
