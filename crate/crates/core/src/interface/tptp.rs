//! TPTP emission.
//!
//! `cnf` mode writes each `D_t` as a ground `cnf` axiom. `fof` mode lifts the
//! clauses back over the scenario's variables and quantifies universally.
//! Conjectures state `¬D_i` as a conjunction of literals.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::explain::Scenario;
use crate::fol::{PredicateAtom, Term};
use crate::generator::{Ftsc, Theorem};
use crate::logic::{Literal, Polarity};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TptpMode {
    Cnf,
    Fof,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TptpError {
    #[error("fof mode needs first-order scenario metadata")]
    MissingScenarioMetadata,
    #[error("scenario binds {expected} atoms but the FTSC has {found}")]
    ArityMismatch { expected: usize, found: usize },
}

fn is_lower_word(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase()) && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn is_upper_word(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_uppercase()) && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// `HighWBC` → `high_wbc`, `GDPR_Consent` → `gdpr_consent`.
pub fn snake_case(name: &str) -> String {
    let chars: Vec<char> = name.chars().collect();
    let mut out = String::new();
    for (k, &c) in chars.iter().enumerate() {
        if c.is_uppercase() {
            let prev = k.checked_sub(1).map(|p| chars[p]);
            let next = chars.get(k + 1);
            let boundary = match prev {
                Some(p) if p.is_lowercase() || p.is_ascii_digit() => true,
                Some(p) if p.is_uppercase() => next.is_some_and(|n| n.is_lowercase()),
                _ => false,
            };
            if boundary && !out.ends_with('_') {
                out.push('_');
            }
            out.extend(c.to_lowercase());
        } else {
            out.push(c);
        }
    }
    out
}

/// `'text'` with `\` and `'` escaped; `None` outside printable ASCII.
fn single_quoted(s: &str) -> Option<String> {
    if s.is_empty() || !s.chars().all(|c| (' '..='~').contains(&c)) {
        return None;
    }
    Some(format!("'{}'", s.replace('\\', "\\\\").replace('\'', "\\'")))
}

/// Maps source names to TPTP functors. Snake case when that is a valid and
/// unambiguous lower word, the quoted original otherwise, and a numbered
/// fallback for names that cannot be quoted.
#[derive(Default)]
struct Functors {
    assigned: HashMap<String, String>,
    taken: HashMap<String, String>,
}

impl Functors {
    fn get(&mut self, name: &str) -> String {
        if let Some(f) = self.assigned.get(name) {
            return f.clone();
        }
        let free = |c: &str| self.taken.get(c).is_none_or(|owner| owner == name);
        let snake = snake_case(name);
        // 'abc' denotes the same symbol as abc, so quoting a lower word cannot
        // resolve a collision
        let candidate = if is_lower_word(&snake) && free(&snake) {
            snake
        } else if let Some(q) = single_quoted(name).filter(|q| !is_lower_word(name) && free(q)) {
            q
        } else {
            (self.assigned.len() + 1..)
                .map(|k| format!("s{k}"))
                .find(|c| free(c))
                .expect("unbounded")
        };
        self.taken.insert(candidate.clone(), name.to_string());
        self.assigned.insert(name.to_string(), candidate.clone());
        candidate
    }
}

/// A constant or propositional atom name as a TPTP term.
fn constant(name: &str, functors: &mut Functors) -> String {
    if is_lower_word(name) {
        name.to_string()
    } else {
        functors.get(name)
    }
}

/// `Pred(a,b)` → (`Pred`, [`a`, `b`]) when the name has that shape.
fn split_ground(name: &str) -> Option<(&str, Vec<&str>)> {
    let open = name.find('(')?;
    let inner = name[open + 1..].strip_suffix(')')?;
    let pred = &name[..open];
    let args: Vec<&str> = inner.split(',').map(str::trim).collect();
    let ident = |s: &str| !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || c == '_');
    (ident(pred) && args.iter().all(|a| ident(a))).then_some((pred, args))
}

fn ground_atom(name: &str, functors: &mut Functors) -> String {
    match split_ground(name) {
        Some((pred, args)) => {
            let args: Vec<String> = args.iter().map(|a| constant(a, functors)).collect();
            format!("{}({})", functors.get(pred), args.join(","))
        }
        None => functors.get(name),
    }
}

fn variable(name: &str) -> String {
    let mut chars = name.chars();
    let up: String = chars.next().map(|c| c.to_ascii_uppercase()).into_iter().chain(chars).collect();
    if is_upper_word(&up) {
        up
    } else {
        let clean: String = name.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect();
        format!("V_{clean}")
    }
}

fn lifted_atom(atom: &PredicateAtom, functors: &mut Functors) -> String {
    let pred = functors.get(&atom.predicate);
    if atom.args.is_empty() {
        return pred;
    }
    let args: Vec<String> = atom
        .args
        .iter()
        .map(|t| match t {
            Term::Variable(v) => variable(v),
            Term::Constant(c) => constant(c, functors),
        })
        .collect();
    format!("{pred}({})", args.join(","))
}

struct Renderer<'a> {
    ftsc: &'a Ftsc,
    scenario: Option<&'a Scenario>,
    functors: Functors,
}

impl Renderer<'_> {
    fn literal(&mut self, lit: Literal) -> String {
        let atom = match self.scenario {
            Some(s) => {
                let a = &s.atoms[lit.var().index()].atom;
                lifted_atom(a, &mut self.functors)
            }
            None => ground_atom(self.ftsc.symbols().name(lit.var()), &mut self.functors),
        };
        if lit.polarity() == Polarity::Negative {
            format!("~{atom}")
        } else {
            atom
        }
    }

    /// Variables of the listed literals in first-occurrence order.
    fn variables(&self, lits: &[Literal]) -> Vec<String> {
        let mut vars = Vec::new();
        if let Some(s) = self.scenario {
            for l in lits {
                for v in s.atoms[l.var().index()].atom.variables() {
                    let v = variable(v);
                    if !vars.contains(&v) {
                        vars.push(v);
                    }
                }
            }
        }
        vars
    }

    fn formula(&mut self, lits: &[Literal], joiner: &str) -> String {
        let body = if lits.is_empty() {
            if joiner == " | " { "$false".to_string() } else { "$true".to_string() }
        } else {
            let parts: Vec<String> = lits.iter().map(|&l| self.literal(l)).collect();
            format!("({})", parts.join(joiner))
        };
        let vars = self.variables(lits);
        if vars.is_empty() {
            body
        } else {
            format!("! [{}] : {body}", vars.join(","))
        }
    }

    fn clause(&mut self, index: usize, mode: TptpMode) -> String {
        let lits = self.ftsc.schema_literals(index);
        let body = self.formula(&lits, " | ");
        match mode {
            TptpMode::Cnf => format!("cnf(d{index}, axiom, {body})."),
            TptpMode::Fof => format!("fof(d{index}, axiom, {body})."),
        }
    }

    fn conjecture(&mut self, theorem: &Theorem) -> String {
        let body = self.formula(&theorem.conclusion, " & ");
        format!("fof(theorem_{}, conjecture, {body}).", theorem.removed_index)
    }
}

fn renderer<'a>(ftsc: &'a Ftsc, mode: TptpMode, scenario: Option<&'a Scenario>) -> Result<Renderer<'a>, TptpError> {
    let scenario = match mode {
        TptpMode::Cnf => None,
        TptpMode::Fof => {
            let s = scenario.ok_or(TptpError::MissingScenarioMetadata)?;
            if s.n() != ftsc.n() {
                return Err(TptpError::ArityMismatch { expected: s.n(), found: ftsc.n() });
            }
            Some(s)
        }
    };
    Ok(Renderer { ftsc, scenario, functors: Functors::default() })
}

fn header(ftsc: &Ftsc, mode: TptpMode, scenario: Option<&Scenario>) -> String {
    let names: Vec<&str> = ftsc.chain().iter().map(|l| ftsc.symbols().name(l.var())).collect();
    let mut out = format!("% FTSC over {} (n={}, permutation rank {})\n", names.join(", "), ftsc.n(), ftsc.rank());
    if let (TptpMode::Fof, Some(s)) = (mode, scenario) {
        let _ = writeln!(out, "% scenario {} ({})", s.name, s.domain_label);
    }
    out
}

/// All `n+1` clauses as axioms followed by one conjecture per theorem. Each
/// conjecture follows from the axioms other than the one its comment names.
pub fn emit_tptp(ftsc: &Ftsc, theorems: &[Theorem], mode: TptpMode, scenario: Option<&Scenario>) -> Result<String, TptpError> {
    let mut r = renderer(ftsc, mode, scenario)?;
    let mut out = header(ftsc, mode, scenario);
    for t in 1..=ftsc.n() + 1 {
        out.push_str(&r.clause(t, mode));
        out.push('\n');
    }
    for th in theorems {
        let _ = writeln!(out, "% {}: conjecture excludes axiom d{}", th.statement(), th.removed_index);
        out.push_str(&r.conjecture(th));
        out.push('\n');
    }
    Ok(out)
}

/// A standalone problem for one theorem: the premises `S ∖ {D_i}` as axioms
/// and `¬D_i` as the single conjecture.
pub fn emit_tptp_problem(theorem: &Theorem, mode: TptpMode, scenario: Option<&Scenario>) -> Result<String, TptpError> {
    let ftsc = &theorem.source;
    let mut r = renderer(ftsc, mode, scenario)?;
    let mut out = header(ftsc, mode, scenario);
    let _ = writeln!(out, "% {}", theorem.statement());
    for t in (1..=ftsc.n() + 1).filter(|&t| t != theorem.removed_index) {
        out.push_str(&r.clause(t, mode));
        out.push('\n');
    }
    out.push_str(&r.conjecture(theorem));
    out.push('\n');
    Ok(out)
}
