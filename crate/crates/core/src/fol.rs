//! First-order surface: predicate atoms over variables and constants,
//! grounded over finite domains into propositional FTSC instances.
//!
//! Each ground atom is an opaque propositional symbol. There is no
//! unification and there are no function symbols.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::generator::{build_ftsc, Ftsc};
use crate::logic::{validate_input, LogicError, NamedLiteral, Polarity};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FolError {
    #[error("variable `{0}` has no grounding domain")]
    UnboundVariable(String),
    #[error("variable `{0}` has an empty grounding domain")]
    EmptyDomain(String),
    #[error("predicate `{predicate}` declared with arity {declared} but given {found} arguments")]
    ArityMismatch { predicate: String, declared: usize, found: usize },
    #[error(transparent)]
    Validation(#[from] LogicError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Variable(String),
    Constant(String),
}

impl Term {
    pub fn name(&self) -> &str {
        match self {
            Term::Variable(n) | Term::Constant(n) => n,
        }
    }
}

/// `P(t_1, …, t_k)` with an optional polarity for use as an FTSC input.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PredicateAtom {
    pub predicate: String,
    pub args: Vec<Term>,
    pub polarity: Polarity,
}

impl PredicateAtom {
    pub fn new(predicate: impl Into<String>, arity: usize, args: Vec<Term>) -> Result<Self, FolError> {
        let predicate = predicate.into();
        if args.len() != arity {
            return Err(FolError::ArityMismatch { predicate, declared: arity, found: args.len() });
        }
        Ok(PredicateAtom { predicate, args, polarity: Polarity::Positive })
    }

    /// Zero-arity atom.
    pub fn propositional(predicate: impl Into<String>) -> Self {
        PredicateAtom { predicate: predicate.into(), args: Vec::new(), polarity: Polarity::Positive }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Variable(v) => Some(v.as_str()),
            Term::Constant(_) => None,
        })
    }

    fn ground_name(&self, binding: &BTreeMap<&str, &str>) -> String {
        if self.args.is_empty() {
            return self.predicate.clone();
        }
        let args: Vec<&str> = self
            .args
            .iter()
            .map(|t| match t {
                Term::Variable(v) => binding[v.as_str()],
                Term::Constant(c) => c.as_str(),
            })
            .collect();
        format!("{}({})", self.predicate, args.join(","))
    }
}

impl fmt::Display for PredicateAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.polarity == Polarity::Negative {
            f.write_str("¬")?;
        }
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            let args: Vec<&str> = self.args.iter().map(Term::name).collect();
            write!(f, "({})", args.join(","))?;
        }
        Ok(())
    }
}

/// Finite constant lists per variable.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundingDomain {
    values: BTreeMap<String, Vec<String>>,
}

impl GroundingDomain {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, var: impl Into<String>, constants: &[&str]) -> Self {
        self.insert(var, constants.iter().map(|c| c.to_string()).collect());
        self
    }

    pub fn insert(&mut self, var: impl Into<String>, constants: Vec<String>) {
        self.values.insert(var.into(), constants);
    }

    pub fn get(&self, var: &str) -> Option<&[String]> {
        self.values.get(var).map(Vec::as_slice)
    }

    pub fn is_variable(&self, name: &str) -> bool {
        self.values.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Vec<String>)> {
        self.values.iter()
    }
}

/// One uniform substitution and the ground input list it produces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundInstance {
    /// Variable bindings in order of first occurrence.
    pub bindings: Vec<(String, String)>,
    pub literals: Vec<NamedLiteral>,
}

impl GroundInstance {
    /// `h=mercy,p=alice`; empty for propositional inputs.
    pub fn label(&self) -> String {
        self.bindings
            .iter()
            .map(|(v, c)| format!("{v}={c}"))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Variables in order of first occurrence across the atom list.
pub fn variables_of(atoms: &[PredicateAtom]) -> Vec<&str> {
    let mut vars: Vec<&str> = Vec::new();
    for v in atoms.iter().flat_map(PredicateAtom::variables) {
        if !vars.contains(&v) {
            vars.push(v);
        }
    }
    vars
}

/// Every combination of constants for the atoms' variables, in odometer order
/// (last variable fastest). One variable gets one constant per instance.
pub fn ground_atoms(atoms: &[PredicateAtom], domain: &GroundingDomain) -> Result<Vec<GroundInstance>, FolError> {
    let vars = variables_of(atoms);
    let mut choices: Vec<&[String]> = Vec::with_capacity(vars.len());
    for v in &vars {
        let values = domain.get(v).ok_or_else(|| FolError::UnboundVariable(v.to_string()))?;
        if values.is_empty() {
            return Err(FolError::EmptyDomain(v.to_string()));
        }
        choices.push(values);
    }

    let mut out = Vec::new();
    let mut idx = vec![0usize; vars.len()];
    loop {
        let binding: BTreeMap<&str, &str> = vars
            .iter()
            .zip(&idx)
            .enumerate()
            .map(|(k, (v, &i))| (*v, choices[k][i].as_str()))
            .collect();
        let literals = atoms
            .iter()
            .map(|a| NamedLiteral {
                symbol: a.ground_name(&binding),
                arity: a.arity(),
                polarity: a.polarity,
            })
            .collect();
        out.push(GroundInstance {
            bindings: vars.iter().map(|v| (v.to_string(), binding[v].to_string())).collect(),
            literals,
        });

        let mut k = vars.len();
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < choices[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// An FTSC over one ground instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FolInstance {
    pub bindings: Vec<(String, String)>,
    pub ftsc: Ftsc,
}

impl FolInstance {
    pub fn label(&self) -> String {
        GroundInstance { bindings: self.bindings.clone(), literals: Vec::new() }.label()
    }
}

/// One independent FTSC per ground instance.
pub fn build_fol_ftsc(atoms: &[PredicateAtom], domain: &GroundingDomain) -> Result<Vec<FolInstance>, FolError> {
    ground_atoms(atoms, domain)?
        .into_iter()
        .map(|inst| {
            let sig = validate_input(&inst.literals)?;
            Ok(FolInstance { bindings: inst.bindings, ftsc: build_ftsc(&sig) })
        })
        .collect()
}
