//! DIMACS CNF with the symbol map carried in comment lines:
//!
//! ```text
//! c symbol 1 0 Infection
//! c symbol 2 0 HighWBC
//! p cnf 2 3
//! 1 0
//! -1 2 0
//! -1 -2 0
//! ```

use std::fmt::Write as _;

use thiserror::Error;

use crate::logic::{Clause, ClauseSet, Literal, Symbol, SymbolTable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DimacsError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("header mismatch: {0}")]
    HeaderMismatch(String),
}

fn parse_err(line: usize, message: impl Into<String>) -> DimacsError {
    DimacsError::Parse { line, message: message.into() }
}

/// Deterministic: symbol comments in variable order, clauses in set order,
/// literals in canonical clause order.
pub fn emit_dimacs(set: &ClauseSet) -> String {
    let mut out = String::new();
    for (k, s) in set.symbols().symbols().iter().enumerate() {
        let _ = writeln!(out, "c symbol {} {} {}", k + 1, s.arity, s.name);
    }
    let _ = writeln!(out, "p cnf {} {}", set.num_vars(), set.len());
    for clause in set.clauses() {
        for lit in clause.literals() {
            let _ = write!(out, "{} ", lit.to_dimacs());
        }
        out.push_str("0\n");
    }
    out
}

/// Inverse of [`emit_dimacs`]. Other comments and blank lines are ignored,
/// clauses may span lines, and variables without a symbol comment are named
/// `x<k>`.
pub fn parse_dimacs(text: &str) -> Result<ClauseSet, DimacsError> {
    let mut header: Option<(usize, usize)> = None;
    let mut named: Vec<(usize, Symbol)> = Vec::new();
    let mut clauses: Vec<Clause> = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    let mut open_line = 0;

    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.trim();
        if line.is_empty() || line == "%" {
            continue;
        }
        if let Some(comment) = line.strip_prefix('c') {
            if !(comment.is_empty() || comment.starts_with(char::is_whitespace)) {
                return Err(parse_err(line_no, format!("unexpected token `{line}`")));
            }
            if let Some(rest) = comment.trim_start().strip_prefix("symbol ") {
                let mut parts = rest.trim_start().splitn(3, ' ');
                let var = parts.next().and_then(|v| v.parse::<usize>().ok()).filter(|&v| v > 0);
                let arity = parts.next().and_then(|a| a.parse::<usize>().ok());
                let name = parts.next().map(str::trim).filter(|n| !n.is_empty());
                match (var, arity, name) {
                    (Some(v), Some(a), Some(n)) => named.push((v, Symbol::new(n, a))),
                    _ => return Err(parse_err(line_no, "malformed symbol comment")),
                }
            }
            continue;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(DimacsError::HeaderMismatch(format!("second header on line {line_no}")));
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parsed = match fields.as_slice() {
                ["p", "cnf", v, c] => v.parse::<usize>().ok().zip(c.parse::<usize>().ok()),
                _ => None,
            };
            header = Some(parsed.ok_or_else(|| DimacsError::HeaderMismatch(format!("malformed header `{line}`")))?);
            continue;
        }
        let Some((vars, _)) = header else {
            return Err(DimacsError::HeaderMismatch(format!("clause before header on line {line_no}")));
        };
        for token in line.split_whitespace() {
            let value: i64 = token
                .parse()
                .map_err(|_| parse_err(line_no, format!("`{token}` is not an integer")))?;
            if value == 0 {
                clauses.push(Clause::new(current.drain(..)));
                continue;
            }
            if value.unsigned_abs() as usize > vars {
                return Err(parse_err(line_no, format!("variable {} exceeds declared {vars}", value.unsigned_abs())));
            }
            if current.is_empty() {
                open_line = line_no;
            }
            current.push(Literal::from_dimacs(value).expect("nonzero"));
        }
    }

    let Some((vars, count)) = header else {
        return Err(DimacsError::HeaderMismatch("missing `p cnf` header".into()));
    };
    if !current.is_empty() {
        return Err(parse_err(open_line, "clause not terminated by 0"));
    }
    if clauses.len() != count {
        return Err(DimacsError::HeaderMismatch(format!("header declares {count} clauses, body has {}", clauses.len())));
    }
    let mut symbols: Vec<Option<Symbol>> = vec![None; vars];
    for (v, s) in named {
        if v > vars {
            return Err(DimacsError::HeaderMismatch(format!("symbol for variable {v} beyond declared {vars}")));
        }
        if symbols[v - 1].replace(s).is_some() {
            return Err(DimacsError::HeaderMismatch(format!("variable {v} named twice")));
        }
    }
    let symbols: Vec<Symbol> = symbols
        .into_iter()
        .enumerate()
        .map(|(k, s)| s.unwrap_or_else(|| Symbol::new(format!("x{}", k + 1), 0)))
        .collect();
    let table = SymbolTable::new(symbols).map_err(|e| DimacsError::HeaderMismatch(e.to_string()))?;
    ClauseSet::new(table, clauses).map_err(|e| DimacsError::HeaderMismatch(e.to_string()))
}
