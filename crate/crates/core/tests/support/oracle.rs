//! Brute-force reference semantics over DIMACS-style integer clauses.

/// `D_t = x_t ∨ ¬x_1 ∨ … ∨ ¬x_{t-1}` for `t ≤ n`, then `D_{n+1} = ¬x_1 ∨ … ∨ ¬x_n`,
/// with variables numbered `1..=n` in chain order.
pub fn ftsc_clauses(n: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::with_capacity(n + 1);
    for t in 1..=n as i64 {
        let mut c = vec![t];
        c.extend((1..t).map(|k| -k));
        out.push(c);
    }
    out.push((1..=n as i64).map(|k| -k).collect());
    out
}

/// Literal total counted clause by clause, no closed form.
pub fn ftsc_literal_total(n: usize) -> usize {
    let mut total = 0;
    for t in 1..=n {
        total += t;
    }
    total + n
}

fn satisfied_by(clauses: &[Vec<i64>], bits: u64) -> bool {
    clauses.iter().all(|c| {
        c.iter().any(|&l| {
            let v = (bits >> (l.unsigned_abs() - 1)) & 1 == 1;
            if l > 0 { v } else { !v }
        })
    })
}

/// Exhaustive satisfiability over variables `1..=num_vars`.
pub fn sat(clauses: &[Vec<i64>], num_vars: usize) -> bool {
    assert!(num_vars <= 24, "oracle is exponential");
    (0..1u64 << num_vars).any(|bits| satisfied_by(clauses, bits))
}

pub fn without(clauses: &[Vec<i64>], k: usize) -> Vec<Vec<i64>> {
    clauses.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, c)| c.clone()).collect()
}

/// Unsatisfiable, and every single deletion satisfiable.
pub fn is_mus(clauses: &[Vec<i64>], num_vars: usize) -> bool {
    !sat(clauses, num_vars) && (0..clauses.len()).all(|k| sat(&without(clauses, k), num_vars))
}

/// `premises ⊨ lit`, checked model by model.
pub fn entails_literal(premises: &[Vec<i64>], num_vars: usize, lit: i64) -> bool {
    (0..1u64 << num_vars).all(|bits| {
        if !satisfied_by(premises, bits) {
            return true;
        }
        let v = (bits >> (lit.unsigned_abs() - 1)) & 1 == 1;
        if lit > 0 { v } else { !v }
    })
}

/// `premises ⊨ ¬removed`, i.e. every literal of `removed` is refuted.
pub fn entails_negation(premises: &[Vec<i64>], num_vars: usize, removed: &[i64]) -> bool {
    removed.iter().all(|&l| entails_literal(premises, num_vars, -l))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

