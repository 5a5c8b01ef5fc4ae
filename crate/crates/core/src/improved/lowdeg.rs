use std::collections::HashMap;
use std::fmt;

use crate::cnf::{Assignment, CnfFormula, Var};

/// Exact solver used by the sparse case once few short clauses remain.
pub trait LowDegreeSolver: Send + Sync + fmt::Debug {
    /// A satisfying assignment defined on `vbl(f)`, or `None` if `f` is
    /// unsatisfiable.
    fn solve(&self, f: &CnfFormula) -> Option<Assignment>;

    fn name(&self) -> &'static str;
}

/// DPLL: unit propagation, then branching on the variable with the most
/// occurrences in the remaining clauses, true first.
#[derive(Debug, Clone, Copy, Default)]
pub struct BacktrackingSolver;

impl LowDegreeSolver for BacktrackingSolver {
    fn solve(&self, f: &CnfFormula) -> Option<Assignment> {
        let mut alpha = Assignment::with_capacity(f.num_vars());
        if !search(f, &mut alpha) {
            return None;
        }
        // Variables that vanished without being assigned are free.
        for v in f.vars() {
            if !alpha.is_defined(v) {
                alpha.set(v, false);
            }
        }
        Some(alpha)
    }

    fn name(&self) -> &'static str {
        "backtracking"
    }
}

fn search(f: &CnfFormula, alpha: &mut Assignment) -> bool {
    let mut g = f.restrict(alpha);
    loop {
        if g.has_empty_clause() {
            return false;
        }
        let units: Vec<_> = g
            .clauses()
            .iter()
            .filter(|c| c.len() == 1)
            .map(|c| c.lits()[0])
            .collect();
        if units.is_empty() {
            break;
        }
        for u in units {
            if alpha.lit_value(u) == Some(false) {
                return false;
            }
            alpha.set_lit(u);
        }
        g = f.restrict(alpha);
    }
    let Some(x) = branch_var(&g) else {
        return true;
    };
    for value in [true, false] {
        let mut next = alpha.clone();
        next.set(x, value);
        if search(f, &mut next) {
            *alpha = next;
            return true;
        }
    }
    false
}

fn branch_var(g: &CnfFormula) -> Option<Var> {
    let mut count: HashMap<Var, usize> = HashMap::new();
    for c in g.clauses() {
        for v in c.vars() {
            *count.entry(v).or_default() += 1;
        }
    }
    count
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(v, _)| v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_and_refutes() {
        let f = CnfFormula::from_dimacs_clauses(3, &[[1, 2], [-1, 3], [-3, -2]]).unwrap();
        let a = BacktrackingSolver.solve(&f).unwrap();
        assert!(f.is_satisfied_by(&a));

        let f = CnfFormula::from_dimacs_clauses(2, &[[1, 2], [1, -2], [-1, 2], [-1, -2]]).unwrap();
        assert_eq!(BacktrackingSolver.solve(&f), None);
        let empty = CnfFormula::empty(3);
        assert_eq!(BacktrackingSolver.solve(&empty), Some(Assignment::new()));
    }
}
