//! CNF formulas over 1-based integer variables.
//!
//! Clauses are sets of literals over pairwise distinct variables and formulas
//! are sets of clauses: both are kept sorted and deduplicated, so two formulas
//! compare equal exactly when they contain the same clauses.

mod dimacs;

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Not;

use thiserror::Error;

pub use dimacs::{parse_dimacs, write_dimacs, ParseError};

/// A propositional variable, 1-based.
pub type Var = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CnfError {
    #[error("variable index 0 is not allowed")]
    ZeroVariable,
    #[error("clause contains both polarities of variable {0}")]
    Tautology(Var),
    #[error("variable {var} exceeds the declared variable count {num_vars}")]
    VarOutOfRange { var: Var, num_vars: u32 },
    #[error("assignment does not define variable {0}")]
    Unassigned(Var),
}

/// A literal: a variable together with a polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit {
    var: Var,
    positive: bool,
}

impl Lit {
    /// # Panics
    ///
    /// If `var` is 0.
    pub fn new(var: Var, positive: bool) -> Lit {
        assert!(var >= 1, "variables are 1-based");
        Lit { var, positive }
    }

    pub fn pos(var: Var) -> Lit {
        Lit::new(var, true)
    }

    pub fn neg(var: Var) -> Lit {
        Lit::new(var, false)
    }

    /// Signed DIMACS encoding; `None` for 0 or out-of-range values.
    pub fn from_dimacs(value: i64) -> Option<Lit> {
        if value == 0 {
            return None;
        }
        let var = Var::try_from(value.unsigned_abs()).ok()?;
        Some(Lit::new(var, value > 0))
    }

    pub fn to_dimacs(self) -> i64 {
        if self.positive {
            i64::from(self.var)
        } else {
            -i64::from(self.var)
        }
    }

    pub fn var(self) -> Var {
        self.var
    }

    pub fn is_positive(self) -> bool {
        self.positive
    }

    /// Truth value of the literal when its variable takes `value`.
    pub fn eval(self, value: bool) -> bool {
        value == self.positive
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit {
            var: self.var,
            positive: !self.positive,
        }
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A clause: a sorted set of literals over pairwise distinct variables.
///
/// The empty clause is representable and is unsatisfiable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Clause {
    lits: Vec<Lit>,
}

impl Clause {
    /// Builds a clause, collapsing repeated literals. Fails on `x ∨ ¬x`.
    pub fn new<I: IntoIterator<Item = Lit>>(lits: I) -> Result<Clause, CnfError> {
        let mut lits: Vec<Lit> = lits.into_iter().collect();
        lits.sort_unstable();
        lits.dedup();
        for pair in lits.windows(2) {
            if pair[0].var == pair[1].var {
                return Err(CnfError::Tautology(pair[0].var));
            }
        }
        Ok(Clause { lits })
    }

    /// Builds a clause from signed DIMACS integers.
    pub fn from_dimacs(values: &[i64]) -> Result<Clause, CnfError> {
        let lits = values
            .iter()
            .map(|&v| Lit::from_dimacs(v).ok_or(CnfError::ZeroVariable))
            .collect::<Result<Vec<_>, _>>()?;
        Clause::new(lits)
    }

    pub fn empty() -> Clause {
        Clause { lits: Vec::new() }
    }

    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.lits.iter().map(|l| l.var)
    }

    pub fn contains_var(&self, var: Var) -> bool {
        self.lits.iter().any(|l| l.var == var)
    }

    /// The literal of this clause over `var`, if any.
    pub fn lit_over(&self, var: Var) -> Option<Lit> {
        self.lits.iter().copied().find(|l| l.var == var)
    }

    /// The clause with the literal over `var` removed.
    pub fn without_var(&self, var: Var) -> Clause {
        Clause {
            lits: self.lits.iter().copied().filter(|l| l.var != var).collect(),
        }
    }

    /// Number of literals satisfied by `alpha`; undefined variables count as
    /// unsatisfied.
    pub fn satisfied_count(&self, alpha: &Assignment) -> usize {
        self.lits
            .iter()
            .filter(|l| alpha.lit_value(**l) == Some(true))
            .count()
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for lit in &self.lits {
            write!(f, "{lit} ")?;
        }
        write!(f, "0")
    }
}

/// A CNF formula: a set of clauses over variables `1..=num_vars`.
///
/// `num_vars` is declared, not inferred, so unused indices are legal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Clause>,
}

impl CnfFormula {
    pub fn new<I: IntoIterator<Item = Clause>>(
        num_vars: u32,
        clauses: I,
    ) -> Result<CnfFormula, CnfError> {
        let mut clauses: Vec<Clause> = clauses.into_iter().collect();
        for clause in &clauses {
            if let Some(lit) = clause.lits.iter().find(|l| l.var > num_vars) {
                return Err(CnfError::VarOutOfRange {
                    var: lit.var,
                    num_vars,
                });
            }
        }
        clauses.sort_unstable();
        clauses.dedup();
        Ok(CnfFormula { num_vars, clauses })
    }

    /// Convenience constructor from signed DIMACS clause lists.
    pub fn from_dimacs_clauses<C: AsRef<[i64]>>(
        num_vars: u32,
        clauses: &[C],
    ) -> Result<CnfFormula, CnfError> {
        let clauses = clauses
            .iter()
            .map(|c| Clause::from_dimacs(c.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        CnfFormula::new(num_vars, clauses)
    }

    pub fn empty(num_vars: u32) -> CnfFormula {
        CnfFormula {
            num_vars,
            clauses: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
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

    /// The variables occurring in some clause, ascending.
    pub fn vars(&self) -> Vec<Var> {
        let set: BTreeSet<Var> = self.clauses.iter().flat_map(|c| c.vars()).collect();
        set.into_iter().collect()
    }

    pub fn max_clause_len(&self) -> usize {
        self.clauses.iter().map(Clause::len).max().unwrap_or(0)
    }

    pub fn has_empty_clause(&self) -> bool {
        self.clauses.first().is_some_and(Clause::is_empty)
    }

    /// Number of clauses containing `var`.
    pub fn degree(&self, var: Var) -> usize {
        self.clauses.iter().filter(|c| c.contains_var(var)).count()
    }

    /// Number of 3-clauses containing `var`.
    pub fn degree3(&self, var: Var) -> usize {
        self.clauses
            .iter()
            .filter(|c| c.len() == 3 && c.contains_var(var))
            .count()
    }

    /// Largest 3-clause degree over all declared variables.
    pub fn max_degree3(&self) -> usize {
        let mut deg = vec![0usize; self.num_vars as usize + 1];
        for clause in self.clauses.iter().filter(|c| c.len() == 3) {
            for v in clause.vars() {
                deg[v as usize] += 1;
            }
        }
        deg.into_iter().max().unwrap_or(0)
    }

    /// The clauses that mention no variable of `w`.
    pub fn independent_part(&self, w: &BTreeSet<Var>) -> CnfFormula {
        CnfFormula {
            num_vars: self.num_vars,
            clauses: self
                .clauses
                .iter()
                .filter(|c| !c.vars().any(|v| w.contains(&v)))
                .cloned()
                .collect(),
        }
    }

    /// Applies a partial assignment: satisfied clauses disappear, falsified
    /// literals are deleted. An emptied clause is kept.
    pub fn restrict(&self, gamma: &Assignment) -> CnfFormula {
        let mut clauses = Vec::with_capacity(self.clauses.len());
        'outer: for clause in &self.clauses {
            let mut kept = Vec::with_capacity(clause.len());
            for &lit in &clause.lits {
                match gamma.lit_value(lit) {
                    Some(true) => continue 'outer,
                    Some(false) => {}
                    None => kept.push(lit),
                }
            }
            clauses.push(Clause { lits: kept });
        }
        clauses.sort_unstable();
        clauses.dedup();
        CnfFormula {
            num_vars: self.num_vars,
            clauses,
        }
    }

    /// Whether `alpha` satisfies every clause. `alpha` must define every
    /// variable occurring in the formula.
    pub fn evaluate(&self, alpha: &Assignment) -> Result<bool, CnfError> {
        let mut all = true;
        for clause in &self.clauses {
            let mut sat = false;
            for &lit in &clause.lits {
                match alpha.lit_value(lit) {
                    Some(v) => sat |= v,
                    None => return Err(CnfError::Unassigned(lit.var)),
                }
            }
            all &= sat;
        }
        Ok(all)
    }

    /// `evaluate` for callers that already know `alpha` is total.
    pub fn is_satisfied_by(&self, alpha: &Assignment) -> bool {
        self.evaluate(alpha).unwrap_or(false)
    }
}

impl fmt::Display for CnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&write_dimacs(self))
    }
}

/// A (partial) truth assignment: a map from variables to booleans.
///
/// The domain is the set of defined variables. A total assignment on
/// `1..=n` is just an assignment whose domain is that range.
#[derive(Debug, Clone, Default, Eq)]
pub struct Assignment {
    values: Vec<Option<bool>>,
}

/// Partial assignments share the representation of total ones.
pub type PartialAssignment = Assignment;

impl Assignment {
    pub fn new() -> Assignment {
        Assignment { values: Vec::new() }
    }

    pub fn with_capacity(num_vars: u32) -> Assignment {
        Assignment {
            values: vec![None; num_vars as usize + 1],
        }
    }

    /// Total assignment on `1..=values.len()`.
    pub fn from_bools(values: &[bool]) -> Assignment {
        let mut a = Assignment::with_capacity(values.len() as u32);
        for (i, &v) in values.iter().enumerate() {
            a.values[i + 1] = Some(v);
        }
        a
    }

    /// Assignment from a list of signed literals (`3` sets x3, `-3` clears it).
    pub fn from_dimacs(lits: &[i64]) -> Result<Assignment, CnfError> {
        let mut a = Assignment::new();
        for &l in lits {
            let lit = Lit::from_dimacs(l).ok_or(CnfError::ZeroVariable)?;
            a.set(lit.var, lit.positive);
        }
        Ok(a)
    }

    pub fn get(&self, var: Var) -> Option<bool> {
        self.values.get(var as usize).copied().flatten()
    }

    pub fn set(&mut self, var: Var, value: bool) {
        let idx = var as usize;
        if idx >= self.values.len() {
            self.values.resize(idx + 1, None);
        }
        self.values[idx] = Some(value);
    }

    pub fn unset(&mut self, var: Var) {
        if let Some(slot) = self.values.get_mut(var as usize) {
            *slot = None;
        }
    }

    /// Makes `lit` true.
    pub fn set_lit(&mut self, lit: Lit) {
        self.set(lit.var, lit.positive);
    }

    pub fn lit_value(&self, lit: Lit) -> Option<bool> {
        self.get(lit.var).map(|v| lit.eval(v))
    }

    pub fn is_defined(&self, var: Var) -> bool {
        self.get(var).is_some()
    }

    /// Defined `(variable, value)` pairs in ascending variable order.
    pub fn iter(&self) -> impl Iterator<Item = (Var, bool)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|b| (i as Var, b)))
    }

    pub fn domain(&self) -> Vec<Var> {
        self.iter().map(|(v, _)| v).collect()
    }

    /// Number of defined variables.
    pub fn len(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Whether every variable of `1..=num_vars` is defined.
    pub fn is_total(&self, num_vars: u32) -> bool {
        (1..=num_vars).all(|v| self.is_defined(v))
    }

    /// Agreement on the common domain.
    pub fn consistent_with(&self, other: &Assignment) -> bool {
        self.iter().all(|(v, b)| other.get(v).is_none_or(|c| c == b))
    }

    /// Union of two consistent assignments; `None` on a conflict.
    pub fn union(&self, other: &Assignment) -> Option<Assignment> {
        if !self.consistent_with(other) {
            return None;
        }
        let mut out = self.clone();
        for (v, b) in other.iter() {
            out.set(v, b);
        }
        Some(out)
    }

    /// The restriction to the variables in `vars`.
    pub fn restricted_to<I: IntoIterator<Item = Var>>(&self, vars: I) -> Assignment {
        let mut out = Assignment::new();
        for v in vars {
            if let Some(b) = self.get(v) {
                out.set(v, b);
            }
        }
        out
    }

    /// Signed literal list, ascending by variable.
    pub fn to_dimacs(&self) -> Vec<i64> {
        self.iter().map(|(v, b)| Lit::new(v, b).to_dimacs()).collect()
    }
}

impl PartialEq for Assignment {
    fn eq(&self, other: &Assignment) -> bool {
        let n = self.values.len().max(other.values.len());
        (0..n as Var).all(|v| self.get(v) == other.get(v))
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for lit in self.to_dimacs() {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{lit}")?;
        }
        Ok(())
    }
}
