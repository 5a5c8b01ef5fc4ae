//! Exhaustive ground truth for small formulas.
//!
//! Everything here is brute force with configurable caps. Tests and the
//! harness use it to check the solvers; nothing in the solvers calls it.

use std::collections::{BTreeMap, HashMap};

use itertools::Itertools;
use num_rational::Ratio;
use thiserror::Error;

use crate::cnf::{Assignment, Clause, CnfError, CnfFormula, Lit, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{n} variables exceed the oracle cap of {cap}")]
    TooManyVariables { n: u32, cap: u32 },
    #[error("{count} candidate subformulas exceed the cap of {cap}")]
    TooManySubsets { count: u128, cap: u128 },
    #[error("assignment does not satisfy the formula")]
    NotSatisfying,
    #[error("assignment must be total on 1..={0}")]
    NotTotal(u32),
    #[error(transparent)]
    Cnf(#[from] CnfError),
}

/// Size caps for the exponential procedures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Oracle {
    /// Maximum number of variables for satisfying-assignment enumeration.
    pub max_vars: u32,
    /// Maximum number of subformulas examined by `d_implies_exact`.
    pub max_subsets: u128,
    /// Maximum number of declared variables for `exact_ppsz_success`.
    pub max_ppsz_vars: u32,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle {
            max_vars: 24,
            max_subsets: 2_000_000,
            max_ppsz_vars: 6,
        }
    }
}

/// Critical clauses of every variable with respect to a reference assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriticalityReport {
    /// Critical clauses per variable; variables without any are absent.
    pub critical: BTreeMap<Var, Vec<Clause>>,
}

impl CriticalityReport {
    pub fn clauses_for(&self, var: Var) -> &[Clause] {
        self.critical.get(&var).map_or(&[], Vec::as_slice)
    }

    /// Variables with at least two critical clauses.
    pub fn multi_critical_count(&self) -> usize {
        self.critical.values().filter(|c| c.len() >= 2).count()
    }

    /// Variables with a critical clause of size at most 2.
    pub fn short_critical_count(&self) -> usize {
        self.critical
            .values()
            .filter(|cs| cs.iter().any(|c| c.len() <= 2))
            .count()
    }

    pub fn has_short_critical(&self, var: Var) -> bool {
        self.clauses_for(var).iter().any(|c| c.len() <= 2)
    }

    /// No variable has two or more critical clauses.
    pub fn is_one_cc(&self) -> bool {
        self.multi_critical_count() == 0
    }
}

impl Oracle {
    fn check_vars(&self, n: usize) -> Result<(), OracleError> {
        if n as u64 > u64::from(self.max_vars) {
            return Err(OracleError::TooManyVariables {
                n: n as u32,
                cap: self.max_vars,
            });
        }
        Ok(())
    }

    /// All satisfying assignments on `vbl(f)`, in lexicographic order.
    pub fn enumerate_satisfying(&self, f: &CnfFormula) -> Result<Vec<Assignment>, OracleError> {
        let mut out = Vec::new();
        self.search(f, usize::MAX, &mut |a| out.push(a.clone()))?;
        Ok(out)
    }

    /// Number of satisfying assignments on `vbl(f)`, counting at most `limit`.
    pub fn count_satisfying(&self, f: &CnfFormula, limit: usize) -> Result<usize, OracleError> {
        let mut count = 0;
        self.search(f, limit, &mut |_| count += 1)?;
        Ok(count)
    }

    pub fn is_uniquely_satisfiable(&self, f: &CnfFormula) -> Result<bool, OracleError> {
        Ok(self.count_satisfying(f, 2)? == 1)
    }

    /// The unique satisfying assignment, if there is exactly one.
    pub fn unique_solution(&self, f: &CnfFormula) -> Result<Option<Assignment>, OracleError> {
        let mut found = Vec::new();
        self.search(f, 2, &mut |a| found.push(a.clone()))?;
        Ok(if found.len() == 1 { found.pop() } else { None })
    }

    /// Depth-first enumeration over `vbl(f)` in ascending order; a clause is
    /// checked as soon as its largest variable is assigned.
    fn search<V: FnMut(&Assignment)>(
        &self,
        f: &CnfFormula,
        limit: usize,
        visit: &mut V,
    ) -> Result<(), OracleError> {
        let vars = f.vars();
        self.check_vars(vars.len())?;
        if f.has_empty_clause() {
            return Ok(());
        }
        let mut closing: Vec<Vec<&Clause>> = vec![Vec::new(); vars.len()];
        for clause in f.clauses() {
            let last = clause.vars().max().expect("non-empty clause");
            let pos = vars.binary_search(&last).expect("clause variable in vbl");
            closing[pos].push(clause);
        }
        let mut alpha = Assignment::with_capacity(f.num_vars());
        let mut found = 0;
        enumerate_rec(&vars, &closing, 0, &mut alpha, limit, &mut found, visit);
        Ok(())
    }

    /// Critical clauses of `f` with respect to `alpha`, which must satisfy `f`.
    pub fn critical_clauses(
        &self,
        f: &CnfFormula,
        alpha: &Assignment,
    ) -> Result<CriticalityReport, OracleError> {
        if !f.evaluate(alpha)? {
            return Err(OracleError::NotSatisfying);
        }
        let mut critical: BTreeMap<Var, Vec<Clause>> = BTreeMap::new();
        for clause in f.clauses() {
            let satisfied: Vec<Lit> = clause
                .lits()
                .iter()
                .copied()
                .filter(|&l| alpha.lit_value(l) == Some(true))
                .collect();
            if let [only] = satisfied[..] {
                critical.entry(only.var()).or_default().push(clause.clone());
            }
        }
        Ok(CriticalityReport { critical })
    }

    /// Whether some subformula of at most `d` clauses has only satisfying
    /// assignments (on its own variables) that set `u` to 1.
    ///
    /// Every subset of clauses is tried and every assignment of its variables
    /// is enumerated.
    pub fn d_implies_exact(&self, f: &CnfFormula, u: Lit, d: usize) -> Result<bool, OracleError> {
        let clauses = f.clauses();
        let m = clauses.len() as u64;
        let count: u128 = (1..=d as u64)
            .map(|k| crate::mathkit::binomial(m, k).unwrap_or(u128::MAX))
            .fold(0u128, |a, b| a.saturating_add(b));
        if count > self.max_subsets {
            return Err(OracleError::TooManySubsets {
                count,
                cap: self.max_subsets,
            });
        }
        for k in 1..=d.min(clauses.len()) {
            for subset in clauses.iter().combinations(k) {
                if subset_forces(&subset, u) {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    /// Exact probability that one PPSZ run with implication bound `d`, a
    /// uniformly random `β` and a uniformly random variable order returns
    /// exactly `alpha`.
    ///
    /// All `n!` orders are enumerated; forcing decisions are memoised on the
    /// set of already-placed variables (which all carry their `alpha` values).
    pub fn exact_ppsz_success(
        &self,
        f: &CnfFormula,
        alpha: &Assignment,
        d: usize,
    ) -> Result<Ratio<u64>, OracleError> {
        let n = f.num_vars();
        if n > self.max_ppsz_vars {
            return Err(OracleError::TooManyVariables {
                n,
                cap: self.max_ppsz_vars,
            });
        }
        if !alpha.is_total(n) {
            return Err(OracleError::NotTotal(n));
        }
        let mut memo: HashMap<(u32, Var), Option<bool>> = HashMap::new();
        let mut forced = |placed: u32, x: Var| -> Result<Option<bool>, OracleError> {
            if let Some(&v) = memo.get(&(placed, x)) {
                return Ok(v);
            }
            let mut gamma = Assignment::with_capacity(n);
            for v in 1..=n {
                if placed & (1 << (v - 1)) != 0 {
                    gamma.set(v, alpha.get(v).expect("total"));
                }
            }
            let restricted = f.restrict(&gamma);
            let value = if self.d_implies_exact(&restricted, Lit::pos(x), d)? {
                Some(true)
            } else if self.d_implies_exact(&restricted, Lit::neg(x), d)? {
                Some(false)
            } else {
                None
            };
            memo.insert((placed, x), value);
            Ok(value)
        };

        // Sum of 2^(n - guesses) over successful orders, over n!·2^n.
        let mut numerator: u64 = 0;
        let mut orders: u64 = 0;
        for order in (1..=n).permutations(n as usize) {
            orders += 1;
            let mut placed = 0u32;
            let mut guesses = 0;
            let mut ok = true;
            for &x in &order {
                match forced(placed, x)? {
                    Some(v) if v != alpha.get(x).expect("total") => {
                        ok = false;
                        break;
                    }
                    Some(_) => {}
                    None => guesses += 1,
                }
                placed |= 1 << (x - 1);
            }
            if ok {
                numerator += 1u64 << (n - guesses);
            }
        }
        Ok(Ratio::new(numerator, orders << n))
    }
}

fn enumerate_rec<V: FnMut(&Assignment)>(
    vars: &[Var],
    closing: &[Vec<&Clause>],
    depth: usize,
    alpha: &mut Assignment,
    limit: usize,
    found: &mut usize,
    visit: &mut V,
) {
    if *found >= limit {
        return;
    }
    if depth == vars.len() {
        *found += 1;
        visit(alpha);
        return;
    }
    let var = vars[depth];
    for value in [false, true] {
        alpha.set(var, value);
        let ok = closing[depth]
            .iter()
            .all(|c| c.lits().iter().any(|&l| alpha.lit_value(l) == Some(true)));
        if ok {
            enumerate_rec(vars, closing, depth + 1, alpha, limit, found, visit);
        }
    }
    alpha.unset(var);
}

/// Whether every assignment on `vbl(subset)` satisfying `subset` sets `u` to 1.
fn subset_forces(subset: &[&Clause], u: Lit) -> bool {
    let mut vars: Vec<Var> = subset.iter().flat_map(|c| c.vars()).collect();
    vars.sort_unstable();
    vars.dedup();
    let u_inside = vars.contains(&u.var());
    let mut alpha = Assignment::with_capacity(vars.last().copied().unwrap_or(0));
    for bits in 0u64..(1u64 << vars.len()) {
        for (i, &v) in vars.iter().enumerate() {
            alpha.set(v, bits >> i & 1 == 1);
        }
        let sat = subset
            .iter()
            .all(|c| c.lits().iter().any(|&l| alpha.lit_value(l) == Some(true)));
        if sat && !(u_inside && alpha.lit_value(u) == Some(true)) {
            return false;
        }
    }
    true
}
