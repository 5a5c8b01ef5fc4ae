//! Bounded implication: does some subformula of at most `d` clauses force a
//! literal?
//!
//! Both backends work on the residual formula of a PPSZ step (clauses of the
//! current restriction, at most three literals each).

use std::collections::HashSet;

use crate::cnf::{Lit, Var};

/// How `d`-implication is decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ImplicationBackend {
    /// Exact: some `G ⊆ F` with `|G| ≤ d` leaves no assignment with `u = 0`.
    ExactSubset,
    /// Sound and incomplete: unit propagation from `¬u` reaches a conflict
    /// whose derivation uses at most `d` clauses.
    UnitRefutation,
}

impl ImplicationBackend {
    pub fn name(self) -> &'static str {
        match self {
            ImplicationBackend::ExactSubset => "exact",
            ImplicationBackend::UnitRefutation => "unit",
        }
    }
}

/// A clause of the current restriction, at most three literals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct ResClause {
    lits: [Lit; 3],
    len: u8,
}

impl ResClause {
    pub(crate) fn new(lits: &[Lit]) -> ResClause {
        debug_assert!(lits.len() <= 3);
        let mut arr = [Lit::pos(1); 3];
        arr[..lits.len()].copy_from_slice(lits);
        ResClause {
            lits: arr,
            len: lits.len() as u8,
        }
    }

    pub(crate) fn lits(&self) -> &[Lit] {
        &self.lits[..self.len as usize]
    }

    pub(crate) fn len(&self) -> usize {
        self.len as usize
    }
}

/// Per-call working memory, sized to the variable count.
pub(crate) struct Scratch {
    /// 0 = unassigned, 1 = true, -1 = false.
    values: Vec<i8>,
    reason: Vec<u32>,
    trail: Vec<Var>,
    pref: Vec<bool>,
    visited: HashSet<u64>,
}

const NO_REASON: u32 = u32::MAX;

impl Scratch {
    pub(crate) fn new(num_vars: u32) -> Scratch {
        let n = num_vars as usize + 1;
        Scratch {
            values: vec![0; n],
            reason: vec![NO_REASON; n],
            trail: Vec::new(),
            pref: vec![false; n],
            visited: HashSet::new(),
        }
    }

    /// Majority polarity of each variable in `res`, used to complete witness
    /// assignments in the exact search.
    pub(crate) fn set_preferences(&mut self, res: &[ResClause]) {
        let mut balance = vec![0i32; self.pref.len()];
        for c in res {
            for l in c.lits() {
                balance[l.var() as usize] += if l.is_positive() { 1 } else { -1 };
            }
        }
        for (p, b) in self.pref.iter_mut().zip(balance) {
            *p = b >= 0;
        }
    }
}

/// Decides `d`-implication of `u` by `res`. `Scratch::set_preferences` must
/// have been called for `res`.
pub(crate) fn implies(
    backend: ImplicationBackend,
    res: &[ResClause],
    u: Lit,
    d: usize,
    scratch: &mut Scratch,
) -> bool {
    if d == 0 {
        return false;
    }
    if res.iter().any(|c| c.len() == 0) {
        return true;
    }
    match backend {
        ImplicationBackend::ExactSubset => exact(res, u, d, scratch),
        ImplicationBackend::UnitRefutation => unit_refutation(res, u, d, scratch),
    }
}

enum Search {
    Found,
    Exhausted,
    /// A total assignment with `u = 0` satisfies the whole residual formula.
    Impossible,
}

/// Branching search for a cover of all `u = 0` assignments by at most `d`
/// clauses. At each node a witness `τ` (satisfying the chosen clauses and
/// `¬u`) is found; any cover extending the chosen set must contain a clause
/// falsified by `τ`, so branching over those clauses is complete.
fn exact(res: &[ResClause], u: Lit, d: usize, scratch: &mut Scratch) -> bool {
    scratch.visited.clear();
    let mut chosen = Vec::with_capacity(d);
    let mut sigma = Vec::with_capacity(3 * d + 1);
    matches!(
        exact_node(res, u, d, &mut chosen, &mut sigma, scratch),
        Search::Found
    )
}

fn exact_node(
    res: &[ResClause],
    u: Lit,
    d: usize,
    chosen: &mut Vec<usize>,
    sigma: &mut Vec<(Var, bool)>,
    scratch: &mut Scratch,
) -> Search {
    if d <= 4 && chosen.len() >= 2 {
        let mut key: Vec<usize> = chosen.clone();
        key.sort_unstable();
        let packed = key.iter().fold(0u64, |acc, &i| (acc << 16) | (i as u64 + 1));
        if !scratch.visited.insert(packed) {
            return Search::Exhausted;
        }
    }

    sigma.clear();
    sigma.push((u.var(), !u.is_positive()));
    let chosen_clauses: Vec<ResClause> = chosen.iter().map(|&i| res[i]).collect();
    if !satisfy_small(&chosen_clauses, sigma) {
        return Search::Found;
    }
    if chosen.len() == d {
        return Search::Exhausted;
    }

    // τ = σ completed with preferred values.
    for &(v, b) in sigma.iter() {
        scratch.values[v as usize] = if b { 1 } else { -1 };
    }
    let value = |scratch: &Scratch, l: Lit| -> bool {
        let v = scratch.values[l.var() as usize];
        let b = if v == 0 {
            scratch.pref[l.var() as usize]
        } else {
            v > 0
        };
        l.eval(b)
    };
    let mut candidates: Vec<usize> = res
        .iter()
        .enumerate()
        .filter(|(_, c)| c.lits().iter().all(|&l| !value(scratch, l)))
        .map(|(i, _)| i)
        .collect();
    for &(v, _) in sigma.iter() {
        scratch.values[v as usize] = 0;
    }
    if candidates.is_empty() {
        return Search::Impossible;
    }
    candidates.sort_by_key(|&i| res[i].len());

    let mut local_sigma = Vec::with_capacity(sigma.capacity());
    for i in candidates {
        chosen.push(i);
        let outcome = exact_node(res, u, d, chosen, &mut local_sigma, scratch);
        chosen.pop();
        match outcome {
            Search::Exhausted => {}
            other => return other,
        }
    }
    Search::Exhausted
}

/// Extends `assign` to satisfy every clause of `clauses`; false if impossible.
fn satisfy_small(clauses: &[ResClause], assign: &mut Vec<(Var, bool)>) -> bool {
    let lookup = |assign: &[(Var, bool)], v: Var| {
        assign.iter().find(|(w, _)| *w == v).map(|&(_, b)| b)
    };
    for c in clauses {
        let mut free = [Lit::pos(1); 3];
        let mut n_free = 0;
        let mut sat = false;
        for &l in c.lits() {
            match lookup(assign, l.var()) {
                Some(b) if l.eval(b) => {
                    sat = true;
                    break;
                }
                Some(_) => {}
                None => {
                    free[n_free] = l;
                    n_free += 1;
                }
            }
        }
        if sat {
            continue;
        }
        for &l in &free[..n_free] {
            assign.push((l.var(), l.is_positive()));
            if satisfy_small(clauses, assign) {
                return true;
            }
            assign.pop();
        }
        return false;
    }
    true
}

/// Unit propagation from `¬u`; on a conflict, the clauses in the conflict's
/// derivation form a certificate subformula.
fn unit_refutation(res: &[ResClause], u: Lit, d: usize, scratch: &mut Scratch) -> bool {
    let assign = |scratch: &mut Scratch, l: Lit, reason: u32| {
        scratch.values[l.var() as usize] = if l.is_positive() { 1 } else { -1 };
        scratch.reason[l.var() as usize] = reason;
        scratch.trail.push(l.var());
    };
    assign(scratch, !u, NO_REASON);

    let mut conflict = None;
    'propagate: loop {
        let mut changed = false;
        for (i, c) in res.iter().enumerate() {
            let mut free = None;
            let mut n_free = 0;
            let mut sat = false;
            for &l in c.lits() {
                match scratch.values[l.var() as usize] {
                    0 => {
                        free = Some(l);
                        n_free += 1;
                    }
                    v if (v > 0) == l.is_positive() => {
                        sat = true;
                        break;
                    }
                    _ => {}
                }
            }
            if sat {
                continue;
            }
            match (n_free, free) {
                (0, _) => {
                    conflict = Some(i);
                    break 'propagate;
                }
                (1, Some(l)) => {
                    assign(scratch, l, i as u32);
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            break;
        }
    }

    let result = conflict.is_some_and(|c| certificate_size(res, c, scratch, d) <= d);
    for v in scratch.trail.drain(..) {
        scratch.values[v as usize] = 0;
        scratch.reason[v as usize] = NO_REASON;
    }
    result
}

/// Number of distinct clauses in the derivation of the conflict at `clause`,
/// stopping early once it exceeds `d`.
fn certificate_size(res: &[ResClause], clause: usize, scratch: &Scratch, d: usize) -> usize {
    let mut used = vec![clause];
    let mut stack: Vec<Var> = res[clause].lits().iter().map(|l| l.var()).collect();
    let mut seen_vars: Vec<Var> = Vec::new();
    while let Some(v) = stack.pop() {
        if seen_vars.contains(&v) {
            continue;
        }
        seen_vars.push(v);
        let r = scratch.reason[v as usize];
        if r == NO_REASON {
            continue;
        }
        if !used.contains(&(r as usize)) {
            used.push(r as usize);
            if used.len() > d {
                return used.len();
            }
        }
        stack.extend(res[r as usize].lits().iter().map(|l| l.var()));
    }
    used.len()
}
