//! Planted instance families for tests and experiments.
//!
//! Most families come from an *ordered builder*: variables are processed in a
//! random order and each receives one clause that is critical for it under
//! the planted `α`, with all other literals over earlier variables. Unit
//! propagation along the order then recovers `α`, so the result is uniquely
//! satisfiable. Extra clauses with two `α`-true literals are never critical,
//! so they keep both uniqueness and the one-critical-clause property.
//! Whenever `n` is within the oracle cap the claimed properties are checked
//! again by brute force before the instance is returned.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use thiserror::Error;

use crate::cnf::{Assignment, Clause, CnfFormula, Lit, Var};
use crate::oracle::{Oracle, OracleError};
use crate::seed::{derive_seed, rng_from_seed, SolverRng};

/// Seeds tried before a generator gives up.
pub const RETRY_BUDGET: u64 = 1000;

/// Variables per hub: the center and ten leaves.
pub const HUB_SIZE: u32 = 11;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("n = {n} is too small (need at least {min})")]
    TooSmall { n: u32, min: u32 },
    #[error("n = {n} exceeds the verification cap {cap}")]
    TooLarge { n: u32, cap: u32 },
    #[error("no valid instance within {0} seeds")]
    RetriesExhausted(u64),
    #[error("generated instance failed verification: {0}")]
    Verification(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    GenericUnique,
    OneCc,
    Chain,
    DensePlanted,
    SparsePlanted,
    MultiCritical,
    /// Satisfied by `alpha`; uniqueness not verified.
    Planted,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::GenericUnique,
        Family::OneCc,
        Family::Chain,
        Family::DensePlanted,
        Family::SparsePlanted,
        Family::MultiCritical,
        Family::Planted,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::GenericUnique => "generic-unique",
            Family::OneCc => "one-cc",
            Family::Chain => "chain",
            Family::DensePlanted => "dense-planted",
            Family::SparsePlanted => "sparse-planted",
            Family::MultiCritical => "multi-critical",
            Family::Planted => "planted",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Family, String> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown family `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedInstance {
    pub formula: CnfFormula,
    pub alpha: Assignment,
    pub family: Family,
    pub seed: u64,
    /// Uniqueness (and the family property) was checked by the oracle.
    pub verified: bool,
}

impl PlantedInstance {
    /// Sidecar metadata as `key=value` lines.
    pub fn metadata(&self) -> String {
        let alpha = self
            .alpha
            .to_dimacs()
            .iter()
            .map(i64::to_string)
            .collect::<Vec<_>>()
            .join(" ");
        format!(
            "family={}\nseed={}\nn={}\nalpha={}\nunique={}\n",
            self.family,
            self.seed,
            self.formula.num_vars(),
            alpha,
            if self.verified { "verified" } else { "unverified" }
        )
    }
}

/// Parsed sidecar metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Metadata {
    pub family: Family,
    pub seed: u64,
    pub n: u32,
    pub alpha: Assignment,
    pub verified: bool,
}

pub fn parse_metadata(text: &str) -> Result<Metadata, String> {
    let mut family = None;
    let mut seed = None;
    let mut n = None;
    let mut alpha = None;
    let mut verified = false;
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("malformed metadata line `{line}`"))?;
        match key {
            "family" => family = Some(value.parse::<Family>()?),
            "seed" => seed = Some(value.parse().map_err(|e| format!("seed: {e}"))?),
            "n" => n = Some(value.parse().map_err(|e| format!("n: {e}"))?),
            "alpha" => {
                let lits = value
                    .split_whitespace()
                    .map(|t| t.parse::<i64>().map_err(|e| format!("alpha: {e}")))
                    .collect::<Result<Vec<_>, _>>()?;
                alpha = Some(Assignment::from_dimacs(&lits).map_err(|e| e.to_string())?);
            }
            "unique" => verified = value == "verified",
            _ => {}
        }
    }
    Ok(Metadata {
        family: family.ok_or("metadata lacks `family`")?,
        seed: seed.ok_or("metadata lacks `seed`")?,
        n: n.ok_or("metadata lacks `n`")?,
        alpha: alpha.ok_or("metadata lacks `alpha`")?,
        verified,
    })
}

fn random_alpha(n: u32, rng: &mut SolverRng) -> Assignment {
    let bits: Vec<bool> = (0..n).map(|_| rng.random()).collect();
    Assignment::from_bools(&bits)
}

/// The literal over `v` that `alpha` makes true.
fn true_lit(alpha: &Assignment, v: Var) -> Lit {
    Lit::new(v, alpha.get(v).expect("alpha is total"))
}

fn clause(lits: impl IntoIterator<Item = Lit>) -> Clause {
    Clause::new(lits).expect("distinct variables")
}

/// `{ℓ_v, ¬ℓ_a, ¬ℓ_b, …}`: critical for `v` alone.
fn critical_clause(alpha: &Assignment, v: Var, companions: &[Var]) -> Clause {
    clause(std::iter::once(true_lit(alpha, v)).chain(companions.iter().map(|&u| !true_lit(alpha, u))))
}

/// A random clause over `vars` with at least two `α`-true literals.
fn noncritical_clause(alpha: &Assignment, vars: &[Var], rng: &mut SolverRng) -> Clause {
    let false_at = if vars.len() == 3 && rng.random_bool(0.5) {
        Some(rng.random_range(0..3))
    } else {
        None
    };
    clause(vars.iter().enumerate().map(|(i, &v)| {
        let l = true_lit(alpha, v);
        if Some(i) == false_at {
            !l
        } else {
            l
        }
    }))
}

fn assemble(n: u32, clauses: BTreeSet<Clause>) -> CnfFormula {
    CnfFormula::new(n, clauses).expect("variables in range")
}

/// Checks the family's claims with the oracle when `n` is within its cap.
fn finish(formula: CnfFormula, alpha: Assignment, family: Family, seed: u64) -> Result<PlantedInstance, GenError> {
    if !formula.evaluate(&alpha).map_err(|e| GenError::Verification(e.to_string()))? {
        return Err(GenError::Verification("alpha does not satisfy the formula".into()));
    }
    let oracle = Oracle::default();
    if formula.num_vars() > oracle.max_vars {
        return Ok(PlantedInstance {
            formula,
            alpha,
            family: Family::Planted,
            seed,
            verified: false,
        });
    }
    if oracle.unique_solution(&formula)?.as_ref() != Some(&alpha) {
        return Err(GenError::Verification("not uniquely satisfiable".into()));
    }
    let report = oracle.critical_clauses(&formula, &alpha)?;
    let ok = match family {
        Family::OneCc | Family::Chain | Family::DensePlanted | Family::SparsePlanted => report.is_one_cc(),
        Family::MultiCritical => report.multi_critical_count() == formula.num_vars() as usize,
        Family::GenericUnique | Family::Planted => true,
    };
    if !ok {
        return Err(GenError::Verification(format!("{family} property fails")));
    }
    Ok(PlantedInstance {
        formula,
        alpha,
        family,
        seed,
        verified: true,
    })
}

/// Random `α`-satisfied clauses until only `α` survives; the surviving set is
/// tracked by filtering bit masks. Retries with derived seeds when
/// `clause_budget` clauses do not suffice.
pub fn gen_unique(n: u32, clause_budget: usize, seed: u64) -> Result<PlantedInstance, GenError> {
    const MASK_CAP: u32 = 20;
    if n == 0 {
        return Err(GenError::TooSmall { n, min: 1 });
    }
    if n > MASK_CAP {
        return Err(GenError::TooLarge { n, cap: MASK_CAP });
    }
    let width = n.min(3) as usize;
    let all: Vec<Var> = (1..=n).collect();
    for attempt in 0..RETRY_BUDGET {
        let mut rng = rng_from_seed(derive_seed(seed, attempt));
        let alpha = random_alpha(n, &mut rng);
        let alpha_mask: u32 = (1..=n).filter(|&v| alpha.get(v) == Some(true)).map(|v| 1 << (v - 1)).sum();
        let mut alive: Vec<u32> = (0..1u32 << n).collect();
        let mut clauses = BTreeSet::new();
        let mut draws = 0;
        while clauses.len() < clause_budget && alive.len() > 1 && draws < 50 * clause_budget {
            draws += 1;
            let vars: Vec<Var> = all.choose_multiple(&mut rng, width).copied().collect();
            let lits: Vec<Lit> = vars.iter().map(|&v| Lit::new(v, rng.random())).collect();
            if !lits.iter().any(|l| l.eval(alpha_mask >> (l.var() - 1) & 1 == 1)) {
                continue;
            }
            let c = clause(lits);
            alive.retain(|&m| c.lits().iter().any(|l| l.eval(m >> (l.var() - 1) & 1 == 1)));
            clauses.insert(c);
        }
        if alive == [alpha_mask] {
            return finish(assemble(n, clauses), alpha, Family::GenericUnique, seed);
        }
    }
    Err(GenError::RetriesExhausted(RETRY_BUDGET))
}

/// Default clause budget of `gen_unique`.
pub fn default_clause_budget(n: u32) -> usize {
    20 * n as usize + 10
}

/// Per-variable critical clauses along a random order.
struct OrderedBuild {
    alpha: Assignment,
    clauses: BTreeSet<Clause>,
}

/// `max_deg3` limits how many 3-clauses a variable may appear in;
/// `three_prob` is the chance of a 3-clause where one is allowed.
fn ordered_build(n: u32, three_prob: f64, max_deg3: usize, rng: &mut SolverRng) -> OrderedBuild {
    let alpha = random_alpha(n, rng);
    let mut order: Vec<Var> = (1..=n).collect();
    order.shuffle(rng);
    let mut deg3 = vec![0usize; n as usize + 1];
    let mut clauses = BTreeSet::new();
    for (i, &v) in order.iter().enumerate() {
        let c = match i {
            0 => critical_clause(&alpha, v, &[]),
            1 => critical_clause(&alpha, v, &[order[0]]),
            _ => {
                let open: Vec<Var> = order[..i]
                    .iter()
                    .copied()
                    .filter(|&u| deg3[u as usize] < max_deg3)
                    .collect();
                if deg3[v as usize] < max_deg3 && open.len() >= 2 && rng.random_bool(three_prob) {
                    let pair: Vec<Var> = open.choose_multiple(rng, 2).copied().collect();
                    for &u in pair.iter().chain([&v]) {
                        deg3[u as usize] += 1;
                    }
                    critical_clause(&alpha, v, &pair)
                } else {
                    critical_clause(&alpha, v, &[order[rng.random_range(0..i)]])
                }
            }
        };
        clauses.insert(c);
    }
    OrderedBuild { alpha, clauses }
}

/// Uniquely satisfiable, every variable with exactly one critical clause,
/// plus `n` non-critical 3-clauses.
pub fn gen_one_cc(n: u32, seed: u64) -> Result<PlantedInstance, GenError> {
    if n == 0 {
        return Err(GenError::TooSmall { n, min: 1 });
    }
    let mut rng = rng_from_seed(seed);
    let mut b = ordered_build(n, 0.5, usize::MAX, &mut rng);
    if n >= 3 {
        let all: Vec<Var> = (1..=n).collect();
        for _ in 0..n {
            let vars: Vec<Var> = all.choose_multiple(&mut rng, 3).copied().collect();
            b.clauses.insert(noncritical_clause(&b.alpha, &vars, &mut rng));
        }
    }
    finish(assemble(n, b.clauses), b.alpha, Family::OneCc, seed)
}

/// `{x1}, {x̄1, x2}, …, {x̄(n−1), xn}` with `α` all ones.
pub fn chain(n: u32) -> PlantedInstance {
    chain_for(&Assignment::from_bools(&vec![true; n as usize]))
}

/// The chain with literals oriented by `alpha` (total on `1..=n`).
pub fn chain_for(alpha: &Assignment) -> PlantedInstance {
    let n = alpha.len() as u32;
    let clauses: BTreeSet<Clause> = (1..=n)
        .map(|v| {
            if v == 1 {
                critical_clause(alpha, 1, &[])
            } else {
                critical_clause(alpha, v, &[v - 1])
            }
        })
        .collect();
    PlantedInstance {
        formula: assemble(n, clauses),
        alpha: alpha.clone(),
        family: Family::Chain,
        seed: 0,
        verified: false,
    }
}

/// The chain for a random `α` plus a second critical clause per variable:
/// `{ℓ1, ¬ℓ2}` for x1, `{ℓ2}` for x2 and `{ℓi, ¬ℓa, ¬ℓb}` with `a < b < i`
/// for the rest. It contains `chain_for(α)`, so it stays uniquely
/// satisfiable, and each variable has exactly two critical clauses.
pub fn gen_multi_critical(n: u32, seed: u64) -> Result<PlantedInstance, GenError> {
    if n < 2 {
        return Err(GenError::TooSmall { n, min: 2 });
    }
    let mut rng = rng_from_seed(seed);
    let alpha = random_alpha(n, &mut rng);
    let mut clauses: BTreeSet<Clause> = chain_for(&alpha).formula.clauses().iter().cloned().collect();
    clauses.insert(critical_clause(&alpha, 1, &[2]));
    clauses.insert(critical_clause(&alpha, 2, &[]));
    for v in 3..=n {
        let earlier: Vec<Var> = (1..v).collect();
        let pair: Vec<Var> = earlier.choose_multiple(&mut rng, 2).copied().collect();
        clauses.insert(critical_clause(&alpha, v, &pair));
    }
    finish(assemble(n, clauses), alpha, Family::MultiCritical, seed)
}

/// `hubs` centers, each in five 3-clauses whose other two literals are ten
/// distinct leaves. Hub clauses have both leaf literals `α`-true, except that
/// with `critical_hub` the first hub clause of every center has both leaf
/// literals false and serves as the center's critical clause. All other
/// variables get a 2-clause or unit critical clause along a random order,
/// so only the centers reach 3-clause degree 5.
pub fn gen_dense_planted(n: u32, hubs: u32, critical_hub: bool, seed: u64) -> Result<PlantedInstance, GenError> {
    let min = (hubs * HUB_SIZE).max(1);
    if hubs == 0 || n < min {
        return Err(GenError::TooSmall { n, min: min.max(HUB_SIZE) });
    }
    let mut rng = rng_from_seed(seed);
    let alpha = random_alpha(n, &mut rng);
    let mut vars: Vec<Var> = (1..=n).collect();
    vars.shuffle(&mut rng);
    let (hub_vars, rest) = vars.split_at((hubs * HUB_SIZE) as usize);
    let mut centers = Vec::new();
    let mut clauses = BTreeSet::new();
    for hub in hub_vars.chunks(HUB_SIZE as usize) {
        let center = hub[0];
        centers.push(center);
        for (j, leaves) in hub[1..].chunks(2).enumerate() {
            let center_lit = if critical_hub && j == 0 {
                true_lit(&alpha, center)
            } else {
                Lit::new(center, rng.random())
            };
            let leaf_lits = leaves.iter().map(|&u| {
                if critical_hub && j == 0 {
                    !true_lit(&alpha, u)
                } else {
                    true_lit(&alpha, u)
                }
            });
            clauses.insert(clause(std::iter::once(center_lit).chain(leaf_lits)));
        }
    }

    let mut order: Vec<Var> = hub_vars
        .iter()
        .copied()
        .filter(|v| !centers.contains(v))
        .chain(rest.iter().copied())
        .collect();
    order.shuffle(&mut rng);
    for (i, &v) in order.iter().enumerate() {
        let c = if i == 0 {
            critical_clause(&alpha, v, &[])
        } else {
            critical_clause(&alpha, v, &[order[rng.random_range(0..i)]])
        };
        clauses.insert(c);
    }
    if !critical_hub {
        for &c in &centers {
            let other = order[rng.random_range(0..order.len())];
            clauses.insert(critical_clause(&alpha, c, &[other]));
        }
    }
    finish(assemble(n, clauses), alpha, Family::DensePlanted, seed)
}

/// Ordered build with 3-clause degree capped at 4, plus twice as many
/// non-critical 2-clauses as there are critical clauses of size ≤ 2.
pub fn gen_sparse_planted(n: u32, seed: u64) -> Result<PlantedInstance, GenError> {
    if n < 4 {
        return Err(GenError::TooSmall { n, min: 4 });
    }
    for attempt in 0..RETRY_BUDGET {
        let mut rng = rng_from_seed(derive_seed(seed, attempt));
        let mut b = ordered_build(n, 0.6, 4, &mut rng);
        let critical_short = b.clauses.iter().filter(|c| c.len() <= 2).count();
        let pairs: Vec<(Var, Var)> = (1..=n).flat_map(|a| (a + 1..=n).map(move |b| (a, b))).collect();
        let extra: Vec<Clause> = pairs
            .iter()
            .map(|&(x, y)| clause([true_lit(&b.alpha, x), true_lit(&b.alpha, y)]))
            .filter(|c| !b.clauses.contains(c))
            .collect();
        if extra.len() < 2 * critical_short {
            continue;
        }
        b.clauses.extend(extra.choose_multiple(&mut rng, 2 * critical_short).cloned());
        return finish(assemble(n, b.clauses), b.alpha, Family::SparsePlanted, seed);
    }
    Err(GenError::RetriesExhausted(RETRY_BUDGET))
}

/// `m` distinct 2-clauses whose literals are both true under a random `α`.
/// Satisfied by `α` but not unique.
pub fn gen_noncritical_pairs(n: u32, m: usize, seed: u64) -> Result<PlantedInstance, GenError> {
    let pairs = n as usize * (n as usize).saturating_sub(1) / 2;
    if m > pairs {
        return Err(GenError::TooSmall { n, min: n + 1 });
    }
    let mut rng = rng_from_seed(seed);
    let alpha = random_alpha(n, &mut rng);
    let mut clauses = BTreeSet::new();
    let all: Vec<Var> = (1..=n).collect();
    while clauses.len() < m {
        let vars: Vec<Var> = all.choose_multiple(&mut rng, 2).copied().collect();
        clauses.insert(noncritical_clause(&alpha, &vars, &mut rng));
    }
    Ok(PlantedInstance {
        formula: assemble(n, clauses),
        alpha,
        family: Family::Planted,
        seed,
        verified: false,
    })
}

/// Dispatch by family with default parameters.
pub fn generate(family: Family, n: u32, hubs: u32, critical_hub: bool, seed: u64) -> Result<PlantedInstance, GenError> {
    match family {
        Family::GenericUnique => gen_unique(n, default_clause_budget(n), seed),
        Family::OneCc => gen_one_cc(n, seed),
        Family::Chain => {
            let mut inst = chain(n);
            inst.seed = seed;
            finish(inst.formula, inst.alpha, Family::Chain, seed)
        }
        Family::DensePlanted => gen_dense_planted(n, hubs.max(1), critical_hub, seed),
        Family::SparsePlanted => gen_sparse_planted(n, seed),
        Family::MultiCritical => gen_multi_critical(n, seed),
        Family::Planted => gen_noncritical_pairs(n, n as usize, seed),
    }
}
