//! Constants, integrals and bounds from the running-time analysis.
//!
//! Asymptotic `o(1)` terms are dropped everywhere: these are the limiting
//! constants only. Logarithms are base 2 unless written `ln`.

use std::f64::consts::LN_2;

use thiserror::Error;

/// Absolute tolerance used for every quadrature in this module.
pub const QUADRATURE_TOL: f64 = 1e-10;

const MAX_DEPTH: u32 = 48;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("argument {0} is outside [0, 1]")]
pub struct DomainError(pub f64);

fn check_unit(p: f64) -> Result<(), DomainError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(DomainError(p))
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance
/// `tol`. Leaf contributions are accumulated with Neumaier summation.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut acc = Neumaier::default();
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH, &mut acc);
    acc.sum()
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    acc: &mut Neumaier,
) {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        acc.add(left + right + delta / 15.0);
        return;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, acc);
    simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, acc);
}

#[derive(Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn sum(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Integral over `[a, 1]` split at `r = 1/2`, the kink of the forcing bound.
fn integrate_unit<F: Fn(f64) -> f64>(f: F, a: f64) -> f64 {
    integrate_split(f, a, &[0.5])
}

/// Integral over `[a, 1]` split at the given interior kinks.
fn integrate_split<F: Fn(f64) -> f64>(f: F, a: f64, kinks: &[f64]) -> f64 {
    let mut pts = vec![a];
    pts.extend(kinks.iter().copied().filter(|&k| k > a && k < 1.0));
    pts.push(1.0);
    pts.sort_by(f64::total_cmp);
    let tol = QUADRATURE_TOL / (pts.len() - 1) as f64;
    pts.windows(2)
        .map(|w| adaptive_simpson(&f, w[0], w[1], tol))
        .sum()
}

/// Root of a sign-changing `g` on `[lo, hi]`.
fn bisect<G: Fn(f64) -> f64>(g: G, mut lo: f64, mut hi: f64) -> f64 {
    let neg_lo = g(lo) < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (g(mid) < 0.0) == neg_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `min{1, r²/(1−r)²}`: the limiting lower bound on the probability that a
/// variable at place `r` is forced.
pub fn forcing_bound(r: f64) -> f64 {
    if r >= 0.5 {
        1.0
    } else {
        let q = r / (1.0 - r);
        q * q
    }
}

/// `S = 2 ln 2 − 1`, the limiting guessed fraction of plain PPSZ.
pub fn s_constant() -> f64 {
    2.0 * LN_2 - 1.0
}

/// `S` by quadrature of `1 − min{1, r²/(1−r)²}` over `[0, 1]`.
pub fn s_constant_quadrature() -> f64 {
    integrate_unit(|r| 1.0 - forcing_bound(r), 0.0)
}

/// `∫₀^p r²/(1−r)² dr = 1/(1−p) + 2 ln(1−p) + p − 1` for `p < 1`.
pub fn early_forcing_integral(p: f64) -> f64 {
    1.0 / (1.0 - p) + 2.0 * (-p).ln_1p() + p - 1.0
}

/// `S_p`: the guessing integral started at `p` instead of 0.
pub fn s_p(p: f64) -> Result<f64, DomainError> {
    check_unit(p)?;
    if p >= 0.5 {
        return Ok(0.0);
    }
    Ok(s_constant() - p + early_forcing_integral(p))
}

/// `S_p` by direct quadrature of its defining integral.
pub fn s_p_quadrature(p: f64) -> Result<f64, DomainError> {
    check_unit(p)?;
    Ok(integrate_unit(|r| 1.0 - forcing_bound(r), p))
}

/// Binary entropy in bits, with `0 log 0 = 0`.
pub fn entropy(p: f64) -> Result<f64, DomainError> {
    check_unit(p)?;
    let term = |x: f64, one_minus_x: f64| {
        if x == 0.0 {
            0.0
        } else {
            // log2(x) written via ln_1p when x is near 1.
            let ln = if x > 0.5 { (-one_minus_x).ln_1p() } else { x.ln() };
            -x * ln / LN_2
        }
    };
    Ok(term(p, 1.0 - p) + term(1.0 - p, p))
}

/// Exact binomial coefficient; `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(u128::from(n - i))? / u128::from(i + 1);
    }
    Some(acc)
}

/// Forcing probability of a variable with two critical clauses sharing one
/// other variable: `∫₀¹ max{2r² − r³, min{r²/(1−r)², 1}} dr`.
pub fn forcing_integral_two_crit() -> f64 {
    // The two branches cross where (2 − r)(1 − r)² = 1.
    let cross = bisect(|r| (2.0 - r) * (1.0 - r) * (1.0 - r) - 1.0, 0.01, 0.5);
    integrate_split(
        |r| (2.0 * r * r - r * r * r).max(forcing_bound(r)),
        0.0,
        &[cross, 0.5],
    )
}

/// Forcing probability of a variable with a critical (≤2)-clause:
/// `∫₀¹ max{r, min{r²/(1−r)², 1}} dr`.
pub fn forcing_integral_short_crit() -> f64 {
    // r = r²/(1 − r)² at r = (3 − √5)/2.
    let cross = (3.0 - 5f64.sqrt()) / 2.0;
    integrate_split(|r| r.max(forcing_bound(r)), 0.0, &[cross, 0.5])
}

/// Bits saved per 2-clause by the biased dense-case guess:
/// `2 + (1/5)·log(1/5) + (4/5)·log(4/15)`.
pub fn dense_savings_constant() -> f64 {
    2.0 + 0.2 * (0.2f64).log2() + 0.8 * (4.0f64 / 15.0).log2()
}

/// Entropy of the four-valued guess `(1/5, 4/15, 4/15, 4/15)` in bits.
pub fn dense_guess_entropy() -> f64 {
    let probs = [0.2, 4.0 / 15.0, 4.0 / 15.0, 4.0 / 15.0];
    -probs.iter().map(|p: &f64| p * p.log2()).sum::<f64>()
}

/// Exponent constant of the low-degree solver's bound, `0.371`.
pub const LOW_DEGREE_EXPONENT: f64 = 0.371;

/// Savings in the sparse case over plain PPSZ, `S − 0.015` is the exponent of
/// the low-degree gate probability.
pub const SPARSE_GATE_SAVINGS: f64 = 0.015;

/// The tuning constants of the improved algorithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantsLedger {
    /// Improvement for instances with one critical clause per variable.
    pub eps1: f64,
    /// Improvement for Unique 3-SAT.
    pub eps2: f64,
    /// Fraction of variables brute-forced to remove multi-critical variables.
    pub delta1: f64,
    /// Fraction of variables defining sparse versus dense.
    pub delta2: f64,
    /// Savings on repetitions in the sparse case.
    pub eps3: f64,
    /// Probability a variable is guessed from independent 2-clauses.
    pub p_star: f64,
}

impl Default for ConstantsLedger {
    fn default() -> Self {
        ConstantsLedger {
            eps1: 1e-19,
            eps2: 1e-24,
            delta1: 1e-21,
            delta2: 6e-5,
            eps3: 1e-3,
            p_star: 8e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LedgerCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Right-hand side minus left-hand side; positive when the check passes.
    pub margin: f64,
}

/// Evaluates the inequalities the constants must satisfy.
pub fn validate_ledger(ledger: &ConstantsLedger) -> Result<Vec<LedgerCheck>, DomainError> {
    let check = |name, lhs: f64, rhs: f64| LedgerCheck {
        name,
        passed: lhs < rhs,
        margin: rhs - lhs,
    };
    let s = s_constant();
    let sparse_exponent = s - SPARSE_GATE_SAVINGS;
    Ok(vec![
        check(
            "delta1_plus_h_delta1_below_eps1",
            ledger.delta1 + entropy(ledger.delta1)?,
            ledger.eps1,
        ),
        check(
            "delta2_plus_h_delta2_below_eps3",
            ledger.delta2 + entropy(ledger.delta2)?,
            ledger.eps3,
        ),
        LedgerCheck {
            name: "s_minus_0.015_at_least_0.371",
            passed: sparse_exponent >= LOW_DEGREE_EXPONENT,
            margin: sparse_exponent - LOW_DEGREE_EXPONENT,
        },
        check(
            "two_thirds_beats_two_variable_budget",
            (-LOW_DEGREE_EXPONENT * 2.0).exp2(),
            2.0 / 3.0,
        ),
        check(
            "low_degree_bound_within_sparse_exponent",
            (-sparse_exponent * 2.0).exp2(),
            (-LOW_DEGREE_EXPONENT * 2.0).exp2(),
        ),
    ])
}
