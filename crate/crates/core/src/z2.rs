//! Exact rational verification of the Z(2) specialization.
//!
//! On X = Z(2) a distribution is a single rational q = P(1); its
//! characteristic function takes the values 1 at the trivial character and
//! 1 - 2q at the nontrivial one. The functional equation reduces to four
//! rational identities, so everything here is exact: enumeration over all
//! coefficient bit tuples and all grid distributions, no tolerances.
//!
//! `proposition_check` asserts that whenever the equation holds with
//! non-vanishing characteristic functions (q != 1/2) and index i satisfies
//! a_i d_j - b_i c_j = 1 for all j, the i-th distribution is degenerate.
//! `counterexample_search` drops the non-vanishing restriction and collects
//! the witnesses where the conclusion fails even against the weaker class
//! I(X) = {E_0, E_1, Haar}.

use crate::error::{Error, Result};
use crate::group::Bit;
use num_rational::Ratio;
use rayon::prelude::*;

pub type Q = Ratio<i64>;

/// A distribution on Z(2): q is the probability of the element 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Z2Dist {
    pub q: Q,
}

impl Z2Dist {
    pub fn new(q: Q) -> Result<Self> {
        if q < Q::from_integer(0) || q > Q::from_integer(1) {
            return Err(Error::InvalidParameter(format!("q must lie in [0, 1], got {q}")));
        }
        Ok(Z2Dist { q })
    }

    /// Characteristic function value: 1 at l = 0, 1 - 2q at l = 1.
    pub fn cf(&self, l: Bit) -> Q {
        if l.is_one() {
            Q::from_integer(1) - Q::from_integer(2) * self.q
        } else {
            Q::from_integer(1)
        }
    }

    /// Degenerate at 0 or 1.
    pub fn is_degenerate(&self) -> bool {
        self.q == Q::from_integer(0) || self.q == Q::from_integer(1)
    }

    /// The characteristic function vanishes somewhere iff q = 1/2.
    pub fn has_vanishing_cf(&self) -> bool {
        self.q == Q::new(1, 2)
    }

    /// Member of I(Z(2)) = {E_0, E_1, Haar}: the shifts of Haar measures of
    /// the compact subgroups {0} and Z(2).
    pub fn in_ix(&self) -> bool {
        self.is_degenerate() || self.has_vanishing_cf()
    }
}

/// Linear-forms problem over Z(2) with bit coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Z2Problem {
    pub dists: Vec<Z2Dist>,
    pub a: Vec<Bit>,
    pub b: Vec<Bit>,
    pub c: Vec<Bit>,
    pub d: Vec<Bit>,
}

impl Z2Problem {
    pub fn new(
        dists: Vec<Z2Dist>,
        a: Vec<Bit>,
        b: Vec<Bit>,
        c: Vec<Bit>,
        d: Vec<Bit>,
    ) -> Result<Self> {
        let n = dists.len();
        if n == 0 {
            return Err(Error::InvalidParameter("problem needs at least one variable".into()));
        }
        for (name, list) in [("a", &a), ("b", &b), ("c", &c), ("d", &d)] {
            if list.len() != n {
                return Err(Error::LengthMismatch(format!(
                    "coefficient list {name} has length {}, expected {n}",
                    list.len()
                )));
            }
        }
        Ok(Z2Problem { dists, a, b, c, d })
    }

    pub fn n(&self) -> usize {
        self.dists.len()
    }

    /// Exact check of the functional equation over all four character pairs.
    pub fn eq1_holds(&self) -> bool {
        for u in [Bit::ZERO, Bit::ONE] {
            for v in [Bit::ZERO, Bit::ONE] {
                let mut lhs = Q::from_integer(1);
                let mut rhs = Q::from_integer(1);
                for j in 0..self.n() {
                    lhs *= self.dists[j].cf(self.a[j].and(u) ^ self.b[j].and(v));
                    rhs *= self.dists[j].cf(self.c[j].and(u) ^ self.d[j].and(v));
                }
                if lhs != rhs {
                    return false;
                }
            }
        }
        true
    }

    /// a_i d_j - b_i c_j = 1 in Z(2) for all j (subtraction is addition).
    pub fn condition_holds(&self, i: usize) -> bool {
        (0..self.n()).all(|j| (self.a[i].and(self.d[j]) ^ self.b[i].and(self.c[j])).is_one())
    }
}

/// A problem and index where the equation and the coefficient condition hold
/// yet the conclusion fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Z2Witness {
    pub problem: Z2Problem,
    pub index: usize,
}

impl Z2Witness {
    /// Internal consistency: the witness really satisfies the equation and
    /// the coefficient condition.
    pub fn revalidates(&self) -> bool {
        self.problem.eq1_holds() && self.problem.condition_holds(self.index)
    }
}

/// Tallies of an exhaustive run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PropositionOutcome {
    /// Problems enumerated.
    pub problems: u64,
    /// Problems where the functional equation holds.
    pub equation_holds: u64,
    /// (problem, index) pairs gated by the coefficient condition.
    pub assertions: u64,
    /// Gated pairs whose distribution is not degenerate (expected: none).
    pub violations: Vec<Z2Witness>,
}

fn validate_grid(q_grid: &[Q]) -> Result<()> {
    if q_grid.is_empty() {
        return Err(Error::InvalidParameter("q_grid must be nonempty".into()));
    }
    for &q in q_grid {
        Z2Dist::new(q)?;
    }
    Ok(())
}

/// Enumerates every coefficient tuple (lexicographic over a_1..a_n,
/// b_1..b_n, c_1..c_n, d_1..d_n) and every grid assignment (lexicographic,
/// first variable most significant), calling `visit` on problems where the
/// functional equation holds. Returns (problems, equation_holds, collected).
fn scan<T, F>(n: usize, q_grid: &[Q], visit: F) -> (u64, u64, Vec<T>)
where
    T: Send,
    F: Fn(&Z2Problem) -> Vec<T> + Sync,
{
    let g = q_grid.len();
    let coeff_codes: u64 = 1 << (4 * n);
    let dist_codes: u64 = (g as u64).pow(n as u32);
    let bit_at = |code: u64, pos: usize| Bit::new(((code >> (4 * n - 1 - pos)) & 1) as u8);

    let per_code: Vec<(u64, Vec<T>)> = (0..coeff_codes)
        .into_par_iter()
        .map(|code| {
            let a: Vec<Bit> = (0..n).map(|j| bit_at(code, j)).collect();
            let b: Vec<Bit> = (0..n).map(|j| bit_at(code, n + j)).collect();
            let c: Vec<Bit> = (0..n).map(|j| bit_at(code, 2 * n + j)).collect();
            let d: Vec<Bit> = (0..n).map(|j| bit_at(code, 3 * n + j)).collect();
            let mut holds = 0u64;
            let mut collected = Vec::new();
            for dist_code in 0..dist_codes {
                let mut rem = dist_code;
                let mut dists = vec![Z2Dist { q: Q::from_integer(0) }; n];
                for j in (0..n).rev() {
                    dists[j] = Z2Dist { q: q_grid[(rem % g as u64) as usize] };
                    rem /= g as u64;
                }
                let problem = Z2Problem {
                    dists,
                    a: a.clone(),
                    b: b.clone(),
                    c: c.clone(),
                    d: d.clone(),
                };
                if problem.eq1_holds() {
                    holds += 1;
                    collected.extend(visit(&problem));
                }
            }
            (holds, collected)
        })
        .collect();

    let mut holds = 0;
    let mut collected = Vec::new();
    for (h, mut items) in per_code {
        holds += h;
        collected.append(&mut items);
    }
    (coeff_codes * dist_codes, holds, collected)
}

/// Exhaustively verifies the degeneracy conclusion for all problems with
/// n <= n_max variables and distributions from `q_grid`, which must exclude
/// 1/2 (the non-vanishing hypothesis).
pub fn proposition_check(n_max: usize, q_grid: &[Q]) -> Result<PropositionOutcome> {
    validate_grid(q_grid)?;
    if q_grid.contains(&Q::new(1, 2)) {
        return Err(Error::InvalidParameter(
            "q_grid must exclude 1/2: the hypothesis needs non-vanishing characteristic functions"
                .into(),
        ));
    }
    let mut outcome = PropositionOutcome::default();
    for n in 1..=n_max {
        let assertions = std::sync::atomic::AtomicU64::new(0);
        let (problems, holds, violations) = scan(n, q_grid, |problem| {
            let mut found = Vec::new();
            for i in 0..problem.n() {
                if problem.condition_holds(i) {
                    assertions.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    if !problem.dists[i].is_degenerate() {
                        found.push(Z2Witness { problem: problem.clone(), index: i });
                    }
                }
            }
            found
        });
        outcome.problems += problems;
        outcome.equation_holds += holds;
        outcome.assertions += assertions.into_inner();
        outcome.violations.extend(violations);
    }
    Ok(outcome)
}

/// Searches for witnesses against the stronger conclusion mu_i in I(X) when
/// vanishing characteristic functions are allowed (include 1/2 in the grid
/// to give the search a chance). Witnesses are returned in enumeration
/// order: n ascending, coefficients lexicographic, distributions
/// lexicographic.
pub fn counterexample_search(n_max: usize, q_grid: &[Q]) -> Result<Vec<Z2Witness>> {
    validate_grid(q_grid)?;
    let mut witnesses = Vec::new();
    for n in 1..=n_max {
        let (_, _, mut found) = scan(n, q_grid, |problem| {
            let mut found = Vec::new();
            for i in 0..problem.n() {
                if problem.condition_holds(i) && !problem.dists[i].in_ix() {
                    found.push(Z2Witness { problem: problem.clone(), index: i });
                }
            }
            found
        });
        witnesses.append(&mut found);
    }
    Ok(witnesses)
}
