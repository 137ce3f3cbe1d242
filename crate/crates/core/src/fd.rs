//! Finite-difference operators and the elimination schedule that reduces the
//! functional equation to an annihilation statement about
//! psi(s) = log mu^(s, 1).
//!
//! Given a problem and a pivot variable whose coefficients satisfy
//! a'_p d'_j - b'_p c'_j != 0 for every j (with a'_p != 0, a''_p = 1), the
//! remaining variables split into four groups by whether
//! a'_p b'_j - b'_p a'_j vanishes and by a''_j. Variables with vanishing
//! combination and a''_j = 1 fold into an aggregated characteristic function
//! together with the pivot; the others are eliminated by shift-difference
//! steps. The composed operator consists of n difference steps with
//! multipliers a'_p d'_j - b'_p c'_j (free parameters k_j) followed by one
//! step per surviving variable with multipliers a'_p b'_j - b'_p a'_j (free
//! parameters l_j), and it annihilates psi exactly when psi is a polynomial
//! of low degree. For the closed-form family here psi is a quadratic, so the
//! residual of the composed operator is rounding noise.

use crate::error::{Error, Result};
use crate::forms::FormsProblem;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::sync::Arc;

/// Highest finite-difference order probed by [`poly_degree`].
pub const MAX_TESTED_ORDER: usize = 12;

/// A real-valued function of one real variable with an evaluation-domain
/// hint [-radius, radius] inside which all shifted evaluations stay
/// well-conditioned.
#[derive(Clone)]
pub struct RealFunction {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub domain_radius: f64,
}

impl RealFunction {
    pub fn new(domain_radius: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        RealFunction { f: Arc::new(f), domain_radius }
    }

    pub fn eval(&self, s: f64) -> f64 {
        (self.f)(s)
    }
}

impl std::fmt::Debug for RealFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RealFunction")
            .field("domain_radius", &self.domain_radius)
            .finish()
    }
}

/// The finite difference operator: (delta_h f)(s) = f(s + h) - f(s).
pub fn delta(f: &RealFunction, h: f64) -> RealFunction {
    let g = f.clone();
    RealFunction::new(f.domain_radius, move |s| g.eval(s + h) - g.eval(s))
}

/// Iterated differences with the shift multiset `shifts` applied to `f` at
/// `s`. Difference operators commute, so the order of `shifts` is
/// immaterial.
pub fn composed_difference(f: &RealFunction, shifts: &[f64], s: f64) -> f64 {
    match shifts.split_first() {
        None => f.eval(s),
        Some((&h, rest)) => {
            composed_difference(f, rest, s + h) - composed_difference(f, rest, s)
        }
    }
}

/// Result of polynomial-degree detection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyDegree {
    Degree(usize),
    /// No order up to [`MAX_TESTED_ORDER`] annihilates the function.
    NotPolynomial,
}

/// Smallest l such that delta_h^(l+1) f vanishes (below `tol`) for every h in
/// `h_set`, probing orders up to [`MAX_TESTED_ORDER`]. Samples 21 points of
/// the domain hint, leaving room for the largest shift combination.
pub fn poly_degree(f: &RealFunction, h_set: &[f64], tol: f64) -> PolyDegree {
    assert!(!h_set.is_empty(), "h_set must be nonempty");
    assert!(tol > 0.0, "tol must be positive");
    let h_max = h_set.iter().fold(0.0f64, |m, h| m.max(h.abs()));
    let r = ((f.domain_radius - MAX_TESTED_ORDER as f64 * h_max) * 0.5).max(1.0);
    let samples: Vec<f64> = (0..21).map(|i| -r + r * i as f64 / 10.0).collect();

    // Pascal row with alternating signs: delta_h^m f(s) =
    // sum_i (-1)^(m-i) C(m,i) f(s + i h).
    let mut coeffs = vec![1.0f64];
    for m in 1..=MAX_TESTED_ORDER {
        let mut next = vec![0.0; m + 1];
        for (i, &c) in coeffs.iter().enumerate() {
            next[i] -= c;
            next[i + 1] += c;
        }
        coeffs = next;
        let mut worst = 0.0f64;
        for &h in h_set {
            for &s in &samples {
                let v: f64 =
                    coeffs.iter().enumerate().map(|(i, &c)| c * f.eval(s + i as f64 * h)).sum();
                worst = worst.max(v.abs());
            }
        }
        if worst <= tol {
            return PolyDegree::Degree(m - 1);
        }
    }
    PolyDegree::NotPolynomial
}

/// Which free parameter a schedule entry carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamKind {
    /// One of the first n steps, multiplier a'_p d'_j - b'_p c'_j.
    K,
    /// One of the last n2 - 1 steps, multiplier a'_p b'_j - b'_p a'_j.
    L,
}

/// One shift-difference step: the shift is `multiplier` times a free real
/// parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleEntry {
    pub kind: ParamKind,
    /// Original variable index the step eliminates.
    pub variable: usize,
    pub multiplier: f64,
}

/// The ordered elimination schedule for one pivot, together with the
/// renumbering that sorts the variables into the four groups.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub pivot: usize,
    /// Original indices in renumbered order: pivot first, then the groups
    /// (w != 0, a'' = 0), (w != 0, a'' = 1), (w = 0, a'' = 0),
    /// (w = 0, a'' = 1), where w_j = a'_p b'_j - b'_p a'_j.
    pub order: Vec<usize>,
    /// Renumbered positions (1-based counts): group boundaries after the
    /// pivot. Variables at positions n3+1..n fold into the aggregated psi.
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub entries: Vec<ScheduleEntry>,
}

impl Schedule {
    /// Original indices of the variables aggregated into psi (pivot
    /// excluded).
    pub fn aggregated(&self) -> &[usize] {
        &self.order[self.n3..]
    }
}

/// Shift values for one draw of the free parameters (`params[e]` multiplies
/// entry e's multiplier).
pub fn schedule_shifts(schedule: &Schedule, params: &[f64]) -> Vec<f64> {
    assert_eq!(params.len(), schedule.entries.len());
    schedule.entries.iter().zip(params).map(|(e, p)| e.multiplier * p).collect()
}

/// Builds the elimination schedule for `pivot`, checking the coefficient
/// condition a'_p d'_j - b'_p c'_j != 0 for every j and the pivot
/// admissibility a'_p != 0, a''_p = 1.
pub fn elimination_schedule(problem: &FormsProblem, pivot: usize) -> Result<Schedule> {
    let n = problem.n();
    if pivot >= n {
        return Err(Error::InvalidParameter(format!("pivot {pivot} out of range for n = {n}")));
    }
    let ap = problem.a[pivot];
    if !ap.is_automorphism() {
        return Err(Error::PivotInadmissible { pivot });
    }
    let bp = problem.b[pivot];

    let mut k_multipliers = Vec::with_capacity(n);
    for j in 0..n {
        let m = ap.re * problem.d[j].re - bp.re * problem.c[j].re;
        if m == 0.0 {
            return Err(Error::PivotCondition { pivot, failing_index: j });
        }
        k_multipliers.push(m);
    }

    let w = |j: usize| ap.re * problem.b[j].re - bp.re * problem.a[j].re;
    let mut groups: [Vec<usize>; 4] = Default::default();
    for j in 0..n {
        if j == pivot {
            continue;
        }
        let idx = match (w(j) != 0.0, problem.a[j].disc.is_one()) {
            (true, false) => 0,
            (true, true) => 1,
            (false, false) => 2,
            (false, true) => 3,
        };
        groups[idx].push(j);
    }
    let n1 = 1 + groups[0].len();
    let n2 = n1 + groups[1].len();
    let n3 = n2 + groups[2].len();
    let mut order = vec![pivot];
    for g in &groups {
        order.extend_from_slice(g);
    }

    // Proof order: k_n, ..., k_1 over all renumbered positions, then
    // l_{n2}, ..., l_2 over the two leading groups.
    let mut entries = Vec::with_capacity(n + n2 - 1);
    for pos in (0..n).rev() {
        let j = order[pos];
        entries.push(ScheduleEntry { kind: ParamKind::K, variable: j, multiplier: k_multipliers[j] });
    }
    for pos in (1..n2).rev() {
        let j = order[pos];
        entries.push(ScheduleEntry { kind: ParamKind::L, variable: j, multiplier: w(j) });
    }

    Ok(Schedule { pivot, order, n1, n2, n3, entries })
}

/// Domain hint of the aggregated log characteristic function.
const PSI_DOMAIN_RADIUS: f64 = 50.0;

/// The aggregated fiber-1 log characteristic function
///
/// ```text
/// psi(s) = log [ mu_p^(s, 1) * prod_{j aggregated} mu_j^((a'_j / a'_p) s, 1) ]
/// ```
///
/// Every involved distribution must have kappa > 0 and beta' = 0 so that the
/// logarithm is real; otherwise the error asks the caller to symmetrize (see
/// [`symmetrize_dists`]). The result is evaluated in closed form, so shifted
/// arguments never underflow.
pub fn build_psi(problem: &FormsProblem, pivot: usize) -> Result<RealFunction> {
    let schedule = elimination_schedule(problem, pivot)?;
    let mut terms = Vec::new();
    let ap = problem.a[pivot].re;
    for &j in std::iter::once(&pivot).chain(schedule.aggregated()) {
        let dist = problem.dists[j];
        if dist.kappa <= 0.0 || dist.beta_p != 0.0 {
            return Err(Error::SymmetrizeFirst { index: j });
        }
        let ratio = if j == pivot { 1.0 } else { problem.a[j].re / ap };
        terms.push((dist.kappa.ln(), dist.sigma_p * ratio * ratio));
    }
    Ok(RealFunction::new(PSI_DOMAIN_RADIUS, move |s| {
        terms.iter().map(|&(log_kappa, quad)| log_kappa - quad * s * s).sum()
    }))
}

/// Replaces every distribution by its symmetrization (convolution with the
/// own reflection). The functional equation is preserved, and every fiber-1
/// characteristic function becomes positive, which is what [`build_psi`]
/// needs.
pub fn symmetrize_dists(problem: &FormsProblem) -> FormsProblem {
    FormsProblem {
        dists: problem.dists.iter().map(|d| d.symmetrize()).collect(),
        a: problem.a.clone(),
        b: problem.b.clone(),
        c: problem.c.clone(),
        d: problem.d.clone(),
    }
}

/// Outcome of [`verify_elimination`].
#[derive(Clone, Debug, PartialEq)]
pub struct EliminationCheck {
    pub max_residual: f64,
    pub tol: f64,
    pub passed: bool,
    /// Order of the composed operator (n + n2 - 1).
    pub order: usize,
}

/// Applies the composed difference operator of the pivot's schedule to
/// psi(a'_p s1 + b'_p s2) for `trials` random draws of the free parameters
/// from [0.1, 2] and reports the worst absolute residual over an s1, s2 grid.
///
/// Parameters are bounded away from zero so that trivially small shifts
/// cannot mask bookkeeping errors. Trials run independently with derived
/// seeds.
pub fn verify_elimination(
    problem: &FormsProblem,
    pivot: usize,
    trials: usize,
    tol: f64,
    seed: u64,
) -> Result<EliminationCheck> {
    let schedule = elimination_schedule(problem, pivot)?;
    let psi = build_psi(problem, pivot)?;
    let ap = problem.a[pivot].re;
    let bp = problem.b[pivot].re;
    let grid: Vec<f64> = (0..9).map(|i| -2.0 + 0.5 * i as f64).collect();
    let z_values: Vec<f64> = grid
        .iter()
        .flat_map(|&s1| grid.iter().map(move |&s2| ap * s1 + bp * s2))
        .collect();

    let max_residual = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial as u64));
            let params: Vec<f64> =
                (0..schedule.entries.len()).map(|_| rng.random_range(0.1..=2.0)).collect();
            let shifts = schedule_shifts(&schedule, &params);
            z_values
                .iter()
                .map(|&z| composed_difference(&psi, &shifts, z).abs())
                .fold(0.0f64, f64::max)
        })
        .reduce(|| 0.0, f64::max);

    Ok(EliminationCheck {
        max_residual,
        tol,
        passed: max_residual <= tol,
        order: schedule.entries.len(),
    })
}
