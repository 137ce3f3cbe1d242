//! The four linear forms, the characteristic functional equation, and the
//! coefficient-condition classifier.
//!
//! For independent X-valued variables xi_1..xi_n and endomorphism
//! coefficients a_j, b_j, c_j, d_j, the vectors (L1, L2) and (L3, L4) built
//! from the forms L1 = sum a_j xi_j, ..., L4 = sum d_j xi_j are identically
//! distributed exactly when the characteristic functions satisfy
//!
//! ```text
//! prod_j mu_j^(a_j u + b_j v) = prod_j mu_j^(c_j u + d_j v)   for all u, v
//! ```
//!
//! (coefficients acting on characters through their self-adjoint action).
//! The engine evaluates the worst-case gap of this identity over a character
//! grid, evaluates the per-variable coefficient conditions, and turns them
//! into class guarantees.

use crate::charfn::ThetaParams;
use crate::error::{Error, Result};
use crate::group::{endo_combine, Bit, Character, Endomorphism};
use num_complex::Complex64;
use rayon::prelude::*;

/// Rectangular character grid: s ranges over `s_steps` equispaced points of
/// [-s_max, s_max], l over both elements of Z(2).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CharacterGrid {
    pub s_max: f64,
    pub s_steps: usize,
}

impl Default for CharacterGrid {
    /// s in {-5, -4.9, ..., 5}: the characteristic functions decay fast and
    /// residual structure is visible well inside |s| <= 5.
    fn default() -> Self {
        CharacterGrid { s_max: 5.0, s_steps: 101 }
    }
}

impl CharacterGrid {
    pub fn new(s_max: f64, s_steps: usize) -> Self {
        CharacterGrid { s_max, s_steps }
    }

    pub fn s_values(&self) -> Vec<f64> {
        if self.s_steps == 1 {
            return vec![0.0];
        }
        let step = 2.0 * self.s_max / (self.s_steps - 1) as f64;
        (0..self.s_steps).map(|i| -self.s_max + step * i as f64).collect()
    }
}

/// n independent variables with their distribution parameters and the four
/// coefficient lists.
#[derive(Clone, Debug, PartialEq)]
pub struct FormsProblem {
    pub dists: Vec<ThetaParams>,
    pub a: Vec<Endomorphism>,
    pub b: Vec<Endomorphism>,
    pub c: Vec<Endomorphism>,
    pub d: Vec<Endomorphism>,
}

/// Truth of the three per-variable coefficient conditions at one index i:
///
/// * `stmt1`: a_i d_j - b_i c_j is an automorphism for every j;
/// * `stmt2`: a'_i d'_j - b'_i c'_j != 0 for every j and a''_i = 1 or b''_i = 1;
/// * `stmt3`: a'_i d'_j - b'_i c'_j != 0 for every j.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ComponentConditions {
    pub stmt1: bool,
    pub stmt2: bool,
    pub stmt3: bool,
}

/// Per-variable coefficient conditions for a whole problem.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionReport {
    pub components: Vec<ComponentConditions>,
}

/// Class guarantee emitted for one variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComponentLabel {
    GammaX,
    ThetaX,
    LambdaX,
    NoGuarantee,
}

impl std::fmt::Display for ComponentLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ComponentLabel::GammaX => "GammaX",
            ComponentLabel::ThetaX => "ThetaX",
            ComponentLabel::LambdaX => "LambdaX",
            ComponentLabel::NoGuarantee => "NoGuarantee",
        };
        f.write_str(s)
    }
}

/// Strongest guarantee the conditions support. With `allow_vanishing` only
/// the third condition may be used, and it yields LambdaX.
pub fn strongest_label(c: ComponentConditions, allow_vanishing: bool) -> ComponentLabel {
    if allow_vanishing {
        return if c.stmt3 { ComponentLabel::LambdaX } else { ComponentLabel::NoGuarantee };
    }
    if c.stmt1 {
        ComponentLabel::GammaX
    } else if c.stmt2 {
        ComponentLabel::ThetaX
    } else if c.stmt3 {
        ComponentLabel::LambdaX
    } else {
        ComponentLabel::NoGuarantee
    }
}

/// Evaluates the conditions for arbitrary coefficient lists of equal length.
pub fn condition_report(
    a: &[Endomorphism],
    b: &[Endomorphism],
    c: &[Endomorphism],
    d: &[Endomorphism],
) -> ConditionReport {
    let n = a.len();
    let components = (0..n)
        .map(|i| {
            let mut aut_all = true;
            let mut nonzero_all = true;
            for j in 0..n {
                let combined = endo_combine(a[i], d[j], b[i], c[j]);
                aut_all &= combined.is_automorphism();
                nonzero_all &= combined.re != 0.0;
            }
            let disc_ok = a[i].disc.is_one() || b[i].disc.is_one();
            ComponentConditions {
                stmt1: aut_all,
                stmt2: nonzero_all && disc_ok,
                stmt3: nonzero_all,
            }
        })
        .collect();
    ConditionReport { components }
}

impl FormsProblem {
    /// Builds a problem. All five lists must share one nonzero length and
    /// every distribution must be a probability measure.
    pub fn new(
        dists: Vec<ThetaParams>,
        a: Vec<Endomorphism>,
        b: Vec<Endomorphism>,
        c: Vec<Endomorphism>,
        d: Vec<Endomorphism>,
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
        for (index, dist) in dists.iter().enumerate() {
            let (ok, label) = dist.is_probability();
            if !ok {
                return Err(Error::NotProbability { index, label });
            }
        }
        Ok(FormsProblem { dists, a, b, c, d })
    }

    pub fn n(&self) -> usize {
        self.dists.len()
    }

    /// Both sides of the functional equation at the character pair (u, v).
    pub fn eq1_sides(&self, u: Character, v: Character) -> (Complex64, Complex64) {
        let mut lhs = Complex64::new(1.0, 0.0);
        let mut rhs = Complex64::new(1.0, 0.0);
        for j in 0..self.n() {
            lhs *= self.dists[j].cf_eval(self.a[j].apply_char(u) + self.b[j].apply_char(v));
            rhs *= self.dists[j].cf_eval(self.c[j].apply_char(u) + self.d[j].apply_char(v));
        }
        (lhs, rhs)
    }

    /// Worst absolute gap |LHS - RHS| of the functional equation over the
    /// grid: u = (s1, l1) and v = (s2, l2) with s1, s2 from the grid reals
    /// and l1, l2 ranging over Z(2).
    pub fn eq1_residual(&self, grid: &CharacterGrid) -> f64 {
        let s_values = grid.s_values();
        let bits = [Bit::ZERO, Bit::ONE];
        s_values
            .par_iter()
            .map(|&s1| {
                let mut worst = 0.0f64;
                for l1 in bits {
                    let u = Character::new(s1, l1);
                    for &s2 in &s_values {
                        for l2 in bits {
                            let v = Character::new(s2, l2);
                            let (lhs, rhs) = self.eq1_sides(u, v);
                            worst = worst.max((lhs - rhs).norm());
                        }
                    }
                }
                worst
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Whether (L1, L2) and (L3, L4) are identically distributed up to `tol`
    /// on the grid.
    pub fn vectors_identically_distributed(&self, grid: &CharacterGrid, tol: f64) -> bool {
        self.eq1_residual(grid) <= tol
    }

    /// Per-variable coefficient conditions of this problem.
    pub fn condition_report(&self) -> ConditionReport {
        condition_report(&self.a, &self.b, &self.c, &self.d)
    }

    /// Per-variable class guarantees.
    ///
    /// Guarantees are conditional on the functional equation, so the problem
    /// is refused when the grid residual exceeds `tol`. Unless
    /// `allow_vanishing` is set, every characteristic function must be
    /// nonvanishing, which for this family means kappa != 0 (checked
    /// structurally). With `allow_vanishing` only LambdaX guarantees are
    /// emitted.
    pub fn classify_components(
        &self,
        grid: &CharacterGrid,
        tol: f64,
        allow_vanishing: bool,
    ) -> Result<Vec<ComponentLabel>> {
        if !allow_vanishing {
            for (index, dist) in self.dists.iter().enumerate() {
                if dist.kappa == 0.0 {
                    return Err(Error::VanishingCf { index });
                }
            }
        }
        let residual = self.eq1_residual(grid);
        if residual > tol {
            return Err(Error::NotIdenticallyDistributed { residual, tol });
        }
        let report = self.condition_report();
        Ok(report
            .components
            .into_iter()
            .map(|c| strongest_label(c, allow_vanishing))
            .collect())
    }
}

/// Conditional-symmetry problem: L3 = L1 and L4 = -L2, i.e. c = a and
/// d_j = -b_j (real part negated, discrete part unchanged).
pub fn build_heyde(
    dists: Vec<ThetaParams>,
    a: Vec<Endomorphism>,
    b: Vec<Endomorphism>,
) -> Result<FormsProblem> {
    if a.len() != b.len() || a.len() != dists.len() {
        return Err(Error::LengthMismatch(format!(
            "expected equal list lengths, got {} dists, {} a, {} b",
            dists.len(),
            a.len(),
            b.len()
        )));
    }
    let c = a.clone();
    let d = b.iter().map(|&e| -e).collect();
    FormsProblem::new(dists, a, b, c, d)
}

/// Independence problem: duplicates the variables into xi_1..xi_n,
/// xi'_1..xi'_n (same distributions) and compares (L1, L2) against
/// (L1, L2') where L2' uses the primed copies:
///
/// ```text
/// L1 = sum a_j xi_j,  L2 = sum b_j xi_j,
/// L3 = sum a_j xi_j,  L4 = sum b_j xi'_j.
/// ```
///
/// The functional equation of the resulting 2n-variable problem states
/// exactly that L1 and L2 are independent.
pub fn build_ds(
    dists: Vec<ThetaParams>,
    a: Vec<Endomorphism>,
    b: Vec<Endomorphism>,
) -> Result<FormsProblem> {
    if a.len() != b.len() || a.len() != dists.len() {
        return Err(Error::LengthMismatch(format!(
            "expected equal list lengths, got {} dists, {} a, {} b",
            dists.len(),
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    let zero = vec![Endomorphism::zero(); n];
    let doubled: Vec<ThetaParams> = dists.iter().chain(dists.iter()).copied().collect();
    let a2: Vec<Endomorphism> = a.iter().copied().chain(zero.iter().copied()).collect();
    let b2: Vec<Endomorphism> = b.iter().copied().chain(zero.iter().copied()).collect();
    let c2 = a2.clone();
    let d2: Vec<Endomorphism> = zero.iter().copied().chain(b.iter().copied()).collect();
    FormsProblem::new(doubled, a2, b2, c2, d2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn theta(sigma: f64, beta: f64, sigma_p: f64, beta_p: f64, kappa: f64) -> ThetaParams {
        ThetaParams::new(sigma, beta, sigma_p, beta_p, kappa).unwrap()
    }

    fn aut(re: f64) -> Endomorphism {
        Endomorphism::new(re, Bit::ONE)
    }

    /// L1 = x1 + x2, L2 = x1 - x2, L3 = x1 - x2, L4 = x1 + x2 with a
    /// common symmetric distribution.
    fn swap_problem() -> FormsProblem {
        let mu = theta(1.0, 0.0, 0.5, 0.0, 0.5);
        FormsProblem::new(
            vec![mu, mu],
            vec![aut(1.0), aut(1.0)],
            vec![aut(1.0), aut(-1.0)],
            vec![aut(1.0), aut(-1.0)],
            vec![aut(1.0), aut(1.0)],
        )
        .unwrap()
    }

    /// Swap problem with the second variable's drift moved by 1 (both
    /// fibers, so it stays a probability measure).
    fn perturbed_problem() -> FormsProblem {
        let mu1 = theta(1.0, 0.0, 0.5, 0.0, 0.5);
        let mu2 = theta(1.0, 1.0, 0.5, 1.0, 0.5);
        FormsProblem::new(
            vec![mu1, mu2],
            vec![aut(1.0), aut(1.0)],
            vec![aut(1.0), aut(-1.0)],
            vec![aut(1.0), aut(-1.0)],
            vec![aut(1.0), aut(1.0)],
        )
        .unwrap()
    }

    #[test]
    fn residual_zero_when_sides_coincide() {
        let mu = theta(1.0, 0.3, 0.5, -0.2, 0.6);
        let a = vec![aut(1.0), aut(2.0)];
        let b = vec![aut(-1.0), aut(0.5)];
        let p = FormsProblem::new(vec![mu, mu], a.clone(), b.clone(), a, b).unwrap();
        assert_eq!(p.eq1_residual(&CharacterGrid::default()), 0.0);
    }

    #[test]
    fn swap_scenario_residual_vanishes() {
        let r = swap_problem().eq1_residual(&CharacterGrid::default());
        assert!(r < 1e-12, "swap residual {r}");
        assert!(swap_problem().vectors_identically_distributed(&CharacterGrid::default(), 1e-12));
    }

    #[test]
    fn perturbed_scenario_residual_visible() {
        let r = perturbed_problem().eq1_residual(&CharacterGrid::default());
        assert!(r > 1e-2, "perturbed residual {r}");
        assert!(!perturbed_problem()
            .vectors_identically_distributed(&CharacterGrid::default(), 1e-9));
    }

    #[test]
    fn condition_report_identity_case() {
        let i = Endomorphism::identity();
        let z = Endomorphism::zero();
        let report = condition_report(&[i], &[z], &[z], &[i]);
        assert_eq!(
            report.components,
            vec![ComponentConditions { stmt1: true, stmt2: true, stmt3: true }]
        );
    }

    #[test]
    fn condition_report_swap_scenario_all_false() {
        let report = swap_problem().condition_report();
        // a'_1 d'_1 - b'_1 c'_1 = 1 - 1 = 0 already fails stmt3
        assert_eq!(
            report.components[0],
            ComponentConditions { stmt1: false, stmt2: false, stmt3: false }
        );
    }

    #[test]
    fn condition_report_nonzero_but_not_automorphism() {
        // a = (I, I), b = ((2,1), (-3,1)), c = b, d = a
        let a = vec![aut(1.0), aut(1.0)];
        let b = vec![aut(2.0), aut(-3.0)];
        let report = condition_report(&a, &b, &b, &a);
        // i = 0: a'_1 d'_j - b'_1 c'_j over j: {1 - 4, 1 + 6} = {-3, 7}
        let c0 = report.components[0];
        assert!(!c0.stmt1, "combine disc is 1*1 + 1*1 = 0 mod 2");
        assert!(c0.stmt2);
        assert!(c0.stmt3);
    }

    #[test]
    fn statement_chain_on_random_coefficients() {
        use rand::{RngExt, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let n = rng.random_range(1..=4);
            let mut lists = Vec::new();
            for _ in 0..4 {
                let list: Vec<Endomorphism> = (0..n)
                    .map(|_| {
                        let re = match rng.random_range(0..4u8) {
                            0 => 0.0,
                            1 => rng.random_range(-3..=3) as f64,
                            _ => rng.random_range(-2.0..2.0),
                        };
                        Endomorphism::new(re, Bit::new(rng.random_range(0..2u8)))
                    })
                    .collect();
                lists.push(list);
            }
            let report = condition_report(&lists[0], &lists[1], &lists[2], &lists[3]);
            for c in &report.components {
                assert!(!c.stmt1 || c.stmt2, "stmt1 must imply stmt2: {c:?}");
                assert!(!c.stmt2 || c.stmt3, "stmt2 must imply stmt3: {c:?}");
            }
        }
    }

    #[test]
    fn classify_swap_scenario_has_no_guarantees() {
        let labels = swap_problem()
            .classify_components(&CharacterGrid::default(), 1e-9, false)
            .unwrap();
        assert_eq!(labels, vec![ComponentLabel::NoGuarantee, ComponentLabel::NoGuarantee]);
    }

    #[test]
    fn classify_refuses_perturbed_scenario() {
        let err = perturbed_problem()
            .classify_components(&CharacterGrid::default(), 1e-9, false)
            .unwrap_err();
        assert!(matches!(err, Error::NotIdenticallyDistributed { .. }));
    }

    #[test]
    fn classify_refuses_vanishing_cf() {
        let mu = ThetaParams::haar_z2();
        let p = FormsProblem::new(
            vec![mu],
            vec![aut(1.0)],
            vec![aut(1.0)],
            vec![aut(1.0)],
            vec![aut(1.0)],
        )
        .unwrap();
        let err = p.classify_components(&CharacterGrid::default(), 1e-9, false).unwrap_err();
        assert_eq!(err, Error::VanishingCf { index: 0 });
        // the vanishing-cf path still emits LambdaX-only guarantees
        let labels = p.classify_components(&CharacterGrid::default(), 1e-9, true).unwrap();
        assert_eq!(labels, vec![ComponentLabel::NoGuarantee]);
    }

    #[test]
    fn allow_vanishing_caps_labels_at_lambda() {
        let g = ThetaParams::gaussian(1.0, 0.0).unwrap();
        let p = build_ds(vec![g, g], vec![aut(1.0), aut(1.0)], vec![aut(1.0), aut(-1.0)]).unwrap();
        let strict = p.classify_components(&CharacterGrid::default(), 1e-9, false).unwrap();
        assert_eq!(strict[0], ComponentLabel::GammaX);
        assert_eq!(strict[1], ComponentLabel::GammaX);
        let weak = p.classify_components(&CharacterGrid::default(), 1e-9, true).unwrap();
        assert!(weak.iter().all(|&l| l == ComponentLabel::LambdaX || l == ComponentLabel::NoGuarantee));
        assert_eq!(weak[0], ComponentLabel::LambdaX);
    }

    #[test]
    fn heyde_builder_negates_real_parts() {
        let mu = theta(1.0, 0.0, 0.5, 0.0, 0.5);
        let p = build_heyde(vec![mu], vec![aut(1.0)], vec![aut(1.0)]).unwrap();
        assert_eq!(p.c, vec![aut(1.0)]);
        assert_eq!(p.d, vec![aut(-1.0)]);
        // a_i d_j - b_i c_j = -(a'_i b'_j + b'_i a'_j) on the real part
        let combined = endo_combine(p.a[0], p.d[0], p.b[0], p.c[0]);
        assert_eq!(combined.re, -2.0);
        assert_eq!(combined.disc, Bit::ZERO);
    }

    #[test]
    fn heyde_swap_scenario_residual_vanishes() {
        let mu = theta(1.0, 0.0, 0.5, 0.0, 0.5);
        let p = build_heyde(
            vec![mu, mu],
            vec![aut(1.0), aut(1.0)],
            vec![aut(1.0), aut(-1.0)],
        )
        .unwrap();
        let r = p.eq1_residual(&CharacterGrid::default());
        assert!(r < 1e-12, "heyde residual {r}");
    }

    #[test]
    fn heyde_all_automorphism_never_stmt1_or_bare_stmt3() {
        use rand::{RngExt, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.random_range(1..=4);
            let g = ThetaParams::gaussian(1.0, 0.0).unwrap();
            let a: Vec<Endomorphism> =
                (0..n).map(|_| aut(rng.random_range(1..=3) as f64)).collect();
            let b: Vec<Endomorphism> =
                (0..n).map(|_| aut(rng.random_range(-3..=-1) as f64)).collect();
            let p = build_heyde(vec![g; n], a, b).unwrap();
            for c in p.condition_report().components {
                assert!(!c.stmt1, "Heyde with automorphism coefficients cannot reach stmt1");
                assert!(!c.stmt3 || c.stmt2, "bare stmt3 impossible when a''_i = b''_i = 1");
            }
        }
    }

    #[test]
    fn ds_builder_shape_and_independence_residual() {
        let g = ThetaParams::gaussian(1.0, 0.0).unwrap();
        let p = build_ds(vec![g, g], vec![aut(1.0), aut(1.0)], vec![aut(1.0), aut(-1.0)]).unwrap();
        assert_eq!(p.n(), 4);
        // sum_j a'_j b'_j sigma_j = 1 - 1 = 0: L1 and L2 independent
        let r = p.eq1_residual(&CharacterGrid::default());
        assert!(r < 1e-12, "ds residual {r}");

        // unequal variances break independence
        let g2 = ThetaParams::gaussian(2.0, 0.0).unwrap();
        let q = build_ds(vec![g, g2], vec![aut(1.0), aut(1.0)], vec![aut(1.0), aut(-1.0)]).unwrap();
        let r = q.eq1_residual(&CharacterGrid::default());
        assert!(r > 1e-2, "unbalanced ds residual {r}");
    }

    #[test]
    fn ds_degenerate_single_variable() {
        let e = ThetaParams::degenerate(0.7, Bit::ZERO);
        let p = build_ds(vec![e], vec![aut(1.0)], vec![aut(1.0)]).unwrap();
        let r = p.eq1_residual(&CharacterGrid::default());
        assert!(r < 1e-12, "degenerate ds residual {r}");
    }

    #[test]
    fn ds_originals_get_gamma_under_automorphism_coefficients() {
        let g = ThetaParams::gaussian(1.0, 0.5).unwrap();
        let p = build_ds(vec![g, g], vec![aut(1.0), aut(1.0)], vec![aut(1.0), aut(-1.0)]).unwrap();
        let labels = p.classify_components(&CharacterGrid::default(), 1e-9, false).unwrap();
        assert_eq!(labels[0], ComponentLabel::GammaX);
        assert_eq!(labels[1], ComponentLabel::GammaX);
        // primed copies carry zero coefficients, so no per-index guarantee;
        // they share the originals' distributions.
        assert_eq!(labels[2], ComponentLabel::NoGuarantee);
        assert_eq!(labels[3], ComponentLabel::NoGuarantee);
    }

    #[test]
    fn renumbering_leaves_residual_and_labels_invariant() {
        let mu1 = theta(1.0, 0.0, 0.5, 0.0, 0.5);
        let mu2 = theta(2.0, 0.0, 1.0, 0.0, 0.3);
        let a = vec![aut(1.0), aut(2.0)];
        let b = vec![aut(1.0), aut(-1.0)];
        let p = FormsProblem::new(vec![mu1, mu2], a.clone(), b.clone(), a.clone(), b.clone())
            .unwrap();
        let q = FormsProblem::new(
            vec![mu2, mu1],
            vec![a[1], a[0]],
            vec![b[1], b[0]],
            vec![a[1], a[0]],
            vec![b[1], b[0]],
        )
        .unwrap();
        let grid = CharacterGrid::default();
        assert!((p.eq1_residual(&grid) - q.eq1_residual(&grid)).abs() < 1e-15);
        let mut lp = p.classify_components(&grid, 1e-9, false).unwrap();
        let mut lq = q.classify_components(&grid, 1e-9, false).unwrap();
        lp.sort_by_key(|l| format!("{l}"));
        lq.sort_by_key(|l| format!("{l}"));
        assert_eq!(lp, lq);
    }

    #[test]
    fn problem_construction_validates() {
        let mu = theta(1.0, 0.0, 0.5, 0.0, 0.5);
        let signed = theta(1.0, 0.0, 0.5, 0.0, 0.8);
        let i = vec![Endomorphism::identity()];
        assert!(matches!(
            FormsProblem::new(vec![signed], i.clone(), i.clone(), i.clone(), i.clone()),
            Err(Error::NotProbability { index: 0, .. })
        ));
        assert!(matches!(
            FormsProblem::new(vec![mu, mu], i.clone(), i.clone(), i.clone(), i),
            Err(Error::LengthMismatch(_))
        ));
    }
}
