//! Distribution classes and linear-forms functional equations on the group
//! X = R x Z(2).
//!
//! The crate makes a family of Gaussian-type characterization results on X
//! executable:
//!
//! * [`group`] — elements, characters, the duality pairing, and the
//!   endomorphism ring of X;
//! * [`charfn`] — the closed-form characteristic-function family
//!   (sigma, beta, sigma', beta', kappa), its probability criterion with the
//!   explicit kappa bound, fiber densities and masses, convolution and
//!   reflection;
//! * [`forms`] — the functional equation of the four linear forms, its grid
//!   residual, the per-variable coefficient conditions, and the class
//!   guarantees they support (including the conditional-symmetry and
//!   independence constructions);
//! * [`fd`] — finite-difference operators, polynomial-degree detection, and
//!   the shift-difference elimination schedule that annihilates the
//!   aggregated log characteristic function;
//! * [`mc`] — sampling, the energy-distance two-sample statistic, and its
//!   permutation test as a Monte Carlo cross-check of the analytic residual;
//! * [`z2`] — exact rational verification of the Z(2) specialization by
//!   exhaustive enumeration.

pub mod charfn;
pub mod error;
pub mod fd;
pub mod forms;
pub mod group;
pub mod mc;
pub mod z2;

pub use charfn::{kappa_bound, ClassLabel, ThetaParams, CLASS_TOL};
pub use error::{Error, Result};
pub use fd::{
    build_psi, composed_difference, delta, elimination_schedule, poly_degree, schedule_shifts,
    symmetrize_dists, verify_elimination, EliminationCheck, ParamKind, PolyDegree, RealFunction,
    Schedule, ScheduleEntry, MAX_TESTED_ORDER,
};
pub use forms::{
    build_ds, build_heyde, condition_report, strongest_label, CharacterGrid, ComponentConditions,
    ComponentLabel, ConditionReport, FormsProblem,
};
pub use group::{endo_combine, pair, Bit, Character, Endomorphism, GroupElement};
pub use mc::{
    apply_forms, energy_distance, permutation_test, sample, PairedSample, PermutationOutcome,
    SampleBatch, DISCRETE_WEIGHT,
};
pub use z2::{
    counterexample_search, proposition_check, PropositionOutcome, Z2Dist, Z2Problem, Z2Witness, Q,
};
