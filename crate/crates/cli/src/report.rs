//! Machine-readable reports. Every numeric section carries the tolerance it
//! was judged against.

use crate::config::ScenarioConfig;
use rz2_core::{
    ComponentLabel, ConditionReport, EliminationCheck, ParamKind, PermutationOutcome, Schedule,
    Z2Witness, CLASS_TOL,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize)]
pub struct Report {
    pub subcommand: String,
    pub timing_ms: u128,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<ThetaReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eq1: Option<Eq1Report>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<ComponentReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fd: Option<FdReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc: Option<McReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z2: Option<Z2Report>,
    /// Echo of the effective configuration; feeding it back reproduces the
    /// verdicts.
    pub config: ScenarioConfig,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ThetaReport {
    pub index: usize,
    pub is_probability: bool,
    pub label: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_bound: Option<f64>,
    pub class_tol: f64,
    pub fiber_mass_0: f64,
    pub fiber_mass_1: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Eq1Report {
    pub residual: f64,
    pub tol: f64,
    pub identical: bool,
    pub s_max: f64,
    pub s_steps: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ComponentReport {
    pub index: usize,
    pub stmt1: bool,
    pub stmt2: bool,
    pub stmt3: bool,
    pub label: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FdReport {
    pub pivot: usize,
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub order: usize,
    pub schedule: Vec<ScheduleEntryReport>,
    pub trials: usize,
    pub max_residual: f64,
    pub tol: f64,
    pub passed: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ScheduleEntryReport {
    pub kind: String,
    pub variable: usize,
    pub multiplier: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct McReport {
    pub statistic: f64,
    pub p_value: f64,
    pub n_samples: usize,
    pub n_perm: usize,
    pub seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Z2Report {
    pub mode: String,
    pub n_max: usize,
    pub q_grid: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub problems: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equation_holds: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assertions: Option<u64>,
    pub witnesses: Vec<WitnessReport>,
    pub message: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct WitnessReport {
    pub index: usize,
    pub q: Vec<String>,
    pub a: Vec<u8>,
    pub b: Vec<u8>,
    pub c: Vec<u8>,
    pub d: Vec<u8>,
}

pub fn theta_report(index: usize, params: &rz2_core::ThetaParams) -> ThetaReport {
    let (is_probability, label) = params.is_probability();
    let bound = rz2_core::kappa_bound(params.sigma, params.beta, params.sigma_p, params.beta_p).ok();
    let message = match (is_probability, bound) {
        (true, _) => format!("probability measure ({label})"),
        (false, Some(b)) => format!("not a probability measure; bound {b:.8}"),
        (false, None) => "not a probability measure".to_string(),
    };
    ThetaReport {
        index,
        is_probability,
        label: label.to_string(),
        message,
        kappa_bound: bound,
        class_tol: CLASS_TOL,
        fiber_mass_0: params.fiber_mass(rz2_core::Bit::ZERO),
        fiber_mass_1: params.fiber_mass(rz2_core::Bit::ONE),
    }
}

pub fn component_reports(
    report: &ConditionReport,
    labels: &[ComponentLabel],
) -> Vec<ComponentReport> {
    report
        .components
        .iter()
        .zip(labels)
        .enumerate()
        .map(|(index, (c, label))| ComponentReport {
            index,
            stmt1: c.stmt1,
            stmt2: c.stmt2,
            stmt3: c.stmt3,
            label: label.to_string(),
        })
        .collect()
}

pub fn fd_report(schedule: &Schedule, check: &EliminationCheck, trials: usize) -> FdReport {
    FdReport {
        pivot: schedule.pivot,
        n1: schedule.n1,
        n2: schedule.n2,
        n3: schedule.n3,
        order: check.order,
        schedule: schedule
            .entries
            .iter()
            .map(|e| ScheduleEntryReport {
                kind: match e.kind {
                    ParamKind::K => "k".to_string(),
                    ParamKind::L => "l".to_string(),
                },
                variable: e.variable,
                multiplier: e.multiplier,
            })
            .collect(),
        trials,
        max_residual: check.max_residual,
        tol: check.tol,
        passed: check.passed,
    }
}

pub fn mc_report(outcome: &PermutationOutcome, n_samples: usize, seed: u64) -> McReport {
    McReport {
        statistic: outcome.statistic,
        p_value: outcome.p_value,
        n_samples,
        n_perm: outcome.n_perm,
        seed,
    }
}

pub fn witness_report(w: &Z2Witness) -> WitnessReport {
    WitnessReport {
        index: w.index,
        q: w.problem.dists.iter().map(|d| d.q.to_string()).collect(),
        a: w.problem.a.iter().map(|b| b.as_u8()).collect(),
        b: w.problem.b.iter().map(|b| b.as_u8()).collect(),
        c: w.problem.c.iter().map(|b| b.as_u8()).collect(),
        d: w.problem.d.iter().map(|b| b.as_u8()).collect(),
    }
}
