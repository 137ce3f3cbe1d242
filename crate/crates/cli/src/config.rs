//! Scenario configuration: a single JSON file describing distributions,
//! coefficients, grids, and Monte Carlo settings.

use crate::CliError;
use rz2_core::{build_ds, build_heyde, Bit, CharacterGrid, Endomorphism, FormsProblem, ThetaParams};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub distributions: Vec<DistConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<CoeffConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd: Option<FdConfig>,
    /// Drop the non-vanishing requirement; only LambdaX guarantees remain.
    #[serde(default)]
    pub allow_vanishing: bool,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistConfig {
    pub sigma: f64,
    pub beta: f64,
    pub sigma_p: f64,
    pub beta_p: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffConfig {
    pub a: Vec<EndoConfig>,
    pub b: Vec<EndoConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<EndoConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<EndoConfig>>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndoConfig {
    pub re: f64,
    pub disc: u8,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub s_max: f64,
    pub s_steps: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub n_samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_n_perm")]
    pub n_perm: usize,
}

fn default_n_perm() -> usize {
    499
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdConfig {
    /// Index of the pivot variable (0-based).
    #[serde(default)]
    pub pivot: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
}

fn default_trials() -> usize {
    50
}

impl ScenarioConfig {
    /// Empty configuration for subcommands driven by flags alone.
    pub fn default_empty() -> Self {
        ScenarioConfig {
            distributions: Vec::new(),
            coefficients: None,
            grid: None,
            mc: None,
            fd: None,
            allow_vanishing: false,
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let config: ScenarioConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(grid) = &self.grid {
            if grid.s_steps < 2 {
                return Err(CliError::Config("grid.s_steps must be at least 2".into()));
            }
            if grid.s_max <= 0.0 || !grid.s_max.is_finite() {
                return Err(CliError::Config("grid.s_max must be positive".into()));
            }
        }
        if let Some(mc) = &self.mc {
            if mc.n_perm < 99 {
                return Err(CliError::Config("mc.n_perm must be at least 99".into()));
            }
            if mc.n_samples < 2 {
                return Err(CliError::Config("mc.n_samples must be at least 2".into()));
            }
        }
        if let Some(coeffs) = &self.coefficients {
            let n = self.distributions.len();
            for (name, list) in [("a", Some(&coeffs.a)), ("b", Some(&coeffs.b)),
                                 ("c", coeffs.c.as_ref()), ("d", coeffs.d.as_ref())] {
                if let Some(list) = list {
                    if list.len() != n {
                        return Err(CliError::Config(format!(
                            "coefficients.{name} has length {}, expected {n}",
                            list.len()
                        )));
                    }
                    for (j, e) in list.iter().enumerate() {
                        if e.disc > 1 {
                            return Err(CliError::Config(format!(
                                "coefficients.{name}[{j}].disc must be 0 or 1, got {}",
                                e.disc
                            )));
                        }
                    }
                }
            }
        }
        for (j, d) in self.distributions.iter().enumerate() {
            ThetaParams::new(d.sigma, d.beta, d.sigma_p, d.beta_p, d.kappa)
                .map_err(|e| CliError::Config(format!("distributions[{j}]: {e}")))?;
        }
        Ok(())
    }

    pub fn params(&self) -> Vec<ThetaParams> {
        self.distributions
            .iter()
            .map(|d| {
                ThetaParams::new(d.sigma, d.beta, d.sigma_p, d.beta_p, d.kappa)
                    .expect("validated at load time")
            })
            .collect()
    }

    pub fn character_grid(&self) -> CharacterGrid {
        self.grid
            .map(|g| CharacterGrid::new(g.s_max, g.s_steps))
            .unwrap_or_default()
    }

    fn endo_list(list: &[EndoConfig]) -> Vec<Endomorphism> {
        list.iter().map(|e| Endomorphism::new(e.re, Bit::new(e.disc))).collect()
    }

    fn coefficients(&self) -> Result<&CoeffConfig, CliError> {
        self.coefficients
            .as_ref()
            .ok_or_else(|| CliError::Config("this subcommand requires a coefficients block".into()))
    }

    /// Full four-form problem; requires coefficient lists a, b, c, d.
    pub fn problem(&self) -> Result<FormsProblem, CliError> {
        let coeffs = self.coefficients()?;
        let (Some(c), Some(d)) = (&coeffs.c, &coeffs.d) else {
            return Err(CliError::Config(
                "this subcommand requires all four coefficient lists a, b, c, d".into(),
            ));
        };
        FormsProblem::new(
            self.params(),
            Self::endo_list(&coeffs.a),
            Self::endo_list(&coeffs.b),
            Self::endo_list(c),
            Self::endo_list(d),
        )
        .map_err(|e| CliError::Precondition(e.to_string()))
    }

    /// Conditional-symmetry problem built from a and b.
    pub fn heyde_problem(&self) -> Result<FormsProblem, CliError> {
        let coeffs = self.coefficients()?;
        build_heyde(self.params(), Self::endo_list(&coeffs.a), Self::endo_list(&coeffs.b))
            .map_err(|e| CliError::Precondition(e.to_string()))
    }

    /// Independence problem built from a and b (duplicated variables).
    pub fn ds_problem(&self) -> Result<FormsProblem, CliError> {
        let coeffs = self.coefficients()?;
        build_ds(self.params(), Self::endo_list(&coeffs.a), Self::endo_list(&coeffs.b))
            .map_err(|e| CliError::Precondition(e.to_string()))
    }
}
