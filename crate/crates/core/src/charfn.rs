//! Closed-form characteristic functions on X = R x Z(2) and their
//! classification.
//!
//! A single parameter tuple (sigma, beta, sigma', beta', kappa) describes the
//! characteristic function
//!
//! ```text
//! mu^(s, 0) = exp(-sigma  s^2 + i beta  s)
//! mu^(s, 1) = kappa * exp(-sigma' s^2 + i beta' s)
//! ```
//!
//! Every distribution class handled by this crate lives at some corner of the
//! parameter space: Gaussian laws have sigma = sigma', beta = beta',
//! kappa = +-1; products of a Gaussian on R with a law on Z(2) have
//! sigma = sigma', beta = beta', |kappa| <= 1; proper two-variance members
//! have 0 < sigma' < sigma with |kappa| below an explicit bound; everything
//! else is only a signed measure.

use crate::error::{Error, Result};
use crate::group::{Bit, Character};
use num_complex::Complex64;

/// Absolute tolerance for class-boundary comparisons (|kappa| against its
/// bound, sigma against sigma'). All quantities are closed-form, so only
/// rounding noise needs absorbing.
pub const CLASS_TOL: f64 = 1e-12;

/// Parameters of the universal closed-form characteristic function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaParams {
    pub sigma: f64,
    pub beta: f64,
    pub sigma_p: f64,
    pub beta_p: f64,
    pub kappa: f64,
}

/// Where a parameter tuple sits: Gaussian, proper two-variance member,
/// product of a real Gaussian with a Z(2) law, or merely a signed measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassLabel {
    /// Gaussian on X: sigma = sigma', beta = beta', kappa = +-1.
    GammaX,
    /// 0 < sigma' < sigma with 0 < |kappa| <= kappa_bound.
    ThetaProper,
    /// sigma = sigma', beta = beta', |kappa| <= 1 (not +-1).
    GammaRTimesM1Z2,
    /// Fails the probability criterion; characteristic function of a signed
    /// measure only.
    SignedOnly,
}

impl std::fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ClassLabel::GammaX => "GammaX",
            ClassLabel::ThetaProper => "ThetaProper",
            ClassLabel::GammaRTimesM1Z2 => "GammaR_times_M1Z2",
            ClassLabel::SignedOnly => "SignedOnly",
        };
        f.write_str(s)
    }
}

/// The largest |kappa| for which (sigma, beta, sigma', beta', kappa) stays a
/// probability measure when 0 < sigma' < sigma:
///
/// ```text
/// sqrt(sigma'/sigma) * exp(-(beta - beta')^2 / (4 (sigma - sigma')))
/// ```
///
/// Equals the minimum over t of the ratio of the two fiber Gaussian
/// densities g_{sigma,beta} / g_{sigma',beta'}.
pub fn kappa_bound(sigma: f64, beta: f64, sigma_p: f64, beta_p: f64) -> Result<f64> {
    if !(sigma_p > 0.0 && sigma_p < sigma) {
        return Err(Error::InvalidParameter(format!(
            "kappa_bound requires 0 < sigma' < sigma, got sigma = {sigma}, sigma' = {sigma_p}"
        )));
    }
    let d = beta - beta_p;
    Ok((sigma_p / sigma).sqrt() * (-d * d / (4.0 * (sigma - sigma_p))).exp())
}

/// Density of the normal law with mean beta and variance 2*sigma; the l = 0
/// restriction exp(-sigma s^2 + i beta s) is its characteristic function.
pub(crate) fn fiber_gaussian_density(sigma: f64, beta: f64, t: f64) -> f64 {
    let d = t - beta;
    (-d * d / (4.0 * sigma)).exp() / (4.0 * std::f64::consts::PI * sigma).sqrt()
}

impl ThetaParams {
    /// Builds a parameter tuple, requiring sigma >= 0 and sigma' >= 0 and all
    /// entries finite. The tuple may describe a signed measure until
    /// validated by [`ThetaParams::is_probability`].
    pub fn new(sigma: f64, beta: f64, sigma_p: f64, beta_p: f64, kappa: f64) -> Result<Self> {
        let all_finite = [sigma, beta, sigma_p, beta_p, kappa]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidParameter("parameters must be finite".into()));
        }
        if sigma < 0.0 || sigma_p < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sigma and sigma' must be nonnegative, got {sigma} and {sigma_p}"
            )));
        }
        Ok(ThetaParams { sigma, beta, sigma_p, beta_p, kappa })
    }

    /// Gaussian law supported on the fiber R x {0}: kappa = 1.
    pub fn gaussian(sigma: f64, beta: f64) -> Result<Self> {
        Self::new(sigma, beta, sigma, beta, 1.0)
    }

    /// Gaussian law shifted onto the fiber R x {k}: kappa = (-1)^k.
    pub fn gaussian_on_fiber(sigma: f64, beta: f64, k: Bit) -> Result<Self> {
        Self::new(sigma, beta, sigma, beta, k.sign())
    }

    /// Degenerate law at the point (t, k).
    pub fn degenerate(t: f64, k: Bit) -> Self {
        ThetaParams { sigma: 0.0, beta: t, sigma_p: 0.0, beta_p: t, kappa: k.sign() }
    }

    /// Haar distribution of the compact subgroup {0} x Z(2).
    pub fn haar_z2() -> Self {
        ThetaParams { sigma: 0.0, beta: 0.0, sigma_p: 0.0, beta_p: 0.0, kappa: 0.0 }
    }

    /// Characteristic function at the character y = (s, l).
    pub fn cf_eval(&self, y: Character) -> Complex64 {
        if y.l.is_one() {
            self.kappa * Complex64::from_polar((-self.sigma_p * y.s * y.s).exp(), self.beta_p * y.s)
        } else {
            Complex64::from_polar((-self.sigma * y.s * y.s).exp(), self.beta * y.s)
        }
    }

    /// Analytic continuation of the characteristic function to complex s;
    /// agrees with [`ThetaParams::cf_eval`] for real s.
    pub fn cf_eval_complex(&self, s: Complex64, l: Bit) -> Complex64 {
        let i = Complex64::i();
        if l.is_one() {
            self.kappa * (-self.sigma_p * s * s + i * self.beta_p * s).exp()
        } else {
            (-self.sigma * s * s + i * self.beta * s).exp()
        }
    }

    /// Classifies the tuple against the probability criterion.
    ///
    /// The two admissible regimes are 0 < sigma' < sigma with
    /// 0 < |kappa| <= kappa_bound, and sigma = sigma', beta = beta' with
    /// |kappa| <= 1. Comparisons use [`CLASS_TOL`]; the strict 0 < |kappa|
    /// requirement of the first regime is checked exactly.
    pub fn classify(&self) -> ClassLabel {
        let eq = |x: f64, y: f64| (x - y).abs() <= CLASS_TOL;
        if eq(self.sigma, self.sigma_p) && eq(self.beta, self.beta_p) {
            if eq(self.kappa.abs(), 1.0) {
                ClassLabel::GammaX
            } else if self.kappa.abs() <= 1.0 + CLASS_TOL {
                ClassLabel::GammaRTimesM1Z2
            } else {
                ClassLabel::SignedOnly
            }
        } else if self.sigma_p > CLASS_TOL && self.sigma_p < self.sigma - CLASS_TOL {
            let bound = kappa_bound(self.sigma, self.beta, self.sigma_p, self.beta_p)
                .expect("0 < sigma' < sigma checked above");
            if self.kappa != 0.0 && self.kappa.abs() <= bound + CLASS_TOL {
                ClassLabel::ThetaProper
            } else {
                ClassLabel::SignedOnly
            }
        } else {
            ClassLabel::SignedOnly
        }
    }

    /// Whether the tuple is the characteristic function of a probability
    /// measure, together with its class label.
    pub fn is_probability(&self) -> (bool, ClassLabel) {
        let label = self.classify();
        (label != ClassLabel::SignedOnly, label)
    }

    /// Density of the (sub-probability) fiber measure on R x {k}:
    ///
    /// ```text
    /// f_k(t) = (g_{sigma,beta}(t) + (-1)^k kappa g_{sigma',beta'}(t)) / 2
    /// ```
    ///
    /// Errors with [`Error::AtomicFiber`] when sigma = 0 or sigma' = 0, since
    /// the fiber measures then carry atoms. Values may be negative when the
    /// tuple is only a signed measure.
    pub fn fiber_density(&self, k: Bit, t: f64) -> Result<f64> {
        if self.sigma == 0.0 || self.sigma_p == 0.0 {
            return Err(Error::AtomicFiber);
        }
        let g0 = fiber_gaussian_density(self.sigma, self.beta, t);
        let g1 = fiber_gaussian_density(self.sigma_p, self.beta_p, t);
        Ok(0.5 * (g0 + k.sign() * self.kappa * g1))
    }

    /// Total mass of the fiber R x {k}: (1 + (-1)^k kappa) / 2.
    pub fn fiber_mass(&self, k: Bit) -> f64 {
        0.5 * (1.0 + k.sign() * self.kappa)
    }

    /// Convolution: pointwise product of characteristic functions, so the
    /// parameters add and the kappas multiply.
    pub fn convolve(&self, other: &ThetaParams) -> ThetaParams {
        ThetaParams {
            sigma: self.sigma + other.sigma,
            beta: self.beta + other.beta,
            sigma_p: self.sigma_p + other.sigma_p,
            beta_p: self.beta_p + other.beta_p,
            kappa: self.kappa * other.kappa,
        }
    }

    /// Reflection mu(B) -> mu(-B); conjugates the characteristic function.
    pub fn reflect(&self) -> ThetaParams {
        ThetaParams {
            sigma: self.sigma,
            beta: -self.beta,
            sigma_p: self.sigma_p,
            beta_p: -self.beta_p,
            kappa: self.kappa,
        }
    }

    /// Convolution with the own reflection: (2 sigma, 0, 2 sigma', 0, kappa^2).
    /// Preserves the probability property and kills both drifts.
    pub fn symmetrize(&self) -> ThetaParams {
        self.convolve(&self.reflect())
    }
}
