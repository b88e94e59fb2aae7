//! Model parameters, the running cost, and the control target points.
//!
//! The state is a mean-reverting diffusion `dX = -delta X dt + sigma dW`
//! steered by a two-sided singular control with proportional costs
//! `k_plus` (pushing up) and `k_minus` (pushing down). The running cost
//! against a population mean `theta` is
//!
//! ```text
//! l(x, theta) = rho/2 (x - x_bar)^2 + phi/2 (x - theta)^2 + psi/2 (theta - theta_bar)^2
//! ```
//!
//! All downstream solvers take a validated [`ModelParams`], so the regime
//! checks live in one place: [`ModelParams::new`].

use serde::Deserialize;
use thiserror::Error;

/// Unvalidated parameter record; the JSON wire format.
///
/// Exactly these nine snake_case fields are accepted; unknown fields are
/// rejected at parse time.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawParams {
    pub delta: f64,
    pub sigma: f64,
    pub rho: f64,
    pub phi: f64,
    pub psi: f64,
    pub x_bar: f64,
    pub theta_bar: f64,
    pub k_plus: f64,
    pub k_minus: f64,
}

/// A parameter set that violates the admissible regime.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("parameter {0} must be a finite number")]
    NonFinite(&'static str),
    #[error("rate delta must be positive, got {0}")]
    NonPositiveDelta(f64),
    #[error("volatility sigma must be nonzero")]
    ZeroSigma,
    #[error("anchor weight rho must be positive, got {0}")]
    NonPositiveRho(f64),
    #[error("crowd weight phi must be positive, got {0}")]
    NonPositivePhi(f64),
    #[error("mean-target weight psi must be nonnegative, got {0}")]
    NegativePsi(f64),
    #[error("control cost k_plus must be positive, got {0}")]
    NonPositiveKPlus(f64),
    #[error("control cost k_minus must be positive, got {0}")]
    NonPositiveKMinus(f64),
    #[error("crowd weight phi = {phi} must stay below anchor weight rho = {rho}")]
    PhiNotBelowRho { phi: f64, rho: f64 },
}

/// Failure to obtain a [`ModelParams`] from a JSON document.
#[derive(Debug, Error)]
pub enum ParamJsonError {
    #[error("invalid parameter JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Invalid(#[from] ParamError),
}

/// Constants derived from the parameters and used throughout the solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    /// Sensitivity of the target points to the population mean, `phi / (rho + phi)`.
    pub m: f64,
    /// Sensitivity of the target points to the occupation price, `1 / (rho + phi)`.
    pub c: f64,
    /// Inverse squared length scale of the diffusion, `2 delta / sigma^2`.
    pub alpha: f64,
}

/// Validated model parameters.
///
/// Construction goes through [`ModelParams::new`] (or [`ModelParams::from_json`]),
/// which enforces `delta > 0`, `sigma != 0` (stored as `|sigma|`), `rho > 0`,
/// `0 < phi < rho`, `psi >= 0`, and `k_plus, k_minus > 0`. Everything else in
/// the crate assumes these hold.
#[derive(Debug, Clone, Copy)]
pub struct ModelParams {
    delta: f64,
    sigma: f64,
    rho: f64,
    phi: f64,
    psi: f64,
    x_bar: f64,
    theta_bar: f64,
    k_plus: f64,
    k_minus: f64,
    constants: DerivedConstants,
}

impl ModelParams {
    pub fn new(raw: RawParams) -> Result<Self, ParamError> {
        let fields = [
            (raw.delta, "delta"),
            (raw.sigma, "sigma"),
            (raw.rho, "rho"),
            (raw.phi, "phi"),
            (raw.psi, "psi"),
            (raw.x_bar, "x_bar"),
            (raw.theta_bar, "theta_bar"),
            (raw.k_plus, "k_plus"),
            (raw.k_minus, "k_minus"),
        ];
        for (value, name) in fields {
            if !value.is_finite() {
                return Err(ParamError::NonFinite(name));
            }
        }
        if raw.delta <= 0.0 {
            return Err(ParamError::NonPositiveDelta(raw.delta));
        }
        if raw.sigma == 0.0 {
            return Err(ParamError::ZeroSigma);
        }
        if raw.rho <= 0.0 {
            return Err(ParamError::NonPositiveRho(raw.rho));
        }
        if raw.phi <= 0.0 {
            return Err(ParamError::NonPositivePhi(raw.phi));
        }
        if raw.psi < 0.0 {
            return Err(ParamError::NegativePsi(raw.psi));
        }
        if raw.k_plus <= 0.0 {
            return Err(ParamError::NonPositiveKPlus(raw.k_plus));
        }
        if raw.k_minus <= 0.0 {
            return Err(ParamError::NonPositiveKMinus(raw.k_minus));
        }
        if raw.phi >= raw.rho {
            return Err(ParamError::PhiNotBelowRho {
                phi: raw.phi,
                rho: raw.rho,
            });
        }
        // only |sigma| enters the dynamics
        let sigma = raw.sigma.abs();
        let constants = DerivedConstants {
            m: raw.phi / (raw.rho + raw.phi),
            c: 1.0 / (raw.rho + raw.phi),
            alpha: 2.0 * raw.delta / (sigma * sigma),
        };
        Ok(Self {
            delta: raw.delta,
            sigma,
            rho: raw.rho,
            phi: raw.phi,
            psi: raw.psi,
            x_bar: raw.x_bar,
            theta_bar: raw.theta_bar,
            k_plus: raw.k_plus,
            k_minus: raw.k_minus,
            constants,
        })
    }

    /// Parses the nine-field JSON record and validates it.
    pub fn from_json(text: &str) -> Result<Self, ParamJsonError> {
        let raw: RawParams = serde_json::from_str(text)?;
        Ok(Self::new(raw)?)
    }

    #[inline]
    pub fn delta(&self) -> f64 {
        self.delta
    }
    #[inline]
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    #[inline]
    pub fn rho(&self) -> f64 {
        self.rho
    }
    #[inline]
    pub fn phi(&self) -> f64 {
        self.phi
    }
    #[inline]
    pub fn psi(&self) -> f64 {
        self.psi
    }
    #[inline]
    pub fn x_bar(&self) -> f64 {
        self.x_bar
    }
    #[inline]
    pub fn theta_bar(&self) -> f64 {
        self.theta_bar
    }
    #[inline]
    pub fn k_plus(&self) -> f64 {
        self.k_plus
    }
    #[inline]
    pub fn k_minus(&self) -> f64 {
        self.k_minus
    }
    #[inline]
    pub fn constants(&self) -> DerivedConstants {
        self.constants
    }
    #[inline]
    pub fn alpha(&self) -> f64 {
        self.constants.alpha
    }

    /// Running cost `l(x, theta)`.
    #[inline]
    pub fn cost(&self, x: f64, theta: f64) -> f64 {
        let dx = x - self.x_bar;
        let dc = x - theta;
        let dt = theta - self.theta_bar;
        0.5 * (self.rho * dx * dx + self.phi * dc * dc + self.psi * dt * dt)
    }

    /// State derivative of the running cost, `l_x(x, theta)`.
    #[inline]
    pub fn cost_dx(&self, x: f64, theta: f64) -> f64 {
        (self.phi + self.rho) * x - self.phi * theta - self.rho * self.x_bar
    }

    /// Mean derivative of the running cost, `l_theta(x, theta)`.
    #[inline]
    pub fn cost_dtheta(&self, x: f64, theta: f64) -> f64 {
        self.phi * (theta - x) + self.psi * (theta - self.theta_bar)
    }

    /// Target points `(x_plus, x_minus)` of the `(theta, lambda)` problem.
    ///
    /// `x_plus` is where pushing up at marginal cost `k_plus` breaks even,
    /// `x_minus` the same for pushing down; `x_plus < x_minus` always.
    #[inline]
    pub fn target_points(&self, theta: f64, lambda: f64) -> (f64, f64) {
        let num = self.phi * theta + lambda + self.rho * self.x_bar;
        let den = self.phi + self.rho;
        (
            (num - self.k_plus * self.delta) / den,
            (num + self.k_minus * self.delta) / den,
        )
    }
}
