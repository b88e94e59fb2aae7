//! Reflection-band control of a mean-reverting diffusion.
//!
//! The crate solves a stationary control problem in which a unit mass of
//! agents each steer the diffusion `dX = -delta X dt + sigma dW` with
//! two-sided singular pushes, paying proportional costs and a quadratic
//! running cost against the population mean. The long-run optimal policy
//! reflects the state inside a band `[a_plus, a_minus]`.
//!
//! Modules, bottom up:
//!
//! * [`model`]: validated parameters, running cost, target points.
//! * [`special`]: erfc and the fundamental pair of the stationary equation.
//! * [`free_boundary`]: the smooth-fit band for fixed mean and price.
//! * [`stationary`]: the stationary law of the reflected state.
//! * [`equilibrium`]: the self-consistent mean and its occupation price.
//! * [`simulate`]: Monte Carlo verification of costs, laws, and values.

// reference constants are written to full precision on purpose, and
// negated comparisons like `!(x < tol)` are deliberate NaN guards
#![allow(clippy::excessive_precision)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod equilibrium;
pub mod free_boundary;
pub mod model;
pub mod simulate;
pub mod special;
pub mod stationary;

#[cfg(test)]
pub(crate) mod test_support {
    use crate::model::{ModelParams, RawParams};

    /// Benchmark parameter set used across the crate's tests.
    pub fn benchmark() -> ModelParams {
        ModelParams::new(RawParams {
            delta: 1.0,
            sigma: 1.0,
            rho: 1.5,
            phi: 1.0,
            psi: 0.5,
            x_bar: 1.0,
            theta_bar: 1.0,
            k_plus: 1.0,
            k_minus: 1.0,
        })
        .unwrap()
    }

    /// Fully symmetric variant: both anchors at the origin.
    pub fn symmetric() -> ModelParams {
        ModelParams::new(RawParams {
            delta: 1.0,
            sigma: 1.0,
            rho: 1.5,
            phi: 1.0,
            psi: 0.5,
            x_bar: 0.0,
            theta_bar: 0.0,
            k_plus: 1.0,
            k_minus: 1.0,
        })
        .unwrap()
    }
}
