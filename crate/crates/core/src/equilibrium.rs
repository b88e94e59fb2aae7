//! Self-consistent population mean and its occupation price.
//!
//! A band solved for `(theta, lambda)` induces a stationary mean
//! `G(theta, lambda)`. Three fixed-point problems close the loop:
//!
//! * [`solve_potential_mfg`]: the price follows the rule
//!   `lambda = psi (theta_bar - theta)` and `theta` must reproduce itself,
//!   `G(theta, psi(theta_bar - theta)) = theta`. This is the equilibrium of
//!   the game; `H(theta) = G - theta` is strictly decreasing, so a sign
//!   bracket plus bisection is exact.
//! * [`solve_theta_given_lambda`]: the price is held fixed.
//! * [`solve_lambda_given_theta`]: the mean is held fixed and the price
//!   clears it; `G` is strictly increasing in `lambda`.
//!
//! Brackets come from the comparative statics of the band: every endpoint
//! moves with slope in `[m, 2m]` in `theta` and `[c, 2c]` in `lambda`, so
//! the fixed point is pinned inside an interval computed from the band at
//! `theta = 0`. Probing an endpoint that fails to solve (the band there
//! overflows the floating-point range) pulls it back inward; a finite value
//! with the wrong sign pushes it outward.

use crate::free_boundary::{self, Boundaries, SolveError};
use crate::model::ModelParams;
use crate::stationary;
use thiserror::Error;

/// Cap on band solves spent looking for a sign bracket.
const MAX_PROBES: u32 = 80;

/// Cap on bisection steps.
const MAX_BISECTIONS: u32 = 200;

/// A self-consistent mean, its price, and everything solved on the way.
#[derive(Debug, Clone)]
pub struct Equilibrium {
    /// The population mean reproduced by its own band.
    pub theta_star: f64,
    /// The price from the rule `psi (theta_bar - theta_star)`.
    pub lambda_star: f64,
    /// Smooth-fit band at `(theta_star, lambda_star)`.
    pub boundaries: Boundaries,
    /// Long-run cost at the equilibrium.
    pub kappa_star: f64,
    /// Residual of the mean consistency equation.
    pub r_theta: f64,
    /// Residual of the price consistency equation.
    pub r_lambda: f64,
    /// Derivative of the potential at the equilibrium mean.
    pub value_slope: f64,
    /// Bisection steps used.
    pub iterations: u32,
    /// Band solves spent probing for the bracket.
    pub probes: u32,
    /// Sign changes of the self-consistency function seen on a 41-point
    /// scan of the bracket. `1` means the returned root is the only one
    /// visible at that resolution; more signals multiple equilibria.
    pub sign_changes: u32,
}

/// Solution of one of the two constrained problems.
#[derive(Debug, Clone)]
pub struct ConstrainedSolution {
    pub theta: f64,
    pub lambda: f64,
    pub boundaries: Boundaries,
    /// Long-run cost at the solution.
    pub value: f64,
    /// Derivative of the potential there.
    pub value_slope: f64,
    pub iterations: u32,
}

/// Failure of a fixed-point solve.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquilibriumError {
    #[error("no sign bracket for the self-consistent mean after {probes} band solves")]
    NoBracket { probes: u32 },
    #[error("fixed-point residual stalled at {residual:e} after {iterations} bisections")]
    NonConvergence { residual: f64, iterations: u32 },
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// The price rule of the potential structure: `psi (theta_bar - theta)`.
pub fn price_rule(p: &ModelParams, theta: f64) -> f64 {
    p.psi() * (p.theta_bar() - theta)
}

/// Long-run cost along the price rule, as a function of the mean alone.
/// Its critical points are exactly the equilibria.
pub fn potential_value(p: &ModelParams, theta: f64, tol: f64) -> Result<f64, SolveError> {
    let b = free_boundary::solve_boundaries(p, theta, price_rule(p, theta), tol)?;
    free_boundary::ergodic_value(p, &b)
}

/// Derivative of the long-run cost in the mean at fixed price:
/// `phi (theta - G) + psi (theta - theta_bar) + lambda`.
pub fn value_derivative(
    p: &ModelParams,
    theta: f64,
    lambda: f64,
    tol: f64,
) -> Result<f64, SolveError> {
    let b = free_boundary::solve_boundaries(p, theta, lambda, tol)?;
    let mean = stationary::stationary_mean(p, &b);
    Ok(p.phi() * (theta - mean) + p.psi() * (theta - p.theta_bar()) + lambda)
}

struct FixedPoint {
    theta: f64,
    iterations: u32,
    probes: u32,
    /// Sign-confirmed bracket the bisection started from.
    bracket: (f64, f64),
}

/// Root of `H(theta) = G(theta, price(theta)) - theta`, which is strictly
/// decreasing whenever `price` is the rule above or a constant. `denom`
/// is a positive lower bound on `-H'`, used to size the initial bracket.
fn bisect_self_consistent_mean(
    p: &ModelParams,
    price: &dyn Fn(f64) -> f64,
    denom: f64,
    tol: f64,
) -> Result<FixedPoint, EquilibriumError> {
    let mut probes = 0u32;
    let eval = |theta: f64| -> Result<f64, SolveError> {
        let b = free_boundary::solve_boundaries(p, theta, price(theta), tol)?;
        Ok(stationary::stationary_mean(p, &b) - theta)
    };

    probes += 1;
    let (mut lo, mut hi) = match free_boundary::solve_boundaries(p, 0.0, price(0.0), tol) {
        Ok(b0) => ((b0.a_plus / denom).min(0.0), (b0.a_minus / denom).max(0.0)),
        Err(_) => {
            // no band at zero: fall back to a window around the anchors
            (
                p.x_bar().min(p.theta_bar()) - 1.0,
                p.x_bar().max(p.theta_bar()) + 1.0,
            )
        }
    };

    // establish H(lo) > 0
    let f_lo;
    loop {
        if probes >= MAX_PROBES {
            return scan_for_bracket(&eval, p, lo, hi, probes, tol);
        }
        probes += 1;
        match eval(lo) {
            Ok(h) if h > 0.0 => {
                f_lo = h;
                break;
            }
            Ok(_) => lo -= 1.0 + lo.abs(),
            Err(_) => lo = hi - 0.7 * (hi - lo),
        }
    }
    // establish H(hi) < 0
    loop {
        if probes >= MAX_PROBES {
            return scan_for_bracket(&eval, p, lo, hi, probes, tol);
        }
        probes += 1;
        match eval(hi) {
            Ok(h) if h < 0.0 => break,
            Ok(_) => hi += 1.0 + hi.abs(),
            Err(_) => hi = lo + 0.7 * (hi - lo),
        }
    }

    bisect_bracket(&eval, lo, hi, f_lo, probes, tol)
}

/// Bisects `eval` over a bracket with `eval(lo) = f_lo > 0 > eval(hi)`.
fn bisect_bracket(
    eval: &dyn Fn(f64) -> Result<f64, SolveError>,
    mut lo: f64,
    mut hi: f64,
    mut f_lo: f64,
    probes: u32,
    tol: f64,
) -> Result<FixedPoint, EquilibriumError> {
    let bracket = (lo, hi);
    let mut iterations = 0u32;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            return Ok(FixedPoint {
                theta: mid,
                iterations,
                probes,
                bracket,
            });
        }
        iterations += 1;
        if iterations > MAX_BISECTIONS {
            return Err(EquilibriumError::NonConvergence {
                residual: f_lo,
                iterations,
            });
        }
        let h = eval(mid)?;
        if h.abs() <= (10.0 * tol).max(1e-14) * (1.0 + mid.abs()) {
            return Ok(FixedPoint {
                theta: mid,
                iterations,
                probes,
                bracket,
            });
        }
        if h > 0.0 {
            lo = mid;
            f_lo = h;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * (1.0 + mid.abs()) {
            return Ok(FixedPoint {
                theta: 0.5 * (lo + hi),
                iterations,
                probes,
                bracket,
            });
        }
    }
}

/// Last-resort coarse scan for a sign change when endpoint probing ran out
/// of budget.
fn scan_for_bracket(
    eval: &dyn Fn(f64) -> Result<f64, SolveError>,
    p: &ModelParams,
    lo: f64,
    hi: f64,
    mut probes: u32,
    tol: f64,
) -> Result<FixedPoint, EquilibriumError> {
    let (lo, hi) = if lo < hi {
        (lo, hi)
    } else {
        (
            p.x_bar().min(p.theta_bar()) - 2.0,
            p.x_bar().max(p.theta_bar()) + 2.0,
        )
    };
    let mut last: Option<(f64, f64)> = None;
    for i in 0..=40 {
        let theta = lo + (hi - lo) * i as f64 / 40.0;
        probes += 1;
        if let Ok(h) = eval(theta) {
            if let Some((prev_theta, prev_h)) = last {
                if prev_h > 0.0 && h <= 0.0 {
                    return bisect_bracket(eval, prev_theta, theta, prev_h, probes, tol);
                }
            }
            last = Some((theta, h));
        }
    }
    Err(EquilibriumError::NoBracket { probes })
}

/// Counts strict sign alternations of the self-consistency function on a
/// 41-point scan of `bracket`, skipping points where the band solve fails.
fn count_sign_changes(
    p: &ModelParams,
    price: &dyn Fn(f64) -> f64,
    bracket: (f64, f64),
    tol: f64,
) -> u32 {
    let (lo, hi) = bracket;
    let mut changes = 0u32;
    let mut last_sign = 0i8;
    for i in 0..=40 {
        let theta = lo + (hi - lo) * i as f64 / 40.0;
        let Ok(b) = free_boundary::solve_boundaries(p, theta, price(theta), tol) else {
            continue;
        };
        let h = stationary::stationary_mean(p, &b) - theta;
        let sign = if h > 0.0 {
            1i8
        } else if h < 0.0 {
            -1i8
        } else {
            0i8
        };
        if sign != 0 {
            if last_sign != 0 && sign != last_sign {
                changes += 1;
            }
            last_sign = sign;
        }
    }
    changes
}

/// Equilibrium of the game: the mean that reproduces itself under the
/// price rule `lambda = psi (theta_bar - theta)`.
pub fn solve_potential_mfg(p: &ModelParams, tol: f64) -> Result<Equilibrium, EquilibriumError> {
    let c = p.constants();
    let denom = 1.0 - 2.0 * c.m + c.c * p.psi();
    let rule = |theta: f64| price_rule(p, theta);
    let fp = bisect_self_consistent_mean(p, &rule, denom, tol)?;
    let sign_changes = count_sign_changes(p, &rule, fp.bracket, tol);

    let theta_star = fp.theta;
    let lambda_star = price_rule(p, theta_star);
    let boundaries = free_boundary::solve_boundaries(p, theta_star, lambda_star, tol)?;
    let kappa_star = free_boundary::ergodic_value(p, &boundaries)?;
    let (r_theta, r_lambda) = stationary::consistency_residuals(p, &boundaries);
    let mean = stationary::stationary_mean(p, &boundaries);
    let value_slope =
        p.phi() * (theta_star - mean) + p.psi() * (theta_star - p.theta_bar()) + lambda_star;
    Ok(Equilibrium {
        theta_star,
        lambda_star,
        boundaries,
        kappa_star,
        r_theta,
        r_lambda,
        value_slope,
        iterations: fp.iterations,
        probes: fp.probes,
        sign_changes,
    })
}

fn constrained_solution(
    p: &ModelParams,
    theta: f64,
    lambda: f64,
    iterations: u32,
    tol: f64,
) -> Result<ConstrainedSolution, EquilibriumError> {
    let boundaries = free_boundary::solve_boundaries(p, theta, lambda, tol)?;
    let value = free_boundary::ergodic_value(p, &boundaries)?;
    let mean = stationary::stationary_mean(p, &boundaries);
    let value_slope = p.phi() * (theta - mean) + p.psi() * (theta - p.theta_bar()) + lambda;
    Ok(ConstrainedSolution {
        theta,
        lambda,
        boundaries,
        value,
        value_slope,
        iterations,
    })
}

/// Self-consistent mean at a fixed price.
pub fn solve_theta_given_lambda(
    p: &ModelParams,
    lambda: f64,
    tol: f64,
) -> Result<ConstrainedSolution, EquilibriumError> {
    let denom = 1.0 - 2.0 * p.constants().m;
    let rule = move |_: f64| lambda;
    let fp = bisect_self_consistent_mean(p, &rule, denom, tol)?;
    constrained_solution(p, fp.theta, lambda, fp.iterations, tol)
}

/// Expanding-bracket bisection for the price that clears a fixed mean,
/// started around `center`. The cleared-mean gap is strictly increasing in
/// the price, so any confirmed bracket isolates the same root; the
/// bisection runs down to floating-point width to make the answer
/// independent of the starting point.
fn bisect_lambda_from_center(
    p: &ModelParams,
    theta: f64,
    center: f64,
    tol: f64,
) -> Result<(f64, u32), EquilibriumError> {
    let mut probes = 0u32;
    let eval = |lambda: f64| -> Result<f64, SolveError> {
        let b = free_boundary::solve_boundaries(p, theta, lambda, tol)?;
        Ok(stationary::stationary_mean(p, &b) - theta)
    };

    // the mean moves with slope in [c, 2c] in lambda, so step in units of 1/c
    let unit = (p.rho() + p.phi()) * 0.5;

    // establish g(lo) < 0 < g(hi); g is increasing in lambda
    let mut d_lo = unit;
    let (mut lo, mut f_lo);
    loop {
        if probes >= MAX_PROBES {
            return Err(EquilibriumError::NoBracket { probes });
        }
        probes += 1;
        lo = center - d_lo;
        match eval(lo) {
            Ok(g) if g < 0.0 => {
                f_lo = g;
                break;
            }
            Ok(_) => d_lo *= 2.0,
            Err(_) => d_lo *= 0.7,
        }
    }
    let mut d_hi = unit;
    let mut hi;
    loop {
        if probes >= MAX_PROBES {
            return Err(EquilibriumError::NoBracket { probes });
        }
        probes += 1;
        hi = center + d_hi;
        match eval(hi) {
            Ok(g) if g > 0.0 => break,
            Ok(_) => d_hi *= 2.0,
            Err(_) => d_hi *= 0.7,
        }
    }

    let mut iterations = 0u32;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            return Ok((mid, iterations));
        }
        iterations += 1;
        if iterations > MAX_BISECTIONS {
            return Err(EquilibriumError::NonConvergence {
                residual: f_lo,
                iterations,
            });
        }
        let g = eval(mid)?;
        if g == 0.0 {
            return Ok((mid, iterations));
        }
        if g < 0.0 {
            lo = mid;
            f_lo = g;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * (1.0 + mid.abs()) {
            return Ok((0.5 * (lo + hi), iterations));
        }
    }
}

/// Price that makes the band's stationary mean hit a prescribed `theta`.
pub fn solve_lambda_given_theta(
    p: &ModelParams,
    theta: f64,
    tol: f64,
) -> Result<ConstrainedSolution, EquilibriumError> {
    // the band is centered near theta when lambda is near this value
    let center = p.rho() * (theta - p.x_bar()) - 0.5 * (p.k_minus() - p.k_plus()) * p.delta();
    let (lambda, iterations) = bisect_lambda_from_center(p, theta, center, tol)?;
    constrained_solution(p, theta, lambda, iterations, tol)
}
