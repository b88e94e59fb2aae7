//! Smooth-fit reflection band for a fixed population mean and occupation price.
//!
//! For given `(theta, lambda)` the marginal value `U = V'` of the singular
//! control problem solves, between the band endpoints,
//!
//! ```text
//! (sigma^2/2) U'' - delta x U' - delta U + l_x(x, theta) - lambda = 0,
//! U(a_plus) = -k_plus,   U(a_minus) = k_minus,
//! U'(a_plus) = 0,        U'(a_minus) = 0,
//! ```
//!
//! so `U = A phi + B psi + ubar` with the fundamental pair from
//! [`crate::special`] and the linear particular solution `ubar`. Value
//! matching fixes `(A, B)` by a 2x2 solve; the two smooth-fit derivatives
//! are the residuals driven to zero over `(a_plus, a_minus)` by a damped
//! Newton iteration with a bisection fallback.

use crate::model::ModelParams;
use crate::special::{self, BasisOverflow};
use thiserror::Error;

/// Default absolute tolerance on the smooth-fit residual.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Newton iteration budget.
pub const MAX_ITERATIONS: u32 = 100;

// combined growth-exponent budget for the initial band, with margin under
// the f64 overflow threshold of ~709
const INIT_EXPONENT_BUDGET: f64 = 650.0;

/// A solved reflection band for one `(theta, lambda)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boundaries {
    /// Lower endpoint: reflect upward here.
    pub a_plus: f64,
    /// Upper endpoint: reflect downward here.
    pub a_minus: f64,
    /// Weight of the decaying fundamental solution in `U`.
    pub coeff_a: f64,
    /// Weight of the growing fundamental solution in `U`.
    pub coeff_b: f64,
    /// Population mean the band was solved for.
    pub theta: f64,
    /// Occupation price the band was solved for.
    pub lambda: f64,
    /// Final smooth-fit residual `max(|U'(a_plus)|, |U'(a_minus)|)`.
    pub residual: f64,
}

/// Failure of the smooth-fit solve.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("smooth-fit residual stalled at {residual:e} after {iterations} iterations")]
    NonConvergence { residual: f64, iterations: u32 },
    #[error("fundamental solutions leave the f64 range near the band: growth exponent {exponent:.1} around x = {x:.4}")]
    Range { x: f64, exponent: f64 },
    #[error("band endpoints disagree on the long-run cost: {kappa_plus} vs {kappa_minus}")]
    InconsistentBoundaries { kappa_plus: f64, kappa_minus: f64 },
}

impl From<BasisOverflow> for SolveError {
    fn from(e: BasisOverflow) -> Self {
        SolveError::Range {
            x: e.x,
            exponent: e.exponent,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Fit {
    r1: f64,
    r2: f64,
    coeff_a: f64,
    coeff_b: f64,
}

impl Fit {
    fn residual(&self) -> f64 {
        self.r1.abs().max(self.r2.abs())
    }
}

struct FitContext {
    alpha: f64,
    k_plus: f64,
    k_minus: f64,
    slope: f64,
    intercept: f64,
}

impl FitContext {
    fn new(p: &ModelParams, theta: f64, lambda: f64) -> Self {
        let (intercept, slope) = special::particular_solution(p, theta, lambda, 0.0);
        Self {
            alpha: p.alpha(),
            k_plus: p.k_plus(),
            k_minus: p.k_minus(),
            slope,
            intercept,
        }
    }

    /// Value-matches `(A, B)` on `[a_plus, a_minus]` and returns the two
    /// smooth-fit derivative residuals.
    fn eval(&self, a_plus: f64, a_minus: f64) -> Result<Fit, BasisOverflow> {
        let bp = special::fundamental_pair(a_plus, self.alpha)?;
        let bm = special::fundamental_pair(a_minus, self.alpha)?;
        let rhs1 = -self.k_plus - (self.slope * a_plus + self.intercept);
        let rhs2 = self.k_minus - (self.slope * a_minus + self.intercept);
        let det = bp.phi * bm.psi - bp.psi * bm.phi;
        let coeff_a = (rhs1 * bm.psi - rhs2 * bp.psi) / det;
        let coeff_b = (rhs2 * bp.phi - rhs1 * bm.phi) / det;
        Ok(Fit {
            r1: coeff_a * bp.dphi + coeff_b * bp.dpsi + self.slope,
            r2: coeff_a * bm.dphi + coeff_b * bm.dpsi + self.slope,
            coeff_a,
            coeff_b,
        })
    }
}

/// Solves the smooth-fit system for the band `[a_plus, a_minus]`.
///
/// `tol` is the absolute threshold on the larger of the two derivative
/// residuals; [`DEFAULT_TOL`] is the intended production value. The band
/// always straddles the target points: `a_plus <= x_plus < x_minus <= a_minus`.
pub fn solve_boundaries(
    p: &ModelParams,
    theta: f64,
    lambda: f64,
    tol: f64,
) -> Result<Boundaries, SolveError> {
    let (x_plus, x_minus) = p.target_points(theta, lambda);
    let alpha = p.alpha();
    let gap = x_minus - x_plus;
    let ctx = FitContext::new(p, theta, lambda);

    // start from a band around the targets, wide enough to cover the
    // boundary layer (which scales as 1/sqrt(alpha)) but narrow enough to
    // keep the fundamental pair representable
    let mut w = gap.max(1.5 / alpha.sqrt());
    let exponents = |w: f64| {
        let lo = x_plus.abs() + w;
        let hi = x_minus.abs() + w;
        (0.5 * alpha * lo * lo, 0.5 * alpha * hi * hi)
    };
    loop {
        let (e_lo, e_hi) = exponents(w);
        if e_lo + e_hi <= INIT_EXPONENT_BUDGET {
            break;
        }
        w *= 0.7;
        if w < 0.1 * gap {
            let (e_lo, e_hi) = exponents(w);
            let (x, exponent) = if e_lo > e_hi {
                (x_plus - w, e_lo)
            } else {
                (x_minus + w, e_hi)
            };
            return Err(SolveError::Range { x, exponent });
        }
    }

    let mut a_plus = x_plus - w;
    let mut a_minus = x_minus + w;
    let mut fit = match ctx.eval(a_plus, a_minus) {
        Ok(f) if f.residual().is_finite() => f,
        _ => {
            // degenerate start: nudge outward once
            a_plus -= 1e-6 * (1.0 + a_plus.abs());
            a_minus += 1e-6 * (1.0 + a_minus.abs());
            match ctx.eval(a_plus, a_minus) {
                Ok(f) if f.residual().is_finite() => f,
                _ => {
                    return Err(SolveError::NonConvergence {
                        residual: f64::INFINITY,
                        iterations: 0,
                    })
                }
            }
        }
    };

    let mut fallbacks_left = 2u32;
    let mut iterations = 0u32;
    loop {
        let res = fit.residual();
        if res <= tol {
            return Ok(Boundaries {
                a_plus,
                a_minus,
                coeff_a: fit.coeff_a,
                coeff_b: fit.coeff_b,
                theta,
                lambda,
                residual: res,
            });
        }
        if iterations >= MAX_ITERATIONS {
            return Err(SolveError::NonConvergence {
                residual: res,
                iterations,
            });
        }
        iterations += 1;

        // forward-difference Jacobian of (r1, r2) in (a_plus, a_minus)
        let h1 = 1e-7 * (1.0 + a_plus.abs());
        let h2 = 1e-7 * (1.0 + a_minus.abs());
        let step = (
            ctx.eval(a_plus + h1, a_minus),
            ctx.eval(a_plus, a_minus + h2),
        );
        let newton = match step {
            (Ok(e1), Ok(e2)) => {
                let j11 = (e1.r1 - fit.r1) / h1;
                let j21 = (e1.r2 - fit.r2) / h1;
                let j12 = (e2.r1 - fit.r1) / h2;
                let j22 = (e2.r2 - fit.r2) / h2;
                let det = j11 * j22 - j12 * j21;
                if det.is_finite()
                    && det != 0.0
                    && [j11, j12, j21, j22].iter().all(|v| v.is_finite())
                {
                    Some((
                        -(j22 * fit.r1 - j12 * fit.r2) / det,
                        -(j11 * fit.r2 - j21 * fit.r1) / det,
                    ))
                } else {
                    None
                }
            }
            _ => None,
        };

        let mut advanced = false;
        if let Some((mut s1, mut s2)) = newton {
            // trust region: never jump by more than twice the band width
            let cap = 2.0 * (a_minus - a_plus);
            let size = s1.abs().max(s2.abs());
            if size > cap {
                s1 *= cap / size;
                s2 *= cap / size;
            }
            // backtrack, keeping the band around the targets
            let mut t = 1.0;
            while t > 1e-10 {
                let tp = a_plus + t * s1;
                let tm = a_minus + t * s2;
                if tp <= x_plus && tm >= x_minus && tp < tm {
                    if let Ok(trial) = ctx.eval(tp, tm) {
                        let tr = trial.residual();
                        if tr.is_finite() && tr < res {
                            a_plus = tp;
                            a_minus = tm;
                            fit = trial;
                            advanced = true;
                            break;
                        }
                    }
                }
                t *= 0.5;
            }
        }

        if !advanced {
            // Newton stalled or its Jacobian degenerated: alternate
            // one-dimensional bisections on the two residuals
            if fallbacks_left == 0 {
                return Err(SolveError::NonConvergence {
                    residual: res,
                    iterations,
                });
            }
            fallbacks_left -= 1;
            match fallback_sweeps(&ctx, x_plus, x_minus, a_plus, a_minus, tol) {
                Some((fp, fm, ff)) if ff.residual() < 0.9 * res => {
                    a_plus = fp;
                    a_minus = fm;
                    fit = ff;
                }
                _ => {
                    return Err(SolveError::NonConvergence {
                        residual: res,
                        iterations,
                    })
                }
            }
        }
    }
}

/// Alternating coordinate bisections: the lower endpoint is adjusted to kill
/// the lower smooth-fit residual with the upper endpoint frozen, then the
/// roles swap. Returns the best band found, if any step evaluated cleanly.
fn fallback_sweeps(
    ctx: &FitContext,
    x_plus: f64,
    x_minus: f64,
    mut a_plus: f64,
    mut a_minus: f64,
    tol: f64,
) -> Option<(f64, f64, Fit)> {
    let scale = (a_minus - a_plus).max(1e-3);
    for _ in 0..6 {
        let frozen_minus = a_minus;
        let wall_lo = x_plus.min(frozen_minus - 0.05 * scale);
        if let Some(root) = coordinate_root(
            |a| ctx.eval(a, frozen_minus).ok().map(|f| f.r1),
            wall_lo,
            -1.0,
            0.5 * scale,
        ) {
            a_plus = root;
        }
        let frozen_plus = a_plus;
        let wall_hi = x_minus.max(frozen_plus + 0.05 * scale);
        if let Some(root) = coordinate_root(
            |a| ctx.eval(frozen_plus, a).ok().map(|f| f.r2),
            wall_hi,
            1.0,
            0.5 * scale,
        ) {
            a_minus = root;
        }
        if let Ok(f) = ctx.eval(a_plus, a_minus) {
            if f.residual() <= tol {
                return Some((a_plus, a_minus, f));
            }
        }
    }
    ctx.eval(a_plus, a_minus)
        .ok()
        .filter(|f| f.residual().is_finite())
        .map(|f| (a_plus, a_minus, f))
}

/// Expands a bracket away from `wall` in direction `dir` until the residual
/// changes sign, then bisects it.
fn coordinate_root(g: impl Fn(f64) -> Option<f64>, wall: f64, dir: f64, step0: f64) -> Option<f64> {
    let eval = |x: f64| g(x).filter(|v| v.is_finite());
    let mut near = wall;
    let mut f_near = eval(near)?;
    if f_near == 0.0 {
        return Some(near);
    }
    let mut far = near;
    let mut step = step0.max(1e-8);
    let mut bracketed = false;
    let mut f_far = f_near;
    for _ in 0..60 {
        far += dir * step;
        f_far = eval(far)?;
        if f_near * f_far <= 0.0 {
            bracketed = true;
            break;
        }
        near = far;
        f_near = f_far;
        step *= 2.0;
    }
    if !bracketed {
        return None;
    }
    let (mut lo, mut f_lo, mut hi) = (near, f_near, far);
    let _ = f_far;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            return Some(mid);
        }
        let v = eval(mid)?;
        if f_lo * v <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
            f_lo = v;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Marginal value `U(x)` of the stopping game behind the band: `-k_plus`
/// at and below the lower endpoint, `k_minus` at and above the upper one,
/// and the smooth-fit solution between.
pub fn dynkin_value(p: &ModelParams, b: &Boundaries, x: f64) -> f64 {
    if x <= b.a_plus {
        return -p.k_plus();
    }
    if x >= b.a_minus {
        return p.k_minus();
    }
    let (ubar, _) = special::particular_solution(p, b.theta, b.lambda, x);
    let basis =
        special::fundamental_pair(x, p.alpha()).expect("interior of a solved band stays in range");
    b.coeff_a * basis.phi + b.coeff_b * basis.psi + ubar
}

/// The two endpoint expressions for the long-run average cost of the band.
///
/// At a smooth-fit root they agree; the gap measures how consistently the
/// band was solved.
pub fn kappa_candidates(p: &ModelParams, b: &Boundaries) -> (f64, f64) {
    let theta = b.theta;
    let lambda = b.lambda;
    let kappa_plus =
        p.k_plus() * p.delta() * b.a_plus + p.cost(b.a_plus, theta) + lambda * (theta - b.a_plus);
    let kappa_minus = -p.k_minus() * p.delta() * b.a_minus
        + p.cost(b.a_minus, theta)
        + lambda * (theta - b.a_minus);
    (kappa_plus, kappa_minus)
}

/// Long-run average cost of the `(theta, lambda)` problem under the band.
///
/// Fails with [`SolveError::InconsistentBoundaries`] when the two endpoint
/// expressions disagree beyond what the stored residual can explain.
pub fn ergodic_value(p: &ModelParams, b: &Boundaries) -> Result<f64, SolveError> {
    let (kappa_plus, kappa_minus) = kappa_candidates(p, b);
    let width = b.a_minus - b.a_plus;
    let scale = kappa_plus
        .abs()
        .max(kappa_minus.abs())
        .max((p.rho() + p.phi()) * (1.0 + width))
        .max(1.0);
    let threshold = 10.0 * b.residual.max(DEFAULT_TOL) * scale;
    if (kappa_plus - kappa_minus).abs() > threshold {
        return Err(SolveError::InconsistentBoundaries {
            kappa_plus,
            kappa_minus,
        });
    }
    Ok(kappa_plus)
}
