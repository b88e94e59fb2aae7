//! Monte Carlo verification of the closed forms.
//!
//! Two engines, both driven by per-path counter-seeded RNG streams so that
//! results are bit-identical for a given `(inputs, seed)` regardless of how
//! many worker threads execute the paths:
//!
//! * [`simulate_reflected`]: Euler steps of the diffusion reflected into a
//!   band by projection, accumulating the long-run average cost, the
//!   time-average state, the push rates, and an occupation histogram.
//! * [`simulate_dynkin`]: unreflected paths stopped at the first exit from
//!   the band, estimating the discounted stopping-game value that the
//!   smooth-fit construction computes in closed form.

use crate::free_boundary::Boundaries;
use crate::model::ModelParams;
use crate::stationary::StationaryStats;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Discretization and sampling plan for one simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Euler time step.
    pub dt: f64,
    /// Total simulated time per path.
    pub horizon: f64,
    /// Initial stretch excluded from every average.
    pub burn_in: f64,
    /// Number of independent paths.
    pub n_paths: u32,
    /// Base seed; path `i` uses stream `i` of this seed.
    pub seed: u64,
    /// Number of occupation-histogram bins across the band.
    pub n_bins: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            horizon: 200.0,
            burn_in: 20.0,
            n_paths: 64,
            seed: 0,
            n_bins: 50,
        }
    }
}

/// Rejected simulation setup.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimConfigError {
    #[error("time step must be finite and positive, got {0}")]
    NonPositiveDt(f64),
    #[error("burn-in {burn_in} must be nonnegative and below the horizon {horizon}")]
    BurnInOutOfRange { burn_in: f64, horizon: f64 },
    #[error("at least one path is required")]
    NoPaths,
    #[error("the occupation histogram needs at least one bin")]
    NoBins,
    #[error("explicit scheme unstable: dt * delta = {0} must stay below 0.5")]
    UnstableStep(f64),
    #[error("start point {x0} lies outside the open band ({a_plus}, {a_minus})")]
    StartOutsideBand { x0: f64, a_plus: f64, a_minus: f64 },
}

impl SimConfig {
    fn validate(&self, p: &ModelParams) -> Result<(), SimConfigError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(SimConfigError::NonPositiveDt(self.dt));
        }
        if !(self.burn_in >= 0.0 && self.horizon.is_finite() && self.burn_in < self.horizon) {
            return Err(SimConfigError::BurnInOutOfRange {
                burn_in: self.burn_in,
                horizon: self.horizon,
            });
        }
        if self.n_paths == 0 {
            return Err(SimConfigError::NoPaths);
        }
        if self.n_bins == 0 {
            return Err(SimConfigError::NoBins);
        }
        let stability = self.dt * p.delta();
        if stability >= 0.5 {
            return Err(SimConfigError::UnstableStep(stability));
        }
        Ok(())
    }
}

/// Path-ensemble estimates from [`simulate_reflected`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimStats {
    /// Long-run average cost of the band against its own stationary mean
    /// field (closed-form mean of the band), push costs included.
    pub cost_mfc: f64,
    pub se_cost_mfc: f64,
    /// Long-run average cost under the supplied `(theta, lambda)`
    /// objective, push costs included.
    pub cost_potential: f64,
    pub se_cost_potential: f64,
    /// Time-average of the state after burn-in.
    pub mean: f64,
    pub se_mean: f64,
    /// Long-run upward push rate at the lower endpoint.
    pub rate_plus: f64,
    pub se_rate_plus: f64,
    /// Long-run downward push rate at the upper endpoint.
    pub rate_minus: f64,
    pub se_rate_minus: f64,
    /// Closed-form stationary mean of the band; the mean field that
    /// `cost_mfc` is measured against.
    pub mean_field: f64,
    /// Occupation frequencies over `n_bins` equal bins; sums to 1.
    pub histogram: Vec<f64>,
    /// The `n_bins + 1` bin edges spanning the band.
    pub bin_edges: Vec<f64>,
    /// Paths in the ensemble.
    pub n_paths: u32,
    /// Post-burn-in time per path that entered the averages.
    pub measured_time: f64,
}

struct PathSums {
    cost_mfc: f64,
    cost_potential: f64,
    mean: f64,
    rate_plus: f64,
    rate_minus: f64,
    counts: Vec<u64>,
}

fn ensemble_mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0) / n).sqrt())
}

/// Simulates the diffusion reflected into the band of `b` and measures the
/// long-run averages of the `(theta, lambda)` objective.
///
/// Each Euler proposal is projected back onto the band; the overshoot is
/// the increment of the corresponding push process. The cost against the
/// band's own closed-form stationary mean is accumulated alongside, so a
/// single run verifies both the potential-game cost and the mean-field
/// cost. The start point is the band midpoint.
pub fn simulate_reflected(
    p: &ModelParams,
    b: &Boundaries,
    theta: f64,
    lambda: f64,
    cfg: &SimConfig,
) -> Result<SimStats, SimConfigError> {
    cfg.validate(p)?;
    let a_plus = b.a_plus;
    let a_minus = b.a_minus;
    let width = a_minus - a_plus;
    debug_assert!(width > 0.0);
    let mean_field = StationaryStats::new(p, a_plus, a_minus).mean();

    let n_steps = (cfg.horizon / cfg.dt).ceil() as u64;
    let burn_steps = ((cfg.burn_in / cfg.dt).ceil() as u64).min(n_steps - 1);
    let span = (n_steps - burn_steps) as f64 * cfg.dt;
    let x0 = 0.5 * (a_plus + a_minus);
    let n_bins = cfg.n_bins as usize;

    let delta = p.delta();
    let sigma = p.sigma();
    let sqrt_dt = cfg.dt.sqrt();

    let paths: Vec<PathSums> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|path_index| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(path_index as u64);
            let mut x = x0;
            let mut occ_mfc = 0.0;
            let mut occ_potential = 0.0;
            let mut occ_state = 0.0;
            let mut xi_plus = 0.0;
            let mut xi_minus = 0.0;
            let mut counts = vec![0u64; n_bins];
            for step in 0..n_steps {
                let measured = step >= burn_steps;
                if measured {
                    occ_potential += p.cost(x, theta) + lambda * (theta - x);
                    occ_mfc += p.cost(x, mean_field);
                    occ_state += x;
                    let mut bin = ((x - a_plus) / width * n_bins as f64) as usize;
                    if bin >= n_bins {
                        bin = n_bins - 1;
                    }
                    counts[bin] += 1;
                }
                let z: f64 = StandardNormal.sample(&mut rng);
                let proposal = x - delta * x * cfg.dt + sigma * sqrt_dt * z;
                if measured {
                    if proposal < a_plus {
                        xi_plus += a_plus - proposal;
                    } else if proposal > a_minus {
                        xi_minus += proposal - a_minus;
                    }
                }
                x = proposal.clamp(a_plus, a_minus);
            }
            let push_cost = (p.k_plus() * xi_plus + p.k_minus() * xi_minus) / span;
            PathSums {
                cost_mfc: occ_mfc * cfg.dt / span + push_cost,
                cost_potential: occ_potential * cfg.dt / span + push_cost,
                mean: occ_state * cfg.dt / span,
                rate_plus: xi_plus / span,
                rate_minus: xi_minus / span,
                counts,
            }
        })
        .collect();

    // reductions run sequentially in path order: bit-identical results for
    // any worker count
    let collect = |f: fn(&PathSums) -> f64| paths.iter().map(f).collect::<Vec<f64>>();
    let (cost_mfc, se_cost_mfc) = ensemble_mean_se(&collect(|s| s.cost_mfc));
    let (cost_potential, se_cost_potential) = ensemble_mean_se(&collect(|s| s.cost_potential));
    let (mean, se_mean) = ensemble_mean_se(&collect(|s| s.mean));
    let (rate_plus, se_rate_plus) = ensemble_mean_se(&collect(|s| s.rate_plus));
    let (rate_minus, se_rate_minus) = ensemble_mean_se(&collect(|s| s.rate_minus));

    let mut total_counts = vec![0u64; n_bins];
    for path in &paths {
        for (total, c) in total_counts.iter_mut().zip(&path.counts) {
            *total += *c;
        }
    }
    let samples: u64 = total_counts.iter().sum();
    let histogram = total_counts
        .iter()
        .map(|&c| c as f64 / samples as f64)
        .collect();
    let bin_edges = (0..=n_bins)
        .map(|j| a_plus + width * j as f64 / n_bins as f64)
        .collect();

    Ok(SimStats {
        cost_mfc,
        se_cost_mfc,
        cost_potential,
        se_cost_potential,
        mean,
        se_mean,
        rate_plus,
        se_rate_plus,
        rate_minus,
        se_rate_minus,
        mean_field,
        histogram,
        bin_edges,
        n_paths: cfg.n_paths,
        measured_time: span,
    })
}

/// Monte Carlo estimate of the stopping-game value from one start point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DynkinEstimate {
    /// Mean discounted payoff across paths.
    pub value: f64,
    /// Sampling error plus the horizon-truncation bound.
    pub std_error: f64,
    /// Worst-case contribution of the discarded tail beyond the horizon.
    pub truncation_bound: f64,
    /// Fraction of paths that exited the band before the horizon.
    pub exit_fraction: f64,
}

/// Runs the stopping game behind the band: unreflected paths from `x0`,
/// stopped at the first step outside the open band, paying the discounted
/// running gradient cost plus the stopping payoff of whichever side is hit.
///
/// Paths still inside at the horizon contribute their running integral
/// only; the worst case of the discarded tail is reported and folded into
/// `std_error`.
pub fn simulate_dynkin(
    p: &ModelParams,
    b: &Boundaries,
    x0: f64,
    cfg: &SimConfig,
) -> Result<DynkinEstimate, SimConfigError> {
    cfg.validate(p)?;
    if !(x0 > b.a_plus && x0 < b.a_minus) {
        return Err(SimConfigError::StartOutsideBand {
            x0,
            a_plus: b.a_plus,
            a_minus: b.a_minus,
        });
    }
    let theta = b.theta;
    let lambda = b.lambda;
    let n_steps = (cfg.horizon / cfg.dt).ceil() as u64;
    let delta = p.delta();
    let sigma = p.sigma();
    let sqrt_dt = cfg.dt.sqrt();
    let discount_step = (-delta * cfg.dt).exp();

    let outcomes: Vec<(f64, bool)> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|path_index| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(path_index as u64);
            let mut x = x0;
            let mut discount = 1.0;
            let mut payoff = 0.0;
            for _ in 0..n_steps {
                if x <= b.a_plus {
                    return (payoff - p.k_plus() * discount, true);
                }
                if x >= b.a_minus {
                    return (payoff + p.k_minus() * discount, true);
                }
                payoff += discount * (p.cost_dx(x, theta) - lambda) * cfg.dt;
                let z: f64 = StandardNormal.sample(&mut rng);
                x += -delta * x * cfg.dt + sigma * sqrt_dt * z;
                discount *= discount_step;
            }
            (payoff, false)
        })
        .collect();

    let values: Vec<f64> = outcomes.iter().map(|(v, _)| *v).collect();
    let (value, se) = ensemble_mean_se(&values);
    let gradient_scale = (p.cost_dx(b.a_plus, theta) - lambda)
        .abs()
        .max((p.cost_dx(b.a_minus, theta) - lambda).abs());
    let truncation_bound =
        (-delta * cfg.horizon).exp() * (p.k_plus() + p.k_minus() + gradient_scale / delta);
    let exits = outcomes.iter().filter(|(_, exited)| *exited).count();
    Ok(DynkinEstimate {
        value,
        std_error: se + truncation_bound,
        truncation_bound,
        exit_fraction: exits as f64 / cfg.n_paths as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free_boundary::{dynkin_value, ergodic_value, solve_boundaries, DEFAULT_TOL};
    use crate::stationary;
    use crate::test_support;

    const THETA_STAR: f64 = 0.632444463844932;
    const LAMBDA_STAR: f64 = 0.183777768077534;

    fn equilibrium_band(p: &ModelParams) -> Boundaries {
        solve_boundaries(p, THETA_STAR, LAMBDA_STAR, DEFAULT_TOL).unwrap()
    }

    #[test]
    fn defaults_are_the_documented_plan() {
        let cfg = SimConfig::default();
        assert_eq!(
            cfg,
            SimConfig {
                dt: 1e-3,
                horizon: 200.0,
                burn_in: 20.0,
                n_paths: 64,
                seed: 0,
                n_bins: 50,
            }
        );
        let parsed: SimConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(parsed, cfg);
        let partial: SimConfig = serde_json::from_str(r#"{"dt": 0.01, "seed": 9}"#).unwrap();
        assert_eq!(partial.dt, 0.01);
        assert_eq!(partial.seed, 9);
        assert_eq!(partial.horizon, 200.0);
        assert!(serde_json::from_str::<SimConfig>(r#"{"dtt": 1.0}"#).is_err());
    }

    #[test]
    fn bad_plans_are_rejected_by_name() {
        let p = test_support::benchmark();
        let b = equilibrium_band(&p);
        let run = |cfg: SimConfig| simulate_reflected(&p, &b, THETA_STAR, LAMBDA_STAR, &cfg);
        let base = SimConfig {
            dt: 0.01,
            horizon: 2.0,
            burn_in: 0.5,
            n_paths: 2,
            seed: 0,
            n_bins: 4,
        };
        assert!(matches!(
            run(SimConfig { dt: 0.0, ..base }),
            Err(SimConfigError::NonPositiveDt(_))
        ));
        assert!(matches!(
            run(SimConfig { dt: -0.1, ..base }),
            Err(SimConfigError::NonPositiveDt(_))
        ));
        assert!(matches!(
            run(SimConfig {
                burn_in: 2.0,
                ..base
            }),
            Err(SimConfigError::BurnInOutOfRange { .. })
        ));
        assert!(matches!(
            run(SimConfig {
                burn_in: -1.0,
                ..base
            }),
            Err(SimConfigError::BurnInOutOfRange { .. })
        ));
        assert!(matches!(
            run(SimConfig { n_paths: 0, ..base }),
            Err(SimConfigError::NoPaths)
        ));
        assert!(matches!(
            run(SimConfig { n_bins: 0, ..base }),
            Err(SimConfigError::NoBins)
        ));
        // delta = 1, so dt = 0.5 saturates the stability guard
        assert!(matches!(
            run(SimConfig { dt: 0.5, ..base }),
            Err(SimConfigError::UnstableStep(_))
        ));
        assert!(matches!(
            simulate_dynkin(&p, &b, b.a_plus - 0.5, &base),
            Err(SimConfigError::StartOutsideBand { .. })
        ));
        assert!(matches!(
            simulate_dynkin(&p, &b, b.a_minus, &base),
            Err(SimConfigError::StartOutsideBand { .. })
        ));
    }

    #[test]
    fn reflected_averages_match_the_closed_forms() {
        let p = test_support::benchmark();
        let b = equilibrium_band(&p);
        let cfg = SimConfig {
            dt: 1e-3,
            horizon: 60.0,
            burn_in: 10.0,
            n_paths: 32,
            seed: 11,
            n_bins: 50,
        };
        let stats = simulate_reflected(&p, &b, THETA_STAR, LAMBDA_STAR, &cfg).unwrap();

        let law = StationaryStats::for_band(&p, &b);
        let kappa = ergodic_value(&p, &b).unwrap();
        let dt_allowance = 2.0 * cfg.dt.sqrt();

        assert!(
            (stats.mean - law.mean()).abs() < 3.0 * stats.se_mean + 0.2 * dt_allowance,
            "mean {} vs {} (se {})",
            stats.mean,
            law.mean(),
            stats.se_mean
        );
        assert!(
            (stats.cost_potential - kappa).abs() < 3.0 * stats.se_cost_potential + dt_allowance,
            "cost {} vs kappa {kappa} (se {})",
            stats.cost_potential,
            stats.se_cost_potential
        );
        // at the equilibrium band the mean-field cost is the same number
        assert!(
            (stats.cost_mfc - kappa).abs() < 3.0 * stats.se_cost_mfc + dt_allowance,
            "mfc cost {} vs kappa {kappa}",
            stats.cost_mfc
        );
        assert!((stats.mean_field - THETA_STAR).abs() < 1e-8);

        let (rate_plus, rate_minus) = law.push_rates();
        assert!(
            (stats.rate_plus - rate_plus).abs() < 3.0 * stats.se_rate_plus + dt_allowance,
            "up rate {} vs {rate_plus}",
            stats.rate_plus
        );
        assert!(
            (stats.rate_minus - rate_minus).abs() < 3.0 * stats.se_rate_minus + dt_allowance,
            "down rate {} vs {rate_minus}",
            stats.rate_minus
        );

        // state averages stay inside the band by construction
        assert!(stats.mean >= b.a_plus && stats.mean <= b.a_minus);
        assert!(stats.rate_plus >= 0.0 && stats.rate_minus >= 0.0);
        assert_eq!(stats.measured_time, 50.0);
    }

    #[test]
    fn histogram_tracks_the_stationary_law() {
        let p = test_support::benchmark();
        let b = equilibrium_band(&p);
        let cfg = SimConfig {
            dt: 1e-3,
            horizon: 60.0,
            burn_in: 10.0,
            n_paths: 32,
            seed: 5,
            n_bins: 50,
        };
        let stats = simulate_reflected(&p, &b, THETA_STAR, LAMBDA_STAR, &cfg).unwrap();
        assert_eq!(stats.histogram.len(), 50);
        assert_eq!(stats.bin_edges.len(), 51);
        let total: f64 = stats.histogram.iter().sum();
        assert!((total - 1.0).abs() < 1e-12, "histogram mass {total}");

        let law = StationaryStats::for_band(&p, &b);
        // effective sample count: one per relaxation time 1/delta per path
        let effective = cfg.n_paths as f64 * (cfg.horizon - cfg.burn_in) * p.delta();
        let allowance = 3.0 / effective.sqrt() + 0.6 * cfg.dt.sqrt();
        let mut worst = 0.0f64;
        for (j, freq) in stats.histogram.iter().enumerate() {
            let mass = law.cdf(stats.bin_edges[j + 1]) - law.cdf(stats.bin_edges[j]);
            worst = worst.max((freq - mass).abs());
        }
        assert!(worst < allowance, "sup deviation {worst} vs {allowance}");
    }

    #[test]
    fn symmetric_band_pushes_evenly() {
        let p = test_support::symmetric();
        let b = solve_boundaries(&p, 0.0, 0.0, DEFAULT_TOL).unwrap();
        let cfg = SimConfig {
            dt: 1e-3,
            horizon: 60.0,
            burn_in: 10.0,
            n_paths: 32,
            seed: 2,
            n_bins: 20,
        };
        let stats = simulate_reflected(&p, &b, 0.0, 0.0, &cfg).unwrap();
        let joint = (stats.se_rate_plus.powi(2) + stats.se_rate_minus.powi(2)).sqrt();
        assert!(
            (stats.rate_plus - stats.rate_minus).abs() < 3.0 * joint + 0.1 * cfg.dt.sqrt(),
            "rates {} vs {}",
            stats.rate_plus,
            stats.rate_minus
        );
    }

    #[test]
    fn coarser_steps_keep_more_bias() {
        // the projection scheme overstates the push rates by O(sqrt(dt));
        // quartering dt twice must walk the cost estimate toward kappa
        let p = test_support::benchmark();
        let b = equilibrium_band(&p);
        let kappa = ergodic_value(&p, &b).unwrap();
        let run = |dt: f64| {
            let cfg = SimConfig {
                dt,
                horizon: 200.0,
                burn_in: 20.0,
                n_paths: 96,
                seed: 17,
                n_bins: 10,
            };
            simulate_reflected(&p, &b, THETA_STAR, LAMBDA_STAR, &cfg)
                .unwrap()
                .cost_potential
        };
        let coarse = (run(0.2) - kappa).abs();
        let medium = (run(0.05) - kappa).abs();
        let fine = (run(0.0125) - kappa).abs();
        assert!(
            medium < coarse,
            "quartering dt did not shrink the bias: {coarse} -> {medium}"
        );
        assert!(
            fine < medium,
            "quartering dt again did not shrink the bias: {medium} -> {fine}"
        );
    }

    #[test]
    fn results_are_identical_across_worker_counts() {
        let p = test_support::benchmark();
        let b = equilibrium_band(&p);
        let cfg = SimConfig {
            dt: 0.01,
            horizon: 5.0,
            burn_in: 1.0,
            n_paths: 8,
            seed: 99,
            n_bins: 10,
        };
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    (
                        simulate_reflected(&p, &b, THETA_STAR, LAMBDA_STAR, &cfg).unwrap(),
                        simulate_dynkin(&p, &b, 1.3, &cfg).unwrap(),
                    )
                })
        };
        let (serial_stats, serial_game) = run(1);
        let (parallel_stats, parallel_game) = run(4);
        assert_eq!(serial_stats, parallel_stats);
        assert_eq!(serial_game, parallel_game);
    }

    #[test]
    fn stopping_game_reproduces_the_marginal_value() {
        let p = test_support::benchmark();
        let b = equilibrium_band(&p);
        let mid = 0.5 * (b.a_plus + b.a_minus);
        let cfg = SimConfig {
            dt: 1e-3,
            horizon: 30.0,
            burn_in: 0.0,
            n_paths: 256,
            seed: 23,
            n_bins: 1,
        };
        let est = simulate_dynkin(&p, &b, mid, &cfg).unwrap();
        let expected = dynkin_value(&p, &b, mid);
        assert!(
            (est.value - expected).abs() < 3.0 * est.std_error + 2.0 * cfg.dt.sqrt(),
            "game value {} vs {expected} (se {})",
            est.value,
            est.std_error
        );
        assert!(
            est.exit_fraction > 0.99,
            "exit fraction {}",
            est.exit_fraction
        );
        assert!(est.truncation_bound < 1e-10);
    }

    #[test]
    fn near_boundary_starts_collapse_to_the_stopping_payoffs() {
        let p = test_support::benchmark();
        let b = equilibrium_band(&p);
        let cfg = SimConfig {
            dt: 1e-4,
            horizon: 5.0,
            burn_in: 0.0,
            n_paths: 64,
            seed: 31,
            n_bins: 1,
        };
        let low = simulate_dynkin(&p, &b, b.a_plus + 1e-4, &cfg).unwrap();
        assert!(
            (low.value + p.k_plus()).abs() < 3.0 * low.std_error + 0.02,
            "lower start: {} vs {}",
            low.value,
            -p.k_plus()
        );
        let high = simulate_dynkin(&p, &b, b.a_minus - 1e-4, &cfg).unwrap();
        assert!(
            (high.value - p.k_minus()).abs() < 3.0 * high.std_error + 0.02,
            "upper start: {} vs {}",
            high.value,
            p.k_minus()
        );
    }

    #[test]
    fn equilibrium_mean_reappears_dynamically() {
        let p = test_support::benchmark();
        let b = equilibrium_band(&p);
        let cfg = SimConfig {
            dt: 2e-3,
            horizon: 120.0,
            burn_in: 20.0,
            n_paths: 48,
            seed: 41,
            n_bins: 10,
        };
        let stats = simulate_reflected(&p, &b, THETA_STAR, LAMBDA_STAR, &cfg).unwrap();
        assert!(
            (stats.mean - THETA_STAR).abs() < 3.0 * stats.se_mean + 0.3 * cfg.dt.sqrt(),
            "dynamic mean {} vs {THETA_STAR} (se {})",
            stats.mean,
            stats.se_mean
        );
        // the consistency residual seen by the closed form is tiny, so the
        // dynamic estimate must also straddle the band's own mean field
        let r_theta = stationary::consistency_residuals(&p, &b).0;
        assert!(r_theta.abs() < 1e-8);
    }
}
