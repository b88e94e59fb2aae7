//! The four subcommands and their machine-readable outputs: JSON for
//! scalar reports, CSV for anything gridded.

// negated comparisons like `!(to < rho)` are deliberate NaN guards
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::Path;

use mfc_core::equilibrium::{self, Equilibrium, EquilibriumError};
use mfc_core::free_boundary::{self, SolveError};
use mfc_core::model::{ModelParams, RawParams};
use mfc_core::simulate::{self, DynkinEstimate, SimConfig, SimStats};
use mfc_core::stationary::StationaryStats;
use rayon::prelude::*;
use serde::Serialize;

use crate::{CliError, Quantity, SweepParam};

fn write_output(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, content)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn numeric(e: EquilibriumError) -> CliError {
    CliError::Numeric(format!("equilibrium solve failed: {e}"))
}

fn to_json(report: &impl Serialize) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}

#[derive(Serialize)]
struct SolveReport {
    theta_star: f64,
    lambda_star: f64,
    a_plus: f64,
    a_minus: f64,
    kappa_star: f64,
    r_theta: f64,
    r_lambda: f64,
    band_residual: f64,
    v_prime: f64,
    iterations: u32,
    probes: u32,
    sign_changes: u32,
    tol: f64,
}

pub fn cmd_solve(p: &ModelParams, tol: f64, output: Option<&Path>) -> Result<(), CliError> {
    let eq = equilibrium::solve_potential_mfg(p, tol).map_err(numeric)?;
    let report = SolveReport {
        theta_star: eq.theta_star,
        lambda_star: eq.lambda_star,
        a_plus: eq.boundaries.a_plus,
        a_minus: eq.boundaries.a_minus,
        kappa_star: eq.kappa_star,
        r_theta: eq.r_theta,
        r_lambda: eq.r_lambda,
        band_residual: eq.boundaries.residual,
        v_prime: eq.value_slope,
        iterations: eq.iterations,
        probes: eq.probes,
        sign_changes: eq.sign_changes,
        tol,
    };
    write_output(output, &to_json(&report))
}

fn error_slug(e: &EquilibriumError) -> &'static str {
    match e {
        EquilibriumError::NoBracket { .. } => "no-bracket",
        EquilibriumError::NonConvergence { .. } => "stalled",
        EquilibriumError::Solve(SolveError::NonConvergence { .. }) => "band-stalled",
        EquilibriumError::Solve(SolveError::Range { .. }) => "out-of-range",
        EquilibriumError::Solve(SolveError::InconsistentBoundaries { .. }) => "degenerate-band",
    }
}

pub fn cmd_sweep(
    raw: RawParams,
    param: SweepParam,
    from: f64,
    to: f64,
    steps: usize,
    tol: f64,
    output: Option<&Path>,
) -> Result<(), CliError> {
    if !(from.is_finite() && to.is_finite() && from < to) {
        return Err(CliError::Config(format!(
            "sweep range must satisfy from < to, got {from} and {to}"
        )));
    }
    if steps < 2 {
        return Err(CliError::Config(format!(
            "sweep needs at least 2 steps, got {steps}"
        )));
    }
    if from <= 0.0 {
        return Err(CliError::Config(format!(
            "{} sweep must start above 0, got {from}",
            param.name()
        )));
    }
    if matches!(param, SweepParam::Phi) && !(to < raw.rho) {
        return Err(CliError::Config(format!(
            "phi sweep must stay below rho = {}, got {to}",
            raw.rho
        )));
    }

    let values: Vec<f64> = (0..steps)
        .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
        .collect();
    let outcomes: Vec<Result<Equilibrium, &'static str>> = values
        .par_iter()
        .map(|&v| {
            let mut point = raw;
            match param {
                SweepParam::Delta => point.delta = v,
                SweepParam::Sigma => point.sigma = v,
                SweepParam::Phi => point.phi = v,
            }
            let p = ModelParams::new(point).map_err(|_| "invalid-parameters")?;
            equilibrium::solve_potential_mfg(&p, tol).map_err(|e| error_slug(&e))
        })
        .collect();

    let mut csv =
        String::from("param,value,a_plus,a_minus,theta_star,lambda_star,kappa_star,status\n");
    let mut converged = 0usize;
    for (v, outcome) in values.iter().zip(&outcomes) {
        match outcome {
            Ok(eq) => {
                converged += 1;
                csv.push_str(&format!(
                    "{},{v},{},{},{},{},{},ok\n",
                    param.name(),
                    eq.boundaries.a_plus,
                    eq.boundaries.a_minus,
                    eq.theta_star,
                    eq.lambda_star,
                    eq.kappa_star
                ));
            }
            Err(slug) => csv.push_str(&format!("{},{v},,,,,,{slug}\n", param.name())),
        }
    }
    write_output(output, &csv)?;
    if converged * 10 >= steps * 9 {
        Ok(())
    } else {
        Err(CliError::Numeric(format!(
            "only {converged} of {steps} sweep points converged"
        )))
    }
}

#[derive(Serialize)]
struct EquilibriumSummary {
    theta_star: f64,
    lambda_star: f64,
    a_plus: f64,
    a_minus: f64,
    kappa_star: f64,
}

#[derive(Serialize)]
struct ClosedForm {
    mean: f64,
    rate_plus: f64,
    rate_minus: f64,
    dynkin_midpoint: f64,
}

#[derive(Serialize)]
struct MonteCarlo {
    reflected: SimStats,
    dynkin: DynkinEstimate,
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    value: f64,
    reference: f64,
    gap: f64,
    allowance: f64,
    pass: bool,
}

impl Check {
    fn new(name: &'static str, value: f64, reference: f64, allowance: f64) -> Self {
        let gap = (value - reference).abs();
        Self {
            name,
            value,
            reference,
            gap,
            allowance,
            pass: gap <= allowance,
        }
    }
}

/// Push mass arrives in rare clamp events of typical size `0.63 sigma
/// sqrt(dt)`, so a rate estimated from few events is noisier than the
/// cross-path spread suggests; this is three standard deviations of the
/// implied compound-event count, vanishing as the total time grows.
fn rate_noise_floor(rate: f64, sigma: f64, sqrt_dt: f64, stats: &SimStats) -> f64 {
    let total_time = stats.measured_time * stats.n_paths as f64;
    3.0 * (2.0 * rate * 0.63 * sigma * sqrt_dt / total_time).sqrt()
}

#[derive(Serialize)]
struct SimulateReport {
    config: SimConfig,
    equilibrium: EquilibriumSummary,
    closed_form: ClosedForm,
    monte_carlo: MonteCarlo,
    checks: Vec<Check>,
    pass: bool,
}

pub fn cmd_simulate(
    p: &ModelParams,
    tol: f64,
    cfg: &SimConfig,
    output: Option<&Path>,
) -> Result<(), CliError> {
    let eq = equilibrium::solve_potential_mfg(p, tol).map_err(numeric)?;
    let b = eq.boundaries;
    let stats = simulate::simulate_reflected(p, &b, eq.theta_star, eq.lambda_star, cfg)
        .map_err(|e| CliError::Config(format!("invalid simulation plan: {e}")))?;
    let mid = 0.5 * (b.a_plus + b.a_minus);
    let game = simulate::simulate_dynkin(p, &b, mid, cfg)
        .map_err(|e| CliError::Config(format!("invalid simulation plan: {e}")))?;

    let law = StationaryStats::for_band(p, &b);
    let (rate_plus, rate_minus) = law.push_rates();
    let game_value = free_boundary::dynkin_value(p, &b, mid);

    // the projection scheme acts like reflection at walls pushed outward
    // by 0.5826 sigma sqrt(dt), so every estimate carries an O(sqrt(dt))
    // bias; allowances double the predicted displacement effect
    let sigma2 = p.sigma() * p.sigma();
    let sqrt_dt = cfg.dt.sqrt();
    let wall_shift = 0.5826 * p.sigma() * sqrt_dt;
    let (pdf_plus, pdf_minus) = (law.pdf(b.a_plus), law.pdf(b.a_minus));
    let cost_bias = 1.2 * sigma2 * sqrt_dt * (p.k_plus() * pdf_plus + p.k_minus() * pdf_minus);
    let mean_bias = 2.0
        * wall_shift
        * (pdf_plus * (law.mean() - b.a_plus) + pdf_minus * (law.mean() - b.a_minus)).abs();

    let effective = cfg.n_paths as f64 * (cfg.horizon - cfg.burn_in) * p.delta();
    let mut sup_dev = 0.0f64;
    for (j, freq) in stats.histogram.iter().enumerate() {
        let mass = law.cdf(stats.bin_edges[j + 1]) - law.cdf(stats.bin_edges[j]);
        sup_dev = sup_dev.max((freq - mass).abs());
    }

    let checks = vec![
        Check::new(
            "cost_potential_vs_kappa",
            stats.cost_potential,
            eq.kappa_star,
            3.0 * stats.se_cost_potential + cost_bias,
        ),
        Check::new(
            "mean_vs_theta_star",
            stats.mean,
            eq.theta_star,
            3.0 * stats.se_mean + mean_bias,
        ),
        Check::new(
            "rate_plus",
            stats.rate_plus,
            rate_plus,
            3.0 * stats.se_rate_plus
                + sigma2 * pdf_plus * sqrt_dt
                + rate_noise_floor(rate_plus, p.sigma(), sqrt_dt, &stats),
        ),
        Check::new(
            "rate_minus",
            stats.rate_minus,
            rate_minus,
            3.0 * stats.se_rate_minus
                + sigma2 * pdf_minus * sqrt_dt
                + rate_noise_floor(rate_minus, p.sigma(), sqrt_dt, &stats),
        ),
        Check::new(
            "dynkin_midpoint",
            game.value,
            game_value,
            3.0 * game.std_error + 2.0 * sqrt_dt,
        ),
        Check::new(
            "histogram_sup_deviation",
            sup_dev,
            0.0,
            3.0 / effective.sqrt() + 0.6 * sqrt_dt,
        ),
    ];
    let pass = checks.iter().all(|c| c.pass);
    let report = SimulateReport {
        config: *cfg,
        equilibrium: EquilibriumSummary {
            theta_star: eq.theta_star,
            lambda_star: eq.lambda_star,
            a_plus: b.a_plus,
            a_minus: b.a_minus,
            kappa_star: eq.kappa_star,
        },
        closed_form: ClosedForm {
            mean: law.mean(),
            rate_plus,
            rate_minus,
            dynkin_midpoint: game_value,
        },
        monte_carlo: MonteCarlo {
            reflected: stats,
            dynkin: game,
        },
        checks,
        pass,
    };
    write_output(output, &to_json(&report))?;
    if pass {
        Ok(())
    } else {
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name)
            .collect();
        Err(CliError::Numeric(format!(
            "verification checks failed: {}",
            failed.join(", ")
        )))
    }
}

pub fn cmd_profile(
    p: &ModelParams,
    tol: f64,
    quantity: Quantity,
    from: Option<f64>,
    to: Option<f64>,
    points: Option<usize>,
    output: Option<&Path>,
) -> Result<(), CliError> {
    let eq = equilibrium::solve_potential_mfg(p, tol).map_err(numeric)?;
    let b = eq.boundaries;
    let (default_range, default_points, header) = match quantity {
        Quantity::U => ((b.a_plus, b.a_minus), 201, "x,value"),
        Quantity::Pdf => ((b.a_plus, b.a_minus), 4001, "x,value"),
        Quantity::V => (
            (eq.theta_star - 1.0, eq.theta_star + 1.0),
            41,
            "theta,value",
        ),
    };
    let lo = from.unwrap_or(default_range.0);
    let hi = to.unwrap_or(default_range.1);
    let n = points.unwrap_or(default_points);
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(CliError::Config(format!(
            "profile range must satisfy from < to, got {lo} and {hi}"
        )));
    }
    if n < 2 {
        return Err(CliError::Config(format!(
            "profile needs at least 2 points, got {n}"
        )));
    }

    let mut csv = String::from(header);
    csv.push('\n');
    let law = StationaryStats::for_band(p, &b);
    for i in 0..n {
        let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let value = match quantity {
            // outside the band stopping is immediate, so the game value
            // sits on the corresponding obstacle
            Quantity::U => {
                if x < b.a_plus {
                    -p.k_plus()
                } else if x > b.a_minus {
                    p.k_minus()
                } else {
                    free_boundary::dynkin_value(p, &b, x)
                }
            }
            Quantity::Pdf => law.pdf(x),
            Quantity::V => equilibrium::potential_value(p, x, tol)
                .map_err(|e| CliError::Numeric(format!("profile point {x} failed: {e}")))?,
        };
        csv.push_str(&format!("{x},{value}\n"));
    }
    write_output(output, &csv)
}
