//! JSON config file: a model block plus optional solver and simulation
//! blocks, all strictly validated.

use std::path::Path;

use mfc_core::free_boundary::DEFAULT_TOL;
use mfc_core::model::{ModelParams, RawParams};
use mfc_core::simulate::SimConfig;
use serde::Deserialize;

/// Solver knobs; iteration budgets are fixed at compile time, so the
/// tolerance is the one runtime control.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Residual tolerance passed to every solve.
    pub tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    model: RawParams,
    #[serde(default)]
    solver: SolverConfig,
    #[serde(default)]
    sim: SimConfig,
}

/// A parsed and validated config.
pub struct LoadedConfig {
    pub params: ModelParams,
    pub raw: RawParams,
    pub solver: SolverConfig,
    pub sim: SimConfig,
}

pub fn load(path: &Path) -> Result<LoadedConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let file: ConfigFile = serde_json::from_str(&text)
        .map_err(|e| format!("invalid config {}: {e}", path.display()))?;
    let params =
        ModelParams::new(file.model).map_err(|e| format!("invalid model parameters: {e}"))?;
    if !(file.solver.tol.is_finite() && file.solver.tol > 0.0) {
        return Err(format!(
            "solver tolerance must be positive, got {}",
            file.solver.tol
        ));
    }
    Ok(LoadedConfig {
        params,
        raw: file.model,
        solver: file.solver,
        sim: file.sim,
    })
}
