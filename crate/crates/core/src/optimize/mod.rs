//! Numerical kick optimization, focal-time sweeps and doublet sensitivity.
//!
//! The objective is the RMS width of the whole simulated momentum
//! distribution, tails included. Side peaks and exponential tails left by an
//! anharmonic lens therefore count in full.

mod objective;
mod sensitivity;
mod simplex;
mod sweep;

pub use objective::{LensKind, LensObjective};
pub use sensitivity::{sensitivity_map, ScaleGrid, SensitivityMap};
pub use simplex::{nelder_mead, SimplexOptions, SimplexOutcome};
pub use sweep::{
    evaluate_point, find_focal_time, sweep_expansion, FocalTime, SweepCurve, SweepFailure, SweepMode,
    SweepPoint, FOCAL_TIME_TOLERANCE,
};

use serde::Serialize;

use crate::design::DesignResult;
use crate::engine::auto_grid;
use crate::error::{Error, Result};
use crate::lens::ExpansionProtocol;
use crate::scale::PhysicalScale;

/// Search settings shared by every optimization in a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerOptions {
    /// Objective evaluations per kick parameter.
    pub budget_per_kick: usize,
    /// Also start from the seed with each coordinate scaled by 0.8 and 1.2.
    pub multi_start: bool,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self { budget_per_kick: 1000, multi_start: false }
    }
}

impl OptimizerOptions {
    pub fn budget(&self, kicks: usize) -> usize {
        self.budget_per_kick * kicks
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationReport {
    pub best_strengths: Vec<f64>,
    pub best_dp: f64,
    pub objective_evaluations: usize,
    pub converged: bool,
    pub initial_guess: Vec<f64>,
    pub initial_dp: f64,
}

/// Minimizes the final momentum width over the strengths of Gaussian kicks
/// with widths `sigmas`, starting from `seed`.
pub fn optimize_strengths(
    sigmas: &[f64],
    t_f: f64,
    seed: &DesignResult,
    budget: usize,
) -> Result<OptimizationReport> {
    optimize_with(sigmas, t_f, seed, budget, false)
}

pub fn optimize_with(
    sigmas: &[f64],
    t_f: f64,
    seed: &DesignResult,
    budget: usize,
    multi_start: bool,
) -> Result<OptimizationReport> {
    if seed.strengths.len() != sigmas.len() {
        return Err(Error::Precondition(format!(
            "seed has {} strengths for {} widths",
            seed.strengths.len(),
            sigmas.len()
        )));
    }
    let lens = LensKind::Gaussian(sigmas.to_vec());
    run(lens, t_f, &seed.strengths, budget, multi_start)
}

/// Optimizes the strength Ω of a single harmonic kick.
pub fn optimize_harmonic(t_f: f64, seed: f64, budget: usize) -> Result<OptimizationReport> {
    run(LensKind::Harmonic, t_f, &[seed], budget, false)
}

fn run(lens: LensKind, t_f: f64, seed: &[f64], budget: usize, multi_start: bool) -> Result<OptimizationReport> {
    let n = lens.num_parameters();
    if budget < 50 * n {
        return Err(Error::Precondition(format!("budget {budget} below the minimum of {}", 50 * n)));
    }
    let scale = PhysicalScale::natural();
    let grid = auto_grid(&ExpansionProtocol::new(t_f, lens.kick(seed)?)?, &scale)?;
    let objective = LensObjective::new(lens, t_f, grid, &scale)?;
    let initial_dp = objective.final_dp(seed).map_err(|e| Error::Optimization {
        kappa: seed.to_vec(),
        source: Box::new(e),
    })?;

    let options = SimplexOptions { max_evaluations: budget, ..Default::default() };
    let mut starts = vec![seed.to_vec()];
    if multi_start {
        for i in 0..n {
            for f in [0.8, 1.2] {
                let mut s = seed.to_vec();
                s[i] *= f;
                starts.push(s);
            }
        }
    }
    let mut best: Option<SimplexOutcome> = None;
    let mut evaluations = 0;
    for start in &starts {
        let out = nelder_mead(|k| objective.final_dp(k), start, &options)?;
        evaluations += out.evaluations;
        if best.as_ref().is_none_or(|b| out.value < b.value) {
            best = Some(out);
        }
    }
    let best = best.expect("at least one start");
    Ok(OptimizationReport {
        best_strengths: best.x,
        best_dp: best.value,
        objective_evaluations: evaluations,
        converged: best.converged,
        initial_guess: seed.to_vec(),
        initial_dp,
    })
}
