use rayon::prelude::*;
use serde::Serialize;

use super::{optimize_with, LensKind, OptimizerOptions};
use crate::design::{design_kicks, harmonic_kick_strength, Drive};
use crate::engine::{auto_grid, run_protocol, SpatialGrid};
use crate::error::{Error, Result};
use crate::lens::{ExpansionProtocol, KickSpec};
use crate::observables::summarize;
use crate::scale::{initial_widths, PhysicalScale};

/// Relative width of the final bracket around an optimal focal time.
pub const FOCAL_TIME_TOLERANCE: f64 = 0.01;

/// How strengths are chosen at each focal time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    /// Ideal quadratic kick; widths are ignored.
    Harmonic,
    /// Taylor-cancelling design with drive m/t_f.
    Classical,
    /// Taylor-cancelling design with drive mḃ/b.
    Generalized,
    /// Numerical optimization seeded by the classical design.
    Optimized,
}

impl SweepMode {
    pub fn name(self) -> &'static str {
        match self {
            SweepMode::Harmonic => "harmonic",
            SweepMode::Classical => "classical",
            SweepMode::Generalized => "generalized",
            SweepMode::Optimized => "optimized",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub t_f: f64,
    /// Δx_f/Δx_i, with Δx_f taken just before the kick.
    pub dx_ratio: f64,
    /// Δv_f/Δv_i after the kick.
    pub dv_ratio: f64,
    pub strengths: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepFailure {
    pub t_f: f64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCurve {
    pub mode: SweepMode,
    pub widths: Vec<f64>,
    pub points: Vec<SweepPoint>,
    pub failures: Vec<SweepFailure>,
}

impl SweepCurve {
    /// Point with the smallest velocity ratio.
    pub fn argmin(&self) -> Option<&SweepPoint> {
        self.points.iter().min_by(|a, b| a.dv_ratio.total_cmp(&b.dv_ratio))
    }
}

/// Designs (and for [`SweepMode::Optimized`] optimizes) the lens at `t_f`,
/// simulates the protocol and returns the width ratios.
pub fn evaluate_point(sigmas: &[f64], t_f: f64, mode: SweepMode, options: &OptimizerOptions) -> Result<SweepPoint> {
    let scale = PhysicalScale::natural();
    let (dx_i, dp_i) = initial_widths(&scale);
    let kick = match mode {
        SweepMode::Harmonic => KickSpec::Harmonic(harmonic_kick_strength(t_f, &scale)?),
        SweepMode::Classical | SweepMode::Generalized | SweepMode::Optimized => {
            let drive = if mode == SweepMode::Generalized { Drive::Generalized } else { Drive::Classical };
            let design = design_kicks(sigmas, t_f, drive, &scale)?;
            if mode == SweepMode::Optimized {
                let budget = options.budget(sigmas.len());
                let report = optimize_with(sigmas, t_f, &design, budget, options.multi_start)?;
                let protocol = ExpansionProtocol::gaussian(t_f, design.sequence()?)?;
                let grid = auto_grid(&protocol, &scale)?;
                // same grid as the search, so the recorded width is the optimized one
                let tuned = ExpansionProtocol::new(t_f, LensKind::Gaussian(sigmas.to_vec()).kick(&report.best_strengths)?)?;
                return point_from_run(&tuned, Some(grid), report.best_strengths, dx_i, dp_i);
            }
            KickSpec::Gaussian(design.sequence()?)
        }
    };
    let protocol = ExpansionProtocol::new(t_f, kick)?;
    let strengths = match &protocol.kick {
        KickSpec::Harmonic(h) => vec![h.strength],
        KickSpec::Gaussian(seq) => seq.strengths(),
    };
    point_from_run(&protocol, None, strengths, dx_i, dp_i)
}

fn point_from_run(
    protocol: &ExpansionProtocol,
    grid: Option<SpatialGrid>,
    strengths: Vec<f64>,
    dx_i: f64,
    dp_i: f64,
) -> Result<SweepPoint> {
    let run = run_protocol(protocol, &PhysicalScale::natural(), grid)?;
    let before = summarize(&run.expanded);
    let after = summarize(&run.kicked);
    Ok(SweepPoint {
        t_f: protocol.expansion_time,
        dx_ratio: before.dx / dx_i,
        dv_ratio: after.dv / (dp_i / PhysicalScale::MASS),
        strengths,
    })
}

/// Evaluates every focal time in parallel; results keep input order and
/// failed points are recorded without stopping the sweep.
pub fn sweep_expansion(
    sigmas: &[f64],
    t_values: &[f64],
    mode: SweepMode,
    options: &OptimizerOptions,
) -> Result<SweepCurve> {
    if t_values.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::Precondition("sweep times must be positive".into()));
    }
    if t_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("sweep times must be strictly increasing".into()));
    }
    let results: Vec<(f64, Result<SweepPoint>)> = t_values
        .par_iter()
        .map(|&t| (t, evaluate_point(sigmas, t, mode, options)))
        .collect();
    let mut points = Vec::new();
    let mut failures = Vec::new();
    for (t_f, r) in results {
        match r {
            Ok(p) => points.push(p),
            Err(e) => failures.push(SweepFailure { t_f, error: e.to_string() }),
        }
    }
    Ok(SweepCurve { mode, widths: sigmas.to_vec(), points, failures })
}

/// Optimal focal time: coarse sweep, then golden-section search on the
/// bracket around the coarse minimum until it is narrower than 1% of t_f.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FocalTime {
    pub t_f: f64,
    pub point: SweepPoint,
    pub coarse: SweepCurve,
}

pub fn find_focal_time(
    sigmas: &[f64],
    t_values: &[f64],
    mode: SweepMode,
    options: &OptimizerOptions,
) -> Result<FocalTime> {
    let coarse = sweep_expansion(sigmas, t_values, mode, options)?;
    let best = coarse
        .argmin()
        .ok_or_else(|| Error::Domain("every sweep point failed".into()))?
        .clone();
    let idx = coarse.points.iter().position(|p| p.t_f == best.t_f).unwrap();
    let mut lo = if idx > 0 { coarse.points[idx - 1].t_f } else { best.t_f };
    let mut hi = coarse.points.get(idx + 1).map_or(best.t_f, |p| p.t_f);

    let eval = |t: f64| evaluate_point(sigmas, t, mode, options);
    let mut incumbent = best;
    if hi > lo {
        const INV_PHI: f64 = 0.618_033_988_749_894_9;
        let mut c = hi - INV_PHI * (hi - lo);
        let mut d = lo + INV_PHI * (hi - lo);
        let mut pc = eval(c)?;
        let mut pd = eval(d)?;
        while hi - lo > FOCAL_TIME_TOLERANCE * 0.5 * (hi + lo) {
            if pc.dv_ratio < pd.dv_ratio {
                hi = d;
                d = c;
                pd = pc;
                c = hi - INV_PHI * (hi - lo);
                pc = eval(c)?;
            } else {
                lo = c;
                c = d;
                pc = pd;
                d = lo + INV_PHI * (hi - lo);
                pd = eval(d)?;
            }
        }
        for p in [pc, pd] {
            if p.dv_ratio < incumbent.dv_ratio {
                incumbent = p;
            }
        }
    }
    Ok(FocalTime { t_f: incumbent.t_f, point: incumbent, coarse })
}
