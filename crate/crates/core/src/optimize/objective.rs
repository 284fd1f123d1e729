use num_complex::Complex64;

use crate::engine::{make_ground_state, propagate_free, to_momentum, weighted_mean_var, SpatialGrid, WaveState};
use crate::error::{Error, Result};
use crate::lens::{ExpansionProtocol, HarmonicKick, KickSequence, KickSpec};
use crate::scale::PhysicalScale;

#[derive(Debug, Clone, PartialEq)]
pub enum LensKind {
    /// Gaussian kicks with these widths; parameters are their strengths.
    Gaussian(Vec<f64>),
    /// One quadratic kick; the parameter is Ω = ω_k²δt.
    Harmonic,
}

impl LensKind {
    pub fn num_parameters(&self) -> usize {
        match self {
            LensKind::Gaussian(w) => w.len(),
            LensKind::Harmonic => 1,
        }
    }

    pub fn kick(&self, params: &[f64]) -> Result<KickSpec> {
        match self {
            LensKind::Gaussian(widths) => Ok(KickSpec::Gaussian(KickSequence::from_parts(params, widths)?)),
            LensKind::Harmonic => Ok(KickSpec::Harmonic(HarmonicKick { strength: params[0] })),
        }
    }
}

/// Final RMS momentum width as a function of the kick strengths, for a fixed
/// focal time and grid. The expanded state is computed once.
#[derive(Debug, Clone)]
pub struct LensObjective {
    lens: LensKind,
    t_f: f64,
    expanded: WaveState,
    /// Per kick, (1 - e^{-x²/2σ²}) on the grid; x²/2 for the harmonic lens.
    profiles: Vec<Vec<f64>>,
}

impl LensObjective {
    pub fn new(lens: LensKind, t_f: f64, grid: SpatialGrid, scale: &PhysicalScale) -> Result<Self> {
        let expanded = propagate_free(&make_ground_state(grid, scale)?, t_f)?;
        let xs = grid.positions();
        let profiles = match &lens {
            LensKind::Gaussian(widths) => widths
                .iter()
                .map(|&s| xs.iter().map(|&x| -(-x * x / (2.0 * s * s)).exp_m1()).collect())
                .collect(),
            LensKind::Harmonic => vec![xs.iter().map(|&x| 0.5 * PhysicalScale::MASS * x * x).collect()],
        };
        Ok(Self { lens, t_f, expanded, profiles })
    }

    pub fn grid(&self) -> &SpatialGrid {
        self.expanded.grid()
    }

    pub fn lens(&self) -> &LensKind {
        &self.lens
    }

    pub fn expansion_time(&self) -> f64 {
        self.t_f
    }

    /// The state just before the kick.
    pub fn expanded(&self) -> &WaveState {
        &self.expanded
    }

    pub fn protocol(&self, params: &[f64]) -> Result<ExpansionProtocol> {
        ExpansionProtocol::new(self.t_f, self.lens.kick(params)?)
    }

    /// RMS momentum width after kicking with `params`.
    pub fn final_dp(&self, params: &[f64]) -> Result<f64> {
        if params.len() != self.profiles.len() {
            return Err(Error::Precondition(format!(
                "{} strengths for {} kicks",
                params.len(),
                self.profiles.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Domain(format!("non-finite strengths {params:?}")));
        }
        self.grid().check_resolves(&self.protocol(params)?)?;
        let kicked: Vec<Complex64> = self
            .expanded
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(j, &a)| {
                let phase: f64 = params.iter().zip(&self.profiles).map(|(k, prof)| k * prof[j]).sum();
                a * Complex64::from_polar(1.0, -phase / PhysicalScale::HBAR)
            })
            .collect();
        let grid = self.grid();
        let phi = to_momentum(grid, &kicked);
        let (_, var) = weighted_mean_var(&grid.momenta(), phi.iter().map(|a| a.norm_sqr()));
        Ok(var.sqrt())
    }
}
