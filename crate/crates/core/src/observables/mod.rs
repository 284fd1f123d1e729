//! Measured quantities: RMS widths, kinetic temperature, momentum
//! distributions and Wigner maps.

pub mod export;
mod wigner;

pub use wigner::{wigner, WignerMap};

use serde::Serialize;

use crate::engine::{weighted_mean_var, WaveState};
use crate::error::{Error, Result};
use crate::scale::PhysicalScale;

/// RMS widths of a state, each taken about its empirical mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSummary {
    pub dx: f64,
    pub dp: f64,
    pub dv: f64,
    pub uncertainty_product: f64,
    /// m·Δv²/k_B in natural units.
    pub temperature_natural: f64,
    pub mean_x: f64,
    pub mean_p: f64,
    /// Excess kurtosis of the momentum distribution; zero for a Gaussian.
    pub momentum_excess_kurtosis: f64,
}

/// Momentum density |ψ̃(p)|² on the monotone momentum grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumDistribution {
    pub momenta: Vec<f64>,
    pub density: Vec<f64>,
    pub spacing: f64,
}

impl MomentumDistribution {
    pub fn mean_and_rms(&self) -> (f64, f64) {
        let (mean, var) = weighted_mean_var(&self.momenta, self.density.iter().copied());
        (mean, var.sqrt())
    }

    pub fn excess_kurtosis(&self) -> f64 {
        let (mean, var) = weighted_mean_var(&self.momenta, self.density.iter().copied());
        let total: f64 = self.density.iter().sum();
        let m4 = self
            .momenta
            .iter()
            .zip(&self.density)
            .map(|(p, w)| (p - mean).powi(4) * w)
            .sum::<f64>()
            / total;
        m4 / (var * var) - 3.0
    }

    pub fn integral(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.spacing
    }
}

pub fn momentum_distribution(state: &WaveState) -> MomentumDistribution {
    let m = state.momentum_amplitudes();
    MomentumDistribution {
        momenta: m.momenta,
        density: m.amplitudes.iter().map(|a| a.norm_sqr()).collect(),
        spacing: m.spacing,
    }
}

pub fn summarize(state: &WaveState) -> MomentSummary {
    let moments = state.moments();
    let dist = momentum_distribution(state);
    let dx = moments.var_x.sqrt();
    let dp = moments.var_p.sqrt();
    let dv = dp / PhysicalScale::MASS;
    MomentSummary {
        dx,
        dp,
        dv,
        uncertainty_product: dx * dp,
        temperature_natural: PhysicalScale::MASS * dv * dv / PhysicalScale::BOLTZMANN,
        mean_x: moments.mean_x,
        mean_p: moments.mean_p,
        momentum_excess_kurtosis: dist.excess_kurtosis(),
    }
}

/// T_f/T_i = (Δv_f/Δv_i)².
pub fn cooling_ratio(initial: &MomentSummary, final_: &MomentSummary) -> Result<f64> {
    if !(initial.dv > 0.0) {
        return Err(Error::Domain(format!(
            "initial velocity width must be > 0, got {}",
            initial.dv
        )));
    }
    let r = final_.dv / initial.dv;
    Ok(r * r)
}
