//! Analytic kick strengths.
//!
//! A compound lens of N Gaussian kicks gives an atom at x the impulse
//! Δp(x) = -Σ κ_n x e^{-x²/2σ_n²}/σ_n². Choosing the κ_n so that the odd
//! Maclaurin coefficients of drive·x + Δp(x) vanish through x^{2N-1} makes
//! the lens harmonic over the largest possible region. The drive is m/t_f in
//! the classical picture and mḃ/b from the scaling solution.

mod classical;
mod ermakov;

pub use classical::{
    cancellation_residuals, classical_doublet, classical_n_kick, impulse_series,
    DEGENERACY_TOLERANCE, MAX_CONDITION, MAX_KICKS,
};
pub use ermakov::{ermakov_integrate, NumericScaling, PiecewiseLinear, ScalingSolution, DEFAULT_STEPS};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lens::{HarmonicKick, KickSequence};
use crate::scale::PhysicalScale;

/// Designed strengths for a list of kick widths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignResult {
    pub strengths: Vec<f64>,
    pub widths: Vec<f64>,
    /// The drive the lens cancels: m/t_f or mḃ/b.
    pub rhs_value: f64,
    /// 1-norm condition number of the row-equilibrated system.
    pub condition_estimate: f64,
}

impl DesignResult {
    pub fn sequence(&self) -> Result<KickSequence> {
        KickSequence::from_parts(&self.strengths, &self.widths)
    }
}

/// Which drive term the classical design cancels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Drive {
    /// m/t_f, from straight-line free flight.
    Classical,
    /// mḃ(t_f)/b(t_f) of free expansion.
    Generalized,
}

impl Drive {
    pub fn value(self, t_f: f64, scale: &PhysicalScale) -> Result<f64> {
        match self {
            Drive::Classical => {
                if !(t_f > 0.0) {
                    return Err(Error::Precondition(format!("classical drive needs t_f > 0, got {t_f}")));
                }
                Ok(PhysicalScale::MASS / t_f)
            }
            Drive::Generalized => generalized_drive(t_f, &ScalingSolution::FreeExpansion, scale),
        }
    }
}

/// Ideal harmonic kick ω_k²δt = ω0²t_f/(1 + ω0²t_f²).
pub fn harmonic_kick_strength(t_f: f64, _scale: &PhysicalScale) -> Result<HarmonicKick> {
    if !(t_f.is_finite() && t_f >= 0.0) {
        return Err(Error::Precondition(format!("t_f must be >= 0, got {t_f}")));
    }
    let w2 = PhysicalScale::OMEGA0 * PhysicalScale::OMEGA0;
    Ok(HarmonicKick { strength: w2 * t_f / (1.0 + w2 * t_f * t_f) })
}

/// m·ḃ(t_f)/b(t_f).
pub fn generalized_drive(t_f: f64, scaling: &ScalingSolution, _scale: &PhysicalScale) -> Result<f64> {
    if !(t_f.is_finite() && t_f >= 0.0) {
        return Err(Error::Precondition(format!("t_f must be >= 0, got {t_f}")));
    }
    let (b, b_dot) = scaling.evaluate(t_f)?;
    Ok(PhysicalScale::MASS * b_dot / b)
}

/// Classical momentum change of a kick sequence at each x.
pub fn impulse_profile(seq: &KickSequence, xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|&x| seq.impulse(x)).collect()
}

/// Designs N kicks for widths `sigmas` at focal time `t_f` with the given drive.
pub fn design_kicks(sigmas: &[f64], t_f: f64, drive: Drive, scale: &PhysicalScale) -> Result<DesignResult> {
    classical_n_kick(sigmas, drive.value(t_f, scale)?)
}
