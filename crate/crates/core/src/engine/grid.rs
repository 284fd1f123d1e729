use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lens::{ExpansionProtocol, KickSpec};
use crate::scale::{initial_widths, PhysicalScale};

/// Largest grid `auto_grid` will hand out.
pub const MAX_GRID_POINTS: usize = 1 << 22;

/// Uniform periodic grid on [-L, L) with N = 2^k points.
///
/// The conjugate momentum grid is [-πħ/dx, πħ/dx) with spacing 2πħ/(N dx),
/// always stored in increasing order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    num_points: usize,
    half_extent: f64,
}

impl SpatialGrid {
    pub fn new(num_points: usize, half_extent: f64) -> Result<Self> {
        if num_points < 2 || !num_points.is_power_of_two() {
            return Err(Error::Precondition(format!(
                "grid size must be a power of two >= 2, got {num_points}"
            )));
        }
        if !(half_extent.is_finite() && half_extent > 0.0) {
            return Err(Error::Precondition(format!(
                "grid half extent must be > 0, got {half_extent}"
            )));
        }
        Ok(Self { num_points, half_extent })
    }

    pub fn num_points(&self) -> usize {
        self.num_points
    }

    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_extent / self.num_points as f64
    }

    #[inline]
    pub fn position(&self, j: usize) -> f64 {
        -self.half_extent + j as f64 * self.spacing()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.num_points).map(|j| self.position(j)).collect()
    }

    pub fn momentum_spacing(&self) -> f64 {
        2.0 * PI * PhysicalScale::HBAR / (self.num_points as f64 * self.spacing())
    }

    /// π ħ / dx: the momentum grid covers [-extent, extent).
    pub fn momentum_extent(&self) -> f64 {
        PI * PhysicalScale::HBAR / self.spacing()
    }

    #[inline]
    pub fn momentum(&self, k: usize) -> f64 {
        (k as f64 - (self.num_points / 2) as f64) * self.momentum_spacing()
    }

    pub fn momenta(&self) -> Vec<f64> {
        (0..self.num_points).map(|k| self.momentum(k)).collect()
    }

    /// Same box, `factor` times more points.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.num_points * factor, self.half_extent)
    }

    /// Whether the kicked state of `protocol` is resolved on this grid: the
    /// largest local momentum after the kick, plus 8Δp_i, fits inside the
    /// momentum window. `auto_grid` leaves a factor of two on top of this.
    pub fn resolves(&self, protocol: &ExpansionProtocol) -> bool {
        self.check_resolves(protocol).is_ok()
    }

    pub fn check_resolves(&self, protocol: &ExpansionProtocol) -> Result<()> {
        let required = required_momentum(protocol, 1.0);
        if self.momentum_extent() < required {
            return Err(Error::MomentumOverflow { required, available: self.momentum_extent() });
        }
        Ok(())
    }
}

fn drift_rate(t: f64) -> f64 {
    let w2 = PhysicalScale::OMEGA0 * PhysicalScale::OMEGA0;
    w2 * t / (1.0 + w2 * t * t)
}

fn expanded_width(t: f64) -> f64 {
    let (dx_i, _) = initial_widths(&PhysicalScale::natural());
    dx_i * (1.0 + (PhysicalScale::OMEGA0 * t).powi(2)).sqrt()
}

/// Momentum window needed after the kick. The local momentum of the freely
/// expanded ground state is x·ω0²t/(1+ω0²t²); the kick adds its impulse.
fn required_momentum(protocol: &ExpansionProtocol, safety: f64) -> f64 {
    let (_, dp_i) = initial_widths(&PhysicalScale::natural());
    let t = protocol.expansion_time;
    let width = expanded_width(t);
    let drift = drift_rate(t) / PhysicalScale::MASS;
    let pre_kick = drift * 8.0 * width;
    let post_kick = protocol.kick.max_impulse(6.0 * width, drift);
    8.0 * dp_i + pre_kick.max(safety * post_kick)
}

/// Picks a grid for `protocol`: half extent of 8 expanded RMS widths, a
/// momentum window covering 8Δp_i plus twice the largest post-kick local
/// momentum, and at least 16 points per narrowest kick width.
pub fn auto_grid(protocol: &ExpansionProtocol, _scale: &PhysicalScale) -> Result<SpatialGrid> {
    let half_extent = 8.0 * expanded_width(protocol.expansion_time);
    let mut max_spacing = PI * PhysicalScale::HBAR / required_momentum(protocol, 2.0);
    if let KickSpec::Gaussian(seq) = &protocol.kick {
        if let Some(sigma) = seq.min_width() {
            max_spacing = max_spacing.min(sigma / 16.0);
        }
    }
    let wanted = (2.0 * half_extent / max_spacing).ceil();
    if !wanted.is_finite() || wanted > MAX_GRID_POINTS as f64 {
        return Err(Error::Resource(format!(
            "protocol needs about {wanted:e} grid points, limit is {MAX_GRID_POINTS}"
        )));
    }
    let num_points = (wanted as usize).next_power_of_two().max(64);
    SpatialGrid::new(num_points, half_extent)
}
