use num_complex::Complex64;

use super::fft;
use super::grid::SpatialGrid;
use crate::error::{Error, Result};

pub const DEFAULT_NORM_TOLERANCE: f64 = 1e-10;

/// Single-particle wavefunction sampled on a [`SpatialGrid`], position
/// representation, normalized so that Σ|ψ_j|² dx = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    grid: SpatialGrid,
    amplitudes: Vec<Complex64>,
    norm_tolerance: f64,
}

/// Momentum-space amplitudes on the monotone momentum grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumAmplitudes {
    pub momenta: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
    pub spacing: f64,
}

/// First and second moments of a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpaceMoments {
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
    /// Symmetrized ⟨(xp + px)/2⟩ - ⟨x⟩⟨p⟩.
    pub cov_xp: f64,
}

impl WaveState {
    pub fn from_amplitudes(grid: SpatialGrid, amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::with_tolerance(grid, amplitudes, DEFAULT_NORM_TOLERANCE)
    }

    pub fn with_tolerance(
        grid: SpatialGrid,
        amplitudes: Vec<Complex64>,
        norm_tolerance: f64,
    ) -> Result<Self> {
        if amplitudes.len() != grid.num_points() {
            return Err(Error::Precondition(format!(
                "{} amplitudes for a grid of {} points",
                amplitudes.len(),
                grid.num_points()
            )));
        }
        let state = Self { grid, amplitudes, norm_tolerance };
        let norm = state.norm();
        if !((norm - 1.0).abs() <= norm_tolerance) {
            return Err(Error::Precondition(format!(
                "state norm {norm} differs from 1 by more than {norm_tolerance:e}"
            )));
        }
        Ok(state)
    }

    /// Rescales arbitrary nonzero samples to unit norm.
    pub fn normalized(grid: SpatialGrid, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let total: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * grid.spacing();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::Precondition("cannot normalize a zero state".into()));
        }
        let s = total.sqrt().recip();
        amplitudes.iter_mut().for_each(|a| *a *= s);
        Self::from_amplitudes(grid, amplitudes)
    }

    /// Builds a state from momentum amplitudes on `grid`'s momentum grid.
    pub fn from_momentum(grid: SpatialGrid, amplitudes: &[Complex64]) -> Result<Self> {
        if amplitudes.len() != grid.num_points() {
            return Err(Error::Precondition("momentum amplitudes do not match grid".into()));
        }
        Self::from_amplitudes(grid, fft::to_position(&grid, amplitudes))
    }

    pub(crate) fn replace_amplitudes(&self, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), self.amplitudes.len());
        Self {
            grid: self.grid,
            amplitudes,
            norm_tolerance: self.norm_tolerance,
        }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_tolerance(&self) -> f64 {
        self.norm_tolerance
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }

    pub fn position_density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn momentum_amplitudes(&self) -> MomentumAmplitudes {
        MomentumAmplitudes {
            momenta: self.grid.momenta(),
            amplitudes: fft::to_momentum(&self.grid, &self.amplitudes),
            spacing: self.grid.momentum_spacing(),
        }
    }

    pub fn moments(&self) -> PhaseSpaceMoments {
        let grid = &self.grid;
        let dx = grid.spacing();
        let xs = grid.positions();
        let (mean_x, var_x) = weighted_mean_var(&xs, self.amplitudes.iter().map(|a| a.norm_sqr() * dx));

        let mut phi = fft::to_momentum(grid, &self.amplitudes);
        let ps = grid.momenta();
        let dp = grid.momentum_spacing();
        let (mean_p, var_p) = weighted_mean_var(&ps, phi.iter().map(|a| a.norm_sqr() * dp));

        phi.iter_mut().zip(&ps).for_each(|(a, &p)| *a *= p);
        let p_psi = fft::to_position(grid, &phi);
        let xp: f64 = self
            .amplitudes
            .iter()
            .zip(&p_psi)
            .zip(&xs)
            .map(|((a, b), &x)| (a.conj() * b).re * x)
            .sum::<f64>()
            * dx;

        PhaseSpaceMoments {
            mean_x,
            mean_p,
            var_x,
            var_p,
            cov_xp: xp - mean_x * mean_p,
        }
    }
}

/// Mean and variance about the mean of `values` under (unnormalized) weights.
pub(crate) fn weighted_mean_var(values: &[f64], weights: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let total: f64 = weights.clone().sum();
    let mean = values.iter().zip(weights.clone()).map(|(v, w)| v * w).sum::<f64>() / total;
    let var = values
        .iter()
        .zip(weights)
        .map(|(v, w)| (v - mean) * (v - mean) * w)
        .sum::<f64>()
        / total;
    (mean, var)
}
