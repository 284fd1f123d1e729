use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::engine::{dft_in_place, WaveState};
use crate::error::{Error, Result};
use crate::scale::PhysicalScale;

/// Sampled Wigner function, rows along x and columns along p.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerMap {
    pub x_axis: Vec<f64>,
    pub p_axis: Vec<f64>,
    pub values: Array2<f64>,
}

impl WignerMap {
    pub fn x_spacing(&self) -> f64 {
        self.x_axis[1] - self.x_axis[0]
    }

    pub fn p_spacing(&self) -> f64 {
        self.p_axis[1] - self.p_axis[0]
    }

    pub fn total(&self) -> f64 {
        self.values.sum() * self.x_spacing() * self.p_spacing()
    }

    /// ∫W dp for every x row.
    pub fn position_marginal(&self) -> Vec<f64> {
        let dp = self.p_spacing();
        self.values.rows().into_iter().map(|r| r.sum() * dp).collect()
    }

    /// ∫W dx for every p column.
    pub fn momentum_marginal(&self) -> Vec<f64> {
        let dx = self.x_spacing();
        self.values.columns().into_iter().map(|c| c.sum() * dx).collect()
    }

    /// ∫∫ (x - ⟨x⟩)(p - ⟨p⟩) W dx dp.
    pub fn covariance(&self) -> f64 {
        let w = self.total() / (self.x_spacing() * self.p_spacing());
        let (mut mx, mut mp, mut mxp) = (0.0, 0.0, 0.0);
        for ((i, j), &v) in self.values.indexed_iter() {
            let (x, p) = (self.x_axis[i], self.p_axis[j]);
            mx += x * v;
            mp += p * v;
            mxp += x * p * v;
        }
        mxp / w - (mx / w) * (mp / w)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Keeps rows with |x| <= x_max and columns with |p| <= p_max.
    pub fn crop(&self, x_max: f64, p_max: f64) -> WignerMap {
        let rows: Vec<usize> = (0..self.x_axis.len()).filter(|&i| self.x_axis[i].abs() <= x_max).collect();
        let cols: Vec<usize> = (0..self.p_axis.len()).filter(|&j| self.p_axis[j].abs() <= p_max).collect();
        let values = Array2::from_shape_fn((rows.len(), cols.len()), |(a, b)| self.values[[rows[a], cols[b]]]);
        WignerMap {
            x_axis: rows.iter().map(|&i| self.x_axis[i]).collect(),
            p_axis: cols.iter().map(|&j| self.p_axis[j]).collect(),
            values,
        }
    }
}

/// W(x,p) = (1/πħ) ∫ dy ψ*(x+y) ψ(x-y) exp(2ipy/ħ), evaluated row by row
/// with a DFT over y = k·dx.
///
/// The momentum axis has spacing πħ/(N dx) and spans [-πħ/2dx, πħ/2dx), half
/// the window of the state's own momentum grid, so the state should be
/// resolved with a factor of two to spare. Every `downsample`-th row and
/// column is kept.
pub fn wigner(state: &WaveState, downsample: usize) -> Result<WignerMap> {
    let grid = *state.grid();
    let n = grid.num_points();
    if downsample == 0 || !n.is_multiple_of(downsample) {
        return Err(Error::Precondition(format!(
            "downsample {downsample} does not divide grid size {n}"
        )));
    }
    if n / downsample < 2 {
        return Err(Error::Precondition("downsampled Wigner map needs at least 2 points per axis".into()));
    }
    let dx = grid.spacing();
    let hbar = PhysicalScale::HBAR;
    let dp = std::f64::consts::PI * hbar / (n as f64 * dx);
    let psi = state.amplitudes();
    let half = (n / 2) as isize;

    let rows: Vec<usize> = (0..n).step_by(downsample).collect();
    let cols: Vec<usize> = (0..n).step_by(downsample).collect();
    let computed: Vec<Vec<f64>> = rows
        .par_iter()
        .map(|&j| {
            let mut buf = vec![Complex64::new(0.0, 0.0); n];
            for k in -half..half {
                let (a, b) = (j as isize + k, j as isize - k);
                if a < 0 || b < 0 || a >= n as isize || b >= n as isize {
                    continue;
                }
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                buf[k.rem_euclid(n as isize) as usize] = psi[a as usize].conj() * psi[b as usize] * sign;
            }
            dft_in_place(&mut buf, true);
            let pre = dx / (std::f64::consts::PI * hbar);
            cols.iter().map(|&m| buf[m].re * pre).collect()
        })
        .collect();

    let values = Array2::from_shape_fn((rows.len(), cols.len()), |(a, b)| computed[a][b]);
    Ok(WignerMap {
        x_axis: rows.iter().map(|&j| grid.position(j)).collect(),
        p_axis: cols.iter().map(|&m| (m as f64 - (n / 2) as f64) * dp).collect(),
        values,
    })
}
