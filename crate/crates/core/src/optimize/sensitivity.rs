use ndarray::Array2;
use rayon::prelude::*;

use super::{LensKind, LensObjective};
use crate::design::classical_doublet;
use crate::engine::{auto_grid, SpatialGrid};
use crate::error::{Error, Result};
use crate::lens::{ExpansionProtocol, KickSequence};
use crate::scale::{initial_widths, PhysicalScale};

/// Multipliers applied to the classical doublet strengths (κ1,cl, κ2,cl).
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleGrid {
    pub scale1: Vec<f64>,
    pub scale2: Vec<f64>,
}

impl Default for ScaleGrid {
    /// 41 × 41 over [0.9, 1.1]².
    fn default() -> Self {
        Self::uniform(0.9, 1.1, 41)
    }
}

impl ScaleGrid {
    pub fn uniform(lo: f64, hi: f64, points: usize) -> Self {
        let axis: Vec<f64> = if points == 1 {
            vec![lo]
        } else {
            (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
        };
        Self { scale1: axis.clone(), scale2: axis }
    }

    pub fn validate(&self) -> Result<()> {
        if self.scale1.is_empty() || self.scale2.is_empty() {
            return Err(Error::Precondition("empty scale grid".into()));
        }
        if let Some(s) = self.scale1.iter().chain(&self.scale2).find(|s| !(**s > 0.0 && **s <= 2.0)) {
            return Err(Error::Precondition(format!("scale factor {s} outside (0, 2]")));
        }
        Ok(())
    }
}

/// Δp_i/Δp_f over the scale grid; `values[[i, j]]` belongs to
/// (`scale1[i]`, `scale2[j]`).
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityMap {
    pub scales: ScaleGrid,
    pub values: Array2<f64>,
    pub classical_strengths: [f64; 2],
    pub grid: SpatialGrid,
}

impl SensitivityMap {
    /// (scale1, scale2, value) of the best cell.
    pub fn best(&self) -> (f64, f64, f64) {
        let ((i, j), v) = self
            .values
            .indexed_iter()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty map");
        (self.scales.scale1[i], self.scales.scale2[j], *v)
    }
}

/// Evaluates the doublet (σ1, σ2) at focal time `t_f` with strengths
/// (s1·κ1,cl, s2·κ2,cl) for every pair of scale factors.
pub fn sensitivity_map(sigma1: f64, sigma2: f64, t_f: f64, scales: &ScaleGrid) -> Result<SensitivityMap> {
    scales.validate()?;
    let classical = classical_doublet(sigma1, sigma2, t_f)?;
    let [k1, k2] = [classical.strengths[0], classical.strengths[1]];
    let scale = PhysicalScale::natural();

    // one grid for the whole map: the finest any corner needs
    let (lo1, hi1) = min_max(&scales.scale1);
    let (lo2, hi2) = min_max(&scales.scale2);
    let mut grid: Option<SpatialGrid> = None;
    for (a, b) in [(lo1, lo2), (lo1, hi2), (hi1, lo2), (hi1, hi2), (1.0, 1.0)] {
        let seq = KickSequence::from_parts(&[a * k1, b * k2], &[sigma1, sigma2])?;
        let g = auto_grid(&ExpansionProtocol::gaussian(t_f, seq)?, &scale)?;
        if grid.is_none_or(|cur| g.num_points() > cur.num_points()) {
            grid = Some(g);
        }
    }
    let grid = grid.expect("corners evaluated");
    let objective = LensObjective::new(LensKind::Gaussian(vec![sigma1, sigma2]), t_f, grid, &scale)?;
    let (_, dp_i) = initial_widths(&scale);

    let cells: Vec<(usize, usize)> = (0..scales.scale1.len())
        .flat_map(|i| (0..scales.scale2.len()).map(move |j| (i, j)))
        .collect();
    let values: Vec<f64> = cells
        .par_iter()
        .map(|&(i, j)| {
            objective
                .final_dp(&[scales.scale1[i] * k1, scales.scale2[j] * k2])
                .map(|dp| dp_i / dp)
        })
        .collect::<Result<_>>()?;
    Ok(SensitivityMap {
        scales: scales.clone(),
        values: Array2::from_shape_vec((scales.scale1.len(), scales.scale2.len()), values)
            .expect("shape matches cell count"),
        classical_strengths: [k1, k2],
        grid,
    })
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
}
