//! Position <-> momentum transforms with physicist normalization.
//!
//! ψ̃(p_k) = dx/sqrt(2πħ) Σ_j ψ(x_j) exp(-i p_k x_j/ħ), with x_j = -L + j dx
//! and p_k = (k - N/2) dp. Since dp·L = πħ, the offsets reduce to
//! checkerboard signs around a plain FFT.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::grid::SpatialGrid;
use crate::scale::PhysicalScale;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

#[inline]
fn alternate(j: usize) -> f64 {
    if j.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Unnormalized forward (sign -1) or inverse (sign +1) DFT, in place.
pub(crate) fn dft_in_place(buf: &mut [Complex64], inverse: bool) {
    PLANNER.with(|planner| {
        let mut planner = planner.borrow_mut();
        let fft = if inverse {
            planner.plan_fft_inverse(buf.len())
        } else {
            planner.plan_fft_forward(buf.len())
        };
        fft.process(buf);
    });
}

pub(crate) fn to_momentum(grid: &SpatialGrid, psi: &[Complex64]) -> Vec<Complex64> {
    let n = grid.num_points();
    let mut buf: Vec<Complex64> = psi.iter().enumerate().map(|(j, &a)| a * alternate(j)).collect();
    dft_in_place(&mut buf, false);
    let pre = grid.spacing() / (2.0 * PI * PhysicalScale::HBAR).sqrt();
    for (k, a) in buf.iter_mut().enumerate() {
        *a *= pre * alternate(k + n / 2);
    }
    buf
}

pub(crate) fn to_position(grid: &SpatialGrid, phi: &[Complex64]) -> Vec<Complex64> {
    let n = grid.num_points();
    let mut buf: Vec<Complex64> = phi
        .iter()
        .enumerate()
        .map(|(k, &a)| a * alternate(k + n / 2))
        .collect();
    dft_in_place(&mut buf, true);
    let pre = grid.momentum_spacing() / (2.0 * PI * PhysicalScale::HBAR).sqrt();
    for (j, a) in buf.iter_mut().enumerate() {
        *a *= pre * alternate(j);
    }
    buf
}
