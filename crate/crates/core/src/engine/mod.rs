//! Exact single-particle evolution on a periodic grid.
//!
//! Free flight is a quadratic phase in momentum space and an instantaneous
//! kick is a phase in position space, so a protocol made of free segments
//! and kicks is evolved without any time-stepping error.

mod fft;
mod grid;
mod state;

use num_complex::Complex64;

pub use grid::{auto_grid, SpatialGrid, MAX_GRID_POINTS};
pub use state::{MomentumAmplitudes, PhaseSpaceMoments, WaveState, DEFAULT_NORM_TOLERANCE};

pub(crate) use fft::{dft_in_place, to_momentum};
pub(crate) use state::weighted_mean_var;

use crate::error::{Error, Result};
use crate::lens::{ExpansionProtocol, HarmonicKick, KickSequence, KickSpec};
use crate::scale::PhysicalScale;

/// Free expansion must keep |⟨x⟩| + this many RMS widths inside the box.
pub const GRID_SAFETY_WIDTHS: f64 = 6.0;

/// Ground state of the initial trap, (mω0/πħ)^¼ exp(-mω0x²/2ħ), normalized on
/// the grid.
pub fn make_ground_state(grid: SpatialGrid, _scale: &PhysicalScale) -> Result<WaveState> {
    let alpha = PhysicalScale::MASS * PhysicalScale::OMEGA0 / PhysicalScale::HBAR;
    let edge = grid.half_extent();
    let tail = (-alpha * edge * edge).exp();
    if tail >= 1e-12 {
        return Err(Error::Precondition(format!(
            "grid half extent {edge} too small for the ground state (edge density {tail:e} of peak)"
        )));
    }
    let amplitudes = grid
        .positions()
        .into_iter()
        .map(|x| Complex64::new((-0.5 * alpha * x * x).exp(), 0.0))
        .collect();
    WaveState::normalized(grid, amplitudes)
}

/// Free flight for time `t`: ψ̃(p) ← exp(-ip²t/2mħ) ψ̃(p).
///
/// Refuses to run when the exactly predicted width |⟨x⟩(t)| + 6Δx(t) would
/// leave the box, since wrap-around silently corrupts the momentum tails.
pub fn propagate_free(state: &WaveState, t: f64) -> Result<WaveState> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Precondition(format!("propagation time must be >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(state.clone());
    }
    let m = state.moments();
    let tm = t / PhysicalScale::MASS;
    let mean = m.mean_x + tm * m.mean_p;
    let var = m.var_x + 2.0 * tm * m.cov_xp + tm * tm * m.var_p;
    let grid = *state.grid();
    let predicted = mean.abs() + GRID_SAFETY_WIDTHS * var.max(0.0).sqrt();
    if predicted > grid.half_extent() {
        return Err(Error::GridOverflow {
            predicted,
            allowed: grid.half_extent(),
            half_extent: grid.half_extent(),
        });
    }

    let mut phi = fft::to_momentum(&grid, state.amplitudes());
    let c = t / (2.0 * PhysicalScale::MASS * PhysicalScale::HBAR);
    for (k, a) in phi.iter_mut().enumerate() {
        let p = grid.momentum(k);
        *a *= Complex64::from_polar(1.0, -c * p * p);
    }
    Ok(state.replace_amplitudes(fft::to_position(&grid, &phi)))
}

/// Imprints the product of the kick phases exp(-iκ_n(1 - e^{-x²/2σ_n²})/ħ).
pub fn apply_gaussian_kicks(state: &WaveState, seq: &KickSequence) -> WaveState {
    let grid = state.grid();
    let amplitudes = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(j, &a)| {
            let x = grid.position(j);
            seq.kicks.iter().fold(a, |acc, k| {
                acc * Complex64::from_polar(1.0, -k.phase(x) / PhysicalScale::HBAR)
            })
        })
        .collect();
    state.replace_amplitudes(amplitudes)
}

/// Imprints exp(-imΩx²/2ħ).
pub fn apply_harmonic_kick(state: &WaveState, kick: HarmonicKick) -> WaveState {
    let grid = state.grid();
    let c = PhysicalScale::MASS * kick.strength / (2.0 * PhysicalScale::HBAR);
    let amplitudes = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(j, &a)| {
            let x = grid.position(j);
            a * Complex64::from_polar(1.0, -c * x * x)
        })
        .collect();
    state.replace_amplitudes(amplitudes)
}

pub fn apply_kick(state: &WaveState, kick: &KickSpec) -> WaveState {
    match kick {
        KickSpec::Harmonic(h) => apply_harmonic_kick(state, *h),
        KickSpec::Gaussian(seq) => apply_gaussian_kicks(state, seq),
    }
}

pub fn momentum_amplitudes(state: &WaveState) -> MomentumAmplitudes {
    state.momentum_amplitudes()
}

/// States around the kick of one protocol run.
#[derive(Debug, Clone)]
pub struct ProtocolRun {
    pub initial: WaveState,
    /// Immediately before the kick.
    pub expanded: WaveState,
    pub kicked: WaveState,
}

/// Ground state, free expansion, kick, on `grid` (or [`auto_grid`]).
pub fn run_protocol(
    protocol: &ExpansionProtocol,
    scale: &PhysicalScale,
    grid: Option<SpatialGrid>,
) -> Result<ProtocolRun> {
    let grid = match grid {
        Some(g) => g,
        None => auto_grid(protocol, scale)?,
    };
    let initial = make_ground_state(grid, scale)?;
    let expanded = propagate_free(&initial, protocol.expansion_time)?;
    let kicked = apply_kick(&expanded, &protocol.kick);
    Ok(ProtocolRun { initial, expanded, kicked })
}
