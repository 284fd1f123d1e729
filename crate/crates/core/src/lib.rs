//! Delta-kick cooling of a non-interacting 1D cloud with compound Gaussian
//! matter-wave lenses.
//!
//! * [`scale`] and [`lens`]: unit system, kick and protocol types.
//! * [`engine`]: exact grid evolution (free flight + instantaneous kicks).
//! * [`observables`]: widths, momentum distributions, Wigner maps.
//! * [`design`]: analytic kick strengths (harmonic, Taylor-cancelling
//!   N-kick lenses, Ermakov scaling).
//! * [`optimize`]: numerical kick optimization, focal-time sweeps and
//!   doublet sensitivity maps.

pub mod design;
pub mod engine;
pub mod error;
pub mod lens;
pub mod observables;
pub mod optimize;
pub mod scale;

pub use error::{Error, Result};
pub use lens::{ExpansionProtocol, GaussianKick, HarmonicKick, KickSequence, KickSpec};
pub use scale::PhysicalScale;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
