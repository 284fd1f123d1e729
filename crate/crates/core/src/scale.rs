//! Unit system.
//!
//! Everything inside the crate is computed in natural units of the initial
//! trap, ħ = m = ω0 = k_B = 1: time in 1/ω0, length in sqrt(ħ/mω0), momentum
//! in sqrt(ħmω0), kick strength in ħ. SI values only appear at the reporting
//! boundary, through the optional overrides on [`PhysicalScale`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant, J s.
pub const HBAR_SI: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const BOLTZMANN_SI: f64 = 1.380_649e-23;

/// Unit system for a run. The natural-unit constants are fixed at 1; the
/// optional atom mass (kg) and trap frequency (rad/s) only affect conversions
/// to SI.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalScale {
    #[serde(rename = "mass", default, skip_serializing_if = "Option::is_none")]
    pub si_mass: Option<f64>,
    #[serde(rename = "omega0", default, skip_serializing_if = "Option::is_none")]
    pub si_omega0: Option<f64>,
}

/// SI values backing a [`PhysicalScale`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiUnits {
    pub mass: f64,
    pub omega0: f64,
}

impl SiUnits {
    pub fn length(&self) -> f64 {
        (HBAR_SI / (self.mass * self.omega0)).sqrt()
    }

    pub fn momentum(&self) -> f64 {
        (HBAR_SI * self.mass * self.omega0).sqrt()
    }

    pub fn velocity(&self) -> f64 {
        (HBAR_SI * self.omega0 / self.mass).sqrt()
    }

    pub fn time(&self) -> f64 {
        1.0 / self.omega0
    }
}

impl PhysicalScale {
    pub const HBAR: f64 = 1.0;
    pub const MASS: f64 = 1.0;
    pub const OMEGA0: f64 = 1.0;
    pub const BOLTZMANN: f64 = 1.0;

    pub fn natural() -> Self {
        Self::default()
    }

    /// Natural units with SI overrides for reporting.
    pub fn with_si(mass_kg: f64, omega0_rad_s: f64) -> Result<Self> {
        let scale = Self {
            si_mass: Some(mass_kg),
            si_omega0: Some(omega0_rad_s),
        };
        scale.validate()?;
        Ok(scale)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("mass", self.si_mass), ("omega0", self.si_omega0)] {
            if let Some(v) = value {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::Config(format!(
                        "SI override `{name}` must be finite and strictly positive, got {v}"
                    )));
                }
            }
        }
        if self.si_mass.is_some() != self.si_omega0.is_some() {
            return Err(Error::Config(
                "SI overrides `mass` and `omega0` must be given together".into(),
            ));
        }
        Ok(())
    }

    pub fn si(&self) -> Option<SiUnits> {
        match (self.si_mass, self.si_omega0) {
            (Some(mass), Some(omega0)) => Some(SiUnits { mass, omega0 }),
            _ => None,
        }
    }

    fn require_si(&self) -> Result<SiUnits> {
        self.validate()?;
        self.si().ok_or_else(|| {
            Error::Config("SI overrides (`mass`, `omega0`) are required for SI output".into())
        })
    }
}

/// RMS position and momentum widths of the initial trap ground state, in
/// natural units: (sqrt(ħ/2mω0), sqrt(ħmω0/2)).
pub fn initial_widths(_scale: &PhysicalScale) -> (f64, f64) {
    let (hbar, m, w) = (PhysicalScale::HBAR, PhysicalScale::MASS, PhysicalScale::OMEGA0);
    ((hbar / (2.0 * m * w)).sqrt(), (hbar * m * w / 2.0).sqrt())
}

/// Same as [`initial_widths`] in metres and kg m/s.
pub fn initial_widths_si(scale: &PhysicalScale) -> Result<(f64, f64)> {
    let si = scale.require_si()?;
    Ok((
        (HBAR_SI / (2.0 * si.mass * si.omega0)).sqrt(),
        (HBAR_SI * si.mass * si.omega0 / 2.0).sqrt(),
    ))
}

/// Kinetic temperature m·Δv²/k_B in kelvin for a velocity width in m/s.
pub fn si_temperature(mass_kg: f64, dv_m_per_s: f64) -> f64 {
    mass_kg * dv_m_per_s * dv_m_per_s / BOLTZMANN_SI
}

/// Converts a velocity width given in natural units to a kinetic temperature
/// in kelvin.
pub fn natural_to_si_temperature(dv: f64, scale: &PhysicalScale) -> Result<f64> {
    let si = scale.require_si()?;
    if !(dv >= 0.0) {
        return Err(Error::Domain(format!("velocity width must be >= 0, got {dv}")));
    }
    Ok(si_temperature(si.mass, dv * si.velocity()))
}
