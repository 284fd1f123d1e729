//! Lens elements and expansion protocols.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An instantaneous pulse of the potential U(1 - exp(-x²/2σ²)).
///
/// Only the time-integrated depth κ = U·δt enters in the instantaneous
/// limit. κ > 0 is attractive (converging), κ < 0 repulsive (diverging).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKick")]
pub struct GaussianKick {
    pub strength: f64,
    pub width: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKick {
    strength: f64,
    width: f64,
}

impl TryFrom<RawKick> for GaussianKick {
    type Error = Error;

    fn try_from(raw: RawKick) -> Result<Self> {
        GaussianKick::new(raw.strength, raw.width)
    }
}

impl GaussianKick {
    pub fn new(strength: f64, width: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::Config(format!("kick width must be > 0, got {width}")));
        }
        if !strength.is_finite() {
            return Err(Error::Config(format!("kick strength must be finite, got {strength}")));
        }
        Ok(Self { strength, width })
    }

    /// Integrated potential κ(1 - exp(-x²/2σ²)), in units of ħ.
    #[inline]
    pub fn phase(&self, x: f64) -> f64 {
        self.strength * self.shape(x)
    }

    #[inline]
    pub fn shape(&self, x: f64) -> f64 {
        -(-x * x / (2.0 * self.width * self.width)).exp_m1()
    }

    /// Classical momentum change -κ x exp(-x²/2σ²)/σ² at position x.
    #[inline]
    pub fn impulse(&self, x: f64) -> f64 {
        let s2 = self.width * self.width;
        -self.strength / s2 * x * (-x * x / (2.0 * s2)).exp()
    }
}

/// Back-to-back Gaussian kicks. In the instantaneous limit the order does not
/// matter.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct KickSequence {
    pub kicks: Vec<GaussianKick>,
}

impl KickSequence {
    pub fn new(kicks: Vec<GaussianKick>) -> Self {
        Self { kicks }
    }

    /// Builds a sequence from parallel strength and width lists.
    pub fn from_parts(strengths: &[f64], widths: &[f64]) -> Result<Self> {
        if strengths.len() != widths.len() {
            return Err(Error::Config(format!(
                "{} strengths given for {} widths",
                strengths.len(),
                widths.len()
            )));
        }
        strengths
            .iter()
            .zip(widths)
            .map(|(&k, &s)| GaussianKick::new(k, s))
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn len(&self) -> usize {
        self.kicks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kicks.is_empty()
    }

    pub fn strengths(&self) -> Vec<f64> {
        self.kicks.iter().map(|k| k.strength).collect()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.kicks.iter().map(|k| k.width).collect()
    }

    pub fn min_width(&self) -> Option<f64> {
        self.kicks.iter().map(|k| k.width).reduce(f64::min)
    }

    pub fn phase(&self, x: f64) -> f64 {
        self.kicks.iter().map(|k| k.phase(x)).sum()
    }

    pub fn impulse(&self, x: f64) -> f64 {
        self.kicks.iter().map(|k| k.impulse(x)).sum()
    }

    pub fn reversed(&self) -> Self {
        Self::new(self.kicks.iter().rev().copied().collect())
    }
}

/// Quadratic kick U = ½mω_k²x² pulsed for δt; `strength` is Ω = ω_k²δt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicKick {
    pub strength: f64,
}

/// The lens applied at the end of the free expansion.
#[derive(Debug, Clone, PartialEq)]
pub enum KickSpec {
    Harmonic(HarmonicKick),
    Gaussian(KickSequence),
}

impl KickSpec {
    /// Largest classical impulse magnitude over |x| <= extent.
    pub(crate) fn max_impulse(&self, extent: f64, drift: f64) -> f64 {
        const SAMPLES: usize = 2048;
        (0..=SAMPLES)
            .map(|i| {
                let x = extent * i as f64 / SAMPLES as f64;
                let kick = match self {
                    KickSpec::Harmonic(h) => -h.strength * x,
                    KickSpec::Gaussian(seq) => seq.impulse(x),
                };
                (drift * x + kick).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Free expansion for `expansion_time` after release from the trap, then an
/// instantaneous lens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProtocol", into = "RawProtocol")]
pub struct ExpansionProtocol {
    pub expansion_time: f64,
    pub kick: KickSpec,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProtocol {
    expansion_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    harmonic_strength: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kicks: Option<Vec<GaussianKick>>,
}

impl TryFrom<RawProtocol> for ExpansionProtocol {
    type Error = Error;

    fn try_from(raw: RawProtocol) -> Result<Self> {
        let kick = match (raw.harmonic_strength, raw.kicks) {
            (Some(strength), None) => KickSpec::Harmonic(HarmonicKick { strength }),
            (None, Some(kicks)) => KickSpec::Gaussian(KickSequence::new(kicks)),
            _ => {
                return Err(Error::Config(
                    "protocol needs exactly one of `harmonic_strength` or `kicks`".into(),
                ))
            }
        };
        ExpansionProtocol::new(raw.expansion_time, kick)
    }
}

impl From<ExpansionProtocol> for RawProtocol {
    fn from(p: ExpansionProtocol) -> Self {
        let (harmonic_strength, kicks) = match p.kick {
            KickSpec::Harmonic(h) => (Some(h.strength), None),
            KickSpec::Gaussian(seq) => (None, Some(seq.kicks)),
        };
        RawProtocol {
            expansion_time: p.expansion_time,
            harmonic_strength,
            kicks,
        }
    }
}

impl ExpansionProtocol {
    pub fn new(expansion_time: f64, kick: KickSpec) -> Result<Self> {
        if !(expansion_time.is_finite() && expansion_time >= 0.0) {
            return Err(Error::Config(format!(
                "expansion_time must be >= 0, got {expansion_time}"
            )));
        }
        Ok(Self { expansion_time, kick })
    }

    pub fn harmonic(expansion_time: f64, strength: f64) -> Result<Self> {
        Self::new(expansion_time, KickSpec::Harmonic(HarmonicKick { strength }))
    }

    pub fn gaussian(expansion_time: f64, seq: KickSequence) -> Result<Self> {
        Self::new(expansion_time, KickSpec::Gaussian(seq))
    }
}
