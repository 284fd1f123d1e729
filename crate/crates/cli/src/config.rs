//! Scenario files. Widths are given in units of Δx_i, everything else in
//! natural units.

use std::path::PathBuf;

use kicklens::optimize::{OptimizerOptions, ScaleGrid, SweepMode};
use kicklens::scale::initial_widths;
use kicklens::PhysicalScale;
use serde::Deserialize;

use crate::error::CliError;
use crate::overrides::apply_overrides;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignMode {
    #[default]
    Classical,
    Generalized,
    Optimized,
    Explicit,
}

impl DesignMode {
    pub fn name(self) -> &'static str {
        match self {
            DesignMode::Classical => "classical",
            DesignMode::Generalized => "generalized",
            DesignMode::Optimized => "optimized",
            DesignMode::Explicit => "explicit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    Summary,
    MomentumDistribution,
    Wigner,
    Sweep,
    Sensitivity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LensChoice {
    #[default]
    Gaussian,
    Harmonic,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub design_mode: DesignMode,
    #[serde(default)]
    pub outputs: Vec<Output>,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub scale: PhysicalScale,
    #[serde(default)]
    pub protocol: ProtocolConfig,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    pub sweep: Option<SweepConfig>,
    pub sensitivity: Option<SensitivityConfig>,
    #[serde(default)]
    pub wigner: WignerConfig,
    #[serde(default)]
    pub momentum: MomentumConfig,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    pub expansion_time: Option<f64>,
    #[serde(default)]
    pub lens: LensChoice,
    pub harmonic_strength: Option<f64>,
    #[serde(default)]
    pub kicks: Vec<KickConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KickConfig {
    /// RMS width in units of Δx_i.
    pub width: f64,
    pub strength: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub budget_per_kick: usize,
    pub multi_start: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        let o = OptimizerOptions::default();
        Self { budget_per_kick: o.budget_per_kick, multi_start: o.multi_start }
    }
}

impl OptimizerConfig {
    pub fn options(&self) -> OptimizerOptions {
        OptimizerOptions { budget_per_kick: self.budget_per_kick, multi_start: self.multi_start }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepModeConfig {
    Harmonic,
    Classical,
    Generalized,
    Optimized,
}

impl From<SweepModeConfig> for SweepMode {
    fn from(m: SweepModeConfig) -> Self {
        match m {
            SweepModeConfig::Harmonic => SweepMode::Harmonic,
            SweepModeConfig::Classical => SweepMode::Classical,
            SweepModeConfig::Generalized => SweepMode::Generalized,
            SweepModeConfig::Optimized => SweepMode::Optimized,
        }
    }
}

/// Focal times: either an explicit list or `points` values evenly spaced in
/// [t_min, t_max].
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub times: Option<Vec<f64>>,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub points: Option<usize>,
    #[serde(default = "default_sweep_modes")]
    pub modes: Vec<SweepModeConfig>,
    /// Refine the minimum of every non-harmonic curve by golden-section search.
    #[serde(default)]
    pub focal_time: bool,
}

fn default_sweep_modes() -> Vec<SweepModeConfig> {
    vec![SweepModeConfig::Classical, SweepModeConfig::Optimized, SweepModeConfig::Harmonic]
}

impl SweepConfig {
    pub fn times(&self) -> Result<Vec<f64>, CliError> {
        match (&self.times, self.t_min, self.t_max, self.points) {
            (Some(t), None, None, None) => {
                if t.is_empty() {
                    return Err(CliError::Config("sweep.times is empty".into()));
                }
                Ok(t.clone())
            }
            (None, Some(lo), Some(hi), Some(n)) => {
                if !(lo > 0.0 && hi > lo && n >= 2) {
                    return Err(CliError::Config(format!(
                        "sweep needs 0 < t_min < t_max and points >= 2, got t_min = {lo}, t_max = {hi}, points = {n}"
                    )));
                }
                Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
            }
            _ => Err(CliError::Config(
                "sweep needs either `times` or all of `t_min`, `t_max`, `points`".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensitivityConfig {
    pub scale_min: f64,
    pub scale_max: f64,
    pub points: usize,
    /// Use the optimized focal time of the doublet (needs `[sweep]`) instead
    /// of `protocol.expansion_time`.
    pub at_focal_time: bool,
}

impl Default for SensitivityConfig {
    fn default() -> Self {
        Self { scale_min: 0.9, scale_max: 1.1, points: 41, at_focal_time: false }
    }
}

impl SensitivityConfig {
    pub fn grid(&self) -> Result<ScaleGrid, CliError> {
        if self.points < 1 || !(self.scale_min <= self.scale_max) {
            return Err(CliError::Config("sensitivity needs scale_min <= scale_max and points >= 1".into()));
        }
        let g = ScaleGrid::uniform(self.scale_min, self.scale_max, self.points);
        g.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WignerConfig {
    /// Grid refinement factor over the automatic grid.
    pub refine: usize,
    pub downsample: usize,
    /// Half-width of the exported position range, in units of Δx at kick time.
    pub x_range: f64,
    /// Half-width of the exported momentum range, in units of Δp_i.
    pub p_range: f64,
}

impl Default for WignerConfig {
    fn default() -> Self {
        Self { refine: 2, downsample: 1, x_range: 6.0, p_range: 4.0 }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MomentumConfig {
    /// Half-width of the exported momentum distribution, in units of Δp_i.
    pub p_range: f64,
}

impl Default for MomentumConfig {
    fn default() -> Self {
        Self { p_range: 4.0 }
    }
}

impl Scenario {
    /// Parses TOML text after applying `key=value` overrides.
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self, CliError> {
        let scenario: Scenario = deserialize(text, overrides)?;
        scenario.scale.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(scenario)
    }

    /// Kick widths converted to natural units.
    pub fn widths(&self) -> Vec<f64> {
        let (dx_i, _) = initial_widths(&self.scale);
        self.protocol.kicks.iter().map(|k| k.width * dx_i).collect()
    }

    pub fn expansion_time(&self) -> Result<f64, CliError> {
        self.protocol
            .expansion_time
            .ok_or_else(|| CliError::Config("protocol.expansion_time is required".into()))
    }

    /// Checks the lens description against the design mode.
    pub fn check_lens(&self) -> Result<(), CliError> {
        let p = &self.protocol;
        match p.lens {
            LensChoice::Harmonic => {
                if !p.kicks.is_empty() {
                    return Err(CliError::Config("harmonic lens takes no protocol.kicks".into()));
                }
                if self.design_mode == DesignMode::Explicit && p.harmonic_strength.is_none() {
                    return Err(CliError::Config("explicit harmonic lens needs protocol.harmonic_strength".into()));
                }
            }
            LensChoice::Gaussian => {
                if p.kicks.is_empty() {
                    return Err(CliError::Config("gaussian lens needs at least one [[protocol.kicks]]".into()));
                }
                if p.harmonic_strength.is_some() {
                    return Err(CliError::Config("protocol.harmonic_strength is only for lens = \"harmonic\"".into()));
                }
                let given = p.kicks.iter().filter(|k| k.strength.is_some()).count();
                if self.design_mode == DesignMode::Explicit && given != p.kicks.len() {
                    return Err(CliError::Config("explicit design mode needs a strength for every kick".into()));
                }
                if self.design_mode != DesignMode::Explicit && given != 0 {
                    return Err(CliError::Config(format!(
                        "kick strengths are designed in {} mode; remove them or use design_mode = \"explicit\"",
                        self.design_mode.name()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Deserializes straight from the text when there are no overrides, so
/// errors point at a line; otherwise through the edited table, where errors
/// name the field path.
pub(crate) fn deserialize<T: serde::de::DeserializeOwned>(text: &str, overrides: &[String]) -> Result<T, CliError> {
    let config = |e: toml::de::Error| CliError::Config(e.to_string());
    if overrides.is_empty() {
        return toml::from_str(text).map_err(config);
    }
    let mut table: toml::Table = text.parse().map_err(config)?;
    apply_overrides(&mut table, overrides)?;
    table.try_into().map_err(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
design_mode = "classical"
outputs = ["summary"]

[protocol]
expansion_time = 7.0

[[protocol.kicks]]
width = 15.0

[[protocol.kicks]]
width = 14.0
"#;

    #[test]
    fn parses_and_converts_widths() {
        let s = Scenario::parse(BASIC, &[]).unwrap();
        assert_eq!(s.design_mode, DesignMode::Classical);
        assert_eq!(s.outputs, vec![Output::Summary]);
        let w = s.widths();
        assert!((w[0] - 15.0 / 2f64.sqrt()).abs() < 1e-14);
        s.check_lens().unwrap();
    }

    #[test]
    fn unknown_field_is_a_config_error() {
        let err = Scenario::parse("design_mod = \"classical\"", &[]).unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
        assert!(err.to_string().contains("design_mod"), "{err}");
    }

    #[test]
    fn explicit_mode_needs_strengths() {
        let s = Scenario::parse(BASIC, &["design_mode=explicit".into()]).unwrap();
        assert!(s.check_lens().is_err());
        let s = Scenario::parse(
            BASIC,
            &[
                "design_mode=explicit".into(),
                "protocol.kicks.0.strength=1.0".into(),
                "protocol.kicks.1.strength=-1.0".into(),
            ],
        )
        .unwrap();
        s.check_lens().unwrap();
    }

    #[test]
    fn sweep_times() {
        let c = SweepConfig {
            times: None,
            t_min: Some(1.0),
            t_max: Some(3.0),
            points: Some(5),
            modes: default_sweep_modes(),
            focal_time: false,
        };
        assert_eq!(c.times().unwrap(), vec![1.0, 1.5, 2.0, 2.5, 3.0]);
        let bad = SweepConfig { points: None, ..c };
        assert!(bad.times().is_err());
    }
}
