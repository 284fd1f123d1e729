//! Data behind the published figures. Presets live in `presets/` and are
//! compiled in; `--config` replaces them and `--set` edits them.

use clap::ValueEnum;
use kicklens::design::harmonic_kick_strength;
use kicklens::engine::run_protocol;
use kicklens::observables::{momentum_distribution, summarize};
use kicklens::optimize::{find_focal_time, sweep_expansion, SweepMode, SweepPoint};
use kicklens::scale::initial_widths;
use kicklens::{ExpansionProtocol, KickSpec, PhysicalScale};
use serde::Deserialize;
use toml::{Table, Value};

use crate::config::{
    deserialize, DesignMode, MomentumConfig, OptimizerConfig, SensitivityConfig, SweepConfig, WignerConfig,
};
use crate::error::CliError;
use crate::output::{cell, floats, Artifacts, Csv};
use crate::run::{
    doublet_sensitivity, failures_value, momentum_csv, optimized_focal_time, refined_run, resolve_gaussian, sweep_csv,
    wigner_csv, ResolvedLens,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    Fig1,
    Fig2,
    Fig4,
    Fig5,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
        }
    }

    pub fn preset(self) -> &'static str {
        match self {
            Figure::Fig1 => include_str!("../presets/fig1.toml"),
            Figure::Fig2 => include_str!("../presets/fig2.toml"),
            Figure::Fig4 => include_str!("../presets/fig4.toml"),
            Figure::Fig5 => include_str!("../presets/fig5.toml"),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureConfig {
    pub figure: Figure,
    /// Kick widths of each lens, in units of Δx_i.
    pub lenses: Vec<Vec<f64>>,
    #[serde(default = "optimized")]
    pub design_mode: DesignMode,
    pub expansion_time: Option<f64>,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub wigner: WignerConfig,
    #[serde(default)]
    pub momentum: MomentumConfig,
    #[serde(default)]
    pub sensitivity: SensitivityConfig,
}

fn optimized() -> DesignMode {
    DesignMode::Optimized
}

impl FigureConfig {
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self, CliError> {
        let cfg: FigureConfig = deserialize(text, overrides)?;
        if cfg.lenses.is_empty() || cfg.lenses.iter().any(|l| l.is_empty()) {
            return Err(CliError::Config("lenses must list at least one non-empty lens".into()));
        }
        if cfg.design_mode == DesignMode::Explicit {
            return Err(CliError::Config("figures design their own strengths; explicit mode is not available".into()));
        }
        Ok(cfg)
    }

    fn widths(&self, lens: usize) -> Vec<f64> {
        let (dx_i, _) = initial_widths(&PhysicalScale::natural());
        self.lenses[lens].iter().map(|w| w * dx_i).collect()
    }

    fn sweep(&self) -> Result<&SweepConfig, CliError> {
        self.sweep
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("{} needs a [sweep] section", self.figure.name())))
    }

    fn expansion_time(&self) -> Result<f64, CliError> {
        self.expansion_time
            .ok_or_else(|| CliError::Config(format!("{} needs expansion_time", self.figure.name())))
    }

    fn resolve(&self, lens: usize, t_f: f64) -> Result<ResolvedLens, CliError> {
        resolve_gaussian(&self.widths(lens), None, t_f, self.design_mode, &self.optimizer.options())
    }
}

pub fn reproduce(cfg: &FigureConfig) -> Result<Artifacts, CliError> {
    let mut art = Artifacts::default();
    art.param("figure", cfg.figure.name());
    art.param("design_mode", cfg.design_mode.name());
    art.param(
        "lenses_dxi",
        Value::Array(cfg.lenses.iter().map(|l| floats(l)).collect()),
    );
    match cfg.figure {
        Figure::Fig1 => fig1(cfg, &mut art)?,
        Figure::Fig2 => fig2(cfg, &mut art)?,
        Figure::Fig4 => fig4(cfg, &mut art)?,
        Figure::Fig5 => fig5(cfg, &mut art)?,
    }
    Ok(art)
}

fn lens_name(n: usize) -> String {
    format!("kicks{n}")
}

fn lens_entry(widths_dxi: &[f64], t_f: f64, strengths: &[f64]) -> Value {
    let mut t = Table::new();
    t.insert("widths_dxi".into(), floats(widths_dxi));
    t.insert("expansion_time".into(), t_f.into());
    t.insert("strengths".into(), floats(strengths));
    Value::Table(t)
}

/// Wigner maps of the initial, freely expanded and harmonically kicked
/// clouds and after each Gaussian lens, all at one focal time.
fn fig1(cfg: &FigureConfig, art: &mut Artifacts) -> Result<(), CliError> {
    let t_f = cfg.expansion_time()?;
    art.param("expansion_time", t_f);
    let ideal = harmonic_kick_strength(t_f, &PhysicalScale::natural())?;
    let harmonic = refined_run(&ExpansionProtocol::harmonic(t_f, ideal.strength)?, None, cfg.wigner.refine)?;
    let dx_kick = summarize(&harmonic.expanded).dx;
    art.param("dx_kick", dx_kick);
    art.param("harmonic_strength", ideal.strength);

    let mut maps = vec![
        ("initial".to_string(), harmonic.initial.clone()),
        ("free".to_string(), harmonic.expanded.clone()),
        ("harmonic".to_string(), harmonic.kicked),
    ];
    let mut lenses_csv = Csv::new(&["lens", "kick", "width_dxi", "width", "strength"]);
    for (i, widths_dxi) in cfg.lenses.iter().enumerate() {
        let lens = cfg.resolve(i, t_f)?;
        let strengths = lens.strengths();
        let name = lens_name(widths_dxi.len());
        for (k, (w, s)) in widths_dxi.iter().zip(&strengths).enumerate() {
            let width = cfg.widths(i)[k];
            lenses_csv.row(vec![name.clone(), (k + 1).to_string(), cell(*w), cell(width), cell(*s)]);
        }
        art.section("lenses").insert(name.clone(), lens_entry(widths_dxi, t_f, &strengths));
        let run = refined_run(&ExpansionProtocol::new(t_f, lens.kick)?, lens.grid, cfg.wigner.refine)?;
        maps.push((name, run.kicked));
    }
    art.add("fig1_lenses.csv", lenses_csv.finish());
    for (name, state) in &maps {
        let (text, total) = wigner_csv(state, dx_kick, &cfg.wigner)?;
        art.add(format!("fig1_wigner_{name}.csv"), text);
        art.section("wigner_totals").insert(name.clone(), total.into());
    }
    Ok(())
}

/// Velocity-width ratio against position-width ratio for every lens and
/// mode, with the optimal focal time of each curve.
fn fig2(cfg: &FigureConfig, art: &mut Artifacts) -> Result<(), CliError> {
    let sweep = cfg.sweep()?;
    let times = sweep.times()?;
    let opts = cfg.optimizer.options();
    art.param("times", floats(&times));
    let max_kicks = cfg.lenses.iter().map(Vec::len).max().unwrap_or(0);
    let mut focal_cols = vec!["n".to_string(), "mode".into(), "t_f".into(), "dx_ratio".into(), "dv_ratio".into()];
    focal_cols.extend((1..=max_kicks).map(|i| format!("kappa_{i}")));
    let mut focal = Csv::new(&focal_cols);

    for &m in &sweep.modes {
        let mode = SweepMode::from(m);
        if mode == SweepMode::Harmonic {
            let curve = sweep_expansion(&[], &times, mode, &opts)?;
            art.add("fig2_harmonic.csv", sweep_csv(&curve.points, 1));
            continue;
        }
        for i in 0..cfg.lenses.len() {
            let widths = cfg.widths(i);
            let n = widths.len();
            let curve = if sweep.focal_time {
                let f = find_focal_time(&widths, &times, mode, &opts)?;
                focal.row(focal_row(n, mode, &f.point, max_kicks));
                art.section("focal_times").insert(format!("n{n}_{}", mode.name()), f.t_f.into());
                f.coarse
            } else {
                sweep_expansion(&widths, &times, mode, &opts)?
            };
            art.add(format!("fig2_n{n}_{}.csv", mode.name()), sweep_csv(&curve.points, n));
            if !curve.failures.is_empty() {
                art.section("sweep_failures").insert(format!("n{n}_{}", mode.name()), failures_value(&curve));
            }
        }
    }
    if sweep.focal_time {
        art.add("fig2_focal_times.csv", focal.finish());
    }
    Ok(())
}

fn focal_row(n: usize, mode: SweepMode, p: &SweepPoint, width: usize) -> Vec<String> {
    let mut row = vec![n.to_string(), mode.name().into(), cell(p.t_f), cell(p.dx_ratio), cell(p.dv_ratio)];
    row.extend(p.strengths.iter().map(|&k| cell(k)));
    row.resize(5 + width, String::new());
    row
}

/// Momentum distributions after a harmonic kick and each lens: (a) all at
/// t_1, (b) each lens at its own focal time and the harmonic kick at the
/// last one.
fn fig4(cfg: &FigureConfig, art: &mut Artifacts) -> Result<(), CliError> {
    let sweep = cfg.sweep()?;
    let opts = cfg.optimizer.options();
    let focal: Vec<f64> = (0..cfg.lenses.len())
        .map(|i| optimized_focal_time(&cfg.widths(i), sweep, &opts).map(|p| p.t_f))
        .collect::<Result<_, _>>()?;
    art.param("focal_times", floats(&focal));
    let t_first = focal[0];
    let t_last = *focal.last().expect("at least one lens");

    let mut summary = Csv::new(&["variant", "case", "t_f", "dp", "dv_ratio", "momentum_excess_kurtosis"]);
    let (_, dp_i) = initial_widths(&PhysicalScale::natural());
    for (variant, times, t_harm) in [("a", vec![t_first; focal.len()], t_first), ("b", focal.clone(), t_last)] {
        let mut cases: Vec<(String, f64, KickSpec, Option<kicklens::engine::SpatialGrid>)> = Vec::new();
        let ideal = harmonic_kick_strength(t_harm, &PhysicalScale::natural())?;
        cases.push(("harmonic".into(), t_harm, KickSpec::Harmonic(ideal), None));
        for (i, &t) in times.iter().enumerate() {
            let lens = cfg.resolve(i, t)?;
            let name = lens_name(cfg.lenses[i].len());
            art.section(&format!("variant_{variant}"))
                .insert(name.clone(), lens_entry(&cfg.lenses[i], t, &lens.strengths()));
            cases.push((name, t, lens.kick, lens.grid));
        }
        for (name, t, kick, grid) in cases {
            let run = run_protocol(&ExpansionProtocol::new(t, kick)?, &PhysicalScale::natural(), grid)?;
            art.add(format!("fig4{variant}_{name}.csv"), momentum_csv(&run.kicked, cfg.momentum.p_range));
            let s = summarize(&run.kicked);
            let kurt = momentum_distribution(&run.kicked).excess_kurtosis();
            summary.row(vec![variant.into(), name, cell(t), cell(s.dp), cell(s.dp / dp_i), cell(kurt)]);
        }
    }
    art.add("fig4_summary.csv", summary.finish());
    Ok(())
}

/// Doublet sensitivity to the two strengths around the classical design at
/// the doublet's optimal focal time.
fn fig5(cfg: &FigureConfig, art: &mut Artifacts) -> Result<(), CliError> {
    if cfg.lenses.len() != 1 || cfg.lenses[0].len() != 2 {
        return Err(CliError::Config("fig5 needs exactly one lens with two widths".into()));
    }
    let widths = cfg.widths(0);
    let opts = cfg.optimizer.options();
    let t_f = match cfg.expansion_time {
        Some(t) => t,
        None => optimized_focal_time(&widths, cfg.sweep()?, &opts)?.t_f,
    };
    let r = doublet_sensitivity(&widths, t_f, &cfg.sensitivity.grid()?, &opts)?;
    art.param("expansion_time", r.t_f);
    art.param("classical_strengths", floats(&r.classical));
    art.param("optimized_strengths", floats(&r.optimized));
    art.add("fig5_map.csv", r.map_csv);
    art.add("fig5_points.csv", r.points_csv);
    Ok(())
}
