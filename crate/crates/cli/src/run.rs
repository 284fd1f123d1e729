//! Scenario commands. Each builds its artifacts in memory and returns them.

use std::collections::BTreeSet;

use kicklens::design::{classical_doublet, design_kicks, harmonic_kick_strength, Drive};
use kicklens::engine::{auto_grid, run_protocol, ProtocolRun, SpatialGrid};
use kicklens::observables::{cooling_ratio, momentum_distribution, summarize, wigner};
use kicklens::optimize::{
    find_focal_time, optimize_harmonic, optimize_with, sensitivity_map, sweep_expansion, LensKind, LensObjective,
    OptimizationReport, OptimizerOptions, SweepCurve, SweepMode, SweepPoint,
};
use kicklens::scale::{initial_widths, natural_to_si_temperature};
use kicklens::{ExpansionProtocol, KickSequence, KickSpec, PhysicalScale};
use toml::{Table, Value};

use crate::config::{DesignMode, LensChoice, Output, Scenario, SweepConfig, WignerConfig};
use crate::error::CliError;
use crate::output::{cell, floats, Artifacts, Csv};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Design,
    Simulate,
    Sweep,
    Sensitivity,
    Wigner,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Design => "design",
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::Sensitivity => "sensitivity",
            Command::Wigner => "wigner",
        }
    }
}

/// A lens with resolved strengths, plus the grid its strengths were tuned on.
pub struct ResolvedLens {
    pub kick: KickSpec,
    pub grid: Option<SpatialGrid>,
    pub report: Option<OptimizationReport>,
    pub drive: Option<f64>,
}

impl ResolvedLens {
    pub fn strengths(&self) -> Vec<f64> {
        match &self.kick {
            KickSpec::Harmonic(h) => vec![h.strength],
            KickSpec::Gaussian(seq) => seq.strengths(),
        }
    }
}

/// Strengths for `widths` (natural units) at `t_f` under `mode`. Optimized
/// lenses keep the grid their search ran on.
pub fn resolve_gaussian(
    widths: &[f64],
    explicit: Option<&[f64]>,
    t_f: f64,
    mode: DesignMode,
    options: &OptimizerOptions,
) -> Result<ResolvedLens, CliError> {
    let scale = PhysicalScale::natural();
    let resolved = match mode {
        DesignMode::Explicit => {
            let strengths = explicit.ok_or_else(|| CliError::Config("explicit mode needs strengths".into()))?;
            ResolvedLens {
                kick: KickSpec::Gaussian(KickSequence::from_parts(strengths, widths)?),
                grid: None,
                report: None,
                drive: None,
            }
        }
        DesignMode::Classical | DesignMode::Generalized => {
            let drive = if mode == DesignMode::Generalized { Drive::Generalized } else { Drive::Classical };
            let d = design_kicks(widths, t_f, drive, &scale)?;
            ResolvedLens { kick: KickSpec::Gaussian(d.sequence()?), grid: None, report: None, drive: Some(d.rhs_value) }
        }
        DesignMode::Optimized => {
            let seed = design_kicks(widths, t_f, Drive::Classical, &scale)?;
            let report = optimize_with(widths, t_f, &seed, options.budget(widths.len()), options.multi_start)?;
            let grid = auto_grid(&ExpansionProtocol::gaussian(t_f, seed.sequence()?)?, &scale)?;
            ResolvedLens {
                kick: KickSpec::Gaussian(KickSequence::from_parts(&report.best_strengths, widths)?),
                grid: Some(grid),
                report: Some(report),
                drive: Some(seed.rhs_value),
            }
        }
    };
    Ok(resolved)
}

fn resolve_harmonic(
    explicit: Option<f64>,
    t_f: f64,
    mode: DesignMode,
    options: &OptimizerOptions,
) -> Result<ResolvedLens, CliError> {
    let ideal = harmonic_kick_strength(t_f, &PhysicalScale::natural())?;
    let (strength, report) = match mode {
        DesignMode::Explicit => (explicit.expect("checked with the lens"), None),
        DesignMode::Classical | DesignMode::Generalized => (ideal.strength, None),
        DesignMode::Optimized => {
            let r = optimize_harmonic(t_f, ideal.strength, options.budget(1))?;
            (r.best_strengths[0], Some(r))
        }
    };
    let kick = KickSpec::Harmonic(kicklens::HarmonicKick { strength });
    let grid = match report {
        Some(_) => Some(auto_grid(&ExpansionProtocol::harmonic(t_f, ideal.strength)?, &PhysicalScale::natural())?),
        None => None,
    };
    Ok(ResolvedLens { kick, grid, report, drive: None })
}

fn resolve_lens(s: &Scenario, t_f: f64) -> Result<ResolvedLens, CliError> {
    let options = s.optimizer.options();
    match s.protocol.lens {
        LensChoice::Harmonic => resolve_harmonic(s.protocol.harmonic_strength, t_f, s.design_mode, &options),
        LensChoice::Gaussian => {
            let explicit: Option<Vec<f64>> = s.protocol.kicks.iter().map(|k| k.strength).collect();
            resolve_gaussian(&s.widths(), explicit.as_deref(), t_f, s.design_mode, &options)
        }
    }
}

/// Runs `command` on the scenario and returns every artifact it produces.
pub fn run_scenario(command: Command, s: &Scenario) -> Result<Artifacts, CliError> {
    s.check_lens()?;
    let mut wanted: BTreeSet<Output> = s.outputs.iter().copied().collect();
    match command {
        Command::Design => wanted.clear(),
        Command::Simulate if wanted.is_empty() => {
            wanted.insert(Output::Summary);
        }
        Command::Simulate => {}
        Command::Sweep => {
            wanted.insert(Output::Sweep);
        }
        Command::Sensitivity => {
            wanted.insert(Output::Sensitivity);
        }
        Command::Wigner => {
            wanted.insert(Output::Wigner);
        }
    }

    let mut art = Artifacts::default();
    art.param("design_mode", s.design_mode.name());
    art.param("lens", match s.protocol.lens {
        LensChoice::Gaussian => "gaussian",
        LensChoice::Harmonic => "harmonic",
    });
    if s.protocol.lens == LensChoice::Gaussian {
        art.param("widths", floats(&s.widths()));
        art.param("widths_dxi", floats(&s.protocol.kicks.iter().map(|k| k.width).collect::<Vec<_>>()));
    }
    if let Some(si) = s.scale.si() {
        let sec = art.section("scale");
        sec.insert("mass_kg".into(), si.mass.into());
        sec.insert("omega0_rad_s".into(), si.omega0.into());
    }

    let simulate = wanted.contains(&Output::Summary)
        || wanted.contains(&Output::MomentumDistribution)
        || wanted.contains(&Output::Wigner);
    if command == Command::Design || simulate {
        let t_f = s.expansion_time()?;
        let lens = resolve_lens(s, t_f)?;
        record_lens(&mut art, t_f, &lens);
        art.add("design.csv", design_csv(s, &lens));
        if simulate {
            simulate_outputs(&mut art, s, t_f, &lens, &wanted)?;
        }
    }
    if wanted.contains(&Output::Sweep) {
        sweep_outputs(&mut art, s)?;
    }
    if wanted.contains(&Output::Sensitivity) {
        sensitivity_outputs(&mut art, s)?;
    }
    Ok(art)
}

fn record_lens(art: &mut Artifacts, t_f: f64, lens: &ResolvedLens) {
    art.param("expansion_time", t_f);
    art.param("strengths", floats(&lens.strengths()));
    if let Some(d) = lens.drive {
        art.param("drive", d);
    }
    if let Some(r) = &lens.report {
        let sec = art.section("optimizer");
        sec.insert("initial_guess".into(), floats(&r.initial_guess));
        sec.insert("initial_dp".into(), r.initial_dp.into());
        sec.insert("best_dp".into(), r.best_dp.into());
        sec.insert("objective_evaluations".into(), (r.objective_evaluations as i64).into());
        sec.insert("converged".into(), r.converged.into());
    }
}

fn design_csv(s: &Scenario, lens: &ResolvedLens) -> String {
    let mut c = Csv::new(&["kick", "width_dxi", "width", "strength"]);
    match &lens.kick {
        KickSpec::Harmonic(h) => c.row(vec!["harmonic".into(), String::new(), String::new(), cell(h.strength)]),
        KickSpec::Gaussian(seq) => {
            for (i, (k, cfg)) in seq.kicks.iter().zip(&s.protocol.kicks).enumerate() {
                c.row(vec![(i + 1).to_string(), cell(cfg.width), cell(k.width), cell(k.strength)]);
            }
        }
    }
    c.finish()
}

pub fn summary_csv(run: &ProtocolRun, t_f: f64, scale: &PhysicalScale) -> Result<(String, Table), CliError> {
    let (a, e, f) = (summarize(&run.initial), summarize(&run.expanded), summarize(&run.kicked));
    let mut rows: Vec<(&str, f64)> = vec![
        ("t_f", t_f),
        ("dx_initial", a.dx),
        ("dp_initial", a.dp),
        ("dx_kick", e.dx),
        ("dp_kick", e.dp),
        ("dx_final", f.dx),
        ("dp_final", f.dp),
        ("dv_final", f.dv),
        ("dx_ratio", e.dx / a.dx),
        ("dv_ratio", f.dv / a.dv),
        ("cooling_ratio", cooling_ratio(&a, &f)?),
        ("uncertainty_final", f.uncertainty_product),
        ("temperature_final", f.temperature_natural),
        ("mean_p_final", f.mean_p),
        ("momentum_excess_kurtosis", f.momentum_excess_kurtosis),
    ];
    if scale.si().is_some() {
        rows.push(("temperature_final_kelvin", natural_to_si_temperature(f.dv, scale)?));
    }
    let mut c = Csv::new(&["quantity", "value"]);
    let mut table = Table::new();
    for (k, v) in rows {
        c.row(vec![k.into(), cell(v)]);
        table.insert(k.into(), v.into());
    }
    Ok((c.finish(), table))
}

pub fn momentum_csv(summary_of: &kicklens::engine::WaveState, p_range: f64) -> String {
    let (_, dp_i) = initial_widths(&PhysicalScale::natural());
    let d = momentum_distribution(summary_of);
    let mut c = Csv::new(&["p", "density"]);
    for (&p, &rho) in d.momenta.iter().zip(&d.density) {
        if p.abs() <= p_range * dp_i {
            c.floats(&[p, rho]);
        }
    }
    c.finish()
}

/// Wigner map of `state`, cropped to ±x_range·`dx_kick` × ±p_range·Δp_i.
/// Returns the CSV and the total of the uncropped map.
pub fn wigner_csv(
    state: &kicklens::engine::WaveState,
    dx_kick: f64,
    cfg: &WignerConfig,
) -> Result<(String, f64), CliError> {
    let (_, dp_i) = initial_widths(&PhysicalScale::natural());
    let map = wigner(state, cfg.downsample)?;
    let total = map.total();
    let crop = map.crop(cfg.x_range * dx_kick, cfg.p_range * dp_i);
    let mut buf = Vec::new();
    kicklens::observables::export::write_wigner(&mut buf, &crop).expect("writing to memory");
    Ok((String::from_utf8(buf).expect("ascii"), total))
}

/// Runs `protocol` on `grid` (or the automatic grid) refined by `refine`.
pub fn refined_run(protocol: &ExpansionProtocol, grid: Option<SpatialGrid>, refine: usize) -> Result<ProtocolRun, CliError> {
    let scale = PhysicalScale::natural();
    if refine < 1 || !refine.is_power_of_two() {
        return Err(CliError::Config(format!("wigner.refine must be a power of two, got {refine}")));
    }
    let base = match grid {
        Some(g) => g,
        None => auto_grid(protocol, &scale)?,
    };
    Ok(run_protocol(protocol, &scale, Some(base.refined(refine)?))?)
}

fn simulate_outputs(
    art: &mut Artifacts,
    s: &Scenario,
    t_f: f64,
    lens: &ResolvedLens,
    wanted: &BTreeSet<Output>,
) -> Result<(), CliError> {
    let protocol = ExpansionProtocol::new(t_f, lens.kick.clone())?;
    let run = run_protocol(&protocol, &PhysicalScale::natural(), lens.grid)?;
    let grid = run.kicked.grid();
    let sec = art.section("grid");
    sec.insert("num_points".into(), (grid.num_points() as i64).into());
    sec.insert("half_extent".into(), grid.half_extent().into());
    let (text, table) = summary_csv(&run, t_f, &s.scale)?;
    art.params.insert("summary".into(), Value::Table(table));
    if wanted.contains(&Output::Summary) {
        art.add("summary.csv", text);
    }
    if wanted.contains(&Output::MomentumDistribution) {
        art.add("momentum_distribution.csv", momentum_csv(&run.kicked, s.momentum.p_range));
    }
    if wanted.contains(&Output::Wigner) {
        let fine = refined_run(&protocol, lens.grid, s.wigner.refine)?;
        let dx_kick = summarize(&fine.expanded).dx;
        let (text, total) = wigner_csv(&fine.kicked, dx_kick, &s.wigner)?;
        art.add("wigner.csv", text);
        let sec = art.section("wigner");
        sec.insert("total".into(), total.into());
        sec.insert("num_points".into(), (fine.kicked.grid().num_points() as i64).into());
    }
    Ok(())
}

/// Columns `t_f,dx_ratio,dv_ratio,kappa_1..kappa_n`.
pub fn sweep_csv(points: &[SweepPoint], kicks: usize) -> String {
    let mut cols = vec!["t_f".to_string(), "dx_ratio".into(), "dv_ratio".into()];
    cols.extend((1..=kicks).map(|i| format!("kappa_{i}")));
    let mut c = Csv::new(&cols);
    for p in points {
        let mut row = vec![p.t_f, p.dx_ratio, p.dv_ratio];
        row.extend(&p.strengths);
        c.floats(&row);
    }
    c.finish()
}

pub fn failures_value(curve: &SweepCurve) -> Value {
    Value::Array(
        curve
            .failures
            .iter()
            .map(|f| {
                let mut t = Table::new();
                t.insert("t_f".into(), f.t_f.into());
                t.insert("error".into(), f.error.clone().into());
                Value::Table(t)
            })
            .collect(),
    )
}

fn sweep_section(s: &Scenario) -> Result<&SweepConfig, CliError> {
    s.sweep.as_ref().ok_or_else(|| CliError::Config("this run needs a [sweep] section".into()))
}

fn sweep_outputs(art: &mut Artifacts, s: &Scenario) -> Result<(), CliError> {
    let cfg = sweep_section(s)?;
    let times = cfg.times()?;
    let widths = s.widths();
    let opts = s.optimizer.options();
    art.section("sweep").insert("times".into(), floats(&times));
    let mut focal_rows = Vec::new();
    for &m in &cfg.modes {
        let mode = SweepMode::from(m);
        if mode != SweepMode::Harmonic && widths.is_empty() {
            return Err(CliError::Config(format!("{} sweep needs [[protocol.kicks]] widths", mode.name())));
        }
        let curve = if cfg.focal_time && mode != SweepMode::Harmonic {
            let f = find_focal_time(&widths, &times, mode, &opts)?;
            focal_rows.push((mode, f.point.clone()));
            f.coarse
        } else {
            sweep_expansion(&widths, &times, mode, &opts)?
        };
        let kicks = if mode == SweepMode::Harmonic { 1 } else { widths.len() };
        art.add(format!("sweep_{}.csv", mode.name()), sweep_csv(&curve.points, kicks));
        if !curve.failures.is_empty() {
            art.section("sweep_failures").insert(mode.name().into(), failures_value(&curve));
        }
    }
    if !focal_rows.is_empty() {
        let mut cols = vec!["mode".to_string(), "t_f".into(), "dx_ratio".into(), "dv_ratio".into()];
        cols.extend((1..=widths.len()).map(|i| format!("kappa_{i}")));
        let mut c = Csv::new(&cols);
        for (mode, p) in &focal_rows {
            let mut row = vec![mode.name().to_string(), cell(p.t_f), cell(p.dx_ratio), cell(p.dv_ratio)];
            row.extend(p.strengths.iter().map(|&k| cell(k)));
            c.row(row);
            art.section("focal_times").insert(mode.name().into(), p.t_f.into());
        }
        art.add("focal_times.csv", c.finish());
    }
    Ok(())
}

/// Doublet sensitivity map plus the classical and optimized points.
pub struct SensitivityResult {
    pub map_csv: String,
    pub points_csv: String,
    pub t_f: f64,
    pub classical: [f64; 2],
    pub optimized: Vec<f64>,
}

pub fn doublet_sensitivity(
    widths: &[f64],
    t_f: f64,
    grid: &kicklens::optimize::ScaleGrid,
    opts: &OptimizerOptions,
) -> Result<SensitivityResult, CliError> {
    if widths.len() != 2 {
        return Err(CliError::Config(format!("sensitivity needs exactly two kicks, got {}", widths.len())));
    }
    let map = sensitivity_map(widths[0], widths[1], t_f, grid)?;
    let mut c = Csv::new(&["scale1", "scale2", "dp_ratio"]);
    for (i, &a) in map.scales.scale1.iter().enumerate() {
        for (j, &b) in map.scales.scale2.iter().enumerate() {
            c.floats(&[a, b, map.values[[i, j]]]);
        }
    }
    let seed = classical_doublet(widths[0], widths[1], t_f)?;
    let report = optimize_with(widths, t_f, &seed, opts.budget(2), opts.multi_start)?;
    let scale = PhysicalScale::natural();
    let objective = LensObjective::new(LensKind::Gaussian(widths.to_vec()), t_f, map.grid, &scale)?;
    let (_, dp_i) = initial_widths(&scale);
    let [k1, k2] = map.classical_strengths;
    let mut pts = Csv::new(&["point", "scale1", "scale2", "kappa_1", "kappa_2", "dp_ratio"]);
    for (label, k) in [("classical", vec![k1, k2]), ("optimized", report.best_strengths.clone())] {
        let ratio = dp_i / objective.final_dp(&k)?;
        pts.row(vec![label.into(), cell(k[0] / k1), cell(k[1] / k2), cell(k[0]), cell(k[1]), cell(ratio)]);
    }
    Ok(SensitivityResult {
        map_csv: c.finish(),
        points_csv: pts.finish(),
        t_f,
        classical: [k1, k2],
        optimized: report.best_strengths,
    })
}

/// Optimized focal time for `widths` over the sweep times.
pub fn optimized_focal_time(widths: &[f64], cfg: &SweepConfig, opts: &OptimizerOptions) -> Result<SweepPoint, CliError> {
    Ok(find_focal_time(widths, &cfg.times()?, SweepMode::Optimized, opts)?.point)
}

fn sensitivity_outputs(art: &mut Artifacts, s: &Scenario) -> Result<(), CliError> {
    let cfg = s.sensitivity.clone().unwrap_or_default();
    let opts = s.optimizer.options();
    let widths = s.widths();
    if widths.len() != 2 {
        return Err(CliError::Config(format!("sensitivity needs exactly two kicks, got {}", widths.len())));
    }
    let t_f = if cfg.at_focal_time {
        optimized_focal_time(&widths, sweep_section(s)?, &opts)?.t_f
    } else {
        s.expansion_time()?
    };
    let r = doublet_sensitivity(&widths, t_f, &cfg.grid()?, &opts)?;
    art.add("sensitivity.csv", r.map_csv);
    art.add("sensitivity_points.csv", r.points_csv);
    let sec = art.section("sensitivity");
    sec.insert("expansion_time".into(), r.t_f.into());
    sec.insert("classical_strengths".into(), floats(&r.classical));
    sec.insert("optimized_strengths".into(), floats(&r.optimized));
    Ok(())
}
