//! Acceptance suite. Runs every criterion, prints one line each and exits
//! non-zero if any fails.

use std::f64::consts::SQRT_2;
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::Instant;

use kicklens::design::{
    cancellation_residuals, classical_doublet, classical_n_kick, ermakov_integrate, DEFAULT_STEPS,
};
use kicklens::engine::{
    apply_gaussian_kicks, make_ground_state, propagate_free, run_protocol, SpatialGrid, WaveState,
};
use kicklens::observables::{cooling_ratio, momentum_distribution, summarize, wigner};
use kicklens::optimize::{
    find_focal_time, optimize_strengths, sensitivity_map, sweep_expansion, FocalTime, LensKind, LensObjective,
    OptimizerOptions, ScaleGrid, SweepMode,
};
use kicklens::{ExpansionProtocol, GaussianKick, KickSequence, PhysicalScale};
use rand::{rngs::StdRng, Rng, SeedableRng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn widths(units: &[f64]) -> Vec<f64> {
    units.iter().map(|w| w / SQRT_2).collect()
}

fn fig2_widths() -> [Vec<f64>; 3] {
    [widths(&[15.0]), widths(&[15.0, 14.0]), widths(&[15.0, 13.0, 14.0])]
}

fn coarse_times() -> Vec<f64> {
    (2..=32).map(|i| i as f64 * 0.5).collect()
}

/// Optimized focal times for one, two and three kicks, shared by several criteria.
fn focal_times() -> &'static [FocalTime; 3] {
    static CELL: OnceLock<[FocalTime; 3]> = OnceLock::new();
    CELL.get_or_init(|| {
        let opts = OptimizerOptions::default();
        let t = coarse_times();
        fig2_widths().map(|w| find_focal_time(&w, &t, SweepMode::Optimized, &opts).expect("focal-time search"))
    })
}

fn ground(n: usize, l: f64) -> WaveState {
    make_ground_state(SpatialGrid::new(n, l).unwrap(), &PhysicalScale::natural()).unwrap()
}

fn harmonic_exactness() -> Outcome {
    let scale = PhysicalScale::natural();
    let mut worst = (0.0f64, 0.0f64);
    for t in [0.5, 1.5, 5.0, 20.0] {
        let k = kicklens::design::harmonic_kick_strength(t, &scale).unwrap();
        let run = run_protocol(&ExpansionProtocol::harmonic(t, k.strength).unwrap(), &scale, None).unwrap();
        let (a, e, f) = (summarize(&run.initial), summarize(&run.expanded), summarize(&run.kicked));
        let ratio = f.dv / a.dv;
        let expect = a.dx / e.dx;
        worst.0 = worst.0.max((ratio / expect - 1.0).abs());
        worst.1 = worst.1.max((f.uncertainty_product - 0.5).abs());
        let cr = cooling_ratio(&a, &f).unwrap();
        worst.0 = worst.0.max((cr / (expect * expect) - 1.0).abs());
    }
    outcome(
        worst.0 < 1e-3 && worst.1 < 1e-4,
        format!("max rel dev {:.2e}, max |dx dp - 1/2| {:.2e}", worst.0, worst.1),
    )
}

fn doublet_closed_form() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let s1: f64 = rng.random_range(1.0..30.0);
        let s2 = s1 * rng.random_range(0.2..0.98);
        let t: f64 = rng.random_range(0.05..60.0);
        let a = classical_n_kick(&[s1, s2], 1.0 / t).unwrap();
        let b = classical_doublet(s1, s2, t).unwrap();
        for (x, y) in a.strengths.iter().zip(&b.strengths) {
            worst = worst.max(((x - y) / y).abs());
        }
    }
    outcome(worst < 1e-12, format!("max rel dev {worst:.2e} over 100 inputs"))
}

fn taylor_cancellation() -> Outcome {
    let mut worst = 0.0f64;
    for w in fig2_widths() {
        for t in [1.5, 7.0, 30.0] {
            let d = classical_n_kick(&w, 1.0 / t).unwrap();
            for r in cancellation_residuals(&d.sequence().unwrap(), d.rhs_value) {
                worst = worst.max(r);
            }
        }
    }
    outcome(worst < 1e-9, format!("max rel residual {worst:.2e}"))
}

fn headline_ratios() -> Vec<(String, Outcome)> {
    let [one, two, three] = focal_times();
    let r2 = (one.point.dv_ratio / two.point.dv_ratio).powi(2);
    let r3 = (one.point.dv_ratio / three.point.dv_ratio).powi(2);
    let within = |r: f64, target: f64| (r / target - 1.0).abs() <= 0.2;
    vec![
        (
            "4a two-kick temperature gain 2.5x +-20%".into(),
            outcome(within(r2, 2.5), format!("(dv1/dv2)^2 = {r2:.3} at t1 = {:.3}, t2 = {:.3}", one.t_f, two.t_f)),
        ),
        (
            "4b three-kick temperature gain 3.2x +-20%".into(),
            outcome(within(r3, 3.2), format!("(dv1/dv3)^2 = {r3:.3} at t1 = {:.3}, t3 = {:.3}", one.t_f, three.t_f)),
        ),
    ]
}

fn single_lens_plateau() -> Outcome {
    let t: Vec<f64> = (1..=40).map(|i| i as f64).chain([50.0, 60.0, 80.0]).collect();
    let curve = sweep_expansion(&widths(&[15.0]), &t, SweepMode::Optimized, &OptimizerOptions::default()).unwrap();
    if !curve.failures.is_empty() {
        return outcome(false, format!("{} sweep points failed", curve.failures.len()));
    }
    let pts = &curve.points;
    let (imin, min) = pts
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.dv_ratio.total_cmp(&b.1.dv_ratio))
        .unwrap();
    let interior = imin > 0 && imin + 1 < pts.len();
    let decreases = pts[imin..].windows(2).filter(|w| w[1].dv_ratio < w[0].dv_ratio).count();
    let last = pts.last().unwrap();
    outcome(
        interior && decreases == 0,
        format!(
            "min dv ratio {:.4} at t = {} (dx ratio {:.2}), tail to {:.4} at t = {}, {decreases} tail decreases",
            min.dv_ratio, min.t_f, min.dx_ratio, last.dv_ratio, last.t_f
        ),
    )
}

fn focal_ordering() -> Outcome {
    let [a, b, c] = focal_times();
    outcome(a.t_f < b.t_f && b.t_f < c.t_f, format!("t1 = {:.3}, t2 = {:.3}, t3 = {:.3}", a.t_f, b.t_f, c.t_f))
}

fn sensitivity_ridge() -> Outcome {
    let t2 = focal_times()[1].t_f;
    let (s1, s2) = (15.0 / SQRT_2, 14.0 / SQRT_2);
    let map = sensitivity_map(s1, s2, t2, &ScaleGrid::default()).unwrap();
    let idx = |v: f64| map.scales.scale1.iter().position(|s| (s - v).abs() < 1e-9).unwrap();
    let (i105, i100) = (idx(1.05), idx(1.0));
    let common = map.values[[i105, i105]];
    let single = map.values[[i105, i100]];
    let classical = map.values[[i100, i100]];

    let seed = classical_doublet(s1, s2, t2).unwrap();
    let report = optimize_strengths(&[s1, s2], t2, &seed, 2000).unwrap();
    let objective =
        LensObjective::new(LensKind::Gaussian(vec![s1, s2]), t2, map.grid, &PhysicalScale::natural()).unwrap();
    let optimized = std::f64::consts::FRAC_1_SQRT_2 / objective.final_dp(&report.best_strengths).unwrap();
    outcome(
        common > single && optimized >= classical,
        format!(
            "(1.05,1.05) {common:.4} vs (1.05,1.00) {single:.4}; optimized {optimized:.4} vs classical {classical:.4}"
        ),
    )
}

fn engine_invariants() -> Outcome {
    let mut rng = StdRng::seed_from_u64(99);
    let base = ground(4096, 40.0);
    let (mut drift, mut perm) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let n = rng.random_range(1..=4);
        let kicks: Vec<GaussianKick> = (0..n)
            .map(|_| GaussianKick::new(rng.random_range(-100.0..100.0), rng.random_range(2.0..10.0)).unwrap())
            .collect();
        let seq = KickSequence::new(kicks);
        let e = propagate_free(&base, rng.random_range(0.0..3.0)).unwrap();
        let a = apply_gaussian_kicks(&e, &seq);
        let b = apply_gaussian_kicks(&e, &seq.reversed());
        for s in [&e, &a] {
            drift = drift.max((s.norm() - 1.0).abs());
        }
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            perm = perm.max((x - y).norm());
        }
    }
    let mut width = 0.0f64;
    for t in [0.5, 2.0, 8.0] {
        let s = summarize(&propagate_free(&base, t).unwrap());
        width = width.max((s.dx / (std::f64::consts::FRAC_1_SQRT_2 * (1.0 + t * t).sqrt()) - 1.0).abs());
    }
    let s = propagate_free(&ground(512, 12.0), 0.8).unwrap();
    let w = wigner(&s, 1).unwrap();
    let norm = (w.total() - 1.0).abs();
    let dx = s.grid().spacing();
    let mx: f64 = w.position_marginal().iter().zip(s.position_density()).map(|(a, b)| (a - b).abs()).sum::<f64>() * dx;
    let d = momentum_distribution(&s);
    let n = s.grid().num_points();
    let pm = w.momentum_marginal();
    let mp: f64 = (0..n).step_by(2).map(|m| (pm[m] - d.density[m / 2 + n / 4]).abs() * d.spacing).sum();
    outcome(
        drift < 1e-10 && perm < 1e-13 && width < 1e-6 && norm < 1e-6 && mx < 1e-6 && mp < 1e-6,
        format!(
            "norm drift {drift:.1e}, permutation {perm:.1e}, width {width:.1e}, wigner norm {norm:.1e}, marginals {mx:.1e}/{mp:.1e}"
        ),
    )
}

fn ermakov_oracle() -> Outcome {
    let free = ermakov_integrate(|_| 0.0, (0.0, 20.0), DEFAULT_STEPS).unwrap();
    let (b, _) = free.evaluate(20.0).unwrap();
    let e1 = (b - 401f64.sqrt()).abs();
    let trapped = ermakov_integrate(|_| 1.0, (0.0, 20.0), DEFAULT_STEPS).unwrap();
    let e2 = (0..=200)
        .map(|i| (trapped.evaluate(i as f64 * 0.1).unwrap().0 - 1.0).abs())
        .fold(0.0, f64::max);
    outcome(e1 < 1e-8 && e2 < 1e-10, format!("|b(20) - sqrt(401)| {e1:.1e}, max |b - 1| {e2:.1e}"))
}

fn main() -> ExitCode {
    let criteria: Vec<(&str, fn() -> Vec<(String, Outcome)>)> = vec![
        ("1 harmonic exactness", || vec![(String::new(), harmonic_exactness())]),
        ("2 doublet closed form", || vec![(String::new(), doublet_closed_form())]),
        ("3 taylor cancellation", || vec![(String::new(), taylor_cancellation())]),
        ("4 headline ratios", headline_ratios),
        ("5 single-lens plateau", || vec![(String::new(), single_lens_plateau())]),
        ("6 focal-time ordering", || vec![(String::new(), focal_ordering())]),
        ("7 sensitivity ridge", || vec![(String::new(), sensitivity_ridge())]),
        ("8 engine invariants", || vec![(String::new(), engine_invariants())]),
        ("9 ermakov oracle", || vec![(String::new(), ermakov_oracle())]),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        for (label, o) in run() {
            let label = if label.is_empty() { name.to_string() } else { label };
            let verdict = if o.pass { "PASS" } else { "FAIL" };
            println!("{verdict} criterion {label}: {} [{:.1}s]", o.detail, start.elapsed().as_secs_f64());
            if !o.pass {
                failed += 1;
            }
        }
    }
    println!("acceptance: {failed} failing");
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
