use std::f64::consts::FRAC_1_SQRT_2;

use kicklens::engine::{
    apply_gaussian_kicks, apply_harmonic_kick, auto_grid, make_ground_state, propagate_free, run_protocol,
    SpatialGrid, WaveState,
};
use kicklens::observables::summarize;
use kicklens::{ExpansionProtocol, GaussianKick, HarmonicKick, KickSequence, PhysicalScale};
use proptest::prelude::*;

fn ground(n: usize, l: f64) -> WaveState {
    make_ground_state(SpatialGrid::new(n, l).unwrap(), &PhysicalScale::natural()).unwrap()
}

fn max_diff(a: &WaveState, b: &WaveState) -> f64 {
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

#[test]
fn free_width_follows_analytic_law_on_the_whole_grid() {
    let g = ground(8192, 80.0);
    for t in [0.25, 1.0, 3.0, 7.5, 12.0, 18.0] {
        let s = summarize(&propagate_free(&g, t).unwrap());
        let expect = FRAC_1_SQRT_2 * (1.0 + t * t).sqrt();
        assert!((s.dx / expect - 1.0).abs() < 1e-6, "t = {t}: {}", s.dx);
        assert!((s.dp - FRAC_1_SQRT_2).abs() < 1e-10);
    }
}

#[test]
fn harmonic_kick_is_exact_for_listed_times() {
    let scale = PhysicalScale::natural();
    for t in [0.5, 1.5, 5.0, 20.0] {
        let omega = kicklens::design::harmonic_kick_strength(t, &scale).unwrap();
        let p = ExpansionProtocol::harmonic(t, omega.strength).unwrap();
        let run = run_protocol(&p, &scale, None).unwrap();
        let s = summarize(&run.kicked);
        let b = (1.0 + t * t).sqrt();
        assert!((s.dp * b / FRAC_1_SQRT_2 - 1.0).abs() < 1e-6, "t = {t}");
        assert!((s.uncertainty_product - 0.5).abs() < 1e-6, "t = {t}");
    }
}

#[test]
fn auto_grid_keeps_long_doublet_protocol_safe() {
    let s = |v: f64| v / 2f64.sqrt();
    let design = kicklens::design::classical_n_kick(&[s(15.0), s(13.0), s(14.0)], 1.0 / 30.0).unwrap();
    let p = ExpansionProtocol::gaussian(30.0, design.sequence().unwrap()).unwrap();
    let grid = auto_grid(&p, &PhysicalScale::natural()).unwrap();
    // ground-state tail and free-expansion criterion both hold
    assert!((-grid.half_extent().powi(2)).exp() < 1e-12);
    let dx_t = FRAC_1_SQRT_2 * (1.0f64 + 900.0).sqrt();
    assert!(6.0 * dx_t <= grid.half_extent());
    assert!(grid.resolves(&p));
    let run = run_protocol(&p, &PhysicalScale::natural(), Some(grid)).unwrap();
    assert!((run.kicked.norm() - 1.0).abs() < 1e-10);
}

#[test]
fn harmonic_kick_amplitude_check() {
    let g = ground(1024, 12.0);
    let k = apply_harmonic_kick(&g, HarmonicKick { strength: 0.3 });
    for (a, b) in g.amplitudes().iter().zip(k.amplitudes()) {
        assert!((a.norm() - b.norm()).abs() < 1e-15);
    }
}

fn kick_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
    proptest::collection::vec((-200.0f64..200.0, 1.0f64..8.0), 1..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn free_flight_composes(t1 in 0.0f64..2.0, t2 in 0.0f64..2.0) {
        let g = ground(2048, 30.0);
        let split = propagate_free(&propagate_free(&g, t1).unwrap(), t2).unwrap();
        let joint = propagate_free(&g, t1 + t2).unwrap();
        prop_assert!(max_diff(&split, &joint) < 1e-12);
    }

    #[test]
    fn protocols_are_unitary(t in 0.0f64..3.0, kicks in kick_strategy()) {
        let g = ground(4096, 30.0);
        let seq = KickSequence::new(kicks.iter().map(|&(k, s)| GaussianKick::new(k, s).unwrap()).collect());
        let e = propagate_free(&g, t).unwrap();
        let k = apply_gaussian_kicks(&e, &seq);
        let after = propagate_free(&k, 0.0).unwrap();
        for s in [&e, &k, &after] {
            prop_assert!((s.norm() - 1.0).abs() < 1e-10);
        }
        // pure phase: same position width
        prop_assert!((summarize(&e).dx - summarize(&k).dx).abs() < 1e-12);
    }

    #[test]
    fn kick_order_is_irrelevant(kicks in kick_strategy(), rot in 0usize..4) {
        let g = propagate_free(&ground(2048, 30.0), 1.2).unwrap();
        let seq = KickSequence::new(kicks.iter().map(|&(k, s)| GaussianKick::new(k, s).unwrap()).collect());
        let mut rotated = seq.kicks.clone();
        let r = rot % rotated.len();
        rotated.rotate_left(r);
        let a = apply_gaussian_kicks(&g, &seq);
        let b = apply_gaussian_kicks(&g, &seq.reversed());
        let c = apply_gaussian_kicks(&g, &KickSequence::new(rotated));
        prop_assert!(max_diff(&a, &b) < 1e-13);
        prop_assert!(max_diff(&a, &c) < 1e-13);
    }

    #[test]
    fn free_flight_keeps_momentum_width(t in 0.0f64..3.0, k in -10.0f64..10.0) {
        let g = ground(8192, 60.0);
        let seq = KickSequence::new(vec![GaussianKick::new(k, 3.0).unwrap()]);
        let s = apply_gaussian_kicks(&propagate_free(&g, 0.5).unwrap(), &seq);
        let before = summarize(&s).dp;
        let after = summarize(&propagate_free(&s, t).unwrap()).dp;
        prop_assert!((before - after).abs() < 1e-10);
    }
}
