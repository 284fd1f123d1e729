use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn kicklens(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kicklens")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

/// Header and rows of a CSV written by the runner.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# units: natural"));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let (header, rows) = read_csv(path);
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("{name} in {header:?}"));
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

fn summary_value(dir: &Path, key: &str) -> f64 {
    let (_, rows) = read_csv(&dir.join("summary.csv"));
    rows.iter().find(|r| r[0] == key).unwrap()[1].parse().unwrap()
}

fn manifest(dir: &Path) -> toml::Table {
    fs::read_to_string(dir.join("manifest.toml")).unwrap().parse().unwrap()
}

fn listed_files(dir: &Path) -> BTreeSet<String> {
    manifest(dir)["run"]["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect()
}

fn dir_files(dir: &Path) -> BTreeSet<String> {
    fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect()
}

const HARMONIC: &str = r#"
outputs = ["summary"]
[protocol]
expansion_time = 1.5
lens = "harmonic"
"#;

const DOUBLET: &str = r#"
design_mode = "classical"
outputs = ["summary", "momentum_distribution", "wigner"]
[protocol]
expansion_time = 4.0
[[protocol.kicks]]
width = 15.0
[[protocol.kicks]]
width = 14.0
[sweep]
times = [2.0, 4.0, 6.0]
modes = ["classical", "optimized", "harmonic"]
[optimizer]
budget_per_kick = 200
"#;

#[test]
fn harmonic_summary_matches_ideal_lens() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "h.toml", HARMONIC);
    let out = tmp.path().join("out");
    let r = kicklens(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    assert!((summary_value(&out, "dp_final") - 0.39223).abs() < 1e-5);
    assert!((summary_value(&out, "uncertainty_final") - 0.5).abs() < 1e-6);
    let m = manifest(&out);
    assert!((m["parameters"]["strengths"][0].as_float().unwrap() - 6.0 / 13.0).abs() < 1e-15);
}

#[test]
fn degenerate_doublet_fails_without_outputs() {
    let tmp = TempDir::new().unwrap();
    let text = DOUBLET.replace("width = 14.0", "width = 15.0");
    let cfg = write_config(tmp.path(), "d.toml", &text);
    let out = tmp.path().join("out");
    let r = kicklens(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(3));
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("degenerate-lens"), "{err}");
    assert!(!out.exists());
}

#[test]
fn config_errors_exit_with_code_two() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let out = out.to_str().unwrap();
    let cfg = write_config(tmp.path(), "h.toml", HARMONIC);
    for args in [
        vec!["simulate", "--config", &cfg, "--out", out, "--set", "protocol.expansion_tim=1"],
        vec!["simulate", "--config", &cfg, "--out", out, "--set", "design_mode=magic"],
        vec!["simulate", "--out", out],
        vec!["sweep", "--config", &cfg, "--out", out],
        vec!["simulate", "--config", "/nonexistent.toml", "--out", out],
    ] {
        let r = kicklens(&args);
        assert_eq!(r.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&r.stderr));
        assert!(String::from_utf8_lossy(&r.stderr).starts_with("error[config]"));
    }
    let bad = write_config(tmp.path(), "b.toml", "[protocol]\nexpansion_time = \"soon\"\n");
    let r = kicklens(&["simulate", "--config", &bad, "--out", out]);
    assert_eq!(r.status.code(), Some(2));
    // toml diagnostics carry the line
    assert!(String::from_utf8_lossy(&r.stderr).contains("line 2"), "{}", String::from_utf8_lossy(&r.stderr));
}

#[test]
fn overrides_take_precedence() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "h.toml", HARMONIC);
    let out = tmp.path().join("out");
    let r = kicklens(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap(), "--set", "protocol.expansion_time=5"]);
    assert!(r.status.success());
    let expect = std::f64::consts::FRAC_1_SQRT_2 / 26f64.sqrt();
    assert!((summary_value(&out, "dp_final") - expect).abs() < 1e-8);
}

#[test]
fn reruns_are_byte_identical_and_manifest_is_complete() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "d.toml", DOUBLET);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for (dir, threads) in [(&a, "1"), (&b, "3")] {
        let r = kicklens(&["sweep", "--config", &cfg, "--out", dir.to_str().unwrap(), "--threads", threads]);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    }
    let files = dir_files(&a);
    assert_eq!(files, listed_files(&a));
    for f in [
        "design.csv",
        "summary.csv",
        "momentum_distribution.csv",
        "wigner.csv",
        "sweep_classical.csv",
        "sweep_optimized.csv",
        "sweep_harmonic.csv",
    ] {
        assert!(files.contains(f), "{f}");
    }
    for f in &files {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let (header, rows) = read_csv(&a.join("sweep_optimized.csv"));
    assert_eq!(header, ["t_f", "dx_ratio", "dv_ratio", "kappa_1", "kappa_2"]);
    assert_eq!(rows.len(), 3);
    let m = manifest(&a);
    assert_eq!(m["run"]["version"].as_str(), Some(env!("CARGO_PKG_VERSION")));
    assert_eq!(m["parameters"]["strengths"].as_array().unwrap().len(), 2);
    assert_eq!(m["parameters"]["widths_dxi"][1].as_float(), Some(14.0));
}

#[test]
fn explicit_design_is_echoed() {
    let tmp = TempDir::new().unwrap();
    let text = DOUBLET.replace("design_mode = \"classical\"", "design_mode = \"explicit\"");
    let cfg = write_config(tmp.path(), "e.toml", &text);
    let out = tmp.path().join("out");
    let r = kicklens(&[
        "design",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--set",
        "protocol.kicks.0.strength=100.0",
        "--set",
        "protocol.kicks.1.strength=-80.0",
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    assert_eq!(column(&out.join("design.csv"), "strength"), vec![100.0, -80.0]);
    assert_eq!(dir_files(&out), listed_files(&out));
}

#[test]
fn sensitivity_verb_writes_map_and_points() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "d.toml", DOUBLET);
    let out = tmp.path().join("out");
    let r = kicklens(&[
        "sensitivity",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--set",
        "outputs=[]",
        "--set",
        "sensitivity.points=5",
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let (header, rows) = read_csv(&out.join("sensitivity.csv"));
    assert_eq!(header, ["scale1", "scale2", "dp_ratio"]);
    assert_eq!(rows.len(), 25);
    let (_, pts) = read_csv(&out.join("sensitivity_points.csv"));
    let classical: f64 = pts[0][5].parse().unwrap();
    let optimized: f64 = pts[1][5].parse().unwrap();
    assert!(optimized >= classical);
}

#[test]
fn fig1_maps_are_normalized() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("fig1");
    let r = kicklens(&["reproduce", "fig1", "--out", out.to_str().unwrap()]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    assert_eq!(dir_files(&out), listed_files(&out));
    let totals = manifest(&out)["parameters"]["wigner_totals"].as_table().unwrap().clone();
    for name in ["free", "kicks1", "kicks2", "kicks3"] {
        assert!((totals[name].as_float().unwrap() - 1.0).abs() < 1e-6, "{name}");
        let path = out.join(format!("fig1_wigner_{name}.csv"));
        let x = column(&path, "x");
        let p = column(&path, "p");
        let w = column(&path, "wigner");
        let xs: BTreeSet<u64> = x.iter().map(|v| v.to_bits()).collect();
        let ps: BTreeSet<u64> = p.iter().map(|v| v.to_bits()).collect();
        assert_eq!(w.len(), xs.len() * ps.len());
        let mut xv: Vec<f64> = xs.iter().map(|&b| f64::from_bits(b)).collect();
        let mut pv: Vec<f64> = ps.iter().map(|&b| f64::from_bits(b)).collect();
        xv.sort_by(f64::total_cmp);
        pv.sort_by(f64::total_cmp);
        let cell = (xv[1] - xv[0]) * (pv[1] - pv[0]);
        // the cropped window holds all but the far tails
        let sum: f64 = w.iter().sum::<f64>() * cell;
        assert!((sum - 1.0).abs() < 2e-3, "{name}: {sum}");
    }
}

#[test]
fn fig2_minima_improve_with_each_kick() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("fig2");
    let r = kicklens(&["reproduce", "fig2", "--out", out.to_str().unwrap()]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    assert_eq!(dir_files(&out), listed_files(&out));
    let (header, rows) = read_csv(&out.join("fig2_focal_times.csv"));
    assert_eq!(&header[..5], ["n", "mode", "t_f", "dx_ratio", "dv_ratio"]);
    let optimized: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r[1] == "optimized")
        .map(|r| (r[2].parse().unwrap(), r[4].parse().unwrap()))
        .collect();
    assert_eq!(optimized.len(), 3);
    assert!(optimized[0].0 < optimized[1].0 && optimized[1].0 < optimized[2].0);
    assert!(optimized[2].1 < optimized[1].1 && optimized[1].1 < optimized[0].1);
    // the harmonic reference follows Δv_f/Δv_i = Δx_i/Δx_f
    let h = out.join("fig2_harmonic.csv");
    for (dx, dv) in column(&h, "dx_ratio").iter().zip(column(&h, "dv_ratio")) {
        assert!((dx * dv - 1.0).abs() < 1e-6);
    }
}

#[test]
fn fig4b_narrows_with_each_kick() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("fig4");
    let r = kicklens(&["reproduce", "fig4", "--out", out.to_str().unwrap()]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let (_, rows) = read_csv(&out.join("fig4_summary.csv"));
    let dp = |variant: &str, case: &str| -> f64 {
        rows.iter().find(|r| r[0] == variant && r[1] == case).unwrap()[3].parse().unwrap()
    };
    assert!(dp("b", "kicks3") < dp("b", "kicks2") && dp("b", "kicks2") < dp("b", "kicks1"));
    // at a common focal time extra kicks approach the harmonic result
    assert!(dp("a", "kicks3") <= dp("a", "kicks2") && dp("a", "kicks2") <= dp("a", "kicks1"));
    assert!(dp("a", "harmonic") <= dp("a", "kicks3"));
    for f in ["fig4a_kicks1.csv", "fig4b_harmonic.csv"] {
        let (header, _) = read_csv(&out.join(f));
        assert_eq!(header, ["p", "density"]);
    }
}

#[test]
fn fig5_ridge_follows_the_strength_ratio() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("fig5");
    let r = kicklens(&["reproduce", "fig5", "--out", out.to_str().unwrap()]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let path = out.join("fig5_map.csv");
    let s1 = column(&path, "scale1");
    let s2 = column(&path, "scale2");
    let v = column(&path, "dp_ratio");
    assert_eq!(v.len(), 41 * 41);
    let at = |a: f64, b: f64| {
        let i = (0..v.len()).find(|&i| (s1[i] - a).abs() < 1e-9 && (s2[i] - b).abs() < 1e-9).unwrap();
        v[i]
    };
    assert!(at(1.05, 1.05) > at(1.05, 1.0));
    assert!(at(0.95, 0.95) > at(0.95, 1.0));
    // along each row the best κ2 scale tracks the κ1 scale
    for row in 0..41 {
        let cells = &v[row * 41..(row + 1) * 41];
        let best = (0..41).max_by(|&a, &b| cells[a].total_cmp(&cells[b])).unwrap();
        assert!((s2[row * 41 + best] - s1[row * 41]).abs() <= 0.03, "row {row}");
    }
}

#[test]
fn reproduce_rejects_mismatched_config() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "f.toml", include_str!("../presets/fig5.toml"));
    let r = kicklens(&["reproduce", "fig1", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
}
