use std::path::Path;
use std::process::{Command, Output};

use gpet_core::image::{load_grayscale, save_grayscale, Grid};
use serde_json::Value;

fn gpet(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gpet"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("failed to start gpet")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn truth_rows(path: &Path) -> Vec<f64> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    rdr.records().map(|r| r.unwrap()[1].parse().unwrap()).collect()
}

/// A small synthetic case so runs take well under a second.
const SMALL: &str = r#"
[source]
kind = "synthetic"
height = 120
width = 180
amplitude = 20.0
periods = 1.0
noise_level = 0.2
occlusion_spans = [[100, 110]]

[tracer]
curves = 200
kernel = { family = "matern52", signal_variance = 400.0, lengthscale = 20.0 }
"#;

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        ok(&gpet(dir.path(), &["generate", "--out", out, "--seed", "5"]));
    }
    for f in ["image.png", "gradient.png", "truth.csv", "case.toml"] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert!(a == b, "{f} differs between runs");
    }
}

#[test]
fn generate_honours_occlusion_and_shape_flags() {
    let dir = tempfile::tempdir().unwrap();
    ok(&gpet(
        dir.path(),
        &["generate", "--out", "c", "--periods", "4", "--amplitude", "75", "--occlusion", "100:150"],
    ));
    let g = load_grayscale(dir.path().join("c/gradient.png")).unwrap();
    for r in 0..g.height() {
        for c in 100..=150 {
            assert_eq!(g.get(r, c), 0.0);
        }
    }
    assert!(g.max() > 0.0);
    let truth = truth_rows(&dir.path().join("c/truth.csv"));
    assert_eq!(truth.len(), 720);
    let hi = truth.iter().cloned().fold(f64::MIN, f64::max);
    let lo = truth.iter().cloned().fold(f64::MAX, f64::min);
    assert!((hi - lo - 150.0).abs() <= 1.0, "range {}", hi - lo);

    let bad = gpet(dir.path(), &["generate", "--out", "d", "--occlusion", "700:800"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn default_synthetic_trace_reports_high_jaccard_and_init_pixels_speed_it_up() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), "output = \"first\"\n").unwrap();
    ok(&gpet(dir.path(), &["trace", "--config", "run.toml", "--seed", "0"]));
    let first = report(&dir.path().join("first/report.json"));
    let frame = &first["frames"][0];
    assert_eq!(frame["converged"], true);
    assert!(frame["jaccard"].as_f64().unwrap() >= 0.95, "{frame}");
    for f in ["trace.csv", "observations.csv", "overlay.png"] {
        assert!(dir.path().join("first").join(f).is_file(), "{f}");
    }
    let header = std::fs::read_to_string(dir.path().join("first/trace.csv")).unwrap();
    assert!(header.starts_with("column,mean,lower,upper\n"));
    let base_iters = frame["iterations"].as_u64().unwrap();
    assert!(base_iters > 0);

    for (init, out) in [("first/trace.csv", "from_trace"), ("first/observations.csv", "from_obs")] {
        ok(&gpet(
            dir.path(),
            &["trace", "--config", "run.toml", "--seed", "0", "--init-pixels", init, "--out", out],
        ));
        let r = report(&dir.path().join(out).join("report.json"));
        let iters = r["frames"][0]["iterations"].as_u64().unwrap();
        assert!(2 * iters <= base_iters, "{init}: {iters} vs {base_iters}");
        assert!(r["frames"][0]["jaccard"].as_f64().unwrap() >= 0.95);
    }
}

#[test]
fn trace_is_deterministic_given_seed() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("small.toml"), SMALL).unwrap();
    for out in ["a", "b"] {
        ok(&gpet(dir.path(), &["trace", "--config", "small.toml", "--seed", "9", "--out", out]));
    }
    let a = std::fs::read(dir.path().join("a/trace.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/trace.csv")).unwrap();
    assert_eq!(a, b);
    let r = report(&dir.path().join("a/report.json"));
    assert_eq!(r["seed"], 9);
    assert_eq!(r["tracer"]["seed"], 9);
}

#[test]
fn config_errors_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    save_grayscale(d.join("img.png"), &Grid::from_fn(20, 30, |r, _| if r > 10 { 0.8 } else { 0.2 })).unwrap();
    let cases = [
        ("noend.toml", "[source]\nkind = \"image\"\npath = \"img.png\"\n"),
        ("typo.toml", "[tracer]\ncurvs = 10\n"),
        ("range.toml", "[tracer]\nkeep_ratio = 2.0\n"),
        ("kind.toml", "[source]\nkind = \"video\"\n"),
    ];
    for (name, text) in cases {
        std::fs::write(d.join(name), text).unwrap();
        let out = gpet(d, &["trace", "--config", name]);
        assert_eq!(out.status.code(), Some(2), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
    let out = gpet(d, &["trace"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn io_and_numerical_errors_have_their_own_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(gpet(d, &["trace", "--config", "nope.toml"]).status.code(), Some(3));

    std::fs::write(d.join("missing.toml"), "endpoints = [[0, 5], [29, 5]]\n[source]\nkind = \"image\"\npath = \"gone.png\"\n").unwrap();
    assert_eq!(gpet(d, &["trace", "--config", "missing.toml"]).status.code(), Some(3));

    // a featureless image has no gradient for the curves to score on
    save_grayscale(d.join("flat.png"), &Grid::from_fn(20, 30, |_, _| 0.5)).unwrap();
    std::fs::write(d.join("flat.toml"), "endpoints = [[0, 5], [29, 5]]\n[source]\nkind = \"image\"\npath = \"flat.png\"\n").unwrap();
    let out = gpet(d, &["trace", "--config", "flat.toml"]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lost edge"));
}

#[test]
fn non_convergence_exits_zero_with_a_flag() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cap.toml"), format!("{SMALL}max_iterations = 1\n")).unwrap();
    let out = gpet(dir.path(), &["trace", "--config", "cap.toml", "--out", "o"]);
    ok(&out);
    assert!(String::from_utf8_lossy(&out.stderr).contains("did not converge"));
    let r = report(&dir.path().join("o/report.json"));
    assert_eq!(r["frames"][0]["converged"], false);
    assert_eq!(r["frames"][0]["stop_reason"], "max_iterations");
}

#[test]
fn evaluate_ranks_the_tracer_above_dijkstra_on_the_sinusoid() {
    let dir = tempfile::tempdir().unwrap();
    ok(&gpet(dir.path(), &["generate", "--out", "case"]));
    let out = gpet(dir.path(), &["evaluate", "case", "--out", "eval"]);
    ok(&out);
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.contains("J (%)") && table.contains("Time (s)"), "{table}");
    let mut rdr = csv::Reader::from_path(dir.path().join("eval/comparison.csv")).unwrap();
    let rows: Vec<(String, f64)> = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].to_string(), r[1].parse().unwrap())
        })
        .collect();
    assert_eq!(rows[0].0, "gp");
    assert_eq!(rows[1].0, "dijkstra");
    assert!(rows[0].1 > rows[1].1, "{rows:?}");
    assert!(dir.path().join("eval/overlay.png").is_file());
}

#[test]
fn evaluate_scores_both_methods_highly_on_a_clean_straight_edge() {
    let dir = tempfile::tempdir().unwrap();
    let case = dir.path().join("line");
    std::fs::create_dir(&case).unwrap();
    let (h, w) = (200, 150);
    let edge = |c: usize| 50.0 + 0.1 * c as f64;
    // each pixel covers rows [r − ½, r + ½]; its value is the area-weighted intensity
    let img = Grid::from_fn(h, w, |r, c| {
        let below = (r as f64 + 0.5 - edge(c)).clamp(0.0, 1.0);
        0.25 + 0.5 * below
    });
    save_grayscale(case.join("image.png"), &img).unwrap();
    let truth: String = (0..w).map(|c| format!("{c},{}\n", edge(c))).collect();
    std::fs::write(case.join("truth.csv"), format!("column,row\n{truth}")).unwrap();
    let out = gpet(dir.path(), &["evaluate", "line", "--out", "eval"]);
    ok(&out);
    let mut rdr = csv::Reader::from_path(dir.path().join("eval/comparison.csv")).unwrap();
    for r in rdr.records() {
        let r = r.unwrap();
        let j: f64 = r[1].parse().unwrap();
        assert!(j >= 99.0, "{} scored {j}", &r[0]);
    }
}

#[test]
fn evaluate_rejects_an_empty_case_directory() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("empty")).unwrap();
    let out = gpet(dir.path(), &["evaluate", "empty"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty"));
}

#[test]
fn sweep_writes_a_table_and_notes_invalid_deltas() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("small.toml"), SMALL).unwrap();
    let args = ["sweep", "--config", "small.toml", "--param", "threshold", "--range", "-0.5,0,1", "--seed", "3"];
    let out = gpet(dir.path(), &args);
    ok(&out);
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "parameter,delta,seed,jaccard,runtime_s");
    assert_eq!(lines.len(), 3, "{text}");
    assert!(lines[1].starts_with("threshold,-0.5,3,"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("skipped"));

    // same seed, same Jaccard column
    let again = String::from_utf8_lossy(&gpet(dir.path(), &args).stdout).to_string();
    let jac = |t: &str| t.lines().map(|l| l.split(',').nth(3).unwrap().to_string()).collect::<Vec<_>>();
    assert_eq!(jac(&text), jac(&again));

    ok(&gpet(dir.path(), &["sweep", "--config", "small.toml", "--param", "curves", "--range", "-0.5:0:0.5", "--out", "sw"]));
    let csv_text = std::fs::read_to_string(dir.path().join("sw/sweep.csv")).unwrap();
    assert_eq!(csv_text.lines().count(), 3);

    let bad = gpet(dir.path(), &["sweep", "--param", "sigma", "--range", "0"]);
    assert_eq!(bad.status.code(), Some(2));
}

fn disc(size: usize, center: (f64, f64), radius: impl Fn(f64) -> f64) -> Grid {
    Grid::from_fn(size, size, |r, c| {
        let (dx, dy) = (c as f64 - center.0, r as f64 - center.1);
        let inside = (dx * dx + dy * dy).sqrt() < radius(dy.atan2(dx));
        if inside {
            0.75
        } else {
            0.25
        }
    })
}

#[test]
fn polar_mode_traces_a_closed_edge() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let radius = |t: f64| 50.0 + 6.0 * (3.0 * t).cos();
    save_grayscale(d.join("disc.png"), &disc(161, (80.0, 80.0), radius)).unwrap();
    std::fs::write(
        d.join("polar.toml"),
        "endpoints = [[136, 80]]\n[source]\nkind = \"image\"\npath = \"disc.png\"\n\
         [polar]\ncenter = [1, 1]\nangular_samples = 360\n\
         [tracer]\ncurves = 200\nkernel = { family = \"matern52\", signal_variance = 400.0, lengthscale = 20.0 }\n",
    )
    .unwrap();
    ok(&gpet(d, &["trace", "--config", "polar.toml", "--polar-center", "80,80", "--out", "o"]));
    let mut rdr = csv::Reader::from_path(d.join("o/contour.csv")).unwrap();
    let mut worst = 0.0f64;
    let mut count = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let (x, y): (f64, f64) = (rec[1].parse().unwrap(), rec[2].parse().unwrap());
        let (dx, dy) = (x - 80.0, y - 80.0);
        worst = worst.max(((dx * dx + dy * dy).sqrt() - radius(dy.atan2(dx))).abs());
        count += 1;
    }
    assert_eq!(count, 360);
    assert!(worst < 2.0, "worst radial error {worst}");
    let r = report(&d.join("o/report.json"));
    assert_eq!(r["polar"]["center"], serde_json::json!([80.0, 80.0]));
}

#[test]
fn sequence_mode_propagates_observations() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let frame = Grid::from_fn(60, 90, |r, c| {
        if r as f64 > 30.0 + 8.0 * (c as f64 / 15.0).sin() {
            0.8
        } else {
            0.2
        }
    });
    save_grayscale(d.join("f0.png"), &frame).unwrap();
    save_grayscale(d.join("f1.png"), &frame).unwrap();
    std::fs::write(
        d.join("seq.toml"),
        "endpoints = [[0, 30], [89, 28]]\n[source]\nkind = \"image\"\n\
         [tracer]\ncurves = 200\nkernel = { family = \"matern52\", signal_variance = 400.0, lengthscale = 15.0 }\n",
    )
    .unwrap();
    ok(&gpet(d, &["trace", "--config", "seq.toml", "--out", "o", "f0.png", "f1.png"]));
    let r = report(&d.join("o/report.json"));
    let frames = r["frames"].as_array().unwrap();
    assert_eq!(frames.len(), 2);
    assert!(frames[0]["iterations"].as_u64().unwrap() > 0);
    assert_eq!(frames[1]["iterations"], 0);
    assert!(d.join("o/frame_001/trace.csv").is_file());
}
