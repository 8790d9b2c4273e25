use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hef_core::bayes_rotation::{rotate_spectral, SphericalSignal};
use hef_core::data_io::{export_grid, load_model, read_grid, save_model, write_points, ModelFile};
use hef_core::expfam::{log_unnormalized, moments, NaturalParams, Regularization};
use hef_core::rotation::geodesic_distance;
use hef_core::{Manifold, ManifoldPoint, Rotation};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

fn hef(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hef"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = hef(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .parse()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_point_file(dir: &TempDir, name: &str, pts: &[ManifoldPoint]) -> PathBuf {
    let path = dir.path().join(name);
    let mut buf = Vec::new();
    write_points(&mut buf, pts).unwrap();
    fs::write(&path, buf).unwrap();
    path
}

fn uniform_circle(n: usize) -> Vec<ManifoldPoint> {
    (0..n).map(|i| ManifoldPoint::circle(2.0 * PI * i as f64 / n as f64)).collect()
}

/// Points clustered around a direction, by rejection from the uniform sphere.
fn clustered(rng: &mut ChaCha8Rng, n: usize, kappa: f64) -> Vec<ManifoldPoint> {
    let centre = ManifoldPoint::sphere(1.0, 1.0).unit_vector().unwrap();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let z: f64 = rng.random_range(-1.0..1.0);
        let phi: f64 = rng.random_range(0.0..2.0 * PI);
        let p = ManifoldPoint::sphere(z.acos(), phi);
        let v = p.unit_vector().unwrap();
        let c: f64 = v.iter().zip(&centre).map(|(a, b)| a * b).sum();
        if rng.random::<f64>() < (kappa * (c - 1.0)).exp() {
            out.push(p);
        }
    }
    out
}

fn write_signal(dir: &TempDir, name: &str, x: &SphericalSignal, b: usize) -> PathBuf {
    let path = dir.path().join(name);
    let mut buf = Vec::new();
    export_grid(&mut buf, &x.sample(b).unwrap()).unwrap();
    fs::write(&path, buf).unwrap();
    path
}

fn random_signal(rng: &mut ChaCha8Rng, l: usize) -> SphericalSignal {
    SphericalSignal::new(l, (0..(l + 1) * (l + 1)).map(|_| rng.random_range(-1.0..1.0)).collect())
        .unwrap()
}

#[test]
fn fit_on_uniform_data_is_flat_and_reproducible() {
    let dir = TempDir::new().unwrap();
    let input = write_point_file(&dir, "u.txt", &uniform_circle(360));
    let m1 = dir.path().join("a.model");
    let m2 = dir.path().join("b.model");
    let args = |m: &Path| {
        vec!["fit", "--manifold", "s1", "--bandlimit", "4", "--input", s(&input), "--output", s(m)]
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>()
    };
    let a1 = args(&m1);
    let out = ok(&a1.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(field(&out, "points"), 360.0);
    assert_eq!(field(&out, "parameters"), 8.0);
    assert!(field(&out, "train_ll").abs() < 1e-9);
    let a2 = args(&m2);
    ok(&a2.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(fs::read(&m1).unwrap(), fs::read(&m2).unwrap());
    let model = load_model(&m1).unwrap();
    assert!(model.params.eta.iter().all(|v| v.abs() < 1e-9));

    let ev = ok(&["eval", "--model", s(&m1), "--input", s(&input)]);
    assert!(field(&ev, "mean_ll").abs() < 1e-9);
    assert!(field(&ev, "std_ll").abs() < 1e-9);
}

#[test]
fn eval_matches_library_and_prefers_training_data() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(60);
    let pts = clustered(&mut rng, 400, 4.0);
    let input = write_point_file(&dir, "q.txt", &pts);
    let model_path = dir.path().join("q.model");
    let fit = ok(&[
        "fit", "--manifold", "s2", "--bandlimit", "3", "--reg", "0.001", "--input", s(&input),
        "--output", s(&model_path),
    ]);
    let ev = ok(&["eval", "--model", s(&model_path), "--input", s(&input)]);
    // Training LL reported by fit and the per-point mean from eval agree.
    assert!((field(&fit, "train_ll") - field(&ev, "mean_ll")).abs() < 1e-8);

    let model = load_model(&model_path).unwrap();
    let log_z = moments(&model.params, model.oversample).unwrap().log_z;
    let ll: Vec<f64> =
        pts.iter().map(|p| log_unnormalized(&model.params, p).unwrap() - log_z).collect();
    let mean = ll.iter().sum::<f64>() / ll.len() as f64;
    assert!((mean - field(&ev, "mean_ll")).abs() < 1e-10);

    let mut lons: Vec<f64> = pts.iter().map(|p| p.coords()[1]).collect();
    lons.shuffle(&mut rng);
    let shuffled: Vec<ManifoldPoint> = pts
        .iter()
        .zip(&lons)
        .map(|(p, &phi)| ManifoldPoint::sphere(p.coords()[0], phi))
        .collect();
    let other = write_point_file(&dir, "shuffled.txt", &shuffled);
    let ev2 = ok(&["eval", "--model", s(&model_path), "--input", s(&other)]);
    assert!(field(&ev, "mean_ll") >= field(&ev2, "mean_ll"));
}

#[test]
fn earthquake_table_is_accepted() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("quakes.tsv");
    let mut text = String::from("Year\tLatitude\tLongitude\tMag\n");
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for _ in 0..200 {
        let lat: f64 = rng.random_range(-60.0..60.0);
        let lon: f64 = rng.random_range(-180.0..180.0);
        text.push_str(&format!("2000\t{lat:.3}\t{lon:.3}\t5.0\n"));
    }
    text.push_str("2001\t\t\t6.0\n");
    fs::write(&path, text).unwrap();
    let out = ok(&["fit", "--manifold", "s2", "--bandlimit", "2", "--input", s(&path)]);
    assert_eq!(field(&out, "points"), 200.0);
}

#[test]
fn crossval_table_shape_and_determinism() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    let input = write_point_file(&dir, "c.txt", &clustered(&mut rng, 150, 3.0));
    let run = |name: &str| {
        let out = dir.path().join(name);
        let summary = ok(&[
            "crossval", "--manifold", "s2", "--bandlimit", "1,2", "--regs", "0.01,0.1", "--folds",
            "3", "--seed", "7", "--input", s(&input), "--output", s(&out),
        ]);
        (fs::read_to_string(out).unwrap(), summary)
    };
    let (t1, sum1) = run("a.tsv");
    let (t2, _) = run("b.tsv");
    let lines: Vec<&str> = t1.lines().collect();
    assert_eq!(lines[0], "bandlimit\treg\tfold\ttrain_ll\ttest_ll\tseconds");
    assert_eq!(lines.len(), 1 + 3 * 2 * 2);
    let strip = |t: &str| -> Vec<String> {
        t.lines()
            .map(|l| l.rsplit_once('\t').unwrap().0.to_string())
            .collect()
    };
    assert_eq!(strip(&t1), strip(&t2));
    assert_eq!(sum1.lines().filter(|l| l.starts_with("bandlimit=")).count(), 4);
    assert!(sum1.contains("best_bandlimit="));

    // Without --output the table is on stdout.
    let stdout = ok(&[
        "crossval", "--manifold", "s2", "--bandlimit", "1", "--folds", "2", "--input", s(&input),
    ]);
    assert_eq!(stdout.lines().count(), 3);
}

#[test]
fn posterior_of_blank_image_is_the_prior() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(63);
    let l = 3;
    let blank = write_signal(&dir, "x.grid", &SphericalSignal::zeros(l), l + 1);
    let y = write_signal(&dir, "y.grid", &random_signal(&mut rng, l), l + 1);
    let n = NaturalParams::zeros(Manifold::SO3, l).len();
    let prior = ModelFile {
        params: NaturalParams::new(
            Manifold::SO3,
            l,
            (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
        )
        .unwrap(),
        oversample: 2.0,
        regularization: Regularization::None,
    };
    let prior_path = dir.path().join("prior.model");
    save_model(&prior_path, &prior).unwrap();
    let out_path = dir.path().join("post.model");
    ok(&[
        "posterior", "--input", s(&blank), s(&y), "--sigma", "0.5", "--model", s(&prior_path),
        "--output", s(&out_path),
    ]);
    assert_eq!(load_model(&out_path).unwrap().params, prior.params);
    assert_eq!(fs::read(&out_path).unwrap(), fs::read(&prior_path).unwrap());

    for sigma in ["0", "-1", "nan"] {
        let out = hef(&["posterior", "--input", s(&blank), s(&y), "--sigma", sigma]);
        assert_eq!(out.status.code(), Some(2), "sigma {sigma}");
    }
}

#[test]
fn map_recovers_planted_rotation() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    let l = 6;
    let ysig = random_signal(&mut rng, l);
    let g0 = Rotation::from_euler_zyz(2.1, 0.8, -1.3);
    let x = write_signal(&dir, "x.grid", &rotate_spectral(&ysig, &g0), l + 2);
    let y = write_signal(&dir, "y.grid", &ysig, l + 2);
    let post_path = dir.path().join("post.model");
    let out = ok(&[
        "map", "--input", s(&x), s(&y), "--sigma", "0.1", "--bandlimit", "6", "--grid-bandlimit",
        "16", "--output", s(&post_path),
    ]);
    let est = ManifoldPoint::rotation(field(&out, "alpha"), field(&out, "beta"), field(&out, "gamma"));
    assert!(geodesic_distance(&est, &g0.to_point()).unwrap() < 1e-3);
    assert!(field(&out, "log_value") >= field(&out, "grid_log_value"));

    // Reusing the stored posterior gives the same answer.
    let again = ok(&["map", "--model", s(&post_path), "--grid-bandlimit", "16"]);
    assert_eq!(out, again);

    let missing = hef(&["map", "--input", s(&x), s(&y)]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn export_grid_integrates_to_one() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(65);
    for m in Manifold::ALL {
        let l = 2;
        let n = NaturalParams::zeros(m, l).len();
        let model = ModelFile {
            params: NaturalParams::new(m, l, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
                .unwrap(),
            oversample: 2.0,
            regularization: Regularization::None,
        };
        let mp = dir.path().join(format!("{m}.model"));
        save_model(&mp, &model).unwrap();
        let g1 = dir.path().join(format!("{m}-1.grid"));
        let g2 = dir.path().join(format!("{m}-2.grid"));
        ok(&["export-grid", "--model", s(&mp), "--grid-bandlimit", "5", "--output", s(&g1)]);
        let stdout = ok(&["export-grid", "--model", s(&mp), "--grid-bandlimit", "5"]);
        fs::write(&g2, &stdout).unwrap();
        assert_eq!(fs::read(&g1).unwrap(), fs::read(&g2).unwrap());
        let f = read_grid(std::io::BufReader::new(fs::File::open(&g1).unwrap())).unwrap();
        assert!((f.integral() - 1.0).abs() < 1e-6, "{m}");

        let low = hef(&["export-grid", "--model", s(&mp), "--grid-bandlimit", "2"]);
        assert_eq!(low.status.code(), Some(2));
    }
}

#[test]
fn bad_flags_fail_before_reading_input() {
    let dir = TempDir::new().unwrap();
    let absent = dir.path().join("does-not-exist.txt");
    let cases: Vec<Vec<&str>> = vec![
        vec!["fit", "--manifold", "s2", "--bandlimit", "0", "--input", s(&absent)],
        vec!["fit", "--manifold", "s7", "--bandlimit", "2", "--input", s(&absent)],
        vec!["fit", "--manifold", "s2", "--bandlimit", "2", "--reg", "-1", "--input", s(&absent)],
        vec!["fit", "--manifold", "s2", "--bandlimit", "2", "--oversample", "0.5", "--input", s(&absent)],
        vec!["crossval", "--manifold", "s1", "--bandlimit", "2", "--folds", "1", "--input", s(&absent)],
        vec!["export-grid", "--model", s(&absent), "--grid-bandlimit", "0"],
        vec!["map", "--grid-bandlimit", "4"],
        vec!["--threads", "0", "eval", "--model", s(&absent), "--input", s(&absent)],
    ];
    for args in cases {
        let out = hef(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty());
    }
    // A well-formed command on a missing file is a runtime failure.
    let out = hef(&["eval", "--model", s(&absent), "--input", s(&absent)]);
    assert_eq!(out.status.code(), Some(1));
}
