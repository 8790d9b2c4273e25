use std::f64::consts::PI;
use std::io::BufReader;

use hef_core::data_io::{
    export_grid, load_model, parse_earthquakes, read_grid, read_model, save_model, write_model,
    ColumnMap, ModelFile,
};
use hef_core::expfam::{density_grid, param_count, NaturalParams, Regularization};
use hef_core::transforms::{make_grid, GridFunction};
use hef_core::{Error, Manifold, ManifoldPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_model(rng: &mut ChaCha8Rng, m: Manifold, l: usize) -> ModelFile {
    let eta = (0..param_count(m, l)).map(|_| rng.random_range(-1.0..1.0) * 10f64.powi(rng.random_range(-20..3))).collect();
    ModelFile {
        params: NaturalParams::new(m, l, eta).unwrap(),
        oversample: 2.5,
        regularization: Regularization::Plancherel(rng.random::<f64>()),
    }
}

#[test]
fn model_round_trip_is_bit_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let dir = tempfile::tempdir().unwrap();
    for m in Manifold::ALL {
        let model = random_model(&mut rng, m, 3);
        let path = dir.path().join(format!("{m}.model"));
        save_model(&path, &model).unwrap();
        let back = load_model(&path).unwrap();
        assert_eq!(back, model);
        let bits: Vec<u64> = back.params.eta.iter().map(|v| v.to_bits()).collect();
        let want: Vec<u64> = model.params.eta.iter().map(|v| v.to_bits()).collect();
        assert_eq!(bits, want);
    }
}

#[test]
fn model_writes_are_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let model = random_model(&mut rng, Manifold::S2, 4);
    let mut a = Vec::new();
    let mut b = Vec::new();
    write_model(&mut a, &model).unwrap();
    write_model(&mut b, &model).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 6 + 24);
    assert!(!text.contains(','));
}

#[test]
fn truncated_model_reports_count_mismatch() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let model = random_model(&mut rng, Manifold::S1, 5);
    let mut buf = Vec::new();
    write_model(&mut buf, &model).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let cut: String = text.lines().take(10).map(|l| format!("{l}\n")).collect();
    match read_model(cut.as_bytes()) {
        Err(Error::Parse { message, .. }) => assert!(message.contains("expected 10 coefficients")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn exported_grid_reintegrates() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let eta = NaturalParams::new(
        Manifold::S2,
        3,
        (0..15).map(|_| rng.random_range(-1.0..1.0)).collect(),
    )
    .unwrap();
    let d = density_grid(&eta, 7).unwrap();
    let mut buf = Vec::new();
    export_grid(&mut buf, &d).unwrap();
    let mut again = Vec::new();
    export_grid(&mut again, &d).unwrap();
    assert_eq!(buf, again);
    let back = read_grid(BufReader::new(&buf[..])).unwrap();
    assert!((back.integral() - d.integral()).abs() < 1e-12);
    assert!((back.integral() - 1.0).abs() < 1e-6);
    let text = String::from_utf8(buf).unwrap();
    let rows = text.lines().skip_while(|l| !l.starts_with("columns")).skip(1).count();
    assert_eq!(rows, d.spec.num_nodes());
}

#[test]
fn constant_grid_has_equal_values() {
    let spec = make_grid(Manifold::SO3, 2).unwrap();
    let f = GridFunction::new(spec, vec![0.75; 64]).unwrap();
    let mut buf = Vec::new();
    export_grid(&mut buf, &f).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let vals: Vec<&str> = text
        .lines()
        .skip_while(|l| !l.starts_with("columns"))
        .skip(1)
        .map(|l| l.rsplit('\t').next().unwrap())
        .collect();
    assert_eq!(vals.len(), 64);
    assert!(vals.iter().all(|v| *v == "0.75"));
}

#[test]
fn earthquake_coordinates() {
    let text = "ID\tLatitude\tLongitude\n1\t90\t0\n2\t0\t-90\n3\t-45.5\t179.9\n4\t\t10\n";
    let d = parse_earthquakes(text.as_bytes(), &ColumnMap::default()).unwrap();
    assert_eq!((d.points.len(), d.missing, d.invalid), (3, 1, 0));
    let want = [
        (0.0, 0.0),
        (PI / 2.0, 1.5 * PI),
        (135.5f64.to_radians(), 179.9f64.to_radians()),
    ];
    for (p, (b, f)) in d.points.iter().zip(want) {
        match *p {
            ManifoldPoint::S2 { beta, phi } => {
                assert!((beta - b).abs() < 1e-14);
                if b != 0.0 {
                    assert!((phi - f).abs() < 1e-14);
                }
            }
            _ => unreachable!(),
        }
    }
}

#[test]
fn locale_independent_numbers() {
    // Comma decimals are not numbers: the row is counted as invalid.
    let text = "LATITUDE\tLONGITUDE\n12,5\t3,25\n12.5\t3.25\n";
    let d = parse_earthquakes(text.as_bytes(), &ColumnMap::default()).unwrap();
    assert_eq!((d.points.len(), d.invalid), (1, 1));
}
