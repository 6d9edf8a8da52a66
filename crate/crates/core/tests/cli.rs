//! End-to-end tests of the `larmor` binary: exit codes, CSV/JSON shape,
//! round-trips, registry overrides and output files.

use std::process::{Command, Output};

use serde_json::Value;

fn larmor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_larmor"))
        .args(args)
        .env_remove("LARMOR_REGISTRY")
        .output()
        .expect("spawn larmor")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Header plus rows of raw fields, skipping `#` annotations.
fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, rows)
}

#[test]
fn split_prints_plateau_value() {
    let o = larmor(&["split", "--eta", "0", "--delta", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = parse_csv(&stdout(&o));
    assert_eq!(h, ["eta", "delta", "splitting"]);
    assert_eq!(rows[0][2].parse::<f64>().unwrap(), 2.0);
}

#[test]
fn singular_derivative_exits_one() {
    let o = larmor(&["split", "--eta", "0", "--delta", "1", "--derivative"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.contains("singular point") && err.contains("delta=1"), "{err}");
}

#[test]
fn bad_flags_exit_two() {
    assert_eq!(larmor(&["split", "--eta"]).status.code(), Some(2));
    assert_eq!(larmor(&["sweep-delta", "--delta-range", "3:0:5"]).status.code(), Some(2));
    assert_eq!(larmor(&["sweep-velocity", "--velocity-range", "0:1.5:5"]).status.code(), Some(2));
    assert_eq!(larmor(&["--format", "xml", "limits", "--natural"]).status.code(), Some(2));
}

#[test]
fn validated_delta_sweep_has_62_rows() {
    let o = larmor(&["sweep-delta", "--velocities", "0,0.5", "--delta-range", "0:3:31", "--validate", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = parse_csv(&stdout(&o));
    assert_eq!(h, ["series_label", "swept_value", "splitting", "splitting_numeric", "lowspeed_approx", "highspeed_approx"]);
    assert_eq!(rows.len(), 62);
    for r in &rows {
        let s: f64 = r[2].parse().unwrap();
        let n: f64 = r[3].parse().unwrap();
        assert!((s - n).abs() < 1e-10);
    }
    assert_eq!(rows[0][0].parse::<f64>().unwrap(), 0.0);
    assert_eq!(rows[31][0].parse::<f64>().unwrap(), 0.5);
}

#[test]
fn csv_round_trips_at_configured_precision() {
    for precision in ["6", "10", "17"] {
        let o = larmor(&["--precision", precision, "sweep-velocity", "--deltas", "0.3,0.5", "--velocity-range", "0:0.99:11"]);
        let (_, rows) = parse_csv(&stdout(&o));
        let p: usize = precision.parse().unwrap();
        for r in &rows {
            for field in r.iter().filter(|f| !f.is_empty()) {
                let x: f64 = field.parse().unwrap();
                assert_eq!(&format!("{:.*e}", p - 1, x), field);
            }
        }
    }
}

#[test]
fn json_and_csv_encode_the_same_numbers() {
    let args = ["sweep-velocity", "--deltas", "0.5,0.9", "--velocity-range", "0:0.999:21", "--validate"];
    let csv = stdout(&larmor(&[&["--format", "csv"], &args[..]].concat()));
    let json = stdout(&larmor(&[&["--format", "json"], &args[..]].concat()));
    let (header, rows) = parse_csv(&csv);
    let doc: Value = serde_json::from_str(&json).unwrap();
    assert_eq!(doc["meta"]["command"], "sweep-velocity");
    assert_eq!(doc["meta"]["seed"], Value::Null);
    assert!(doc["meta"]["version"].is_string());
    assert_eq!(doc["meta"]["parameters"]["deltas"], serde_json::json!([0.5, 0.9]));
    let jrows = doc["rows"].as_array().unwrap();
    assert_eq!(jrows.len(), rows.len());
    for (r, j) in rows.iter().zip(jrows) {
        for (col, field) in header.iter().zip(r) {
            if field.is_empty() {
                assert_eq!(j[col], Value::Null);
            } else {
                assert_eq!(field.parse::<f64>().unwrap(), j[col].as_f64().unwrap(), "{col}");
            }
        }
    }
}

#[test]
fn doppler_footer_counts_dropped_rows() {
    let o = larmor(&["doppler", "--velocity-range", "0:0.9:10", "--delta", "0"]);
    let text = stdout(&o);
    let dropped: usize = text
        .lines()
        .find_map(|l| l.strip_prefix("# dropped_rows="))
        .unwrap()
        .parse()
        .unwrap();
    let (h, rows) = parse_csv(&text);
    assert_eq!(h, ["velocity", "motional_ratio", "nonrel_doppler", "rel_doppler"]);
    assert_eq!(rows.len() + dropped, 10);
}

#[test]
fn limits_for_neutron_and_natural_units() {
    let (_, rows) = parse_csv(&stdout(&larmor(&["limits", "--natural"])));
    let v: Vec<f64> = rows[0].iter().map(|f| f.parse().unwrap()).collect();
    assert_eq!(v, [2.0, 2.0, 0.5]);
    let (h, rows) = parse_csv(&stdout(&larmor(&["limits", "--particle", "neutron"])));
    assert_eq!(h[2], "max_larmor_rad_per_s");
    let omega: f64 = rows[0][2].parse().unwrap();
    assert!((omega / 2.86e24 - 1.0).abs() < 3e-3);
    let lmin: f64 = rows[0][3].parse().unwrap();
    let compton: f64 = rows[0][4].parse().unwrap();
    assert!((lmin / compton - 0.5).abs() < 1e-15);
}

#[test]
fn registry_override_by_flag_and_env() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("reg.toml");
    std::fs::write(
        &path,
        "[constants]\nc = 1.0\nhbar = 1.0\nnuclear_magneton = 1.0\n\n[[particle]]\nname = \"unit\"\nmass_kg = 1.0\nmdm_J_per_T = -1.0\nedm_C_m = 0.0\n",
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let (_, rows) = parse_csv(&stdout(&larmor(&["--registry", p, "limits", "--particle", "unit"])));
    assert_eq!(rows[0][2].parse::<f64>().unwrap(), 2.0);

    let o = Command::new(env!("CARGO_BIN_EXE_larmor"))
        .args(["split", "--particle", "unit", "--b-field", "0.25"])
        .env("LARMOR_REGISTRY", p)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = parse_csv(&stdout(&o));
    assert_eq!(h, ["eta", "delta", "splitting", "splitting_J", "larmor_rad_per_s"]);
    assert_eq!(rows[0][2].parse::<f64>().unwrap(), 0.5);

    assert_eq!(larmor(&["--registry", p, "limits", "--particle", "neutron"]).status.code(), Some(1));
    std::fs::write(&path, "[constants]\nc = -1.0\nhbar = 1.0\nnuclear_magneton = 1.0\n").unwrap();
    assert_eq!(larmor(&["--registry", p, "limits", "--natural"]).status.code(), Some(1));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig1.csv");
    let o = larmor(&["--out", path.to_str().unwrap(), "sweep-delta"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let (_, rows) = parse_csv(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(rows.len(), 4 * 31);
}

#[test]
fn spectrum_labels_rest_frame_levels() {
    let (h, rows) = parse_csv(&stdout(&larmor(&["spectrum", "--eta", "0", "--delta", "0.5", "--numeric"])));
    assert_eq!(h, ["branch", "spin", "energy", "energy_numeric", "deviation"]);
    let get = |b: &str, s: &str| -> f64 {
        rows.iter().find(|r| r[0] == b && r[1] == s).unwrap()[3].parse().unwrap()
    };
    assert!((get("+", "up") - 1.5).abs() < 1e-14);
    assert!((get("+", "down") - 0.5).abs() < 1e-14);
    assert!((get("-", "up") + 1.5).abs() < 1e-14);
    assert!((get("-", "down") + 0.5).abs() < 1e-14);
}

#[test]
fn verify_json_reports_seed() {
    let o = larmor(&["--format", "json", "verify", "--samples", "200", "--seed", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["meta"]["seed"], 5);
    assert_eq!(doc["meta"]["failed"], 0);
    assert!(doc["rows"].as_array().unwrap().iter().all(|r| r["status"] == "pass"));
}
