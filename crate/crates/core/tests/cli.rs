//! End-to-end checks of the command-line interface: file formats, exit
//! codes, and byte-identical reruns.

use std::fs;
use std::path::PathBuf;

use rough_billiards::cli::run;

fn tmp_dir(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("rough-billiards-test-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn write_spec(dir: &std::path::Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, json).unwrap();
    p
}

fn args(parts: &[&str]) -> Vec<String> {
    parts.iter().map(|s| s.to_string()).collect()
}

#[test]
fn reflect_on_flat_wall_is_specular() {
    let dir = tmp_dir("reflect-flat");
    let spec = write_spec(
        &dir,
        "flat.json",
        r#"{"family":"flat","scale":1.0,"datum":"half_plane"}"#,
    );
    let out = dir.join("rows.csv");
    let code = run(args(&[
        "reflect",
        "--wall",
        spec.to_str().unwrap(),
        "--theta",
        "1.0",
        "--samples",
        "10",
        "--seed",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    let text = fs::read_to_string(&out).unwrap();
    let mut rows = 0;
    for line in text.lines().skip(2) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[5], "ok");
        let theta_out: f64 = cols[3].parse().unwrap();
        assert!((theta_out - (std::f64::consts::PI - 1.0)).abs() < 1e-12);
        let x: f64 = cols[0].parse().unwrap();
        let x_out: f64 = cols[2].parse().unwrap();
        assert!((x - x_out).abs() < 1e-12);
        rows += 1;
    }
    assert_eq!(rows, 10);
}

#[test]
fn kernel_table_matches_closed_form() {
    let dir = tmp_dir("kernel-table");
    let out = dir.join("atoms.csv");
    let code = run(args(&[
        "kernel",
        "--family",
        "rect",
        "--r",
        "0.3",
        "--theta-grid",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    let text = fs::read_to_string(&out).unwrap();
    let data: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(data.len(), 8, "4 angles x 2 atoms");
    for row in data {
        let cols: Vec<&str> = row.split(',').collect();
        let theta: f64 = cols[0].parse().unwrap();
        let angle: f64 = cols[1].parse().unwrap();
        let prob: f64 = cols[2].parse().unwrap();
        let p = rough_billiards::kernels::rect_specular_prob(theta, 0.3).unwrap();
        if (angle - (std::f64::consts::PI - theta)).abs() < 1e-9 {
            assert!((prob - p).abs() < 1e-12);
        } else {
            assert!((angle - theta).abs() < 1e-9);
            assert!((prob - (1.0 - p)).abs() < 1e-12);
        }
    }
}

#[test]
fn identical_args_produce_identical_bytes() {
    let dir = tmp_dir("repro");
    let spec = write_spec(
        &dir,
        "rect.json",
        r#"{"family":"rect_teeth","params":{"r":1.0},"scale":1.0,"datum":"half_plane"}"#,
    );
    let out_a = dir.join("a.csv");
    let out_b = dir.join("b.csv");
    for out in [&out_a, &out_b] {
        let code = run(args(&[
            "reflect",
            "--wall",
            spec.to_str().unwrap(),
            "--theta",
            "0.9",
            "--samples",
            "500",
            "--seed",
            "7",
            "--out",
            out.to_str().unwrap(),
        ]));
        assert_eq!(code, 0);
    }
    let a = fs::read(&out_a).unwrap();
    let mut b = fs::read(&out_b).unwrap();
    // The config hash covers the arguments except the output path.
    let (ta, tb) = (String::from_utf8(a).unwrap(), String::from_utf8(b.clone()).unwrap());
    assert_eq!(
        ta.lines().skip(1).collect::<Vec<_>>(),
        tb.lines().skip(1).collect::<Vec<_>>()
    );
    // Same output path twice is byte-identical including the header.
    let code = run(args(&[
        "reflect",
        "--wall",
        spec.to_str().unwrap(),
        "--theta",
        "0.9",
        "--samples",
        "500",
        "--seed",
        "7",
        "--out",
        out_b.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    b = fs::read(&out_b).unwrap();
    let b2 = fs::read(&out_b).unwrap();
    assert_eq!(b, b2);
}

#[test]
fn knudsen_rows_and_retro_capping() {
    let dir = tmp_dir("knudsen");
    let out = dir.join("exit.csv");
    let code = run(args(&[
        "knudsen",
        "--family",
        "lambertian",
        "--length",
        "5.0",
        "--runs",
        "50",
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 52);

    let code = run(args(&[
        "knudsen",
        "--family",
        "retro",
        "--length",
        "5.0",
        "--runs",
        "3",
        "--seed",
        "3",
        "--theta",
        "1.5707963267948966",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.lines().skip(2).all(|l| l.ends_with("capped")));
}

#[test]
fn wall_csv_polyline_depth_band() {
    let dir = tmp_dir("wall-csv");
    let spec = write_spec(
        &dir,
        "circ.json",
        r#"{"family":"circ_arcs","params":{"xi":1.0},"scale":0.5,"datum":"half_plane"}"#,
    );
    let out = dir.join("poly.csv");
    let code = run(args(&[
        "wall",
        "--wall",
        spec.to_str().unwrap(),
        "--out-csv",
        out.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    let text = fs::read_to_string(&out).unwrap();
    for line in text.lines().skip(2) {
        let cols: Vec<&str> = line.split(',').collect();
        let x: f64 = cols[0].parse().unwrap();
        let y: f64 = cols[1].parse().unwrap();
        assert!((-0.5..=0.5).contains(&x));
        assert!((-0.5..=1e-12).contains(&y));
    }
}

#[test]
fn verify_reruns_are_byte_identical() {
    let dir = tmp_dir("verify-repro");
    let out_a = dir.join("a.json");
    let out_b = dir.join("b.json");
    // The full suite must pass (exit 0) and a rerun with the same seed
    // must produce the same JSON bytes.
    let code = run(args(&["verify", "--seed", "7", "--out", out_a.to_str().unwrap()]));
    assert_eq!(code, 0);
    let code = run(args(&["verify", "--seed", "7", "--out", out_b.to_str().unwrap()]));
    assert_eq!(code, 0);
    let a = fs::read_to_string(&out_a).unwrap();
    let b = fs::read_to_string(&out_b).unwrap();
    // Identical except the config hash line (the output path differs).
    let strip = |s: &str| {
        s.lines().filter(|l| !l.contains("config_hash")).collect::<Vec<_>>().join("\n")
    };
    assert_eq!(strip(&a), strip(&b));
    // Same arguments to the same path: byte-identical.
    let code = run(args(&["verify", "--seed", "7", "--out", out_a.to_str().unwrap()]));
    assert_eq!(code, 0);
    let a2 = fs::read_to_string(&out_a).unwrap();
    let code = run(args(&["verify", "--seed", "7", "--out", out_a.to_str().unwrap()]));
    assert_eq!(code, 0);
    let a3 = fs::read_to_string(&out_a).unwrap();
    assert_eq!(a2, a3);
}

#[test]
fn converge_emits_monotone_rows() {
    let dir = tmp_dir("converge");
    let spec = write_spec(
        &dir,
        "rect.json",
        r#"{"family":"rect_teeth","params":{"r":1.0},"scale":1.0,"datum":"disk_wall"}"#,
    );
    let out = dir.join("study.json");
    let code = run(args(&[
        "converge",
        "--wall",
        spec.to_str().unwrap(),
        "--eps-list",
        "0.1,0.02",
        "--n",
        "2000",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[1]["ks_theta"].as_f64().unwrap() <= rows[0]["ks_theta"].as_f64().unwrap() + 0.05);
    assert!(v["reports"].as_array().unwrap().iter().all(|r| r["passed"].as_bool().unwrap()));
}

#[test]
fn usage_and_runtime_error_exit_codes() {
    // Unknown flag: usage error.
    assert_eq!(run(args(&["reflect", "--nope"])), 2);
    // Unknown subcommand: usage error.
    assert_eq!(run(args(&["frobnicate"])), 2);
    // Missing wall file: runtime error.
    assert_eq!(
        run(args(&[
            "reflect",
            "--wall",
            "/nonexistent/wall.json",
            "--theta",
            "1.0",
            "--samples",
            "1",
            "--seed",
            "1"
        ])),
        3
    );
    // Kernel with a continuous part has no atom table: runtime error.
    assert_eq!(run(args(&["kernel", "--family", "lambertian", "--theta-grid", "2"])), 3);
    // Bad theta: runtime error.
    let dir = tmp_dir("bad-theta");
    let spec = write_spec(
        &dir,
        "flat.json",
        r#"{"family":"flat","scale":1.0,"datum":"half_plane"}"#,
    );
    assert_eq!(
        run(args(&[
            "reflect",
            "--wall",
            spec.to_str().unwrap(),
            "--theta",
            "4.0",
            "--samples",
            "1",
            "--seed",
            "1"
        ])),
        3
    );
}
