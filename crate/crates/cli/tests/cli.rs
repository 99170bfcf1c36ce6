use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn srgeo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_srgeo")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

const JACOBI_BROKEN: &str = r#"{"dim":3,"constants":[[1,2,3,1],[2,1,3,-1],[1,3,1,1],[3,1,1,-1]],
 "k_basis":[],"m_basis":[[1,0,0],[0,1,0],[0,0,1]],"delta_basis":[[1,0,0],[0,1,0]],"metric":[[1,0],[0,1]]}"#;

#[test]
fn validate_exit_codes() {
    assert_eq!(code(&srgeo(&["validate", "--model", "cartan"])), 0);
    assert_eq!(code(&srgeo(&["validate", "--model", "nosuch"])), 2);

    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, JACOBI_BROKEN).unwrap();
    let out = srgeo(&["validate", "--model", broken.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let report = json(&out);
    assert!(report["violations"][0].as_str().unwrap().contains("Jacobi"));

    let garbled = dir.path().join("garbled.json");
    std::fs::write(&garbled, "{\"dim\":").unwrap();
    assert_eq!(code(&srgeo(&["validate", "--model", garbled.to_str().unwrap()])), 2);
}

#[test]
fn exported_models_validate_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("cartan.json");
    assert_eq!(code(&srgeo(&["export", "--model", "cartan", "--out", file.to_str().unwrap()])), 0);
    let out = srgeo(&["validate", "--model", file.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = srgeo(&["check", "--model", file.to_str().unwrap(), "--p0", "1,0,0,1,0"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn list_names_every_model() {
    let out = srgeo(&["list"]);
    assert_eq!(code(&out), 0);
    let names = String::from_utf8(out.stdout).unwrap();
    assert!(names.lines().any(|l| l == "rolling_sphere"));
}

#[test]
fn integrate_heisenberg_full_period() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("h.csv");
    let period = format!("{}", 2.0 * std::f64::consts::PI);
    let out = srgeo(&["integrate", "--model", "heisenberg", "--p0", "1,0,1", "--T", &period, "--out", file.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let summary = json(&out);
    assert!(summary["max_energy_drift"].as_f64().unwrap() < 1e-10);
    let (header, rows) = csv_rows(&file);
    assert_eq!(&header[..6], &["t", "p_1", "p_2", "p_3", "p_4", "H"]);
    assert_eq!(header[6], "C1");
    let last: Vec<f64> = rows.last().unwrap()[1..5].iter().map(|x| x.parse().unwrap()).collect();
    let start = [1.0, 0.0, 1.0, 0.0];
    assert!(last.iter().zip(start).all(|(a, b)| (a - b).abs() < 1e-7), "{last:?}");
}

#[test]
fn integrate_rejects_bad_times_and_reports_blow_up() {
    assert_eq!(code(&srgeo(&["integrate", "--model", "heisenberg", "--T", "0"])), 2);
    assert_eq!(code(&srgeo(&["integrate", "--model", "heisenberg", "--step", "-1"])), 2);
    let out = srgeo(&["integrate", "--model", "heisenberg", "--p0", "1e200,0,1e200", "--T", "1"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("non-finite"));
}

#[test]
fn horizontal_columns_follow_the_representation() {
    let out = srgeo(&["integrate", "--model", "so3_axisym", "--T", "0.01", "--horizontal"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert!(header.contains(&"g_11") && header.contains(&"g_55"));
}

#[test]
fn axisymmetric_phase_portrait_draws_circles() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("portrait.csv");
    let out = srgeo(&[
        "integrate", "--model", "so3_axisym", "--phase-portrait", "--samples", "50", "--trajectories", "4",
        "--out", file.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let (header, rows) = csv_rows(&file);
    assert_eq!(&header[..4], &["kind", "id", "t", "p_1"]);
    assert_eq!(header.len(), 3 + 2 * 4);
    assert_eq!(rows.iter().filter(|r| r[0] == "arrow").count(), 50);
    for id in 0..4 {
        let pts: Vec<Vec<f64>> = rows
            .iter()
            .filter(|r| r[0] == "trajectory" && r[1] == id.to_string())
            .map(|r| r[3..7].iter().map(|x| x.parse().unwrap()).collect())
            .collect();
        assert!(pts.len() > 1000);
        // rotation about the p3 axis: p3 fixed and (p1, p2) on a circle centred on the axis
        let radius = |p: &Vec<f64>| p[0].hypot(p[1]);
        let r0 = radius(&pts[0]);
        assert!(pts.iter().all(|p| (radius(p) - r0).abs() < 1e-6 && (p[2] - pts[0][2]).abs() < 1e-9));
    }
}

#[test]
fn check_exit_codes() {
    assert_eq!(code(&srgeo(&["check", "--model", "cartan", "--p0", "1,0,0,0,0"])), 0);
    let out = srgeo(&["check", "--model", "cartan", "--p0", "1,0,0,1,0"]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["verdict"], "not_homogeneous");
    assert_eq!(code(&srgeo(&["check", "--model", "cartan", "--p0", "1,0,0,0,0,0.5"])), 2);
    assert_eq!(code(&srgeo(&["check", "--model", "cartan", "--p0", "1,0"])), 2);
    let borderline = ["check", "--model", "cartan", "--p0", "1,0,0,1e-7,0"];
    assert_eq!(code(&srgeo(&[&borderline[..], &["--no-exact-retry"]].concat())), 4);
    assert_eq!(code(&srgeo(&borderline)), 1);
}

#[test]
fn go_verdicts() {
    let out = srgeo(&["go", "--model", "free_step2_rank3", "--samples", "200"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["verdict"], "GO_affirmed_up_to_degree");
    assert_eq!(v["degree_cap"], 4);
    let out = srgeo(&["go", "--model", "cartan", "--samples", "200"]);
    assert_eq!(json(&out)["verdict"], "GO_refuted_with_witness");
}

#[test]
fn exist_results() {
    let out = srgeo(&["exist", "--model", "so3_kp"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["route"], "eigenvector");
    assert_eq!(v["verification"]["ok"], true);
    assert_eq!(code(&srgeo(&["exist", "--model", "biinvariant_compact"])), 1);
}

#[test]
fn identical_seeds_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, extra: &[&str]| {
        let file = dir.path().join(name);
        let mut args = vec!["integrate", "--model", "cartan", "--T", "2", "--seed", "7", "--out", file.to_str().unwrap()];
        args.extend_from_slice(extra);
        assert_eq!(code(&srgeo(&args)), 0);
        std::fs::read(file).unwrap()
    };
    assert_eq!(run("a.csv", &[]), run("b.csv", &["--jobs", "3"]));
    let go = |jobs: &str| srgeo(&["--jobs", jobs, "go", "--model", "rolling_sphere", "--samples", "300", "--seed", "5"]).stdout;
    assert_eq!(go("1"), go("4"));
}
