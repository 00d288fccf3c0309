use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rts-aoa"))
}

fn table_one() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/scenarios/table_one.json")
}

fn run(args: &[&str], scenario: &Path, out: &Path) -> Output {
    bin()
        .args(args)
        .arg(scenario)
        .arg("--out-dir")
        .arg(out)
        .output()
        .unwrap()
}

fn small_scenario(targets: Value) -> Value {
    json!({
        "radar": {
            "start_frequency_hz": 77e9,
            "bandwidth_hz": 1e9,
            "chirp_period_s": 40.96e-6,
            "sample_rate_hz": 12.5e6,
            "chirps_per_frame": 16,
            "tx_antennas": 2,
            "rx_antennas": 4
        },
        "rts": {
            "intermediate_frequency_hz": 500e6,
            "front_ends": [
                { "id": 0, "angle_deg": 3.4, "distance_m": 1.0 },
                { "id": 1, "angle_deg": 12.2, "distance_m": 1.0 }
            ]
        },
        "targets": targets,
        "processing": { "grid": 2048 }
    })
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn header(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn simulate_writes_csvs_and_succeeds() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&["simulate"], &table_one(), out.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout.matches(" ok\n").count(), 4, "{stdout}");
    assert_eq!(header(&out.path().join("rd_map.csv")), "range_m,velocity_mps,magnitude_db");
    assert_eq!(
        header(&out.path().join("detections.csv")),
        "target_id,range_m,velocity_mps,angle_deg,range_err_m,velocity_err_mps,angle_err_deg"
    );
    let detections = std::fs::read_to_string(out.path().join("detections.csv")).unwrap();
    assert_eq!(detections.lines().count(), 5);
    assert!(!detections.contains('\r'));
    // 512 range bins by 120 Doppler bins plus the header
    let map = std::fs::read_to_string(out.path().join("rd_map.csv")).unwrap();
    assert_eq!(map.lines().count(), 512 * 120 + 1);
}

#[test]
fn quantized_delays_flag_the_frame() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&["simulate", "--quantize-delay"], &table_one(), out.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stdout).unwrap().contains("FLAGGED"));
}

#[test]
fn calibrate_and_linearity_outputs() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&["calibrate"], &table_one(), out.path());
    assert!(o.status.success());
    assert_eq!(header(&out.path().join("calibration.csv")), "delta_tau_s,angle_error_deg");
    let summary = std::fs::read_to_string(out.path().join("calibration_summary.txt")).unwrap();
    assert!(summary.starts_with("best_offset_s="));

    let o = run(&["linearity"], &table_one(), out.path());
    assert!(o.status.success());
    let csv = std::fs::read_to_string(out.path().join("linearity.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "alpha_set_deg,alpha_meas_deg,alpha_err_deg,gain1,gain2");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 45);
    assert!(rows.iter().all(|r| r[2].abs() <= 0.05));
}

#[test]
fn dump_spectrum_is_seeded() {
    let (a, b, c) = (
        tempfile::tempdir().unwrap(),
        tempfile::tempdir().unwrap(),
        tempfile::tempdir().unwrap(),
    );
    for d in [&a, &b] {
        assert!(run(&["dump-spectrum", "--seed", "5"], &table_one(), d.path()).status.success());
    }
    assert!(run(&["dump-spectrum", "--seed", "6"], &table_one(), c.path()).status.success());
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("beat_cube.bin")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    assert_eq!(
        std::fs::read(a.path().join("range_spectrum.bin")).unwrap(),
        std::fs::read(b.path().join("range_spectrum.bin")).unwrap()
    );
}

#[test]
fn empty_scene_gives_empty_peak_list() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "empty.json", &small_scenario(json!([])));
    let o = run(&["simulate"], &s, dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let peaks = std::fs::read_to_string(dir.path().join("peaks.csv")).unwrap();
    assert_eq!(peaks.lines().count(), 1);
    let detections = std::fs::read_to_string(dir.path().join("detections.csv")).unwrap();
    assert_eq!(detections.lines().count(), 1);
}

#[test]
fn single_front_end_target() {
    let dir = tempfile::tempdir().unwrap();
    let targets = json!([{ "range_m": 20.0, "velocity_mps": 3.0, "angle_deg": 12.2 }]);
    let s = write(dir.path(), "single.json", &small_scenario(targets));
    let o = run(&["simulate", "--no-refine", "--grid", "1024"], &s, dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let csv = std::fs::read_to_string(dir.path().join("detections.csv")).unwrap();
    let row: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((row[1] - 20.0).abs() <= 0.15);
    assert!((row[3] - 12.2).abs() <= 0.5);
}

#[test]
fn invalid_scenarios_exit_with_a_located_message() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = small_scenario(json!([{ "range_m": 0.5, "velocity_mps": 0.0, "angle_deg": 5.0 }]));
    let s = write(dir.path(), "close.json", &v);
    let o = run(&["simulate"], &s, dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("targets[0]"));

    v["radar"]["bandwidth_mhz"] = json!(1000);
    let s = write(dir.path(), "unknown.json", &v);
    let o = run(&["simulate"], &s, dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("bandwidth_mhz"));

    let o = run(&["simulate"], &dir.path().join("missing.json"), dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("missing.json"));
}
