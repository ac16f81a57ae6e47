//! End-to-end tests of the `squeezer-sim` binary: every subcommand, the
//! file outputs, exit codes, and the determinism contract.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_squeezer-sim"))
}

fn run_ok(args: &[&str]) -> String {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "command {args:?} failed with {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf8 stdout")
}

/// Parses a trace CSV: skips `#` comments and the column header.
fn parse_csv(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .skip(1)
        .map(|l| {
            l.split(',')
                .map(|v| v.parse::<f64>().expect("numeric cell"))
                .collect()
        })
        .collect()
}

fn value_of(doc: &str, key: &str) -> f64 {
    doc.lines()
        .find_map(|l| l.trim_start().strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("key {key} missing in:\n{doc}"))
        .parse()
        .expect("numeric value")
}

#[test]
fn spectrum_grid_and_levels() {
    let csv = run_ok(&["spectrum"]);
    let rows = parse_csv(&csv);
    assert_eq!(rows.len(), 151); // 3 decades x 50 per decade + 1
    assert!((rows[0][0] - 10.0).abs() < 1e-9);
    assert!((rows[150][0] - 1e4).abs() < 1e-6);
    for row in &rows {
        assert_eq!(row.len(), 4);
        // shot +0.086 dB, squeezed -8.36 dB, anti +14.00 dB (dark included)
        assert!((row[1] - 0.0858).abs() < 1e-3);
        assert!((row[2] + 8.361).abs() < 1e-2);
        assert!((row[3] - 14.003).abs() < 1e-2);
    }
    // apparent squeezing relative to the measured shot trace
    let rel = rows[0][2] - rows[0][1];
    assert!((rel + 8.447).abs() < 1e-2);
}

#[test]
fn spectrum_band_and_density_flags() {
    let csv = run_ok(&["spectrum", "--band", "100:1000", "--points-per-decade", "10"]);
    let rows = parse_csv(&csv);
    assert_eq!(rows.len(), 11);
}

#[test]
fn spectrum_mains_peaks() {
    let csv = run_ok(&["spectrum", "--mains", "on"]);
    let rows = parse_csv(&csv);
    let at = |f: f64| {
        rows.iter()
            .find(|r| (r[0] - f).abs() < 1e-9)
            .unwrap_or_else(|| panic!("no row at {f} Hz"))
    };
    for f in [50.0, 100.0] {
        let row = at(f);
        assert!((row[1] - 10.0858).abs() < 1e-3, "shot peak at {f} Hz");
    }
    // frequencies strictly increasing even with inserted rows
    for w in rows.windows(2) {
        assert!(w[0][0] < w[1][0]);
    }
}

#[test]
fn spectrum_vacuum_source_collapses_to_shot() {
    let cfg = include_str!("../configs/geo600.cfg").replace("x = 0.680146", "x = 0.0");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("vacuum.cfg");
    std::fs::write(&path, cfg).unwrap();
    let csv = run_ok(&["--config", path.to_str().unwrap(), "spectrum"]);
    for row in parse_csv(&csv) {
        assert!((row[1] - row[2]).abs() < 1e-12);
        assert!((row[1] - row[3]).abs() < 1e-12);
    }
}

#[test]
fn fit_reproduces_published_chain() {
    let doc = run_ok(&["fit", "-9", "14"]);
    assert!((value_of(&doc, "loss_percent") - 9.302).abs() < 1e-2);
    assert!((value_of(&doc, "r") - 1.6588).abs() < 1e-3);
    assert!((value_of(&doc, "x") - 0.6801).abs() < 1e-3);
    assert!((value_of(&doc, "injected_db") + 10.975).abs() < 1e-2);
    let d15 = value_of(&doc, "extra_loss_15_percent_detected_db");
    assert!((d15 + 6.617).abs() < 1e-2);
    assert!(d15 <= -6.0, "15% extra loss still leaves >= 6 dB");
    assert!((value_of(&doc, "equivalent_power_factor_6db") - 3.981).abs() < 1e-2);
}

#[test]
fn fit_symmetric_pair_is_lossless() {
    let doc = run_ok(&["fit", "-3.0103", "3.0103"]);
    assert!(value_of(&doc, "loss_percent").abs() < 1e-6);
}

#[test]
fn fit_nonphysical_pair_exits_with_domain_code() {
    let out = bin().args(["fit", "-3", "2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("uncertainty"), "stderr: {stderr}");
}

#[test]
fn fit_dark_corrected_mode() {
    let doc = run_ok(&["fit", "-9", "14", "--dark-corrected"]);
    assert!((value_of(&doc, "sq_db_corrected") + 9.6476).abs() < 1e-3);
    // the common dark offset cancels in the depth ratio: x is unchanged
    assert!((value_of(&doc, "x") - 0.6801).abs() < 1e-3);
    assert!((value_of(&doc, "eta") - 0.9251).abs() < 1e-3);
}

#[test]
fn errorsignal_pdh_is_odd_with_zero_at_lock() {
    let csv = run_ok(&["errorsignal", "pdh", "--cavity", "mc532", "--points", "1001"]);
    let rows = parse_csv(&csv);
    assert_eq!(rows.len(), 1001);
    let mid = 500;
    assert_eq!(rows[mid][1], 0.0);
    for k in 1..=mid {
        let a = rows[mid - k][1];
        let b = rows[mid + k][1];
        assert!((a + b).abs() <= 1e-9 * a.abs().max(1e-12), "odd symmetry at k={k}");
    }
    // normalized and positive slope through the lock point
    let peak = rows.iter().map(|r| r[1].abs()).fold(0.0, f64::max);
    assert!((peak - 1.0).abs() < 1e-12);
    assert!(rows[mid + 1][1] > 0.0);
}

#[test]
fn errorsignal_pump_phase_is_pi_periodic() {
    let csv = run_ok(&["errorsignal", "pump-phase", "--points", "401"]);
    let rows = parse_csv(&csv);
    for k in 0..200 {
        let a = rows[k][1];
        let b = rows[k + 200][1]; // phase + pi
        assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-12), "pi periodicity at {k}");
    }
}

#[test]
fn errorsignal_pump_phase_fundamental_demod_is_flat_zero() {
    let csv = run_ok(&[
        "errorsignal",
        "pump-phase",
        "--points",
        "101",
        "--demod-harmonic",
        "1",
    ]);
    let rows = parse_csv(&csv);
    assert_eq!(rows.len(), 101);
    assert!(rows.iter().all(|r| r[1] == 0.0));
}

#[test]
fn errorsignal_lo_phase_crossings() {
    let csv = run_ok(&["errorsignal", "lo-phase", "--points", "2001"]);
    let rows = parse_csv(&csv);
    // the sweep covers one full period; count sign changes cyclically so a
    // lock point sitting exactly on the sweep edge is still one crossing
    let n = rows.len() - 1; // last sample duplicates phase 0 mod 2 pi
    let crossings = (0..n)
        .filter(|&i| (rows[i][1] < 0.0) != (rows[(i + 1) % n][1] < 0.0))
        .count();
    assert_eq!(crossings, 2);
}

#[test]
fn report_is_deterministic_modulo_timestamp() {
    let a = run_ok(&["report"]);
    let b = run_ok(&["report"]);
    let body = |s: &str| s.split_once('\n').map(|(_, rest)| rest.to_string()).unwrap();
    assert!(a.starts_with("# generated_unix_s: "));
    assert_eq!(body(&a), body(&b));
    assert!(a.contains("finesse: 75.349113"), "squeezer finesse in report");
    assert!((value_of(&a, "injected_db") + 10.975).abs() < 1e-2);
    assert!(a.contains("provenance:"));
}

#[test]
fn report_flags_empty_budget() {
    let cfg = include_str!("../configs/geo600.cfg");
    // drop the extra-loss entries
    let start = cfg.find("extra = [").unwrap();
    let end = cfg[start..].find(']').unwrap() + start + 1;
    let cfg = format!("{}extra = []{}", &cfg[..start], &cfg[end..]);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nobudget.cfg");
    std::fs::write(&path, cfg).unwrap();
    let doc = run_ok(&["--config", path.to_str().unwrap(), "report"]);
    assert!(doc.contains("budget_detected_db: missing (budget.extra is empty)"));
}

#[test]
fn loop_command_reports_residual_jitter() {
    let doc = run_ok(&["loop", "--name", "pump_phase", "--band", "10:100000"]);
    let theta = value_of(&doc, "residual_theta_rms_rad");
    let free = value_of(&doc, "free_running_theta_rms_rad");
    assert!(theta > 0.0 && theta < free);
    let before = value_of(&doc, "detected_sq_db_no_jitter");
    let after = value_of(&doc, "detected_sq_db_with_jitter");
    assert!(after > before, "jitter weakens squeezing");
    let missing = bin().args(["loop", "--name", "nope"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn loop_writes_suppression_trace() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "loop",
        "--name",
        "lo_phase",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let trace = std::fs::read_to_string(dir.path().join("loop_lo_phase_suppression.csv")).unwrap();
    let rows = parse_csv(&trace);
    assert!(!rows.is_empty());
    // suppression deep below the UGF, ~1 far above
    assert!(rows[0][1] < 0.01);
    assert!((rows.last().unwrap()[1] - 1.0).abs() < 0.01);
}

#[test]
fn config_errors_exit_2_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.cfg");
    std::fs::write(&path, "scenario = \"broken\"\n[opo]\nx = 0.5\n").unwrap();
    let out = bin()
        .args(["--config", path.to_str().unwrap(), "report"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("eta_esc") || stderr.contains("missing field"), "stderr: {stderr}");
}

#[test]
fn config_resolves_from_env_dir() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("custom.cfg"),
        include_str!("../configs/geo600.cfg").replace("scenario = \"geo600\"", "scenario = \"custom\""),
    )
    .unwrap();
    let out = bin()
        .env("SQUEEZER_SIM_CONFIG_DIR", dir.path())
        .args(["--config", "custom", "report"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc = String::from_utf8_lossy(&out.stdout);
    assert!(doc.contains("scenario: custom"));
}

#[test]
fn out_dir_receives_spectrum_files() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["spectrum", "--out", dir.path().to_str().unwrap()]);
    let csv = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert_eq!(parse_csv(&csv).len(), 151);
    let report = std::fs::read_to_string(dir.path().join("spectrum_report.txt")).unwrap();
    assert!(report.contains("rows: 151"));
}

#[test]
fn doc_format_emits_key_value_trace() {
    let doc = run_ok(&["--format", "doc", "errorsignal", "lo-phase", "--points", "5"]);
    assert!(doc.contains("error_signal:"));
    assert!(doc.contains("samples:"));
}
