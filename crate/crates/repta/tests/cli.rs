//! Binary-level tests: subcommands, exit codes, output files, and the
//! determinism of concurrent scenario runs.

use std::path::Path;
use std::process::Command;

fn repta() -> Command {
    Command::new(env!("CARGO_BIN_EXE_repta"))
}

fn write(path: &Path, contents: &str) {
    std::fs::write(path, contents).unwrap();
}

/// 72 h toy with horizon-scaled investments: fast and profitable.
fn toy_toml() -> String {
    r#"
[operation]
n = 72
dtas_h = 24.0

[economics]
invest_scale = 0.0082

[price_grid]
n_p = 16

[profiles]
seed = 9
"#
    .to_string()
}

#[test]
fn run_writes_report_schedule_and_robust_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    write(&cfg, &(toy_toml() + "\n[run]\nbetas = [0.0, 0.4]\n"));
    let out = dir.path().join("out");
    let status = repta()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("run_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["scenario"], "Proposed");
    assert!(report["dtr_1e4_rmb"].as_f64().is_some());
    assert_eq!(report["validation"]["schedule_violations"].as_array().unwrap().len(), 0);
    // external price-report field names
    let prices = &report["prices"];
    for key in ["p_Inner", "p_H2_Inner", "E_AE_Inner", "E_AS_Inner", "ER_RG", "ER_AEHS", "ER_AS", "deviation_sum"] {
        assert!(prices.get(key).is_some(), "missing price field {key}");
    }
    let schedule = std::fs::read_to_string(out.join("schedule.csv")).unwrap();
    assert!(schedule.starts_with("hour,P_W,P_S,P_sell,P_purch,P_curt,P_AE,P_AS,q_in,q_out,n_sto"));
    assert_eq!(schedule.lines().count(), 73);
    let robust = std::fs::read_to_string(out.join("robust.csv")).unwrap();
    assert_eq!(robust.lines().count(), 3, "2 beta rows plus header");
}

#[test]
fn missing_profile_file_is_config_error_without_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    write(
        &cfg,
        "[profiles]\nsource = \"csv\"\ncsv_path = \"/nonexistent/profiles.csv\"\n",
    );
    let out = dir.path().join("out");
    let output = repta()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(4), "config errors exit 4");
    assert!(!out.exists(), "no partial outputs on config error");
}

#[test]
fn infeasible_sizing_exits_2_with_structured_cause() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    // an electrolyzer fleet too small to feed the synthesis floor
    write(
        &cfg,
        &(toy_toml() + "\n[bounds]\nn_ae_max = 2\n"),
    );
    let out = dir.path().join("out");
    let output = repta()
        .args(["size", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2), "infeasible exits 2");
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(
        stderr.contains("relaxing"),
        "structured cause names the binding family: {stderr}"
    );
}

#[test]
fn sweep_rejects_non_divisor_period() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    write(&cfg, &toy_toml());
    let output = repta()
        .args(["sweep", "--dtas", "7", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(4));
}

#[test]
fn bench_concurrent_csv_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    write(&cfg, &toy_toml());
    let read_bench = |out: &Path| -> String {
        let status = repta()
            .args(["bench", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read_to_string(out.join("bench.csv")).unwrap()
    };
    let a = read_bench(&dir.path().join("a"));
    let b = read_bench(&dir.path().join("b"));
    // identical up to the wall-clock column
    let strip_wall = |csv: &str| -> String {
        csv.lines()
            .map(|l| l.rsplit_once(',').map(|(head, _)| head.to_string()).unwrap_or_default())
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(
        strip_wall(&a),
        strip_wall(&b),
        "concurrent scenario fan-out must stay deterministic"
    );
    // solar-only lags the full design on these profiles
    let rows: Vec<&str> = a.lines().collect();
    let dtr = |name: &str| -> f64 {
        rows.iter()
            .find(|r| r.starts_with(name))
            .unwrap()
            .split(',')
            .nth(12)
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!(dtr("bs2") < dtr("proposed"));
    assert!(dtr("bs4") < dtr("proposed"));
}

#[test]
fn exhausted_time_limit_without_incumbent_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    write(
        &cfg,
        "[operation]\nn = 336\ndtas_h = 24.0\n\n[solver]\ntime_limit_s = 0.001\n",
    );
    let output = repta()
        .args(["size", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3), "limit without incumbent exits 3");
}

#[test]
fn fit_subcommand_reads_config_referenced_csv() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("obs.csv");
    let mut rows = String::from("hour,flow\n");
    for i in 0..24 {
        let v = 1980.0 - 1100.0 * (-(i as f64) / 2.066).exp();
        rows.push_str(&format!("{i},{v}\n"));
    }
    write(&data, &rows);
    let cfg = dir.path().join("cfg.toml");
    write(
        &cfg,
        &format!(
            "[fit]\ncsv_path = \"{}\"\nunit = \"kg_per_h\"\nq_start = 880.0\nq_end = 1980.0\n",
            data.display()
        ),
    );
    let out = dir.path().join("out");
    let output = repta()
        .args(["fit", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success());
    let fit: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("fit.json")).unwrap()).unwrap();
    let t = fit["t_trans_h"].as_f64().unwrap();
    assert!((t - 2.066).abs() < 1e-3, "T = {t}");
}

#[test]
fn rerun_reproduces_identical_objectives() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    write(&cfg, &toy_toml());
    let run = |out: &Path| -> serde_json::Value {
        let status = repta()
            .args(["run", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
        serde_json::from_str(&std::fs::read_to_string(out.join("run_report.json")).unwrap())
            .unwrap()
    };
    let a = run(&dir.path().join("a"));
    let b = run(&dir.path().join("b"));
    assert_eq!(a["dtr_1e4_rmb"], b["dtr_1e4_rmb"]);
    assert_eq!(a["prices"]["p_Inner"], b["prices"]["p_Inner"]);
    assert_eq!(a["prices"]["deviation_sum"], b["prices"]["deviation_sum"]);
}
