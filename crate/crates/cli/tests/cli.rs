use std::path::PathBuf;
use std::process::{Command, Output};

fn qet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qet"))
        .args(args)
        .env_remove("QET_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("qet-cli-{}-{name}", std::process::id()))
}

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn run_reports_analytic_reference() {
    let out = stdout(&qet(&[
        "run", "--h", "1", "--k", "1", "--target", "V", "--shots", "100000", "--seed", "7",
    ]));
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    assert!((v["analytic"].as_f64().unwrap() + 0.3746).abs() < 1e-4);
    assert!(out.contains("\"analytic\": -0.374641"));
    let sigma = v["deviation_sigma"].as_f64().unwrap();
    assert!(sigma.abs() < 5.0);
}

#[test]
fn run_is_byte_identical() {
    let args = [
        "run",
        "--target",
        "E1",
        "--shots",
        "5000",
        "--seed",
        "3",
        "--noise",
        "lima-like",
        "--mitigation",
        "least-squares",
    ];
    assert_eq!(qet(&args).stdout, qet(&args).stdout);
}

#[test]
fn zero_shots_is_a_config_error() {
    let out = qet(&["run", "--shots", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("shots"));
}

#[test]
fn bad_values_exit_two() {
    for args in [
        vec!["run", "--h", "-1"],
        vec!["run", "--target", "E7"],
        vec!["run", "--noise", "mystery-device"],
        vec!["run", "--mode", "sometimes"],
        vec!["sweep", "--grid-h", "0,1"],
        vec!["evolve", "--t-steps", "0"],
    ] {
        assert_eq!(qet(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn singular_calibration_with_direct_inverse_exits_three() {
    // Both qubits always read 1, so every calibration column is e_11.
    let out = qet(&[
        "run",
        "--noise",
        "1,0,1,0",
        "--mitigation",
        "direct",
        "--shots",
        "200",
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let ok = qet(&[
        "run",
        "--noise",
        "1,0,1,0",
        "--mitigation",
        "least-squares",
        "--shots",
        "200",
    ]);
    assert!(ok.status.success());
}

#[test]
fn seed_env_is_default_and_flag_wins() {
    let with_env = |seed: &str, extra: &[&str]| {
        let mut args = vec!["run", "--shots", "1000"];
        args.extend_from_slice(extra);
        let out = Command::new(env!("CARGO_BIN_EXE_qet"))
            .args(&args)
            .env("QET_SEED", seed)
            .output()
            .unwrap();
        json(&stdout(&out))["seed"].as_u64().unwrap()
    };
    assert_eq!(with_env("42", &[]), 42);
    assert_eq!(with_env("42", &["--seed", "5"]), 5);
}

#[test]
fn sweep_single_cell_row() {
    let out = stdout(&qet(&["sweep", "--grid-h", "1", "--grid-k", "1"]));
    assert_eq!(out, "h,k,V,H1\n1.000000,1.000000,-0.374641,0.259893\n");
}

#[test]
fn sweep_default_grid_signs() {
    let out = stdout(&qet(&["sweep"]));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 2501);
    for row in &rows[1..] {
        let v: f64 = row[2].parse().unwrap();
        let h1: f64 = row[3].parse().unwrap();
        assert!(v < 0.0 && h1 > 0.0, "{row:?}");
    }
    assert!(!out.contains('\r'));
}

#[test]
fn evolve_matches_closed_form() {
    let out = stdout(&qet(&["evolve", "--h", "1.5", "--k", "1"]));
    let rows = csv_rows(&out);
    assert_eq!(rows[0], ["t", "H1_numeric", "H1_closed_form", "V_numeric"]);
    assert_eq!(rows.len(), 102);
    assert_eq!(rows[1], ["0.000000"; 4]);
    for row in &rows[1..] {
        assert_eq!(row[1], row[2]);
        assert_eq!(row[3], "0.000000");
    }
}

#[test]
fn six_decimal_output_round_trips() {
    let (h, k) = (1.0f64, 0.7f64);
    let out = stdout(&qet(&[
        "evolve",
        "--h",
        "1",
        "--k",
        "0.7",
        "--t-steps",
        "37",
    ]));
    let norm = (h * h + k * k).sqrt();
    let t_max = std::f64::consts::TAU / k;
    for (i, row) in csv_rows(&out)[1..].iter().enumerate() {
        let t = t_max * i as f64 / 36.0;
        let exact = h * h * (1.0 - (4.0 * k * t).cos()) / (2.0 * norm);
        let printed: Vec<f64> = row.iter().map(|v| v.parse().unwrap()).collect();
        assert!((printed[0] - t).abs() <= 5e-7, "{row:?}");
        assert!((printed[1] - exact).abs() <= 5e-7, "{row:?}");
    }
}

// Reference values rounded to four decimals; 0.7071 is 1/√2.
#[allow(clippy::approx_constant)]
#[test]
fn report_analytic_column_matches_table() {
    let out = stdout(&qet(&["report", "--shots", "2000"]));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 17);
    let expected = [
        ("0.200000", [0.9806, 0.0521, -0.0701, -0.0180]),
        ("0.500000", [0.8944, 0.1873, -0.2598, -0.0726]),
        ("1.000000", [0.7071, 0.2598, -0.3746, -0.1147]),
        ("1.000000", [1.2481, 0.3480, -0.4905, -0.1425]),
    ];
    for (i, (k, values)) in expected.iter().enumerate() {
        for (j, value) in values.iter().enumerate() {
            let row = &rows[1 + 4 * i + j];
            assert_eq!(&row[1], k);
            let analytic: f64 = row[3].parse().unwrap();
            assert!((analytic - value).abs() <= 1e-4, "{row:?}");
        }
    }
}

#[test]
fn report_without_noise_collapses_columns() {
    let out = stdout(&qet(&[
        "report",
        "--shots",
        "3000",
        "--noise",
        "none",
        "--mitigation",
        "none",
    ]));
    for row in &csv_rows(&out)[1..] {
        assert_eq!(row[4], row[6]);
        assert_eq!(row[6], row[8]);
        assert_eq!(row[5], row[9]);
    }
}

#[test]
fn report_mitigated_v_is_negative_with_lima_noise() {
    let out = stdout(&qet(&[
        "report",
        "--noise",
        "lima-like",
        "--format",
        "json",
    ]));
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    let rows = v["rows"].as_array().unwrap();
    let v_rows: Vec<_> = rows.iter().filter(|r| r["quantity"] == "V").collect();
    assert_eq!(v_rows.len(), 4);
    for r in v_rows {
        assert!(r["mitigated"]["mean"].as_f64().unwrap() < 0.0, "{r}");
    }
}

#[test]
fn mitigate_demo_prints_calibration_matrix() {
    let out = stdout(&qet(&["mitigate-demo", "--shots", "20000"]));
    assert!(out.contains("calibration matrix"));
    let matrix_rows: Vec<&str> = out
        .lines()
        .skip_while(|l| !l.starts_with("calibration matrix"))
        .skip(1)
        .take(4)
        .collect();
    for row in &matrix_rows {
        let values: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(values.len(), 4);
    }
    let demo = json(&stdout(&qet(&[
        "mitigate-demo",
        "--shots",
        "20000",
        "--format",
        "json",
    ])));
    let fidelity = demo["measurement_fidelity"].as_f64().unwrap();
    assert!((fidelity - (1.0 - 0.0196) * (1.0 - 0.013)).abs() < 0.005);
}

#[test]
fn config_file_with_flag_override_and_out_file() {
    let config = temp_path("config.toml");
    let out_file = temp_path("out.json");
    std::fs::write(
        &config,
        "h = 1.5\nk = 1\ntarget = \"H1\"\nshots = 4000\nseed = 11\nmode = \"deferred\"\n",
    )
    .unwrap();
    let out = stdout(&qet(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "12",
        "--out",
        out_file.to_str().unwrap(),
    ]));
    let v = json(&out);
    assert_eq!(v["h"].as_f64(), Some(1.5));
    assert_eq!(v["target"], "H1");
    assert_eq!(v["mode"], "deferred");
    assert_eq!(v["shots"], 4000);
    assert_eq!(v["seed"], 12);
    assert_eq!(std::fs::read_to_string(&out_file).unwrap(), out);
    std::fs::remove_file(config).ok();
    std::fs::remove_file(out_file).ok();
}

#[test]
fn unknown_config_key_exits_two() {
    let config = temp_path("bad.toml");
    std::fs::write(&config, "shotz = 10\n").unwrap();
    let out = qet(&["run", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_file(config).ok();
}
