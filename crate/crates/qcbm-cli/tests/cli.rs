//! End-to-end checks of the `qcbm` binary: exit codes, config error
//! messages, output file shapes, and manifest re-runs.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qcbm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcbm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn small_sweep_config() -> &'static str {
    r#"{
  "kind": "f_switch",
  "n_qubits": 2,
  "target": { "type": "qcbm_random", "depth": 1, "seed": 3 },
  "model_depth": 2,
  "train": { "epochs": 3 },
  "seeds": [1, 2]
}"#
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).to_string()
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

#[test]
fn list_divergences_prints_the_registry_identifiers() {
    let output = qcbm(&["list-divergences"]);
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    let names: Vec<&str> = stdout.lines().collect();
    assert_eq!(names.len(), 11);
    assert!(names.contains(&"tv"));
    assert!(names.contains(&"kl_i_rev"));
    assert!(names.contains(&"pearson_sym"));
}

#[test]
fn config_errors_exit_2_and_name_the_problem() {
    let dir = tempfile::tempdir().unwrap();

    let output = qcbm(&["run", "no_such_file.json"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("cannot read"));

    let unknown_field = small_sweep_config().replace("\"model_depth\": 2", "\"depth\": 2");
    let path = write_config(dir.path(), "unknown_field.json", &unknown_field);
    let output = qcbm(&["run", &path]);
    assert_eq!(output.status.code(), Some(2));
    let message = stderr_of(&output);
    assert!(message.contains("unknown field"), "{message}");
    assert!(message.contains("line"), "{message}");

    let path = write_config(dir.path(), "no_output.json", small_sweep_config());
    let output = qcbm(&["run", &path]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("--out"));

    let bad_kind = small_sweep_config().replace("f_switch", "f_other");
    let path = write_config(dir.path(), "bad_kind.json", &bad_kind);
    let output = qcbm(&["run", &path, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("unknown experiment kind `f_other`"));
}

#[test]
fn dry_run_validates_and_writes_only_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "sweep.json", small_sweep_config());
    let out = dir.path().join("run");
    let output = qcbm(&["run", &config, "--out", out.to_str().unwrap(), "--dry-run"]);
    assert!(output.status.success(), "{}", stderr_of(&output));

    let entries: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(entries, vec!["manifest.json"]);

    let manifest: serde_json::Value = serde_json::from_str(&read(&out.join("manifest.json"))).unwrap();
    assert_eq!(manifest["regime"], "O(8,12)");
    assert_eq!(manifest["config"]["seeds"], serde_json::json!([1, 2]));
    assert!(manifest["version"].as_str().unwrap().starts_with("qcbm-cli"));
    assert!(manifest["wall_time_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn sweeps_emit_per_seed_and_summary_csvs_with_documented_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "sweep.json", small_sweep_config());
    let out = dir.path().join("run");
    let output = qcbm(&["run", &config, "--out", out.to_str().unwrap(), "--charts"]);
    assert!(output.status.success(), "{}", stderr_of(&output));

    // 12 parameters at n=2, depth 2: one chosen-generator column each.
    let seed_csv = read(&out.join("seed_1.csv"));
    let mut lines = seed_csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.len(), 3 + 12);
    assert_eq!(&header[..3], &["epoch", "exact_tv", "exact_kl"]);
    assert_eq!(header[3], "chosen_0");
    assert_eq!(header[14], "chosen_11");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    let first: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(first[0], "1");
    assert!(first[1].parse::<f64>().unwrap() >= 0.0);
    assert!(first[3].chars().all(|c| c.is_ascii_lowercase() || c == '_' || c.is_ascii_digit()));
    assert!(out.join("seed_2.csv").exists());

    let summary = read(&out.join("summary.csv"));
    let mut lines = summary.lines();
    assert_eq!(
        lines.next().unwrap(),
        "epoch,tv_median,tv_p5,tv_p95,kl_median,kl_p5,kl_p95"
    );
    assert_eq!(lines.count(), 3);

    for chart in ["tv.svg", "kl.svg"] {
        assert!(read(&out.join(chart)).contains("</svg>"));
    }
}

#[test]
fn manifest_reruns_reproduce_every_csv_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "sweep.json", small_sweep_config());
    let first = dir.path().join("first");
    let output = qcbm(&["run", &config, "--out", first.to_str().unwrap()]);
    assert!(output.status.success(), "{}", stderr_of(&output));

    let second = dir.path().join("second");
    let manifest = first.join("manifest.json");
    let output = qcbm(&[
        "run",
        manifest.to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));

    for name in ["seed_1.csv", "seed_2.csv", "summary.csv"] {
        let a = fs::read(first.join(name)).unwrap();
        let b = fs::read(second.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between original and manifest re-run");
    }
}

#[test]
fn seed_count_flag_replaces_the_seed_list() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "sweep.json", small_sweep_config());
    let out = dir.path().join("run");
    let output = qcbm(&[
        "run",
        &config,
        "--out",
        out.to_str().unwrap(),
        "--seed-count",
        "3",
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));
    for seed in 1..=3 {
        assert!(out.join(format!("seed_{seed}.csv")).exists());
    }
    let manifest: serde_json::Value = serde_json::from_str(&read(&out.join("manifest.json"))).unwrap();
    assert_eq!(manifest["config"]["seeds"], serde_json::json!([1, 2, 3]));
}

#[test]
fn estimate_ft_emits_trials_and_rejects_training_configs() {
    let dir = tempfile::tempdir().unwrap();
    let ft = r#"{
  "kind": "ft_estimate",
  "divergence": "tv",
  "p": [0.4, 0.3, 0.2, 0.1],
  "q": [0.25, 0.25, 0.25, 0.25],
  "accuracy": 0.2,
  "trials": 3,
  "seed": 11
}"#;
    let config = write_config(dir.path(), "ft.json", ft);
    let out = dir.path().join("ft_run");
    let output = qcbm(&["estimate-ft", &config]);
    assert_eq!(output.status.code(), Some(2), "output dir is required");

    // estimate-ft has no --out; point the config at the directory.
    let with_output = ft.replace(
        "\"seed\": 11",
        &format!("\"seed\": 11,\n  \"output\": \"{}\"", out.display()),
    );
    let config = write_config(dir.path(), "ft_out.json", &with_output);
    let output = qcbm(&["estimate-ft", &config]);
    assert!(output.status.success(), "{}", stderr_of(&output));

    let trials = read(&out.join("trials.csv"));
    let mut lines = trials.lines();
    assert_eq!(
        lines.next().unwrap(),
        "trial,estimate,truth,within_accuracy,queries_to_p,queries_to_q,executions"
    );
    let rows: Vec<Vec<String>> = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    for (index, row) in rows.iter().enumerate() {
        assert_eq!(row[0], (index + 1).to_string());
        // Exact TV(p, q) here is 0.2, printed with 17 significant digits.
        assert!((row[2].parse::<f64>().unwrap() - 0.2).abs() < 1e-12);
        assert_eq!(row[2], rows[0][2]);
        assert_eq!(row[2].len(), "2.0000000000000000e-1".len());
        assert!(row[4].parse::<u64>().unwrap() > 0);
    }

    let with_output = small_sweep_config().replace(
        "\"seeds\": [1, 2]",
        "\"seeds\": [1, 2],\n  \"output\": \"unused\"",
    );
    let sweep = write_config(dir.path(), "sweep.json", &with_output);
    let output = qcbm(&["estimate-ft", &sweep]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("requires kind ft_estimate"));
}
