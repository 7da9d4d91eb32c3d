//! End-to-end tests of the `airyline` binary: output contracts, error
//! categories and exit codes, determinism across runs and thread counts.

use std::path::PathBuf;
use std::process::Command;

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run_with<F: FnOnce(&mut Command)>(args: &[&str], tweak: F) -> Out {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_airyline"));
    cmd.args(args);
    tweak(&mut cmd);
    let out = cmd.output().expect("binary runs");
    Out {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).expect("utf-8 stdout"),
        stderr: String::from_utf8(out.stderr).expect("utf-8 stderr"),
    }
}

fn run(args: &[&str]) -> Out {
    run_with(args, |_| {})
}

fn run_ok(args: &[&str]) -> String {
    let out = run(args);
    assert_eq!(out.code, 0, "command {args:?} failed: {}", out.stderr);
    out.stdout
}

/// Fresh per-test scratch directory.
fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("airyline-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).expect("scratch dir");
    dir
}

fn write_config(dir: &PathBuf, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).expect("config written");
    path.to_string_lossy().into_owned()
}

const MARGINAL_CONFIG: &str = r#"{
  "times": [
    { "time": 0.0, "intervals": [ { "interval": [-2.0, 0.0], "z": [0.25, 0.1] } ] },
    { "time": 1.5, "intervals": [ { "interval": [-1.0, "inf"], "z": [1.0, 0.0] } ] }
  ]
}"#;

const SINGLE_CONFIG: &str = r#"{
  "times": [
    { "time": 0.0, "intervals": [ { "interval": [-1.0, 1.0], "z": [0.5, 0.0] } ] }
  ]
}"#;

#[test]
fn airy_prints_known_values_in_full_precision() {
    let stdout = run_ok(&["airy", "--x", "0"]);
    assert!(stdout.contains("ai       = 0.3550280538878172"), "{stdout}");
    assert!(stdout.contains("ai_prime = -0.2588194037928068"), "{stdout}");
}

#[test]
fn kernel_prints_value_and_nonnegative_estimate() {
    let stdout = run_ok(&["kernel", "--s", "1", "--x", "-0.5", "--t", "0", "--y", "0.25"]);
    let mut value = f64::NAN;
    let mut estimate = f64::NAN;
    for line in stdout.lines() {
        if let Some(rest) = line.strip_prefix("value") {
            value = rest.trim_start_matches([' ', '=']).trim().parse().unwrap();
        }
        if let Some(rest) = line.strip_prefix("error_estimate") {
            estimate = rest.trim_start_matches([' ', '=']).trim().parse().unwrap();
        }
    }
    assert!(value.is_finite(), "{stdout}");
    assert!(estimate >= 0.0 && estimate < 1e-6, "{stdout}");
}

#[test]
fn genfun_emits_the_documented_csv_row() {
    let dir = scratch("genfun");
    let all_ones = r#"{
      "times": [
        { "time": 0.0, "intervals": [
          { "interval": [-2.0, 0.0], "z": [1.0, 0.0] },
          { "interval": [1.0, "inf"], "z": [1.0, 0.0] }
        ] }
      ]
    }"#;
    let cfg = write_config(&dir, "ones.json", all_ones);
    let stdout = run_ok(&["genfun", "--config", &cfg]);
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some("value_re,value_im,error_estimate,nodes_used"));
    let cells: Vec<&str> = lines.next().expect("data row").split(',').collect();
    // every weight 1 leaves the state unweighted: determinant exactly 1
    assert_eq!(cells[0], "1");
    assert_eq!(cells[1], "0");
    assert_eq!(cells[2].parse::<f64>().unwrap(), 0.0);
    assert!(cells[3].parse::<usize>().unwrap() >= 16);
}

#[test]
fn tw2_emits_increasing_cdf_values_and_an_svg_plot() {
    let stdout = run_ok(&["tw2", "--from", "-1", "--to", "0", "--step", "0.5"]);
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some("s,F2"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let mut it = l.split(',');
            (
                it.next().unwrap().parse().unwrap(),
                it.next().unwrap().parse().unwrap(),
            )
        })
        .collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0].0, -1.0);
    assert_eq!(rows[2].0, 0.0);
    assert!(rows.windows(2).all(|w| w[0].1 < w[1].1), "distribution function must increase");
    assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.1)));

    let svg = run_ok(&["tw2", "--from", "-1", "--to", "0", "--step", "0.5", "--format", "svg"]);
    assert!(svg.starts_with("<svg"), "svg output");
    assert!(svg.contains("<polyline"));
    assert!(svg.trim_end().ends_with("</svg>"));
}

#[test]
fn counts_rows_are_a_probability_distribution() {
    let dir = scratch("counts");
    let cfg = write_config(&dir, "marginal.json", MARGINAL_CONFIG);
    let stdout = run_ok(&["counts", "--config", &cfg, "--k-max", "8"]);
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some("k,probability"));
    let probs: Vec<f64> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(probs.len(), 9);
    assert!(probs.iter().all(|&p| (-1e-12..=1.0).contains(&p)));
    let total: f64 = probs.iter().sum();
    assert!((total - 1.0).abs() < 1e-6, "total {total}");
}

#[test]
fn mixing_emits_the_documented_header_and_identical_bytes_across_runs() {
    let dir = scratch("mixing");
    let cfg = write_config(&dir, "single.json", SINGLE_CONFIG);
    let args = ["mixing", "--config", &cfg, "--shifts", "1,2,4"];
    let first = run_ok(&args);
    let mut lines = first.lines();
    assert_eq!(
        lines.next(),
        Some("T,R_re,R_im,abs_R,det_joint,det_left,det_right")
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    // the remainder magnitude must shrink along the ladder
    assert!(rows[2][3] < rows[0][3]);
    // factor determinants are shift-invariant for a symmetric experiment
    assert_eq!(rows[0][5], rows[1][5]);
    assert_eq!(rows[0][6], rows[2][6]);

    let second = run_ok(&args);
    assert_eq!(first, second, "same inputs must give identical bytes");
}

#[test]
fn trace_decay_reports_consistent_products() {
    let stdout = run_ok(&["trace-decay", "--ys", "1,2", "--nodes", "64"]);
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some("y,trace_norm,y_times_norm"));
    for line in lines {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!(cells[1] > 0.0);
        assert_eq!(cells[0] * cells[1], cells[2]);
    }
}

#[test]
fn gibbs_check_reports_json_and_depends_only_on_the_seed() {
    let args = ["gibbs-check", "--k", "2", "--grid", "16", "--samples", "200", "--seed", "5"];
    let first = run_ok(&args);
    let report: serde_json::Value = serde_json::from_str(&first).expect("json report");
    let ks = report["ks_stat"].as_f64().expect("ks_stat");
    let p = report["p_value"].as_f64().expect("p_value");
    let acc = report["acceptance_rate"].as_f64().expect("acceptance_rate");
    assert!((0.0..=1.0).contains(&ks));
    assert!((0.0..=1.0).contains(&p));
    assert!((0.0..=1.0).contains(&acc));

    assert_eq!(first, run_ok(&args), "same seed, same bytes");
    let other = run_ok(&[
        "gibbs-check", "--k", "2", "--grid", "16", "--samples", "200", "--seed", "6",
    ]);
    assert_ne!(first, other, "different seeds explore different samples");
}

#[test]
fn gue_edge_appends_a_mean_summary_row_and_respects_the_seed() {
    let args = ["gue-edge", "--n", "60", "--samples", "8", "--seed", "3"];
    let first = run_ok(&args);
    let lines: Vec<&str> = first.lines().collect();
    assert_eq!(lines[0], "index,value");
    assert_eq!(lines.len(), 10, "8 samples, header, summary");
    let values: Vec<f64> = lines[1..9]
        .iter()
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    let summary: Vec<&str> = lines[9].split(',').collect();
    assert_eq!(summary[0], "mean");
    let mean: f64 = summary[1].parse().unwrap();
    assert_eq!(mean, values.iter().sum::<f64>() / values.len() as f64);

    assert_eq!(first, run_ok(&args));
    assert_ne!(
        first,
        run_ok(&["gue-edge", "--n", "60", "--samples", "8", "--seed", "4"])
    );
}

#[test]
fn schema_violations_name_the_offending_field() {
    let dir = scratch("schema");
    let cfg = write_config(
        &dir,
        "unknown.json",
        r#"{ "times": [ { "time": 0.0, "intervals": [ { "interval": [-1.0, 1.0], "z": [0.0, 0.0], "weight": 3 } ] } ] }"#,
    );
    let out = run(&["genfun", "--config", &cfg]);
    assert_eq!(out.code, 11, "{}", out.stderr);
    assert!(out.stderr.starts_with("error[config]"), "{}", out.stderr);
    assert!(out.stderr.contains("unknown field `weight`"), "{}", out.stderr);
    assert!(out.stderr.contains("line"), "schema errors carry a location: {}", out.stderr);
}

#[test]
fn weights_outside_the_unit_disk_are_rejected() {
    let dir = scratch("disk");
    let cfg = write_config(
        &dir,
        "big-z.json",
        r#"{ "times": [ { "time": 0.0, "intervals": [ { "interval": [-1.0, 1.0], "z": [1.5, 0.0] } ] } ] }"#,
    );
    let out = run(&["genfun", "--config", &cfg]);
    assert_eq!(out.code, 11);
    assert!(out.stderr.contains("|z| exceeds 1"), "{}", out.stderr);
}

#[test]
fn overlapping_intervals_are_rejected_naming_both() {
    let dir = scratch("overlap");
    let cfg = write_config(
        &dir,
        "overlap.json",
        r#"{ "times": [ { "time": 0.0, "intervals": [
            { "interval": [-1.0, 0.5], "z": [0.0, 0.0] },
            { "interval": [0.0, 2.0], "z": [0.0, 0.0] }
        ] } ] }"#,
    );
    let out = run(&["genfun", "--config", &cfg]);
    assert_eq!(out.code, 11);
    assert!(out.stderr.contains("intervals 0 [-1, 0.5] and 1 [0, 2] overlap"), "{}", out.stderr);
    assert!(out.stderr.contains("pairwise disjoint"), "{}", out.stderr);
}

#[test]
fn infinite_lower_endpoints_are_rejected() {
    let dir = scratch("lower");
    let cfg = write_config(
        &dir,
        "lower.json",
        r#"{ "times": [ { "time": 0.0, "intervals": [ { "interval": ["inf", 1.0], "z": [0.0, 0.0] } ] } ] }"#,
    );
    let out = run(&["genfun", "--config", &cfg]);
    assert_eq!(out.code, 11);
    assert!(out.stderr.contains("bounded below"), "{}", out.stderr);
}

#[test]
fn error_categories_map_to_stable_exit_codes() {
    // domain: non-finite argument
    let out = run(&["airy", "--x", "nan"]);
    assert_eq!(out.code, 10, "{}", out.stderr);
    assert!(out.stderr.starts_with("error[domain]"), "{}", out.stderr);

    // io: missing config file
    let out = run(&["genfun", "--config", "/nonexistent/nowhere.json"]);
    assert_eq!(out.code, 15, "{}", out.stderr);
    assert!(out.stderr.starts_with("error[io]"), "{}", out.stderr);

    // config: unsupported output format
    let dir = scratch("format");
    let cfg = write_config(&dir, "single.json", SINGLE_CONFIG);
    let out = run(&["counts", "--config", &cfg, "--format", "svg"]);
    assert_eq!(out.code, 11, "{}", out.stderr);
    assert!(out.stderr.contains("not supported"), "{}", out.stderr);
}

#[test]
fn golden_roundtrip_passes_and_detects_drift() {
    let dir = scratch("golden");
    let dir_s = dir.to_string_lossy().into_owned();
    run_ok(&["golden", "--only", "airy", "--update", "--dir", &dir_s]);

    let check = run_ok(&["golden", "--only", "airy", "--dir", &dir_s]);
    assert!(check.contains("0 drifted"), "{check}");
    assert!(check.contains("airy/ai(0): baseline"), "per-value report: {check}");

    // corrupt one stored value and expect a reported drift
    let path = dir.join("airy.json");
    let text = std::fs::read_to_string(&path).unwrap();
    let broken = text.replacen("0.3550280538878172", "0.36", 1);
    assert_ne!(text, broken, "fixture must contain the value");
    std::fs::write(&path, broken).unwrap();
    let out = run(&["golden", "--only", "airy", "--dir", &dir_s]);
    assert_eq!(out.code, 13, "{}", out.stderr);
    assert!(out.stdout.contains("DRIFT"), "{}", out.stdout);
    assert!(out.stderr.contains("golden drift"), "{}", out.stderr);
}

#[test]
fn thread_cap_never_changes_the_bytes() {
    let one = run_ok(&["tw2", "--from", "-1", "--to", "0", "--step", "0.25", "--threads", "1"]);
    let two = run_ok(&["tw2", "--from", "-1", "--to", "0", "--step", "0.25", "--threads", "2"]);
    assert_eq!(one, two);

    let via_env = run_with(
        &["tw2", "--from", "-1", "--to", "0", "--step", "0.25"],
        |cmd| {
            cmd.env("AIRYLINE_THREADS", "2");
        },
    );
    assert_eq!(via_env.code, 0, "{}", via_env.stderr);
    assert_eq!(via_env.stdout, one);

    let bad = run_with(&["airy", "--x", "0"], |cmd| {
        cmd.env("AIRYLINE_THREADS", "many");
    });
    assert_eq!(bad.code, 11, "{}", bad.stderr);
    assert!(bad.stderr.contains("AIRYLINE_THREADS"), "{}", bad.stderr);
}

#[test]
fn outputs_can_be_written_to_files() {
    let dir = scratch("outfile");
    let path = dir.join("tw2.csv");
    let path_s = path.to_string_lossy().into_owned();
    let stdout = run_ok(&["tw2", "--from", "0", "--to", "1", "--step", "0.5", "--out", &path_s]);
    assert!(stdout.is_empty(), "file mode writes nothing to stdout");
    let written = std::fs::read_to_string(&path).unwrap();
    assert!(written.starts_with("s,F2\n"));

    let out = run(&["tw2", "--from", "0", "--to", "1", "--step", "0.5", "--out", "/nonexistent/dir/x.csv"]);
    assert_eq!(out.code, 15);
    assert!(out.stderr.starts_with("error[io]"), "{}", out.stderr);
}
