//! The `urysohn` command line: exit codes, artifacts and dry runs.

use std::path::Path;

use urysohn::cli::main_with_args;

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = main_with_args(std::iter::once("urysohn").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const QUICK_LIN1: &str = r#"
[system]
name = "LIN1"
[grid]
cells = 64
[experiment]
epsilons = [0.4, 0.2, 0.1]
sample_count = 20
family_samples = 100
seed = 3
[schedule]
r_star = 0.5
"#;

#[test]
fn run_writes_three_rows_and_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), QUICK_LIN1);
    let out = dir.path().join("out");
    let (code, stdout, stderr) = run(&["run", &config, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{stdout}{stderr}");
    let csv = std::fs::read_to_string(out.join("results.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "epsilon,alpha_star,Delta_star,delta_star,sigma_star,c_star,g1,g2,bound,sampled_max_distance,pass");
    assert_eq!(lines.len(), 4);
    for line in &lines[1..] {
        let cols: Vec<&str> = line.split(',').collect();
        let eps: f64 = cols[0].parse().unwrap();
        let bound: f64 = cols[8].parse().unwrap();
        assert!((bound - 1.628539 * eps).abs() < 1e-6);
        assert_eq!(cols[10], "true");
    }
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 3);
    assert_eq!(manifest["csv_schema"]["version"], 1);
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(manifest["experiments"].as_array().unwrap().len(), 3);
    assert!(std::fs::read_to_string(out.join("convergence.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), QUICK_LIN1);
    let out = dir.path().join("seeded");
    let (code, ..) = run(&["run", &config, "--seed", "99", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 99);
}

#[test]
fn dry_run_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), QUICK_LIN1);
    let out = dir.path().join("never");
    let (code, stdout, _) = run(&["run", &config, "--dry-run", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.contains("enumerate"));
    assert!(stdout.contains("nothing written"));
    assert!(!out.exists());
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "[experiment]\nepsilons = [0.1]\n");
    let (code, _, stderr) = run(&["run", &config]);
    assert_eq!(code, 1);
    assert!(stderr.contains("system.name"), "{stderr}");

    let (code, ..) = run(&["run", "/nonexistent/config.toml"]);
    assert_eq!(code, 1);
    let (code, ..) = run(&["run"]);
    assert_eq!(code, 1);
}

#[test]
fn numerical_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "[system]\nname = \"STRONG\"\n[grid]\ncells = 16\n[experiment]\nepsilons = [0.1]\n");
    let (code, _, stderr) = run(&["run", &config, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code, 2, "{stderr}");

    let body = "[system]\nname = \"NL2\"\n[grid]\ncells = 16\n[experiment]\nepsilons = [1.0]\nsample_count = 2\n[schedule]\nr_star = 1.0\n[solver]\nmax_iter = 1\n";
    let config = write_config(dir.path(), body);
    let (code, _, stderr) = run(&["run", &config, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code, 2, "{stderr}");
    assert!(stderr.contains("did not converge"));
}

#[test]
fn constants_verb() {
    let (code, stdout, _) = run(&["constants", "LIN1", "--grid", "32"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("0.628539"));
    let (code, stdout, _) = run(&["constants", "STRONG"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("FAILS"));
    let (code, _, stderr) = run(&["constants", "NOPE"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("NOPE"));
}
