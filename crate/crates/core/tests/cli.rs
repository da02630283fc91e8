use std::path::Path;
use std::process::{Command, Output};

use mopm::distributions::{draw, LawSpec};
use mopm::Seed;

fn mopm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mopm"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_normal_sample(path: &Path, n: usize) {
    let x = draw(LawSpec::normal(), n, Seed(21));
    let text: String = x.as_flat().iter().map(|v| format!("{v}\n")).collect();
    std::fs::write(path, text).unwrap();
}

#[test]
fn estimate_reports_the_plan_and_value() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("x.csv");
    write_normal_sample(&input, 1000);
    let input = input.to_str().unwrap();

    let o = mopm(&["estimate", "--input", input, "--estimator", "mom", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let line = stdout(&o).lines().next().unwrap().to_string();
    assert!(line.contains("K=7 B=142"), "{line}");
    assert!(line.contains("seed=3"));

    let o = mopm(&[
        "estimate",
        "--input",
        input,
        "--estimator",
        "moru",
        "--tau",
        "0.45",
        "--kernel",
        "variance",
        "--seed",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("K=1521 B=23"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("# resolved:"));
}

#[test]
fn estimate_is_deterministic_given_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("x.csv");
    write_normal_sample(&input, 300);
    let args = [
        "estimate",
        "--input",
        input.to_str().unwrap(),
        "--estimator",
        "mou",
        "--kernel",
        "variance",
        "--seed",
        "9",
    ];
    assert_eq!(stdout(&mopm(&args)), stdout(&mopm(&args)));
}

#[test]
fn malformed_inputs_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "1.0\nabc\n2.0\n").unwrap();
    let bad = bad.to_str().unwrap();
    let bad_toml = dir.path().join("bad.toml");
    std::fs::write(&bad_toml, "[x]\nkind = \"risk\"\nn = \"many\"\n").unwrap();
    let bad_toml = bad_toml.to_str().unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["estimate", "--input", bad, "--estimator", "mom"],
        vec![
            "estimate",
            "--input",
            "/definitely/missing.csv",
            "--estimator",
            "mom",
        ],
        vec!["estimate", "--input", bad, "--estimator", "morm"],
        vec!["plan", "--estimator", "morm", "--tau", "0.7", "--n", "100"],
        vec!["plan", "--estimator", "moru", "--n", "100"],
        vec!["risk-table", "--config", bad_toml],
        vec!["risk-table", "--config", "/definitely/missing.toml"],
        vec!["tournament", "--k-prime", "10", "--n", "100"],
        vec!["--threads", "0", "plan", "--estimator", "mom", "--n", "100"],
        vec!["no-such-command"],
    ];
    for args in cases {
        let o = mopm(&args);
        assert_eq!(
            o.status.code(),
            Some(1),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn infeasible_confidence_levels_exit_with_two() {
    let o = mopm(&["plan", "--estimator", "mou", "--n", "50", "--delta", "1e-9"]);
    assert_eq!(o.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("x.csv");
    write_normal_sample(&input, 50);
    let o = mopm(&[
        "estimate",
        "--input",
        input.to_str().unwrap(),
        "--estimator",
        "mou",
        "--kernel",
        "variance",
        "--delta",
        "1e-9",
        "--seed",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn help_and_version_exit_cleanly() {
    assert_eq!(mopm(&["--help"]).status.code(), Some(0));
    assert_eq!(mopm(&["--version"]).status.code(), Some(0));
}

#[test]
fn single_replication_risk_table_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("one.toml");
    std::fs::write(
        &cfg,
        "[one]\nkind = \"risk\"\nn = 100\nreplications = 1\nlaws = [\"normal\"]\nestimators = [\"mom\", \"mou\"]\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    std::fs::create_dir(&out).unwrap();
    let o = mopm(&[
        "risk-table",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "4",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = std::fs::read_to_string(out.join("one.csv")).unwrap();
    assert!(report.lines().count() > 1);
    let resolved = std::fs::read_to_string(out.join("one.resolved.toml")).unwrap();
    assert!(resolved.contains("seed = 4"));
}

#[test]
fn resolved_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    std::fs::create_dir(&a).unwrap();
    std::fs::create_dir(&b).unwrap();
    let o = mopm(&["tournament", "--n", "120", "--out", a.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let resolved = a.join("tournament.resolved.toml");
    let o2 = mopm(&[
        "tournament",
        "--config",
        resolved.to_str().unwrap(),
        "--out",
        b.to_str().unwrap(),
    ]);
    assert_eq!(o2.status.code(), Some(0));
    assert_eq!(
        std::fs::read(a.join("matches.csv")).unwrap(),
        std::fs::read(b.join("matches.csv")).unwrap()
    );
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/reproduce");
    let mut experiments = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let doc: toml::Table = text.parse().unwrap();
        if doc.contains_key("metric_learn") || doc.contains_key("tournament") {
            continue;
        }
        experiments += mopm::experiments::load_config(&path).unwrap().len();
    }
    assert_eq!(experiments, 5);
}

#[test]
fn shipped_demo_configs_run() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/reproduce");
    let out = tempfile::tempdir().unwrap();
    let out = out.path().to_str().unwrap();
    let gd = root.join("gd_demo.toml");
    let o = mopm(&["metric-learn", "--config", gd.to_str().unwrap(), "--steps", "10", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("steps=10"));
    let t = root.join("tournament.toml");
    let o = mopm(&["tournament", "--config", t.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("champions="));
}
