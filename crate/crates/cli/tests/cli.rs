use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_causalrel"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let Output { status, stdout, stderr } = cmd.output().unwrap();
    (
        status.code().unwrap_or(-1),
        String::from_utf8(stdout).unwrap(),
        String::from_utf8(stderr).unwrap(),
    )
}

const QUICK: &str = "n_perm_hsic = 50\nn_perm_importance = 40\nn_mc_ks = 2000\nn_trees = 30\ncv = kfold:4\nseed = 3\n";

fn write_config(dir: &Path, extra: &str) -> PathBuf {
    let p = dir.join("run.cfg");
    fs::write(&p, format!("{QUICK}{extra}")).unwrap();
    p
}

fn csvs(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

#[test]
fn dsep_verdicts() {
    let (code, out, _) = run(bin().arg("dsep").arg(fixture("chain.dag")).args(["X0", "X2", "--given", "X1"]));
    assert_eq!(code, 0);
    assert_eq!(out.lines().next(), Some("d-separated"));
    assert!(out.contains("X0 _||_ X2 | {X1}"));
    let (code, out, _) = run(bin().arg("dsep").arg(fixture("collider.dag")).args(["X0", "X2", "-g", "X1"]));
    assert_eq!(code, 0);
    assert_eq!(out.lines().next(), Some("d-connected"));
    let (_, out, _) = run(bin().arg("dsep").arg(fixture("collider.dag")).args(["X0", "X2"]));
    assert_eq!(out.lines().next(), Some("d-separated"));
}

#[test]
fn dsep_input_errors_exit_2() {
    let (code, _, err) = run(bin().arg("dsep").arg(fixture("chain.dag")).args(["X0", "X0"]));
    assert_eq!(code, 2, "{err}");
    let (code, _, err) = run(bin().arg("dsep").arg(fixture("chain.dag")).args(["X0", "Q9"]));
    assert_eq!(code, 2);
    assert!(err.contains("Q9"));
    let (code, _, _) = run(bin().arg("dsep").arg("/nonexistent/g.dag").args(["A", "B"]));
    assert_eq!(code, 2);
}

#[test]
fn simulate_writes_cohort_and_oracle_table() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("chain");
    let (code, table, _) = run(bin()
        .arg("simulate")
        .arg(fixture("chain.sem"))
        .args(["--subjects", "17", "--samples", "1000", "--seed", "7", "--out"])
        .arg(&out));
    assert_eq!(code, 0);
    assert_eq!(csvs(&out).len(), 17);
    let x2 = table.lines().find(|l| l.starts_with("X2")).unwrap();
    let cols: Vec<&str> = x2.split_whitespace().collect();
    assert_eq!(cols, ["X2", "relevant", "irrelevant", "S6"]);
    let first = fs::read_to_string(out.join("subject_01.csv")).unwrap();
    assert_eq!(first.lines().next(), Some("condition,X1,X2"));
    assert_eq!(first.lines().count(), 1001);

    let again = dir.path().join("again");
    run(bin()
        .arg("simulate")
        .arg(fixture("chain.sem"))
        .args(["--subjects", "17", "--samples", "1000", "--seed", "7", "--out"])
        .arg(&again));
    for (a, b) in csvs(&out).iter().zip(csvs(&again)) {
        assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
    }
}

#[test]
fn simulate_drops_hidden_columns_and_rejects_cycles() {
    let dir = TempDir::new().unwrap();
    let (code, _, _) = run(bin().arg("simulate").arg(fixture("hidden.sem")).args(["--subjects", "2", "--samples", "20", "--out"]).arg(dir.path()));
    assert_eq!(code, 0);
    let text = fs::read_to_string(dir.path().join("subject_01.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("condition,X1,X2"));

    let cyc = dir.path().join("cyc.sem");
    fs::write(&cyc, "condition: S\nS -> A\nA -> B\nB -> A\n").unwrap();
    let (code, _, err) = run(bin().arg("simulate").arg(&cyc).args(["--out"]).arg(dir.path().join("x")));
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("cycle"));
}

#[test]
fn simulate_then_analyze_round_trip_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let subj = dir.path().join("subjects");
    run(bin().arg("simulate").arg(fixture("collider.sem")).args(["--subjects", "8", "--samples", "150", "--seed", "2", "--out"]).arg(&subj));
    let cfg = write_config(dir.path(), "");
    let analyze = |tag: &str| {
        let json = dir.path().join(format!("{tag}.json"));
        let text = dir.path().join(format!("{tag}.txt"));
        let (code, out, err) = run(bin()
            .arg("analyze")
            .arg("--config")
            .arg(&cfg)
            .arg("--json")
            .arg(&json)
            .arg("--text")
            .arg(&text)
            .args(csvs(&subj)));
        assert_eq!(code, 0, "{err}");
        assert!(out.is_empty(), "reports go to files only");
        (fs::read_to_string(json).unwrap(), fs::read_to_string(text).unwrap())
    };
    let (j1, t1) = analyze("a");
    let (j2, t2) = analyze("b");
    let strip = |s: &str, tag: &str| s.replace(&format!("{tag}.json"), "").replace(&format!("{tag}.txt"), "");
    assert_eq!(strip(&j1, "a"), strip(&j2, "b"));
    assert_eq!(strip(&t1, "a"), strip(&t2, "b"));
    assert!(j1.contains("\"schema_version\": 1"));
    assert!(j1.contains("\"seed\": 3"));
    assert!(j1.contains("\"n_perm_hsic\": 50"));
    assert!(t1.contains("KSp"));
}

#[test]
fn analyze_maps_string_labels_by_first_occurrence() {
    let dir = TempDir::new().unwrap();
    let mut files = Vec::new();
    for s in 0..2 {
        let mut text = String::from("condition,A,B\n");
        for i in 0..40 {
            let label = if (i + s) % 2 == 0 { "left" } else { "right" };
            text.push_str(&format!("{label},{},{}\n", (i * 7 % 13) as f64 / 13.0, (i % 2) as f64 + 0.1 * i as f64));
        }
        let p = dir.path().join(format!("s{s}.csv"));
        fs::write(&p, text).unwrap();
        files.push(p);
    }
    let cfg = write_config(dir.path(), "");
    let json = dir.path().join("r.json");
    let (code, _, err) = run(bin().arg("analyze").arg("-c").arg(&cfg).arg("--json").arg(&json).arg("--text").arg(dir.path().join("r.txt")).args(&files));
    assert_eq!(code, 0, "{err}");
    let report = fs::read_to_string(json).unwrap();
    assert!(report.contains("\"condition_labels\": \"left=0, right=1\""));
}

#[test]
fn analyze_input_errors() {
    let dir = TempDir::new().unwrap();
    let good = dir.path().join("good.csv");
    fs::write(&good, "condition,A\n0,1.0\n1,2.0\n0,1.5\n1,2.5\n0,0.5\n1,3.0\n").unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "condition,A\n0,1.0\n1,oops\n").unwrap();
    let (code, _, err) = run(bin().arg("analyze").arg(&bad));
    assert_eq!(code, 2);
    assert!(err.contains("bad.csv:3") && err.contains("column 2"), "{err}");

    let single = dir.path().join("single.csv");
    fs::write(&single, "condition,A\n1,1.0\n1,2.0\n1,3.0\n").unwrap();
    let (code, _, err) = run(bin().arg("analyze").arg(&single));
    assert_eq!(code, 2, "{err}");

    let other = dir.path().join("other.csv");
    fs::write(&other, "condition,B\n0,1.0\n1,2.0\n0,1.5\n1,2.5\n").unwrap();
    let (code, _, err) = run(bin().arg("analyze").arg(&good).arg(&other));
    assert_eq!(code, 2);
    assert!(err.contains("good.csv") && err.contains("other.csv"), "{err}");

    let noheader = dir.path().join("nohead.csv");
    fs::write(&noheader, "A,condition\n1.0,0\n").unwrap();
    let (code, _, _) = run(bin().arg("analyze").arg(&noheader));
    assert_eq!(code, 2);

    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "seed = 1\nn_permutations = 10\n").unwrap();
    let (code, _, err) = run(bin().arg("analyze").arg("--config").arg(&cfg).arg(&good));
    assert_eq!(code, 2);
    assert!(err.contains("n_permutations"));

    let ragged = dir.path().join("ragged.csv");
    fs::write(&ragged, "condition,A\n0,1.0\n1,2.0,3.0\n").unwrap();
    let (code, _, err) = run(bin().arg("analyze").arg(&ragged));
    assert_eq!(code, 2);
    assert!(err.contains("ragged.csv:3"), "{err}");
}

#[test]
fn replay_tables() {
    let (code, out, _) = run(bin().arg("replay").arg(data("table4.csv")).args(["--side", "decoding"]));
    assert_eq!(code, 0);
    assert!(out.contains("relevant: {IC1, IC2}\n"));
    assert!(out.contains("irrelevant: {IC3, IC4, IC5, IC6}\n"));
    let (code, out, _) = run(bin().arg("replay").arg(data("table2.csv")).args(["--side", "encoding"]));
    assert_eq!(code, 0);
    assert!(out.contains("relevant: {IC1, IC2, IC3, IC4, IC5, IC6}\n"));
}

#[test]
fn replay_rejects_out_of_range_values() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("m.csv");
    fs::write(&p, "IC1,IC2\n0.1,0.2\n0.3,1.4\n").unwrap();
    let (code, _, err) = run(bin().arg("replay").arg(&p));
    assert_eq!(code, 2);
    assert!(err.contains("m.csv:3") && err.contains("1.4"), "{err}");
    let (code, _, _) = run(bin().arg("replay").arg(data("table4.csv")).args(["--side", "sideways"]));
    assert_eq!(code, 2);
}
