use std::path::Path;
use std::process::{Command, Output};

fn nbtr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nbtr"))
        .args(args)
        .env_remove("CI")
        .output()
        .expect("run nbtr")
}

fn nbtr_ok(args: &[&str]) -> Output {
    let out = nbtr(args);
    assert!(
        out.status.success(),
        "nbtr {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        nbtr_ok(&["gen", "--n", "300", "--seed", "3", "--out", s(out)]);
    }
    for name in ["train.csv", "test.csv", "test_items.csv", "test_classes.csv"] {
        assert_eq!(read(&a.join(name)), read(&b.join(name)), "{name} differs");
    }
    let manifest_b = read(&b.join("manifest.json")).replace(s(&b), s(&a));
    assert_eq!(read(&a.join("manifest.json")), manifest_b);
    let header = read(&a.join("train.csv")).lines().next().unwrap().to_string();
    assert_eq!(header, "arity,2,feature_dim,16,env_dim,0");
    assert_eq!(read(&a.join("test.csv")).lines().count(), 1 + 50);
}

#[test]
fn planted_gen_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    nbtr_ok(&["gen", "--task", "planted", "--n", "500", "--items", "20", "--seed", "1", "--out", s(dir.path())]);
    for name in ["items.csv", "true_ratings.csv", "holdout.csv", "matches.csv", "match_matrix.csv"] {
        assert!(dir.path().join(name).exists(), "{name} missing");
    }
    assert_eq!(read(&dir.path().join("matches.csv")).lines().count(), 501);
    assert_eq!(read(&dir.path().join("holdout.csv")).lines().count(), 1 + 5);
}

#[test]
fn missing_required_flag_is_a_usage_error() {
    let out = nbtr(&["gen", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn manifest_records_the_rule() {
    let dir = tempfile::tempdir().unwrap();
    nbtr_ok(&["gen", "--n", "60", "--seed", "1", "--asymmetric", "--out", s(dir.path())]);
    let manifest: serde_json::Value = serde_json::from_str(&read(&dir.path().join("manifest.json"))).unwrap();
    assert_eq!(manifest["rule"]["kind"], "asymmetric");
    assert_eq!(manifest["rule"]["left_wins_if"], "1.4 * left + 0.1 > right");
    assert_eq!(manifest["seed"], 1);
    assert_eq!(manifest["tool"], "nbtr");
}

#[test]
fn train_is_deterministic_and_rates_items() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    nbtr_ok(&["gen", "--n", "600", "--seed", "2", "--out", s(d)]);
    let mut checkpoints = Vec::new();
    for name in ["m1.json", "m2.json"] {
        let model = d.join(name);
        nbtr_ok(&[
            "train", "--data", s(&d.join("train.csv")), "--test", s(&d.join("test.csv")),
            "--dims", "8", "--epochs", "2", "--seed", "4", "--out", s(&model),
        ]);
        checkpoints.push(read(&model));
    }
    assert_eq!(checkpoints[0], checkpoints[1]);
    let report = read(&d.join("m1.report.csv"));
    let lines: Vec<_> = report.lines().collect();
    assert_eq!(lines[0], "epoch,train_loss,val_accuracy,test_accuracy");
    assert_eq!(lines.len(), 3);
    assert!(lines[2].split(',').nth(3).is_some_and(|f| !f.is_empty()));
    assert!(d.join("m1.manifest.json").exists());

    let rated = nbtr_ok(&["rate", "--model", s(&d.join("m1.json")), "--items", s(&d.join("test_items.csv"))]);
    let text = String::from_utf8(rated.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("item_id,rating"));
    assert_eq!(text.lines().count(), 1 + read(&d.join("test_items.csv")).lines().count());

    let eval = nbtr_ok(&[
        "eval", "--model", s(&d.join("m1.json")), "--data", s(&d.join("test.csv")),
        "--items", s(&d.join("test_items.csv")), "--classes", s(&d.join("test_classes.csv")),
    ]);
    let text = String::from_utf8(eval.stdout).unwrap();
    assert!(text.starts_with("accuracy,"), "{text}");
}

#[test]
fn mle_on_balanced_matrix_gives_equal_scores() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.csv");
    std::fs::write(&m, "n,2\n0,5\n5,0\n").unwrap();
    let out = nbtr_ok(&["mle", "--matrix", s(&m)]);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 2);
    for r in rows {
        assert!((r[1] - 1.0).abs() < 1e-9);
        assert!((r[2] - 1500.0).abs() < 1e-6);
    }
}

#[test]
fn mle_reports_ford_failure() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.csv");
    std::fs::write(&m, "n,3\n0,3,2\n0,0,1\n0,1,0\n").unwrap();
    let out = nbtr(&["mle", "--matrix", s(&m)]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("Ford") && err.contains("[0]"), "{err}");
}

#[test]
fn elo_on_empty_history_is_all_beta() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.csv");
    std::fs::write(&h, "i,j,winner\n").unwrap();
    let out = nbtr_ok(&["elo", "--history", s(&h), "--n", "3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "item_id,elo\n0,1500\n1,1500\n2,1500\n");
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let conf = d.join("gen.conf");
    std::fs::write(&conf, "# digits\nn = 60\nseed = 5\nasymmetric = true\n").unwrap();
    nbtr_ok(&["--config", s(&conf), "gen", "--seed", "6", "--out", s(d)]);
    let manifest: serde_json::Value = serde_json::from_str(&read(&d.join("manifest.json"))).unwrap();
    assert_eq!(manifest["seed"], 6);
    assert_eq!(manifest["config"]["n"], 60);
    assert_eq!(manifest["rule"]["kind"], "asymmetric");

    std::fs::write(&conf, "n = 60\nbogus = 1\n").unwrap();
    let out = nbtr(&["--config", s(&conf), "gen", "--out", s(d)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ci_requires_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_nbtr"))
        .args(["gen", "--n", "10", "--out", s(dir.path())])
        .env("CI", "true")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("train.csv").exists());
}

#[test]
fn ablation_reports_three_structures() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    nbtr_ok(&["gen", "--n", "6000", "--seed", "8", "--asymmetric", "--out", s(d)]);
    let report = d.join("ablation.csv");
    let out = nbtr_ok(&[
        "eval", "--ablation", "--train", s(&d.join("train.csv")), "--test", s(&d.join("test.csv")),
        "--items", s(&d.join("test_items.csv")), "--classes", s(&d.join("test_classes.csv")),
        "--dims", "32", "--epochs", "5", "--seed", "1", "--out", s(&report),
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    let accuracy = |name: &str| -> f64 {
        let line = text.lines().find(|l| l.starts_with(&format!("{name},"))).unwrap_or_else(|| panic!("{text}"));
        line.split(',').nth(1).unwrap().parse().unwrap()
    };
    assert!(accuracy("no-skip") > 0.0);
    assert!(accuracy("full") > accuracy("no-adjuster"), "{text}");
    let csv = read(&report);
    assert_eq!(csv.lines().next(), Some("structure,accuracy"));
    assert_eq!(csv.lines().count(), 4);
    assert!(d.join("ablation.summary.txt").exists());
    assert!(d.join("ablation.scatter.csv").exists());
}
