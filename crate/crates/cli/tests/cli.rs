use std::path::Path;
use std::process::{Command, Output};

fn boltzkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_boltzkit"))
        .args(args)
        .env_remove("BOLTZKIT_DATA_DIR")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn demo_xor_prints_outputs_and_succeeds() {
    let out = boltzkit(&["demo", "xor", "--seed", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("round(out) ="));
    assert!(text.contains("real-valued test inputs"));
    assert!(text.contains("matches expected output"));
}

#[test]
fn demo_ambiguous_flags_rows() {
    let out = boltzkit(&["demo", "ambiguous"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).matches("unpredictable").count(), 2);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(boltzkit(&["demo", "mnist"]).status.code(), Some(2));
    assert_eq!(boltzkit(&["train"]).status.code(), Some(2));
    assert_eq!(boltzkit(&["train", "--dataset", "cifar"]).status.code(), Some(2));
    assert_eq!(boltzkit(&["train", "--dataset", "xor", "--nodes", "3,4,1"]).status.code(), Some(2));
    assert_eq!(boltzkit(&["train", "--dataset", "xor", "--step-ratio", "-1"]).status.code(), Some(2));
    assert_eq!(boltzkit(&["train", "--dataset", "xor", "--units", "gaussian"]).status.code(), Some(2));
    assert_eq!(boltzkit(&["train", "--dataset", "mnist"]).status.code(), Some(2));
    assert_eq!(boltzkit(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn missing_files_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("absent.model");
    assert_eq!(boltzkit(&["eval", "--model", path(&model), "--dataset", "xor"]).status.code(), Some(1));
    assert_eq!(
        boltzkit(&["train", "--dataset", "mnist", "--data-dir", path(dir.path())]).status.code(),
        Some(1)
    );
}

#[test]
fn train_then_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("xor.model");
    let csv = dir.path().join("xor.csv");
    let out = boltzkit(&[
        "train", "--dataset", "xor", "--seed", "4", "--model-out", path(&model), "--metrics-out", path(&csv),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let metrics = std::fs::read_to_string(&csv).unwrap();
    assert!(metrics.contains("# seed: 4\n"));
    assert!(metrics.contains("# config-sha256: "));
    let rows: Vec<&str> = metrics.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "epoch,phase,objective,seconds");
    assert_eq!(rows.iter().filter(|r| r.contains(",pretrain-1,")).count(), 100);
    assert_eq!(rows.iter().filter(|r| r.contains(",finetune,")).count(), 100);
    assert!(rows[1..].iter().all(|r| r.ends_with(',')));

    let text = std::fs::read_to_string(&model).unwrap();
    assert!(text.starts_with("boltzkit-dbn 1\nnodes: 2 12 1\n"));
    assert!(text.contains("\nseed: 4\n"));

    let eval = boltzkit(&["eval", "--model", path(&model), "--dataset", "xor-real-test"]);
    assert_eq!(eval.status.code(), Some(0));
    assert!(stdout(&eval).starts_with("rmse = "));

    // Width mismatch between model and data.
    let bad = boltzkit(&["eval", "--model", path(&model), "--dataset", "pattern1"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("shape mismatch"));
}

#[test]
fn config_file_is_merged_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "dataset = pattern1\nmax_iter = 7\nbatch-size = 6\nseed = 9\n").unwrap();
    let csv = dir.path().join("m.csv");
    let out = boltzkit(&["train", "--config", path(&cfg), "--max-iter", "3", "--metrics-out", path(&csv)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let metrics = std::fs::read_to_string(&csv).unwrap();
    assert!(metrics.contains("# seed: 9\n"));
    assert_eq!(metrics.lines().filter(|l| l.contains(",pretrain-1,")).count(), 3);

    std::fs::write(&cfg, "dataset = pattern1\nlearning_rate = 1\n").unwrap();
    assert_eq!(boltzkit(&["train", "--config", path(&cfg)]).status.code(), Some(2));
}

#[test]
fn unsupervised_training_pretrains_all_layers() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("u.csv");
    let out = boltzkit(&[
        "train", "--dataset", "unsup-pattern", "--nodes", "6,8,4", "--max-iter", "5", "--metrics-out", path(&csv),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let metrics = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(metrics.lines().filter(|l| l.contains(",pretrain-2,")).count(), 5);
    assert!(!metrics.contains(",finetune,"));
}
