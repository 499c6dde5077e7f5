use std::path::Path;
use std::process::{Command, Output};

fn village_graph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_village-graph"))
        .args(args)
        .output()
        .unwrap()
}

fn synth(dir: &Path) {
    let out = village_graph(&[
        "synth",
        "--out",
        dir.to_str().unwrap(),
        "--n",
        "200",
        "--clusters",
        "4",
        "--seed",
        "3",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn synth_then_run() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path());
    let config = tmp.path().join("config.txt");
    let out = village_graph(&["run", "--config", config.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("run A alpha="));
    let run = tmp.path().join("run");
    for file in [
        "config.txt",
        "graph_edges.txt",
        "embeddings.txt",
        "model.txt",
        "metrics.csv",
        "summary.txt",
    ] {
        assert!(run.join(file).exists(), "{file}");
    }
    assert!(!run.join("FAILED").exists());
}

#[test]
fn stages_and_flags() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path());
    let config = tmp.path().join("config.txt");
    let staged = tmp.path().join("staged");
    let base = [
        "--config",
        config.to_str().unwrap(),
        "--out",
        staged.to_str().unwrap(),
        "--seed",
        "9",
    ];
    for stage in [
        "build-graph",
        "analyze",
        "embed",
        "train",
        "evaluate",
        "ablate",
    ] {
        let out = village_graph(&[&[stage][..], &base[..]].concat());
        assert_eq!(
            out.status.code(),
            Some(0),
            "{stage}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let out = village_graph(&[&["sweep-alpha", "--alphas", "0.5,1"][..], &base[..]].concat());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 2);
    let snapshot = std::fs::read_to_string(staged.join("config.txt")).unwrap();
    assert!(snapshot.contains("lgdc.seed = 9"), "{snapshot}");
    assert_eq!(
        std::fs::read_to_string(staged.join("metrics.csv"))
            .unwrap()
            .lines()
            .count(),
        7
    );
}

#[test]
fn same_seed_same_metrics() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path());
    let config = tmp.path().join("config.txt");
    let metrics: Vec<String> = ["a", "b"]
        .iter()
        .map(|name| {
            let dir = tmp.path().join(name);
            let out = village_graph(&[
                "run",
                "--config",
                config.to_str().unwrap(),
                "--out",
                dir.to_str().unwrap(),
                "--seed",
                "4",
            ]);
            assert!(out.status.success());
            std::fs::read_to_string(dir.join("metrics.csv")).unwrap()
        })
        .collect();
    assert_eq!(metrics[0], metrics[1]);
}

#[test]
fn missing_dataset_is_a_runtime_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("run");
    let missing = tmp.path().join("missing.csv");
    let out = village_graph(&[
        "run",
        "--dataset",
        missing.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let marker = std::fs::read_to_string(out_dir.join("FAILED")).unwrap();
    assert!(marker.starts_with("stage: ingest\n"), "{marker}");
}

#[test]
fn validation_errors_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("bad.txt");
    std::fs::write(&config, "dataset = x.csv\nlgdc.alpha = 1.5\n").unwrap();
    let out = village_graph(&["run", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha"));

    std::fs::write(&config, "no_such_key = 3\n").unwrap();
    assert_eq!(
        village_graph(&["embed", "--config", config.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(village_graph(&["train"]).status.code(), Some(1));
    assert_eq!(
        village_graph(&["run", "--seed", "many"]).status.code(),
        Some(1)
    );
    assert_eq!(
        village_graph(&[
            "synth",
            "--out",
            tmp.path().to_str().unwrap(),
            "--homophily",
            "2"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(village_graph(&["--help"]).status.code(), Some(0));
}
