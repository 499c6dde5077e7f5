use std::path::Path;
use std::time::Instant;

use village_graph::data::generate_synthetic;
use village_graph::eval::parse_metrics_csv;
use village_graph::pipeline::{
    run_pipeline, RunDir, Stage, ALPHA_CURVE_FILE, CONFIG_FILE, EDGES_FILE, EMBEDDING_FILE,
    FAILED_FILE, METRICS_FILE, MODEL_FILE, SUMMARY_FILE,
};
use village_graph::{write_csv, RunConfig};

fn small_config(dir: &Path, n: usize) -> RunConfig {
    let csv = dir.join("villages.csv");
    write_csv(&generate_synthetic(n, 5, 0.3, 0.8, 4).unwrap(), &csv).unwrap();
    let mut cfg = RunConfig {
        dataset: csv,
        out_dir: dir.join("run"),
        ..RunConfig::default()
    };
    cfg.c2v.walks_per_node = 4;
    cfg.c2v.walk_length = 20;
    cfg.c2v.skipgram.dim = 16;
    cfg.lgdc.hidden = 16;
    cfg.lgdc.epochs = 40;
    cfg
}

fn read(dir: &Path, file: &str) -> String {
    std::fs::read_to_string(dir.join(file)).unwrap()
}

#[test]
fn staged_run_matches_one_shot_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), 250);
    let one_shot = RunConfig {
        out_dir: tmp.path().join("a"),
        ..cfg.clone()
    };
    run_pipeline(one_shot.clone()).unwrap();

    let staged = RunDir::create(RunConfig {
        out_dir: tmp.path().join("b"),
        ..cfg
    })
    .unwrap();
    staged.build_graph().unwrap();
    staged.analyze().unwrap();
    staged.embed().unwrap();
    staged.train().unwrap();
    staged.evaluate().unwrap();

    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for file in [EDGES_FILE, EMBEDDING_FILE, MODEL_FILE, METRICS_FILE] {
        assert_eq!(read(&a, file), read(&b, file), "{file}");
    }
    assert!(!a.join(FAILED_FILE).exists());
}

#[test]
fn identical_config_gives_identical_metrics() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), 200);
    let first = run_pipeline(RunConfig {
        out_dir: tmp.path().join("1"),
        ..cfg.clone()
    })
    .unwrap();
    let second = run_pipeline(RunConfig {
        out_dir: tmp.path().join("2"),
        ..cfg
    })
    .unwrap();
    assert_eq!(first, second);
    assert_eq!(
        read(&tmp.path().join("1"), METRICS_FILE),
        read(&tmp.path().join("2"), METRICS_FILE)
    );
}

#[test]
fn config_snapshot_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small_config(tmp.path(), 50);
    cfg.lgdc.alpha = 0.35;
    cfg.c2v.similarity.band = Some(3);
    cfg.spherical = true;
    cfg.split_ratios = [0.5, 0.25, 0.25];
    assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
    let dir = RunDir::create(cfg.clone()).unwrap();
    assert_eq!(RunConfig::load(dir.path(CONFIG_FILE)).unwrap(), cfg);
}

#[test]
fn missing_dataset_leaves_a_failure_marker() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        dataset: tmp.path().join("nope.csv"),
        out_dir: tmp.path().join("run"),
        ..Default::default()
    };
    let err = run_pipeline(cfg).unwrap_err();
    assert_eq!(err.stage, Stage::Ingest);
    let marker = read(&tmp.path().join("run"), FAILED_FILE);
    assert!(marker.starts_with("stage: ingest\n"), "{marker}");
    assert!(marker.contains("nope.csv"));
}

#[test]
fn stages_name_their_missing_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = RunDir::create(small_config(tmp.path(), 60)).unwrap();
    let err = dir.train().unwrap_err();
    assert_eq!(err.stage, Stage::Train);
    assert!(err.to_string().contains("run `build-graph` first"), "{err}");
    dir.build_graph().unwrap();
    let err = dir.train().unwrap_err();
    assert!(err.to_string().contains("run `embed` first"), "{err}");
    assert!(read(dir.root(), FAILED_FILE).starts_with("stage: train\n"));
}

#[test]
fn stages_share_one_metrics_table() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), 200);
    let dir = RunDir::create(cfg.clone()).unwrap();
    run_pipeline(cfg).unwrap();
    dir.ablate().unwrap();
    dir.sweep_alpha(&[0.4, 1.0]).unwrap();
    let ids = |text: &str| {
        parse_metrics_csv(text)
            .unwrap()
            .into_iter()
            .map(|r| r.run_id)
            .collect::<Vec<_>>()
    };
    let before = read(dir.root(), METRICS_FILE);
    assert_eq!(
        ids(&before),
        [
            "run",
            "ablate-A",
            "ablate-B",
            "ablate-C",
            "alpha-0.4",
            "alpha-1"
        ]
    );
    assert_eq!(read(dir.root(), ALPHA_CURVE_FILE).lines().count(), 3);

    dir.ablate().unwrap();
    let after = read(dir.root(), METRICS_FILE);
    assert_eq!(
        ids(&after),
        [
            "run",
            "alpha-0.4",
            "alpha-1",
            "ablate-A",
            "ablate-B",
            "ablate-C"
        ]
    );
    let mut a = before.lines().collect::<Vec<_>>();
    let mut b = after.lines().collect::<Vec<_>>();
    a.sort_unstable();
    b.sort_unstable();
    assert_eq!(a, b);
    assert!(read(dir.root(), SUMMARY_FILE).contains("macro-averaged"));
}

#[test]
fn five_hundred_villages_with_defaults_in_under_two_minutes() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("villages.csv");
    write_csv(&generate_synthetic(500, 5, 0.27, 0.8, 1).unwrap(), &csv).unwrap();
    let cfg = RunConfig {
        dataset: csv,
        out_dir: tmp.path().join("run"),
        ..RunConfig::default()
    };
    let start = Instant::now();
    run_pipeline(cfg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    eprintln!("500-village run: {secs:.1}s");
    assert!(secs < 120.0);
    assert_eq!(
        parse_metrics_csv(&read(&tmp.path().join("run"), METRICS_FILE))
            .unwrap()
            .len(),
        1
    );
}
