//! Stage runners over a run directory.
//!
//! Every stage reads its inputs from the dataset and the artifacts earlier stages left in
//! the run directory, and writes its own artifacts there. `run_pipeline` just runs the
//! stages in order, so running them one by one gives the same files.

use std::fmt::{self, Write as _};
use std::fs::OpenOptions;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::analysis::{compare_centrality, homophily_curve, CentralityProfile};
use crate::c2v::{centrality2vec, EmbeddingMatrix};
use crate::config::RunConfig;
use crate::data::{load_csv, Dataset};
use crate::error::{Error, Result};
use crate::eval::{
    ablation_on, alpha_curve_csv, evaluate, metrics_csv, metrics_summary, parse_metrics_csv,
    sweep_on, Prepared, RunRecord, Variant,
};
use crate::geo::{build_graph_with, graph_stats, SpatialGraph};
use crate::lgdc::{train, LgdcModel};

pub const CONFIG_FILE: &str = "config.txt";
pub const EDGES_FILE: &str = "graph_edges.txt";
pub const GRAPH_STATS_FILE: &str = "graph_stats.txt";
pub const CENTRALITY_FILE: &str = "centrality_stats.csv";
pub const TTEST_FILE: &str = "t_test.txt";
pub const HOMOPHILY_FILE: &str = "homophily_curve.csv";
pub const EMBEDDING_FILE: &str = "embeddings.txt";
pub const SKIPGRAM_LOSS_FILE: &str = "skipgram_loss.csv";
pub const MODEL_FILE: &str = "model.txt";
pub const HISTORY_FILE: &str = "train_history.csv";
pub const METRICS_FILE: &str = "metrics.csv";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const ALPHA_CURVE_FILE: &str = "alpha_curve.csv";
pub const LOG_FILE: &str = "run.log";
pub const FAILED_FILE: &str = "FAILED";

/// Radii (km) of the neighbour-label curves.
pub const HOMOPHILY_RADII: [f64; 10] = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];

pub const DEFAULT_ALPHAS: [f64; 9] = [0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Ingest,
    BuildGraph,
    Analyze,
    Embed,
    Train,
    Evaluate,
    Ablate,
    SweepAlpha,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Ingest => "ingest",
            Stage::BuildGraph => "build-graph",
            Stage::Analyze => "analyze",
            Stage::Embed => "embed",
            Stage::Train => "train",
            Stage::Evaluate => "evaluate",
            Stage::Ablate => "ablate",
            Stage::SweepAlpha => "sweep-alpha",
        })
    }
}

#[derive(Debug, thiserror::Error)]
#[error("stage {stage} failed: {source}")]
pub struct StageError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

pub type StageResult<T> = std::result::Result<T, StageError>;

trait AtStage<T> {
    fn at(self, stage: Stage) -> StageResult<T>;
}

impl<T> AtStage<T> for Result<T> {
    fn at(self, stage: Stage) -> StageResult<T> {
        self.map_err(|source| StageError { stage, source })
    }
}

/// A run directory bound to its configuration.
#[derive(Debug, Clone)]
pub struct RunDir {
    pub cfg: RunConfig,
    root: PathBuf,
}

impl RunDir {
    /// Creates the directory and writes the config snapshot.
    pub fn create(cfg: RunConfig) -> Result<Self> {
        let root = cfg.out_dir.clone();
        std::fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        let dir = RunDir { cfg, root };
        dir.write(CONFIG_FILE, &dir.cfg.to_text())?;
        Ok(dir)
    }

    pub fn path(&self, file: &str) -> PathBuf {
        self.root.join(file)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn write(&self, file: &str, contents: &str) -> Result<()> {
        let p = self.path(file);
        std::fs::write(&p, contents).map_err(|e| Error::io(&p, e))
    }

    pub fn log(&self, stage: Stage, msg: &str) {
        let p = self.path(LOG_FILE);
        if let Ok(mut f) = OpenOptions::new().create(true).append(true).open(p) {
            let _ = writeln!(f, "[{stage}] {msg}");
        }
    }

    /// Records a failure marker; earlier artifacts stay in place.
    pub fn mark_failed(&self, err: &StageError) {
        let _ = self.write(
            FAILED_FILE,
            &format!("stage: {}\ncause: {}\n", err.stage, err.source),
        );
        self.log(err.stage, &format!("FAILED: {}", err.source));
    }

    fn require(&self, file: &str, producer: Stage) -> Result<PathBuf> {
        let p = self.path(file);
        if p.exists() {
            Ok(p)
        } else {
            Err(Error::invalid(format!(
                "{} not found; run `{producer}` first",
                p.display()
            )))
        }
    }

    pub fn dataset(&self) -> StageResult<Dataset> {
        load_csv(&self.cfg.dataset).at(Stage::Ingest)
    }

    pub fn graph(&self, n: usize, stage: Stage) -> StageResult<SpatialGraph> {
        let p = self.require(EDGES_FILE, Stage::BuildGraph).at(stage)?;
        SpatialGraph::read_edge_list(n, self.cfg.threshold_km, p).at(stage)
    }

    pub fn embedding(&self, stage: Stage) -> StageResult<EmbeddingMatrix<f64>> {
        let p = self.require(EMBEDDING_FILE, Stage::Embed).at(stage)?;
        EmbeddingMatrix::read(p).at(stage)
    }

    fn prepared(&self, stage: Stage) -> StageResult<(Dataset, Prepared)> {
        let ds = self.dataset()?;
        let g = self.graph(ds.len(), stage)?;
        let h = self.embedding(stage)?;
        let prepared = Prepared::from_parts(g, ds.labels(), h, &self.cfg).at(stage)?;
        Ok((ds, prepared))
    }

    /// Replaces the rows of `metrics.csv` that `owned` selects with `records`, keeping
    /// rows written by other stages, and refreshes the summary.
    fn merge_metrics(&self, owned: impl Fn(&str) -> bool, records: &[RunRecord]) -> Result<()> {
        let path = self.path(METRICS_FILE);
        let mut rows = match std::fs::read_to_string(&path) {
            Ok(text) => parse_metrics_csv(&text)?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(Error::io(&path, e)),
        };
        rows.retain(|r| !owned(&r.run_id));
        rows.extend(records.iter().cloned());
        self.write(METRICS_FILE, &metrics_csv(&rows))?;
        self.write(SUMMARY_FILE, &metrics_summary(&rows, &self.cfg))
    }

    fn timed<T>(&self, stage: Stage, f: impl FnOnce() -> StageResult<T>) -> StageResult<T> {
        let start = Instant::now();
        self.log(stage, "start");
        let out = f();
        match &out {
            Ok(_) => self.log(
                stage,
                &format!("done in {:.2}s", start.elapsed().as_secs_f64()),
            ),
            Err(e) => self.mark_failed(e),
        }
        out
    }

    pub fn build_graph(&self) -> StageResult<SpatialGraph> {
        self.timed(Stage::BuildGraph, || {
            let ds = self.dataset()?;
            let s = Stage::BuildGraph;
            let g = build_graph_with(
                &ds.coords(),
                self.cfg.threshold_km,
                self.cfg.distance_model(),
                true,
            )
            .at(s)?;
            g.write_edge_list(self.path(EDGES_FILE)).at(s)?;
            let mut text = format!("nodes {}\nthreshold_km {}\n", g.n(), g.threshold_km());
            if let Ok(st) = graph_stats(&g) {
                let _ = write!(
                    text,
                    "edges {}\naverage_degree {:.4}\nsparsity_percent {:.4}\n",
                    st.edges,
                    st.average_degree,
                    st.sparsity * 100.0
                );
            }
            self.write(GRAPH_STATS_FILE, &text).at(s)?;
            self.log(s, &format!("{} nodes, {} edges", g.n(), g.edge_count()));
            Ok(g)
        })
    }

    pub fn analyze(&self) -> StageResult<()> {
        self.timed(Stage::Analyze, || {
            let s = Stage::Analyze;
            let ds = self.dataset()?;
            let g = self.graph(ds.len(), s)?;
            let profile = CentralityProfile::of(&g);
            let comparison = compare_centrality(&profile, &ds.labels()).at(s)?;

            let mut stats = String::from("measure,group,count,mean,std\n");
            let mut ttest = String::from("two-sided Welch t-test, poor vs non-poor\n");
            for c in &comparison {
                for (group, gs) in [("poor", c.poor), ("non_poor", c.non_poor)] {
                    let _ = writeln!(stats, "{},{group},{},{:.4},{:.4}", c.measure, gs.count, gs.mean, gs.std);
                }
                let _ = writeln!(ttest, "{}: t = {:.4}, df = {:.2}, p = {:.3e}", c.measure, c.test.t, c.test.df, c.test.p);
            }
            self.write(CENTRALITY_FILE, &stats).at(s)?;
            self.write(TTEST_FILE, &ttest).at(s)?;

            let curve = homophily_curve(&ds, &HOMOPHILY_RADII).at(s)?;
            let mut csv = String::from(
                "radius_km,poor_poor,poor_non_poor,non_poor_poor,non_poor_non_poor,poor_share_poor_centers,poor_share_non_poor_centers\n",
            );
            let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
            for p in &curve {
                let _ = writeln!(
                    csv,
                    "{},{:.6},{:.6},{:.6},{:.6},{},{}",
                    p.radius_km,
                    p.poor_center_poor,
                    p.poor_center_non_poor,
                    p.non_poor_center_poor,
                    p.non_poor_center_non_poor,
                    opt(p.poor_share_poor_centers),
                    opt(p.poor_share_non_poor_centers)
                );
            }
            self.write(HOMOPHILY_FILE, &csv).at(s)
        })
    }

    pub fn embed(&self) -> StageResult<EmbeddingMatrix<f64>> {
        self.timed(Stage::Embed, || {
            let s = Stage::Embed;
            let ds = self.dataset()?;
            let g = self.graph(ds.len(), s)?;
            let out = centrality2vec::<f64>(&g, &self.cfg.c2v).at(s)?;
            out.embedding.write(self.path(EMBEDDING_FILE)).at(s)?;
            let mut loss = String::from("epoch,mean_pair_loss\n");
            for (e, l) in out.report.epoch_losses.iter().enumerate() {
                let _ = writeln!(loss, "{},{l:.6}", e + 1);
            }
            self.write(SKIPGRAM_LOSS_FILE, &loss).at(s)?;
            Ok(out.embedding)
        })
    }

    pub fn train(&self) -> StageResult<LgdcModel<f64>> {
        self.timed(Stage::Train, || {
            let s = Stage::Train;
            let (_, p) = self.prepared(s)?;
            let features = p.features(Variant::Full, self.cfg.lgdc.seed);
            let trained = train(&p.graph, &features, &p.labels, &p.split, &self.cfg.lgdc).at(s)?;
            trained.model.write(self.path(MODEL_FILE)).at(s)?;
            let mut hist = String::from("epoch,train_loss,val_macro_f1\n");
            for (e, l) in trained.history.train_loss.iter().enumerate() {
                let f1 = trained
                    .history
                    .val_macro_f1
                    .get(e)
                    .map(|v| format!("{v:.6}"))
                    .unwrap_or_default();
                let _ = writeln!(hist, "{},{l:.6},{f1}", e + 1);
            }
            self.write(HISTORY_FILE, &hist).at(s)?;
            if let Some(best) = trained.history.best_epoch {
                self.log(s, &format!("best validation epoch {}", best + 1));
            }
            Ok(trained.model)
        })
    }

    pub fn evaluate(&self) -> StageResult<Vec<RunRecord>> {
        self.timed(Stage::Evaluate, || {
            let s = Stage::Evaluate;
            let (_, p) = self.prepared(s)?;
            let model_path = self.require(MODEL_FILE, Stage::Train).at(s)?;
            let model = LgdcModel::<f64>::read(model_path).at(s)?;
            let features = p.features(Variant::Full, self.cfg.lgdc.seed);
            let metrics = evaluate(&model, &p.graph, &features, &p.labels, &p.split.test).at(s)?;
            let record = RunRecord {
                run_id: "run".into(),
                variant: Variant::Full,
                alpha: model.alpha,
                seed: self.cfg.lgdc.seed,
                metrics,
            };
            let records = vec![record];
            self.merge_metrics(|id| id == "run", &records).at(s)?;
            Ok(records)
        })
    }

    pub fn ablate(&self) -> StageResult<Vec<RunRecord>> {
        self.timed(Stage::Ablate, || {
            let s = Stage::Ablate;
            let (_, p) = self.prepared(s)?;
            let records = ablation_on(&p, &self.cfg.lgdc).at(s)?;
            self.merge_metrics(|id| id.starts_with("ablate-"), &records)
                .at(s)?;
            Ok(records)
        })
    }

    pub fn sweep_alpha(&self, alphas: &[f64]) -> StageResult<Vec<RunRecord>> {
        self.timed(Stage::SweepAlpha, || {
            let s = Stage::SweepAlpha;
            let (_, p) = self.prepared(s)?;
            let records = sweep_on(&p, alphas, &self.cfg.lgdc).at(s)?;
            self.merge_metrics(|id| id.starts_with("alpha-"), &records)
                .at(s)?;
            self.write(ALPHA_CURVE_FILE, &alpha_curve_csv(&records))
                .at(s)?;
            Ok(records)
        })
    }
}

/// build-graph → analyze → embed → train → evaluate.
pub fn run_pipeline(cfg: RunConfig) -> StageResult<Vec<RunRecord>> {
    let dir = RunDir::create(cfg).at(Stage::Ingest)?;
    let result = (|| {
        dir.build_graph()?;
        dir.analyze()?;
        dir.embed()?;
        dir.train()?;
        dir.evaluate()
    })();
    if let Err(e) = &result {
        dir.mark_failed(e);
    }
    result
}
