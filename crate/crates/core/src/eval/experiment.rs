//! End-to-end runs: the full model, the two ablations and the α sweep.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::metrics::{compute_metrics, Metrics};
use super::split::{stratified_split, Split};
use crate::c2v::{embed, EmbeddingMatrix};
use crate::config::RunConfig;
use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::geo::{build_graph_with, SpatialGraph};
use crate::lgdc::{train, LgdcConfig, LgdcModel};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Centrality2Vec features with distance convolution.
    Full,
    /// Distance convolution on random Gaussian features.
    NoCentrality2Vec,
    /// Two-layer perceptron on Centrality2Vec features, no graph aggregation.
    NoLgdc,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Full, Variant::NoCentrality2Vec, Variant::NoLgdc];

    pub fn code(self) -> &'static str {
        match self {
            Variant::Full => "A",
            Variant::NoCentrality2Vec => "B",
            Variant::NoLgdc => "C",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::NoCentrality2Vec => "no_centrality2vec",
            Variant::NoLgdc => "no_lgdc",
        }
    }

    pub fn from_name(name: &str) -> Option<Variant> {
        Variant::ALL.into_iter().find(|v| v.name() == name)
    }
}

/// Graph, embedding and split shared by every run of one configuration.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub graph: SpatialGraph,
    pub labels: Vec<Label>,
    pub embedding: EmbeddingMatrix<f64>,
    pub split: Split,
}

impl Prepared {
    pub fn new(dataset: &Dataset, cfg: &RunConfig) -> Result<Self> {
        dataset.require_labeled()?;
        let graph = build_graph_with(
            &dataset.coords(),
            cfg.threshold_km,
            cfg.distance_model(),
            true,
        )?;
        let embedding = embed(&graph, &cfg.c2v)?;
        Prepared::from_parts(graph, dataset.labels(), embedding, cfg)
    }

    pub fn from_parts(
        graph: SpatialGraph,
        labels: Vec<Label>,
        embedding: EmbeddingMatrix<f64>,
        cfg: &RunConfig,
    ) -> Result<Self> {
        if embedding.n() != graph.n() || labels.len() != graph.n() {
            return Err(Error::Shape(format!(
                "graph has {} nodes, embedding {} rows, labels {}",
                graph.n(),
                embedding.n(),
                labels.len()
            )));
        }
        let split = stratified_split(&labels, cfg.split_ratios, cfg.split_seed)?;
        Ok(Prepared {
            graph,
            labels,
            embedding,
            split,
        })
    }

    /// Classifier input: the column-standardised embedding, or standard-normal noise for B.
    pub fn features(&self, variant: Variant, seed: u64) -> Matrix<f64> {
        match variant {
            Variant::Full | Variant::NoLgdc => self.embedding.matrix().standardize_columns(),
            Variant::NoCentrality2Vec => {
                random_features(self.graph.n(), self.embedding.dim(), seed)
            }
        }
    }

    pub fn graph_for(&self, variant: Variant) -> SpatialGraph {
        match variant {
            Variant::NoLgdc => SpatialGraph::edgeless(self.graph.n()),
            _ => self.graph.clone(),
        }
    }

    pub fn run(&self, variant: Variant, lgdc: &LgdcConfig) -> Result<RunOutcome> {
        let features = self.features(variant, lgdc.seed);
        let graph = self.graph_for(variant);
        let trained = train(&graph, &features, &self.labels, &self.split, lgdc)?;
        let metrics = evaluate(
            &trained.model,
            &graph,
            &features,
            &self.labels,
            &self.split.test,
        )?;
        Ok(RunOutcome {
            variant,
            alpha: lgdc.alpha,
            seed: lgdc.seed,
            metrics,
            model: trained.model,
        })
    }
}

/// Standard-normal features with a fixed seed, the stand-in input for ablation B.
pub fn random_features(n: usize, dim: usize, seed: u64) -> Matrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_b0b5_0000_000b);
    Matrix::from_fn(n, dim, |_, _| StandardNormal.sample(&mut rng))
}

pub fn evaluate(
    model: &LgdcModel<f64>,
    g: &SpatialGraph,
    features: &Matrix<f64>,
    labels: &[Label],
    nodes: &[usize],
) -> Result<Metrics> {
    let preds = model.predict(g, features)?;
    let classes: Vec<Label> = nodes.iter().map(|&i| preds[i].class).collect();
    let probs: Vec<f64> = nodes.iter().map(|&i| preds[i].poor_probability).collect();
    let truth: Vec<Label> = nodes.iter().map(|&i| labels[i]).collect();
    compute_metrics(&classes, &probs, &truth)
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub variant: Variant,
    pub alpha: f64,
    pub seed: u64,
    pub metrics: Metrics,
    pub model: LgdcModel<f64>,
}

impl RunOutcome {
    pub fn record(&self, run_id: impl Into<String>) -> RunRecord {
        RunRecord {
            run_id: run_id.into(),
            variant: self.variant,
            alpha: self.alpha,
            seed: self.seed,
            metrics: self.metrics,
        }
    }
}

/// One row of `metrics.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run_id: String,
    pub variant: Variant,
    pub alpha: f64,
    pub seed: u64,
    pub metrics: Metrics,
}

pub const METRICS_HEADER: &str = "run_id,variant,alpha,seed,accuracy,precision,recall,f1,auroc";

pub fn metrics_csv(records: &[RunRecord]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in records {
        let m = r.metrics;
        let _ = writeln!(
            out,
            "{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6}",
            r.run_id,
            r.variant.name(),
            r.alpha,
            r.seed,
            m.accuracy,
            m.precision,
            m.recall,
            m.f1,
            m.auroc
        );
    }
    out
}

/// Inverse of [`metrics_csv`] (values carry the six printed decimals).
pub fn parse_metrics_csv(text: &str) -> Result<Vec<RunRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == METRICS_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected header `{METRICS_HEADER}`"),
            })
        }
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(idx, l)| {
            let line = idx + 1;
            let bad = |msg: String| Error::Parse { line, msg };
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 9 {
                return Err(bad(format!("expected 9 fields, got {}", f.len())));
            }
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| bad(format!("bad number `{s}`")))
            };
            Ok(RunRecord {
                run_id: f[0].to_string(),
                variant: Variant::from_name(f[1])
                    .ok_or_else(|| bad(format!("unknown variant `{}`", f[1])))?,
                alpha: num(f[2])?,
                seed: f[3]
                    .parse()
                    .map_err(|_| bad(format!("bad seed `{}`", f[3])))?,
                metrics: Metrics {
                    accuracy: num(f[4])?,
                    precision: num(f[5])?,
                    recall: num(f[6])?,
                    f1: num(f[7])?,
                    auroc: num(f[8])?,
                },
            })
        })
        .collect()
}

pub fn metrics_summary(records: &[RunRecord], cfg: &RunConfig) -> String {
    let mut out = String::new();
    let [tr, va, te] = cfg.split_ratios;
    let _ = writeln!(
        out,
        "split {tr}/{va}/{te} stratified (seed {}); precision/recall/F1 macro-averaged; AUROC with poor as positive",
        cfg.split_seed
    );
    let _ = writeln!(
        out,
        "{:<10} {:<18} {:>5} {:>8} {:>9} {:>9} {:>7} {:>7} {:>7}",
        "run", "variant", "alpha", "seed", "accuracy", "precision", "recall", "f1", "auroc"
    );
    for r in records {
        let m = r.metrics;
        let _ = writeln!(
            out,
            "{:<10} {:<18} {:>5.2} {:>8} {:>9.4} {:>9.4} {:>7.4} {:>7.4} {:>7.4}",
            r.run_id,
            r.variant.name(),
            r.alpha,
            r.seed,
            m.accuracy,
            m.precision,
            m.recall,
            m.f1,
            m.auroc
        );
    }
    out
}

/// Variants A, B and C on one shared split and seed.
pub fn run_ablation(dataset: &Dataset, cfg: &RunConfig) -> Result<Vec<RunRecord>> {
    let prepared = Prepared::new(dataset, cfg)?;
    ablation_on(&prepared, &cfg.lgdc)
}

pub fn ablation_on(prepared: &Prepared, lgdc: &LgdcConfig) -> Result<Vec<RunRecord>> {
    Variant::ALL
        .iter()
        .map(|&v| {
            Ok(prepared
                .run(v, lgdc)?
                .record(format!("ablate-{}", v.code())))
        })
        .collect()
}

/// One full-model run per α, everything else fixed.
pub fn alpha_sweep(dataset: &Dataset, alphas: &[f64], cfg: &RunConfig) -> Result<Vec<RunRecord>> {
    let prepared = Prepared::new(dataset, cfg)?;
    sweep_on(&prepared, alphas, &cfg.lgdc)
}

pub fn sweep_on(prepared: &Prepared, alphas: &[f64], lgdc: &LgdcConfig) -> Result<Vec<RunRecord>> {
    if let Some(a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(Error::invalid(format!("alpha {a} outside [0, 1]")));
    }
    alphas
        .iter()
        .map(|&alpha| {
            let run = LgdcConfig {
                alpha,
                ..lgdc.clone()
            };
            Ok(prepared
                .run(Variant::Full, &run)?
                .record(format!("alpha-{alpha}")))
        })
        .collect()
}

/// `alpha,accuracy` series.
pub fn alpha_curve_csv(records: &[RunRecord]) -> String {
    let mut out = String::from("alpha,accuracy\n");
    for r in records {
        let _ = writeln!(out, "{},{:.6}", r.alpha, r.metrics.accuracy);
    }
    out
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}
