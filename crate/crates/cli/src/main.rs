use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use village_graph::data::synth::{generate_synthetic_detailed, SynthParams};
use village_graph::pipeline::{run_pipeline, RunDir, StageError, DEFAULT_ALPHAS};
use village_graph::{write_csv, Error, RunConfig};

#[derive(Parser)]
#[command(
    name = "village-graph",
    version,
    about = "Poor-village identification from a geographic village graph"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Config file (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sets every seed (walks, skip-gram, split, classifier).
    #[arg(long)]
    seed: Option<u64>,
    /// Village CSV; overrides `dataset` in the config.
    #[arg(long)]
    dataset: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the distance-threshold village graph.
    BuildGraph(Common),
    /// Centrality statistics, t-tests and neighbour-label curves.
    Analyze(Common),
    /// Centrality2Vec embeddings.
    Embed(Common),
    /// Train the classifier on the stored embeddings.
    Train(Common),
    /// Test-set metrics of the stored model.
    Evaluate(Common),
    /// Full model against its two ablations.
    Ablate(Common),
    /// Test accuracy across decay factors.
    SweepAlpha {
        #[command(flatten)]
        common: Common,
        /// Comma-separated decay factors.
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
    },
    /// build-graph, analyze, embed, train and evaluate in one go.
    Run(Common),
    /// Write a synthetic village table.
    Synth {
        /// Output directory; receives villages.csv and config.txt.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        clusters: usize,
        #[arg(long, default_value_t = 0.27)]
        poor_fraction: f64,
        #[arg(long, default_value_t = 0.8)]
        homophily: f64,
        /// Distance between neighbouring cluster centres (km).
        #[arg(long)]
        spacing_km: Option<f64>,
        /// Smallest per-cluster scatter (km).
        #[arg(long)]
        spread_min_km: Option<f64>,
        /// Largest per-cluster scatter (km).
        #[arg(long)]
        spread_max_km: Option<f64>,
        /// Radius of the local density behind the non-cluster labels (km).
        #[arg(long)]
        decay_km: Option<f64>,
        /// Share of the non-cluster labels that follow local density rather than chance.
        #[arg(long)]
        local_share: Option<f64>,
    },
}

enum Failure {
    Validation(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

impl From<StageError> for Failure {
    fn from(e: StageError) -> Self {
        let msg = e.to_string();
        if e.source.is_validation() {
            Failure::Validation(msg)
        } else {
            Failure::Runtime(msg)
        }
    }
}

fn resolve(c: &Common) -> Result<RunConfig, Failure> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(d) = &c.dataset {
        cfg.dataset = d.clone();
    }
    if let Some(o) = &c.out {
        cfg.out_dir = o.clone();
    }
    if let Some(s) = c.seed {
        cfg.override_seeds(s);
    }
    if cfg.dataset.as_os_str().is_empty() {
        return Err(Failure::Validation(
            "no dataset given (set `dataset` in the config or pass --dataset)".into(),
        ));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn open(c: &Common) -> Result<RunDir, Failure> {
    Ok(RunDir::create(resolve(c)?)?)
}

fn execute(cmd: Command) -> Result<String, Failure> {
    Ok(match cmd {
        Command::BuildGraph(c) => {
            let g = open(&c)?.build_graph()?;
            format!("graph: {} nodes, {} edges", g.n(), g.edge_count())
        }
        Command::Analyze(c) => {
            let dir = open(&c)?;
            dir.analyze()?;
            format!("analysis written to {}", dir.root().display())
        }
        Command::Embed(c) => {
            let h = open(&c)?.embed()?;
            format!("embeddings: {} x {}", h.n(), h.dim())
        }
        Command::Train(c) => {
            let m = open(&c)?.train()?;
            format!("model trained ({} parameters)", m.parameter_count())
        }
        Command::Evaluate(c) => summarize(&open(&c)?.evaluate()?),
        Command::Ablate(c) => summarize(&open(&c)?.ablate()?),
        Command::SweepAlpha { common, alphas } => {
            let alphas = alphas.unwrap_or_else(|| DEFAULT_ALPHAS.to_vec());
            summarize(&open(&common)?.sweep_alpha(&alphas)?)
        }
        Command::Run(c) => summarize(&run_pipeline(resolve(&c)?)?),
        Command::Synth {
            out,
            seed,
            n,
            clusters,
            poor_fraction,
            homophily,
            spacing_km,
            spread_min_km,
            spread_max_km,
            decay_km,
            local_share,
        } => {
            let mut p = SynthParams::new(n, clusters, poor_fraction, homophily, seed);
            p.cluster_spacing_km = spacing_km.unwrap_or(p.cluster_spacing_km);
            p.spread_km = (
                spread_min_km.unwrap_or(p.spread_km.0),
                spread_max_km.unwrap_or(p.spread_km.1),
            );
            p.decay_km = decay_km.unwrap_or(p.decay_km);
            p.local_share = local_share.unwrap_or(p.local_share);
            let data = generate_synthetic_detailed(&p)?;
            std::fs::create_dir_all(&out)
                .map_err(|e| Failure::Runtime(format!("{}: {e}", out.display())))?;
            let csv = out.join("villages.csv");
            write_csv(&data.dataset, &csv)?;
            let cfg = RunConfig {
                dataset: csv.clone(),
                out_dir: out.join("run"),
                ..RunConfig::default()
            };
            let cfg_path = out.join("config.txt");
            std::fs::write(&cfg_path, cfg.to_text())
                .map_err(|e| Failure::Runtime(format!("{}: {e}", cfg_path.display())))?;
            format!("wrote {} villages to {}", data.dataset.len(), csv.display())
        }
    })
}

fn summarize(records: &[village_graph::eval::RunRecord]) -> String {
    records
        .iter()
        .map(|r| {
            let m = &r.metrics;
            format!(
                "{} {} alpha={} acc={:.4} p={:.4} r={:.4} f1={:.4} auroc={:.4}",
                r.run_id,
                r.variant.code(),
                r.alpha,
                m.accuracy,
                m.precision,
                m.recall,
                m.f1,
                m.auroc
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli.command) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
