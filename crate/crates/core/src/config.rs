//! Run configuration: a flat `key = value` file with dotted section prefixes.
//!
//! ```text
//! dataset = data/villages.csv
//! graph.threshold_km = 5
//! lgdc.alpha = 0.8
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::c2v::{Centrality2VecConfig, CostKind};
use crate::error::{Error, Result};
use crate::geo::DistanceModel;
use crate::lgdc::LgdcConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dataset: PathBuf,
    pub out_dir: PathBuf,
    pub threshold_km: f64,
    pub spherical: bool,
    pub c2v: Centrality2VecConfig,
    pub lgdc: LgdcConfig,
    pub split_ratios: [f64; 3],
    pub split_seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: PathBuf::new(),
            out_dir: PathBuf::from("run"),
            threshold_km: 5.0,
            spherical: false,
            c2v: Centrality2VecConfig::default(),
            lgdc: LgdcConfig::default(),
            split_ratios: [0.6, 0.2, 0.2],
            split_seed: 1,
        }
    }
}

fn parse<V: FromStr>(line: usize, key: &str, value: &str) -> Result<V> {
    value.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad value `{value}` for `{key}`"),
    })
}

impl RunConfig {
    pub fn distance_model(&self) -> DistanceModel {
        if self.spherical {
            DistanceModel::Spherical
        } else {
            DistanceModel::Ellipsoidal
        }
    }

    /// Sets every seed to `seed`.
    pub fn override_seeds(&mut self, seed: u64) {
        self.c2v.skipgram.seed = seed;
        self.lgdc.seed = seed;
        self.split_seed = seed;
    }

    pub fn set(&mut self, line: usize, key: &str, value: &str) -> Result<()> {
        let sg = &mut self.c2v.skipgram;
        match key {
            "dataset" => self.dataset = PathBuf::from(value),
            "out" => self.out_dir = PathBuf::from(value),
            "graph.threshold_km" => self.threshold_km = parse(line, key, value)?,
            "graph.spherical" => self.spherical = parse(line, key, value)?,
            "c2v.top_k" => self.c2v.top_k = parse(line, key, value)?,
            "c2v.walks" => self.c2v.walks_per_node = parse(line, key, value)?,
            "c2v.length" => self.c2v.walk_length = parse(line, key, value)?,
            "c2v.include_self" => self.c2v.include_self = parse(line, key, value)?,
            "c2v.cost" => {
                self.c2v.similarity.cost = match value {
                    "nearest" => CostKind::NearestElement,
                    "dtw" => CostKind::Dtw,
                    _ => {
                        return Err(Error::Parse {
                            line,
                            msg: format!("`c2v.cost` must be nearest or dtw, got `{value}`"),
                        })
                    }
                }
            }
            "c2v.band" => {
                self.c2v.similarity.band = if value == "off" {
                    None
                } else {
                    Some(parse(line, key, value)?)
                }
            }
            "c2v.window" => sg.window = parse(line, key, value)?,
            "c2v.dim" => sg.dim = parse(line, key, value)?,
            "c2v.epochs" => sg.epochs = parse(line, key, value)?,
            "c2v.lr" => sg.lr = parse(line, key, value)?,
            "c2v.init_std" => sg.init_std = parse(line, key, value)?,
            "c2v.seed" => sg.seed = parse(line, key, value)?,
            "lgdc.alpha" => self.lgdc.alpha = parse(line, key, value)?,
            "lgdc.hidden" => self.lgdc.hidden = parse(line, key, value)?,
            "lgdc.layers" => self.lgdc.layers = parse(line, key, value)?,
            "lgdc.lr" => self.lgdc.lr = parse(line, key, value)?,
            "lgdc.weight_decay" => self.lgdc.weight_decay = parse(line, key, value)?,
            "lgdc.epochs" => self.lgdc.epochs = parse(line, key, value)?,
            "lgdc.patience" => self.lgdc.patience = parse(line, key, value)?,
            "lgdc.seed" => self.lgdc.seed = parse(line, key, value)?,
            "lgdc.class_weighted" => self.lgdc.class_weighted = parse(line, key, value)?,
            "split.train" => self.split_ratios[0] = parse(line, key, value)?,
            "split.val" => self.split_ratios[1] = parse(line, key, value)?,
            "split.test" => self.split_ratios[2] = parse(line, key, value)?,
            "split.seed" => self.split_seed = parse(line, key, value)?,
            _ => {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown key `{key}`"),
                })
            }
        }
        Ok(())
    }

    /// Parses a config file on top of the defaults and validates the result.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: idx + 1,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            cfg.set(idx + 1, key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::invalid(msg.to_string()))
            }
        };
        let sg = &self.c2v.skipgram;
        check(
            self.threshold_km > 0.0 && self.threshold_km.is_finite(),
            "graph.threshold_km must be positive",
        )?;
        check(self.c2v.top_k >= 1, "c2v.top_k must be >= 1")?;
        check(self.c2v.walks_per_node >= 1, "c2v.walks must be >= 1")?;
        check(self.c2v.walk_length >= 2, "c2v.length must be >= 2")?;
        check(sg.window >= 1, "c2v.window must be >= 1")?;
        check(sg.dim >= 2, "c2v.dim must be >= 2")?;
        check(sg.lr > 0.0 && sg.lr.is_finite(), "c2v.lr must be positive")?;
        check(
            sg.init_std > 0.0 && sg.init_std.is_finite(),
            "c2v.init_std must be positive",
        )?;
        check(
            (0.0..=1.0).contains(&self.lgdc.alpha),
            "lgdc.alpha must be in [0, 1]",
        )?;
        check(self.lgdc.hidden >= 1, "lgdc.hidden must be >= 1")?;
        check(self.lgdc.layers >= 1, "lgdc.layers must be >= 1")?;
        check(
            self.lgdc.lr > 0.0 && self.lgdc.lr.is_finite(),
            "lgdc.lr must be positive",
        )?;
        check(
            self.lgdc.weight_decay >= 0.0,
            "lgdc.weight_decay must be >= 0",
        )?;
        check(
            self.split_ratios.iter().all(|&r| r > 0.0)
                && (self.split_ratios.iter().sum::<f64>() - 1.0).abs() < 1e-9,
            "split ratios must be positive and sum to 1",
        )?;
        Ok(())
    }

    /// Serialises every field; `parse(to_text())` returns an equal config.
    pub fn to_text(&self) -> String {
        let sg = &self.c2v.skipgram;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("dataset", self.dataset.display().to_string());
        kv("out", self.out_dir.display().to_string());
        kv("graph.threshold_km", self.threshold_km.to_string());
        kv("graph.spherical", self.spherical.to_string());
        kv("c2v.top_k", self.c2v.top_k.to_string());
        kv("c2v.walks", self.c2v.walks_per_node.to_string());
        kv("c2v.length", self.c2v.walk_length.to_string());
        kv("c2v.include_self", self.c2v.include_self.to_string());
        kv(
            "c2v.cost",
            match self.c2v.similarity.cost {
                CostKind::NearestElement => "nearest".into(),
                CostKind::Dtw => "dtw".into(),
            },
        );
        kv(
            "c2v.band",
            self.c2v
                .similarity
                .band
                .map_or("off".into(), |b| b.to_string()),
        );
        kv("c2v.window", sg.window.to_string());
        kv("c2v.dim", sg.dim.to_string());
        kv("c2v.epochs", sg.epochs.to_string());
        kv("c2v.lr", sg.lr.to_string());
        kv("c2v.init_std", sg.init_std.to_string());
        kv("c2v.seed", sg.seed.to_string());
        kv("lgdc.alpha", self.lgdc.alpha.to_string());
        kv("lgdc.hidden", self.lgdc.hidden.to_string());
        kv("lgdc.layers", self.lgdc.layers.to_string());
        kv("lgdc.lr", self.lgdc.lr.to_string());
        kv("lgdc.weight_decay", self.lgdc.weight_decay.to_string());
        kv("lgdc.epochs", self.lgdc.epochs.to_string());
        kv("lgdc.patience", self.lgdc.patience.to_string());
        kv("lgdc.seed", self.lgdc.seed.to_string());
        kv("lgdc.class_weighted", self.lgdc.class_weighted.to_string());
        kv("split.train", self.split_ratios[0].to_string());
        kv("split.val", self.split_ratios[1].to_string());
        kv("split.test", self.split_ratios[2].to_string());
        kv("split.seed", self.split_seed.to_string());
        out
    }
}
