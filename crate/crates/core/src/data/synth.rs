//! Synthetic village tables with two planted effects:
//! poor villages sit in sparse clusters, and label agreement falls off with distance.
//!
//! Each village keeps its cluster's label with probability `homophily_strength`.
//! Otherwise it takes, with probability `local_share`, a local label (poor when few
//! villages lie within `decay_km` of it), and else an independent draw at the poor
//! fraction. The local labels are correlated over roughly `decay_km`, the cluster labels
//! over a whole cluster.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{Dataset, Label, VillageRecord};
use crate::error::{Error, Result};

const KM_PER_DEG_LAT: f64 = 110.95;
const KM_PER_DEG_LON_EQUATOR: f64 = 111.32;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub n: usize,
    pub n_clusters: usize,
    pub poor_fraction: f64,
    pub homophily_strength: f64,
    pub seed: u64,
    /// Distance between neighbouring cluster centres on the layout grid.
    pub cluster_spacing_km: f64,
    /// Range of per-cluster Gaussian scatter (km).
    pub spread_km: (f64, f64),
    /// Geographic origin of the layout (lat, lon degrees).
    pub origin: (f64, f64),
    /// Radius of the local density behind the non-cluster labels.
    pub decay_km: f64,
    /// Share of the non-cluster labels that follow local density rather than chance.
    pub local_share: f64,
    /// Graph threshold the cluster densities are ranked at.
    pub threshold_km: f64,
}

impl SynthParams {
    pub fn new(
        n: usize,
        n_clusters: usize,
        poor_fraction: f64,
        homophily_strength: f64,
        seed: u64,
    ) -> Self {
        SynthParams {
            n,
            n_clusters,
            poor_fraction,
            homophily_strength,
            seed,
            cluster_spacing_km: 22.0,
            spread_km: (1.5, 6.0),
            origin: (30.3, 109.5),
            decay_km: 2.0,
            local_share: 0.5,
            threshold_km: 5.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_clusters == 0 || self.n < self.n_clusters {
            return Err(Error::invalid(format!(
                "need n >= n_clusters >= 1 (n = {}, n_clusters = {})",
                self.n, self.n_clusters
            )));
        }
        if !(self.poor_fraction > 0.0 && self.poor_fraction < 1.0) {
            return Err(Error::invalid(format!(
                "poor_fraction {} not in (0, 1)",
                self.poor_fraction
            )));
        }
        if !(0.0..=1.0).contains(&self.homophily_strength) {
            return Err(Error::invalid(format!(
                "homophily_strength {} not in [0, 1]",
                self.homophily_strength
            )));
        }
        if !(0.0..=1.0).contains(&self.local_share) {
            return Err(Error::invalid(format!(
                "local_share {} not in [0, 1]",
                self.local_share
            )));
        }
        let (lo, hi) = self.spread_km;
        if !(lo > 0.0
            && hi >= lo
            && self.cluster_spacing_km > 0.0
            && self.decay_km > 0.0
            && self.threshold_km > 0.0)
        {
            return Err(Error::invalid(
                "spread, spacing, decay_km and threshold_km must be positive",
            ));
        }
        Ok(())
    }
}

/// Generated table plus the ground truth used to plant the effects.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub dataset: Dataset,
    /// Cluster index of each village.
    pub cluster: Vec<usize>,
    /// Label assigned to each cluster before per-village noise.
    pub cluster_label: Vec<Label>,
    pub cluster_spread_km: Vec<f64>,
}

pub fn generate_synthetic(
    n: usize,
    n_clusters: usize,
    poor_fraction: f64,
    homophily_strength: f64,
    seed: u64,
) -> Result<Dataset> {
    let params = SynthParams::new(n, n_clusters, poor_fraction, homophily_strength, seed);
    generate_synthetic_detailed(&params).map(|s| s.dataset)
}

pub fn generate_synthetic_detailed(p: &SynthParams) -> Result<SyntheticData> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let k = p.n_clusters;

    // cluster centres on a jittered square grid
    let side = (k as f64).sqrt().ceil() as usize;
    let mut cells: Vec<usize> = (0..side * side).collect();
    cells.shuffle(&mut rng);
    let jitter = 0.2 * p.cluster_spacing_km;
    let centres_km: Vec<(f64, f64)> = cells[..k]
        .iter()
        .map(|&c| {
            let (gx, gy) = ((c % side) as f64, (c / side) as f64);
            (
                gx * p.cluster_spacing_km + rng.gen_range(-jitter..=jitter),
                gy * p.cluster_spacing_km + rng.gen_range(-jitter..=jitter),
            )
        })
        .collect();

    // sizes: random weights, at least one village per cluster
    let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.5..1.5)).collect();
    let total_w: f64 = weights.iter().sum();
    let spare = p.n - k;
    let mut sizes: Vec<usize> = weights
        .iter()
        .map(|w| 1 + (w / total_w * spare as f64).floor() as usize)
        .collect();
    let mut assigned: usize = sizes.iter().sum();
    let mut i = 0;
    while assigned < p.n {
        sizes[i % k] += 1;
        assigned += 1;
        i += 1;
    }

    let (lo, hi) = p.spread_km;
    let spread: Vec<f64> = (0..k)
        .map(|_| if hi > lo { rng.gen_range(lo..hi) } else { lo })
        .collect();

    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut xy = Vec::with_capacity(p.n);
    let mut cluster = Vec::with_capacity(p.n);
    for c in 0..k {
        let (cx, cy) = centres_km[c];
        for _ in 0..sizes[c] {
            xy.push((
                cx + spread[c] * unit.sample(&mut rng),
                cy + spread[c] * unit.sample(&mut rng),
            ));
            cluster.push(c);
        }
    }

    // poor clusters: lowest mean within-cluster degree at the graph threshold, until the
    // poor share is closest to the target
    let mut members = vec![Vec::new(); k];
    for (i, &c) in cluster.iter().enumerate() {
        members[c].push(xy[i]);
    }
    let d2 = p.threshold_km * p.threshold_km;
    let density: Vec<f64> = members
        .iter()
        .map(|m| {
            let close = m
                .iter()
                .map(|&(x, y)| {
                    m.iter()
                        .filter(|&&(u, v)| (u - x).powi(2) + (v - y).powi(2) < d2)
                        .count()
                        - 1
                })
                .sum::<usize>();
            close as f64 / m.len() as f64
        })
        .collect();
    let mut by_density: Vec<usize> = (0..k).collect();
    by_density.sort_by(|&a, &b| density[a].total_cmp(&density[b]).then(a.cmp(&b)));
    let target = p.poor_fraction * p.n as f64;
    let mut cluster_label = vec![Label::NonPoor; k];
    let mut poor_total = 0usize;
    for (rank, &c) in by_density.iter().enumerate() {
        let with = poor_total + sizes[c];
        let improves = (with as f64 - target).abs() < (poor_total as f64 - target).abs();
        let must_keep_nonpoor = k >= 2 && rank == k - 1;
        if (poor_total == 0 || improves) && !must_keep_nonpoor {
            cluster_label[c] = Label::Poor;
            poor_total = with;
        } else {
            break;
        }
    }

    let local = local_labels(&xy, p.decay_km, p.poor_fraction);
    let (lat0, lon0) = p.origin;
    let km_per_deg_lon = KM_PER_DEG_LON_EQUATOR * lat0.to_radians().cos();
    let records = xy
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| {
            let label = if rng.gen_bool(p.homophily_strength) {
                cluster_label[cluster[i]]
            } else if rng.gen_bool(p.local_share) {
                local[i]
            } else if rng.gen_bool(p.poor_fraction) {
                Label::Poor
            } else {
                Label::NonPoor
            };
            let lat = (lat0 + y / KM_PER_DEG_LAT).clamp(-90.0, 90.0);
            VillageRecord::new(format!("v{i:05}"), lat, lon0 + x / km_per_deg_lon, label)
        })
        .collect();

    let name = format!("synthetic-n{}-k{}-s{}", p.n, k, p.seed);
    Ok(SyntheticData {
        dataset: Dataset::new(name, records)?,
        cluster,
        cluster_label,
        cluster_spread_km: spread,
    })
}

/// Poor for the `poor_fraction` share of villages with the fewest others within `radius_km`.
fn local_labels(xy: &[(f64, f64)], radius_km: f64, poor_fraction: f64) -> Vec<Label> {
    let r2 = radius_km * radius_km;
    let counts: Vec<usize> = xy
        .iter()
        .map(|&(x, y)| {
            xy.iter()
                .filter(|&&(u, v)| (u - x).powi(2) + (v - y).powi(2) < r2)
                .count()
        })
        .collect();
    let mut order: Vec<usize> = (0..xy.len()).collect();
    order.sort_by_key(|&i| (counts[i], i));
    let n_poor = (poor_fraction * xy.len() as f64).round() as usize;
    let mut labels = vec![Label::NonPoor; xy.len()];
    for &i in &order[..n_poor] {
        labels[i] = Label::Poor;
    }
    labels
}
