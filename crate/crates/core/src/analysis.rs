//! Descriptive analyses of the village graph: degree and k-core centrality, group
//! statistics with Welch's t-test, and neighbour-label curves against distance.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::geo::{build_graph, SpatialGraph};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CentralityProfile {
    pub degree: Vec<usize>,
    pub coreness: Vec<usize>,
}

impl CentralityProfile {
    pub fn of(g: &SpatialGraph) -> Self {
        CentralityProfile {
            degree: degree_centrality(g),
            coreness: k_core(g),
        }
    }
}

pub fn degree_centrality(g: &SpatialGraph) -> Vec<usize> {
    (0..g.n()).map(|i| g.degree(i)).collect()
}

/// Core number of every node by minimum-degree peeling (bucket queue, O(n + m)).
pub fn k_core(g: &SpatialGraph) -> Vec<usize> {
    let n = g.n();
    let mut deg: Vec<usize> = (0..n).map(|i| g.degree(i)).collect();
    let max_deg = deg.iter().copied().max().unwrap_or(0);

    // nodes sorted by degree, with bucket start offsets
    let mut bin = vec![0usize; max_deg + 1];
    for &d in &deg {
        bin[d] += 1;
    }
    let mut start = 0;
    for b in bin.iter_mut() {
        let count = *b;
        *b = start;
        start += count;
    }
    let mut pos = vec![0usize; n];
    let mut vert = vec![0usize; n];
    for v in 0..n {
        pos[v] = bin[deg[v]];
        vert[pos[v]] = v;
        bin[deg[v]] += 1;
    }
    for d in (1..=max_deg).rev() {
        bin[d] = bin[d - 1];
    }
    if max_deg > 0 || n > 0 {
        bin[0] = 0;
    }

    for idx in 0..n {
        let v = vert[idx];
        for &(u, _) in g.neighbors(v) {
            if deg[u] > deg[v] {
                // move u to the front of its bucket, then shrink the bucket
                let du = deg[u];
                let pu = pos[u];
                let pw = bin[du];
                let w = vert[pw];
                if u != w {
                    pos[u] = pw;
                    vert[pu] = w;
                    pos[w] = pu;
                    vert[pw] = u;
                }
                bin[du] += 1;
                deg[u] -= 1;
            }
        }
    }
    deg
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupStats {
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator); 0 for a single value.
    pub std: f64,
    pub count: usize,
}

impl GroupStats {
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("group statistics need at least one value"));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Ok(GroupStats {
            mean,
            std: var.sqrt(),
            count: values.len(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    pub p: f64,
}

/// Two-sided Welch (unequal variance) t-test.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::invalid("t-test needs at least two values per group"));
    }
    let sa = GroupStats::of(a)?;
    let sb = GroupStats::of(b)?;
    let va = sa.std * sa.std / a.len() as f64;
    let vb = sb.std * sb.std / b.len() as f64;
    if va == 0.0 || vb == 0.0 {
        return Err(Error::invalid("t-test group has zero variance"));
    }
    let se2 = va + vb;
    let t = (sa.mean - sb.mean) / se2.sqrt();
    let df = se2 * se2 / (va * va / (a.len() as f64 - 1.0) + vb * vb / (b.len() as f64 - 1.0));
    let dist =
        StudentsT::new(0.0, 1.0, df).map_err(|e| Error::invalid(format!("student t: {e}")))?;
    let p = (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0);
    Ok(TTest { t, df, p })
}

/// Splits per-node values into (poor, non-poor) groups; unknown labels are dropped.
pub fn split_by_label(values: &[usize], labels: &[Label]) -> (Vec<f64>, Vec<f64>) {
    let mut poor = Vec::new();
    let mut rich = Vec::new();
    for (&v, &l) in values.iter().zip(labels) {
        match l {
            Label::Poor => poor.push(v as f64),
            Label::NonPoor => rich.push(v as f64),
            Label::Unknown => {}
        }
    }
    (poor, rich)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentralityComparison {
    pub measure: &'static str,
    pub poor: GroupStats,
    pub non_poor: GroupStats,
    pub test: TTest,
}

/// Poor vs non-poor comparison for both degree and coreness.
pub fn compare_centrality(
    profile: &CentralityProfile,
    labels: &[Label],
) -> Result<Vec<CentralityComparison>> {
    [("degree", &profile.degree), ("k_core", &profile.coreness)]
        .into_iter()
        .map(|(measure, values)| {
            let (p, r) = split_by_label(values, labels);
            Ok(CentralityComparison {
                measure,
                poor: GroupStats::of(&p)?,
                non_poor: GroupStats::of(&r)?,
                test: welch_t_test(&p, &r)?,
            })
        })
        .collect()
}

/// Neighbourhood composition at one radius, averaged per centre village.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomophilyPoint {
    pub radius_km: f64,
    pub poor_center_poor: f64,
    pub poor_center_non_poor: f64,
    pub non_poor_center_poor: f64,
    pub non_poor_center_non_poor: f64,
    /// Share of poor villages among all neighbours of poor centres; `None` with no neighbours.
    pub poor_share_poor_centers: Option<f64>,
    pub poor_share_non_poor_centers: Option<f64>,
}

/// Counts are taken over labelled villages only, with a strict `< r` radius.
pub fn homophily_curve(dataset: &Dataset, radii: &[f64]) -> Result<Vec<HomophilyPoint>> {
    if radii.is_empty() {
        return Ok(Vec::new());
    }
    if radii[0] <= 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(
            "radii must be positive and strictly increasing",
        ));
    }
    let max_r = *radii.last().unwrap();
    let g = build_graph(dataset, max_r)?;
    Ok(homophily_curve_on(&g, &dataset.labels(), radii))
}

/// Same as [`homophily_curve`], from a graph built with threshold at least the largest radius.
pub fn homophily_curve_on(
    g: &SpatialGraph,
    labels: &[Label],
    radii: &[f64],
) -> Vec<HomophilyPoint> {
    let centers_poor = labels.iter().filter(|&&l| l == Label::Poor).count() as f64;
    let centers_rich = labels.iter().filter(|&&l| l == Label::NonPoor).count() as f64;
    let avg = |total: usize, centers: f64| {
        if centers > 0.0 {
            total as f64 / centers
        } else {
            0.0
        }
    };
    let share =
        |poor: usize, rich: usize| (poor + rich > 0).then(|| poor as f64 / (poor + rich) as f64);

    radii
        .iter()
        .map(|&r| {
            // [centre class][neighbour class]
            let mut counts = [[0usize; 2]; 2];
            for e in g.edges().iter().filter(|e| e.dist_km < r) {
                let (Some(a), Some(b)) = (labels[e.i].class_index(), labels[e.j].class_index())
                else {
                    continue;
                };
                counts[a][b] += 1;
                counts[b][a] += 1;
            }
            HomophilyPoint {
                radius_km: r,
                poor_center_poor: avg(counts[0][0], centers_poor),
                poor_center_non_poor: avg(counts[0][1], centers_poor),
                non_poor_center_poor: avg(counts[1][0], centers_rich),
                non_poor_center_non_poor: avg(counts[1][1], centers_rich),
                poor_share_poor_centers: share(counts[0][0], counts[0][1]),
                poor_share_non_poor_centers: share(counts[1][0], counts[1][1]),
            }
        })
        .collect()
}
