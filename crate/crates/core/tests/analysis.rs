use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};
use village_graph::analysis::{
    compare_centrality, degree_centrality, homophily_curve, homophily_curve_on, k_core,
    welch_t_test, CentralityProfile,
};
use village_graph::data::{generate_synthetic, generate_synthetic_detailed, SynthParams};
use village_graph::geo::{Edge, SpatialGraph};
use village_graph::{build_graph, Dataset, Label, VillageRecord};

mod common;
use common::{brute_coreness, random_graph};

#[test]
fn kcore_matches_brute_force_peeling() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..100 {
        let n = rng.gen_range(1..=50);
        let p = [0.05, 0.1, 0.2, 0.4][case % 4];
        let g = random_graph(n, p, &mut rng);
        assert_eq!(k_core(&g), brute_coreness(&g), "case {case}, n = {n}");
    }
}

#[test]
fn kcore_is_invariant_under_relabelling() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..30 {
        let n = rng.gen_range(2..40);
        let g = random_graph(n, 0.15, &mut rng);
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let relabelled = SpatialGraph::from_edges(
            n,
            5.0,
            g.edges()
                .iter()
                .map(|e| Edge {
                    i: perm[e.i],
                    j: perm[e.j],
                    dist_km: e.dist_km,
                })
                .collect(),
        )
        .unwrap();
        let (a, b) = (k_core(&g), k_core(&relabelled));
        let (da, db) = (degree_centrality(&g), degree_centrality(&relabelled));
        for i in 0..n {
            assert_eq!(a[i], b[perm[i]]);
            assert_eq!(da[i], db[perm[i]]);
        }
    }
}

#[test]
fn welch_matches_textbook_formula() {
    let a = [3.1, 4.7, 2.2, 5.9, 4.4, 3.3];
    let b = [6.2, 7.9, 5.1, 8.8, 6.6];
    let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
    let var = |x: &[f64]| {
        let m = mean(x);
        x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64
    };
    let (va, vb) = (var(&a) / a.len() as f64, var(&b) / b.len() as f64);
    let t = (mean(&a) - mean(&b)) / (va + vb).sqrt();
    let df = (va + vb).powi(2) / (va * va / (a.len() - 1) as f64 + vb * vb / (b.len() - 1) as f64);
    let p = 2.0 * StudentsT::new(0.0, 1.0, df).unwrap().cdf(-t.abs());
    let got = welch_t_test(&a, &b).unwrap();
    assert!((got.t - t).abs() < 1e-12);
    assert!((got.df - df).abs() < 1e-9);
    assert!((got.p - p).abs() < 1e-12);

    let same = welch_t_test(&a, &a).unwrap();
    assert_eq!(same.t, 0.0);
    assert!((same.p - 1.0).abs() < 1e-12);
    assert!(
        welch_t_test(&[0.0, 0.0, 0.0, 1.0], &[10.0, 10.0, 10.0, 11.0])
            .unwrap()
            .p
            < 1e-3
    );
}

#[test]
fn centrality_gap_on_planted_data() {
    let ds = generate_synthetic(2000, 20, 0.27, 0.8, 5).unwrap();
    let g = build_graph(&ds, 5.0).unwrap();
    let cmp = compare_centrality(&CentralityProfile::of(&g), &ds.labels()).unwrap();
    for c in cmp {
        assert!(c.poor.mean < c.non_poor.mean, "{}", c.measure);
        assert!(c.test.p < 1e-3, "{}: p = {}", c.measure, c.test.p);
    }
}

#[test]
fn small_radius_gives_empty_neighbourhoods() {
    let recs = vec![
        VillageRecord::new("a", 30.0, 109.0, Label::Poor),
        VillageRecord::new("b", 30.1, 109.1, Label::NonPoor),
    ];
    let ds = Dataset::new("two", recs).unwrap();
    let curve = homophily_curve(&ds, &[1.0, 2.0]).unwrap();
    for p in curve {
        assert_eq!(
            p.poor_center_poor
                + p.poor_center_non_poor
                + p.non_poor_center_poor
                + p.non_poor_center_non_poor,
            0.0
        );
        assert_eq!(p.poor_share_poor_centers, None);
    }
}

#[test]
fn single_label_clusters_are_pure_at_short_range() {
    let mut params = SynthParams::new(600, 12, 0.3, 1.0, 4);
    params.cluster_spacing_km = 60.0;
    params.spread_km = (0.5, 1.0);
    let s = generate_synthetic_detailed(&params).unwrap();
    let curve = homophily_curve(&s.dataset, &[1.0, 2.0, 3.0]).unwrap();
    for p in curve {
        assert_eq!(p.poor_share_poor_centers, Some(1.0));
        assert_eq!(p.poor_share_non_poor_centers, Some(0.0));
    }
}

#[test]
fn planted_homophily_decays_with_radius() {
    let ds = generate_synthetic(2000, 20, 0.27, 0.8, 2).unwrap();
    let curve = homophily_curve(&ds, &[1.0, 2.0, 4.0, 8.0, 16.0, 32.0]).unwrap();
    let poor: Vec<f64> = curve
        .iter()
        .map(|p| p.poor_share_poor_centers.unwrap())
        .collect();
    let rich: Vec<f64> = curve
        .iter()
        .map(|p| p.poor_share_non_poor_centers.unwrap())
        .collect();
    assert!(poor.first() > poor.last(), "{poor:?}");
    assert!(rich.first() < rich.last(), "{rich:?}");
}

#[test]
fn unknown_labels_are_left_out_of_the_curves() {
    let recs = vec![
        VillageRecord::new("a", 30.0, 109.0, Label::Poor),
        VillageRecord::new("b", 30.001, 109.0, Label::Unknown),
        VillageRecord::new("c", 30.002, 109.0, Label::NonPoor),
    ];
    let ds = Dataset::new("three", recs).unwrap();
    let p = homophily_curve(&ds, &[1.0]).unwrap()[0];
    assert_eq!(p.poor_center_non_poor, 1.0);
    assert_eq!(p.non_poor_center_poor, 1.0);
    assert_eq!(p.poor_center_poor + p.non_poor_center_non_poor, 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn curve_counts_grow_with_radius_and_add_up(seed in 0u64..1000, n in 2usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(n, 0.2, &mut rng);
        let labels: Vec<Label> = (0..n)
            .map(|_| match rng.gen_range(0..5) {
                0 => Label::Unknown,
                1 | 2 => Label::Poor,
                _ => Label::NonPoor,
            })
            .collect();
        let radii = [0.5, 1.0, 2.0, 3.0, 4.0, 5.0];
        let curve = homophily_curve_on(&g, &labels, &radii);
        let n_poor = labels.iter().filter(|&&l| l == Label::Poor).count() as f64;
        let n_rich = labels.iter().filter(|&&l| l == Label::NonPoor).count() as f64;
        let mut prev = 0.0;
        for p in &curve {
            let total = n_poor * (p.poor_center_poor + p.poor_center_non_poor)
                + n_rich * (p.non_poor_center_poor + p.non_poor_center_non_poor);
            let direct: usize = (0..n)
                .filter(|&i| labels[i].is_known())
                .map(|i| g.neighbors(i).iter().filter(|&&(j, d)| d < p.radius_km && labels[j].is_known()).count())
                .sum();
            prop_assert!((total - direct as f64).abs() < 1e-9);
            prop_assert!(total >= prev);
            prev = total;
        }
    }
}
