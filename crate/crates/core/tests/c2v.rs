use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use village_graph::c2v::{
    build_similarity_graph, center_loss_and_grad, centrality2vec, centrality_sequence,
    combined_transition, context_distribution, pair_loss, pair_loss_and_grad, random_walks,
    sequence_cost, skipgram_train, Centrality2VecConfig, CentralitySequence, SkipGramConfig,
    Transition, WalkCorpus,
};
use village_graph::geo::{Edge, SpatialGraph};
use village_graph::linalg::Matrix;

mod common;
use common::{brute_cost, random_seq, seq};

#[test]
fn sequence_cost_matches_double_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let a = random_seq(&mut rng, 6, 9);
        let b = random_seq(&mut rng, 6, 9);
        assert!(
            (sequence_cost(&a, &b) - brute_cost(&a, &b)).abs() < 1e-12,
            "{a:?} -> {b:?}"
        );
        assert_eq!(sequence_cost(&a, &a), 0.0);
    }
}

#[test]
fn sequence_cost_hand_example() {
    // 2 is matched by 2 at no cost, 4 is matched by 2 at cost 4/2 - 1
    assert_eq!(sequence_cost(&seq(&[1, 2]), &seq(&[2, 4])), 1.0);
    assert_eq!(sequence_cost(&seq(&[2, 4]), &seq(&[1, 2])), 1.0);
    assert_eq!(sequence_cost(&seq(&[3]), &seq(&[1, 2])), 2.0 + 0.5);
    assert_eq!(sequence_cost(&seq(&[1, 2]), &seq(&[3])), 0.5);
}

#[test]
fn top_k_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..40 {
        let n = rng.gen_range(2..=30);
        let k = rng.gen_range(1..=12);
        let seqs: Vec<CentralitySequence> = (0..n).map(|_| random_seq(&mut rng, 5, 6)).collect();
        let g = build_similarity_graph(&seqs, k).unwrap();
        for i in 0..n {
            let mut all: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (brute_cost(&seqs[i], &seqs[j]), j))
                .collect();
            all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let want: Vec<usize> = all.iter().take(k).map(|x| x.1).collect();
            assert_eq!(g.neighbors(i), &want[..]);
        }
    }
}

#[test]
fn ring_ties_go_to_lowest_indices() {
    let n = 8;
    let edges = (0..n)
        .map(|i| Edge {
            i: i.min((i + 1) % n),
            j: i.max((i + 1) % n),
            dist_km: 1.0,
        })
        .collect();
    let g = SpatialGraph::from_edges(n, 5.0, edges).unwrap();
    let deg: Vec<usize> = (0..n).map(|i| g.degree(i)).collect();
    let seqs: Vec<_> = (0..n)
        .map(|i| centrality_sequence(&g, &deg, i, true))
        .collect();
    let sim = build_similarity_graph(&seqs, 3).unwrap();
    assert_eq!(sim.neighbors(0), &[1, 2, 3]);
    assert_eq!(sim.neighbors(2), &[0, 1, 3]);
    assert_eq!(sim.neighbors(7), &[0, 1, 2]);
    let sim = build_similarity_graph(&seqs, 100).unwrap();
    assert!((0..n).all(|i| sim.neighbors(i).len() == n - 1));
}

#[test]
fn combined_transition_uses_the_union() {
    let seqs = [seq(&[1]), seq(&[2]), seq(&[3]), seq(&[9])];
    let by_degree = build_similarity_graph(&seqs, 1).unwrap();
    let by_core = build_similarity_graph(&[seq(&[5]), seq(&[1]), seq(&[2]), seq(&[5])], 1).unwrap();
    let t = combined_transition(&by_degree, &by_core).unwrap();
    // node 0: degree picks 1, core picks 3
    assert_eq!(t.distribution(0), vec![(1, 0.5), (3, 0.5)]);
    // node 1: [2] is closer to [3] than to [1], and [1] is closest to [2]
    assert_eq!(t.distribution(1), vec![(2, 1.0)]);
    for i in 0..4 {
        let s: f64 = t.distribution(i).iter().map(|x| x.1).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }
    let dangling = Transition::from_lists(vec![vec![], vec![0]]).unwrap();
    assert_eq!(dangling.distribution(0), vec![(0, 0.5), (1, 0.5)]);
}

#[test]
fn walks_follow_a_chain_exactly() {
    let t = Transition::from_lists(vec![vec![1], vec![2], vec![0]]).unwrap();
    let c = random_walks(&t, 4, 7, 99).unwrap();
    for w in &c.sequences {
        for pair in w.windows(2) {
            assert_eq!(pair[1], (pair[0] + 1) % 3);
        }
    }
}

#[test]
fn walk_frequencies_match_transition_probabilities() {
    let t = Transition::from_lists(vec![vec![1, 2, 3], vec![0, 2], vec![], vec![0]]).unwrap();
    let c = random_walks(&t, 250, 101, 12).unwrap();
    let n = t.n();
    let mut counts = vec![vec![0usize; n]; n];
    for w in &c.sequences {
        for pair in w.windows(2) {
            counts[pair[0]][pair[1]] += 1;
        }
    }
    assert!(counts.iter().flatten().sum::<usize>() >= 100_000);
    for i in 0..n {
        let out: usize = counts[i].iter().sum();
        let probs: Vec<f64> = {
            let mut p = vec![0.0; n];
            for (j, q) in t.distribution(i) {
                p[j] = q;
            }
            p
        };
        for j in 0..n {
            let expect = out as f64 * probs[j];
            let sd = (out as f64 * probs[j] * (1.0 - probs[j])).sqrt();
            assert!(
                (counts[i][j] as f64 - expect).abs() <= 3.0 * sd.max(1e-9),
                "{i}->{j}: {} vs {expect} ± {sd}",
                counts[i][j]
            );
        }
    }
}

fn random_h(n: usize, d: usize, seed: u64) -> Matrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_fn(n, d, |_, _| rng.gen_range(-0.8..0.8))
}

#[test]
fn softmax_is_a_distribution() {
    let h = random_h(9, 4, 1);
    for i in 0..9 {
        let p = context_distribution(&h, i);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|&x| x > 0.0));
        assert!((pair_loss(&h, i, 3) + p[3].ln()).abs() < 1e-12);
    }
}

#[test]
fn skipgram_gradient_matches_finite_differences() {
    let h = random_h(7, 3, 2);
    let contexts = [(1usize, 2.0), (4, 1.0), (2, 3.0)];
    let loss = |m: &Matrix<f64>| center_loss_and_grad(m, 2, &contexts).0;
    let (_, grad) = center_loss_and_grad(&h, 2, &contexts);
    let eps = 1e-6;
    for r in 0..7 {
        for c in 0..3 {
            let mut plus = h.clone();
            plus[(r, c)] += eps;
            let mut minus = h.clone();
            minus[(r, c)] -= eps;
            let numeric = (loss(&plus) - loss(&minus)) / (2.0 * eps);
            let analytic = grad[(r, c)];
            let rel = (numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(1e-3);
            assert!(rel < 1e-5, "({r},{c}): {analytic} vs {numeric}");
        }
    }
    let (l, g) = pair_loss_and_grad(&h, 5, 5);
    assert!((l - pair_loss(&h, 5, 5)).abs() < 1e-12);
    assert!(g.all_finite());
}

/// With one shared matrix the centre's own logit `|h_a|²` keeps pace with `h_b·h_a`, so
/// the argmax runs over the other nodes, which are the only possible contexts.
#[test]
fn repeated_pair_becomes_the_argmax() {
    let corpus = WalkCorpus {
        walk_length: 2,
        sequences: vec![vec![0, 1]; 50],
    };
    let cfg = SkipGramConfig {
        dim: 4,
        window: 1,
        epochs: 30,
        lr: 0.5,
        init_std: 0.1,
        seed: 4,
    };
    let (emb, report) = skipgram_train::<f64>(&corpus, 5, &cfg).unwrap();
    let p = context_distribution(emb.matrix(), 0);
    let best = (1..5).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
    assert_eq!(best, 1);
    assert!(p[1] > 0.9 * p[1..].iter().sum::<f64>(), "{p:?}");
    assert!(p[1] > 10.0 * p[2].max(p[3]).max(p[4]), "{p:?}");
    assert!(report.epoch_losses.last() < report.epoch_losses.first());
}

#[test]
fn small_steps_do_not_increase_the_loss() {
    let t = Transition::from_lists(vec![
        vec![1, 2],
        vec![0, 3],
        vec![0, 3],
        vec![1, 2, 4],
        vec![3, 5],
        vec![4],
    ])
    .unwrap();
    let corpus = random_walks(&t, 10, 20, 8).unwrap();
    for lr in [0.025, 0.01] {
        let cfg = SkipGramConfig {
            dim: 8,
            window: 3,
            epochs: 5,
            lr,
            init_std: 0.1,
            seed: 6,
        };
        let (_, report) = skipgram_train::<f64>(&corpus, 6, &cfg).unwrap();
        for pair in report.epoch_losses.windows(2) {
            assert!(pair[1] <= pair[0], "lr {lr}: {:?}", report.epoch_losses);
        }
    }
}

/// Two identical copies of a star-plus-tail graph; a node and its copy share every
/// centrality sequence.
#[test]
fn mirrored_components_embed_close_together() {
    let shape = [
        (0, 1),
        (0, 2),
        (0, 3),
        (0, 4),
        (4, 5),
        (5, 6),
        (6, 7),
        (2, 3),
    ];
    let half = 8;
    let mut edges = Vec::new();
    for copy in 0..2 {
        for &(a, b) in &shape {
            edges.push(Edge {
                i: a + copy * half,
                j: b + copy * half,
                dist_km: 1.0,
            });
        }
    }
    let g = SpatialGraph::from_edges(2 * half, 5.0, edges).unwrap();
    let cfg = Centrality2VecConfig {
        top_k: 2,
        walks_per_node: 20,
        walk_length: 40,
        skipgram: SkipGramConfig {
            dim: 16,
            ..Default::default()
        },
        ..Default::default()
    };
    let out = centrality2vec::<f64>(&g, &cfg).unwrap();
    let e = &out.embedding;
    let n = 2 * half;
    let mut all = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                all += e.cosine(i, j);
            }
        }
    }
    let average = all / (n * (n - 1)) as f64;
    let mirrored = (0..half).map(|i| e.cosine(i, i + half)).sum::<f64>() / half as f64;
    assert!(
        mirrored > average,
        "mirrored {mirrored} vs average {average}"
    );
}
