use crate::data::Label;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Poor is the positive class for AUROC; precision, recall and F1 are macro-averaged
/// over both classes (F1 is the mean of the per-class F1 scores).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auroc: f64,
}

pub fn compute_metrics<T: Scalar>(
    pred: &[Label],
    poor_prob: &[T],
    truth: &[Label],
) -> Result<Metrics> {
    if pred.len() != truth.len() || poor_prob.len() != truth.len() {
        return Err(Error::Shape(
            "predictions, scores and labels differ in length".into(),
        ));
    }
    if truth.iter().any(|l| !l.is_known()) || pred.iter().any(|l| !l.is_known()) {
        return Err(Error::invalid("metrics need known labels and predictions"));
    }
    // confusion[true][pred]
    let mut confusion = [[0usize; 2]; 2];
    for (&p, &t) in pred.iter().zip(truth) {
        confusion[t.class_index().unwrap()][p.class_index().unwrap()] += 1;
    }
    let actual = [
        confusion[0][0] + confusion[0][1],
        confusion[1][0] + confusion[1][1],
    ];
    if actual[0] == 0 || actual[1] == 0 {
        return Err(Error::invalid(
            "metrics need both classes among the true labels",
        ));
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let mut precision = 0.0;
    let mut recall = 0.0;
    let mut f1 = 0.0;
    for c in 0..2 {
        let predicted = confusion[0][c] + confusion[1][c];
        let p = ratio(confusion[c][c], predicted);
        let r = ratio(confusion[c][c], actual[c]);
        precision += p / 2.0;
        recall += r / 2.0;
        f1 += if p + r > 0.0 { p * r / (p + r) } else { 0.0 };
    }
    let scores: Vec<f64> = poor_prob.iter().map(|p| p.as_f64()).collect();
    let positive: Vec<bool> = truth.iter().map(|&l| l == Label::Poor).collect();
    Ok(Metrics {
        accuracy: ratio(confusion[0][0] + confusion[1][1], truth.len()),
        precision,
        recall,
        f1,
        auroc: auroc(&scores, &positive)?,
    })
}

/// Probability that a random positive outscores a random negative, ties counting one half.
/// Computed from mid-ranks in O(n log n).
pub fn auroc(scores: &[f64], positive: &[bool]) -> Result<f64> {
    if scores.len() != positive.len() {
        return Err(Error::Shape("scores and labels differ in length".into()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NonFinite("NaN score".into()));
    }
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::invalid("AUROC needs both classes"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && scores[order[end + 1]] == scores[order[start]] {
            end += 1;
        }
        // ranks are 1-based; a tie group shares its mean rank
        let mid = (start + end) as f64 / 2.0 + 1.0;
        rank_sum += mid * order[start..=end].iter().filter(|&&i| positive[i]).count() as f64;
        start = end + 1;
    }
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}
