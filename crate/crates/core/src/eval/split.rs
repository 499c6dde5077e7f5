use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::Label;
use crate::error::{Error, Result};

/// Disjoint train/validation/test node sets, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl Split {
    pub fn check_disjoint(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for &i in self.train.iter().chain(&self.val).chain(&self.test) {
            if !seen.insert(i) {
                return Err(Error::invalid(format!(
                    "node {i} appears in more than one split part"
                )));
            }
        }
        Ok(())
    }
}

/// Stratified split of the labelled nodes. Each class is shuffled and divided by the
/// largest-remainder rule (ties to the earlier part); every part gets at least one
/// node of every class.
pub fn stratified_split(labels: &[Label], ratios: [f64; 3], seed: u64) -> Result<Split> {
    if ratios.iter().any(|&r| !(r > 0.0)) || (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "split ratios {ratios:?} must be positive and sum to 1 (validation and test must be non-empty)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parts: [Vec<usize>; 3] = Default::default();
    for class in [Label::Poor, Label::NonPoor] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < 3 {
            return Err(Error::invalid(format!(
                "class {} has {} labelled nodes; at least 3 are needed to split",
                class.as_str(),
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        let counts = allocate(members.len(), ratios);
        let mut start = 0;
        for (part, &c) in parts.iter_mut().zip(&counts) {
            part.extend_from_slice(&members[start..start + c]);
            start += c;
        }
    }
    for p in &mut parts {
        p.sort_unstable();
    }
    let [train, val, test] = parts;
    Ok(Split { train, val, test })
}

fn allocate(m: usize, ratios: [f64; 3]) -> [usize; 3] {
    let exact: Vec<f64> = ratios.iter().map(|r| r * m as f64).collect();
    let mut counts = [0usize; 3];
    for k in 0..3 {
        counts[k] = (exact[k] + 1e-9).floor() as usize;
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| {
        (exact[b] - counts[b] as f64)
            .total_cmp(&(exact[a] - counts[a] as f64))
            .then(a.cmp(&b))
    });
    let mut left = m - counts.iter().sum::<usize>();
    for &k in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[k] += 1;
        left -= 1;
    }
    // keep every part non-empty
    for k in 0..3 {
        if counts[k] == 0 {
            let donor = (0..3)
                .max_by_key(|&j| (counts[j], std::cmp::Reverse(j)))
                .unwrap();
            counts[donor] -= 1;
            counts[k] += 1;
        }
    }
    counts
}
