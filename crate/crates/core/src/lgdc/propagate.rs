use crate::error::{Error, Result};
use crate::geo::SpatialGraph;
use crate::linalg::{axpy, Matrix};
use crate::scalar::Scalar;

/// The fixed linear operator of one convolution: for node `i`,
/// `h_i / max(|N_i|, 1) + Σ_j α^dist_ij / (√|N_i| √|N_j|) · h_j`.
///
/// The operator is symmetric, which the backward pass relies on.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagation<T> {
    alpha: T,
    self_weight: Vec<T>,
    /// Per node: (neighbour, edge weight), in adjacency order.
    neighbors: Vec<Vec<(usize, T)>>,
}

pub(crate) fn check_alpha<T: Scalar>(alpha: T) -> Result<()> {
    if alpha >= T::zero() && alpha <= T::one() {
        Ok(())
    } else {
        Err(Error::invalid(format!("alpha {alpha} outside [0, 1]")))
    }
}

/// Decayed, symmetric-normalised weight of one edge.
#[inline]
pub fn edge_weight<T: Scalar>(alpha: T, dist_km: f64, deg_i: usize, deg_j: usize) -> T {
    let norm = T::of(deg_i as f64).sqrt() * T::of(deg_j as f64).sqrt();
    alpha.powf(T::of(dist_km)) / norm
}

impl<T: Scalar> Propagation<T> {
    pub fn new(g: &SpatialGraph, alpha: T) -> Result<Self> {
        check_alpha(alpha)?;
        let self_weight = (0..g.n())
            .map(|i| T::one() / T::of(g.degree(i).max(1) as f64))
            .collect();
        let neighbors = (0..g.n())
            .map(|i| {
                g.neighbors(i)
                    .iter()
                    .map(|&(j, d)| (j, edge_weight(alpha, d, g.degree(i), g.degree(j))))
                    .collect()
            })
            .collect();
        Ok(Propagation {
            alpha,
            self_weight,
            neighbors,
        })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn n(&self) -> usize {
        self.self_weight.len()
    }

    /// Neighbour message of node `i` (no self term).
    pub fn aggregate_row(&self, h: &Matrix<T>, i: usize) -> Vec<T> {
        let mut acc = vec![T::zero(); h.cols()];
        for &(j, w) in &self.neighbors[i] {
            axpy(w, h.row(j), &mut acc);
        }
        acc
    }

    /// Self term plus neighbour message, for every node.
    pub fn apply(&self, h: &Matrix<T>) -> Matrix<T> {
        let mut out = Matrix::zeros(h.rows(), h.cols());
        for i in 0..h.rows() {
            let mut row = self.aggregate_row(h, i);
            axpy(self.self_weight[i], h.row(i), &mut row);
            out.row_mut(i).copy_from_slice(&row);
        }
        out
    }
}

/// Distance-decayed neighbour aggregation for node `i`; zero vector without neighbours.
pub fn aggregate<T: Scalar>(g: &SpatialGraph, h: &Matrix<T>, i: usize, alpha: T) -> Result<Vec<T>> {
    check_alpha(alpha)?;
    let mut acc = vec![T::zero(); h.cols()];
    for &(j, d) in g.neighbors(i) {
        axpy(
            edge_weight(alpha, d, g.degree(i), g.degree(j)),
            h.row(j),
            &mut acc,
        );
    }
    Ok(acc)
}
