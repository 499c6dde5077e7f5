use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::propagate::{check_alpha, Propagation};
use crate::data::Label;
use crate::error::{Error, Result};
use crate::geo::SpatialGraph;
use crate::linalg::{softmax_in_place, Matrix};
use crate::scalar::Scalar;

pub const NUM_CLASSES: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct LgdcLayerParams<T> {
    /// `d_in × d_out`
    pub w: Matrix<T>,
    pub b: Vec<T>,
}

impl<T: Scalar> LgdcLayerParams<T> {
    pub fn zeros(d_in: usize, d_out: usize) -> Self {
        LgdcLayerParams {
            w: Matrix::zeros(d_in, d_out),
            b: vec![T::zero(); d_out],
        }
    }

    pub fn d_in(&self) -> usize {
        self.w.rows()
    }

    pub fn d_out(&self) -> usize {
        self.w.cols()
    }

    fn glorot(d_in: usize, d_out: usize, rng: &mut impl Rng) -> Self {
        let limit = (6.0 / (d_in + d_out) as f64).sqrt();
        let w = Matrix::from_fn(d_in, d_out, |_, _| T::of(rng.gen_range(-limit..limit)));
        LgdcLayerParams {
            w,
            b: vec![T::zero(); d_out],
        }
    }
}

/// `P h W + b`, followed by ReLU when `relu` is set.
///
/// Narrowing layers compute `P (h W)` instead of `(P h) W`, which is the same operator
/// applied to fewer columns.
pub fn layer_forward<T: Scalar>(
    prop: &Propagation<T>,
    h: &Matrix<T>,
    params: &LgdcLayerParams<T>,
    relu: bool,
) -> Result<Matrix<T>> {
    if h.cols() != params.d_in() || h.rows() != prop.n() || params.b.len() != params.d_out() {
        return Err(Error::Shape(format!(
            "layer expects {} rows × {} features, got {} × {}",
            prop.n(),
            params.d_in(),
            h.rows(),
            h.cols()
        )));
    }
    if params.d_out() < params.d_in() {
        let mut z = add_bias(prop.apply(&h.matmul(&params.w)), &params.b);
        if relu {
            z = z.map(|v| v.max(T::zero()));
        }
        Ok(z)
    } else {
        Ok(affine(&prop.apply(h), params, relu))
    }
}

pub(crate) fn add_bias<T: Scalar>(mut z: Matrix<T>, b: &[T]) -> Matrix<T> {
    for r in 0..z.rows() {
        for (v, &bias) in z.row_mut(r).iter_mut().zip(b) {
            *v = *v + bias;
        }
    }
    z
}

pub(crate) fn affine<T: Scalar>(
    x: &Matrix<T>,
    params: &LgdcLayerParams<T>,
    relu: bool,
) -> Matrix<T> {
    let mut z = add_bias(x.matmul(&params.w), &params.b);
    if relu {
        z.as_mut_slice()
            .iter_mut()
            .for_each(|v| *v = v.max(T::zero()));
    }
    z
}

/// Stack of distance convolutions ending in two class logits. Class 0 is Poor.
#[derive(Debug, Clone, PartialEq)]
pub struct LgdcModel<T> {
    pub layers: Vec<LgdcLayerParams<T>>,
    pub alpha: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction<T> {
    pub class: Label,
    pub poor_probability: T,
}

impl<T: Scalar> LgdcModel<T> {
    /// Glorot-uniform weights, zero biases; `dims` lists layer widths from input to output.
    pub fn init(dims: &[usize], alpha: T, seed: u64) -> Result<Self> {
        if dims.len() < 2 || *dims.last().unwrap() != NUM_CLASSES {
            return Err(Error::invalid(
                "model needs at least one layer and a final width of 2",
            ));
        }
        if dims.contains(&0) {
            return Err(Error::invalid("layer widths must be positive"));
        }
        check_alpha(alpha)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = dims
            .windows(2)
            .map(|w| LgdcLayerParams::glorot(w[0], w[1], &mut rng))
            .collect();
        Ok(LgdcModel { layers, alpha })
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        let last = self
            .layers
            .last()
            .ok_or_else(|| Error::invalid("model has no layers"))?;
        if last.d_out() != NUM_CLASSES {
            return Err(Error::Shape(format!(
                "final layer width {} != 2",
                last.d_out()
            )));
        }
        for (l, w) in self.layers.windows(2).enumerate() {
            if w[0].d_out() != w[1].d_in() {
                return Err(Error::Shape(format!(
                    "layer {l} output does not feed layer {}",
                    l + 1
                )));
            }
        }
        for p in &self.layers {
            if !p.w.all_finite() || p.b.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("model parameters".into()));
            }
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].d_in()
    }

    pub fn propagation(&self, g: &SpatialGraph) -> Result<Propagation<T>> {
        Propagation::new(g, self.alpha)
    }

    /// Logits for every node.
    pub fn forward(&self, g: &SpatialGraph, features: &Matrix<T>) -> Result<Matrix<T>> {
        let prop = self.propagation(g)?;
        self.forward_with(&prop, features)
    }

    pub fn forward_with(&self, prop: &Propagation<T>, features: &Matrix<T>) -> Result<Matrix<T>> {
        let mut h = features.clone();
        let last = self.layers.len() - 1;
        for (l, p) in self.layers.iter().enumerate() {
            h = layer_forward(prop, &h, p, l < last)?;
        }
        Ok(h)
    }

    pub fn predict(&self, g: &SpatialGraph, features: &Matrix<T>) -> Result<Vec<Prediction<T>>> {
        Ok(predict_from_logits(&self.forward(g, features)?))
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|p| p.w.as_slice().len() + p.b.len())
            .sum()
    }

    /// Checkpoint text: `layers alpha`, then per layer `d_in d_out`, the weight rows and the bias row.
    pub fn to_text(&self) -> String {
        let fmt = |x: T| format!("{:.7e}", x.as_f64());
        let mut out = format!("{} {}\n", self.layers.len(), fmt(self.alpha));
        for p in &self.layers {
            let _ = writeln!(out, "{} {}", p.d_in(), p.d_out());
            for row in p.w.rows_iter() {
                out.push_str(&row.iter().map(|&x| fmt(x)).collect::<Vec<_>>().join(" "));
                out.push('\n');
            }
            out.push_str(&p.b.iter().map(|&x| fmt(x)).collect::<Vec<_>>().join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let mut next = |what: &str| -> Result<(usize, Vec<f64>)> {
            let (idx, line) = lines.next().ok_or_else(|| Error::Parse {
                line: 0,
                msg: format!("checkpoint ended before {what}"),
            })?;
            let vals = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::Parse {
                    line: idx + 1,
                    msg: format!("bad {what} line"),
                })?;
            Ok((idx + 1, vals))
        };
        let (line, header) = next("header")?;
        let [count, alpha] = header[..] else {
            return Err(Error::Parse {
                line,
                msg: "expected `layers alpha`".into(),
            });
        };
        let mut layers = Vec::new();
        for _ in 0..count as usize {
            let (line, shape) = next("layer shape")?;
            let [d_in, d_out] = shape[..] else {
                return Err(Error::Parse {
                    line,
                    msg: "expected `d_in d_out`".into(),
                });
            };
            let (d_in, d_out) = (d_in as usize, d_out as usize);
            let mut w = Vec::with_capacity(d_in * d_out);
            for _ in 0..d_in {
                let (line, row) = next("weight row")?;
                if row.len() != d_out {
                    return Err(Error::Parse {
                        line,
                        msg: format!("expected {d_out} weights"),
                    });
                }
                w.extend(row.into_iter().map(T::of));
            }
            let (line, b) = next("bias row")?;
            if b.len() != d_out {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected {d_out} biases"),
                });
            }
            layers.push(LgdcLayerParams {
                w: Matrix::from_vec(d_in, d_out, w),
                b: b.into_iter().map(T::of).collect(),
            });
        }
        let model = LgdcModel {
            layers,
            alpha: T::of(alpha),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_text(&text)
    }
}

/// Softmax over the two logits; ties go to NonPoor, the majority class.
pub fn predict_from_logits<T: Scalar>(logits: &Matrix<T>) -> Vec<Prediction<T>> {
    logits
        .rows_iter()
        .map(|row| {
            let mut p = row.to_vec();
            softmax_in_place(&mut p);
            let class = if row[0] > row[1] {
                Label::Poor
            } else {
                Label::NonPoor
            };
            Prediction {
                class,
                poor_probability: p[0],
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edgeless_layer_is_affine() {
        let g = SpatialGraph::edgeless(2);
        let prop = Propagation::new(&g, 0.8).unwrap();
        let h = Matrix::from_vec(2, 2, vec![1.0, 2.0, -1.0, 0.5]);
        let p = LgdcLayerParams {
            w: Matrix::from_vec(2, 1, vec![2.0, 3.0]),
            b: vec![0.5],
        };
        let out = layer_forward(&prop, &h, &p, false).unwrap();
        assert_eq!(out.as_slice(), &[8.5, 0.0]);
        let relu = layer_forward(
            &prop,
            &h,
            &LgdcLayerParams {
                b: vec![-9.0],
                ..p.clone()
            },
            true,
        )
        .unwrap();
        assert_eq!(relu.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn identity_layer_returns_input() {
        let g = SpatialGraph::edgeless(1);
        let prop = Propagation::new(&g, 1.0).unwrap();
        let h = Matrix::from_vec(1, 3, vec![0.25, -4.0, 7.0]);
        let p = LgdcLayerParams {
            w: Matrix::identity(3),
            b: vec![0.0; 3],
        };
        assert_eq!(layer_forward(&prop, &h, &p, false).unwrap(), h);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let g = SpatialGraph::edgeless(2);
        let prop = Propagation::new(&g, 1.0).unwrap();
        let h = Matrix::<f64>::zeros(2, 3);
        assert!(matches!(
            layer_forward(&prop, &h, &LgdcLayerParams::zeros(2, 2), false),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn tie_goes_to_non_poor() {
        let logits = Matrix::from_vec(3, 2, vec![2.0, 2.0, 10.0, -10.0, -1.0, 3.0]);
        let pred = predict_from_logits(&logits);
        assert_eq!(pred[0].class, Label::NonPoor);
        assert_eq!(pred[0].poor_probability, 0.5);
        assert_eq!(pred[1].class, Label::Poor);
        assert!(pred[1].poor_probability > 0.999);
        assert_eq!(pred[2].class, Label::NonPoor);
        for p in pred {
            assert!((0.0..=1.0).contains(&p.poor_probability));
        }
    }

    #[test]
    fn init_validates() {
        assert!(LgdcModel::<f64>::init(&[4, 3], 0.8, 1).is_err());
        assert!(LgdcModel::<f64>::init(&[4, 0, 2], 0.8, 1).is_err());
        assert!(LgdcModel::<f64>::init(&[4, 3, 2], 1.2, 1).is_err());
        let m = LgdcModel::<f64>::init(&[4, 3, 2], 0.8, 1).unwrap();
        assert_eq!(m.parameter_count(), 4 * 3 + 3 + 3 * 2 + 2);
        assert_eq!(m, LgdcModel::init(&[4, 3, 2], 0.8, 1).unwrap());
    }

    #[test]
    fn checkpoint_text() {
        let m = LgdcModel::<f64>::init(&[3, 2, 2], 0.8, 4).unwrap();
        let text = m.to_text();
        assert!(text.starts_with("2 8.0000000e-1\n3 2\n"));
        let back = LgdcModel::<f64>::parse_text(&text).unwrap();
        assert_eq!(back.layers.len(), 2);
        assert!(back.layers[0].w.max_abs_diff(&m.layers[0].w) < 1e-7);
        assert!(LgdcModel::<f64>::parse_text("1 0.5\n2 2\n1 2\n").is_err());
        assert!(LgdcModel::<f64>::parse_text("1 0.5\n1 3\n1 2 3\n0 0 0\n").is_err());
    }
}
