use super::model::{
    add_bias, affine, predict_from_logits, LgdcLayerParams, LgdcModel, NUM_CLASSES,
};
use super::propagate::Propagation;
use crate::data::Label;
use crate::error::{Error, Result};
use crate::eval::{compute_metrics, Split};
use crate::geo::SpatialGraph;
use crate::linalg::{log_sum_exp, softmax_in_place, Matrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct LgdcConfig {
    pub alpha: f64,
    pub hidden: usize,
    /// Number of convolution layers, including the output layer.
    pub layers: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    /// Stop after this many epochs without a better validation macro-F1.
    pub patience: usize,
    pub seed: u64,
    /// Weight the loss by inverse class frequency.
    pub class_weighted: bool,
}

impl Default for LgdcConfig {
    fn default() -> Self {
        LgdcConfig {
            alpha: 0.8,
            hidden: 64,
            layers: 2,
            lr: 0.01,
            weight_decay: 5e-4,
            epochs: 300,
            patience: 30,
            seed: 1,
            class_weighted: false,
        }
    }
}

impl LgdcConfig {
    pub fn dims(&self, input_dim: usize) -> Vec<usize> {
        let mut dims = vec![input_dim];
        dims.extend(std::iter::repeat_n(self.hidden, self.layers.saturating_sub(1)));
        dims.push(NUM_CLASSES);
        dims
    }
}

/// Mean cross-entropy over a node set plus `weight_decay / 2 · Σ ||W||²` (biases are not decayed).
pub struct Objective<'a, T> {
    prop: &'a Propagation<T>,
    first: Matrix<T>,
    /// (node, class, weight / Σ weights)
    targets: Vec<(usize, usize, T)>,
    weight_decay: T,
}

/// Where a layer applied the propagation operator. `P (a W) = (P a) W`, so a layer that
/// narrows the width propagates after the product and only touches `d_out` columns.
enum Input<T> {
    /// Propagated input `P a`.
    Before(Matrix<T>),
    /// Raw input `a`; the operator was applied to `a W`.
    After(Matrix<T>),
}

struct Cache<T> {
    inputs: Vec<Input<T>>,
    /// Pre-activation output of each layer.
    outputs: Vec<Matrix<T>>,
}

impl<'a, T: Scalar> Objective<'a, T> {
    pub fn new(
        prop: &'a Propagation<T>,
        features: &Matrix<T>,
        labels: &[Label],
        nodes: &[usize],
        weight_decay: f64,
        class_weighted: bool,
    ) -> Result<Self> {
        if features.rows() != prop.n() || labels.len() != prop.n() {
            return Err(Error::Shape(
                "features, labels and graph disagree on node count".into(),
            ));
        }
        let mut counts = [0usize; NUM_CLASSES];
        let mut raw = Vec::with_capacity(nodes.len());
        for &i in nodes {
            let c = labels[i].class_index().ok_or_else(|| {
                Error::invalid(format!("node {i} in the training set has no label"))
            })?;
            counts[c] += 1;
            raw.push((i, c));
        }
        let class_weight = |c: usize| {
            if class_weighted {
                nodes.len() as f64 / (NUM_CLASSES as f64 * counts[c] as f64)
            } else {
                1.0
            }
        };
        let total: f64 = raw.iter().map(|&(_, c)| class_weight(c)).sum();
        let targets = raw
            .into_iter()
            .map(|(i, c)| (i, c, T::of(class_weight(c) / total)))
            .collect();
        Ok(Objective {
            prop,
            first: prop.apply(features),
            targets,
            weight_decay: T::of(weight_decay),
        })
    }

    fn forward(&self, model: &LgdcModel<T>) -> Cache<T> {
        let mut inputs = Vec::with_capacity(model.layers.len());
        let mut outputs: Vec<Matrix<T>> = Vec::with_capacity(model.layers.len());
        for (l, p) in model.layers.iter().enumerate() {
            let (input, z) = if l == 0 {
                (
                    Input::Before(self.first.clone()),
                    affine(&self.first, p, false),
                )
            } else {
                let a = outputs[l - 1].map(|v| v.max(T::zero()));
                if p.d_out() < p.d_in() {
                    let z = add_bias(self.prop.apply(&a.matmul(&p.w)), &p.b);
                    (Input::After(a), z)
                } else {
                    let pa = self.prop.apply(&a);
                    let z = affine(&pa, p, false);
                    (Input::Before(pa), z)
                }
            };
            inputs.push(input);
            outputs.push(z);
        }
        Cache { inputs, outputs }
    }

    /// Logits for every node.
    pub fn logits(&self, model: &LgdcModel<T>) -> Matrix<T> {
        self.forward(model).outputs.pop().expect("model has layers")
    }

    /// Loss given logits already computed with [`Objective::logits`].
    pub fn loss_from_logits(&self, model: &LgdcModel<T>, logits: &Matrix<T>) -> T {
        self.data_loss(logits) + self.decay_loss(model)
    }

    fn data_loss(&self, logits: &Matrix<T>) -> T {
        self.targets
            .iter()
            .map(|&(i, c, w)| w * (log_sum_exp(logits.row(i)) - logits[(i, c)]))
            .sum()
    }

    fn decay_loss(&self, model: &LgdcModel<T>) -> T {
        T::of(0.5) * self.weight_decay * model.layers.iter().map(|p| p.w.sum_sq()).sum::<T>()
    }

    pub fn loss(&self, model: &LgdcModel<T>) -> T {
        let cache = self.forward(model);
        self.data_loss(cache.outputs.last().unwrap()) + self.decay_loss(model)
    }

    /// Loss and its gradient for every layer, in the same layout as the parameters.
    pub fn loss_and_grad(&self, model: &LgdcModel<T>) -> (T, Vec<LgdcLayerParams<T>>) {
        let cache = self.forward(model);
        let logits = cache.outputs.last().unwrap();
        let loss = self.data_loss(logits) + self.decay_loss(model);

        let mut dz = Matrix::zeros(logits.rows(), logits.cols());
        for &(i, c, w) in &self.targets {
            let mut p = logits.row(i).to_vec();
            softmax_in_place(&mut p);
            p[c] = p[c] - T::one();
            for (d, &pk) in dz.row_mut(i).iter_mut().zip(&p) {
                *d = *d + w * pk;
            }
        }

        let mut grads: Vec<LgdcLayerParams<T>> = Vec::with_capacity(model.layers.len());
        for l in (0..model.layers.len()).rev() {
            let p = &model.layers[l];
            // dW and the gradient reaching the previous layer's activation
            let (mut dw, da) = match &cache.inputs[l] {
                Input::Before(pa) => (
                    pa.t_matmul(&dz),
                    (l > 0).then(|| self.prop.apply(&dz.matmul_t(&p.w))),
                ),
                Input::After(a) => {
                    let q = self.prop.apply(&dz);
                    (a.t_matmul(&q), Some(q.matmul_t(&p.w)))
                }
            };
            for (g, &w) in dw.as_mut_slice().iter_mut().zip(p.w.as_slice()) {
                *g = *g + self.weight_decay * w;
            }
            let mut db = vec![T::zero(); p.d_out()];
            for row in dz.rows_iter() {
                for (b, &d) in db.iter_mut().zip(row) {
                    *b = *b + d;
                }
            }
            grads.push(LgdcLayerParams { w: dw, b: db });
            // the propagation operator is symmetric, so its transpose is itself
            if let Some(dh) = da {
                let z_prev = &cache.outputs[l - 1];
                dz = Matrix::from_fn(dh.rows(), dh.cols(), |r, c| {
                    if z_prev[(r, c)] > T::zero() {
                        dh[(r, c)]
                    } else {
                        T::zero()
                    }
                });
            }
        }
        grads.reverse();
        (loss, grads)
    }
}

/// Adam with bias correction; weight decay is already part of the gradient.
struct Adam<T> {
    lr: T,
    beta1: T,
    beta2: T,
    eps: T,
    t: i32,
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
}

impl<T: Scalar> Adam<T> {
    fn new(model: &LgdcModel<T>, lr: f64) -> Self {
        let sizes: Vec<usize> = model
            .layers
            .iter()
            .flat_map(|p| [p.w.as_slice().len(), p.b.len()])
            .collect();
        Adam {
            lr: T::of(lr),
            beta1: T::of(0.9),
            beta2: T::of(0.999),
            eps: T::of(1e-8),
            t: 0,
            m: sizes.iter().map(|&s| vec![T::zero(); s]).collect(),
            v: sizes.iter().map(|&s| vec![T::zero(); s]).collect(),
        }
    }

    fn step(&mut self, model: &mut LgdcModel<T>, grads: &[LgdcLayerParams<T>]) {
        self.t += 1;
        let c1 = T::one() - self.beta1.powi(self.t);
        let c2 = T::one() - self.beta2.powi(self.t);
        let params = model
            .layers
            .iter_mut()
            .flat_map(|p| [p.w.as_mut_slice(), p.b.as_mut_slice()]);
        let gs = grads.iter().flat_map(|g| [g.w.as_slice(), g.b.as_slice()]);
        for (((param, grad), m), v) in params.zip(gs).zip(&mut self.m).zip(&mut self.v) {
            for k in 0..param.len() {
                let g = grad[k];
                m[k] = self.beta1 * m[k] + (T::one() - self.beta1) * g;
                v[k] = self.beta2 * v[k] + (T::one() - self.beta2) * g * g;
                let m_hat = m[k] / c1;
                let v_hat = v[k] / c2;
                param[k] = param[k] - self.lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainHistory {
    pub train_loss: Vec<f64>,
    pub val_macro_f1: Vec<f64>,
    /// Unregularised validation cross-entropy.
    pub val_loss: Vec<f64>,
    /// Epoch whose parameters were returned (`None` when no epoch ran or no validation set).
    pub best_epoch: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct TrainedModel<T> {
    pub model: LgdcModel<T>,
    pub history: TrainHistory,
}

/// Full-graph training with Adam and early stopping on validation macro-F1.
/// Returns the parameters from the best validation epoch.
pub fn train<T: Scalar>(
    g: &SpatialGraph,
    features: &Matrix<T>,
    labels: &[Label],
    split: &Split,
    cfg: &LgdcConfig,
) -> Result<TrainedModel<T>> {
    if features.rows() != g.n() || labels.len() != g.n() {
        return Err(Error::Shape(format!(
            "graph has {} nodes, features {} rows, labels {}",
            g.n(),
            features.rows(),
            labels.len()
        )));
    }
    split.check_disjoint()?;
    let has = |c: Label| split.train.iter().any(|&i| labels[i] == c);
    if !(has(Label::Poor) && has(Label::NonPoor)) {
        return Err(Error::invalid("training set must contain both classes"));
    }
    if cfg.layers == 0 {
        return Err(Error::invalid("model needs at least one layer"));
    }
    let alpha = T::of(cfg.alpha);
    let mut model = LgdcModel::init(&cfg.dims(features.cols()), alpha, cfg.seed)?;
    let prop = Propagation::new(g, alpha)?;
    let objective = Objective::new(
        &prop,
        features,
        labels,
        &split.train,
        cfg.weight_decay,
        cfg.class_weighted,
    )?;
    let mut adam = Adam::new(&model, cfg.lr);
    let val_objective = if split.val.is_empty() {
        None
    } else {
        Some(Objective::new(
            &prop,
            features,
            labels,
            &split.val,
            0.0,
            cfg.class_weighted,
        )?)
    };
    let mut history = TrainHistory {
        train_loss: Vec::new(),
        val_macro_f1: Vec::new(),
        val_loss: Vec::new(),
        best_epoch: None,
    };
    // best so far by validation macro-F1, ties broken by validation loss
    let mut best: Option<((f64, f64), LgdcModel<T>)> = None;
    let mut since_best = 0;

    for epoch in 0..cfg.epochs {
        let (loss, grads) = objective.loss_and_grad(&model);
        if !loss.is_finite() {
            return Err(Error::NonFinite(format!("training loss at epoch {epoch}")));
        }
        adam.step(&mut model, &grads);
        history.train_loss.push(loss.as_f64());

        let Some(val_objective) = &val_objective else {
            continue;
        };
        let logits = objective.logits(&model);
        let preds = predict_from_logits(&logits);
        let f1 = validation_f1(&preds, labels, &split.val);
        let val_loss = val_objective.loss_from_logits(&model, &logits).as_f64();
        history.val_macro_f1.push(f1);
        history.val_loss.push(val_loss);
        let better = |(bf, bl): (f64, f64)| f1 > bf || (f1 == bf && val_loss < bl);
        if best.as_ref().is_none_or(|(b, _)| better(*b)) {
            best = Some(((f1, val_loss), model.clone()));
            history.best_epoch = Some(epoch);
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                break;
            }
        }
    }
    let model = best.map(|(_, m)| m).unwrap_or(model);
    model.validate()?;
    Ok(TrainedModel { model, history })
}

fn validation_f1<T: Scalar>(
    preds: &[super::Prediction<T>],
    labels: &[Label],
    nodes: &[usize],
) -> f64 {
    let classes: Vec<Label> = nodes.iter().map(|&i| preds[i].class).collect();
    let probs: Vec<T> = nodes.iter().map(|&i| preds[i].poor_probability).collect();
    let truth: Vec<Label> = nodes.iter().map(|&i| labels[i]).collect();
    // single-class validation sets make macro-F1 undefined; fall back to accuracy
    match compute_metrics(&classes, &probs, &truth) {
        Ok(m) => m.f1,
        Err(_) => {
            classes.iter().zip(&truth).filter(|(a, b)| a == b).count() as f64
                / nodes.len().max(1) as f64
        }
    }
}
