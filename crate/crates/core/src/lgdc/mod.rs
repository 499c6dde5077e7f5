//! Local graph distance convolution: node classification where each neighbour's
//! message is scaled by `α^distance` on top of symmetric degree normalisation.

mod model;
mod propagate;
mod train;

pub use model::{
    layer_forward, predict_from_logits, LgdcLayerParams, LgdcModel, Prediction, NUM_CLASSES,
};
pub use propagate::{aggregate, edge_weight, Propagation};
pub use train::{train, LgdcConfig, Objective, TrainHistory, TrainedModel};
