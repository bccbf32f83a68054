//! Training loop and optimizers. Everything is sequential and seeded, so
//! a given (model seed, data, config) triple reproduces bitwise.

use super::{argmax, round_f32, Classifier, LayerGrads, NetError};
use crate::datasets::LabeledDataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OptimizerKind {
    SgdMomentum,
    #[default]
    AdaptiveMoments,
}

impl std::str::FromStr for OptimizerKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sgd-momentum" => Ok(OptimizerKind::SgdMomentum),
            "adaptive-moments" => Ok(OptimizerKind::AdaptiveMoments),
            other => Err(format!(
                "unknown optimizer '{other}' (expected sgd-momentum|adaptive-moments)"
            )),
        }
    }
}

impl OptimizerKind {
    pub fn name(&self) -> &'static str {
        match self {
            OptimizerKind::SgdMomentum => "sgd-momentum",
            OptimizerKind::AdaptiveMoments => "adaptive-moments",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 5,
            batch_size: 64,
            learning_rate: 1e-3,
            optimizer: OptimizerKind::AdaptiveMoments,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<(), NetError> {
        if self.epochs < 1 {
            return Err(NetError::BadArch("epochs must be >= 1".into()));
        }
        if self.batch_size < 1 {
            return Err(NetError::BadArch("batch size must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(NetError::BadArch("learning rate must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EpochStats {
    pub mean_loss: f64,
    pub train_accuracy: f64,
}

#[derive(Debug, Clone, Default)]
pub struct TrainMetrics {
    pub epochs: Vec<EpochStats>,
}

/// Per-tensor optimizer state.
struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    step: u64,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
}

const MOMENTUM: f64 = 0.9;
const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

impl Optimizer {
    fn new(kind: OptimizerKind, lr: f64, shapes: &[usize]) -> Optimizer {
        Optimizer {
            kind,
            lr,
            step: 0,
            first: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            second: shapes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    fn apply(&mut self, params: Vec<&mut [f64]>, grads: &[Vec<f64>]) {
        self.step += 1;
        match self.kind {
            OptimizerKind::SgdMomentum => {
                for ((p, g), m) in params.into_iter().zip(grads).zip(&mut self.first) {
                    for i in 0..p.len() {
                        m[i] = MOMENTUM * m[i] + g[i];
                        p[i] = round_f32(p[i] - self.lr * m[i]);
                    }
                }
            }
            OptimizerKind::AdaptiveMoments => {
                let bc1 = 1.0 - ADAM_BETA1.powi(self.step as i32);
                let bc2 = 1.0 - ADAM_BETA2.powi(self.step as i32);
                for (((p, g), m), v) in params
                    .into_iter()
                    .zip(grads)
                    .zip(&mut self.first)
                    .zip(&mut self.second)
                {
                    for i in 0..p.len() {
                        m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * g[i];
                        v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * g[i] * g[i];
                        let update = (m[i] / bc1) / ((v[i] / bc2).sqrt() + ADAM_EPS);
                        p[i] = round_f32(p[i] - self.lr * update);
                    }
                }
            }
        }
    }
}

/// Flatten per-layer gradients into the same order as
/// `Classifier::param_slices_mut`.
fn flatten_grads(grads: &[LayerGrads]) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for g in grads {
        match g {
            LayerGrads::Conv { d_weight, d_bias } => {
                out.push(d_weight.iter().copied().collect());
                out.push(d_bias.iter().copied().collect());
            }
            LayerGrads::Fc { d_weight, d_bias } => {
                out.push(d_weight.iter().copied().collect());
                out.push(d_bias.iter().copied().collect());
            }
            LayerGrads::None => {}
        }
    }
    out
}

/// Mix an epoch index into the shuffle seed.
fn epoch_seed(seed: u64, epoch: usize) -> u64 {
    seed ^ (epoch as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Train in place, returning per-epoch loss and training accuracy.
/// Aborts with the epoch index if the loss goes non-finite.
pub fn train(
    model: &mut Classifier,
    data: &LabeledDataset,
    cfg: &TrainConfig,
) -> Result<TrainMetrics, NetError> {
    cfg.validate()?;
    if data.len() == 0 {
        return Err(NetError::EmptyDataset);
    }
    let classes = model.class_count();
    for (i, &label) in data.labels().iter().enumerate() {
        if label >= classes {
            return Err(NetError::InvalidLabel {
                label,
                classes,
                index: i,
            });
        }
    }
    let shapes: Vec<usize> = model.param_slices_mut().iter().map(|s| s.len()).collect();
    let mut opt = Optimizer::new(cfg.optimizer, cfg.learning_rate, &shapes);
    let mut metrics = TrainMetrics::default();
    for epoch in 0..cfg.epochs {
        let mut total_loss = 0.0;
        let mut total_correct = 0.0;
        let mut total_seen = 0usize;
        for (batch, labels) in data.batches(cfg.batch_size, epoch_seed(cfg.seed, epoch))? {
            let (loss, correct, grads) = model.loss_and_grads(&batch, &labels)?;
            if !loss.is_finite() {
                return Err(NetError::Diverged { epoch });
            }
            let flat = flatten_grads(&grads);
            opt.apply(model.param_slices_mut(), &flat);
            total_loss += loss * labels.len() as f64;
            total_correct += correct;
            total_seen += labels.len();
        }
        metrics.epochs.push(EpochStats {
            mean_loss: total_loss / total_seen as f64,
            train_accuracy: total_correct / total_seen as f64,
        });
    }
    Ok(metrics)
}

/// Fraction of samples whose argmax logit matches the label.
pub fn evaluate(model: &Classifier, data: &LabeledDataset) -> Result<f64, NetError> {
    if data.len() == 0 {
        return Err(NetError::EmptyDataset);
    }
    let mut correct = 0usize;
    // Fixed traversal order; chunked to bound memory.
    for (batch, labels) in data.batches_sequential(256)? {
        let logits = model.forward(&batch)?;
        for (row, &label) in logits.rows().into_iter().zip(&labels) {
            if argmax(row.as_slice().unwrap()) == label {
                correct += 1;
            }
        }
    }
    Ok(correct as f64 / data.len() as f64)
}
