//! A small CNN with a fixed layer vocabulary and a static reverse pass.
//!
//! Exactly the operators needed by the two reference architectures:
//! valid 2-D convolution, 2×2 max pooling, ReLU, fully connected layers,
//! and log-softmax with NLL loss. Parameters are kept on the `f32` grid
//! (every value is exactly representable in 32 bits) so checkpoints
//! round-trip bitwise; all arithmetic runs in `f64`.

pub mod checkpoint;
pub mod layers;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointMeta};
pub use train::{evaluate, train, EpochStats, OptimizerKind, TrainConfig, TrainMetrics};

use crate::grid::ImageGrid;
use layers::*;
use ndarray::{Array1, Array2, Array3, Array4, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("batch geometry {got:?} does not match model input {expected:?}")]
    GeometryMismatch {
        expected: (usize, usize, usize),
        got: (usize, usize, usize),
    },
    #[error("target class {target} out of range (model has {classes} classes)")]
    InvalidTarget { target: usize, classes: usize },
    #[error("label {label} out of range for {classes} classes at sample {index}")]
    InvalidLabel {
        label: usize,
        classes: usize,
        index: usize,
    },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("training diverged: non-finite loss at epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("invalid architecture: {0}")]
    BadArch(String),
    #[error("checkpoint file corrupt: {0}")]
    BadCheckpoint(String),
    #[error("checkpoint truncated at byte offset {offset}")]
    Truncated { offset: u64 },
    #[error("architecture mismatch:\n  expected: {expected}\n  found:    {found}")]
    ArchMismatch { expected: String, found: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Data(#[from] crate::datasets::DataError),
}

/// One entry of the layer vocabulary, shapes implied by position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LayerSpec {
    Conv { out_channels: usize, kernel: usize },
    Relu,
    MaxPool2,
    Flatten,
    Fc { out: usize },
}

/// Ordered layer list plus the input geometry. The descriptor string is
/// the canonical serialized form used in checkpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arch {
    pub in_channels: usize,
    pub in_height: usize,
    pub in_width: usize,
    pub layers: Vec<LayerSpec>,
}

/// Intermediate activation shape while validating the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    Spatial(usize, usize, usize),
    Flat(usize),
}

impl Arch {
    /// Two conv layers then two fully connected layers, for 64×64
    /// single-channel inputs and four classes.
    pub fn arcade() -> Arch {
        Arch {
            in_channels: 1,
            in_height: 64,
            in_width: 64,
            layers: vec![
                LayerSpec::Conv { out_channels: 16, kernel: 3 },
                LayerSpec::Relu,
                LayerSpec::MaxPool2,
                LayerSpec::Conv { out_channels: 32, kernel: 3 },
                LayerSpec::Relu,
                LayerSpec::MaxPool2,
                LayerSpec::Flatten,
                LayerSpec::Fc { out: 128 },
                LayerSpec::Relu,
                LayerSpec::Fc { out: 4 },
            ],
        }
    }

    /// Classic LeNet-scale stack for 28×28 digits; `in_channels` and the
    /// class count widen for the color variants.
    pub fn lenet(in_channels: usize, classes: usize) -> Arch {
        Arch {
            in_channels,
            in_height: 28,
            in_width: 28,
            layers: vec![
                LayerSpec::Conv { out_channels: 6, kernel: 5 },
                LayerSpec::Relu,
                LayerSpec::MaxPool2,
                LayerSpec::Conv { out_channels: 16, kernel: 5 },
                LayerSpec::Relu,
                LayerSpec::MaxPool2,
                LayerSpec::Flatten,
                LayerSpec::Fc { out: 120 },
                LayerSpec::Relu,
                LayerSpec::Fc { out: classes },
            ],
        }
    }

    /// Tiny stack for unit tests and toy data.
    pub fn toy(in_channels: usize, side: usize, classes: usize) -> Arch {
        Arch {
            in_channels,
            in_height: side,
            in_width: side,
            layers: vec![
                LayerSpec::Conv { out_channels: 2, kernel: 3 },
                LayerSpec::Relu,
                LayerSpec::MaxPool2,
                LayerSpec::Flatten,
                LayerSpec::Fc { out: classes },
            ],
        }
    }

    pub fn input_geometry(&self) -> (usize, usize, usize) {
        (self.in_channels, self.in_height, self.in_width)
    }

    pub fn class_count(&self) -> usize {
        match self.layers.last() {
            Some(LayerSpec::Fc { out }) => *out,
            _ => 0,
        }
    }

    /// Walk the shape chain, rejecting inconsistent stacks.
    fn shape_chain(&self) -> Result<Vec<Shape>, NetError> {
        let mut shapes = vec![Shape::Spatial(self.in_channels, self.in_height, self.in_width)];
        for (i, layer) in self.layers.iter().enumerate() {
            let cur = *shapes.last().unwrap();
            let next = match (layer, cur) {
                (LayerSpec::Conv { out_channels, kernel }, Shape::Spatial(_, h, w)) => {
                    if *kernel == 0 || h < *kernel || w < *kernel {
                        return Err(NetError::BadArch(format!(
                            "layer {i}: kernel {kernel} does not fit {h}x{w}"
                        )));
                    }
                    Shape::Spatial(*out_channels, h - kernel + 1, w - kernel + 1)
                }
                (LayerSpec::MaxPool2, Shape::Spatial(c, h, w)) => {
                    if h < 2 || w < 2 {
                        return Err(NetError::BadArch(format!("layer {i}: pool on {h}x{w}")));
                    }
                    Shape::Spatial(c, h / 2, w / 2)
                }
                (LayerSpec::Relu, shape) => shape,
                (LayerSpec::Flatten, Shape::Spatial(c, h, w)) => Shape::Flat(c * h * w),
                (LayerSpec::Fc { out }, Shape::Flat(_)) => Shape::Flat(*out),
                (spec, shape) => {
                    return Err(NetError::BadArch(format!(
                        "layer {i}: {spec:?} cannot follow {shape:?}"
                    )));
                }
            };
            shapes.push(next);
        }
        match shapes.last() {
            Some(Shape::Flat(_)) => Ok(shapes),
            _ => Err(NetError::BadArch("network must end in a flat layer".into())),
        }
    }

    /// Canonical text form, versioned; embedded in checkpoints.
    pub fn descriptor(&self) -> String {
        let mut parts = vec![format!(
            "v1 input {}x{}x{}",
            self.in_channels, self.in_height, self.in_width
        )];
        for layer in &self.layers {
            parts.push(match layer {
                LayerSpec::Conv { out_channels, kernel } => format!("conv {out_channels} {kernel}"),
                LayerSpec::Relu => "relu".into(),
                LayerSpec::MaxPool2 => "pool2".into(),
                LayerSpec::Flatten => "flatten".into(),
                LayerSpec::Fc { out } => format!("fc {out}"),
            });
        }
        parts.join(" | ")
    }

    pub fn parse_descriptor(text: &str) -> Result<Arch, NetError> {
        let bad = |m: &str| NetError::BadArch(format!("descriptor: {m}"));
        let mut parts = text.split('|').map(str::trim);
        let head = parts.next().ok_or_else(|| bad("empty"))?;
        let head = head
            .strip_prefix("v1 input ")
            .ok_or_else(|| bad("missing 'v1 input' header"))?;
        let dims: Vec<usize> = head
            .split('x')
            .map(|t| t.parse().map_err(|_| bad("bad input dims")))
            .collect::<Result<_, _>>()?;
        if dims.len() != 3 {
            return Err(bad("input dims must be CxHxW"));
        }
        let mut layers = Vec::new();
        for part in parts {
            let mut toks = part.split_whitespace();
            match toks.next() {
                Some("conv") => {
                    let out_channels = toks
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| bad("conv channels"))?;
                    let kernel = toks
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| bad("conv kernel"))?;
                    layers.push(LayerSpec::Conv { out_channels, kernel });
                }
                Some("relu") => layers.push(LayerSpec::Relu),
                Some("pool2") => layers.push(LayerSpec::MaxPool2),
                Some("flatten") => layers.push(LayerSpec::Flatten),
                Some("fc") => {
                    let out = toks
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| bad("fc size"))?;
                    layers.push(LayerSpec::Fc { out });
                }
                other => return Err(bad(&format!("unknown layer {other:?}"))),
            }
        }
        let arch = Arch {
            in_channels: dims[0],
            in_height: dims[1],
            in_width: dims[2],
            layers,
        };
        arch.shape_chain()?;
        Ok(arch)
    }
}

/// Trainable layer with its parameters.
#[derive(Debug, Clone)]
enum Layer {
    Conv { weight: Array4<f64>, bias: Array1<f64> },
    Relu,
    MaxPool2,
    Flatten,
    Fc { weight: Array2<f64>, bias: Array1<f64> },
}

/// Activation flowing through the stack.
#[derive(Debug, Clone)]
enum Act {
    Spatial(Array4<f64>),
    Flat(Array2<f64>),
}

/// Saved state needed by the reverse pass.
enum Cache {
    Conv { input: Array4<f64> },
    Relu { input: Act },
    Pool { argmax: Array4<usize>, in_dim: (usize, usize, usize, usize) },
    Flatten { in_dim: (usize, usize, usize, usize) },
    Fc { input: Array2<f64> },
}

/// Per-layer parameter gradients, aligned with the layer list.
pub(crate) enum LayerGrads {
    Conv { d_weight: Array4<f64>, d_bias: Array1<f64> },
    Fc { d_weight: Array2<f64>, d_bias: Array1<f64> },
    None,
}

/// Round to the nearest `f32` value; parameters always live on this grid.
pub(crate) fn round_f32(v: f64) -> f64 {
    v as f32 as f64
}

#[derive(Debug, Clone)]
pub struct Classifier {
    arch: Arch,
    layers: Vec<Layer>,
}

impl Classifier {
    /// Fan-in-scaled uniform initialization on the f32 grid, seeded.
    pub fn init(arch: Arch, seed: u64) -> Result<Classifier, NetError> {
        let shapes = arch.shape_chain()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(arch.layers.len());
        for (spec, shape) in arch.layers.iter().zip(&shapes) {
            layers.push(match (spec, shape) {
                (LayerSpec::Conv { out_channels, kernel }, Shape::Spatial(c, _, _)) => {
                    let fan_in = c * kernel * kernel;
                    let bound = 1.0 / (fan_in as f64).sqrt();
                    let mut draw = || round_f32((rng.random::<f64>() * 2.0 - 1.0) * bound);
                    let weight =
                        Array4::from_shape_simple_fn((*out_channels, *c, *kernel, *kernel), &mut draw);
                    let bias = Array1::from_shape_simple_fn(*out_channels, &mut draw);
                    Layer::Conv { weight, bias }
                }
                (LayerSpec::Fc { out }, Shape::Flat(input)) => {
                    let bound = 1.0 / (*input as f64).sqrt();
                    let mut draw = || round_f32((rng.random::<f64>() * 2.0 - 1.0) * bound);
                    let weight = Array2::from_shape_simple_fn((*out, *input), &mut draw);
                    let bias = Array1::from_shape_simple_fn(*out, &mut draw);
                    Layer::Fc { weight, bias }
                }
                (LayerSpec::Relu, _) => Layer::Relu,
                (LayerSpec::MaxPool2, _) => Layer::MaxPool2,
                (LayerSpec::Flatten, _) => Layer::Flatten,
                _ => unreachable!("shape chain validated"),
            });
        }
        Ok(Classifier { arch, layers })
    }

    pub fn arch(&self) -> &Arch {
        &self.arch
    }

    pub fn class_count(&self) -> usize {
        self.arch.class_count()
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| match l {
                Layer::Conv { weight, bias } => weight.len() + bias.len(),
                Layer::Fc { weight, bias } => weight.len() + bias.len(),
                _ => 0,
            })
            .sum()
    }

    /// Flatten parameters in layer order, weights before biases.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in &self.layers {
            match layer {
                Layer::Conv { weight, bias } => {
                    out.extend(weight.iter());
                    out.extend(bias.iter());
                }
                Layer::Fc { weight, bias } => {
                    out.extend(weight.iter());
                    out.extend(bias.iter());
                }
                _ => {}
            }
        }
        out
    }

    pub fn set_flat_params(&mut self, params: &[f64]) -> Result<(), NetError> {
        if params.len() != self.param_count() {
            return Err(NetError::BadCheckpoint(format!(
                "parameter count {} does not match architecture ({} expected)",
                params.len(),
                self.param_count()
            )));
        }
        let mut offset = 0;
        for slice in self.param_slices_mut() {
            slice.copy_from_slice(&params[offset..offset + slice.len()]);
            offset += slice.len();
        }
        Ok(())
    }

    /// Mutable slices over every parameter tensor, in a fixed order.
    pub(crate) fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::new();
        for layer in &mut self.layers {
            match layer {
                Layer::Conv { weight, bias } => {
                    out.push(weight.as_slice_mut().expect("standard layout"));
                    out.push(bias.as_slice_mut().expect("standard layout"));
                }
                Layer::Fc { weight, bias } => {
                    out.push(weight.as_slice_mut().expect("standard layout"));
                    out.push(bias.as_slice_mut().expect("standard layout"));
                }
                _ => {}
            }
        }
        out
    }

    fn check_batch(&self, batch: &Array4<f64>) -> Result<(), NetError> {
        let (_, c, h, w) = batch.dim();
        let expected = self.arch.input_geometry();
        if (c, h, w) != expected {
            return Err(NetError::GeometryMismatch {
                expected,
                got: (c, h, w),
            });
        }
        Ok(())
    }

    /// Logits for a batch `[N, C, H, W]` → `[N, classes]`.
    pub fn forward(&self, batch: &Array4<f64>) -> Result<Array2<f64>, NetError> {
        self.check_batch(batch)?;
        let mut act = Act::Spatial(batch.clone());
        for layer in &self.layers {
            act = apply_layer(layer, act).0;
        }
        match act {
            Act::Flat(logits) => Ok(logits),
            Act::Spatial(_) => unreachable!("validated to end flat"),
        }
    }

    fn forward_cached(&self, batch: &Array4<f64>) -> Result<(Array2<f64>, Vec<Cache>), NetError> {
        self.check_batch(batch)?;
        let mut act = Act::Spatial(batch.clone());
        let mut caches = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let (next, cache) = apply_layer(layer, act);
            caches.push(cache);
            act = next;
        }
        match act {
            Act::Flat(logits) => Ok((logits, caches)),
            Act::Spatial(_) => unreachable!(),
        }
    }

    /// Reverse pass from `d_logits`; returns per-layer parameter
    /// gradients and the gradient with respect to the input batch.
    fn backward(&self, caches: &[Cache], d_logits: Array2<f64>) -> (Vec<LayerGrads>, Array4<f64>) {
        let mut grads: Vec<LayerGrads> = Vec::with_capacity(self.layers.len());
        let mut d_act = Act::Flat(d_logits);
        for (layer, cache) in self.layers.iter().zip(caches).rev() {
            let (d_next, grad) = backprop_layer(layer, cache, d_act);
            grads.push(grad);
            d_act = d_next;
        }
        grads.reverse();
        match d_act {
            Act::Spatial(d) => (grads, d),
            Act::Flat(_) => unreachable!("input is spatial"),
        }
    }

    /// Gradient of L = log p(target | image) with respect to the input
    /// pixels; adding a small multiple is an ascent step on the target
    /// likelihood.
    pub fn input_gradient(&self, image: &ImageGrid, target: usize) -> Result<ImageGrid, NetError> {
        let classes = self.class_count();
        if target >= classes {
            return Err(NetError::InvalidTarget { target, classes });
        }
        let batch = image_batch(std::slice::from_ref(image));
        let (logits, caches) = self.forward_cached(&batch)?;
        let logp = log_softmax(&logits);
        // d/dlogit_j log p_t = δ_{jt} − p_j
        let mut d_logits = logp.mapv(|v| -v.exp());
        d_logits[[0, target]] += 1.0;
        let (_, d_input) = self.backward(&caches, d_logits);
        let d3: Array3<f64> = d_input.index_axis(Axis(0), 0).to_owned();
        Ok(ImageGrid::from_raw(d3))
    }

    /// Loss and parameter gradients for one labelled batch (mean NLL).
    pub(crate) fn loss_and_grads(
        &self,
        batch: &Array4<f64>,
        labels: &[usize],
    ) -> Result<(f64, f64, Vec<LayerGrads>), NetError> {
        let (logits, caches) = self.forward_cached(batch)?;
        let logp = log_softmax(&logits);
        let loss = nll_loss(&logp, labels);
        let correct = count_correct(&logits, labels);
        let d_logits = nll_grad(&logp, labels);
        let (grads, _) = self.backward(&caches, d_logits);
        Ok((loss, correct, grads))
    }
}

fn count_correct(logits: &Array2<f64>, labels: &[usize]) -> f64 {
    logits
        .rows()
        .into_iter()
        .zip(labels)
        .filter(|(row, &t)| argmax(row.as_slice().unwrap()) == t)
        .count() as f64
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Stack image grids into a `[N, C, H, W]` batch tensor.
pub fn image_batch(images: &[ImageGrid]) -> Array4<f64> {
    let (c, h, w) = (
        images[0].channels(),
        images[0].height(),
        images[0].width(),
    );
    let mut batch = Array4::zeros((images.len(), c, h, w));
    for (i, img) in images.iter().enumerate() {
        batch.index_axis_mut(Axis(0), i).assign(img.data());
    }
    batch
}

fn apply_layer(layer: &Layer, act: Act) -> (Act, Cache) {
    match (layer, act) {
        (Layer::Conv { weight, bias }, Act::Spatial(x)) => {
            let y = conv2d_forward(&x, weight, bias);
            (Act::Spatial(y), Cache::Conv { input: x })
        }
        (Layer::Relu, Act::Spatial(x)) => {
            let y = x.mapv(|v| v.max(0.0));
            (Act::Spatial(y), Cache::Relu { input: Act::Spatial(x) })
        }
        (Layer::Relu, Act::Flat(x)) => {
            let y = x.mapv(|v| v.max(0.0));
            (Act::Flat(y), Cache::Relu { input: Act::Flat(x) })
        }
        (Layer::MaxPool2, Act::Spatial(x)) => {
            let (y, argmax) = maxpool2_forward(&x);
            let in_dim = x.dim();
            (Act::Spatial(y), Cache::Pool { argmax, in_dim })
        }
        (Layer::Flatten, Act::Spatial(x)) => {
            let in_dim = x.dim();
            let (n, c, h, w) = in_dim;
            let y = x
                .into_shape_with_order((n, c * h * w))
                .expect("standard layout flatten");
            (Act::Flat(y), Cache::Flatten { in_dim })
        }
        (Layer::Fc { weight, bias }, Act::Flat(x)) => {
            let y = linear_forward(&x, weight, bias);
            (Act::Flat(y), Cache::Fc { input: x })
        }
        _ => unreachable!("shape chain validated at construction"),
    }
}

fn backprop_layer(layer: &Layer, cache: &Cache, d_act: Act) -> (Act, LayerGrads) {
    match (layer, cache, d_act) {
        (Layer::Conv { weight, .. }, Cache::Conv { input }, Act::Spatial(dy)) => {
            let (dx, d_weight, d_bias) = conv2d_backward(input, weight, &dy);
            (Act::Spatial(dx), LayerGrads::Conv { d_weight, d_bias })
        }
        (Layer::Relu, Cache::Relu { input: Act::Spatial(x) }, Act::Spatial(mut dy)) => {
            dy.zip_mut_with(x, |d, &v| {
                if v <= 0.0 {
                    *d = 0.0;
                }
            });
            (Act::Spatial(dy), LayerGrads::None)
        }
        (Layer::Relu, Cache::Relu { input: Act::Flat(x) }, Act::Flat(mut dy)) => {
            dy.zip_mut_with(x, |d, &v| {
                if v <= 0.0 {
                    *d = 0.0;
                }
            });
            (Act::Flat(dy), LayerGrads::None)
        }
        (Layer::MaxPool2, Cache::Pool { argmax, in_dim }, Act::Spatial(dy)) => {
            (Act::Spatial(maxpool2_backward(&dy, argmax, *in_dim)), LayerGrads::None)
        }
        (Layer::Flatten, Cache::Flatten { in_dim }, Act::Flat(dy)) => {
            let dx = dy
                .into_shape_with_order(*in_dim)
                .expect("unflatten gradient");
            (Act::Spatial(dx), LayerGrads::None)
        }
        (Layer::Fc { weight, .. }, Cache::Fc { input }, Act::Flat(dy)) => {
            let (dx, d_weight, d_bias) = linear_backward(input, weight, &dy);
            (Act::Flat(dx), LayerGrads::Fc { d_weight, d_bias })
        }
        _ => unreachable!("cache mismatches layer"),
    }
}
