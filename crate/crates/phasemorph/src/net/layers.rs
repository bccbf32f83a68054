//! Pure layer kernels: forward and backward passes as free functions over
//! `f64` tensors. Convolutions run as im2col + GEMM; everything is
//! single-threaded and deterministic.

use ndarray::{s, Array1, Array2, Array3, Array4, ArrayView3, Axis};

/// Unroll valid-convolution patches: `[C, H, W] -> [C·K·K, OH·OW]`.
pub fn im2col(input: &ArrayView3<'_, f64>, k: usize) -> Array2<f64> {
    let (c, h, w) = input.dim();
    let (oh, ow) = (h - k + 1, w - k + 1);
    let mut cols = Array2::zeros((c * k * k, oh * ow));
    for ci in 0..c {
        for ki in 0..k {
            for kj in 0..k {
                let row = (ci * k + ki) * k + kj;
                for oy in 0..oh {
                    let src = input.slice(s![ci, oy + ki, kj..kj + ow]);
                    let mut dst = cols.slice_mut(s![row, oy * ow..(oy + 1) * ow]);
                    dst.assign(&src);
                }
            }
        }
    }
    cols
}

/// Scatter-add the transpose of `im2col`: `[C·K·K, OH·OW] -> [C, H, W]`.
fn col2im_add(dcols: &Array2<f64>, c: usize, h: usize, w: usize, k: usize) -> Array3<f64> {
    let (oh, ow) = (h - k + 1, w - k + 1);
    let mut out = Array3::zeros((c, h, w));
    for ci in 0..c {
        for ki in 0..k {
            for kj in 0..k {
                let row = (ci * k + ki) * k + kj;
                for oy in 0..oh {
                    let src = dcols.slice(s![row, oy * ow..(oy + 1) * ow]);
                    let mut dst = out.slice_mut(s![ci, oy + ki, kj..kj + ow]);
                    dst += &src;
                }
            }
        }
    }
    out
}

/// Valid 2-D convolution (stride 1, no padding) over a batch.
pub fn conv2d_forward(input: &Array4<f64>, weight: &Array4<f64>, bias: &Array1<f64>) -> Array4<f64> {
    let (n, c, h, w) = input.dim();
    let (o, wc, k, _) = weight.dim();
    debug_assert_eq!(c, wc);
    let (oh, ow) = (h - k + 1, w - k + 1);
    let w2 = weight
        .view()
        .into_shape_with_order((o, c * k * k))
        .expect("weights are standard layout");
    let mut out = Array4::zeros((n, o, oh, ow));
    for ni in 0..n {
        let cols = im2col(&input.index_axis(Axis(0), ni), k);
        let mut y = w2.dot(&cols); // [O, OH·OW]
        for (mut row, &b) in y.rows_mut().into_iter().zip(bias.iter()) {
            row.mapv_inplace(|v| v + b);
        }
        out.index_axis_mut(Axis(0), ni).assign(
            &y.into_shape_with_order((o, oh, ow))
                .expect("conv output reshape"),
        );
    }
    out
}

/// Gradients of the valid convolution. Returns (d_input, d_weight, d_bias).
pub fn conv2d_backward(
    input: &Array4<f64>,
    weight: &Array4<f64>,
    d_out: &Array4<f64>,
) -> (Array4<f64>, Array4<f64>, Array1<f64>) {
    let (n, c, h, w) = input.dim();
    let (o, _, k, _) = weight.dim();
    let (oh, ow) = (h - k + 1, w - k + 1);
    let w2 = weight
        .view()
        .into_shape_with_order((o, c * k * k))
        .expect("weights are standard layout");
    let mut d_input = Array4::zeros((n, c, h, w));
    let mut d_weight2 = Array2::zeros((o, c * k * k));
    let mut d_bias = Array1::zeros(o);
    for ni in 0..n {
        let cols = im2col(&input.index_axis(Axis(0), ni), k);
        let dy = d_out
            .index_axis(Axis(0), ni)
            .into_shape_with_order((o, oh * ow))
            .expect("grad reshape");
        d_weight2 += &dy.dot(&cols.t());
        d_bias += &dy.sum_axis(Axis(1));
        let d_cols = w2.t().dot(&dy); // [C·K·K, OH·OW]
        d_input
            .index_axis_mut(Axis(0), ni)
            .assign(&col2im_add(&d_cols, c, h, w, k));
    }
    let d_weight = d_weight2
        .into_shape_with_order((o, c, k, k))
        .expect("weight grad reshape");
    (d_input, d_weight, d_bias)
}

/// 2×2 max pooling, stride 2; odd trailing rows/columns are dropped.
/// Ties resolve to the first index in scan order (0,0),(0,1),(1,0),(1,1).
pub fn maxpool2_forward(input: &Array4<f64>) -> (Array4<f64>, Array4<usize>) {
    let (n, c, h, w) = input.dim();
    let (oh, ow) = (h / 2, w / 2);
    let mut out = Array4::zeros((n, c, oh, ow));
    let mut argmax = Array4::zeros((n, c, oh, ow));
    for ni in 0..n {
        for ci in 0..c {
            for oy in 0..oh {
                for ox in 0..ow {
                    let mut best = f64::NEG_INFINITY;
                    let mut best_idx = 0usize;
                    for dy in 0..2 {
                        for dx in 0..2 {
                            let (y, x) = (2 * oy + dy, 2 * ox + dx);
                            let v = input[[ni, ci, y, x]];
                            if v > best {
                                best = v;
                                best_idx = y * w + x;
                            }
                        }
                    }
                    out[[ni, ci, oy, ox]] = best;
                    argmax[[ni, ci, oy, ox]] = best_idx;
                }
            }
        }
    }
    (out, argmax)
}

pub fn maxpool2_backward(
    d_out: &Array4<f64>,
    argmax: &Array4<usize>,
    input_dim: (usize, usize, usize, usize),
) -> Array4<f64> {
    let (n, c, h, w) = input_dim;
    let mut d_input = Array4::zeros((n, c, h, w));
    for ((ni, ci, oy, ox), &g) in d_out.indexed_iter() {
        let flat = argmax[[ni, ci, oy, ox]];
        d_input[[ni, ci, flat / w, flat % w]] += g;
    }
    d_input
}

/// Fully connected layer over a batch: `Y = X·Wᵀ + b`.
pub fn linear_forward(input: &Array2<f64>, weight: &Array2<f64>, bias: &Array1<f64>) -> Array2<f64> {
    let mut out = input.dot(&weight.t());
    for mut row in out.rows_mut() {
        row += bias;
    }
    out
}

pub fn linear_backward(
    input: &Array2<f64>,
    weight: &Array2<f64>,
    d_out: &Array2<f64>,
) -> (Array2<f64>, Array2<f64>, Array1<f64>) {
    let d_weight = d_out.t().dot(input);
    let d_bias = d_out.sum_axis(Axis(0));
    let d_input = d_out.dot(weight);
    (d_input, d_weight, d_bias)
}

/// Numerically stable row-wise log-softmax. Never produces −∞ on finite
/// logits: the max-shifted exponent sum is ≥ 1.
pub fn log_softmax(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let log_sum = row.iter().map(|v| (v - max).exp()).sum::<f64>().ln() + max;
        row.mapv_inplace(|v| v - log_sum);
    }
    out
}

/// Mean negative log-likelihood of the labelled classes.
pub fn nll_loss(log_probs: &Array2<f64>, labels: &[usize]) -> f64 {
    let n = labels.len() as f64;
    -labels
        .iter()
        .enumerate()
        .map(|(i, &t)| log_probs[[i, t]])
        .sum::<f64>()
        / n
}

/// Gradient of the mean NLL with respect to logits: (softmax − onehot)/N.
pub fn nll_grad(log_probs: &Array2<f64>, labels: &[usize]) -> Array2<f64> {
    let n = labels.len() as f64;
    let mut grad = log_probs.mapv(f64::exp);
    for (i, &t) in labels.iter().enumerate() {
        grad[[i, t]] -= 1.0;
    }
    grad.mapv_inplace(|v| v / n);
    grad
}
