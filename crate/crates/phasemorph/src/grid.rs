//! Real-valued image container used across the pipeline.

use ndarray::{Array3, ArrayView2, ArrayViewMut2, Axis};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("image contains non-finite value {value} at (c={channel}, y={y}, x={x})")]
    NonFinite {
        channel: usize,
        y: usize,
        x: usize,
        value: f64,
    },
    #[error("unsupported channel count {0} (expected 1 or 3)")]
    BadChannelCount(usize),
    #[error("image too small: {height}x{width} (minimum side is {min})")]
    TooSmall {
        height: usize,
        width: usize,
        min: usize,
    },
}

/// Minimum side length accepted for an image. Transform preconditions
/// (e.g. pyramid depth) impose stricter limits of their own.
pub const MIN_SIDE: usize = 4;

/// A real image stored as `[channels, height, width]`, nominal range `[0, 1]`.
///
/// Values outside the nominal range are allowed (reconstructions of
/// extrapolated coefficients routinely overshoot); non-finite values are not.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    data: Array3<f64>,
}

impl ImageGrid {
    pub fn new(data: Array3<f64>) -> Result<Self, GridError> {
        let (c, h, w) = data.dim();
        if c != 1 && c != 3 {
            return Err(GridError::BadChannelCount(c));
        }
        if h < MIN_SIDE || w < MIN_SIDE {
            return Err(GridError::TooSmall {
                height: h,
                width: w,
                min: MIN_SIDE,
            });
        }
        for ((ci, yi, xi), &v) in data.indexed_iter() {
            if !v.is_finite() {
                return Err(GridError::NonFinite {
                    channel: ci,
                    y: yi,
                    x: xi,
                    value: v,
                });
            }
        }
        Ok(Self { data })
    }

    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        Self {
            data: Array3::zeros((channels, height, width)),
        }
    }

    /// Single-channel image from a generator over (y, x).
    pub fn from_fn(height: usize, width: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let data = Array3::from_shape_fn((1, height, width), |(_, y, x)| f(y, x));
        Self { data }
    }

    pub fn channels(&self) -> usize {
        self.data.dim().0
    }

    pub fn height(&self) -> usize {
        self.data.dim().1
    }

    pub fn width(&self) -> usize {
        self.data.dim().2
    }

    pub fn channel(&self, c: usize) -> ArrayView2<'_, f64> {
        self.data.index_axis(Axis(0), c)
    }

    pub fn channel_mut(&mut self, c: usize) -> ArrayViewMut2<'_, f64> {
        self.data.index_axis_mut(Axis(0), c)
    }

    pub fn data(&self) -> &Array3<f64> {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut Array3<f64> {
        &mut self.data
    }

    pub fn into_data(self) -> Array3<f64> {
        self.data
    }

    /// Bypasses the constructor checks; for internal results that are
    /// finite by construction.
    pub(crate) fn from_raw(data: Array3<f64>) -> Self {
        Self { data }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Copy with every value clamped to `[0, 1]`.
    pub fn clamped(&self) -> ImageGrid {
        Self {
            data: self.data.mapv(|v| v.clamp(0.0, 1.0)),
        }
    }

    /// Relative L2 distance `‖a − b‖ / ‖a‖` (0 when both are zero).
    pub fn relative_l2(&self, other: &ImageGrid) -> f64 {
        let num: f64 = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let den: f64 = self.data.iter().map(|a| a * a).sum::<f64>().sqrt();
        if den == 0.0 {
            num
        } else {
            num / den
        }
    }
}
