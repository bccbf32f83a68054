//! Invertible image transforms: the 2-D DFT and an undecimated complex
//! steerable pyramid, plus the adjoint of each synthesis operator.
//!
//! Both transforms are linear maps built from FFT multiplications, so
//! reconstruction is exact to rounding and the adjoints are FFT
//! multiplications as well. Boundary handling is the periodic extension
//! implicit in the FFT; wrap-around at image borders is a known effect.

mod csp;
mod dft;
pub(crate) mod fft2;

pub use csp::{analysis_adjoint, csp_analyze, csp_build_filters, csp_synthesize, FilterBank};
pub use dft::{dft_adjoint, dft_forward, dft_inverse};

use crate::grid::ImageGrid;
use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("input image must be single-channel, got {0} channels")]
    NotSingleChannel(usize),
    #[error("non-finite input value at (y={y}, x={x})")]
    NonFinite { y: usize, x: usize },
    #[error("dimension mismatch: expected {expected_h}x{expected_w}, got {got_h}x{got_w}")]
    DimensionMismatch {
        expected_h: usize,
        expected_w: usize,
        got_h: usize,
        got_w: usize,
    },
    #[error("coefficient set has wrong domain for this operation")]
    WrongDomain,
    #[error(
        "{scales} scales do not fit a {height}x{width} grid \
         (lowpass support would fall below {min_size} samples); maximum feasible: {max_feasible}"
    )]
    TooManyScales {
        scales: usize,
        height: usize,
        width: usize,
        min_size: usize,
        max_feasible: usize,
    },
    #[error("invalid filter-bank parameters: {0}")]
    InvalidParams(String),
    #[error("band count mismatch: coefficient set has {got}, filter bank expects {expected}")]
    BandCountMismatch { got: usize, expected: usize },
}

/// Which transform produced a coefficient set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Dft,
    Csp,
}

/// Transform-domain representation of a single-channel image.
///
/// DFT: one full complex grid. CSP: `scales × orientations` complex
/// oriented bands at full resolution plus two real residuals.
#[derive(Debug, Clone)]
pub struct CoefficientSet {
    pub height: usize,
    pub width: usize,
    pub kind: CoefficientKind,
}

#[derive(Debug, Clone)]
pub enum CoefficientKind {
    Dft {
        grid: Array2<Complex64>,
    },
    Csp {
        scales: usize,
        orientations: usize,
        /// Ordered scale-major: `bands[s * orientations + o]`, scale 0 finest.
        bands: Vec<Array2<Complex64>>,
        highpass: Array2<f64>,
        lowpass: Array2<f64>,
    },
}

impl CoefficientSet {
    pub fn domain(&self) -> Domain {
        match self.kind {
            CoefficientKind::Dft { .. } => Domain::Dft,
            CoefficientKind::Csp { .. } => Domain::Csp,
        }
    }

    /// The complex (phase-carrying) bands: the single DFT grid, or every
    /// oriented CSP band. Residuals are excluded.
    pub fn complex_bands(&self) -> Vec<&Array2<Complex64>> {
        match &self.kind {
            CoefficientKind::Dft { grid } => vec![grid],
            CoefficientKind::Csp { bands, .. } => bands.iter().collect(),
        }
    }

    pub fn complex_bands_mut(&mut self) -> Vec<&mut Array2<Complex64>> {
        match &mut self.kind {
            CoefficientKind::Dft { grid } => vec![grid],
            CoefficientKind::Csp { bands, .. } => bands.iter_mut().collect(),
        }
    }

    /// Scale every coefficient (residuals included) by `factor`.
    pub fn scaled(&self, factor: f64) -> CoefficientSet {
        let kind = match &self.kind {
            CoefficientKind::Dft { grid } => CoefficientKind::Dft {
                grid: grid.mapv(|v| v * factor),
            },
            CoefficientKind::Csp {
                scales,
                orientations,
                bands,
                highpass,
                lowpass,
            } => CoefficientKind::Csp {
                scales: *scales,
                orientations: *orientations,
                bands: bands.iter().map(|b| b.mapv(|v| v * factor)).collect(),
                highpass: highpass.mapv(|v| v * factor),
                lowpass: lowpass.mapv(|v| v * factor),
            },
        };
        CoefficientSet {
            height: self.height,
            width: self.width,
            kind,
        }
    }
}

/// A transform choice bound to a fixed grid geometry, so callers can hold
/// one value and analyze/synthesize/adjoint through it uniformly.
#[derive(Debug, Clone)]
pub enum Transform {
    Dft { height: usize, width: usize },
    Csp(FilterBank),
}

impl Transform {
    pub fn dft(height: usize, width: usize) -> Self {
        Transform::Dft { height, width }
    }

    pub fn csp(
        height: usize,
        width: usize,
        scales: usize,
        orientations: usize,
    ) -> Result<Self, TransformError> {
        Ok(Transform::Csp(csp_build_filters(
            height,
            width,
            scales,
            orientations,
        )?))
    }

    pub fn grid_size(&self) -> (usize, usize) {
        match self {
            Transform::Dft { height, width } => (*height, *width),
            Transform::Csp(bank) => (bank.height, bank.width),
        }
    }

    pub fn analyze(&self, image: &ImageGrid) -> Result<CoefficientSet, TransformError> {
        match self {
            Transform::Dft { height, width } => {
                check_geometry(image, *height, *width)?;
                dft_forward(image)
            }
            Transform::Csp(bank) => csp_analyze(image, bank),
        }
    }

    pub fn synthesize(&self, coeffs: &CoefficientSet) -> Result<ImageGrid, TransformError> {
        match self {
            Transform::Dft { .. } => dft_inverse(coeffs),
            Transform::Csp(bank) => csp_synthesize(coeffs, bank),
        }
    }

    /// Adjoint of `synthesize`, mapping a pixel-space gradient into
    /// coefficient space (real inner products on both sides).
    pub fn adjoint(&self, pixel_grad: &ImageGrid) -> Result<CoefficientSet, TransformError> {
        match self {
            Transform::Dft { height, width } => {
                check_geometry(pixel_grad, *height, *width)?;
                dft_adjoint(pixel_grad)
            }
            Transform::Csp(bank) => analysis_adjoint(pixel_grad, bank),
        }
    }
}

pub(crate) fn check_geometry(
    image: &ImageGrid,
    height: usize,
    width: usize,
) -> Result<(), TransformError> {
    if image.channels() != 1 {
        return Err(TransformError::NotSingleChannel(image.channels()));
    }
    if image.height() != height || image.width() != width {
        return Err(TransformError::DimensionMismatch {
            expected_h: height,
            expected_w: width,
            got_h: image.height(),
            got_w: image.width(),
        });
    }
    Ok(())
}

/// Real inner product between two coefficient sets: real and imaginary
/// parts of complex bands count as independent real coordinates.
pub fn coefficient_inner_product(a: &CoefficientSet, b: &CoefficientSet) -> f64 {
    let mut acc = 0.0;
    for (ba, bb) in a.complex_bands().iter().zip(b.complex_bands()) {
        acc += ba
            .iter()
            .zip(bb.iter())
            .map(|(p, q)| p.re * q.re + p.im * q.im)
            .sum::<f64>();
    }
    if let (
        CoefficientKind::Csp {
            highpass: ha,
            lowpass: la,
            ..
        },
        CoefficientKind::Csp {
            highpass: hb,
            lowpass: lb,
            ..
        },
    ) = (&a.kind, &b.kind)
    {
        acc += ha.iter().zip(hb.iter()).map(|(p, q)| p * q).sum::<f64>();
        acc += la.iter().zip(lb.iter()).map(|(p, q)| p * q).sum::<f64>();
    }
    acc
}
