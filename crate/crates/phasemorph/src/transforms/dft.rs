//! 2-D discrete Fourier transform as an invertible image representation.
//!
//! Phase edits break Hermitian symmetry, so reconstruction is defined as
//! the real part of the inverse transform rather than re-symmetrizing.

use super::fft2::{fft2_real, ifft2};
use super::{check_geometry, CoefficientKind, CoefficientSet, TransformError};
use crate::grid::ImageGrid;
use ndarray::Array3;

pub fn dft_forward(image: &ImageGrid) -> Result<CoefficientSet, TransformError> {
    if image.channels() != 1 {
        return Err(TransformError::NotSingleChannel(image.channels()));
    }
    let ch = image.channel(0);
    for ((y, x), &v) in ch.indexed_iter() {
        if !v.is_finite() {
            return Err(TransformError::NonFinite { y, x });
        }
    }
    let grid = fft2_real(&ch);
    Ok(CoefficientSet {
        height: image.height(),
        width: image.width(),
        kind: CoefficientKind::Dft { grid },
    })
}

pub fn dft_inverse(coeffs: &CoefficientSet) -> Result<ImageGrid, TransformError> {
    let grid = match &coeffs.kind {
        CoefficientKind::Dft { grid } => grid,
        _ => return Err(TransformError::WrongDomain),
    };
    let (h, w) = grid.dim();
    if h != coeffs.height || w != coeffs.width {
        return Err(TransformError::DimensionMismatch {
            expected_h: coeffs.height,
            expected_w: coeffs.width,
            got_h: h,
            got_w: w,
        });
    }
    let spatial = ifft2(grid);
    let mut out = Array3::zeros((1, h, w));
    for ((y, x), v) in spatial.indexed_iter() {
        out[[0, y, x]] = v.re;
    }
    Ok(ImageGrid::from_raw(out))
}

/// Adjoint of `dft_inverse` under real inner products: the forward DFT
/// scaled by `1/(H·W)`.
pub fn dft_adjoint(pixel_grad: &ImageGrid) -> Result<CoefficientSet, TransformError> {
    check_geometry(pixel_grad, pixel_grad.height(), pixel_grad.width())?;
    let mut grid = fft2_real(&pixel_grad.channel(0));
    let scale = 1.0 / (pixel_grad.height() * pixel_grad.width()) as f64;
    grid.mapv_inplace(|v| v * scale);
    Ok(CoefficientSet {
        height: pixel_grad.height(),
        width: pixel_grad.width(),
        kind: CoefficientKind::Dft { grid },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::coefficient_inner_product;
    use ndarray::Array2;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_image(h: usize, w: usize, seed: u64) -> ImageGrid {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ImageGrid::from_fn(h, w, |_, _| rng.random::<f64>())
    }

    #[test]
    fn constant_image_is_dc_only() {
        let c = 0.37;
        let img = ImageGrid::from_fn(16, 16, |_, _| c);
        let coeffs = dft_forward(&img).unwrap();
        let grid = match &coeffs.kind {
            CoefficientKind::Dft { grid } => grid,
            _ => unreachable!(),
        };
        assert!((grid[[0, 0]] - Complex64::new(c * 256.0, 0.0)).norm() < 1e-9);
        for ((u, v), val) in grid.indexed_iter() {
            if (u, v) != (0, 0) {
                assert!(val.norm() < 1e-9, "nonzero at ({u},{v}): {val}");
            }
        }
    }

    #[test]
    fn impulse_has_flat_spectrum() {
        let img = ImageGrid::from_fn(8, 8, |y, x| if (y, x) == (0, 0) { 1.0 } else { 0.0 });
        let coeffs = dft_forward(&img).unwrap();
        for band in coeffs.complex_bands() {
            for v in band.iter() {
                assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn round_trip_within_1e10() {
        for seed in 0..5 {
            let img = random_image(32, 24, seed);
            let back = dft_inverse(&dft_forward(&img).unwrap()).unwrap();
            assert!(img.relative_l2(&back) < 1e-10);
        }
    }

    #[test]
    fn zero_coefficients_give_zero_image() {
        let coeffs = CoefficientSet {
            height: 8,
            width: 8,
            kind: CoefficientKind::Dft {
                grid: Array2::zeros((8, 8)),
            },
        };
        let img = dft_inverse(&coeffs).unwrap();
        assert!(img.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn shift_theorem_phase_ramp() {
        // Oracle: translating by (0, dx) must equal multiplying the
        // spectrum by exp(-2πi·v·dx/W) per column frequency v.
        let w = 16;
        let h = 12;
        let dx = 3usize;
        let img = random_image(h, w, 99);
        let shifted = ImageGrid::from_fn(h, w, |y, x| img.channel(0)[[y, (x + w - dx) % w]]);
        let spec = dft_forward(&img).unwrap();
        let spec_shifted = dft_forward(&shifted).unwrap();
        let g = match &spec.kind {
            CoefficientKind::Dft { grid } => grid,
            _ => unreachable!(),
        };
        let gs = match &spec_shifted.kind {
            CoefficientKind::Dft { grid } => grid,
            _ => unreachable!(),
        };
        let mut max_diff = 0.0f64;
        for ((u, v), val) in g.indexed_iter() {
            let ramp = Complex64::from_polar(1.0, -2.0 * PI * (v as f64) * (dx as f64) / w as f64);
            max_diff = max_diff.max((val * ramp - gs[[u, v]]).norm());
            // Amplitudes unchanged by translation.
            assert!((val.norm() - gs[[u, v]].norm()).abs() < 1e-9);
        }
        assert!(max_diff < 1e-9, "max abs diff {max_diff}");
    }

    #[test]
    fn phase_ramped_impulse_moves_to_shifted_location() {
        let n = 8;
        let img = ImageGrid::from_fn(n, n, |y, x| if (y, x) == (0, 0) { 1.0 } else { 0.0 });
        let mut coeffs = dft_forward(&img).unwrap();
        let (dy, dx) = (2usize, 5usize);
        if let CoefficientKind::Dft { grid } = &mut coeffs.kind {
            for ((u, v), val) in grid.indexed_iter_mut() {
                let ang = -2.0 * PI * ((u * dy + v * dx) as f64) / n as f64;
                *val *= Complex64::from_polar(1.0, ang);
            }
        }
        let out = dft_inverse(&coeffs).unwrap();
        for ((y, x), &v) in out.channel(0).indexed_iter() {
            let expect = if (y, x) == (dy, dx) { 1.0 } else { 0.0 };
            assert!((v - expect).abs() < 1e-10, "at ({y},{x}): {v}");
        }
    }

    #[test]
    fn adjoint_identity_random() {
        // <Re(idft(C)), g> == <C, adjoint(g)> for random C and g.
        let (h, w) = (12, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let grid = Array2::from_shape_fn((h, w), |_| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let coeffs = CoefficientSet {
            height: h,
            width: w,
            kind: CoefficientKind::Dft { grid },
        };
        let g = random_image(h, w, 6);
        let s = dft_inverse(&coeffs).unwrap();
        let lhs: f64 = s
            .channel(0)
            .iter()
            .zip(g.channel(0).iter())
            .map(|(a, b)| a * b)
            .sum();
        let rhs = coefficient_inner_product(&coeffs, &dft_adjoint(&g).unwrap());
        assert!((lhs - rhs).abs() / lhs.abs().max(1e-30) < 1e-8);
    }

    #[test]
    fn rejects_non_finite() {
        let mut img = ImageGrid::zeros(1, 8, 8);
        img.data_mut()[[0, 1, 2]] = 1.0;
        // Corrupt after construction to hit the transform's own check.
        img.data_mut()[[0, 2, 3]] = f64::INFINITY;
        assert!(matches!(
            dft_forward(&img),
            Err(TransformError::NonFinite { y: 2, x: 3 })
        ));
    }

    #[test]
    fn rejects_size_mismatch_against_provenance() {
        let img = random_image(8, 8, 1);
        let mut coeffs = dft_forward(&img).unwrap();
        coeffs.height = 16;
        assert!(matches!(
            dft_inverse(&coeffs),
            Err(TransformError::DimensionMismatch { .. })
        ));
    }
}
