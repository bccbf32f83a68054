//! Undecimated complex steerable pyramid.
//!
//! All filtering happens in the frequency domain: raised-cosine radial
//! windows with octave spacing, and `cos^(K−1)` angular windows restricted
//! to a half-plane so every oriented coefficient is analytic (carries a
//! local amplitude and phase). Subbands stay at full image resolution.
//!
//! Synthesis takes twice the real part of the oriented reconstruction, so
//! each oriented mask effectively covers both its half-plane and the
//! point-reflected one; the tight-frame identity is stated accordingly:
//!   hi² + lo² + Σ_{s,o} [m²(ω) + m²(−ω)] = 1  at every frequency sample.

use super::fft2::{fft2, fft2_real, ifft2};
use super::{CoefficientKind, CoefficientSet, TransformError};
use crate::grid::ImageGrid;
use ndarray::{Array2, Array3};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Smallest lowpass support (in samples along the shorter side) that a
/// scale decomposition may leave.
const MIN_LOWPASS_SUPPORT: usize = 4;

/// Frequency-domain masks for one grid geometry. Immutable once built.
#[derive(Debug, Clone)]
pub struct FilterBank {
    pub height: usize,
    pub width: usize,
    pub scales: usize,
    pub orientations: usize,
    /// Radial bandpass windows, one per scale (scale 0 finest).
    pub radial: Vec<Array2<f64>>,
    /// Angular windows, one per orientation, already half-plane restricted.
    pub angular: Vec<Array2<f64>>,
    /// Oriented masks `radial[s] * angular[o]` at `s * orientations + o`.
    pub oriented: Vec<Array2<f64>>,
    pub highpass: Array2<f64>,
    pub lowpass: Array2<f64>,
}

/// Smooth log-radial step: 1 below `cutoff/2`, 0 above `cutoff`, raised
/// cosine in between. Its complement `hi_step` satisfies lo² + hi² = 1.
fn lo_step(r: f64, cutoff: f64) -> f64 {
    if r <= cutoff / 2.0 {
        1.0
    } else if r >= cutoff {
        0.0
    } else {
        (PI / 2.0 * ((r / cutoff).log2() + 1.0)).cos()
    }
}

fn hi_step(r: f64, cutoff: f64) -> f64 {
    if r <= cutoff / 2.0 {
        0.0
    } else if r >= cutoff {
        1.0
    } else {
        (PI / 2.0 * ((r / cutoff).log2() + 1.0)).sin()
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Signed frequency in radians for DFT bin `i` of `n`, in `[-π, π)`.
fn bin_freq(i: usize, n: usize) -> f64 {
    let signed = if i <= (n - 1) / 2 {
        i as f64
    } else {
        i as f64 - n as f64
    };
    2.0 * PI * signed / n as f64
}

pub fn csp_build_filters(
    height: usize,
    width: usize,
    scales: usize,
    orientations: usize,
) -> Result<FilterBank, TransformError> {
    if scales < 1 {
        return Err(TransformError::InvalidParams(
            "at least one scale required".into(),
        ));
    }
    if orientations < 2 {
        return Err(TransformError::InvalidParams(
            "at least two orientations required".into(),
        ));
    }
    let min_side = height.min(width);
    if min_side < MIN_LOWPASS_SUPPORT {
        return Err(TransformError::InvalidParams(format!(
            "grid {height}x{width} below minimum side {MIN_LOWPASS_SUPPORT}"
        )));
    }
    if min_side >> scales < MIN_LOWPASS_SUPPORT {
        let mut max_feasible = 0;
        while min_side >> (max_feasible + 1) >= MIN_LOWPASS_SUPPORT {
            max_feasible += 1;
        }
        return Err(TransformError::TooManyScales {
            scales,
            height,
            width,
            min_size: MIN_LOWPASS_SUPPORT,
            max_feasible,
        });
    }

    let shape = (height, width);
    let radius = Array2::from_shape_fn(shape, |(u, v)| {
        bin_freq(u, height).hypot(bin_freq(v, width))
    });
    let angle = Array2::from_shape_fn(shape, |(u, v)| {
        bin_freq(u, height).atan2(bin_freq(v, width))
    });

    // Residual highpass plus telescoping octave bands: at every radius,
    // hi² + Σ radial² + lo² = 1 exactly because each split is a
    // (cos, sin) pair.
    let highpass = radius.mapv(|r| hi_step(r, PI));
    let mut lowpass_so_far = radius.mapv(|r| lo_step(r, PI));
    let mut radial = Vec::with_capacity(scales);
    for s in 0..scales {
        let cutoff = PI / 2f64.powi(s as i32 + 1);
        let band = Array2::from_shape_fn(shape, |(u, v)| {
            lowpass_so_far[[u, v]] * hi_step(radius[[u, v]], cutoff)
        });
        lowpass_so_far.zip_mut_with(&radius, |l, &r| *l *= lo_step(r, cutoff));
        radial.push(band);
    }
    let lowpass = lowpass_so_far;

    // Angular windows a_K·cos^(K−1)(θ−θ_o) on the half-plane cos > 0;
    // a_K normalizes Σ_o cos^(2K−2)(θ−θ_o) over the full plane to 1.
    let k = orientations;
    let norm = 2f64.powi(k as i32 - 1) / (k as f64 * binomial(2 * k - 2, k - 1)).sqrt();
    let mut angular = Vec::with_capacity(k);
    for o in 0..k {
        let theta_o = PI * o as f64 / k as f64;
        angular.push(angle.mapv(|t| {
            let c = (t - theta_o).cos();
            if c > 0.0 {
                norm * c.powi(k as i32 - 1)
            } else {
                0.0
            }
        }));
    }

    let mut oriented = Vec::with_capacity(scales * k);
    for band in &radial {
        for ang in &angular {
            oriented.push(band * ang);
        }
    }

    Ok(FilterBank {
        height,
        width,
        scales,
        orientations,
        radial,
        angular,
        oriented,
        highpass,
        lowpass,
    })
}

impl FilterBank {
    /// Largest deviation of the tight-frame sum from 1 over all frequency
    /// samples, counting each oriented mask together with its point
    /// reflection (the synthesis rule doubles the real part).
    pub fn partition_deviation(&self) -> f64 {
        let (h, w) = (self.height, self.width);
        let mut total = &self.highpass * &self.highpass + &self.lowpass * &self.lowpass;
        for m in &self.oriented {
            for ((u, v), &val) in m.indexed_iter() {
                let (mu, mv) = ((h - u) % h, (w - v) % w);
                total[[u, v]] += val * val + m[[mu, mv]] * m[[mu, mv]];
            }
        }
        total
            .iter()
            .map(|&s| (s - 1.0).abs())
            .fold(0.0, f64::max)
    }

    fn check_coeffs(&self, coeffs: &CoefficientSet) -> Result<(), TransformError> {
        if coeffs.height != self.height || coeffs.width != self.width {
            return Err(TransformError::DimensionMismatch {
                expected_h: self.height,
                expected_w: self.width,
                got_h: coeffs.height,
                got_w: coeffs.width,
            });
        }
        match &coeffs.kind {
            CoefficientKind::Csp { bands, .. } => {
                if bands.len() != self.oriented.len() {
                    return Err(TransformError::BandCountMismatch {
                        got: bands.len(),
                        expected: self.oriented.len(),
                    });
                }
                Ok(())
            }
            CoefficientKind::Dft { .. } => Err(TransformError::WrongDomain),
        }
    }
}

pub fn csp_analyze(image: &ImageGrid, bank: &FilterBank) -> Result<CoefficientSet, TransformError> {
    super::check_geometry(image, bank.height, bank.width)?;
    let spectrum = fft2_real(&image.channel(0));
    let bands = bank
        .oriented
        .iter()
        .map(|mask| ifft2(&mask_spectrum(&spectrum, mask)))
        .collect();
    let highpass = ifft2(&mask_spectrum(&spectrum, &bank.highpass)).mapv(|v| v.re);
    let lowpass = ifft2(&mask_spectrum(&spectrum, &bank.lowpass)).mapv(|v| v.re);
    Ok(CoefficientSet {
        height: bank.height,
        width: bank.width,
        kind: CoefficientKind::Csp {
            scales: bank.scales,
            orientations: bank.orientations,
            bands,
            highpass,
            lowpass,
        },
    })
}

pub fn csp_synthesize(
    coeffs: &CoefficientSet,
    bank: &FilterBank,
) -> Result<ImageGrid, TransformError> {
    bank.check_coeffs(coeffs)?;
    let (bands, highpass, lowpass) = match &coeffs.kind {
        CoefficientKind::Csp {
            bands,
            highpass,
            lowpass,
            ..
        } => (bands, highpass, lowpass),
        _ => unreachable!("checked above"),
    };
    let mut oriented_spec: Array2<Complex64> = Array2::zeros((bank.height, bank.width));
    for (band, mask) in bands.iter().zip(&bank.oriented) {
        let spec = fft2(band);
        for ((u, v), s) in spec.indexed_iter() {
            oriented_spec[[u, v]] += s * mask[[u, v]];
        }
    }
    let mut residual_spec = fft2_real(&highpass.view());
    for ((u, v), s) in residual_spec.indexed_iter_mut() {
        *s *= bank.highpass[[u, v]];
    }
    let lo_spec = fft2_real(&lowpass.view());
    for ((u, v), s) in lo_spec.indexed_iter() {
        residual_spec[[u, v]] += s * bank.lowpass[[u, v]];
    }
    let oriented_part = ifft2(&oriented_spec);
    let residual_part = ifft2(&residual_spec);
    let mut out = Array3::zeros((1, bank.height, bank.width));
    for ((u, v), o) in oriented_part.indexed_iter() {
        out[[0, u, v]] = 2.0 * o.re + residual_part[[u, v]].re;
    }
    Ok(ImageGrid::from_raw(out))
}

/// Adjoint of `csp_synthesize` under real inner products: the analysis
/// bands of the pixel gradient with oriented bands doubled (the residual
/// bands carry no factor).
pub fn analysis_adjoint(
    pixel_grad: &ImageGrid,
    bank: &FilterBank,
) -> Result<CoefficientSet, TransformError> {
    let mut coeffs = csp_analyze(pixel_grad, bank)?;
    if let CoefficientKind::Csp { bands, .. } = &mut coeffs.kind {
        for band in bands {
            band.mapv_inplace(|v| v * 2.0);
        }
    }
    Ok(coeffs)
}

fn mask_spectrum(spectrum: &Array2<Complex64>, mask: &Array2<f64>) -> Array2<Complex64> {
    let mut out = spectrum.clone();
    out.zip_mut_with(mask, |s, &m| *s *= m);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::coefficient_inner_product;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(h: usize, w: usize, seed: u64) -> ImageGrid {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ImageGrid::from_fn(h, w, |_, _| rng.random::<f64>())
    }

    #[test]
    fn partition_of_unity_64_3_4() {
        let bank = csp_build_filters(64, 64, 3, 4).unwrap();
        assert_eq!(bank.oriented.len(), 12);
        assert!(bank.partition_deviation() < 1e-10);
    }

    #[test]
    fn partition_of_unity_minimal_bank() {
        let bank = csp_build_filters(64, 64, 1, 2).unwrap();
        assert_eq!(bank.oriented.len(), 2);
        assert!(bank.partition_deviation() < 1e-10);
    }

    #[test]
    fn partition_holds_non_square() {
        let bank = csp_build_filters(48, 64, 2, 3).unwrap();
        assert!(bank.partition_deviation() < 1e-10);
    }

    #[test]
    fn rejects_too_many_scales() {
        match csp_build_filters(16, 16, 4, 4) {
            Err(TransformError::TooManyScales { max_feasible, .. }) => {
                assert_eq!(max_feasible, 2);
            }
            other => panic!("expected TooManyScales, got {other:?}"),
        }
    }

    #[test]
    fn constant_image_routes_to_lowpass() {
        let bank = csp_build_filters(32, 32, 2, 4).unwrap();
        let img = ImageGrid::from_fn(32, 32, |_, _| 0.8);
        let coeffs = csp_analyze(&img, &bank).unwrap();
        if let CoefficientKind::Csp {
            bands,
            highpass,
            lowpass,
            ..
        } = &coeffs.kind
        {
            for band in bands {
                let energy: f64 = band.iter().map(|v| v.norm_sqr()).sum();
                assert!(energy < 1e-18, "oriented band should be empty: {energy}");
            }
            let hi_energy: f64 = highpass.iter().map(|v| v * v).sum();
            assert!(hi_energy < 1e-18);
            let lo_mean: f64 = lowpass.iter().sum::<f64>() / lowpass.len() as f64;
            assert!((lo_mean - 0.8).abs() < 1e-10);
        } else {
            unreachable!()
        }
    }

    #[test]
    fn vertical_edge_concentrates_in_aligned_band() {
        // A vertical step edge varies along x, i.e. its spectrum lies on
        // the horizontal frequency axis (θ ≈ 0, orientation 0).
        let bank = csp_build_filters(64, 64, 3, 4).unwrap();
        let img = ImageGrid::from_fn(64, 64, |_, x| if x < 32 { 0.0 } else { 1.0 });
        let coeffs = csp_analyze(&img, &bank).unwrap();
        if let CoefficientKind::Csp { bands, .. } = &coeffs.kind {
            for s in 0..3 {
                let energies: Vec<f64> = (0..4)
                    .map(|o| bands[s * 4 + o].iter().map(|v| v.norm_sqr()).sum())
                    .collect();
                for o in 1..4 {
                    assert!(
                        energies[0] > energies[o],
                        "scale {s}: aligned {} vs orientation {o}: {}",
                        energies[0],
                        energies[o]
                    );
                }
            }
        }
    }

    #[test]
    fn round_trip_random_images() {
        let bank = csp_build_filters(32, 32, 2, 4).unwrap();
        for seed in 0..20 {
            let img = random_image(32, 32, seed);
            let back = csp_synthesize(&csp_analyze(&img, &bank).unwrap(), &bank).unwrap();
            let err = img.relative_l2(&back);
            assert!(err < 1e-6, "seed {seed}: relative error {err}");
        }
    }

    #[test]
    fn zero_coefficients_synthesize_to_zero() {
        let bank = csp_build_filters(16, 16, 1, 2).unwrap();
        let coeffs = CoefficientSet {
            height: 16,
            width: 16,
            kind: CoefficientKind::Csp {
                scales: 1,
                orientations: 2,
                bands: vec![Array2::zeros((16, 16)); 2],
                highpass: Array2::zeros((16, 16)),
                lowpass: Array2::zeros((16, 16)),
            },
        };
        let img = csp_synthesize(&coeffs, &bank).unwrap();
        assert!(img.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn synthesis_is_linear_in_coefficients() {
        let bank = csp_build_filters(32, 32, 2, 3).unwrap();
        let img = random_image(32, 32, 3);
        let coeffs = csp_analyze(&img, &bank).unwrap();
        let doubled = csp_synthesize(&coeffs.scaled(2.0), &bank).unwrap();
        let single = csp_synthesize(&coeffs, &bank).unwrap();
        let max_diff = doubled
            .data()
            .iter()
            .zip(single.data().iter())
            .map(|(d, s)| (d - 2.0 * s).abs())
            .fold(0.0, f64::max);
        assert!(max_diff < 1e-12);
    }

    #[test]
    fn band_count_mismatch_rejected() {
        let bank = csp_build_filters(16, 16, 2, 2).unwrap();
        let other = csp_build_filters(16, 16, 1, 2).unwrap();
        let img = random_image(16, 16, 4);
        let coeffs = csp_analyze(&img, &other).unwrap();
        assert!(matches!(
            csp_synthesize(&coeffs, &bank),
            Err(TransformError::BandCountMismatch { .. })
        ));
    }

    #[test]
    fn adjoint_identity_random() {
        let bank = csp_build_filters(24, 24, 2, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        // Random coefficient set, not one produced by analysis.
        let rand_band = |rng: &mut ChaCha8Rng| {
            Array2::from_shape_fn((24, 24), |_| {
                Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            })
        };
        let bands: Vec<_> = (0..6).map(|_| rand_band(&mut rng)).collect();
        let coeffs = CoefficientSet {
            height: 24,
            width: 24,
            kind: CoefficientKind::Csp {
                scales: 2,
                orientations: 3,
                bands,
                highpass: Array2::from_shape_fn((24, 24), |_| rng.random::<f64>() - 0.5),
                lowpass: Array2::from_shape_fn((24, 24), |_| rng.random::<f64>() - 0.5),
            },
        };
        let g = random_image(24, 24, 12);
        let s = csp_synthesize(&coeffs, &bank).unwrap();
        let lhs: f64 = s
            .channel(0)
            .iter()
            .zip(g.channel(0).iter())
            .map(|(a, b)| a * b)
            .sum();
        let rhs = coefficient_inner_product(&coeffs, &analysis_adjoint(&g, &bank).unwrap());
        let rel = (lhs - rhs).abs() / lhs.abs().max(1e-30);
        assert!(rel < 1e-8, "adjoint identity relative error {rel}");
    }

    #[test]
    fn adjoint_of_zero_is_zero() {
        let bank = csp_build_filters(16, 16, 1, 2).unwrap();
        let coeffs = analysis_adjoint(&ImageGrid::zeros(1, 16, 16), &bank).unwrap();
        for band in coeffs.complex_bands() {
            assert!(band.iter().all(|v| v.norm() == 0.0));
        }
    }

    #[test]
    fn energy_routing_single_band_reconstruction() {
        // With K = 2 the angular windows reach exactly 1 on their axes, so
        // a sinusoid at the on-grid frequency (radius π/2, angle 0) lies
        // entirely inside one oriented mask and reconstructs from that
        // band alone. Wider K spreads energy across angular neighbours.
        let n = 64;
        let bank = csp_build_filters(n, n, 3, 2).unwrap();
        let img = ImageGrid::from_fn(n, n, |_, x| {
            (2.0 * PI * 16.0 * x as f64 / n as f64 + 0.3).cos()
        });
        let coeffs = csp_analyze(&img, &bank).unwrap();
        // Keep only the aligned band: scale 0 (π/4..π, peak π/2), orientation 0.
        if let CoefficientKind::Csp {
            bands,
            highpass,
            lowpass,
            ..
        } = &coeffs.kind
        {
            let kept = CoefficientSet {
                height: n,
                width: n,
                kind: CoefficientKind::Csp {
                    scales: 3,
                    orientations: 2,
                    bands: bands
                        .iter()
                        .enumerate()
                        .map(|(i, b)| if i == 0 { b.clone() } else { Array2::zeros((n, n)) })
                        .collect(),
                    highpass: Array2::zeros(highpass.dim()),
                    lowpass: Array2::zeros(lowpass.dim()),
                },
            };
            let back = csp_synthesize(&kept, &bank).unwrap();
            let err = img.relative_l2(&back);
            assert!(err < 1e-6, "single-band reconstruction error {err}");
        }
    }
}
