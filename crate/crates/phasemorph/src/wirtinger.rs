//! Amplitude/phase gradient machinery for complex coefficients.
//!
//! For a real loss L over a complex coefficient S, the ascent direction is
//! the conjugate Wirtinger gradient g* = ∂L/∂S* = ½(∂L/∂S_re + j ∂L/∂S_im).
//! With S = A·e^{jΦ}, the chain rule gives
//!   g* = ½ (∇_A L · S/A + j ∇_Φ L · S/A²),
//! and one ascent step S + α·g* acts multiplicatively: S·z with
//!   z = 1 + α·g*/S,
//! so a single step shifts the phase by ΔΦ = arg(z) and scales the
//! amplitude by |z|. Trajectories extrapolate ΔΦ linearly from the k = 0
//! gradient; the amplitude follows one of three policies.

use crate::grid::ImageGrid;
use crate::transforms::{CoefficientKind, CoefficientSet, Transform, TransformError};
use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

/// Coefficients with amplitude below `AMPLITUDE_FLOOR_REL · max_band_amplitude`
/// are dropped from phase manipulation: the update divides by A and A², and
/// near-zero coefficients would otherwise contribute unbounded phase noise.
pub const AMPLITUDE_FLOOR_REL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum WirtingerError {
    #[error("negative amplitude {value} at ({y}, {x})")]
    NegativeAmplitude { y: usize, x: usize, value: f64 },
    #[error("shape mismatch between bands: {0:?} vs {1:?}")]
    ShapeMismatch((usize, usize), (usize, usize)),
    #[error("gradient is identically zero; no phase direction exists")]
    DegenerateGradient,
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// Polar form of one complex band. `recompose ∘ decompose` is the identity
/// wherever the amplitude is nonzero.
#[derive(Debug, Clone)]
pub struct AmplitudePhase {
    pub amplitude: Array2<f64>,
    pub phase: Array2<f64>,
}

/// How the amplitude evolves along the extrapolated trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AmplitudePolicy {
    /// A_k = A_0. The headline rule: all structural change is phase.
    #[default]
    Constant,
    /// A_k = |z|^k · A_0, what k literal ascent steps would compound.
    Compounded,
    /// A_k = A_0 · (1 + k(|z| − 1)), first-order in k, clamped at 0.
    Linear,
}

impl AmplitudePolicy {
    pub fn name(&self) -> &'static str {
        match self {
            AmplitudePolicy::Constant => "constant",
            AmplitudePolicy::Compounded => "compounded",
            AmplitudePolicy::Linear => "linear",
        }
    }
}

impl std::str::FromStr for AmplitudePolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "constant" => Ok(AmplitudePolicy::Constant),
            "compounded" => Ok(AmplitudePolicy::Compounded),
            "linear" => Ok(AmplitudePolicy::Linear),
            other => Err(format!(
                "unknown amplitude policy '{other}' (expected constant|compounded|linear)"
            )),
        }
    }
}

/// A = |S|, Φ = arg(S) ∈ (−π, π]; S = 0 maps to (0, 0) by convention.
pub fn decompose(band: &Array2<Complex64>) -> AmplitudePhase {
    let amplitude = band.mapv(|s| s.norm());
    let phase = band.mapv(|s| {
        if s.re == 0.0 && s.im == 0.0 {
            0.0
        } else {
            let p = s.im.atan2(s.re);
            if p == -std::f64::consts::PI {
                std::f64::consts::PI
            } else {
                p
            }
        }
    });
    AmplitudePhase { amplitude, phase }
}

/// S = A·e^{jΦ}. Phases outside (−π, π] are reduced implicitly by cos/sin.
pub fn recompose(ap: &AmplitudePhase) -> Result<Array2<Complex64>, WirtingerError> {
    if ap.amplitude.dim() != ap.phase.dim() {
        return Err(WirtingerError::ShapeMismatch(
            ap.amplitude.dim(),
            ap.phase.dim(),
        ));
    }
    for ((y, x), &a) in ap.amplitude.indexed_iter() {
        if a < 0.0 {
            return Err(WirtingerError::NegativeAmplitude { y, x, value: a });
        }
    }
    let mut out = Array2::zeros(ap.amplitude.dim());
    for ((idx, &a), &p) in ap
        .amplitude
        .indexed_iter()
        .zip(ap.phase.iter())
    {
        out[idx] = Complex64::from_polar(a, p);
    }
    Ok(out)
}

/// Per-band Wirtinger gradient data for one step at k = 0.
#[derive(Debug, Clone)]
pub struct BandGradient {
    /// g* = ∂L/∂S*, one entry per coefficient.
    pub g_conj: Array2<Complex64>,
    pub grad_amplitude: Array2<f64>,
    pub grad_phase: Array2<f64>,
    pub delta_phi: Array2<f64>,
    /// |z| of the one-step multiplicative factor, 1 where floored.
    pub z_mag: Array2<f64>,
    /// False where the coefficient fell below the amplitude floor.
    pub retained: Array2<bool>,
}

/// Gradients of all complex bands plus the amplifier that produced them.
#[derive(Debug, Clone)]
pub struct GradientBundle {
    pub bands: Vec<BandGradient>,
    pub alpha: f64,
}

/// Transport a pixel-space gradient into coefficient space.
///
/// Returns one g* grid per complex band of the transform: ½ of the
/// synthesis adjoint, which makes the identity
/// ∂L/∂S* = ½(∂L/∂S_re + j ∂L/∂S_im) hold against finite differences.
pub fn coefficient_gradient(
    pixel_grad: &ImageGrid,
    transform: &Transform,
) -> Result<Vec<Array2<Complex64>>, WirtingerError> {
    let adjoint = transform.adjoint(pixel_grad)?;
    let bands = match adjoint.kind {
        CoefficientKind::Dft { grid } => vec![grid.mapv(|v| v * 0.5)],
        CoefficientKind::Csp { bands, .. } => {
            bands.into_iter().map(|b| b.mapv(|v| v * 0.5)).collect()
        }
    };
    Ok(bands)
}

/// Absolute amplitude floor for a band: `AMPLITUDE_FLOOR_REL` of its peak.
pub fn band_floor(band: &Array2<Complex64>) -> f64 {
    let max_amp = band.iter().map(|s| s.norm()).fold(0.0, f64::max);
    AMPLITUDE_FLOOR_REL * max_amp
}

/// Invert the chain rule: recover (∇_A L, ∇_Φ L) from g* and S.
///
/// ∇_A L = 2·Re(g*·S̄)/A and ∇_Φ L = 2·Im(g*·S̄). Coefficients below the
/// floor report zero gradients and are flagged out.
pub fn amp_phase_gradients(
    band: &Array2<Complex64>,
    g_conj: &Array2<Complex64>,
    floor_abs: f64,
) -> Result<(Array2<f64>, Array2<f64>, Array2<bool>), WirtingerError> {
    if band.dim() != g_conj.dim() {
        return Err(WirtingerError::ShapeMismatch(band.dim(), g_conj.dim()));
    }
    let mut grad_a = Array2::zeros(band.dim());
    let mut grad_phi = Array2::zeros(band.dim());
    let mut retained = Array2::from_elem(band.dim(), false);
    for ((idx, &s), &g) in band.indexed_iter().zip(g_conj.iter()) {
        let a = s.norm();
        if a > floor_abs && a > 0.0 {
            let cross = g * s.conj();
            grad_a[idx] = 2.0 * cross.re / a;
            grad_phi[idx] = 2.0 * cross.im;
            retained[idx] = true;
        }
    }
    Ok((grad_a, grad_phi, retained))
}

/// One-step multiplicative factor z = 1 + α·g*/S₀ per coefficient.
///
/// Returns (ΔΦ, |z|) with ΔΦ = arg(z) ∈ (−π, π]. Floored coefficients get
/// (0, 1). The quotient form is algebraically identical to the
/// amplitude/phase form ΔΦ = arg(1 + α∇_A/(2A) + jα∇_Φ/(2A²)).
pub fn phase_shift(
    band: &Array2<Complex64>,
    g_conj: &Array2<Complex64>,
    alpha: f64,
    floor_abs: f64,
) -> Result<(Array2<f64>, Array2<f64>), WirtingerError> {
    if band.dim() != g_conj.dim() {
        return Err(WirtingerError::ShapeMismatch(band.dim(), g_conj.dim()));
    }
    let mut delta_phi = Array2::zeros(band.dim());
    let mut z_mag = Array2::from_elem(band.dim(), 1.0);
    for ((idx, &s), &g) in band.indexed_iter().zip(g_conj.iter()) {
        let a = s.norm();
        if a > floor_abs && a > 0.0 {
            let z = Complex64::new(1.0, 0.0) + g * alpha / s;
            delta_phi[idx] = z.arg();
            z_mag[idx] = z.norm();
        }
    }
    Ok((delta_phi, z_mag))
}

/// Compute the full gradient data for one band at amplifier `alpha`.
pub fn band_gradient(
    band: &Array2<Complex64>,
    g_conj: Array2<Complex64>,
    alpha: f64,
) -> Result<BandGradient, WirtingerError> {
    let floor = band_floor(band);
    let (grad_amplitude, grad_phase, retained) = amp_phase_gradients(band, &g_conj, floor)?;
    let (delta_phi, z_mag) = phase_shift(band, &g_conj, alpha, floor)?;
    Ok(BandGradient {
        g_conj,
        grad_amplitude,
        grad_phase,
        delta_phi,
        z_mag,
        retained,
    })
}

/// Extrapolate one band to step `k`: Φ_k = Φ₀ + k·ΔΦ, amplitude per policy.
///
/// Returns the new polar band and the number of coefficients the linear
/// policy clamped at zero. Phases are left unwrapped.
pub fn extrapolate(
    ap0: &AmplitudePhase,
    delta_phi: &Array2<f64>,
    z_mag: &Array2<f64>,
    k: usize,
    policy: AmplitudePolicy,
) -> (AmplitudePhase, usize) {
    let kf = k as f64;
    let phase = &ap0.phase + &delta_phi.mapv(|d| kf * d);
    let mut clamped = 0usize;
    let amplitude = match policy {
        AmplitudePolicy::Constant => ap0.amplitude.clone(),
        AmplitudePolicy::Compounded => {
            let mut a = ap0.amplitude.clone();
            a.zip_mut_with(z_mag, |av, &z| *av *= z.powi(k as i32));
            a
        }
        AmplitudePolicy::Linear => {
            let mut a = ap0.amplitude.clone();
            a.zip_mut_with(z_mag, |av, &z| {
                let factor = 1.0 + kf * (z - 1.0);
                if factor < 0.0 {
                    clamped += 1;
                    *av = 0.0;
                } else {
                    *av *= factor;
                }
            });
            a
        }
    };
    (AmplitudePhase { amplitude, phase }, clamped)
}

/// Pick α so the 90th percentile of |ΔΦ| over all retained coefficients
/// equals `target_rad`. Solved by bisection; deterministic.
pub fn auto_alpha(
    bands: &[&Array2<Complex64>],
    grads: &[&Array2<Complex64>],
    target_rad: f64,
) -> Result<f64, WirtingerError> {
    let mut quotients = Vec::new();
    for (band, grad) in bands.iter().zip(grads) {
        let floor = band_floor(band);
        for (&s, &g) in band.iter().zip(grad.iter()) {
            let a = s.norm();
            if a > floor && a > 0.0 {
                quotients.push(g / s);
            }
        }
    }
    if quotients.is_empty() || quotients.iter().all(|q| q.norm() == 0.0) {
        return Err(WirtingerError::DegenerateGradient);
    }
    let p90 = |alpha: f64| -> f64 {
        let mut shifts: Vec<f64> = quotients
            .iter()
            .map(|q| (Complex64::new(1.0, 0.0) + q * alpha).arg().abs())
            .collect();
        shifts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let rank = ((0.9 * shifts.len() as f64).ceil() as usize).max(1);
        shifts[rank.min(shifts.len()) - 1]
    };
    let mut hi = 1e-12;
    let mut grew = 0;
    while p90(hi) < target_rad {
        hi *= 2.0;
        grew += 1;
        if grew > 200 {
            return Err(WirtingerError::DegenerateGradient);
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if p90(mid) < target_rad {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Apply `extrapolate` across a whole coefficient set: complex bands move,
/// residual bands pass through unchanged. Returns the extrapolated set and
/// how many coefficients the linear policy clamped.
pub fn extrapolate_set(
    source: &CoefficientSet,
    ap0: &[AmplitudePhase],
    bundle: &GradientBundle,
    k: usize,
    policy: AmplitudePolicy,
) -> Result<(CoefficientSet, usize), WirtingerError> {
    let mut out = source.clone();
    let mut clamped_total = 0;
    {
        let mut bands = out.complex_bands_mut();
        for ((band, ap), grad) in bands.iter_mut().zip(ap0).zip(&bundle.bands) {
            let (ap_k, clamped) = extrapolate(ap, &grad.delta_phi, &grad.z_mag, k, policy);
            clamped_total += clamped;
            **band = recompose(&ap_k)?;
        }
    }
    Ok((out, clamped_total))
}
