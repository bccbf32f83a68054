//! End-to-end trajectory engine: analyze → coefficient gradient → phase
//! shift → extrapolate → reconstruct, per channel, with per-frame
//! classifier confidence.
//!
//! The single gradient computed at the source image drives every frame;
//! nothing is re-linearized along the trajectory. Pixels are never
//! clamped between steps — clamping would silently change the math — so
//! raw frames can leave [0, 1]. Confidence is recorded both for the
//! clamped frame (what a viewer of the export sees) and the raw one.

mod export;

pub use export::export_trajectory;

use crate::datasets::{rgb_to_yiq, yiq_gradient_from_rgb, yiq_to_rgb, DataError};
use crate::grid::ImageGrid;
use crate::net::{argmax, image_batch, layers::log_softmax, Classifier, NetError};
use crate::transforms::{Transform, TransformError};
use crate::wirtinger::{
    auto_alpha, band_gradient, coefficient_gradient, decompose, extrapolate_set, AmplitudePhase,
    AmplitudePolicy, GradientBundle, WirtingerError,
};
use ndarray::{Array2, Array3, Axis};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MorphError {
    #[error("image geometry {got:?} does not match model input {expected:?}")]
    Geometry {
        expected: (usize, usize, usize),
        got: (usize, usize, usize),
    },
    #[error("frame count must be >= 1")]
    ZeroFrames,
    #[error("amplifier must be positive (got {0}); use auto scaling instead")]
    BadAlpha(f64),
    #[error("per-channel amplifier list has {got} entries for {expected} channels")]
    BadChannelAlphas { got: usize, expected: usize },
    #[error("color mode {mode} needs {expected} channels, image has {got}")]
    ColorModeChannels {
        mode: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("centroid undefined: image has no positive mass")]
    ZeroMass,
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Wirtinger(#[from] WirtingerError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainConfig {
    Csp { scales: usize, orientations: usize },
    Dft,
}

impl DomainConfig {
    pub fn name(&self) -> &'static str {
        match self {
            DomainConfig::Csp { .. } => "csp",
            DomainConfig::Dft => "dft",
        }
    }
}

/// Amplifier selection: a fixed α or auto-scaling to a target phase-shift
/// percentile (90th percentile of |ΔΦ| equals the target, in radians).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaMode {
    Fixed(f64),
    Auto { target_rad: f64 },
}

impl AlphaMode {
    pub const DEFAULT_TARGET_RAD: f64 = 0.05;

    pub fn auto() -> Self {
        AlphaMode::Auto {
            target_rad: Self::DEFAULT_TARGET_RAD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorMode {
    Gray,
    RgbPerChannel,
    Yiq,
}

impl ColorMode {
    pub fn name(&self) -> &'static str {
        match self {
            ColorMode::Gray => "gray",
            ColorMode::RgbPerChannel => "rgb-per-channel",
            ColorMode::Yiq => "yiq",
        }
    }
}

#[derive(Debug, Clone)]
pub struct MorphConfig {
    pub domain: DomainConfig,
    pub alpha: AlphaMode,
    /// Per-channel overrides for multichannel modes; `None` applies
    /// `alpha` to every channel.
    pub channel_alphas: Option<Vec<AlphaMode>>,
    /// Number of extrapolation steps K; the trajectory has K+1 frames.
    pub frames: usize,
    pub policy: AmplitudePolicy,
    pub color_mode: ColorMode,
    /// Whether viewer-facing diagnostics (predicted class, centroid) use
    /// the clamped frame. Raw frames are always kept unclamped.
    pub clamp: bool,
}

impl Default for MorphConfig {
    fn default() -> Self {
        MorphConfig {
            domain: DomainConfig::Csp {
                scales: 3,
                orientations: 4,
            },
            alpha: AlphaMode::auto(),
            channel_alphas: None,
            frames: 10,
            policy: AmplitudePolicy::Constant,
            color_mode: ColorMode::Gray,
            clamp: true,
        }
    }
}

impl MorphConfig {
    /// Plain-text key/value snapshot, embedded in trajectories and
    /// written next to exports.
    pub fn snapshot(&self, target: usize, alphas_used: &[f64]) -> String {
        let mut lines = Vec::new();
        lines.push(format!("domain={}", self.domain.name()));
        if let DomainConfig::Csp {
            scales,
            orientations,
        } = self.domain
        {
            lines.push(format!("scales={scales}"));
            lines.push(format!("orientations={orientations}"));
        }
        match self.alpha {
            AlphaMode::Fixed(a) => lines.push(format!("alpha=fixed:{a}")),
            AlphaMode::Auto { target_rad } => lines.push(format!("alpha=auto:{target_rad}")),
        }
        lines.push(format!(
            "alphas_used={}",
            alphas_used
                .iter()
                .map(|a| format!("{a:.12e}"))
                .collect::<Vec<_>>()
                .join(",")
        ));
        lines.push(format!("frames={}", self.frames));
        lines.push(format!("policy={}", self.policy.name()));
        lines.push(format!("color_mode={}", self.color_mode.name()));
        lines.push(format!("clamp={}", if self.clamp { "on" } else { "off" }));
        lines.push(format!("target={target}"));
        lines.join("\n") + "\n"
    }
}

/// Per-frame diagnostics.
#[derive(Debug, Clone)]
pub struct FrameInfo {
    pub target_logp_clamped: f64,
    pub target_logp_raw: f64,
    pub predicted: usize,
    /// Intensity centroid (x, y) of the clamped frame; single-channel
    /// frames with positive mass only.
    pub centroid: Option<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct MorphTrajectory {
    /// Raw (unclamped) reconstructions; frame 0 is the source round trip.
    pub frames: Vec<ImageGrid>,
    /// Row k = softmax probabilities of the clamped frame k.
    pub confidence_clamped: Array2<f64>,
    /// Row k = softmax probabilities of the raw frame k.
    pub confidence_raw: Array2<f64>,
    pub per_frame: Vec<FrameInfo>,
    pub target: usize,
    pub class_names: Option<Vec<String>>,
    /// α per channel actually used (after auto-scaling).
    pub alphas: Vec<f64>,
    /// Set when every coefficient fell below the amplitude floor or the
    /// gradient vanished; the trajectory is then flat.
    pub degenerate: bool,
    /// Coefficients clamped by the linear amplitude policy, total.
    pub amplitude_clamps: usize,
    pub config_snapshot: String,
    pub clamp: bool,
}

impl MorphTrajectory {
    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn clamped_frame(&self, k: usize) -> ImageGrid {
        self.frames[k].clamped()
    }

    /// Target-class probability trace from the clamped confidence matrix.
    pub fn target_trace(&self) -> Vec<f64> {
        self.confidence_clamped
            .column(self.target)
            .iter()
            .copied()
            .collect()
    }
}

/// Intensity-weighted mean coordinates (x, y) of a single-channel image.
pub fn centroid(image: &ImageGrid) -> Result<(f64, f64), MorphError> {
    if image.channels() != 1 {
        return Err(MorphError::Geometry {
            expected: (1, image.height(), image.width()),
            got: (image.channels(), image.height(), image.width()),
        });
    }
    let mut mass = 0.0;
    let mut mx = 0.0;
    let mut my = 0.0;
    for ((y, x), &v) in image.channel(0).indexed_iter() {
        if v < 0.0 {
            return Err(MorphError::ZeroMass);
        }
        mass += v;
        mx += v * x as f64;
        my += v * y as f64;
    }
    if mass <= 0.0 {
        return Err(MorphError::ZeroMass);
    }
    Ok((mx / mass, my / mass))
}

/// Softmax probabilities for each frame: row k is frame k. `target` is
/// validated against the model's class count.
pub fn confidence_trace(
    model: &Classifier,
    frames: &[ImageGrid],
    target: usize,
) -> Result<Array2<f64>, MorphError> {
    if target >= model.class_count() {
        return Err(MorphError::Net(NetError::InvalidTarget {
            target,
            classes: model.class_count(),
        }));
    }
    let mut out = Array2::zeros((frames.len(), model.class_count()));
    for (k, frame) in frames.iter().enumerate() {
        let logits = model.forward(&image_batch(std::slice::from_ref(frame)))?;
        let logp = log_softmax(&logits);
        for (j, v) in logp.row(0).iter().enumerate() {
            out[[k, j]] = v.exp();
        }
    }
    Ok(out)
}

/// State for one independently-extrapolated channel.
struct ChannelPlan {
    source: crate::transforms::CoefficientSet,
    ap0: Vec<AmplitudePhase>,
    bundle: GradientBundle,
    degenerate: bool,
}

pub fn morph(
    model: &Classifier,
    image: &ImageGrid,
    target: usize,
    cfg: &MorphConfig,
) -> Result<MorphTrajectory, MorphError> {
    if cfg.frames < 1 {
        return Err(MorphError::ZeroFrames);
    }
    if let AlphaMode::Fixed(a) = cfg.alpha {
        if !(a > 0.0) {
            return Err(MorphError::BadAlpha(a));
        }
    }
    let expected = model.arch().input_geometry();
    let got = (image.channels(), image.height(), image.width());
    if expected != got {
        return Err(MorphError::Geometry { expected, got });
    }
    let channels = match cfg.color_mode {
        ColorMode::Gray => 1,
        ColorMode::RgbPerChannel | ColorMode::Yiq => 3,
    };
    if image.channels() != channels {
        return Err(MorphError::ColorModeChannels {
            mode: cfg.color_mode.name(),
            expected: channels,
            got: image.channels(),
        });
    }
    if let Some(list) = &cfg.channel_alphas {
        if list.len() != channels {
            return Err(MorphError::BadChannelAlphas {
                got: list.len(),
                expected: channels,
            });
        }
        for a in list {
            if let AlphaMode::Fixed(v) = a {
                if !(*v > 0.0) {
                    return Err(MorphError::BadAlpha(*v));
                }
            }
        }
    }

    let transform = match cfg.domain {
        DomainConfig::Dft => Transform::dft(image.height(), image.width()),
        DomainConfig::Csp {
            scales,
            orientations,
        } => Transform::csp(image.height(), image.width(), scales, orientations)?,
    };

    // The working representation: YIQ planes, RGB planes, or the image
    // itself. The pixel gradient is transported into the same basis.
    let working = match cfg.color_mode {
        ColorMode::Yiq => rgb_to_yiq(image)?,
        _ => image.clone(),
    };
    let pixel_grad = model.input_gradient(image, target)?;
    let working_grad = match cfg.color_mode {
        ColorMode::Yiq => yiq_gradient_from_rgb(&pixel_grad)?,
        _ => pixel_grad,
    };

    let mut plans = Vec::with_capacity(channels);
    let mut alphas = Vec::with_capacity(channels);
    for c in 0..channels {
        let chan_img = ImageGrid::from_raw(
            working
                .data()
                .index_axis(Axis(0), c)
                .to_owned()
                .insert_axis(Axis(0)),
        );
        let chan_grad = ImageGrid::from_raw(
            working_grad
                .data()
                .index_axis(Axis(0), c)
                .to_owned()
                .insert_axis(Axis(0)),
        );
        let source = transform.analyze(&chan_img)?;
        let g_conj = coefficient_gradient(&chan_grad, &transform)?;
        let alpha_mode = cfg
            .channel_alphas
            .as_ref()
            .map(|list| list[c])
            .unwrap_or(cfg.alpha);
        let bands = source.complex_bands();
        let (alpha, degenerate) = match alpha_mode {
            AlphaMode::Fixed(a) => (a, false),
            AlphaMode::Auto { target_rad } => {
                let refs: Vec<&Array2<_>> = g_conj.iter().collect();
                match auto_alpha(&bands, &refs, target_rad) {
                    Ok(a) => (a, false),
                    // Zero gradient or empty amplitude: flat trajectory.
                    Err(WirtingerError::DegenerateGradient) => (0.0, true),
                    Err(e) => return Err(e.into()),
                }
            }
        };
        let ap0: Vec<AmplitudePhase> = bands.iter().map(|b| decompose(b)).collect();
        let band_grads = bands
            .iter()
            .zip(g_conj)
            .map(|(band, g)| band_gradient(band, g, alpha))
            .collect::<Result<Vec<_>, _>>()?;
        let all_floored = band_grads
            .iter()
            .all(|bg| bg.retained.iter().all(|&r| !r));
        alphas.push(alpha);
        plans.push(ChannelPlan {
            source,
            ap0,
            bundle: GradientBundle {
                bands: band_grads,
                alpha,
            },
            degenerate: degenerate || all_floored,
        });
    }
    let degenerate = plans.iter().all(|p| p.degenerate);

    let (h, w) = (image.height(), image.width());
    let mut frames = Vec::with_capacity(cfg.frames + 1);
    let mut amplitude_clamps = 0usize;
    for k in 0..=cfg.frames {
        let mut merged = Array3::zeros((channels, h, w));
        for (c, plan) in plans.iter().enumerate() {
            let (coeffs_k, clamped) =
                extrapolate_set(&plan.source, &plan.ap0, &plan.bundle, k, cfg.policy)?;
            amplitude_clamps += clamped;
            let chan = transform.synthesize(&coeffs_k)?;
            merged
                .index_axis_mut(Axis(0), c)
                .assign(&chan.data().index_axis(Axis(0), 0));
        }
        let frame = ImageGrid::from_raw(merged);
        let frame = match cfg.color_mode {
            ColorMode::Yiq => yiq_to_rgb(&frame)?,
            _ => frame,
        };
        frames.push(frame);
    }

    let clamped_frames: Vec<ImageGrid> = frames.iter().map(|f| f.clamped()).collect();
    let confidence_clamped = confidence_trace(model, &clamped_frames, target)?;
    let confidence_raw = confidence_trace(model, &frames, target)?;
    let mut per_frame = Vec::with_capacity(frames.len());
    for k in 0..frames.len() {
        let probs_for_prediction = if cfg.clamp {
            confidence_clamped.row(k)
        } else {
            confidence_raw.row(k)
        };
        let predicted = argmax(probs_for_prediction.as_slice().unwrap());
        let centroid = if channels == 1 {
            centroid(&clamped_frames[k]).ok()
        } else {
            None
        };
        per_frame.push(FrameInfo {
            target_logp_clamped: confidence_clamped[[k, target]].max(f64::MIN_POSITIVE).ln(),
            target_logp_raw: confidence_raw[[k, target]].max(f64::MIN_POSITIVE).ln(),
            predicted,
            centroid,
        });
    }

    Ok(MorphTrajectory {
        frames,
        confidence_clamped,
        confidence_raw,
        per_frame,
        target,
        class_names: None,
        alphas: alphas.clone(),
        degenerate,
        amplitude_clamps,
        config_snapshot: cfg.snapshot(target, &alphas),
        clamp: cfg.clamp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{generate_arcade, ArcadeParams, Split};
    use crate::net::{Arch, Classifier};
    use ndarray::Array3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn test_model(channels: usize, side: usize, classes: usize) -> Classifier {
        Classifier::init(Arch::toy(channels, side, classes), 3).unwrap()
    }

    fn random_image(channels: usize, side: usize, seed: u64) -> ImageGrid {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ImageGrid::new(Array3::from_shape_fn((channels, side, side), |_| rng.random())).unwrap()
    }

    fn small_cfg() -> MorphConfig {
        MorphConfig {
            domain: DomainConfig::Csp {
                scales: 2,
                orientations: 4,
            },
            frames: 4,
            ..MorphConfig::default()
        }
    }

    #[test]
    fn tiny_alpha_keeps_frames_at_source() {
        let model = test_model(1, 32, 3);
        let img = random_image(1, 32, 5);
        let cfg = MorphConfig {
            alpha: AlphaMode::Fixed(1e-12),
            ..small_cfg()
        };
        let traj = morph(&model, &img, 1, &cfg).unwrap();
        assert_eq!(traj.frame_count(), 5);
        for frame in &traj.frames {
            assert!(img.relative_l2(frame) < 1e-6);
        }
    }

    #[test]
    fn frame_zero_matches_source_within_reconstruction() {
        let model = test_model(1, 32, 3);
        let img = random_image(1, 32, 6);
        let traj = morph(&model, &img, 2, &small_cfg()).unwrap();
        assert!(img.relative_l2(&traj.frames[0]) < 1e-6);
    }

    #[test]
    fn probability_rows_sum_to_one() {
        let model = test_model(1, 32, 3);
        let img = random_image(1, 32, 7);
        let traj = morph(&model, &img, 0, &small_cfg()).unwrap();
        for row in traj.confidence_clamped.rows() {
            assert!((row.sum() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn degenerate_image_flagged_flat() {
        let model = test_model(1, 32, 3);
        let img = ImageGrid::zeros(1, 32, 32);
        let traj = morph(&model, &img, 1, &small_cfg()).unwrap();
        assert!(traj.degenerate);
        for frame in &traj.frames {
            assert!(frame.data().iter().all(|&v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn geometry_mismatch_rejected() {
        let model = test_model(1, 32, 3);
        let img = random_image(1, 16, 8);
        assert!(matches!(
            morph(&model, &img, 0, &small_cfg()),
            Err(MorphError::Geometry { .. })
        ));
    }

    #[test]
    fn gray_replicated_rgb_keeps_channels_identical() {
        // Channel symmetry: identical input channels, equal amplifiers,
        // and a channel-symmetric model must give identical channel
        // trajectories. Symmetrize the first conv's weights across input
        // channels so the per-channel pixel gradients coincide.
        let mut model = test_model(3, 32, 3);
        let mut params = model.flat_params();
        // Toy arch layer 0: conv weight [2, 3, 3, 3] in standard layout.
        let (o, c, kk) = (2usize, 3usize, 9usize);
        for oi in 0..o {
            for ci in 1..c {
                for e in 0..kk {
                    params[(oi * c + ci) * kk + e] = params[oi * c * kk + e];
                }
            }
        }
        model.set_flat_params(&params).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let gray = ndarray::Array2::from_shape_fn((32, 32), |_| rng.random::<f64>());
        let mut data = Array3::zeros((3, 32, 32));
        for ci in 0..3 {
            data.index_axis_mut(Axis(0), ci).assign(&gray);
        }
        let img = ImageGrid::new(data).unwrap();
        let cfg = MorphConfig {
            color_mode: ColorMode::RgbPerChannel,
            alpha: AlphaMode::Fixed(0.05),
            ..small_cfg()
        };
        let traj = morph(&model, &img, 1, &cfg).unwrap();
        for (k, frame) in traj.frames.iter().enumerate() {
            for ((ci, y, x), &v) in frame.data().indexed_iter() {
                if ci > 0 {
                    let base = frame.data()[[0, y, x]];
                    assert!(
                        (v - base).abs() < 1e-9,
                        "frame {k} channel {ci} at ({y},{x}): {v} vs {base}"
                    );
                }
            }
        }
    }

    #[test]
    fn centroid_basics() {
        let img = crate::datasets::generate_arcade(
            &ArcadeParams {
                samples_per_class: 1,
                displacement_min: 5.0,
                displacement_max: 5.0,
                ..ArcadeParams::default()
            },
            Split::Train,
        )
        .unwrap();
        // Label 3 is "right": centroid x = center + 5 within half a pixel.
        let right = img
            .images()
            .iter()
            .zip(img.labels())
            .find(|(_, &l)| l == 3)
            .unwrap()
            .0;
        let (cx, cy) = centroid(right).unwrap();
        let center = 31.5;
        assert!((cx - (center + 5.0)).abs() < 0.5);
        assert!((cy - center).abs() < 0.1);

        let zero = ImageGrid::zeros(1, 16, 16);
        assert!(matches!(centroid(&zero), Err(MorphError::ZeroMass)));

        let sym = ImageGrid::from_fn(32, 32, |y, x| {
            let d1 = ((y as f64 - 15.5).powi(2) + (x as f64 - 7.5).powi(2)).sqrt();
            let d2 = ((y as f64 - 15.5).powi(2) + (x as f64 - 23.5).powi(2)).sqrt();
            let a = if d1 < 4.0 { 1.0 } else { 0.0 };
            let b = if d2 < 4.0 { 1.0 } else { 0.0 };
            a + b
        });
        let (cx, cy) = centroid(&sym).unwrap();
        assert!((cx - 15.5).abs() < 0.1);
        assert!((cy - 15.5).abs() < 0.1);
    }

    #[test]
    fn centered_disk_centroid_at_center() {
        let img = crate::datasets::render_disk(64, 31.5, 31.5, 8.0);
        let (cx, cy) = centroid(&img).unwrap();
        assert!((cx - 31.5).abs() < 0.1);
        assert!((cy - 31.5).abs() < 0.1);
    }

    #[test]
    fn confidence_trace_shapes() {
        let model = test_model(1, 32, 4);
        let img = random_image(1, 32, 3);
        let trace = confidence_trace(&model, std::slice::from_ref(&img), 0).unwrap();
        assert_eq!(trace.dim(), (1, 4));
        assert!(matches!(
            confidence_trace(&model, std::slice::from_ref(&img), 9),
            Err(MorphError::Net(NetError::InvalidTarget { .. }))
        ));
    }

    #[test]
    fn morph_is_deterministic() {
        let model = test_model(1, 32, 3);
        let img = random_image(1, 32, 21);
        let a = morph(&model, &img, 1, &small_cfg()).unwrap();
        let b = morph(&model, &img, 1, &small_cfg()).unwrap();
        for (fa, fb) in a.frames.iter().zip(&b.frames) {
            assert_eq!(fa.data(), fb.data());
        }
        assert_eq!(a.confidence_clamped, b.confidence_clamped);
    }

    #[test]
    fn constant_policy_amplitudes_bitwise_stable() {
        // Amplitude arrays of extrapolated frames are the same values the
        // source decomposition produced, checked before reconstruction.
        let model = test_model(1, 32, 3);
        let img = random_image(1, 32, 2);
        let transform = Transform::csp(32, 32, 2, 4).unwrap();
        let coeffs = transform.analyze(&img).unwrap();
        let grad = model.input_gradient(&img, 1).unwrap();
        let g_conj = coefficient_gradient(&grad, &transform).unwrap();
        let bands = coeffs.complex_bands();
        let refs: Vec<&Array2<_>> = g_conj.iter().collect();
        let alpha = auto_alpha(&bands, &refs, 0.05).unwrap();
        for (band, g) in bands.iter().zip(g_conj) {
            let ap0 = decompose(band);
            let bg = band_gradient(band, g, alpha).unwrap();
            for k in [1, 5, 10] {
                let (ap_k, _) = crate::wirtinger::extrapolate(
                    &ap0,
                    &bg.delta_phi,
                    &bg.z_mag,
                    k,
                    AmplitudePolicy::Constant,
                );
                assert_eq!(ap_k.amplitude, ap0.amplitude, "k = {k}");
            }
        }
    }

    #[test]
    fn trajectory_on_trained_toy_increases_target_probability() {
        // Train a small model on two separable disk positions, then morph
        // from one class toward the other.
        let params = ArcadeParams {
            image_size: 32,
            disk_radius: 5.0,
            displacement_min: 4.0,
            displacement_max: 8.0,
            samples_per_class: 30,
            seed: 5,
        };
        let data = generate_arcade(&params, Split::Train).unwrap();
        let mut model = Classifier::init(Arch::toy(1, 32, 4), 1).unwrap();
        let cfg = crate::net::TrainConfig {
            epochs: 6,
            batch_size: 16,
            ..Default::default()
        };
        crate::net::train(&mut model, &data, &cfg).unwrap();

        let source = data
            .images()
            .iter()
            .zip(data.labels())
            .find(|(_, &l)| l == 1)
            .unwrap()
            .0;
        let traj = morph(
            &model,
            source,
            2, // "left"
            &MorphConfig {
                domain: DomainConfig::Csp {
                    scales: 2,
                    orientations: 4,
                },
                frames: 8,
                ..MorphConfig::default()
            },
        )
        .unwrap();
        let trace = traj.target_trace();
        assert!(
            trace[traj.frame_count() - 1] > trace[0],
            "target probability should rise: {trace:?}"
        );
    }
}
