//! Synthetic dataset: a white disk on black, displaced from the image
//! center in one of the four cardinal directions. The label is the
//! displacement direction, so the classes differ only in object position.

use super::{DataError, LabeledDataset, Split};
use crate::grid::ImageGrid;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ARCADE_CLASS_NAMES: [&str; 4] = ["up", "down", "left", "right"];

/// Image coordinates put row 0 at the top, so "up" decreases y.
const DIRECTIONS: [(f64, f64); 4] = [(0.0, -1.0), (0.0, 1.0), (-1.0, 0.0), (1.0, 0.0)];

#[derive(Debug, Clone)]
pub struct ArcadeParams {
    pub image_size: usize,
    pub disk_radius: f64,
    pub displacement_min: f64,
    pub displacement_max: f64,
    pub samples_per_class: usize,
    pub seed: u64,
}

impl Default for ArcadeParams {
    fn default() -> Self {
        ArcadeParams {
            image_size: 64,
            disk_radius: 8.0,
            displacement_min: 4.0,
            displacement_max: 12.0,
            samples_per_class: 2000,
            seed: 0,
        }
    }
}

impl ArcadeParams {
    fn validate(&self) -> Result<(), DataError> {
        if self.image_size < 16 {
            return Err(DataError::InvalidParams(format!(
                "image size {} below 16",
                self.image_size
            )));
        }
        if !(self.disk_radius > 0.0) {
            return Err(DataError::InvalidParams("disk radius must be > 0".into()));
        }
        if self.displacement_min > self.displacement_max || self.displacement_min < 0.0 {
            return Err(DataError::InvalidParams(format!(
                "bad displacement range [{}, {}]",
                self.displacement_min, self.displacement_max
            )));
        }
        // The disk (plus its 1-px falloff) must stay inside the image.
        if self.disk_radius + self.displacement_max >= self.image_size as f64 / 2.0 {
            return Err(DataError::InvalidParams(format!(
                "radius {} + max displacement {} does not fit half of {}",
                self.disk_radius, self.displacement_max, self.image_size
            )));
        }
        Ok(())
    }
}

/// Render an anti-aliased disk: 1 inside, 0 outside, a 1-px linear edge.
/// Background beyond `radius + 1` of the center is exactly zero.
pub fn render_disk(size: usize, cy: f64, cx: f64, radius: f64) -> ImageGrid {
    ImageGrid::from_fn(size, size, |y, x| {
        let dist = ((y as f64 - cy).powi(2) + (x as f64 - cx).powi(2)).sqrt();
        (radius + 0.5 - dist).clamp(0.0, 1.0)
    })
}

/// Deterministic per seed; classes are exactly balanced, interleaved in
/// direction order per sample index.
pub fn generate_arcade(params: &ArcadeParams, split: Split) -> Result<LabeledDataset, DataError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let center = (params.image_size as f64 - 1.0) / 2.0;
    let mut images = Vec::with_capacity(4 * params.samples_per_class);
    let mut labels = Vec::with_capacity(4 * params.samples_per_class);
    for _ in 0..params.samples_per_class {
        for (label, (dx, dy)) in DIRECTIONS.iter().enumerate() {
            let d = rng.random_range(params.displacement_min..=params.displacement_max);
            let cy = center + dy * d;
            let cx = center + dx * d;
            images.push(render_disk(params.image_size, cy, cx, params.disk_radius));
            labels.push(label);
        }
    }
    LabeledDataset::new(
        images,
        labels,
        ARCADE_CLASS_NAMES.iter().map(|s| s.to_string()).collect(),
        split,
    )
}
