//! Colorized digit variants and the YIQ color space.
//!
//! The palette holds the three pure channel hues and the three composite
//! (two-channel) hues. Colorization multiplies the gray value into the
//! chosen color triple, so luminance structure is preserved per channel.

use super::{DataError, LabeledDataset, Split};
use crate::grid::ImageGrid;
use ndarray::Array3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct Palette {
    entries: Vec<(String, [f64; 3])>,
}

impl Palette {
    /// red, green, blue (pure), then magenta, yellow, cyan (composite).
    pub fn standard() -> Palette {
        Palette {
            entries: vec![
                ("red".into(), [1.0, 0.0, 0.0]),
                ("green".into(), [0.0, 1.0, 0.0]),
                ("blue".into(), [0.0, 0.0, 1.0]),
                ("magenta".into(), [1.0, 0.0, 1.0]),
                ("yellow".into(), [1.0, 1.0, 0.0]),
                ("cyan".into(), [0.0, 1.0, 1.0]),
            ],
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn name(&self, index: usize) -> &str {
        &self.entries[index].0
    }

    pub fn rgb(&self, index: usize) -> [f64; 3] {
        self.entries[index].1
    }

    pub fn index_of(&self, name: &str) -> Result<usize, DataError> {
        self.entries
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| DataError::UnknownColor(name.to_string()))
    }

    /// Pure hues light exactly one channel.
    pub fn is_pure(&self, index: usize) -> bool {
        self.rgb(index).iter().filter(|&&v| v != 0.0).count() == 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorAssignMode {
    /// Random color per image, digit labels kept: 10 classes.
    RandomColor10,
    /// Every (digit, color) pair is a class: label = digit·C + color.
    ProductClasses,
}

impl std::str::FromStr for ColorAssignMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" | "random-color-10" => Ok(ColorAssignMode::RandomColor10),
            "product" | "product-classes" => Ok(ColorAssignMode::ProductClasses),
            other => Err(format!("unknown color mode '{other}' (expected random|product)")),
        }
    }
}

/// Colorize a grayscale dataset. Color choice is seeded and per-image.
pub fn colorize_mnist(
    data: &LabeledDataset,
    palette: &Palette,
    mode: ColorAssignMode,
    seed: u64,
) -> Result<LabeledDataset, DataError> {
    if let Some((c, _, _)) = data.geometry() {
        if c != 1 {
            return Err(DataError::ChannelCount { expected: 1, got: c });
        }
    }
    if palette.is_empty() {
        return Err(DataError::InvalidParams("empty palette".into()));
    }
    let digits = data.class_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut images = Vec::with_capacity(data.len());
    let mut labels = Vec::with_capacity(data.len());
    for (img, &digit) in data.images().iter().zip(data.labels()) {
        let color_idx = rng.random_range(0..palette.len());
        let rgb = palette.rgb(color_idx);
        let (_, h, w) = (img.channels(), img.height(), img.width());
        let colored = Array3::from_shape_fn((3, h, w), |(c, y, x)| {
            img.data()[[0, y, x]] * rgb[c]
        });
        images.push(ImageGrid::new(colored)?);
        labels.push(match mode {
            ColorAssignMode::RandomColor10 => digit,
            ColorAssignMode::ProductClasses => digit * palette.len() + color_idx,
        });
    }
    let class_names = match mode {
        ColorAssignMode::RandomColor10 => data.class_names().to_vec(),
        ColorAssignMode::ProductClasses => {
            let mut names = Vec::with_capacity(digits * palette.len());
            for d in 0..digits {
                for c in 0..palette.len() {
                    names.push(format!("{}-{}", data.class_names()[d], palette.name(c)));
                }
            }
            names
        }
    };
    LabeledDataset::new(images, labels, class_names, data.split())
}

/// NTSC luminance/chrominance matrix; the Y row is 0.299/0.587/0.114.
const RGB_TO_YIQ: [[f64; 3]; 3] = [
    [0.299, 0.587, 0.114],
    [0.595716, -0.274453, -0.321263],
    [0.211456, -0.522591, 0.311135],
];

/// Inverse of `RGB_TO_YIQ`, computed by adjugate so the pair composes to
/// identity at machine precision.
fn yiq_to_rgb_matrix() -> [[f64; 3]; 3] {
    invert3(&RGB_TO_YIQ)
}

fn invert3(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let cof = |r1: usize, c1: usize, r2: usize, c2: usize| {
        m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1]
    };
    [
        [cof(1, 1, 2, 2) / det, -cof(0, 1, 2, 2) / det, cof(0, 1, 1, 2) / det],
        [-cof(1, 0, 2, 2) / det, cof(0, 0, 2, 2) / det, -cof(0, 0, 1, 2) / det],
        [cof(1, 0, 2, 1) / det, -cof(0, 0, 2, 1) / det, cof(0, 0, 1, 1) / det],
    ]
}

fn apply_matrix(image: &ImageGrid, m: &[[f64; 3]; 3]) -> Result<ImageGrid, DataError> {
    if image.channels() != 3 {
        return Err(DataError::ChannelCount {
            expected: 3,
            got: image.channels(),
        });
    }
    let (h, w) = (image.height(), image.width());
    let data = image.data();
    let out = Array3::from_shape_fn((3, h, w), |(c, y, x)| {
        m[c][0] * data[[0, y, x]] + m[c][1] * data[[1, y, x]] + m[c][2] * data[[2, y, x]]
    });
    Ok(ImageGrid::from_raw(out))
}

pub fn rgb_to_yiq(image: &ImageGrid) -> Result<ImageGrid, DataError> {
    apply_matrix(image, &RGB_TO_YIQ)
}

pub fn yiq_to_rgb(image: &ImageGrid) -> Result<ImageGrid, DataError> {
    apply_matrix(image, &yiq_to_rgb_matrix())
}

/// Transpose of the YIQ→RGB map, for transporting pixel gradients from
/// RGB into YIQ coordinates.
pub(crate) fn yiq_gradient_from_rgb(grad_rgb: &ImageGrid) -> Result<ImageGrid, DataError> {
    let inv = yiq_to_rgb_matrix();
    let mut t = [[0.0; 3]; 3];
    for (r, row) in inv.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            t[c][r] = v;
        }
    }
    apply_matrix(grad_rgb, &t)
}
