//! MNIST IDX loading. Big-endian headers: images carry magic 0x00000803
//! and three dimension words, labels carry 0x00000801 and one. Pixels are
//! unsigned bytes, scaled here to `[0, 1]`.

use super::{DataError, LabeledDataset, Split};
use crate::grid::ImageGrid;
use ndarray::Array3;
use std::fs;
use std::path::Path;

const IMAGE_MAGIC: u32 = 0x0000_0803;
const LABEL_MAGIC: u32 = 0x0000_0801;

struct Reader<'a> {
    bytes: &'a [u8],
    offset: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn err(&self, reason: impl Into<String>) -> DataError {
        DataError::Idx {
            path: self.path.display().to_string(),
            reason: reason.into(),
            offset: self.offset as u64,
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], DataError> {
        if self.offset + n > self.bytes.len() {
            return Err(self.err(format!(
                "truncated: need {n} bytes, {} remain",
                self.bytes.len() - self.offset
            )));
        }
        let out = &self.bytes[self.offset..self.offset + n];
        self.offset += n;
        Ok(out)
    }

    fn u32_be(&mut self) -> Result<u32, DataError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }
}

fn read_images(path: &Path) -> Result<(usize, usize, usize, Vec<u8>), DataError> {
    let bytes = fs::read(path)?;
    let mut r = Reader {
        bytes: &bytes,
        offset: 0,
        path,
    };
    let magic = r.u32_be()?;
    if magic != IMAGE_MAGIC {
        return Err(DataError::Idx {
            path: path.display().to_string(),
            reason: format!("bad image magic {magic:#010x} (expected {IMAGE_MAGIC:#010x})"),
            offset: 0,
        });
    }
    let count = r.u32_be()? as usize;
    let rows = r.u32_be()? as usize;
    let cols = r.u32_be()? as usize;
    let pixels = r.take(count * rows * cols)?.to_vec();
    if r.offset != bytes.len() {
        return Err(r.err(format!("{} trailing bytes", bytes.len() - r.offset)));
    }
    Ok((count, rows, cols, pixels))
}

fn read_labels(path: &Path) -> Result<Vec<u8>, DataError> {
    let bytes = fs::read(path)?;
    let mut r = Reader {
        bytes: &bytes,
        offset: 0,
        path,
    };
    let magic = r.u32_be()?;
    if magic != LABEL_MAGIC {
        return Err(DataError::Idx {
            path: path.display().to_string(),
            reason: format!("bad label magic {magic:#010x} (expected {LABEL_MAGIC:#010x})"),
            offset: 0,
        });
    }
    let count = r.u32_be()? as usize;
    let labels = r.take(count)?.to_vec();
    if r.offset != bytes.len() {
        return Err(r.err(format!("{} trailing bytes", bytes.len() - r.offset)));
    }
    Ok(labels)
}

pub fn load_mnist(
    images_path: &Path,
    labels_path: &Path,
    split: Split,
) -> Result<LabeledDataset, DataError> {
    let (count, rows, cols, pixels) = read_images(images_path)?;
    let labels = read_labels(labels_path)?;
    if labels.len() != count {
        return Err(DataError::Idx {
            path: labels_path.display().to_string(),
            reason: format!("{} labels for {count} images", labels.len()),
            offset: 8,
        });
    }
    let mut images = Vec::with_capacity(count);
    for i in 0..count {
        let start = i * rows * cols;
        let data = Array3::from_shape_fn((1, rows, cols), |(_, y, x)| {
            pixels[start + y * cols + x] as f64 / 255.0
        });
        images.push(ImageGrid::new(data)?);
    }
    let class_names = (0..10).map(|d| d.to_string()).collect();
    LabeledDataset::new(images, labels.iter().map(|&l| l as usize).collect(), class_names, split)
}
