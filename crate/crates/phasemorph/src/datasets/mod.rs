//! Dataset construction and loading: synthetic displaced disks, MNIST
//! from IDX files, colorized variants, YIQ conversion, and a simple
//! binary cache container.

mod arcade;
mod cache;
mod color;
mod idx;

pub use arcade::{generate_arcade, render_disk, ArcadeParams, ARCADE_CLASS_NAMES};
pub use cache::{load_dataset, save_dataset};
pub use color::{colorize_mnist, rgb_to_yiq, yiq_to_rgb, ColorAssignMode, Palette};
pub use idx::load_mnist;

use crate::grid::{GridError, ImageGrid};
use crate::net::image_batch;
use ndarray::Array4;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("images ({images}) and labels ({labels}) differ in length")]
    LengthMismatch { images: usize, labels: usize },
    #[error("label {label} at sample {index} exceeds class count {classes}")]
    LabelOutOfRange {
        label: usize,
        index: usize,
        classes: usize,
    },
    #[error("sample {index} geometry {got:?} differs from first sample {expected:?}")]
    MixedGeometry {
        index: usize,
        expected: (usize, usize, usize),
        got: (usize, usize, usize),
    },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("batch size must be nonzero")]
    ZeroBatchSize,
    #[error("IDX file {path}: {reason} (byte offset {offset})")]
    Idx {
        path: String,
        reason: String,
        offset: u64,
    },
    #[error("dataset container {path}: {reason}")]
    Container { path: String, reason: String },
    #[error("unknown palette color '{0}'")]
    UnknownColor(String),
    #[error("expected {expected} channels, got {got}")]
    ChannelCount { expected: usize, got: usize },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn name(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

/// Immutable labelled image collection with shared geometry.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    images: Vec<ImageGrid>,
    labels: Vec<usize>,
    class_names: Vec<String>,
    split: Split,
}

impl LabeledDataset {
    pub fn new(
        images: Vec<ImageGrid>,
        labels: Vec<usize>,
        class_names: Vec<String>,
        split: Split,
    ) -> Result<LabeledDataset, DataError> {
        if images.len() != labels.len() {
            return Err(DataError::LengthMismatch {
                images: images.len(),
                labels: labels.len(),
            });
        }
        if let Some(first) = images.first() {
            let expected = (first.channels(), first.height(), first.width());
            for (i, img) in images.iter().enumerate() {
                let got = (img.channels(), img.height(), img.width());
                if got != expected {
                    return Err(DataError::MixedGeometry {
                        index: i,
                        expected,
                        got,
                    });
                }
            }
        }
        for (i, &label) in labels.iter().enumerate() {
            if label >= class_names.len() {
                return Err(DataError::LabelOutOfRange {
                    label,
                    index: i,
                    classes: class_names.len(),
                });
            }
        }
        Ok(LabeledDataset {
            images,
            labels,
            class_names,
            split,
        })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[ImageGrid] {
        &self.images
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn split(&self) -> Split {
        self.split
    }

    /// `(channels, height, width)` of every sample; `None` when empty.
    pub fn geometry(&self) -> Option<(usize, usize, usize)> {
        self.images
            .first()
            .map(|img| (img.channels(), img.height(), img.width()))
    }

    /// Deterministically shuffled batch stream. The final partial batch
    /// is emitted.
    pub fn batches(
        &self,
        batch_size: usize,
        seed: u64,
    ) -> Result<impl Iterator<Item = (Array4<f64>, Vec<usize>)> + '_, DataError> {
        if batch_size == 0 {
            return Err(DataError::ZeroBatchSize);
        }
        let mut order: Vec<usize> = (0..self.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        order.shuffle(&mut rng);
        Ok(BatchIter {
            data: self,
            order,
            cursor: 0,
            batch_size,
        })
    }

    /// Unshuffled batch stream, for evaluation.
    pub fn batches_sequential(
        &self,
        batch_size: usize,
    ) -> Result<impl Iterator<Item = (Array4<f64>, Vec<usize>)> + '_, DataError> {
        if batch_size == 0 {
            return Err(DataError::ZeroBatchSize);
        }
        Ok(BatchIter {
            data: self,
            order: (0..self.len()).collect(),
            cursor: 0,
            batch_size,
        })
    }
}

struct BatchIter<'a> {
    data: &'a LabeledDataset,
    order: Vec<usize>,
    cursor: usize,
    batch_size: usize,
}

impl Iterator for BatchIter<'_> {
    type Item = (Array4<f64>, Vec<usize>);

    fn next(&mut self) -> Option<Self::Item> {
        if self.cursor >= self.order.len() {
            return None;
        }
        let end = (self.cursor + self.batch_size).min(self.order.len());
        let idx = &self.order[self.cursor..end];
        self.cursor = end;
        let images: Vec<ImageGrid> = idx.iter().map(|&i| self.data.images[i].clone()).collect();
        let labels: Vec<usize> = idx.iter().map(|&i| self.data.labels[i]).collect();
        Some((image_batch(&images), labels))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array3;

    fn dataset(n: usize) -> LabeledDataset {
        let images = (0..n)
            .map(|i| {
                ImageGrid::new(Array3::from_elem((1, 8, 8), i as f64 / n as f64)).unwrap()
            })
            .collect();
        let labels = (0..n).map(|i| i % 2).collect();
        LabeledDataset::new(images, labels, vec!["a".into(), "b".into()], Split::Train).unwrap()
    }

    #[test]
    fn batch_sizes_partition_dataset() {
        let data = dataset(10);
        let sizes: Vec<usize> = data
            .batches(3, 0)
            .unwrap()
            .map(|(_, labels)| labels.len())
            .collect();
        assert_eq!(sizes, vec![3, 3, 3, 1]);
    }

    #[test]
    fn same_seed_same_order() {
        let data = dataset(12);
        let a: Vec<Vec<usize>> = data.batches(4, 7).unwrap().map(|(_, l)| l).collect();
        let b: Vec<Vec<usize>> = data.batches(4, 7).unwrap().map(|(_, l)| l).collect();
        assert_eq!(a, b);
        let c: Vec<Vec<usize>> = data.batches(4, 8).unwrap().map(|(_, l)| l).collect();
        assert_ne!(a, c, "different seed should reorder 12 samples");
    }

    #[test]
    fn empty_dataset_empty_stream() {
        let data = LabeledDataset::new(vec![], vec![], vec!["a".into()], Split::Test).unwrap();
        assert_eq!(data.batches(4, 0).unwrap().count(), 0);
    }

    #[test]
    fn zero_batch_size_rejected() {
        let data = dataset(4);
        assert!(matches!(data.batches(0, 0), Err(DataError::ZeroBatchSize)));
    }

    #[test]
    fn label_out_of_range_rejected() {
        let images = vec![ImageGrid::zeros(1, 8, 8)];
        let err = LabeledDataset::new(images, vec![5], vec!["a".into()], Split::Train);
        assert!(matches!(err, Err(DataError::LabelOutOfRange { .. })));
    }
}
