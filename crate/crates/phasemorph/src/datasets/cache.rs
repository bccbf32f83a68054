//! On-disk dataset container:
//!
//! ```text
//! magic       8 bytes  "PHMDATA1"
//! n, c, h, w  u32 LE each
//! n_classes   u32 LE
//! names       n_classes × (u32 LE length + UTF-8)
//! split       u8 (0 train, 1 test)
//! pixels      n·c·h·w × f32 LE
//! labels      n × u8
//! ```

use super::{DataError, LabeledDataset, Split};
use crate::grid::ImageGrid;
use ndarray::Array3;
use std::fs;
use std::path::Path;

const MAGIC: &[u8; 8] = b"PHMDATA1";

pub fn save_dataset(data: &LabeledDataset, path: &Path) -> Result<(), DataError> {
    let (c, h, w) = data.geometry().unwrap_or((1, 0, 0));
    if data.class_count() > 256 {
        return Err(DataError::InvalidParams(
            "container labels are bytes; more than 256 classes unsupported".into(),
        ));
    }
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    for v in [data.len() as u32, c as u32, h as u32, w as u32, data.class_count() as u32] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for name in data.class_names() {
        buf.extend_from_slice(&(name.len() as u32).to_le_bytes());
        buf.extend_from_slice(name.as_bytes());
    }
    buf.push(match data.split() {
        Split::Train => 0,
        Split::Test => 1,
    });
    for img in data.images() {
        for &v in img.data().iter() {
            buf.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    for &label in data.labels() {
        buf.push(label as u8);
    }
    fs::write(path, buf)?;
    Ok(())
}

fn take<'a>(
    bytes: &'a [u8],
    offset: &mut usize,
    n: usize,
    path: &Path,
) -> Result<&'a [u8], DataError> {
    if *offset + n > bytes.len() {
        return Err(DataError::Container {
            path: path.display().to_string(),
            reason: format!("truncated at byte {}", bytes.len()),
        });
    }
    let out = &bytes[*offset..*offset + n];
    *offset += n;
    Ok(out)
}

fn u32_le(bytes: &[u8], offset: &mut usize, path: &Path) -> Result<u32, DataError> {
    Ok(u32::from_le_bytes(
        take(bytes, offset, 4, path)?.try_into().unwrap(),
    ))
}

pub fn load_dataset(path: &Path) -> Result<LabeledDataset, DataError> {
    let bytes = fs::read(path)?;
    let err = |reason: String| DataError::Container {
        path: path.display().to_string(),
        reason,
    };
    let mut offset = 0usize;
    if take(&bytes, &mut offset, 8, path)? != MAGIC {
        return Err(err("bad magic".into()));
    }
    let n = u32_le(&bytes, &mut offset, path)? as usize;
    let c = u32_le(&bytes, &mut offset, path)? as usize;
    let h = u32_le(&bytes, &mut offset, path)? as usize;
    let w = u32_le(&bytes, &mut offset, path)? as usize;
    let n_classes = u32_le(&bytes, &mut offset, path)? as usize;
    let mut class_names = Vec::with_capacity(n_classes);
    for _ in 0..n_classes {
        let len = u32_le(&bytes, &mut offset, path)? as usize;
        let name = std::str::from_utf8(take(&bytes, &mut offset, len, path)?)
            .map_err(|_| err("class name is not UTF-8".into()))?;
        class_names.push(name.to_string());
    }
    let split = match take(&bytes, &mut offset, 1, path)?[0] {
        0 => Split::Train,
        1 => Split::Test,
        other => return Err(err(format!("bad split tag {other}"))),
    };
    let mut images = Vec::with_capacity(n);
    for _ in 0..n {
        let raw = take(&bytes, &mut offset, c * h * w * 4, path)?;
        let data = Array3::from_shape_fn((c, h, w), |(ci, y, x)| {
            let i = ((ci * h + y) * w + x) * 4;
            f32::from_le_bytes(raw[i..i + 4].try_into().unwrap()) as f64
        });
        images.push(ImageGrid::new(data)?);
    }
    let labels: Vec<usize> = take(&bytes, &mut offset, n, path)?
        .iter()
        .map(|&b| b as usize)
        .collect();
    if offset != bytes.len() {
        return Err(err(format!("{} trailing bytes", bytes.len() - offset)));
    }
    LabeledDataset::new(images, labels, class_names, split)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{generate_arcade, ArcadeParams};

    #[test]
    fn round_trip_preserves_everything_at_f32() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.pmds");
        let params = ArcadeParams {
            samples_per_class: 3,
            ..ArcadeParams::default()
        };
        let data = generate_arcade(&params, Split::Test).unwrap();
        save_dataset(&data, &path).unwrap();
        let loaded = load_dataset(&path).unwrap();
        assert_eq!(loaded.len(), data.len());
        assert_eq!(loaded.labels(), data.labels());
        assert_eq!(loaded.class_names(), data.class_names());
        assert_eq!(loaded.split(), Split::Test);
        for (a, b) in data.images().iter().zip(loaded.images()) {
            for (&x, &y) in a.data().iter().zip(b.data().iter()) {
                assert_eq!(x as f32 as f64, y);
            }
        }
    }

    #[test]
    fn save_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let params = ArcadeParams {
            samples_per_class: 2,
            seed: 9,
            ..ArcadeParams::default()
        };
        let data = generate_arcade(&params, Split::Train).unwrap();
        let p1 = dir.path().join("a.pmds");
        let p2 = dir.path().join("b.pmds");
        save_dataset(&data, &p1).unwrap();
        save_dataset(&data, &p2).unwrap();
        assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
    }

    #[test]
    fn corrupt_magic_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.pmds");
        fs::write(&path, b"NOTMAGIC-and-some-garbage").unwrap();
        assert!(matches!(
            load_dataset(&path),
            Err(DataError::Container { .. })
        ));
    }
}
