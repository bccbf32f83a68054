//! Versioned binary checkpoint format:
//!
//! ```text
//! magic      8 bytes  "PHMORPH1"
//! desc_len   u32 LE   architecture descriptor text
//! desc       UTF-8
//! meta_len   u32 LE   key=value metadata lines
//! meta       UTF-8
//! n_params   u64 LE
//! params     n × f32 LE
//! checksum   32 bytes, SHA-256 of everything above
//! ```
//!
//! Parameters are stored at f32 precision; the in-memory model keeps them
//! on the same grid, so save → load reproduces parameters bitwise.

use super::{Arch, Classifier, NetError};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::Path;

const MAGIC: &[u8; 8] = b"PHMORPH1";

/// Training provenance carried inside a checkpoint.
#[derive(Debug, Clone, Default)]
pub struct CheckpointMeta {
    pub dataset: String,
    pub epochs: usize,
    pub final_accuracy: f64,
    pub class_names: Vec<String>,
}

impl CheckpointMeta {
    fn to_text(&self) -> String {
        format!(
            "dataset={}\nepochs={}\nfinal_accuracy={}\nclasses={}\n",
            self.dataset,
            self.epochs,
            self.final_accuracy,
            self.class_names.join(",")
        )
    }

    fn parse(text: &str) -> Result<CheckpointMeta, NetError> {
        let mut meta = CheckpointMeta::default();
        for line in text.lines() {
            let Some((key, value)) = line.split_once('=') else {
                continue;
            };
            match key {
                "dataset" => meta.dataset = value.to_string(),
                "epochs" => {
                    meta.epochs = value
                        .parse()
                        .map_err(|_| NetError::BadCheckpoint(format!("bad epochs '{value}'")))?
                }
                "final_accuracy" => {
                    meta.final_accuracy = value.parse().map_err(|_| {
                        NetError::BadCheckpoint(format!("bad final_accuracy '{value}'"))
                    })?
                }
                "classes" => {
                    meta.class_names = value.split(',').map(str::to_string).collect();
                }
                _ => {}
            }
        }
        Ok(meta)
    }
}

pub fn save_checkpoint(
    model: &Classifier,
    meta: &CheckpointMeta,
    path: &Path,
) -> Result<(), NetError> {
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    let desc = model.arch().descriptor();
    buf.extend_from_slice(&(desc.len() as u32).to_le_bytes());
    buf.extend_from_slice(desc.as_bytes());
    let meta_text = meta.to_text();
    buf.extend_from_slice(&(meta_text.len() as u32).to_le_bytes());
    buf.extend_from_slice(meta_text.as_bytes());
    let params = model.flat_params();
    buf.extend_from_slice(&(params.len() as u64).to_le_bytes());
    for p in &params {
        buf.extend_from_slice(&(*p as f32).to_le_bytes());
    }
    let checksum = Sha256::digest(&buf);
    buf.extend_from_slice(&checksum);
    fs::write(path, buf)?;
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    offset: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], NetError> {
        if self.offset + n > self.bytes.len() {
            return Err(NetError::Truncated {
                offset: self.bytes.len() as u64,
            });
        }
        let out = &self.bytes[self.offset..self.offset + n];
        self.offset += n;
        Ok(out)
    }

    fn u32_le(&mut self) -> Result<u32, NetError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64_le(&mut self) -> Result<u64, NetError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Load a checkpoint, optionally insisting on a specific architecture.
pub fn load_checkpoint(
    path: &Path,
    expected: Option<&Arch>,
) -> Result<(Classifier, CheckpointMeta), NetError> {
    let bytes = fs::read(path)?;
    if bytes.len() < MAGIC.len() + 32 {
        return Err(NetError::Truncated {
            offset: bytes.len() as u64,
        });
    }
    let (body, checksum) = bytes.split_at(bytes.len() - 32);
    let expected_sum = Sha256::digest(body);
    if expected_sum.as_slice() != checksum {
        return Err(NetError::BadCheckpoint("checksum mismatch".into()));
    }
    let mut r = Reader {
        bytes: body,
        offset: 0,
    };
    if r.take(8)? != MAGIC {
        return Err(NetError::BadCheckpoint(format!(
            "bad magic (expected {MAGIC:?})"
        )));
    }
    let desc_len = r.u32_le()? as usize;
    let desc = std::str::from_utf8(r.take(desc_len)?)
        .map_err(|_| NetError::BadCheckpoint("descriptor is not UTF-8".into()))?
        .to_string();
    let meta_len = r.u32_le()? as usize;
    let meta_text = std::str::from_utf8(r.take(meta_len)?)
        .map_err(|_| NetError::BadCheckpoint("metadata is not UTF-8".into()))?;
    let meta = CheckpointMeta::parse(meta_text)?;
    let n_params = r.u64_le()? as usize;
    let mut params = Vec::with_capacity(n_params);
    for _ in 0..n_params {
        let raw = r.take(4)?;
        params.push(f32::from_le_bytes(raw.try_into().unwrap()) as f64);
    }
    if r.offset != body.len() {
        return Err(NetError::BadCheckpoint(format!(
            "{} trailing bytes after parameter block",
            body.len() - r.offset
        )));
    }

    let arch = Arch::parse_descriptor(&desc)?;
    if let Some(want) = expected {
        if want.descriptor() != desc {
            return Err(NetError::ArchMismatch {
                expected: want.descriptor(),
                found: desc,
            });
        }
    }
    let mut model = Classifier::init(arch, 0)?;
    if model.param_count() != n_params {
        return Err(NetError::BadCheckpoint(format!(
            "descriptor '{desc}' implies {} parameters, file has {n_params}",
            model.param_count()
        )));
    }
    model.set_flat_params(&params)?;
    Ok((model, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{Arch, Classifier};

    fn meta() -> CheckpointMeta {
        CheckpointMeta {
            dataset: "toy".into(),
            epochs: 3,
            final_accuracy: 0.5,
            class_names: vec!["a".into(), "b".into()],
        }
    }

    #[test]
    fn round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.pmck");
        let model = Classifier::init(Arch::toy(1, 16, 2), 42).unwrap();
        save_checkpoint(&model, &meta(), &path).unwrap();
        let (loaded, m) = load_checkpoint(&path, None).unwrap();
        assert_eq!(model.flat_params(), loaded.flat_params());
        assert_eq!(m.class_names, vec!["a", "b"]);
        assert_eq!(m.epochs, 3);
        // Saving the loaded model reproduces the file byte for byte.
        let path2 = dir.path().join("model2.pmck");
        save_checkpoint(&loaded, &m, &path2).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }

    #[test]
    fn truncated_file_rejected_cleanly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.pmck");
        let model = Classifier::init(Arch::toy(1, 16, 2), 1).unwrap();
        save_checkpoint(&model, &meta(), &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let cut = bytes.len() / 2;
        std::fs::write(&path, &bytes[..cut]).unwrap();
        match load_checkpoint(&path, None) {
            Err(NetError::BadCheckpoint(_)) | Err(NetError::Truncated { .. }) => {}
            other => panic!("expected clean failure, got {other:?}"),
        }
    }

    #[test]
    fn architecture_mismatch_names_both() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.pmck");
        let model = Classifier::init(Arch::toy(1, 16, 2), 1).unwrap();
        save_checkpoint(&model, &meta(), &path).unwrap();
        let other = Arch::toy(1, 16, 5);
        match load_checkpoint(&path, Some(&other)) {
            Err(NetError::ArchMismatch { expected, found }) => {
                assert!(expected.contains("fc 5"));
                assert!(found.contains("fc 2"));
            }
            other => panic!("expected ArchMismatch, got {other:?}"),
        }
    }

    #[test]
    fn corrupted_byte_fails_checksum() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.pmck");
        let model = Classifier::init(Arch::toy(1, 16, 2), 1).unwrap();
        save_checkpoint(&model, &meta(), &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0xFF;
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            load_checkpoint(&path, None),
            Err(NetError::BadCheckpoint(_))
        ));
    }
}
