//! Binary feature archive.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic      4 bytes  "VTK1"
//! count      u32      number of entries
//! entry*     utt_id_len u32, utt_id bytes (UTF-8),
//!            n_frames u32, dim u32, kind u8,
//!            frame_shift_ms f32, sample_rate u32,
//!            n_frames * dim f32, row-major
//! ```

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::dsp::{FeatureKind, FeatureMatrix};
use crate::fsutil::write_atomic;
use crate::{Error, Result};

pub const ARCHIVE_MAGIC: &[u8; 4] = b"VTK1";

/// Utterance-keyed feature matrices in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureArchive {
    entries: Vec<(String, FeatureMatrix)>,
    index: HashMap<String, usize>,
}

impl FeatureArchive {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an entry; a repeated id is an error.
    pub fn insert(&mut self, utt_id: impl Into<String>, feat: FeatureMatrix) -> Result<()> {
        let id = utt_id.into();
        if self.index.contains_key(&id) {
            return Err(Error::DuplicateUtterance(id));
        }
        self.index.insert(id.clone(), self.entries.len());
        self.entries.push((id, feat));
        Ok(())
    }

    pub fn get(&self, utt_id: &str) -> Option<&FeatureMatrix> {
        self.index.get(utt_id).map(|&i| &self.entries[i].1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &FeatureMatrix)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(ARCHIVE_MAGIC);
        out.extend_from_slice(&(self.entries.len() as u32).to_le_bytes());
        for (id, m) in &self.entries {
            out.extend_from_slice(&(id.len() as u32).to_le_bytes());
            out.extend_from_slice(id.as_bytes());
            out.extend_from_slice(&(m.n_frames() as u32).to_le_bytes());
            out.extend_from_slice(&(m.dim() as u32).to_le_bytes());
            out.push(m.kind.tag());
            out.extend_from_slice(&m.frame_shift_ms.to_le_bytes());
            out.extend_from_slice(&m.source_rate.to_le_bytes());
            for v in m.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 4 || &bytes[..3] != b"VTK" {
            return Err(Error::Archive("bad magic bytes".into()));
        }
        if bytes[3] != ARCHIVE_MAGIC[3] {
            return Err(Error::Archive(format!(
                "unknown format version `{}`",
                bytes[3] as char
            )));
        }
        let mut r = Reader { bytes, pos: 4 };
        let count = r.u32()?;
        let mut archive = Self::new();
        for _ in 0..count {
            let id_len = r.u32()? as usize;
            let id = std::str::from_utf8(r.take(id_len)?)
                .map_err(|_| Error::Archive("utt_id is not UTF-8".into()))?
                .to_string();
            let n_frames = r.u32()? as usize;
            let dim = r.u32()? as usize;
            let kind = FeatureKind::from_tag(r.take(1)?[0])
                .ok_or_else(|| Error::Archive(format!("unknown feature kind for `{id}`")))?;
            let shift = f32::from_le_bytes(r.take(4)?.try_into().unwrap());
            let rate = r.u32()?;
            let n = n_frames
                .checked_mul(dim)
                .ok_or_else(|| Error::Archive(format!("header size overflow for `{id}`")))?;
            let payload = r.take(n * 4).map_err(|_| {
                Error::Archive(format!(
                    "payload of `{id}` shorter than header {n_frames}x{dim}"
                ))
            })?;
            let data = payload
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                .collect();
            archive.insert(id, FeatureMatrix::new(data, n_frames, dim, kind, shift, rate)?)?;
        }
        if r.pos != bytes.len() {
            return Err(Error::Archive(format!(
                "{} trailing bytes after {count} entries",
                bytes.len() - r.pos
            )));
        }
        Ok(archive)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Archive("unexpected end of archive".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

pub fn write_feature_archive(archive: &FeatureArchive, path: &Path) -> Result<()> {
    write_atomic(path, &archive.encode())
}

pub fn read_feature_archive(path: &Path) -> Result<FeatureArchive> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    FeatureArchive::decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn matrix(n: usize, d: usize, seed: u32) -> FeatureMatrix {
        let data = (0..n * d)
            .map(|i| ((i as u32).wrapping_mul(2654435761).wrapping_add(seed) as f32).sin() * 30.0)
            .collect();
        FeatureMatrix::new(data, n, d, FeatureKind::LogMel, 10.0, 16000).unwrap()
    }

    #[test]
    fn single_entry_round_trip() {
        let mut a = FeatureArchive::new();
        a.insert("u1", matrix(98, 80, 1)).unwrap();
        let b = FeatureArchive::decode(&a.encode()).unwrap();
        assert_eq!(b.get("u1"), a.get("u1"));
        assert!(b.get("u2").is_none());
    }

    #[test]
    fn empty_archive_is_valid() {
        let a = FeatureArchive::new();
        let b = FeatureArchive::decode(&a.encode()).unwrap();
        assert!(b.is_empty());
    }

    #[test]
    fn corrupted_headers() {
        let mut a = FeatureArchive::new();
        a.insert("u1", matrix(3, 4, 1)).unwrap();
        let good = a.encode();

        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(FeatureArchive::decode(&bad).unwrap_err().to_string().contains("magic"));

        let mut v2 = good.clone();
        v2[3] = b'2';
        assert!(FeatureArchive::decode(&v2).unwrap_err().to_string().contains("version"));

        let short = &good[..good.len() - 4];
        assert!(FeatureArchive::decode(short).unwrap_err().to_string().contains("payload"));

        let mut long = good.clone();
        long.extend_from_slice(&[0, 0]);
        assert!(FeatureArchive::decode(&long).unwrap_err().to_string().contains("trailing"));
    }

    #[test]
    fn duplicate_insert_rejected() {
        let mut a = FeatureArchive::new();
        a.insert("u1", matrix(1, 1, 0)).unwrap();
        assert!(a.insert("u1", matrix(1, 1, 0)).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(
            entries in prop::collection::vec(
                ("[a-z0-9#.]{1,12}", 0usize..6, 1usize..5, prop::collection::vec(any::<f32>(), 30)),
                0..5,
            )
        ) {
            let mut a = FeatureArchive::new();
            for (id, n, d, vals) in entries {
                if a.get(&id).is_some() {
                    continue;
                }
                let data: Vec<f32> = vals.into_iter().cycle().take(n * d).collect();
                a.insert(id, FeatureMatrix::new(data, n, d, FeatureKind::Mfcc, 10.0, 16000).unwrap()).unwrap();
            }
            let bytes = a.encode();
            let b = FeatureArchive::decode(&bytes).unwrap();
            prop_assert_eq!(b.encode(), bytes);
            prop_assert_eq!(b.len(), a.len());
        }
    }
}
