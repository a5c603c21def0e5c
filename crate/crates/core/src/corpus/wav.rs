//! RIFF/WAVE PCM16 mono.

use std::fs;
use std::path::Path;

use crate::dsp::Waveform;
use crate::fsutil::write_atomic;
use crate::{Error, Result};

const PCM_FORMAT: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WavWriteReport {
    /// Samples outside the PCM16 range that were clipped.
    pub clip_count: usize,
}

pub fn read_wav(path: &Path) -> Result<Waveform> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_wav(&bytes).map_err(|e| match e {
        Error::Wav(msg) => Error::Wav(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

pub fn decode_wav(bytes: &[u8]) -> Result<Waveform> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::Wav("not a RIFF/WAVE file".into()));
    }
    let mut pos = 12;
    let mut format: Option<(u16, u16, u32, u16)> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let body = pos + 8;
        if id == b"fmt " {
            if size < 16 || body + 16 > bytes.len() {
                return Err(Error::Wav("truncated fmt chunk".into()));
            }
            format = Some((
                u16_at(bytes, body),
                u16_at(bytes, body + 2),
                u32_at(bytes, body + 4),
                u16_at(bytes, body + 14),
            ));
        } else if id == b"data" {
            let (tag, channels, rate, bits) =
                format.ok_or_else(|| Error::Wav("data chunk before fmt chunk".into()))?;
            if tag != PCM_FORMAT {
                return Err(Error::Wav(format!("unsupported codec tag {tag}, need PCM (1)")));
            }
            if channels != 1 {
                return Err(Error::Wav(format!("unsupported channel count {channels}, need mono")));
            }
            if bits != 16 {
                return Err(Error::Wav(format!("unsupported bit depth {bits}, need 16")));
            }
            if body + size > bytes.len() {
                return Err(Error::Wav(format!(
                    "truncated data chunk: header declares {size} bytes, {} present",
                    bytes.len() - body
                )));
            }
            if size % 2 != 0 {
                return Err(Error::Wav("odd data length for 16-bit samples".into()));
            }
            let samples = bytes[body..body + size]
                .chunks_exact(2)
                .map(|c| i16::from_le_bytes([c[0], c[1]]) as f32 / 32768.0)
                .collect();
            return Waveform::new(samples, rate)
                .map_err(|_| Error::Wav("zero sample rate".into()));
        }
        pos = body + size + (size & 1);
    }
    Err(Error::Wav("missing data chunk".into()))
}

/// Encodes to PCM16, clipping samples outside `[-1, 1)`.
pub fn encode_wav(wave: &Waveform) -> (Vec<u8>, WavWriteReport) {
    let data_len = wave.samples.len() * 2;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVEfmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&PCM_FORMAT.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&wave.sample_rate.to_le_bytes());
    out.extend_from_slice(&(wave.sample_rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    let mut clip_count = 0;
    for &s in &wave.samples {
        let scaled = (s as f64 * 32768.0).round();
        let q = if scaled > i16::MAX as f64 {
            clip_count += 1;
            i16::MAX
        } else if scaled < i16::MIN as f64 {
            clip_count += 1;
            i16::MIN
        } else {
            scaled as i16
        };
        out.extend_from_slice(&q.to_le_bytes());
    }
    (out, WavWriteReport { clip_count })
}

pub fn write_wav(wave: &Waveform, path: &Path) -> Result<WavWriteReport> {
    if wave.sample_rate == 0 {
        return Err(Error::InvalidArgument("sample rate must be positive".into()));
    }
    if wave.samples.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidArgument("non-finite samples".into()));
    }
    let (bytes, report) = encode_wav(wave);
    write_atomic(path, &bytes)?;
    if report.clip_count > 0 {
        log::warn!("{}: clipped {} samples", path.display(), report.clip_count);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wave(samples: Vec<f32>) -> Waveform {
        Waveform::new(samples, 16000).unwrap()
    }

    #[test]
    fn sine_round_trip_within_quantization() {
        let w = wave(
            (0..16000)
                .map(|i| (0.8 * (2.0 * std::f64::consts::PI * 440.0 * i as f64 / 16000.0).sin()) as f32)
                .collect(),
        );
        let (bytes, rep) = encode_wav(&w);
        assert_eq!(rep.clip_count, 0);
        let back = decode_wav(&bytes).unwrap();
        assert_eq!(back.len(), 16000);
        assert_eq!(back.sample_rate, 16000);
        let max_err = w
            .samples
            .iter()
            .zip(&back.samples)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f32, f32::max);
        assert!(max_err <= 2f32.powi(-15));
    }

    #[test]
    fn zeros_and_full_scale() {
        let (bytes, _) = encode_wav(&wave(vec![0.0; 10]));
        assert!(bytes[44..].iter().all(|&b| b == 0));
        let mut raw = bytes.clone();
        raw[44..46].copy_from_slice(&32767i16.to_le_bytes());
        let w = decode_wav(&raw).unwrap();
        assert!((w.samples[0] - 32767.0 / 32768.0).abs() < 1e-9);
    }

    #[test]
    fn clipping_is_counted() {
        let (bytes, rep) = encode_wav(&wave(vec![1.5, -0.25, -3.0, 0.5]));
        assert_eq!(rep.clip_count, 2);
        let w = decode_wav(&bytes).unwrap();
        assert_eq!(w.samples[0], 32767.0 / 32768.0);
        assert_eq!(w.samples[2], -1.0);
    }

    fn with_fmt(tag: u16, channels: u16, bits: u16) -> Vec<u8> {
        let (mut bytes, _) = encode_wav(&wave(vec![0.1; 8]));
        bytes[20..22].copy_from_slice(&tag.to_le_bytes());
        bytes[22..24].copy_from_slice(&channels.to_le_bytes());
        bytes[34..36].copy_from_slice(&bits.to_le_bytes());
        bytes
    }

    #[test]
    fn unsupported_inputs() {
        let err = decode_wav(&with_fmt(1, 2, 16)).unwrap_err().to_string();
        assert!(err.contains("channel count 2"), "{err}");
        let err = decode_wav(&with_fmt(3, 1, 16)).unwrap_err().to_string();
        assert!(err.contains("codec"), "{err}");
        assert!(decode_wav(&with_fmt(1, 1, 24)).is_err());
        assert!(decode_wav(b"RIFX0000WAVE").is_err());
        let (bytes, _) = encode_wav(&wave(vec![0.1; 100]));
        let err = decode_wav(&bytes[..100]).unwrap_err().to_string();
        assert!(err.contains("truncated"), "{err}");
    }

    #[test]
    fn skips_unknown_chunks() {
        let (bytes, _) = encode_wav(&wave(vec![0.25; 4]));
        let mut with_list = bytes[..36].to_vec();
        with_list.extend_from_slice(b"LIST");
        with_list.extend_from_slice(&3u32.to_le_bytes());
        with_list.extend_from_slice(&[1, 2, 3, 0]);
        with_list.extend_from_slice(&bytes[36..]);
        assert_eq!(decode_wav(&with_list).unwrap().samples, vec![0.25; 4]);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.wav");
        let w = wave(vec![0.5, -0.5, 0.0]);
        write_wav(&w, &path).unwrap();
        assert_eq!(read_wav(&path).unwrap(), w);
        assert!(write_wav(&w, &dir.path().join("missing/x.wav")).is_err());
    }
}
