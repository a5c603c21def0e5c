//! Speech-side tooling for measuring and reducing ASR bias against diverse
//! speaker groups.
//!
//! The crate covers everything below the recognizer itself:
//!
//! * [`corpus`]: manifests, PCM16 WAV I/O and binary feature archives.
//! * [`dsp`]: speed perturbation, STFT framing, VTLN-warped mel filterbanks,
//!   log-mel and MFCC extraction, and a formant synthesizer for oracle tests.
//! * [`specaug`]: time warping, frequency masking and time masking.
//! * [`vtln`]: diagonal GMM training, per-warp affine transforms and
//!   likelihood grid search over warp factors.
//! * [`scoring`]: Levenshtein alignment, WER/CER and group bias measures.
//! * [`report`]: SVG plots and shaded tables.
//! * [`config`]: the pipeline configuration file.

pub mod config;
pub mod corpus;
pub mod dsp;
mod error;
pub mod fsutil;
pub mod report;
pub mod scoring;
pub mod specaug;
pub mod vtln;

pub use error::{Error, ErrorKind, Result};
