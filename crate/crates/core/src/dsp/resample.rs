//! Speed perturbation by band-limited resampling.

use std::f64::consts::PI;

use super::{SpeedFactor, Waveform};
use crate::Result;

/// Zero crossings of the sinc kernel on each side of the centre tap.
const ZERO_CROSSINGS: usize = 16;
/// Largest phase count of the polyphase table.
const MAX_PHASES: u64 = 1000;

/// Produces `s(beta * t)` relabelled at the original sample rate.
///
/// The output holds `round(N / beta)` samples; a tone at `f` Hz comes out at
/// `beta * f` Hz. `beta == 1` returns the input unchanged.
pub fn speed_perturb(wave: &Waveform, beta: SpeedFactor) -> Result<Waveform> {
    let beta = beta.get();
    if beta == 1.0 || wave.is_empty() {
        return Ok(wave.clone());
    }
    let n_out = (wave.len() as f64 / beta).round() as usize;
    let (num, den) = rational_approx(beta, MAX_PHASES);
    let bank = PolyphaseBank::new(den, beta);

    let x = &wave.samples;
    let n_in = x.len() as i64;
    let mut out = Vec::with_capacity(n_out);
    for j in 0..n_out as u64 {
        let pos = j * num;
        let base = (pos / den) as i64;
        let taps = bank.phase((pos % den) as usize);
        let first = base - bank.half as i64 + 1;
        let mut acc = 0.0f64;
        for (m, &h) in taps.iter().enumerate() {
            let k = first + m as i64;
            if (0..n_in).contains(&k) {
                acc += h * x[k as usize] as f64;
            }
        }
        out.push(acc as f32);
    }
    Waveform::new(out, wave.sample_rate)
}

/// Hann-windowed sinc taps for each fractional input position `phase / den`.
struct PolyphaseBank {
    half: usize,
    taps: Vec<f64>,
}

impl PolyphaseBank {
    fn new(den: u64, beta: f64) -> Self {
        // Shrinking the time axis (beta > 1) pushes content up by beta, so
        // the band is limited to nyquist / beta first.
        let cutoff = (1.0 / beta).min(1.0);
        let support = ZERO_CROSSINGS as f64 / cutoff;
        let half = support.ceil() as usize;
        let width = 2 * half;
        let mut taps = Vec::with_capacity(den as usize * width);
        for phase in 0..den {
            let frac = phase as f64 / den as f64;
            for m in 0..width {
                // Tap m multiplies x[base - half + 1 + m].
                let u = frac + half as f64 - 1.0 - m as f64;
                taps.push(kernel(u, cutoff, support));
            }
        }
        Self { half, taps }
    }

    fn phase(&self, phase: usize) -> &[f64] {
        let width = 2 * self.half;
        &self.taps[phase * width..(phase + 1) * width]
    }
}

fn kernel(u: f64, cutoff: f64, support: f64) -> f64 {
    if u.abs() >= support {
        return 0.0;
    }
    let x = cutoff * u;
    let sinc = if x == 0.0 { 1.0 } else { (PI * x).sin() / (PI * x) };
    let window = 0.5 + 0.5 * (PI * u / support).cos();
    cutoff * sinc * window
}

/// Best rational approximation `num / den` of `x` with `den <= max_den`.
fn rational_approx(x: f64, max_den: u64) -> (u64, u64) {
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut rem = x;
    loop {
        let a = rem.floor();
        let a_int = a as u64;
        let h2 = a_int * h1 + h0;
        let k2 = a_int * k1 + k0;
        if k2 > max_den {
            break;
        }
        (h0, h1) = (h1, h2);
        (k0, k1) = (k1, k2);
        let frac = rem - a;
        if frac < 1e-12 || ((h1 as f64 / k1 as f64) - x).abs() < 1e-15 {
            break;
        }
        rem = 1.0 / frac;
    }
    (h1, k1)
}
