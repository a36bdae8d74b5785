//! Spectral-flux onset envelope.
//!
//! Frames are centered on multiples of the hop and analysed with a Hann
//! window of `max(2 * hop, 2048)` samples. Windows that would cross either
//! end of the signal are shifted inside it instead of being zero padded, so
//! a steady signal produces identical spectra near the boundaries. The flux
//! at frame `i` is the half-wave-rectified magnitude increase over frame
//! `i - lag`, with `lag * hop >= window / 2`; the lag keeps transient onsets
//! localized at the frame whose center sits on them. Frame 0 is compared
//! against silence and frames closer than `lag` to the start against frame 0.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::motion::{normalize_unit_max, resample_linear, Resample};
use crate::speech::PcmAudio;

pub const MIN_WINDOW: usize = 2048;

/// Per-hop onset strength of a speech signal, normalized to unit max.
#[derive(Debug, Clone, PartialEq)]
pub struct RhythmCurve {
    pub values: Vec<f64>,
    pub hop_seconds: f64,
    pub duration_seconds: f64,
}

impl RhythmCurve {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The samples whose timestamps fall in `[start, end)`, re-normalized.
    /// At least two samples are returned when the curve has them.
    pub fn slice_seconds(&self, start: f64, end: f64) -> RhythmCurve {
        let n = self.values.len();
        let to_index = |t: f64| (((t / self.hop_seconds) - 1e-9).ceil().max(0.0) as usize).min(n);
        let mut a = to_index(start);
        let mut b = to_index(end).max(a);
        if b - a < 2 && n >= 2 {
            b = (a + 2).min(n);
            a = b.saturating_sub(2);
        }
        RhythmCurve {
            values: normalize_unit_max(&self.values[a..b]),
            hop_seconds: self.hop_seconds,
            duration_seconds: (b - a) as f64 * self.hop_seconds,
        }
    }
}

impl Resample for RhythmCurve {
    fn resample(&self, target_len: usize) -> Result<Self> {
        Ok(RhythmCurve {
            values: resample_linear(&self.values, target_len)?,
            hop_seconds: self.duration_seconds / target_len as f64,
            duration_seconds: self.duration_seconds,
        })
    }
}

struct Analyzer {
    window: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl Analyzer {
    fn new(size: usize) -> Self {
        let window = (0..size)
            .map(|n| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * n as f64 / size as f64).cos())
            .collect();
        Analyzer {
            window,
            fft: FftPlanner::new().plan_fft_forward(size),
        }
    }

    fn magnitude(&self, samples: &[f64], start: usize) -> Vec<f64> {
        let size = self.window.len();
        let mut buf: Vec<Complex<f64>> = (0..size)
            .map(|n| {
                let x = samples.get(start + n).copied().unwrap_or(0.0);
                Complex::new(x * self.window[n], 0.0)
            })
            .collect();
        self.fft.process(&mut buf);
        buf[..=size / 2].iter().map(|c| c.norm()).collect()
    }
}

pub fn onset_envelope(audio: &PcmAudio, hop_seconds: f64) -> Result<RhythmCurve> {
    if audio.channels != 1 {
        return Err(Error::Format(format!(
            "onset analysis needs mono audio, got {} channels",
            audio.channels
        )));
    }
    if audio.sample_rate < 8000 {
        return Err(Error::Value(format!("sample rate {} below 8000 Hz", audio.sample_rate)));
    }
    if !(0.01..=0.1).contains(&hop_seconds) {
        return Err(Error::Value(format!("hop {hop_seconds} s outside [0.01, 0.1]")));
    }

    let sr = audio.sample_rate as f64;
    let n = audio.samples.len();
    let duration = n as f64 / sr;
    let n_frames = ((n as f64 / (hop_seconds * sr)) - 1e-9).ceil().max(0.0) as usize;
    let hop = ((hop_seconds * sr).round() as usize).max(1);
    let size = (2 * hop).max(MIN_WINDOW);
    let lag = (size / 2).div_ceil(hop);

    let samples: Vec<f64> = audio.samples.iter().map(|&s| s as f64 / 32768.0).collect();
    let analyzer = Analyzer::new(size);
    let last_start = n.saturating_sub(size);
    let spectra: Vec<Vec<f64>> = (0..n_frames)
        .map(|i| {
            let start = (i * hop).saturating_sub(size / 2).min(last_start);
            analyzer.magnitude(&samples, start)
        })
        .collect();

    let silence = vec![0.0; size / 2 + 1];
    let flux: Vec<f64> = (0..n_frames)
        .map(|i| {
            let reference = if i == 0 {
                &silence
            } else {
                &spectra[i.saturating_sub(lag)]
            };
            spectra[i].iter().zip(reference).map(|(a, b)| (a - b).max(0.0)).sum()
        })
        .collect();

    Ok(RhythmCurve {
        values: normalize_unit_max(&flux),
        hop_seconds,
        duration_seconds: duration,
    })
}
