//! Offline ideal temporal bandpass and band amplification.
//!
//! The bandpass is a mask over the DFT of the whole clip: bin `k` (and its
//! mirror `N - k`) survives when its frequency `k * fps / N` lies in
//! `[f_lo, f_hi)`. Signals that do not complete an integer number of periods
//! over the clip leak into neighbouring bins; that leakage is left alone.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FilterError {
    #[error("invalid band [{f_lo}, {f_hi}) Hz at {fps} fps: need 0 <= f_lo < f_hi <= fps/2")]
    InvalidBand { f_lo: f64, f_hi: f64, fps: f64 },
    #[error("a pixel series needs at least 2 samples, got {0}")]
    TooShort(usize),
    #[error("band was specified for {spec} fps but series runs at {series} fps")]
    FpsMismatch { spec: f64, series: f64 },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

/// Passband `[f_lo, f_hi)` in Hz for a clip sampled at `fps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBand", into = "RawBand")]
pub struct BandpassSpec {
    f_lo: f64,
    f_hi: f64,
    fps: f64,
}

#[derive(Serialize, Deserialize)]
struct RawBand {
    f_lo: f64,
    f_hi: f64,
    fps: f64,
}

impl TryFrom<RawBand> for BandpassSpec {
    type Error = FilterError;
    fn try_from(raw: RawBand) -> Result<Self, Self::Error> {
        BandpassSpec::new(raw.f_lo, raw.f_hi, raw.fps)
    }
}

impl From<BandpassSpec> for RawBand {
    fn from(b: BandpassSpec) -> Self {
        RawBand {
            f_lo: b.f_lo,
            f_hi: b.f_hi,
            fps: b.fps,
        }
    }
}

impl BandpassSpec {
    pub fn new(f_lo: f64, f_hi: f64, fps: f64) -> Result<Self, FilterError> {
        let ok = [f_lo, f_hi, fps].iter().all(|v| v.is_finite())
            && fps > 0.0
            && 0.0 <= f_lo
            && f_lo < f_hi
            && f_hi <= fps / 2.0;
        if !ok {
            return Err(FilterError::InvalidBand { f_lo, f_hi, fps });
        }
        Ok(Self { f_lo, f_hi, fps })
    }

    pub fn f_lo(&self) -> f64 {
        self.f_lo
    }

    pub fn f_hi(&self) -> f64 {
        self.f_hi
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    /// Same band re-targeted at another frame rate.
    pub fn with_fps(&self, fps: f64) -> Result<Self, FilterError> {
        Self::new(self.f_lo, self.f_hi, fps)
    }

    /// Whether DFT bin `k` of an `n`-sample clip is kept.
    pub fn keeps_bin(&self, k: usize, n: usize) -> bool {
        let folded = k.min(n - k) as f64;
        // Compare in bin units so that band edges which fall exactly on a bin
        // are not flipped by rounding in `k * fps / n`.
        let lo = self.f_lo * n as f64 / self.fps;
        let hi = self.f_hi * n as f64 / self.fps;
        const EPS: f64 = 1e-9;
        folded >= lo - EPS && folded < hi - EPS
    }
}

/// One pixel's samples over time.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelSeries {
    pub samples: Vec<f64>,
    pub fps: f64,
}

impl PixelSeries {
    pub fn new(samples: Vec<f64>, fps: f64) -> Result<Self, FilterError> {
        if samples.len() < 2 {
            return Err(FilterError::TooShort(samples.len()));
        }
        Ok(Self { samples, fps })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Reusable bandpass for series of one fixed length.
///
/// Cheap to share across threads; each caller supplies its own buffers via
/// [`BandpassFilter::scratch`].
#[derive(Clone)]
pub struct BandpassFilter {
    len: usize,
    mask: Vec<bool>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Per-thread working memory for [`BandpassFilter`].
pub struct FilterScratch {
    buf: Vec<Complex<f64>>,
    fft: Vec<Complex<f64>>,
}

impl BandpassFilter {
    pub fn new(spec: &BandpassSpec, len: usize) -> Result<Self, FilterError> {
        if len < 2 {
            return Err(FilterError::TooShort(len));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            len,
            mask: (0..len).map(|k| spec.keeps_bin(k, len)).collect(),
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// True if no bin survives, i.e. the output is always zero.
    pub fn passes_nothing(&self) -> bool {
        !self.mask.iter().any(|&m| m)
    }

    pub fn scratch(&self) -> FilterScratch {
        let scratch_len = self
            .forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len());
        FilterScratch {
            buf: vec![Complex::default(); self.len],
            fft: vec![Complex::default(); scratch_len],
        }
    }

    /// Filters `samples` in place. Panics if the length differs from the
    /// planned length.
    pub fn apply_in_place<T>(&self, samples: &mut [T], scratch: &mut FilterScratch)
    where
        T: Copy + Into<f64> + FromF64,
    {
        assert_eq!(samples.len(), self.len, "series length differs from plan");
        for (b, &s) in scratch.buf.iter_mut().zip(samples.iter()) {
            *b = Complex::new(s.into(), 0.0);
        }
        self.forward
            .process_with_scratch(&mut scratch.buf, &mut scratch.fft);
        for (b, &keep) in scratch.buf.iter_mut().zip(&self.mask) {
            if !keep {
                *b = Complex::default();
            }
        }
        self.inverse
            .process_with_scratch(&mut scratch.buf, &mut scratch.fft);
        let norm = 1.0 / self.len as f64;
        for (s, b) in samples.iter_mut().zip(&scratch.buf) {
            *s = T::from_f64(b.re * norm);
        }
    }
}

/// Narrowing conversion used when writing filtered samples back.
pub trait FromF64 {
    fn from_f64(v: f64) -> Self;
}

impl FromF64 for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
}

impl FromF64 for f32 {
    fn from_f64(v: f64) -> Self {
        v as f32
    }
}

pub fn ideal_bandpass(
    series: &PixelSeries,
    spec: &BandpassSpec,
) -> Result<PixelSeries, FilterError> {
    if series.len() < 2 {
        return Err(FilterError::TooShort(series.len()));
    }
    if (series.fps - spec.fps).abs() > 1e-9 * spec.fps {
        return Err(FilterError::FpsMismatch {
            spec: spec.fps,
            series: series.fps,
        });
    }
    let filter = BandpassFilter::new(spec, series.len())?;
    let mut samples = series.samples.clone();
    filter.apply_in_place(&mut samples, &mut filter.scratch());
    Ok(PixelSeries {
        samples,
        fps: series.fps,
    })
}

/// `original + alpha * band`, sample by sample.
pub fn amplify_band(
    original: &PixelSeries,
    band: &PixelSeries,
    alpha: f64,
) -> Result<PixelSeries, FilterError> {
    if original.len() != band.len() {
        return Err(FilterError::LengthMismatch(original.len(), band.len()));
    }
    let samples = original
        .samples
        .iter()
        .zip(&band.samples)
        .map(|(o, b)| o + alpha * b)
        .collect();
    Ok(PixelSeries {
        samples,
        fps: original.fps,
    })
}
