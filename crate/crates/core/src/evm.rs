//! Eulerian video magnification.
//!
//! Every frame is padded and decomposed into a Laplacian pyramid. The time
//! series of each sample of each pyramid level is bandpassed over the whole
//! clip, scaled by `alpha` (times an optional per-level gain) and added back.
//! The pyramids are then collapsed and clamped to 8 bits. Nothing is clamped
//! before the final conversion.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame_io::{pad_to_levels, FrameError, FrameSequence};
use crate::pyramid::{build_laplacian, collapse, FloatImage, Kernel5, PyramidError};
use crate::temporal_filter::{BandpassFilter, BandpassSpec, FilterError};

pub const DEFAULT_LEVELS: usize = 3;

#[derive(Debug, Error)]
pub enum MagnifyError {
    #[error("alpha must be finite and >= 0, got {0}")]
    InvalidAlpha(f64),
    #[error("num_levels must be >= 1")]
    NoLevels,
    #[error("per-level gain has {got} entries, expected num_levels + 1 = {want}")]
    GainLength { got: usize, want: usize },
    #[error("per-level gains must be finite")]
    NonFiniteGain,
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Pyramid(#[from] PyramidError),
    #[error(transparent)]
    Frames(#[from] FrameError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagnifyConfig {
    pub alpha: f64,
    pub num_levels: usize,
    pub band: BandpassSpec,
    /// One multiplier per band plus one for the residual.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_level_gain: Option<Vec<f64>>,
}

impl MagnifyConfig {
    pub fn new(alpha: f64, num_levels: usize, band: BandpassSpec) -> Self {
        Self {
            alpha,
            num_levels,
            band,
            per_level_gain: None,
        }
    }

    pub fn validate(&self) -> Result<(), MagnifyError> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(MagnifyError::InvalidAlpha(self.alpha));
        }
        if self.num_levels == 0 {
            return Err(MagnifyError::NoLevels);
        }
        if let Some(gains) = &self.per_level_gain {
            if gains.len() != self.num_levels + 1 {
                return Err(MagnifyError::GainLength {
                    got: gains.len(),
                    want: self.num_levels + 1,
                });
            }
            if gains.iter().any(|g| !g.is_finite()) {
                return Err(MagnifyError::NonFiniteGain);
            }
        }
        Ok(())
    }

    /// Effective multiplier of the bandpassed signal at level `l`.
    pub fn level_gain(&self, l: usize) -> f64 {
        let extra = self.per_level_gain.as_ref().map_or(1.0, |g| g[l]);
        self.alpha * extra
    }
}

pub fn magnify(seq: &FrameSequence, cfg: &MagnifyConfig) -> Result<FrameSequence, MagnifyError> {
    magnify_with_kernel(seq, cfg, &Kernel5::binomial())
}

pub fn magnify_with_kernel(
    seq: &FrameSequence,
    cfg: &MagnifyConfig,
    kernel: &Kernel5,
) -> Result<FrameSequence, MagnifyError> {
    cfg.validate()?;
    let band = cfg.band.with_fps(seq.fps())?;
    let padded = pad_to_levels(seq, cfg.num_levels as u32);
    let frame_count = padded.count();

    let mut pyramids = padded
        .frames()
        .par_iter()
        .map(|f| build_laplacian(&FloatImage::from_rgb(f), cfg.num_levels, kernel))
        .collect::<Result<Vec<_>, _>>()?;

    let filter = BandpassFilter::new(&band, frame_count)?;
    if !filter.passes_nothing() {
        for level in 0..=cfg.num_levels {
            let gain = cfg.level_gain(level);
            if gain == 0.0 {
                continue;
            }
            amplify_level(&mut pyramids, level, gain as f32, &filter);
        }
    }

    let frames = pyramids
        .par_iter()
        .map(|p| collapse(p, kernel).map(|img| img.to_rgb()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FrameSequence::new(frames, padded.fps())?)
}

/// Adds `gain * bandpass(series)` to every sample series of one level.
fn amplify_level(
    pyramids: &mut [crate::pyramid::LaplacianPyramid],
    level: usize,
    gain: f32,
    filter: &BandpassFilter,
) {
    let frames = pyramids.len();
    let samples = pyramids[0].level(level).data().len();

    // Sample-major layout: one contiguous time series per sample.
    let mut series = vec![0.0f32; samples * frames];
    for (t, pyr) in pyramids.iter().enumerate() {
        for (s, &v) in pyr.level(level).data().iter().enumerate() {
            series[s * frames + t] = v;
        }
    }

    series.par_chunks_mut(frames).for_each_init(
        || filter.scratch(),
        |scratch, chunk| {
            filter.apply_in_place(chunk, scratch);
            for v in chunk.iter_mut() {
                *v *= gain;
            }
        },
    );

    pyramids.par_iter_mut().enumerate().for_each(|(t, pyr)| {
        let data = pyr.level_mut(level).data_mut();
        for (s, v) in data.iter_mut().enumerate() {
            *v += series[s * frames + t];
        }
    });
}
