//! Motion heatmaps and the keypoint overlay video used for labeling.

use std::fs;
use std::path::Path;

use image::RgbImage;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame_io::{FrameError, FrameSequence};
use crate::pyramid::FloatImage;

/// Upper bound on points per frame (21 hand landmarks plus background).
pub const MAX_KEYPOINTS: usize = 22;

/// Confidence threshold applied when none is given.
pub const DEFAULT_MIN_CONFIDENCE: f64 = 0.1;

/// Marker radius at 1280x720.
const REFERENCE_RADIUS: f64 = 4.0;
const REFERENCE_DIAGONAL: f64 = 1468.6047800548555; // hypot(1280, 720)

pub const MARKER_COLOR: [f32; 3] = [1.0, 0.0, 0.0];

#[derive(Debug, Error)]
pub enum OverlayError {
    #[error("{what} mismatch: {left} vs {right}")]
    Mismatch {
        what: &'static str,
        left: String,
        right: String,
    },
    #[error(transparent)]
    Frames(#[from] FrameError),
}

#[derive(Debug, Error)]
pub enum TrackError {
    #[error("cannot read keypoint track {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed keypoint track: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("frame {frame_index}: {count} points exceeds the limit of {MAX_KEYPOINTS}")]
    TooManyPoints { frame_index: usize, count: usize },
    #[error("frame {frame_index} point {point}: confidence {value} outside [0, 1]")]
    Confidence {
        frame_index: usize,
        point: usize,
        value: f64,
    },
    #[error("frame {frame_index} point {point}: non-finite coordinate")]
    Coordinate { frame_index: usize, point: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    pub confidence: f64,
}

impl Keypoint {
    /// Points outside the frame are treated as absent detections.
    pub fn in_bounds(&self, width: u32, height: u32) -> bool {
        self.x >= 0.0 && self.y >= 0.0 && self.x < width as f64 && self.y < height as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeypointFrame {
    pub frame_index: usize,
    #[serde(default)]
    pub points: Vec<Keypoint>,
}

impl KeypointFrame {
    pub fn validate(&self) -> Result<(), TrackError> {
        if self.points.len() > MAX_KEYPOINTS {
            return Err(TrackError::TooManyPoints {
                frame_index: self.frame_index,
                count: self.points.len(),
            });
        }
        for (point, p) in self.points.iter().enumerate() {
            if !(0.0..=1.0).contains(&p.confidence) {
                return Err(TrackError::Confidence {
                    frame_index: self.frame_index,
                    point,
                    value: p.confidence,
                });
            }
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(TrackError::Coordinate {
                    frame_index: self.frame_index,
                    point,
                });
            }
        }
        Ok(())
    }

    /// Scales coordinates, e.g. from the original video to padded dims.
    pub fn rescaled(&self, sx: f64, sy: f64) -> Self {
        Self {
            frame_index: self.frame_index,
            points: self
                .points
                .iter()
                .map(|p| Keypoint {
                    x: p.x * sx,
                    y: p.y * sy,
                    confidence: p.confidence,
                })
                .collect(),
        }
    }
}

/// Reads a keypoint track: a JSON array of `{frame_index, points: [{x, y,
/// confidence}]}`. An empty file is an empty track.
pub fn load_keypoint_track(path: &Path) -> Result<Vec<KeypointFrame>, TrackError> {
    let text = fs::read_to_string(path).map_err(|source| TrackError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_keypoint_track(&text)
}

pub fn parse_keypoint_track(text: &str) -> Result<Vec<KeypointFrame>, TrackError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let track: Vec<KeypointFrame> = serde_json::from_str(text)?;
    for frame in &track {
        frame.validate()?;
    }
    Ok(track)
}

fn check_same_shape(a: &FrameSequence, b: &FrameSequence) -> Result<(), OverlayError> {
    let mismatch =
        |what, left: String, right: String| Err(OverlayError::Mismatch { what, left, right });
    if a.dims() != b.dims() {
        return mismatch(
            "dimension",
            format!("{:?}", a.dims()),
            format!("{:?}", b.dims()),
        );
    }
    if a.count() != b.count() {
        return mismatch("frame count", a.count().to_string(), b.count().to_string());
    }
    if (a.fps() - b.fps()).abs() > 1e-9 * a.fps() {
        return mismatch("fps", a.fps().to_string(), b.fps().to_string());
    }
    Ok(())
}

fn zip_frames(
    a: &FrameSequence,
    b: &FrameSequence,
    op: impl Fn(u8, u8) -> u8 + Sync,
) -> Result<FrameSequence, OverlayError> {
    check_same_shape(a, b)?;
    let frames = a
        .frames()
        .par_iter()
        .zip(b.frames())
        .map(|(fa, fb)| {
            let raw = fa
                .as_raw()
                .iter()
                .zip(fb.as_raw())
                .map(|(&x, &y)| op(x, y))
                .collect();
            RgbImage::from_raw(fa.width(), fa.height(), raw).expect("same dimensions")
        })
        .collect();
    Ok(FrameSequence::new(frames, a.fps())?)
}

/// Per-byte bitwise OR of time-aligned frames. Resize the original to the
/// magnified dimensions first.
pub fn heatmap(
    original: &FrameSequence,
    magnified: &FrameSequence,
) -> Result<FrameSequence, OverlayError> {
    zip_frames(original, magnified, |a, b| a | b)
}

/// Per-byte mean of two videos, rounding halves up.
pub fn average_overlap(
    heat: &FrameSequence,
    skeleton: &FrameSequence,
) -> Result<FrameSequence, OverlayError> {
    zip_frames(heat, skeleton, |a, b| (a as u16 + b as u16).div_ceil(2) as u8)
}

/// Marker radius in pixels for a frame of the given size.
pub fn marker_radius(width: u32, height: u32) -> f64 {
    let diag = (width as f64).hypot(height as f64);
    (REFERENCE_RADIUS * diag / REFERENCE_DIAGONAL).max(1.0)
}

/// Draws a filled circle for every keypoint at or above `min_confidence`.
pub fn render_keypoints(
    frame: &FloatImage,
    kps: &KeypointFrame,
    min_confidence: f64,
) -> FloatImage {
    let radius = marker_radius(frame.width() as u32, frame.height() as u32);
    render_keypoints_with(frame, kps, min_confidence, radius, MARKER_COLOR)
}

pub fn render_keypoints_with(
    frame: &FloatImage,
    kps: &KeypointFrame,
    min_confidence: f64,
    radius: f64,
    color: [f32; 3],
) -> FloatImage {
    let mut out = frame.clone();
    let (w, h) = frame.dims();
    for p in &kps.points {
        if p.confidence < min_confidence || !p.in_bounds(w as u32, h as u32) {
            continue;
        }
        let x0 = (p.x - radius).floor().max(0.0) as usize;
        let y0 = (p.y - radius).floor().max(0.0) as usize;
        let x1 = ((p.x + radius).ceil() as usize).min(w - 1);
        let y1 = ((p.y + radius).ceil() as usize).min(h - 1);
        for y in y0..=y1 {
            for x in x0..=x1 {
                let (dx, dy) = (x as f64 - p.x, y as f64 - p.y);
                if dx * dx + dy * dy <= radius * radius {
                    out.set_pixel(x, y, color);
                }
            }
        }
    }
    out
}

/// Draws the track onto every frame of `seq`. Track coordinates are scaled
/// by `scale` first; frames without an entry are left as they are.
pub fn render_track(
    seq: &FrameSequence,
    track: &[KeypointFrame],
    scale: (f64, f64),
    min_confidence: f64,
) -> FrameSequence {
    let mut by_frame: Vec<Option<KeypointFrame>> = vec![None; seq.count()];
    for kf in track {
        if let Some(slot) = by_frame.get_mut(kf.frame_index) {
            *slot = Some(kf.rescaled(scale.0, scale.1));
        }
    }
    let frames = seq
        .frames()
        .par_iter()
        .zip(by_frame)
        .map(|(frame, kps)| match kps {
            Some(kps) => {
                render_keypoints(&FloatImage::from_rgb(frame), &kps, min_confidence).to_rgb()
            }
            None => frame.clone(),
        })
        .collect();
    FrameSequence::new(frames, seq.fps()).expect("dimensions unchanged")
}
