//! Frame sequences on disk: a JSON manifest plus one PNG per frame.
//!
//! Container video is never decoded here. Extract frames with an external
//! tool first, e.g.
//!
//! ```text
//! ffmpeg -i hand.mp4 -pix_fmt rgb24 frames/frame_%05d.png
//! ```
//!
//! and then write a manifest whose `frame_file_pattern` is
//! `frame_%05d.png`. Frame indices start at 0.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use image::RgbImage;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// File name used by [`write_sequence`] for the manifest.
pub const MANIFEST_FILE: &str = "manifest.json";

/// Frame file pattern used by [`write_sequence`].
pub const DEFAULT_FRAME_PATTERN: &str = "frame_%05d.png";

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("manifest {path}: {source}")]
    ManifestIo { path: PathBuf, source: io::Error },
    #[error("manifest {path}: {source}")]
    ManifestParse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("manifest field `{field}`: {message}")]
    InvalidManifest {
        field: &'static str,
        message: String,
    },
    #[error("frame {index}: missing file {path}")]
    MissingFrame { index: usize, path: PathBuf },
    #[error("frame {index}: cannot decode {path}: {source}")]
    Decode {
        index: usize,
        path: PathBuf,
        source: image::ImageError,
    },
    #[error("frame {index}: expected {expected_w}x{expected_h}, found {found_w}x{found_h}")]
    DimensionMismatch {
        index: usize,
        expected_w: u32,
        expected_h: u32,
        found_w: u32,
        found_h: u32,
    },
    #[error("a frame sequence needs at least 2 frames, got {0}")]
    TooFewFrames(usize),
    #[error("fps must be positive and finite, got {0}")]
    InvalidFps(f64),
    #[error("target dimensions must be non-zero, got {width}x{height}")]
    ZeroDimension { width: u32, height: u32 },
    #[error("bad frame file pattern `{0}`")]
    BadPattern(String),
    #[error("i/o error writing {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error("cannot encode {path}: {source}")]
    Encode {
        path: PathBuf,
        source: image::ImageError,
    },
}

/// Acquisition metadata stored next to the frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub subject_id: String,
    pub fps: f64,
    pub frame_file_pattern: String,
    pub frame_count: usize,
    #[serde(default)]
    pub notes: String,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self, FrameError> {
        let text = fs::read_to_string(path).map_err(|source| FrameError::ManifestIo {
            path: path.to_path_buf(),
            source,
        })?;
        let manifest: Manifest =
            serde_json::from_str(&text).map_err(|source| FrameError::ManifestParse {
                path: path.to_path_buf(),
                source,
            })?;
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn validate(&self) -> Result<(), FrameError> {
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(FrameError::InvalidManifest {
                field: "fps",
                message: format!("must be > 0, got {}", self.fps),
            });
        }
        if self.frame_count < 2 {
            return Err(FrameError::InvalidManifest {
                field: "frame_count",
                message: format!("must be >= 2, got {}", self.frame_count),
            });
        }
        // Fails early on unsupported conversions.
        format_frame_name(&self.frame_file_pattern, 0).map_err(|_| {
            FrameError::InvalidManifest {
                field: "frame_file_pattern",
                message: format!("unsupported pattern `{}`", self.frame_file_pattern),
            }
        })?;
        Ok(())
    }

    /// Path of frame `index`, relative to the directory holding the manifest.
    pub fn frame_path(&self, base: &Path, index: usize) -> Result<PathBuf, FrameError> {
        Ok(base.join(format_frame_name(&self.frame_file_pattern, index)?))
    }
}

/// Expands a printf-style pattern with a single integer conversion
/// (`%d`, `%5d`, `%05d`); `%%` is a literal percent sign.
pub fn format_frame_name(pattern: &str, index: usize) -> Result<String, FrameError> {
    let bad = || FrameError::BadPattern(pattern.to_string());
    let mut out = String::with_capacity(pattern.len() + 8);
    let mut chars = pattern.chars().peekable();
    let mut substituted = false;
    while let Some(c) = chars.next() {
        if c != '%' {
            out.push(c);
            continue;
        }
        if chars.peek() == Some(&'%') {
            chars.next();
            out.push('%');
            continue;
        }
        let zero = chars.peek() == Some(&'0');
        if zero {
            chars.next();
        }
        let mut width = String::new();
        while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
            width.push(*d);
            chars.next();
        }
        if chars.next() != Some('d') || substituted {
            return Err(bad());
        }
        let width: usize = if width.is_empty() {
            0
        } else {
            width.parse().map_err(|_| bad())?
        };
        if zero {
            out.push_str(&format!("{index:0width$}"));
        } else {
            out.push_str(&format!("{index:width$}"));
        }
        substituted = true;
    }
    if !substituted {
        return Err(bad());
    }
    Ok(out)
}

/// An ordered list of equally sized 8-bit RGB frames.
///
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    width: u32,
    height: u32,
    fps: f64,
    frames: Vec<RgbImage>,
}

impl FrameSequence {
    pub fn new(frames: Vec<RgbImage>, fps: f64) -> Result<Self, FrameError> {
        if !(fps.is_finite() && fps > 0.0) {
            return Err(FrameError::InvalidFps(fps));
        }
        if frames.len() < 2 {
            return Err(FrameError::TooFewFrames(frames.len()));
        }
        let (width, height) = frames[0].dimensions();
        for (index, frame) in frames.iter().enumerate() {
            let (w, h) = frame.dimensions();
            if (w, h) != (width, height) {
                return Err(FrameError::DimensionMismatch {
                    index,
                    expected_w: width,
                    expected_h: height,
                    found_w: w,
                    found_h: h,
                });
            }
        }
        if width == 0 || height == 0 {
            return Err(FrameError::ZeroDimension { width, height });
        }
        Ok(Self {
            width,
            height,
            fps,
            frames,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn count(&self) -> usize {
        self.frames.len()
    }

    pub fn duration_secs(&self) -> f64 {
        self.frames.len() as f64 / self.fps
    }

    pub fn frames(&self) -> &[RgbImage] {
        &self.frames
    }

    pub fn frame(&self, index: usize) -> Option<&RgbImage> {
        self.frames.get(index)
    }

    pub fn into_frames(self) -> Vec<RgbImage> {
        self.frames
    }
}

/// Loads the sequence described by the manifest at `manifest_path`.
pub fn load_sequence(manifest_path: &Path) -> Result<FrameSequence, FrameError> {
    load_sequence_with_manifest(manifest_path).map(|(_, seq)| seq)
}

/// Like [`load_sequence`], also returning the parsed manifest.
pub fn load_sequence_with_manifest(
    manifest_path: &Path,
) -> Result<(Manifest, FrameSequence), FrameError> {
    let manifest = Manifest::read(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let paths = (0..manifest.frame_count)
        .map(|i| manifest.frame_path(base, i))
        .collect::<Result<Vec<_>, _>>()?;
    for (index, path) in paths.iter().enumerate() {
        if !path.is_file() {
            return Err(FrameError::MissingFrame {
                index,
                path: path.clone(),
            });
        }
    }
    let frames = paths
        .par_iter()
        .enumerate()
        .map(|(index, path)| {
            image::open(path)
                .map(|img| img.into_rgb8())
                .map_err(|source| FrameError::Decode {
                    index,
                    path: path.clone(),
                    source,
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let seq = FrameSequence::new(frames, manifest.fps)?;
    Ok((manifest, seq))
}

/// Writes `seq` as PNG frames plus `manifest.json` into `out_dir`.
pub fn write_sequence(seq: &FrameSequence, out_dir: &Path) -> Result<Manifest, FrameError> {
    write_sequence_as(seq, out_dir, "", "")
}

pub fn write_sequence_as(
    seq: &FrameSequence,
    out_dir: &Path,
    subject_id: &str,
    notes: &str,
) -> Result<Manifest, FrameError> {
    fs::create_dir_all(out_dir).map_err(|source| FrameError::Write {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let manifest = Manifest {
        subject_id: subject_id.to_string(),
        fps: seq.fps,
        frame_file_pattern: DEFAULT_FRAME_PATTERN.to_string(),
        frame_count: seq.count(),
        notes: notes.to_string(),
    };
    seq.frames
        .par_iter()
        .enumerate()
        .try_for_each(|(index, frame)| {
            let path = manifest.frame_path(out_dir, index)?;
            frame
                .save_with_format(&path, image::ImageFormat::Png)
                .map_err(|source| FrameError::Encode { path, source })
        })?;
    let path = out_dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json).map_err(|source| FrameError::Write { path, source })?;
    Ok(manifest)
}

/// Smallest value `>= dim` divisible by `2^levels`.
pub fn padded_dim(dim: u32, levels: u32) -> u32 {
    let step = 1u32 << levels;
    dim.div_ceil(step) * step
}

/// Appends zero columns on the right and zero rows at the bottom so both
/// dimensions are divisible by `2^levels`. Original pixels keep their
/// coordinates.
pub fn pad_to_levels(seq: &FrameSequence, levels: u32) -> FrameSequence {
    let (w, h) = seq.dims();
    let (pw, ph) = (padded_dim(w, levels), padded_dim(h, levels));
    if (pw, ph) == (w, h) {
        return seq.clone();
    }
    let frames = seq
        .frames
        .par_iter()
        .map(|frame| {
            let mut out = RgbImage::new(pw, ph);
            image::imageops::replace(&mut out, frame, 0, 0);
            out
        })
        .collect();
    FrameSequence {
        width: pw,
        height: ph,
        fps: seq.fps,
        frames,
    }
}

/// Bilinear resampling of every frame to `width` x `height`.
///
/// Sample positions use pixel-center alignment, clamped at the borders, so
/// an identity resize is exact and corner pixels map onto corner pixels.
pub fn resize_to(
    seq: &FrameSequence,
    width: u32,
    height: u32,
) -> Result<FrameSequence, FrameError> {
    if width == 0 || height == 0 {
        return Err(FrameError::ZeroDimension { width, height });
    }
    let frames = seq
        .frames
        .par_iter()
        .map(|frame| resize_bilinear(frame, width, height))
        .collect();
    Ok(FrameSequence {
        width,
        height,
        fps: seq.fps,
        frames,
    })
}

struct Tap {
    lo: u32,
    hi: u32,
    frac: f32,
}

fn bilinear_taps(src: u32, dst: u32) -> Vec<Tap> {
    let scale = src as f32 / dst as f32;
    (0..dst)
        .map(|d| {
            let pos = ((d as f32 + 0.5) * scale - 0.5).clamp(0.0, (src - 1) as f32);
            let lo = pos.floor() as u32;
            let hi = (lo + 1).min(src - 1);
            Tap {
                lo,
                hi,
                frac: pos - lo as f32,
            }
        })
        .collect()
}

fn resize_bilinear(src: &RgbImage, width: u32, height: u32) -> RgbImage {
    if src.dimensions() == (width, height) {
        return src.clone();
    }
    let xs = bilinear_taps(src.width(), width);
    let ys = bilinear_taps(src.height(), height);
    let lerp = |a: f32, b: f32, t: f32| a + (b - a) * t;
    RgbImage::from_fn(width, height, |x, y| {
        let (tx, ty) = (&xs[x as usize], &ys[y as usize]);
        let p00 = src.get_pixel(tx.lo, ty.lo);
        let p10 = src.get_pixel(tx.hi, ty.lo);
        let p01 = src.get_pixel(tx.lo, ty.hi);
        let p11 = src.get_pixel(tx.hi, ty.hi);
        let mut out = [0u8; 3];
        for c in 0..3 {
            let top = lerp(p00[c] as f32, p10[c] as f32, tx.frac);
            let bottom = lerp(p01[c] as f32, p11[c] as f32, tx.frac);
            out[c] = lerp(top, bottom, ty.frac).round().clamp(0.0, 255.0) as u8;
        }
        image::Rgb(out)
    })
}
