//! Region waveforms: per-frame intensity averaged over a pixel set and the
//! three color channels.

use std::fs;
use std::io::Write;
use std::ops::Range;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame_io::FrameSequence;
use crate::labeling::{rasterize_region, LabelFile, MotionLabel, Pixel, PolygonError};

/// 10 s at 30 fps.
pub const DEFAULT_FEATURE_LENGTH: usize = 300;
pub const DEFAULT_WINDOW_SECS: f64 = 10.0;

#[derive(Debug, Error)]
pub enum WaveformError {
    #[error("region has no pixels")]
    EmptyRegion,
    #[error("pixel ({0}, {1}) outside {2}x{3} frame")]
    PixelOutOfBounds(u32, u32, u32, u32),
    #[error("frame range {start}..{end} invalid for {count} frames")]
    BadRange {
        start: usize,
        end: usize,
        count: usize,
    },
    #[error("waveform of {have} samples is shorter than the {want}-sample window")]
    TooShort { have: usize, want: usize },
    #[error("target length must be >= 2, got {0}")]
    BadLength(usize),
    #[error("waveform {index} has {got} samples, expected {want}")]
    Ragged {
        index: usize,
        got: usize,
        want: usize,
    },
    #[error("waveform {0} has no label")]
    Unlabeled(usize),
    #[error("nothing to export")]
    Empty,
    #[error("region `{id}`: {source}")]
    Region { id: String, source: PolygonError },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("dataset csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("dataset csv line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WaveformSource {
    pub subject_id: String,
    pub region_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waveform {
    pub samples: Vec<f64>,
    pub fps: f64,
    pub label: Option<MotionLabel>,
    pub source: WaveformSource,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, fps: f64) -> Self {
        Self {
            samples,
            fps,
            label: None,
            source: WaveformSource::default(),
        }
    }

    pub fn with_label(mut self, label: MotionLabel) -> Self {
        self.label = Some(label);
        self
    }

    pub fn with_source(mut self, subject_id: &str, region_id: &str) -> Self {
        self.source = WaveformSource {
            subject_id: subject_id.to_string(),
            region_id: region_id.to_string(),
        };
        self
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.fps
    }

    fn with_samples(&self, samples: Vec<f64>, fps: f64) -> Self {
        Self {
            samples,
            fps,
            label: self.label,
            source: self.source.clone(),
        }
    }
}

fn check_extract_args(
    seq: &FrameSequence,
    pixels: &[Pixel],
    frames: &Range<usize>,
) -> Result<(), WaveformError> {
    if pixels.is_empty() {
        return Err(WaveformError::EmptyRegion);
    }
    let (w, h) = seq.dims();
    if let Some(&(x, y)) = pixels.iter().find(|&&(x, y)| x >= w || y >= h) {
        return Err(WaveformError::PixelOutOfBounds(x, y, w, h));
    }
    if frames.start >= frames.end || frames.end > seq.count() || frames.len() < 2 {
        return Err(WaveformError::BadRange {
            start: frames.start,
            end: frames.end,
            count: seq.count(),
        });
    }
    Ok(())
}

/// Mean of R, G and B over `pixels`, one sample per frame in `frames`,
/// scaled to `[0, 1]`.
pub fn extract_waveform(
    seq: &FrameSequence,
    pixels: &[Pixel],
    frames: Range<usize>,
) -> Result<Waveform, WaveformError> {
    check_extract_args(seq, pixels, &frames)?;
    let denom = (pixels.len() * 3) as f64 * 255.0;
    let samples = seq.frames()[frames]
        .iter()
        .map(|f| {
            let sum: u64 = pixels
                .iter()
                .map(|&(x, y)| f.get_pixel(x, y).0.iter().map(|&v| v as u64).sum::<u64>())
                .sum();
            sum as f64 / denom
        })
        .collect();
    Ok(Waveform::new(samples, seq.fps()))
}

/// Separate R, G and B waveforms, for diagnostics.
pub fn extract_channel_waveforms(
    seq: &FrameSequence,
    pixels: &[Pixel],
    frames: Range<usize>,
) -> Result<[Waveform; 3], WaveformError> {
    check_extract_args(seq, pixels, &frames)?;
    let denom = pixels.len() as f64 * 255.0;
    let channel = |c: usize| {
        let samples = seq.frames()[frames.clone()]
            .iter()
            .map(|f| {
                let sum: u64 = pixels
                    .iter()
                    .map(|&(x, y)| f.get_pixel(x, y)[c] as u64)
                    .sum();
                sum as f64 / denom
            })
            .collect();
        Waveform::new(samples, seq.fps())
    };
    Ok([channel(0), channel(1), channel(2)])
}

/// One labeled waveform per region of `labels`.
pub fn extract_region_waveforms(
    seq: &FrameSequence,
    labels: &LabelFile,
    subject_id: &str,
) -> Result<Vec<Waveform>, WaveformError> {
    labels
        .regions
        .par_iter()
        .map(|region| {
            let pixels =
                rasterize_region(region, seq.dims()).map_err(|source| WaveformError::Region {
                    id: region.id.clone(),
                    source,
                })?;
            Ok(extract_waveform(seq, &pixels, region.frames(seq.count()))?
                .with_label(region.label)
                .with_source(subject_id, &region.id))
        })
        .collect()
}

/// Centered slice of `round(seconds * fps)` samples, starting at
/// `floor((len - window) / 2)`.
pub fn center_window(w: &Waveform, seconds: f64) -> Result<Waveform, WaveformError> {
    let want = (seconds * w.fps).round();
    if !(want.is_finite() && want >= 2.0) {
        return Err(WaveformError::BadLength(want.max(0.0) as usize));
    }
    let want = want as usize;
    if want > w.len() {
        return Err(WaveformError::TooShort {
            have: w.len(),
            want,
        });
    }
    let offset = (w.len() - want) / 2;
    Ok(w.with_samples(w.samples[offset..offset + want].to_vec(), w.fps))
}

/// Linear interpolation onto `n` evenly spaced positions spanning the
/// original support. The frame rate is rescaled so the duration is kept.
pub fn resample_to_length(w: &Waveform, n: usize) -> Result<Waveform, WaveformError> {
    if n < 2 {
        return Err(WaveformError::BadLength(n));
    }
    let len = w.len();
    if len < 2 {
        return Err(WaveformError::TooShort { have: len, want: 2 });
    }
    if n == len {
        return Ok(w.clone());
    }
    let span = (len - 1) as f64;
    let samples = (0..n)
        .map(|i| {
            let pos = (i as f64 * span) / (n - 1) as f64;
            let lo = pos.floor() as usize;
            if lo >= len - 1 {
                return w.samples[len - 1];
            }
            let (a, b) = (w.samples[lo], w.samples[lo + 1]);
            a + (b - a) * (pos - lo as f64)
        })
        .collect();
    let fps = w.fps * (n - 1) as f64 / span;
    Ok(w.with_samples(samples, fps))
}

/// Subtracts the sample mean.
pub fn remove_mean(w: &Waveform) -> Waveform {
    let mean = w.samples.iter().sum::<f64>() / w.len().max(1) as f64;
    w.with_samples(w.samples.iter().map(|v| v - mean).collect(), w.fps)
}

/// Writes `path` as a comma-separated grid (one row per waveform, one column
/// per sample), plus `<stem>.plot.csv` with a `time_s` column followed by one
/// column per waveform.
pub fn export_mesh(waveforms: &[Waveform], path: &Path) -> Result<PathBuf, WaveformError> {
    let first = waveforms.first().ok_or(WaveformError::Empty)?;
    let len = first.len();
    for (index, w) in waveforms.iter().enumerate() {
        if w.len() != len {
            return Err(WaveformError::Ragged {
                index,
                got: w.len(),
                want: len,
            });
        }
    }
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| WaveformError::Io { path, source }
    };

    let mut grid = String::new();
    for w in waveforms {
        let row: Vec<String> = w.samples.iter().map(|v| v.to_string()).collect();
        grid.push_str(&row.join(","));
        grid.push('\n');
    }
    fs::write(path, grid).map_err(io(path))?;

    let plot_path = path.with_extension("plot.csv");
    let mut plot = fs::File::create(&plot_path).map_err(io(&plot_path))?;
    let mut header = vec!["time_s".to_string()];
    header.extend(waveforms.iter().enumerate().map(|(i, w)| {
        if w.source.region_id.is_empty() {
            format!("w{i}")
        } else {
            format!("{}:{}", w.source.subject_id, w.source.region_id)
        }
    }));
    let mut text = header.join(",") + "\n";
    for t in 0..len {
        text.push_str(&(t as f64 / first.fps).to_string());
        for w in waveforms {
            text.push(',');
            text.push_str(&w.samples[t].to_string());
        }
        text.push('\n');
    }
    plot.write_all(text.as_bytes()).map_err(io(&plot_path))?;
    Ok(plot_path)
}

/// Reads a grid written by [`export_mesh`].
pub fn parse_mesh(path: &Path) -> Result<Vec<Vec<f64>>, WaveformError> {
    let text = fs::read_to_string(path).map_err(|source| WaveformError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            line.split(',')
                .map(|v| {
                    v.trim().parse::<f64>().map_err(|e| WaveformError::Parse {
                        line: i + 1,
                        message: e.to_string(),
                    })
                })
                .collect()
        })
        .collect()
}

/// Equal-length labeled waveforms, the classifier's input.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformDataset {
    items: Vec<Waveform>,
    feature_length: usize,
}

impl WaveformDataset {
    pub fn new(items: Vec<Waveform>) -> Result<Self, WaveformError> {
        let feature_length = items.first().map_or(0, |w| w.len());
        for (index, w) in items.iter().enumerate() {
            if w.len() != feature_length {
                return Err(WaveformError::Ragged {
                    index,
                    got: w.len(),
                    want: feature_length,
                });
            }
            if w.label.is_none() {
                return Err(WaveformError::Unlabeled(index));
            }
        }
        Ok(Self {
            items,
            feature_length,
        })
    }

    /// Windows each waveform to its central `window_secs` (skipped when
    /// `None`) and resamples it to `feature_length`.
    pub fn normalized(
        waveforms: &[Waveform],
        window_secs: Option<f64>,
        feature_length: usize,
    ) -> Result<Self, WaveformError> {
        let items = waveforms
            .iter()
            .map(|w| {
                let w = match window_secs {
                    Some(s) => center_window(w, s)?,
                    None => w.clone(),
                };
                resample_to_length(&w, feature_length)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(items)
    }

    pub fn items(&self) -> &[Waveform] {
        &self.items
    }

    pub fn into_items(self) -> Vec<Waveform> {
        self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn feature_length(&self) -> usize {
        self.feature_length
    }

    pub fn labels(&self) -> Vec<MotionLabel> {
        self.items
            .iter()
            .map(|w| w.label.expect("dataset items are labeled"))
            .collect()
    }

    /// Keeps the items at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            items: indices.iter().map(|&i| self.items[i].clone()).collect(),
            feature_length: self.feature_length,
        }
    }

    /// CSV rows: `subject_id,region_id,label,s0,...,s{n-1}` with a header.
    pub fn write_csv(&self, path: &Path) -> Result<(), WaveformError> {
        let mut out = csv::Writer::from_path(path)?;
        let mut header = vec!["subject_id".to_string(), "region_id".into(), "label".into()];
        header.extend((0..self.feature_length).map(|i| format!("s{i}")));
        out.write_record(&header)?;
        for w in &self.items {
            let mut row = vec![
                w.source.subject_id.clone(),
                w.source.region_id.clone(),
                w.label.expect("labeled").to_string(),
            ];
            row.extend(w.samples.iter().map(|v| v.to_string()));
            out.write_record(&row)?;
        }
        out.flush().map_err(|source| WaveformError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(())
    }

    /// Reads [`write_csv`](Self::write_csv) output. Frame rate is not stored
    /// in the dataset; `fps` is assigned to every item.
    pub fn read_csv(path: &Path, fps: f64) -> Result<Self, WaveformError> {
        let mut reader = csv::Reader::from_path(path)?;
        let mut items = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            let line = i + 2;
            let field = |k: usize| record.get(k).unwrap_or("");
            if record.len() < 5 {
                return Err(WaveformError::Parse {
                    line,
                    message: "expected subject_id,region_id,label and at least 2 samples".into(),
                });
            }
            let label = field(2)
                .parse::<MotionLabel>()
                .map_err(|e| WaveformError::Parse {
                    line,
                    message: e.to_string(),
                })?;
            let samples = record
                .iter()
                .skip(3)
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| WaveformError::Parse {
                            line,
                            message: format!("bad sample `{v}`"),
                        })
                })
                .collect::<Result<Vec<_>, _>>()?;
            items.push(
                Waveform::new(samples, fps)
                    .with_label(label)
                    .with_source(field(0), field(1)),
            );
        }
        Self::new(items)
    }
}
