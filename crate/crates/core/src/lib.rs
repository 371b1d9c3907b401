//! Micro-motion analysis for smartphone videos of hands.
//!
//! The crate covers the whole offline pipeline:
//!
//! 1. [`frame_io`] loads PNG frame sequences described by a JSON manifest,
//!    pads them so that every pyramid level halves cleanly, and writes them
//!    back out.
//! 2. [`pyramid`] and [`temporal_filter`] are the spatial and temporal halves
//!    of Eulerian video magnification; [`evm`] chains them into
//!    [`evm::magnify`].
//! 3. [`heatmap`] builds the bitwise-OR motion heatmap and the keypoint
//!    overlay video that a human labels.
//! 4. [`labeling`] validates polygon label files and rasterizes regions.
//! 5. [`waveform`] turns labeled regions into averaged intensity waveforms.
//! 6. [`knn`] classifies the waveforms into the four [`MotionLabel`]
//!    categories.

pub mod evm;
pub mod frame_io;
pub mod heatmap;
pub mod knn;
pub mod labeling;
pub mod pyramid;
pub mod temporal_filter;
pub mod waveform;

pub use evm::{magnify, MagnifyConfig};
pub use frame_io::{FrameSequence, Manifest};
pub use knn::{ConfusionMatrix, KnnModel, SplitSpec};
pub use labeling::{LabelFile, MotionLabel, RegionLabel};
pub use pyramid::{FloatImage, GaussianPyramid, Kernel5, LaplacianPyramid};
pub use temporal_filter::{BandpassSpec, PixelSeries};
pub use waveform::{Waveform, WaveformDataset};
