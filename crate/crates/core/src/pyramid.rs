//! Gaussian and Laplacian image pyramids (Burt & Adelson REDUCE / EXPAND).
//!
//! Images are three-channel, interleaved `f32`. Borders use reflect-101
//! indexing (`-1 -> 1`, `n -> n - 2`). All dimensions must halve exactly at
//! every level; pad frames first with [`crate::frame_io::pad_to_levels`].

use image::RgbImage;
use thiserror::Error;

pub const CHANNELS: usize = 3;

#[derive(Debug, Error, PartialEq)]
pub enum PyramidError {
    #[error("reduce needs even dimensions, got {width}x{height}")]
    OddDimension { width: usize, height: usize },
    #[error("expand target {target_w}x{target_h} is not double {width}x{height}")]
    NotDouble {
        width: usize,
        height: usize,
        target_w: usize,
        target_h: usize,
    },
    #[error("{width}x{height} is not divisible by 2^{levels}")]
    InsufficientDivisibility {
        width: usize,
        height: usize,
        levels: usize,
    },
    #[error("pyramid level {level} does not halve level {parent}")]
    BrokenChain { level: usize, parent: usize },
    #[error("kernel taps must be symmetric and sum to 1, got {0:?}")]
    BadKernel([f32; 5]),
}

/// Interleaved RGB float image.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatImage {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl FloatImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn filled(width: usize, height: usize, value: f32) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height * CHANNELS],
        }
    }

    /// Returns `None` unless `data.len() == width * height * 3`.
    pub fn from_vec(width: usize, height: usize, data: Vec<f32>) -> Option<Self> {
        (data.len() == width * height * CHANNELS).then_some(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Self {
        let mut data = Vec::with_capacity(width * height * CHANNELS);
        for y in 0..height {
            for x in 0..width {
                for c in 0..CHANNELS {
                    data.push(f(x, y, c));
                }
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    /// Converts 8-bit samples to `[0, 1]`.
    pub fn from_rgb(img: &RgbImage) -> Self {
        Self {
            width: img.width() as usize,
            height: img.height() as usize,
            data: img.as_raw().iter().map(|&v| v as f32 / 255.0).collect(),
        }
    }

    /// Clamps to `[0, 1]` and rounds to the nearest 8-bit step.
    pub fn to_rgb(&self) -> RgbImage {
        let raw = self
            .data
            .iter()
            .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect();
        RgbImage::from_raw(self.width as u32, self.height as u32, raw)
            .expect("buffer length matches dimensions")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f32 {
        self.data[(y * self.width + x) * CHANNELS + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: f32) {
        self.data[(y * self.width + x) * CHANNELS + c] = v;
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [f32; 3]) {
        let i = (y * self.width + x) * CHANNELS;
        self.data[i..i + CHANNELS].copy_from_slice(&rgb);
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f32; 3] {
        let i = (y * self.width + x) * CHANNELS;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn max_abs_diff(&self, other: &FloatImage) -> f32 {
        assert_eq!(self.dims(), other.dims());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f32::max)
    }

    fn sub_assign(&mut self, other: &FloatImage) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
    }

    fn add_assign(&mut self, other: &FloatImage) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }
}

impl From<&FloatImage> for RgbImage {
    fn from(img: &FloatImage) -> Self {
        img.to_rgb()
    }
}

/// Separable 5x5 smoothing kernel, `w(m, n) = taps[m + 2] * taps[n + 2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel5 {
    taps: [f32; 5],
}

impl Kernel5 {
    /// `[1, 4, 6, 4, 1] / 16`. Every tap is a dyadic fraction, so the
    /// normalization holds exactly in floating point.
    pub const fn binomial() -> Self {
        Self {
            taps: [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0],
        }
    }

    pub fn from_taps(taps: [f32; 5]) -> Result<Self, PyramidError> {
        let sum: f32 = taps.iter().sum();
        let symmetric = taps[0] == taps[4] && taps[1] == taps[3];
        if !symmetric || (sum - 1.0).abs() > 1e-6 {
            return Err(PyramidError::BadKernel(taps));
        }
        Ok(Self { taps })
    }

    pub fn taps(&self) -> [f32; 5] {
        self.taps
    }

    /// Weight at offset `(m, n)` with `m, n` in `-2..=2`.
    pub fn weight(&self, m: i32, n: i32) -> f32 {
        self.taps[(m + 2) as usize] * self.taps[(n + 2) as usize]
    }

    pub fn weights(&self) -> [[f32; 5]; 5] {
        let mut grid = [[0.0; 5]; 5];
        for (r, row) in grid.iter_mut().enumerate() {
            for (c, w) in row.iter_mut().enumerate() {
                *w = self.taps[r] * self.taps[c];
            }
        }
        grid
    }
}

impl Default for Kernel5 {
    fn default() -> Self {
        Self::binomial()
    }
}

/// Reflect-101 index into `0..n`.
#[inline]
pub fn reflect101(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let r = i.rem_euclid(period);
    if r >= n as isize {
        (period - r) as usize
    } else {
        r as usize
    }
}

/// Blur and subsample by two in each dimension.
pub fn reduce(img: &FloatImage, kernel: &Kernel5) -> Result<FloatImage, PyramidError> {
    let (w, h) = img.dims();
    if w % 2 != 0 || h % 2 != 0 || w == 0 || h == 0 {
        return Err(PyramidError::OddDimension {
            width: w,
            height: h,
        });
    }
    let (ow, oh) = (w / 2, h / 2);
    let taps = kernel.taps;

    // Horizontal pass evaluated only at even source columns.
    let mut tmp = vec![0.0f32; ow * h * CHANNELS];
    for y in 0..h {
        let row = &img.data[y * w * CHANNELS..(y + 1) * w * CHANNELS];
        let out = &mut tmp[y * ow * CHANNELS..(y + 1) * ow * CHANNELS];
        for i in 0..ow {
            let mut acc = [0.0f32; CHANNELS];
            for (k, &t) in taps.iter().enumerate() {
                let sx = reflect101(2 * i as isize + k as isize - 2, w);
                for c in 0..CHANNELS {
                    acc[c] += t * row[sx * CHANNELS + c];
                }
            }
            out[i * CHANNELS..(i + 1) * CHANNELS].copy_from_slice(&acc);
        }
    }

    let stride = ow * CHANNELS;
    let mut data = vec![0.0f32; ow * oh * CHANNELS];
    for j in 0..oh {
        let out = &mut data[j * stride..(j + 1) * stride];
        for (k, &t) in taps.iter().enumerate() {
            let sy = reflect101(2 * j as isize + k as isize - 2, h);
            let src = &tmp[sy * stride..(sy + 1) * stride];
            for (o, s) in out.iter_mut().zip(src) {
                *o += t * s;
            }
        }
    }
    Ok(FloatImage {
        width: ow,
        height: oh,
        data,
    })
}

/// Upsample by two with gain 4: only taps landing on integer coarse
/// coordinates contribute.
pub fn expand(
    img: &FloatImage,
    target_w: usize,
    target_h: usize,
    kernel: &Kernel5,
) -> Result<FloatImage, PyramidError> {
    let (w, h) = img.dims();
    if target_w != 2 * w || target_h != 2 * h || w == 0 || h == 0 {
        return Err(PyramidError::NotDouble {
            width: w,
            height: h,
            target_w,
            target_h,
        });
    }
    let taps = kernel.taps;

    // The gain of 4 splits into a factor 2 per separable pass.
    let mut tmp = vec![0.0f32; target_w * h * CHANNELS];
    for y in 0..h {
        let row = &img.data[y * w * CHANNELS..(y + 1) * w * CHANNELS];
        let out = &mut tmp[y * target_w * CHANNELS..(y + 1) * target_w * CHANNELS];
        for i in 0..target_w {
            let mut acc = [0.0f32; CHANNELS];
            for (k, &t) in taps.iter().enumerate() {
                let num = i as isize - (k as isize - 2);
                if num.rem_euclid(2) != 0 {
                    continue;
                }
                let sx = reflect101(num.div_euclid(2), w);
                for c in 0..CHANNELS {
                    acc[c] += 2.0 * t * row[sx * CHANNELS + c];
                }
            }
            out[i * CHANNELS..(i + 1) * CHANNELS].copy_from_slice(&acc);
        }
    }

    let stride = target_w * CHANNELS;
    let mut data = vec![0.0f32; target_w * target_h * CHANNELS];
    for j in 0..target_h {
        let out = &mut data[j * stride..(j + 1) * stride];
        for (k, &t) in taps.iter().enumerate() {
            let num = j as isize - (k as isize - 2);
            if num.rem_euclid(2) != 0 {
                continue;
            }
            let sy = reflect101(num.div_euclid(2), h);
            let src = &tmp[sy * stride..(sy + 1) * stride];
            for (o, s) in out.iter_mut().zip(src) {
                *o += 2.0 * t * s;
            }
        }
    }
    Ok(FloatImage {
        width: target_w,
        height: target_h,
        data,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPyramid {
    /// Level 0 is the full-resolution input.
    pub levels: Vec<FloatImage>,
}

impl GaussianPyramid {
    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }
}

fn check_divisible(img: &FloatImage, n: usize) -> Result<(), PyramidError> {
    let (w, h) = img.dims();
    let step = 1usize.checked_shl(n as u32).unwrap_or(0);
    if step == 0 || w == 0 || h == 0 || w % step != 0 || h % step != 0 {
        return Err(PyramidError::InsufficientDivisibility {
            width: w,
            height: h,
            levels: n,
        });
    }
    Ok(())
}

/// `n` reductions, giving `n + 1` levels.
pub fn build_gaussian(
    img: &FloatImage,
    n: usize,
    kernel: &Kernel5,
) -> Result<GaussianPyramid, PyramidError> {
    check_divisible(img, n)?;
    let mut levels = Vec::with_capacity(n + 1);
    levels.push(img.clone());
    for l in 0..n {
        let next = reduce(&levels[l], kernel)?;
        levels.push(next);
    }
    Ok(GaussianPyramid { levels })
}

/// Band-pass decomposition: `n` difference bands plus the coarsest Gaussian
/// level as residual.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianPyramid {
    pub bands: Vec<FloatImage>,
    pub residual: FloatImage,
}

impl LaplacianPyramid {
    /// Bands plus residual.
    pub fn num_levels(&self) -> usize {
        self.bands.len() + 1
    }

    /// Level `l` for `l < bands.len()`, otherwise the residual.
    pub fn level(&self, l: usize) -> &FloatImage {
        self.bands.get(l).unwrap_or(&self.residual)
    }

    pub fn level_mut(&mut self, l: usize) -> &mut FloatImage {
        if l < self.bands.len() {
            &mut self.bands[l]
        } else {
            &mut self.residual
        }
    }
}

pub fn build_laplacian(
    img: &FloatImage,
    n: usize,
    kernel: &Kernel5,
) -> Result<LaplacianPyramid, PyramidError> {
    let GaussianPyramid { levels } = build_gaussian(img, n, kernel)?;
    let mut bands = Vec::with_capacity(n);
    for pair in levels.windows(2) {
        let (fine, coarse) = (&pair[0], &pair[1]);
        let mut band = fine.clone();
        band.sub_assign(&expand(coarse, fine.width, fine.height, kernel)?);
        bands.push(band);
    }
    let residual = levels.into_iter().next_back().expect("at least one level");
    Ok(LaplacianPyramid { bands, residual })
}

/// Inverse of [`build_laplacian`].
pub fn collapse(pyr: &LaplacianPyramid, kernel: &Kernel5) -> Result<FloatImage, PyramidError> {
    let mut img = pyr.residual.clone();
    for (l, band) in pyr.bands.iter().enumerate().rev() {
        if band.dims() != (2 * img.width, 2 * img.height) {
            return Err(PyramidError::BrokenChain {
                level: l + 1,
                parent: l,
            });
        }
        let mut up = expand(&img, band.width, band.height, kernel)?;
        up.add_assign(band);
        img = up;
    }
    Ok(img)
}
