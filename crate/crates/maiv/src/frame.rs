//! Frame and sequence data model.
//!
//! A [`FrameBuffer`] is one image: planar samples in `[0, 1]`, row-major
//! within each channel plane. A [`Sequence`] is an ordered run of frames
//! with identical geometry. Both are immutable after construction and all
//! operations on them are pure functions.

use crate::error::{Error, Result};

/// Minimum frame side length accepted by motion estimation: one full
/// 16x16 block must fit.
pub const MIN_MOTION_DIM: usize = 16;

/// Frame rate metadata, kept as an exact rational so file headers
/// round-trip losslessly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct FrameRate {
    pub num: u32,
    pub den: u32,
}

impl FrameRate {
    pub fn new(num: u32, den: u32) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::validation(format!(
                "frame rate {num}/{den} must have nonzero numerator and denominator"
            )));
        }
        Ok(FrameRate { num, den })
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.num) / f64::from(self.den)
    }
}

impl Default for FrameRate {
    fn default() -> Self {
        FrameRate { num: 30, den: 1 }
    }
}

/// One image plane set. Samples are stored channel-planar: all of channel 0
/// row-major, then channel 1, and so on. Intensities are reals in `[0, 1]`;
/// the 8-bit disk formats quantize with `round(x * 255)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameBuffer {
    width: usize,
    height: usize,
    channels: usize,
    samples: Vec<f64>,
}

impl FrameBuffer {
    /// Builds a frame from raw samples. Lengths and the channel count are
    /// checked; sample values are the caller's responsibility and are
    /// expected to lie in `[0, 1]`.
    pub fn from_samples(
        width: usize,
        height: usize,
        channels: usize,
        samples: Vec<f64>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::validation(format!(
                "frame dimensions {width}x{height} must be nonzero"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::validation(format!(
                "channel count must be 1 or 3, got {channels}"
            )));
        }
        if samples.len() != width * height * channels {
            return Err(Error::validation(format!(
                "sample count {} does not match {width}x{height}x{channels}",
                samples.len()
            )));
        }
        Ok(FrameBuffer {
            width,
            height,
            channels,
            samples,
        })
    }

    /// A frame filled with one intensity.
    pub fn constant(width: usize, height: usize, channels: usize, value: f64) -> Result<Self> {
        Self::from_samples(width, height, channels, vec![value; width * height * channels])
    }

    /// Builds a single-channel frame by evaluating `f(x, y)`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut samples = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                samples.push(f(x, y));
            }
        }
        Self::from_samples(width, height, 1, samples)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// One channel plane, row-major.
    pub fn plane(&self, channel: usize) -> &[f64] {
        let n = self.width * self.height;
        &self.samples[channel * n..(channel + 1) * n]
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, channel: usize) -> f64 {
        self.samples[channel * self.width * self.height + y * self.width + x]
    }

    /// Read with coordinates clamped to the frame edges. Accepts signed
    /// coordinates so displaced block reads stay branch-free at borders.
    #[inline]
    pub fn get_clamped(&self, x: i64, y: i64, channel: usize) -> f64 {
        let x = x.clamp(0, self.width as i64 - 1) as usize;
        let y = y.clamp(0, self.height as i64 - 1) as usize;
        self.get(x, y, channel)
    }

    pub fn same_dims(&self, other: &FrameBuffer) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    /// Per-pixel mean over channels; the single plane used by block matching.
    pub fn luma(&self) -> Vec<f64> {
        let n = self.width * self.height;
        if self.channels == 1 {
            return self.samples.clone();
        }
        let mut out = vec![0.0; n];
        for c in 0..self.channels {
            let plane = self.plane(c);
            for (o, v) in out.iter_mut().zip(plane) {
                *o += v;
            }
        }
        let inv = 1.0 / self.channels as f64;
        for o in &mut out {
            *o *= inv;
        }
        out
    }

    /// Mean intensity over all samples.
    pub fn mean(&self) -> f64 {
        let sum: f64 = self.samples.iter().sum();
        sum / self.samples.len() as f64
    }

    /// Quantize to the 8-bit disk representation, channel-planar.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.samples
            .iter()
            .map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect()
    }

    /// Inverse of [`to_bytes`](Self::to_bytes): byte `v` maps to `v / 255`
    /// exactly.
    pub fn from_bytes(width: usize, height: usize, channels: usize, bytes: &[u8]) -> Result<Self> {
        let samples = bytes.iter().map(|&b| f64::from(b) / 255.0).collect();
        Self::from_samples(width, height, channels, samples)
    }
}

/// Downsampling filter for [`resize`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResizeFilter {
    /// Mean of each `2^d x 2^d` tile. Preserves the global mean exactly.
    Box,
    /// Bilinear sample at the centers of the output grid.
    Bilinear,
}

/// Reduce resolution by `1 / 2^d` per side. Both dimensions must be
/// divisible by `2^d`; `d = 0` is the identity for either filter.
pub fn resize(frame: &FrameBuffer, factor_d: u32, filter: ResizeFilter) -> Result<FrameBuffer> {
    let scale = 1usize << factor_d;
    if factor_d == 0 {
        return Ok(frame.clone());
    }
    if frame.width() % scale != 0 || frame.height() % scale != 0 {
        return Err(Error::validation(format!(
            "frame {}x{} not divisible by 2^{factor_d}",
            frame.width(),
            frame.height()
        )));
    }
    let (w, h, c) = (frame.width() / scale, frame.height() / scale, frame.channels());
    let mut samples = Vec::with_capacity(w * h * c);
    match filter {
        ResizeFilter::Box => {
            let inv = 1.0 / (scale * scale) as f64;
            for ch in 0..c {
                for oy in 0..h {
                    for ox in 0..w {
                        let mut acc = 0.0;
                        for dy in 0..scale {
                            for dx in 0..scale {
                                acc += frame.get(ox * scale + dx, oy * scale + dy, ch);
                            }
                        }
                        samples.push(acc * inv);
                    }
                }
            }
        }
        ResizeFilter::Bilinear => {
            let f = scale as f64;
            for ch in 0..c {
                for oy in 0..h {
                    for ox in 0..w {
                        let sx = (ox as f64 + 0.5) * f - 0.5;
                        let sy = (oy as f64 + 0.5) * f - 0.5;
                        samples.push(sample_bilinear(frame, sx, sy, ch));
                    }
                }
            }
        }
    }
    FrameBuffer::from_samples(w, h, c, samples)
}

/// Upsampling mode for [`upsample`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpsampleMode {
    Nearest,
    Bilinear,
}

/// Enlarge by `2^d` per side. Nearest replication is the exact inverse of
/// the box downsample on its own output.
pub fn upsample(frame: &FrameBuffer, factor_d: u32, mode: UpsampleMode) -> Result<FrameBuffer> {
    if factor_d == 0 {
        return Ok(frame.clone());
    }
    let scale = 1usize << factor_d;
    let (w, h, c) = (frame.width() * scale, frame.height() * scale, frame.channels());
    let mut samples = Vec::with_capacity(w * h * c);
    let inv = 1.0 / scale as f64;
    for ch in 0..c {
        for oy in 0..h {
            for ox in 0..w {
                let v = match mode {
                    UpsampleMode::Nearest => frame.get(ox / scale, oy / scale, ch),
                    UpsampleMode::Bilinear => {
                        let sx = (ox as f64 + 0.5) * inv - 0.5;
                        let sy = (oy as f64 + 0.5) * inv - 0.5;
                        sample_bilinear(frame, sx, sy, ch)
                    }
                };
                samples.push(v);
            }
        }
    }
    FrameBuffer::from_samples(w, h, c, samples)
}

/// Bilinear read at a fractional position, edge-clamped.
fn sample_bilinear(frame: &FrameBuffer, x: f64, y: f64, channel: usize) -> f64 {
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = x - x0;
    let fy = y - y0;
    let (x0, y0) = (x0 as i64, y0 as i64);
    let v00 = frame.get_clamped(x0, y0, channel);
    let v10 = frame.get_clamped(x0 + 1, y0, channel);
    let v01 = frame.get_clamped(x0, y0 + 1, channel);
    let v11 = frame.get_clamped(x0 + 1, y0 + 1, channel);
    let top = v00 + (v10 - v00) * fx;
    let bot = v01 + (v11 - v01) * fx;
    top + (bot - top) * fy
}

/// Ordered, uniformly sized frames. Models both semantic-map streams and
/// video streams; `frame_rate` is carried as metadata only.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    frames: Vec<FrameBuffer>,
    frame_rate: FrameRate,
}

impl Sequence {
    pub fn new(frames: Vec<FrameBuffer>, frame_rate: FrameRate) -> Result<Self> {
        if frames.len() < 2 {
            return Err(Error::validation(format!(
                "sequence needs at least 2 frames, got {}",
                frames.len()
            )));
        }
        let first = &frames[0];
        for (i, f) in frames.iter().enumerate().skip(1) {
            if !f.same_dims(first) {
                return Err(Error::validation(format!(
                    "frame {i} is {}x{}x{}, expected {}x{}x{}",
                    f.width(),
                    f.height(),
                    f.channels(),
                    first.width(),
                    first.height(),
                    first.channels()
                )));
            }
        }
        Ok(Sequence { frames, frame_rate })
    }

    pub fn frames(&self) -> &[FrameBuffer] {
        &self.frames
    }

    pub fn frame(&self, index: usize) -> &FrameBuffer {
        &self.frames[index]
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frame_rate(&self) -> FrameRate {
        self.frame_rate
    }

    pub fn width(&self) -> usize {
        self.frames[0].width()
    }

    pub fn height(&self) -> usize {
        self.frames[0].height()
    }

    pub fn channels(&self) -> usize {
        self.frames[0].channels()
    }

    pub fn into_frames(self) -> Vec<FrameBuffer> {
        self.frames
    }
}
