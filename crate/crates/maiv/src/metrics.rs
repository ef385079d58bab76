//! Evaluation metrics and compute accounting.
//!
//! The distillation losses are implemented as evaluative metrics over
//! given frame sequences: a spatial loss (per-frame MSE plus a perceptual
//! feature distance), a local temporal loss of the same form over
//! time-aligned pairs, a global temporal loss (feature distance between
//! whole clips), and their weighted combinations. Clip features come from
//! a pluggable [`FeatureExtractor`]; the built-in [`ReferenceExtractor`]
//! is a fully specified, deterministic stand-in for a pretrained video
//! network, so results are reproducible with no model weights.
//!
//! [`account_macs`] implements the multiply-accumulate budget model: a
//! fixed cost per generated key-frame, 2 MACs per 16x16 patch for motion
//! search amortized once per gap, and 5 MACs per pixel for OBMC on every
//! interpolated frame.

use crate::error::{Error, Result};
use crate::frame::{FrameBuffer, Sequence};
use crate::keyframe::KeyframeSet;

/// Weights of the loss combinations. Defaults follow the reference
/// configuration: local/global temporal mix 2/15, spatial/temporal mix 1/2.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LossWeights {
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    pub gamma: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            alpha: 2.0,
            beta: 15.0,
            sigma: 1.0,
            gamma: 2.0,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        if self.alpha < 0.0 || self.beta < 0.0 || self.sigma < 0.0 || self.gamma < 0.0 {
            return Err(Error::validation(format!(
                "loss weights must be non-negative, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Deterministic clip-feature extraction. Implementations must return the
/// same vector for the same frames, with a fixed dimensionality.
pub trait FeatureExtractor {
    fn extract(&self, frames: &[FrameBuffer]) -> Result<Vec<f64>>;
}

/// The built-in extractor: over a 4x4 spatial grid, each cell contributes
/// its mean absolute temporal difference, mean absolute horizontal and
/// vertical gradients, and mean intensity — 64 dimensions total.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReferenceExtractor;

impl FeatureExtractor for ReferenceExtractor {
    fn extract(&self, frames: &[FrameBuffer]) -> Result<Vec<f64>> {
        reference_features(frames)
    }
}

const GRID: usize = 4;

/// See [`ReferenceExtractor`]. Cells are raster-ordered; the four
/// statistics are emitted per cell in the order listed there.
pub fn reference_features(frames: &[FrameBuffer]) -> Result<Vec<f64>> {
    let first = frames
        .first()
        .ok_or_else(|| Error::validation("feature extraction needs at least one frame".to_string()))?;
    for f in frames {
        if !f.same_dims(first) {
            return Err(Error::validation(
                "feature extraction needs uniformly sized frames".to_string(),
            ));
        }
    }
    let (w, h, c) = (first.width(), first.height(), first.channels());
    let mut features = Vec::with_capacity(GRID * GRID * 4);
    for cy in 0..GRID {
        let y0 = cy * h / GRID;
        let y1 = (cy + 1) * h / GRID;
        for cx in 0..GRID {
            let x0 = cx * w / GRID;
            let x1 = (cx + 1) * w / GRID;

            let mut tsum = 0.0;
            let mut tcount = 0usize;
            let mut hsum = 0.0;
            let mut hcount = 0usize;
            let mut vsum = 0.0;
            let mut vcount = 0usize;
            let mut msum = 0.0;
            let mut mcount = 0usize;

            for (t, frame) in frames.iter().enumerate() {
                for ch in 0..c {
                    for y in y0..y1 {
                        for x in x0..x1 {
                            let v = frame.get(x, y, ch);
                            msum += v;
                            mcount += 1;
                            if t > 0 {
                                tsum += (v - frames[t - 1].get(x, y, ch)).abs();
                                tcount += 1;
                            }
                            if x + 1 < w {
                                hsum += (frame.get(x + 1, y, ch) - v).abs();
                                hcount += 1;
                            }
                            if y + 1 < h {
                                vsum += (frame.get(x, y + 1, ch) - v).abs();
                                vcount += 1;
                            }
                        }
                    }
                }
            }
            let mean = |sum: f64, count: usize| if count == 0 { 0.0 } else { sum / count as f64 };
            features.push(mean(tsum, tcount));
            features.push(mean(hsum, hcount));
            features.push(mean(vsum, vcount));
            features.push(mean(msum, mcount));
        }
    }
    Ok(features)
}

/// Mean squared error over all samples of two frames.
pub fn mse_frames(a: &FrameBuffer, b: &FrameBuffer) -> Result<f64> {
    if !a.same_dims(b) {
        return Err(Error::validation(format!(
            "MSE needs matching frames, got {}x{}x{} vs {}x{}x{}",
            a.width(),
            a.height(),
            a.channels(),
            b.width(),
            b.height(),
            b.channels()
        )));
    }
    let sum: f64 = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(sum / a.samples().len() as f64)
}

/// PSNR in dB for intensities in `[0, 1]`, capped at 100 so identical
/// frames stay finite.
pub fn psnr_frames(a: &FrameBuffer, b: &FrameBuffer) -> Result<f64> {
    let mse = mse_frames(a, b)?;
    Ok(if mse <= 1e-10 {
        100.0
    } else {
        (-10.0 * mse.log10()).min(100.0)
    })
}

/// Mean per-frame MSE over two aligned sequences.
pub fn mse_sequences(a: &Sequence, b: &Sequence) -> Result<f64> {
    check_aligned(a, b)?;
    let mut acc = 0.0;
    for (fa, fb) in a.frames().iter().zip(b.frames()) {
        acc += mse_frames(fa, fb)?;
    }
    Ok(acc / a.len() as f64)
}

fn check_aligned(a: &Sequence, b: &Sequence) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::validation(format!(
            "sequences differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if !a.frame(0).same_dims(b.frame(0)) {
        return Err(Error::validation("sequences differ in frame geometry".to_string()));
    }
    Ok(())
}

/// Mean squared distance between the extractor features of two frames
/// treated as single-frame clips.
pub fn perceptual_distance(
    a: &FrameBuffer,
    b: &FrameBuffer,
    extractor: &dyn FeatureExtractor,
) -> Result<f64> {
    if !a.same_dims(b) {
        return Err(Error::validation(
            "perceptual distance needs matching frames".to_string(),
        ));
    }
    let fa = extractor.extract(std::slice::from_ref(a))?;
    let fb = extractor.extract(std::slice::from_ref(b))?;
    feature_mse(&fa, &fb)
}

fn feature_mse(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::validation(format!(
            "feature vectors differ in dimensionality: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(sum / a.len() as f64)
}

fn paired_loss(
    student: &Sequence,
    teacher: &Sequence,
    extractor: &dyn FeatureExtractor,
) -> Result<f64> {
    check_aligned(student, teacher)?;
    let mut acc = 0.0;
    for (s, t) in student.frames().iter().zip(teacher.frames()) {
        acc += mse_frames(s, t)? + perceptual_distance(s, t, extractor)?;
    }
    Ok(acc / student.len() as f64)
}

/// Spatial distillation loss: mean over time-aligned frame pairs of MSE
/// plus perceptual distance.
pub fn loss_skd(
    student: &Sequence,
    teacher: &Sequence,
    extractor: &dyn FeatureExtractor,
) -> Result<f64> {
    paired_loss(student, teacher, extractor)
}

/// Local temporal distillation loss. Same functional form as [`loss_skd`];
/// the caller supplies the pairs aligned at the student's timestamps.
pub fn loss_ltkd(
    student: &Sequence,
    teacher: &Sequence,
    extractor: &dyn FeatureExtractor,
) -> Result<f64> {
    paired_loss(student, teacher, extractor)
}

/// Global temporal distillation loss: MSE between whole-clip feature
/// vectors. The teacher frames must already be gathered at the student's
/// timestamps.
pub fn loss_gtkd(
    student: &Sequence,
    teacher: &Sequence,
    extractor: &dyn FeatureExtractor,
) -> Result<f64> {
    check_aligned(student, teacher)?;
    let fs = extractor.extract(student.frames())?;
    let ft = extractor.extract(teacher.frames())?;
    feature_mse(&fs, &ft)
}

/// Weighted sum of already-computed local and global temporal losses:
/// `alpha * ltkd + beta * gtkd`.
pub fn combine_tkd(ltkd: f64, gtkd: f64, weights: &LossWeights) -> f64 {
    weights.alpha * ltkd + weights.beta * gtkd
}

/// Temporal distillation loss over sequences.
pub fn loss_tkd(
    student: &Sequence,
    teacher: &Sequence,
    weights: &LossWeights,
    extractor: &dyn FeatureExtractor,
) -> Result<f64> {
    weights.validate()?;
    Ok(combine_tkd(
        loss_ltkd(student, teacher, extractor)?,
        loss_gtkd(student, teacher, extractor)?,
        weights,
    ))
}

/// Full objective from its spatial and temporal components:
/// `sigma * skd + gamma * tkd`.
pub fn loss_kd(skd: f64, tkd: f64, weights: &LossWeights) -> f64 {
    weights.sigma * skd + weights.gamma * tkd
}

/// Per-unit constants of the MAC budget model.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CostModel {
    /// MACs per block-size patch for motion search, charged once per gap.
    pub epzs_macs_per_patch: f64,
    /// MACs per pixel for OBMC, charged per interpolated frame.
    pub obmc_macs_per_pixel: f64,
    pub block_size: usize,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            epzs_macs_per_patch: 2.0,
            obmc_macs_per_pixel: 5.0,
            block_size: 16,
        }
    }
}

/// Per-stage MAC tallies for synthesizing one sequence. All fields are in
/// raw MACs.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CostReport {
    pub generator_macs: f64,
    pub epzs_macs: f64,
    pub obmc_macs: f64,
    /// The selector's cost is quoted only as wall time upstream; it is
    /// reported as zero MACs here.
    pub selector_macs: f64,
    pub total_macs: f64,
    pub mean_macs_per_frame: f64,
    pub frames_generated: usize,
    pub frames_interpolated: usize,
}

impl CostReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("cost report serializes")
    }
}

/// Tally generator and interpolation MACs for a key-frame plan over a
/// `t_len`-frame sequence of `width x height` frames.
/// `generator_macs_per_frame` is the declared cost of one backend
/// invocation, in MACs.
pub fn account_macs(
    t_len: usize,
    keys: &KeyframeSet,
    width: usize,
    height: usize,
    generator_macs_per_frame: f64,
    model: &CostModel,
) -> Result<CostReport> {
    if keys.source_length() != t_len {
        return Err(Error::validation(format!(
            "key-frame set is for {} frames, budget asked for {t_len}",
            keys.source_length()
        )));
    }
    let patches = (width.div_ceil(model.block_size) * height.div_ceil(model.block_size)) as f64;
    let generator_macs = keys.len() as f64 * generator_macs_per_frame;
    let mut epzs_macs = 0.0;
    let mut obmc_macs = 0.0;
    for pair in keys.indices().windows(2) {
        let gap = pair[1] - pair[0];
        if gap > 1 {
            epzs_macs += model.epzs_macs_per_patch * patches;
            obmc_macs += (gap - 1) as f64 * model.obmc_macs_per_pixel * (width * height) as f64;
        }
    }
    let selector_macs = 0.0;
    let total_macs = generator_macs + epzs_macs + obmc_macs + selector_macs;
    Ok(CostReport {
        generator_macs,
        epzs_macs,
        obmc_macs,
        selector_macs,
        total_macs,
        mean_macs_per_frame: total_macs / t_len as f64,
        frames_generated: keys.len(),
        frames_interpolated: t_len - keys.len(),
    })
}
