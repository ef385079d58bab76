//! Block motion estimation.
//!
//! [`estimate_epzs`] is the production search: predictive candidates (zero,
//! left, top, median, collocated prior) followed by an iterated
//! small-diamond refinement, with an early exit when a candidate is already
//! a near-perfect match. [`estimate_fullsearch`] is the exhaustive oracle
//! used to validate it. Matching cost is the sum of absolute differences
//! over the channel-averaged intensity plane.
//!
//! Blocks are laid on a regular `ceil(W/B) x ceil(H/B)` grid; blocks
//! overhanging the frame edge read edge-clamped samples so every block
//! covers a full `B x B` window.

use crate::error::{Error, Result};
use crate::frame::FrameBuffer;

/// Search configuration. Defaults: 16x16 blocks, +/-16 pixel range, and an
/// early exit at one least-significant 8-bit step per pixel.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SearchParams {
    pub block_size: usize,
    pub search_range: i32,
    /// Mean SAD per pixel below which a predictive candidate is accepted
    /// without refinement.
    pub early_exit_threshold: f64,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            block_size: 16,
            search_range: 16,
            early_exit_threshold: 1.0 / 255.0,
        }
    }
}

impl SearchParams {
    pub fn validate(&self) -> Result<()> {
        if self.block_size == 0 || self.search_range <= 0 || self.early_exit_threshold <= 0.0 {
            return Err(Error::validation(format!(
                "search parameters must be positive, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Per-block integer motion vectors between two frames, with the SAD of
/// each chosen vector.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MotionField {
    pub block_size: usize,
    pub grid_w: usize,
    pub grid_h: usize,
    /// Raster order, `(dx, dy)`: block `b` of the target matches the
    /// reference displaced by `vectors[b]`.
    pub vectors: Vec<(i32, i32)>,
    pub costs: Vec<f64>,
}

impl MotionField {
    pub fn block_count(&self) -> usize {
        self.grid_w * self.grid_h
    }

    pub fn vector(&self, bx: usize, by: usize) -> (i32, i32) {
        self.vectors[by * self.grid_w + bx]
    }

    /// True when this field's grid matches `frame`'s geometry.
    pub fn matches(&self, frame: &FrameBuffer) -> bool {
        self.grid_w == frame.width().div_ceil(self.block_size)
            && self.grid_h == frame.height().div_ceil(self.block_size)
    }

    /// Vectors scaled by `factor` and rounded to the nearest integer. The
    /// cost slots are zeroed: a scaled field describes no frame pair and is
    /// only meaningful as prediction input.
    pub fn scaled(&self, factor: f64) -> MotionField {
        MotionField {
            block_size: self.block_size,
            grid_w: self.grid_w,
            grid_h: self.grid_h,
            vectors: self
                .vectors
                .iter()
                .map(|&(dx, dy)| {
                    (
                        (f64::from(dx) * factor).round() as i32,
                        (f64::from(dy) * factor).round() as i32,
                    )
                })
                .collect(),
            costs: vec![0.0; self.vectors.len()],
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("motion field serializes")
    }
}

/// Channel-averaged intensity plane with edge-clamped reads; the working
/// surface of every SAD evaluation.
struct Plane {
    w: i64,
    h: i64,
    data: Vec<f64>,
}

impl Plane {
    fn from_frame(frame: &FrameBuffer) -> Plane {
        Plane {
            w: frame.width() as i64,
            h: frame.height() as i64,
            data: frame.luma(),
        }
    }

    #[inline]
    fn get(&self, x: i64, y: i64) -> f64 {
        let x = x.clamp(0, self.w - 1);
        let y = y.clamp(0, self.h - 1);
        self.data[(y * self.w + x) as usize]
    }
}

/// SAD of the `size x size` block anchored at `(x0, y0)` in `target`
/// against `reference` displaced by `(dx, dy)`.
fn block_sad(
    target: &Plane,
    reference: &Plane,
    x0: i64,
    y0: i64,
    size: i64,
    dx: i64,
    dy: i64,
) -> f64 {
    let mut acc = 0.0;
    for j in 0..size {
        for i in 0..size {
            let t = target.get(x0 + i, y0 + j);
            let r = reference.get(x0 + i + dx, y0 + j + dy);
            acc += (t - r).abs();
        }
    }
    acc
}

fn check_pair(target: &FrameBuffer, reference: &FrameBuffer, params: &SearchParams) -> Result<()> {
    params.validate()?;
    if !target.same_dims(reference) {
        return Err(Error::validation(format!(
            "frame dimensions differ: {}x{}x{} vs {}x{}x{}",
            target.width(),
            target.height(),
            target.channels(),
            reference.width(),
            reference.height(),
            reference.channels()
        )));
    }
    if target.width() < params.block_size || target.height() < params.block_size {
        return Err(Error::validation(format!(
            "frame {}x{} smaller than one {} pixel block",
            target.width(),
            target.height(),
            params.block_size
        )));
    }
    Ok(())
}

fn grid_dims(frame: &FrameBuffer, block_size: usize) -> (usize, usize) {
    (
        frame.width().div_ceil(block_size),
        frame.height().div_ceil(block_size),
    )
}

/// Component-wise median of three vectors.
fn median3(a: (i32, i32), b: (i32, i32), c: (i32, i32)) -> (i32, i32) {
    let med = |x: i32, y: i32, z: i32| x.max(y.min(z)).min(y.max(z)).max(x.min(y.min(z)));
    (med(a.0, b.0, c.0), med(a.1, b.1, c.1))
}

/// Enhanced predictive zonal search.
///
/// For each block in raster order the candidate set is evaluated in a
/// fixed order — zero vector, left neighbor, top neighbor, median of
/// (left, top, top-right) with missing neighbors read as zero, and the
/// collocated vector of `prior` when given. The best candidate is accepted
/// outright when its mean SAD is at or below the early-exit threshold;
/// otherwise an iterated +/-1 cross refinement runs until no move improves
/// the cost. All vectors are clamped to `search_range`. The result is
/// deterministic: ties keep the earliest candidate.
pub fn estimate_epzs(
    target: &FrameBuffer,
    reference: &FrameBuffer,
    params: &SearchParams,
    prior: Option<&MotionField>,
) -> Result<MotionField> {
    check_pair(target, reference, params)?;
    let (grid_w, grid_h) = grid_dims(target, params.block_size);
    if let Some(p) = prior {
        if p.grid_w != grid_w || p.grid_h != grid_h || p.block_size != params.block_size {
            return Err(Error::validation(format!(
                "prior field grid {}x{} (block {}) does not match {grid_w}x{grid_h} (block {})",
                p.grid_w, p.grid_h, p.block_size, params.block_size
            )));
        }
    }

    let tp = Plane::from_frame(target);
    let rp = Plane::from_frame(reference);
    let size = params.block_size as i64;
    let range = params.search_range;
    let block_pixels = (params.block_size * params.block_size) as f64;
    let exit_sad = params.early_exit_threshold * block_pixels;

    let mut vectors: Vec<(i32, i32)> = Vec::with_capacity(grid_w * grid_h);
    let mut costs: Vec<f64> = Vec::with_capacity(grid_w * grid_h);

    let clamp_mv = |(dx, dy): (i32, i32)| (dx.clamp(-range, range), dy.clamp(-range, range));

    for by in 0..grid_h {
        for bx in 0..grid_w {
            let x0 = (bx * params.block_size) as i64;
            let y0 = (by * params.block_size) as i64;
            let sad = |(dx, dy): (i32, i32)| {
                block_sad(&tp, &rp, x0, y0, size, i64::from(dx), i64::from(dy))
            };

            let left = (bx > 0).then(|| vectors[by * grid_w + bx - 1]);
            let top = (by > 0).then(|| vectors[(by - 1) * grid_w + bx]);
            let top_right =
                (by > 0 && bx + 1 < grid_w).then(|| vectors[(by - 1) * grid_w + bx + 1]);
            let zero = (0, 0);

            let mut candidates: Vec<(i32, i32)> = vec![zero];
            if let Some(mv) = left {
                candidates.push(mv);
            }
            if let Some(mv) = top {
                candidates.push(mv);
            }
            candidates.push(median3(
                left.unwrap_or(zero),
                top.unwrap_or(zero),
                top_right.unwrap_or(zero),
            ));
            if let Some(p) = prior {
                candidates.push(p.vectors[by * grid_w + bx]);
            }

            let mut best_mv = zero;
            let mut best_sad = f64::INFINITY;
            for cand in candidates {
                let cand = clamp_mv(cand);
                let s = sad(cand);
                if s < best_sad {
                    best_sad = s;
                    best_mv = cand;
                }
            }

            if best_sad > exit_sad {
                // Small-diamond descent: strict improvement only, so the
                // walk terminates and ties never move the vector.
                loop {
                    let mut improved = false;
                    for step in [(0, -1), (-1, 0), (1, 0), (0, 1)] {
                        let cand = clamp_mv((best_mv.0 + step.0, best_mv.1 + step.1));
                        if cand == best_mv {
                            continue;
                        }
                        let s = sad(cand);
                        if s < best_sad {
                            best_sad = s;
                            best_mv = cand;
                            improved = true;
                        }
                    }
                    if !improved {
                        break;
                    }
                }
            }

            vectors.push(best_mv);
            costs.push(best_sad);
        }
    }

    Ok(MotionField {
        block_size: params.block_size,
        grid_w,
        grid_h,
        vectors,
        costs,
    })
}

/// Exhaustive search over the full `+/-search_range` window: the global
/// SAD minimum per block, ties broken by smallest `|dx| + |dy|`, then scan
/// order (rows of `dy`, `dx` within each row, both ascending).
pub fn estimate_fullsearch(
    target: &FrameBuffer,
    reference: &FrameBuffer,
    params: &SearchParams,
) -> Result<MotionField> {
    check_pair(target, reference, params)?;
    let (grid_w, grid_h) = grid_dims(target, params.block_size);
    let tp = Plane::from_frame(target);
    let rp = Plane::from_frame(reference);
    let size = params.block_size as i64;
    let range = params.search_range;

    let mut vectors = Vec::with_capacity(grid_w * grid_h);
    let mut costs = Vec::with_capacity(grid_w * grid_h);
    for by in 0..grid_h {
        for bx in 0..grid_w {
            let x0 = (bx * params.block_size) as i64;
            let y0 = (by * params.block_size) as i64;
            let mut best_mv = (0, 0);
            let mut best_sad = f64::INFINITY;
            let mut best_l1 = i32::MAX;
            for dy in -range..=range {
                for dx in -range..=range {
                    let s = block_sad(&tp, &rp, x0, y0, size, i64::from(dx), i64::from(dy));
                    let l1 = dx.abs() + dy.abs();
                    if s < best_sad || (s == best_sad && l1 < best_l1) {
                        best_sad = s;
                        best_mv = (dx, dy);
                        best_l1 = l1;
                    }
                }
            }
            vectors.push(best_mv);
            costs.push(best_sad);
        }
    }
    Ok(MotionField {
        block_size: params.block_size,
        grid_w,
        grid_h,
        vectors,
        costs,
    })
}

/// Non-overlapped block compensation: each block of the output is copied
/// from the reference displaced by its vector, all channels, with reads
/// clamped at the frame edges.
pub fn compensate_blocks(reference: &FrameBuffer, field: &MotionField) -> Result<FrameBuffer> {
    if !field.matches(reference) {
        return Err(Error::validation(format!(
            "motion field grid {}x{} (block {}) does not match frame {}x{}",
            field.grid_w,
            field.grid_h,
            field.block_size,
            reference.width(),
            reference.height()
        )));
    }
    let (w, h, c) = (reference.width(), reference.height(), reference.channels());
    let mut samples = vec![0.0; w * h * c];
    for by in 0..field.grid_h {
        for bx in 0..field.grid_w {
            let (dx, dy) = field.vector(bx, by);
            for ch in 0..c {
                for y in by * field.block_size..((by + 1) * field.block_size).min(h) {
                    for x in bx * field.block_size..((bx + 1) * field.block_size).min(w) {
                        samples[ch * w * h + y * w + x] = reference.get_clamped(
                            x as i64 + i64::from(dx),
                            y as i64 + i64::from(dy),
                            ch,
                        );
                    }
                }
            }
        }
    }
    FrameBuffer::from_samples(w, h, c, samples)
}

/// Recompute the SAD of every block of `field` against the given frame
/// pair; used to check the stored-cost invariant.
pub fn recompute_costs(
    target: &FrameBuffer,
    reference: &FrameBuffer,
    field: &MotionField,
) -> Vec<f64> {
    let tp = Plane::from_frame(target);
    let rp = Plane::from_frame(reference);
    let size = field.block_size as i64;
    let mut out = Vec::with_capacity(field.block_count());
    for by in 0..field.grid_h {
        for bx in 0..field.grid_w {
            let (dx, dy) = field.vector(bx, by);
            out.push(block_sad(
                &tp,
                &rp,
                (bx * field.block_size) as i64,
                (by * field.block_size) as i64,
                size,
                i64::from(dx),
                i64::from(dy),
            ));
        }
    }
    out
}

/// Builds the frame pair for a pure translation test: the reference is the
/// target shifted by `(dx, dy)` with replicated borders, so the true field
/// is `(dx, dy)` everywhere.
pub fn translated_pair(base: &FrameBuffer, dx: i32, dy: i32) -> (FrameBuffer, FrameBuffer) {
    let (w, h, c) = (base.width(), base.height(), base.channels());
    let mut samples = Vec::with_capacity(w * h * c);
    for ch in 0..c {
        for y in 0..h {
            for x in 0..w {
                samples.push(base.get_clamped(
                    x as i64 - i64::from(dx),
                    y as i64 - i64::from(dy),
                    ch,
                ));
            }
        }
    }
    let reference = FrameBuffer::from_samples(w, h, c, samples).expect("same geometry");
    (base.clone(), reference)
}
