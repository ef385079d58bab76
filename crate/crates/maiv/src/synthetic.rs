//! Deterministic synthetic sequences.
//!
//! Everything here is constructed by direct pixel arithmetic, independent
//! of the motion, compensation, and selection code it is used to test:
//! smooth random textures, pure translations, analytic rotations, and
//! burst-motion scenes whose ground truth and burst schedule are known by
//! construction.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::frame::{FrameBuffer, FrameRate, Sequence};

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Smooth low-frequency texture parameters drawn from a seed. Evaluated
/// analytically so it can be sampled at arbitrary (rotated, shifted) real
/// coordinates.
#[derive(Debug, Clone)]
pub struct Texture {
    waves: Vec<(f64, f64, f64, f64)>, // (kx, ky, phase, amplitude)
}

impl Texture {
    pub fn from_seed(seed: u64) -> Texture {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let waves = (0..4)
            .map(|_| {
                // Wavelengths 24..56 px keep the matching landscape smooth.
                let wavelength = 24.0 + 32.0 * unit(&mut rng);
                let angle = std::f64::consts::TAU * unit(&mut rng);
                let k = std::f64::consts::TAU / wavelength;
                (
                    k * angle.cos(),
                    k * angle.sin(),
                    std::f64::consts::TAU * unit(&mut rng),
                    0.5 + 0.5 * unit(&mut rng),
                )
            })
            .collect();
        Texture { waves }
    }

    /// Intensity at a real-valued point, in (0.05, 0.95).
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let total: f64 = self.waves.iter().map(|(_, _, _, a)| a).sum();
        let mut acc = 0.0;
        for (kx, ky, phase, amp) in &self.waves {
            acc += amp * (kx * x + ky * y + phase).sin();
        }
        0.5 + 0.45 * acc / total
    }

    pub fn render(&self, w: usize, h: usize) -> FrameBuffer {
        FrameBuffer::from_fn(w, h, |x, y| self.eval(x as f64, y as f64)).expect("valid dims")
    }
}

/// Smooth single-channel texture frame.
pub fn smooth_texture(w: usize, h: usize, seed: u64) -> FrameBuffer {
    Texture::from_seed(seed).render(w, h)
}

/// Content moved right/down by integer `(dx, dy)` with replicated borders.
pub fn shift_frame(base: &FrameBuffer, dx: i32, dy: i32) -> FrameBuffer {
    crate::motion::translated_pair(base, dx, dy).1
}

/// A texture translating at `(vx, vy)` pixels per frame; frame `t` is the
/// base shifted by the rounded cumulative displacement.
pub fn translating_sequence(
    w: usize,
    h: usize,
    t_len: usize,
    vx: f64,
    vy: f64,
    seed: u64,
) -> Result<Sequence> {
    let base = smooth_texture(w, h, seed);
    let frames = (0..t_len)
        .map(|t| {
            shift_frame(
                &base,
                (vx * t as f64).round() as i32,
                (vy * t as f64).round() as i32,
            )
        })
        .collect();
    Sequence::new(frames, FrameRate::default())
}

/// A texture rotating about the frame center, sampled analytically.
pub fn rotating_sequence(
    w: usize,
    h: usize,
    t_len: usize,
    degrees_per_frame: f64,
    seed: u64,
) -> Result<Sequence> {
    let texture = Texture::from_seed(seed);
    let (cx, cy) = ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0);
    let frames = (0..t_len)
        .map(|t| {
            let theta = (degrees_per_frame * t as f64).to_radians();
            let (sin, cos) = theta.sin_cos();
            FrameBuffer::from_fn(w, h, |x, y| {
                let dx = x as f64 - cx;
                let dy = y as f64 - cy;
                texture.eval(cx + cos * dx - sin * dy, cy + sin * dx + cos * dy)
            })
            .expect("valid dims")
        })
        .collect();
    Sequence::new(frames, FrameRate::default())
}

/// One motion burst: the object glides from its current resting place by
/// `(dx, dy)` over `len` frames (smoothstep profile, so the residual curve
/// has a single interior maximum), starting at frame `start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurstSpec {
    pub start: usize,
    pub len: usize,
    pub dx: i32,
    pub dy: i32,
}

/// Side length of the moving object in [`bursty_sequence`].
pub const BURST_OBJECT_SIZE: usize = 12;

/// Scene with a textured square object over a static background. The
/// object rests between bursts; all motion is concentrated inside them.
/// The caller keeps `start` plus each cumulative displacement within
/// `[0, w - BURST_OBJECT_SIZE] x [0, h - BURST_OBJECT_SIZE]`; positions
/// are clamped as a last resort.
pub fn bursty_sequence(
    w: usize,
    h: usize,
    t_len: usize,
    start: (i32, i32),
    bursts: &[BurstSpec],
    seed: u64,
) -> Result<Sequence> {
    let background = Texture::from_seed(seed);
    let object = Texture::from_seed(seed.wrapping_add(1));
    let obj_size = BURST_OBJECT_SIZE;

    let smoothstep = |t: f64| t * t * (3.0 - 2.0 * t);
    let position = |frame: usize| -> (i32, i32) {
        let mut x = f64::from(start.0);
        let mut y = f64::from(start.1);
        for b in bursts {
            let progress = if frame <= b.start {
                0.0
            } else if frame >= b.start + b.len {
                1.0
            } else {
                smoothstep((frame - b.start) as f64 / b.len as f64)
            };
            x += f64::from(b.dx) * progress;
            y += f64::from(b.dy) * progress;
        }
        (
            (x.round() as i32).clamp(0, (w - obj_size) as i32),
            (y.round() as i32).clamp(0, (h - obj_size) as i32),
        )
    };

    let frames = (0..t_len)
        .map(|t| {
            let (ox, oy) = position(t);
            FrameBuffer::from_fn(w, h, |x, y| {
                let ix = x as i32 - ox;
                let iy = y as i32 - oy;
                if ix >= 0 && iy >= 0 && (ix as usize) < obj_size && (iy as usize) < obj_size {
                    // Bright textured patch, clearly above the background.
                    0.75 + 0.25 * (object.eval(f64::from(ix), f64::from(iy)) - 0.5)
                } else {
                    0.55 * background.eval(x as f64, y as f64)
                }
            })
            .expect("valid dims")
        })
        .collect();
    Sequence::new(frames, FrameRate::default())
}

/// Draws a non-overlapping burst schedule and renders it. Bursts are 3-5
/// frames long with displacements of 8-16 pixels; directions that would
/// push the object out of frame are reflected back in.
pub fn random_bursty_sequence(
    w: usize,
    h: usize,
    t_len: usize,
    n_bursts: usize,
    seed: u64,
) -> Result<(Sequence, Vec<BurstSpec>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (max_x, max_y) = (
        (w - BURST_OBJECT_SIZE) as i32,
        (h - BURST_OBJECT_SIZE) as i32,
    );
    let start = (
        (f64::from(max_x) * (0.25 + 0.5 * unit(&mut rng))).round() as i32,
        (f64::from(max_y) * (0.25 + 0.5 * unit(&mut rng))).round() as i32,
    );
    let mut rest = start;
    let mut bursts = Vec::with_capacity(n_bursts);
    // Partition the timeline into equal slots and place one burst inside
    // each, keeping clear of the endpoints.
    let slot = t_len / n_bursts.max(1);
    for i in 0..n_bursts {
        let len = 3 + (rng.next_u64() % 3) as usize;
        let lo = (i * slot + 2).min(t_len - len - 2);
        let hi = ((i + 1) * slot).saturating_sub(len + 2).max(lo);
        let startf = lo + (rng.next_u64() as usize) % (hi - lo + 1);
        let magnitude = 8.0 + 8.0 * unit(&mut rng);
        let angle = std::f64::consts::TAU * unit(&mut rng);
        let mut dx = (magnitude * angle.cos()).round() as i32;
        let mut dy = (magnitude * angle.sin()).round() as i32;
        if rest.0 + dx < 0 || rest.0 + dx > max_x {
            dx = -dx;
        }
        if rest.1 + dy < 0 || rest.1 + dy > max_y {
            dy = -dy;
        }
        rest = (
            (rest.0 + dx).clamp(0, max_x),
            (rest.1 + dy).clamp(0, max_y),
        );
        bursts.push(BurstSpec {
            start: startf,
            len,
            dx,
            dy,
        });
    }
    let seq = bursty_sequence(w, h, t_len, start, &bursts, seed)?;
    Ok((seq, bursts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keyframe::residual_curve;

    #[test]
    fn textures_are_deterministic_and_bounded() {
        let a = smooth_texture(32, 32, 7);
        let b = smooth_texture(32, 32, 7);
        assert_eq!(a, b);
        assert!(a.samples().iter().all(|&v| (0.0..=1.0).contains(&v)));
        let c = smooth_texture(32, 32, 8);
        assert_ne!(a, c);
    }

    #[test]
    fn translation_shifts_cumulatively() {
        let seq = translating_sequence(48, 48, 4, 2.0, 0.0, 3).unwrap();
        let base = smooth_texture(48, 48, 3);
        for t in 0..4 {
            let expect = shift_frame(&base, 2 * t as i32, 0);
            assert_eq!(seq.frame(t), &expect);
        }
    }

    #[test]
    fn rotation_frame_zero_is_texture() {
        let seq = rotating_sequence(32, 32, 3, 1.5, 9).unwrap();
        let direct = smooth_texture(32, 32, 9);
        for (a, b) in seq.frame(0).samples().iter().zip(direct.samples()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_ne!(seq.frame(0), seq.frame(2));
    }

    #[test]
    fn bursty_motion_is_concentrated() {
        let bursts = [BurstSpec {
            start: 5,
            len: 4,
            dx: 12,
            dy: 0,
        }];
        let seq = bursty_sequence(64, 64, 20, (10, 20), &bursts, 1).unwrap();
        let curve = residual_curve(&seq);
        // Static spans are exactly static.
        for (i, &v) in curve.values().iter().enumerate() {
            let inside = (5..9).contains(&i);
            assert_eq!(v > 0.0, inside, "curve index {i}: {v}");
        }
    }

    #[test]
    fn random_bursts_fit_in_timeline() {
        for seed in 0..20 {
            let (seq, bursts) = random_bursty_sequence(64, 64, 36, 3, seed).unwrap();
            assert_eq!(seq.len(), 36);
            assert_eq!(bursts.len(), 3);
            for b in &bursts {
                assert!(b.start >= 1);
                assert!(b.start + b.len < 35);
            }
        }
    }
}
