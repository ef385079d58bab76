//! Key-frame selection.
//!
//! The generator only synthesizes frames at selected timestamps; everything
//! else is interpolated. Three strategies are provided: the residual-curve
//! peak method (sum the absolute inter-frame residuals, smooth the curve
//! with a sliding window, key the frames after each local maximum) and the
//! fixed-gap and random-gap baselines it is compared against.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::frame::Sequence;

/// Sorted frame indices chosen for generator synthesis. Always contains
/// both endpoints so every gap is bracketed by synthesized frames.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct KeyframeSet {
    #[serde(rename = "T")]
    source_length: usize,
    indices: Vec<usize>,
}

impl KeyframeSet {
    /// Validates and builds a set. `indices` must be strictly increasing,
    /// within `[0, source_length)`, and include `0` and `source_length - 1`.
    pub fn new(indices: Vec<usize>, source_length: usize) -> Result<Self> {
        if source_length < 2 {
            return Err(Error::validation(format!(
                "key-frame set needs a source of at least 2 frames, got {source_length}"
            )));
        }
        if indices.len() < 2 {
            return Err(Error::validation(format!(
                "key-frame set needs at least 2 indices, got {}",
                indices.len()
            )));
        }
        if !indices.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::validation(
                "key-frame indices must be strictly increasing".to_string(),
            ));
        }
        if indices[0] != 0 || *indices.last().unwrap() != source_length - 1 {
            return Err(Error::validation(format!(
                "key-frame set must contain endpoints 0 and {}",
                source_length - 1
            )));
        }
        Ok(KeyframeSet {
            source_length,
            indices,
        })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn source_length(&self) -> usize {
        self.source_length
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("keyframe set serializes")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let raw: KeyframeSet = serde_json::from_str(json)
            .map_err(|e| Error::format(format!("bad key-frame JSON: {e}")))?;
        KeyframeSet::new(raw.indices, raw.source_length)
    }
}

/// Per-boundary difference statistics for a `T`-frame sequence: one value
/// per adjacent frame pair, plus the sliding window it was smoothed with
/// (1 for a raw curve).
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceCurve {
    values: Vec<f64>,
    window: usize,
}

impl DifferenceCurve {
    pub fn new(values: Vec<f64>, window: usize) -> Result<Self> {
        if window == 0 {
            return Err(Error::validation("curve window must be positive".to_string()));
        }
        if values.iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::validation(
                "difference curve values must be non-negative".to_string(),
            ));
        }
        Ok(DifferenceCurve { values, window })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Sum of absolute residuals between each adjacent frame pair:
/// `values[i] = sum |frame[i+1] - frame[i]|` over all samples.
pub fn residual_curve(seq: &Sequence) -> DifferenceCurve {
    let values = seq
        .frames()
        .windows(2)
        .map(|pair| {
            pair[0]
                .samples()
                .iter()
                .zip(pair[1].samples())
                .map(|(a, b)| (b - a).abs())
                .sum()
        })
        .collect();
    DifferenceCurve { values, window: 1 }
}

/// Centered moving average with edge replication; output length equals
/// input length. `window` must be odd and no longer than the curve.
pub fn smooth(curve: &DifferenceCurve, window: usize) -> Result<DifferenceCurve> {
    if window % 2 == 0 {
        return Err(Error::validation(format!(
            "smoothing window must be odd, got {window}"
        )));
    }
    if window > curve.len() {
        return Err(Error::validation(format!(
            "smoothing window {window} exceeds curve length {}",
            curve.len()
        )));
    }
    let n = curve.len();
    let radius = (window / 2) as i64;
    let inv = 1.0 / window as f64;
    let values = (0..n as i64)
        .map(|i| {
            let mut acc = 0.0;
            for j in i - radius..=i + radius {
                acc += curve.values[j.clamp(0, n as i64 - 1) as usize];
            }
            acc * inv
        })
        .collect();
    Ok(DifferenceCurve { values, window })
}

/// Peak-based selection. The curve is smoothed with `window`; curve index
/// `i` is a peak when it is the window-neighborhood argmax (ties resolve
/// to the smaller index), and a peak at `i` keys frame `i + 1` — the frame
/// that carries the changed content. Endpoints are always included.
pub fn select_keyframes(
    curve: &DifferenceCurve,
    window: usize,
    source_length: usize,
) -> Result<KeyframeSet> {
    if curve.len() + 1 != source_length {
        return Err(Error::validation(format!(
            "curve of length {} does not match a {source_length}-frame sequence",
            curve.len()
        )));
    }
    let smoothed = smooth(curve, window)?;
    let n = smoothed.len();
    let radius = window / 2;
    let mut indices = vec![0];
    for i in 0..n {
        let lo = i.saturating_sub(radius);
        let hi = (i + radius).min(n - 1);
        // Neighborhood argmax with first-index tie-breaking.
        let mut argmax = lo;
        for j in lo + 1..=hi {
            if smoothed.values[j] > smoothed.values[argmax] {
                argmax = j;
            }
        }
        if argmax == i && smoothed.values[i] > 0.0 {
            let key = i + 1;
            if key != 0 && key != source_length - 1 {
                indices.push(key);
            }
        }
    }
    indices.push(source_length - 1);
    indices.dedup();
    KeyframeSet::new(indices, source_length)
}

/// Convenience: peak selection straight from a sequence.
pub fn select_keyframes_from_sequence(seq: &Sequence, window: usize) -> Result<KeyframeSet> {
    select_keyframes(&residual_curve(seq), window, seq.len())
}

/// Fixed-gap baseline: `{0, gap, 2*gap, ...}` plus the final frame.
pub fn select_fixed_gap(source_length: usize, gap: usize) -> Result<KeyframeSet> {
    if gap == 0 || gap >= source_length {
        return Err(Error::validation(format!(
            "gap {gap} out of range for {source_length} frames"
        )));
    }
    let mut indices: Vec<usize> = (0..source_length).step_by(gap).collect();
    if *indices.last().unwrap() != source_length - 1 {
        indices.push(source_length - 1);
    }
    KeyframeSet::new(indices, source_length)
}

/// Random-gap baseline: endpoints plus `count - 2` distinct interior
/// indices drawn without replacement from a seeded generator. The draw is
/// a partial Fisher-Yates shuffle, so a seed pins the exact output.
pub fn select_random_gap(source_length: usize, count: usize, rng_seed: u64) -> Result<KeyframeSet> {
    if count < 2 || count > source_length {
        return Err(Error::validation(format!(
            "key-frame count {count} out of range [2, {source_length}]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut interior: Vec<usize> = (1..source_length - 1).collect();
    let picks = count - 2;
    for i in 0..picks {
        let j = i + uniform_below(&mut rng, (interior.len() - i) as u64) as usize;
        interior.swap(i, j);
    }
    let mut indices: Vec<usize> = interior[..picks].to_vec();
    indices.push(0);
    indices.push(source_length - 1);
    indices.sort_unstable();
    KeyframeSet::new(indices, source_length)
}

/// Unbiased integer in `[0, bound)` by rejection sampling.
fn uniform_below(rng: &mut ChaCha8Rng, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    let zone = u64::MAX - (u64::MAX - bound + 1) % bound;
    loop {
        let v = rng.next_u64();
        if v <= zone {
            return v % bound;
        }
    }
}
