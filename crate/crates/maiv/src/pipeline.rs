//! End-to-end motion-aware synthesis.
//!
//! `synthesize` runs the full path: select key timestamps on the semantic
//! stream, synthesize only those through a generator backend (which sees
//! spatially reduced maps), fill the gaps by motion-compensated
//! interpolation, and account the compute spent. `reconstruct` is the
//! ablation path: keep a sequence's own frames at the key indices and
//! re-fill everything between them.

use crate::compensate::{fill_sequence, InterpolationMethod, ObmcParams};
use crate::error::Result;
use crate::frame::{FrameBuffer, Sequence};
use crate::generator::{run_keyframes, GeneratorBackend};
use crate::keyframe::{
    select_fixed_gap, select_keyframes_from_sequence, select_random_gap, KeyframeSet,
};
use crate::metrics::{account_macs, CostModel, CostReport};
use crate::motion::SearchParams;

/// How key timestamps are chosen.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "strategy", rename_all = "lowercase")]
pub enum SelectionStrategy {
    /// Residual-curve peaks with the given sliding window (odd).
    Peaks { window: usize },
    /// Every `gap` frames plus the endpoints.
    Fixed { gap: usize },
    /// Seeded uniform draw of `count` key-frames including the endpoints.
    Random { count: usize, seed: u64 },
}

impl SelectionStrategy {
    pub fn select(&self, seq: &Sequence) -> Result<KeyframeSet> {
        match *self {
            SelectionStrategy::Peaks { window } => select_keyframes_from_sequence(seq, window),
            SelectionStrategy::Fixed { gap } => select_fixed_gap(seq.len(), gap),
            SelectionStrategy::Random { count, seed } => {
                select_random_gap(seq.len(), count, seed)
            }
        }
    }

    /// Select from the sequence length alone. The peak strategy needs
    /// pixels and is rejected.
    pub fn select_abstract(&self, t_len: usize) -> Result<KeyframeSet> {
        match *self {
            SelectionStrategy::Peaks { .. } => Err(crate::error::Error::validation(
                "peak selection needs an input sequence, not just a length".to_string(),
            )),
            SelectionStrategy::Fixed { gap } => select_fixed_gap(t_len, gap),
            SelectionStrategy::Random { count, seed } => select_random_gap(t_len, count, seed),
        }
    }
}

/// Everything `synthesize` needs besides the inputs.
#[derive(Debug, Clone, Copy)]
pub struct SynthesisOptions {
    pub strategy: SelectionStrategy,
    /// Downsample exponent: maps are reduced to `1/2^d` per side.
    pub d: u32,
    /// Temporal context length of the generator.
    pub p: usize,
    pub method: InterpolationMethod,
    pub search: SearchParams,
    pub obmc: ObmcParams,
    pub cost_model: CostModel,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions {
            strategy: SelectionStrategy::Peaks { window: 3 },
            d: 1,
            p: 1,
            method: InterpolationMethod::Obmc,
            search: SearchParams::default(),
            obmc: ObmcParams::default(),
            cost_model: CostModel::default(),
        }
    }
}

/// Output of [`synthesize`].
#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub sequence: Sequence,
    pub keys: KeyframeSet,
    pub report: CostReport,
}

/// Run the full pipeline on a semantic-map sequence.
pub fn synthesize(
    semantic: &Sequence,
    backend: &mut dyn GeneratorBackend,
    options: &SynthesisOptions,
    initial: Option<&FrameBuffer>,
) -> Result<SynthesisResult> {
    let keys = options.strategy.select(semantic)?;
    let generated = run_keyframes(semantic, &keys, backend, options.p, options.d, initial)?;
    let sequence = fill_sequence(
        &generated,
        semantic.len(),
        options.method,
        &options.search,
        &options.obmc,
        semantic.frame_rate(),
    )?;
    let report = account_macs(
        semantic.len(),
        &keys,
        semantic.width(),
        semantic.height(),
        backend.macs_per_frame(),
        &options.cost_model,
    )?;
    Ok(SynthesisResult {
        sequence,
        keys,
        report,
    })
}

/// Keep `input`'s own frames at the key indices and re-interpolate the
/// rest; the standard fixture for comparing selection strategies and
/// interpolation methods.
pub fn reconstruct(
    input: &Sequence,
    keys: &KeyframeSet,
    method: InterpolationMethod,
    search: &SearchParams,
    obmc: &ObmcParams,
) -> Result<Sequence> {
    let key_frames: Vec<(usize, FrameBuffer)> = keys
        .indices()
        .iter()
        .map(|&k| (k, input.frame(k).clone()))
        .collect();
    fill_sequence(
        &key_frames,
        input.len(),
        method,
        search,
        obmc,
        input.frame_rate(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{FrameRate, UpsampleMode};
    use crate::generator::OracleBackend;
    use crate::metrics::mse_sequences;
    use crate::synthetic::{random_bursty_sequence, translating_sequence};

    #[test]
    fn synthesize_constant_semantics_gives_constant_video() {
        let f = FrameBuffer::constant(32, 32, 1, 0.5).unwrap();
        let semantic = Sequence::new(vec![f; 9], FrameRate::default()).unwrap();
        let mut backend = OracleBackend::default();
        let result = synthesize(&semantic, &mut backend, &SynthesisOptions::default(), None)
            .unwrap();
        assert_eq!(result.sequence.len(), 9);
        assert_eq!(result.keys.indices(), &[0, 8]);
        for frame in result.sequence.frames() {
            assert!(frame.samples().iter().all(|&v| v == 0.5));
        }
        assert_eq!(result.report.frames_generated, 2);
        assert_eq!(result.report.frames_interpolated, 7);
    }

    #[test]
    fn synthesize_is_deterministic() {
        let semantic = translating_sequence(32, 32, 8, 1.0, 0.0, 5).unwrap();
        let mut b1 = OracleBackend {
            mode: UpsampleMode::Nearest,
            macs_per_frame: 1e9,
        };
        let mut b2 = b1;
        let opts = SynthesisOptions::default();
        let r1 = synthesize(&semantic, &mut b1, &opts, None).unwrap();
        let r2 = synthesize(&semantic, &mut b2, &opts, None).unwrap();
        assert_eq!(r1.sequence, r2.sequence);
        assert_eq!(r1.keys, r2.keys);
        assert_eq!(r1.report, r2.report);
    }

    #[test]
    fn key_frames_pass_through_reconstruction() {
        let (seq, _) = random_bursty_sequence(48, 48, 24, 2, 11).unwrap();
        let keys = SelectionStrategy::Peaks { window: 3 }.select(&seq).unwrap();
        let recon = reconstruct(
            &seq,
            &keys,
            InterpolationMethod::Obmc,
            &SearchParams::default(),
            &ObmcParams::default(),
        )
        .unwrap();
        assert_eq!(recon.len(), seq.len());
        for &k in keys.indices() {
            assert_eq!(recon.frame(k), seq.frame(k), "key {k}");
        }
    }

    #[test]
    fn denser_keys_reconstruct_no_worse() {
        let seq = translating_sequence(48, 48, 13, 2.0, 0.0, 2).unwrap();
        let sparse = SelectionStrategy::Fixed { gap: 6 }.select(&seq).unwrap();
        let dense = SelectionStrategy::Fixed { gap: 2 }.select(&seq).unwrap();
        let mse = |keys: &KeyframeSet| {
            mse_sequences(
                &reconstruct(
                    &seq,
                    keys,
                    InterpolationMethod::Obmc,
                    &SearchParams::default(),
                    &ObmcParams::default(),
                )
                .unwrap(),
                &seq,
            )
            .unwrap()
        };
        assert!(mse(&dense) <= mse(&sparse) + 1e-12);
    }
}
