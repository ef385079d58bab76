//! Acceptance suite: one test per criterion, named `criterion_N_*`, each
//! printing a summary line (visible with `--nocapture`).
//!
//! Run with `cargo test -p maiv-cli --test acceptance`.

use std::process::Command;
use std::time::Instant;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use maiv::compensate::{obmc_predict, InterpolationMethod, ObmcParams};
use maiv::frame::{FrameBuffer, Sequence};
use maiv::generator::{run_keyframes, SubprocessBackend};
use maiv::keyframe::{residual_curve, select_fixed_gap, select_keyframes, KeyframeSet};
use maiv::metrics::{
    account_macs, combine_tkd, loss_gtkd, loss_kd, loss_ltkd, loss_skd, loss_tkd, mse_sequences,
    CostModel, LossWeights, ReferenceExtractor,
};
use maiv::motion::{
    compensate_blocks, estimate_epzs, estimate_fullsearch, translated_pair, MotionField,
    SearchParams,
};
use maiv::pipeline::{reconstruct, SelectionStrategy};
use maiv::synthetic::{random_bursty_sequence, rotating_sequence, translating_sequence};

const MAIV_BIN: &str = env!("CARGO_BIN_EXE_maiv");
const ECHO_BIN: &str = env!("CARGO_BIN_EXE_maiv-echo");

/// Smooth strongly textured 64x64 probe with a flat 16-pixel margin
/// aligned to the block grid, so every block has a zero-cost match under
/// any translation up to 8 pixels.
fn margin_probe() -> FrameBuffer {
    FrameBuffer::from_fn(64, 64, |x, y| {
        if !(16..48).contains(&x) || !(16..48).contains(&y) {
            0.5
        } else {
            let u = (x - 16) as f64;
            let v = (y - 16) as f64;
            0.5 + 0.45
                * (u * std::f64::consts::TAU / 32.0).sin()
                * (v * std::f64::consts::TAU / 32.0).sin()
        }
    })
    .unwrap()
}

#[test]
fn criterion_1_obmc_normalization() {
    let start = Instant::now();
    let reference = FrameBuffer::constant(64, 48, 1, 0.5).unwrap();
    let params = ObmcParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut max_dev = 0.0f64;
    for _ in 0..1000 {
        let vectors = (0..4 * 3)
            .map(|_| {
                (
                    (rng.next_u64() % 33) as i32 - 16,
                    (rng.next_u64() % 33) as i32 - 16,
                )
            })
            .collect();
        let field = MotionField {
            block_size: 16,
            grid_w: 4,
            grid_h: 3,
            vectors,
            costs: vec![0.0; 12],
        };
        let out = obmc_predict(&reference, &field, &params).unwrap();
        for &v in out.samples() {
            max_dev = max_dev.max((v - 0.5).abs());
        }
    }
    let elapsed = start.elapsed();
    println!(
        "criterion 1: max deviation {max_dev:.3e} over 1000 random fields in {elapsed:.2?}"
    );
    assert!(max_dev <= 1e-9, "max deviation {max_dev}");
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:.2?}");
}

#[test]
fn criterion_2_pure_translation_exactness() {
    let start = Instant::now();
    let base = margin_probe();
    let params = SearchParams {
        search_range: 8,
        ..SearchParams::default()
    };
    let mut checked_blocks = 0usize;
    for dy in -8..=8 {
        for dx in -8..=8 {
            let (target, reference) = translated_pair(&base, dx, dy);
            let epzs = estimate_epzs(&target, &reference, &params, None).unwrap();
            let full = estimate_fullsearch(&target, &reference, &params).unwrap();
            for b in 0..epzs.block_count() {
                assert_eq!(
                    epzs.costs[b], full.costs[b],
                    "shift ({dx},{dy}) block {b}: epzs {} vs full {}",
                    epzs.costs[b], full.costs[b]
                );
                checked_blocks += 1;
            }
            // Zero residual after plain block compensation on the interior.
            let pred = compensate_blocks(&reference, &epzs).unwrap();
            let mut sad = 0.0;
            for y in 8..56 {
                for x in 8..56 {
                    sad += (pred.get(x, y, 0) - target.get(x, y, 0)).abs();
                }
            }
            assert_eq!(sad, 0.0, "shift ({dx},{dy}): interior SAD {sad}");
        }
    }
    let elapsed = start.elapsed();
    println!(
        "criterion 2: {checked_blocks} blocks cost-equal over 289 shifts in {elapsed:.2?}"
    );
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:.2?}");
}

#[test]
fn criterion_3_interpolation_ordering() {
    let search = SearchParams::default();
    let obmc = ObmcParams::default();
    let mut wins = 0;
    let mut cases = Vec::new();
    // 12 translating textures over mixed velocities and 8 rotating ones.
    let velocities = [
        (1.0, 0.0),
        (2.0, 0.0),
        (0.0, 2.0),
        (1.0, 1.0),
        (3.0, 1.0),
        (2.0, 2.0),
    ];
    for (i, &(vx, vy)) in velocities.iter().enumerate() {
        for seed in 0..2u64 {
            cases.push(translating_sequence(64, 64, 9, vx, vy, 10 * i as u64 + seed).unwrap());
        }
    }
    for seed in 0..8u64 {
        let degrees = 1.0 + 0.25 * seed as f64;
        cases.push(rotating_sequence(64, 64, 9, degrees, 100 + seed).unwrap());
    }
    assert_eq!(cases.len(), 20);

    let keys = select_fixed_gap(9, 4).unwrap();
    for (i, seq) in cases.iter().enumerate() {
        let rec_obmc = reconstruct(seq, &keys, InterpolationMethod::Obmc, &search, &obmc).unwrap();
        let rec_lin =
            reconstruct(seq, &keys, InterpolationMethod::Linear, &search, &obmc).unwrap();
        let mse_obmc = mse_sequences(&rec_obmc, seq).unwrap();
        let mse_lin = mse_sequences(&rec_lin, seq).unwrap();
        if mse_obmc < mse_lin {
            wins += 1;
        } else {
            println!("criterion 3: case {i} obmc {mse_obmc:.3e} vs linear {mse_lin:.3e}");
        }
    }
    println!("criterion 3: OBMC beats linear interpolation in {wins}/20 cases");
    assert!(wins >= 18, "only {wins}/20 wins");
}

#[test]
fn criterion_4_keyframe_strategy_ordering() {
    let search = SearchParams::default();
    let obmc = ObmcParams::default();
    let mut wins = 0;
    let trials = 20u64;
    for trial in 0..trials {
        let n_bursts = 2 + (trial % 2) as usize;
        let (seq, _) = random_bursty_sequence(64, 64, 36, n_bursts, trial).unwrap();
        let peaks = SelectionStrategy::Peaks { window: 3 }.select(&seq).unwrap();
        let budget = peaks.len();

        // Equal budget: random gets it exactly; fixed takes the gap whose
        // key count is closest (ties to the smaller gap, i.e. more keys).
        let random = SelectionStrategy::Random {
            count: budget,
            seed: trial,
        }
        .select(&seq)
        .unwrap();
        let fixed = (1..seq.len())
            .map(|gap| select_fixed_gap(seq.len(), gap).unwrap())
            .min_by_key(|k| (k.len().abs_diff(budget), seq.len() - k.len()))
            .unwrap();

        let mse = |keys: &KeyframeSet| {
            mse_sequences(
                &reconstruct(&seq, keys, InterpolationMethod::Obmc, &search, &obmc).unwrap(),
                &seq,
            )
            .unwrap()
        };
        let m_peaks = mse(&peaks);
        let m_fixed = mse(&fixed);
        let m_random = mse(&random);
        if m_peaks <= m_fixed && m_peaks <= m_random {
            wins += 1;
        } else {
            println!(
                "criterion 4: trial {trial} peaks {m_peaks:.3e} (|K|={budget}) fixed {m_fixed:.3e} (|K|={}) random {m_random:.3e}",
                fixed.len()
            );
        }
    }
    println!("criterion 4: peak selection best in {wins}/{trials} trials");
    assert!(wins * 5 >= trials as usize * 4, "only {wins}/{trials} wins");
}

#[test]
fn criterion_5_window_monotonicity() {
    // The suite's test sequences: burst scenes, translations, a rotation,
    // and a constant sequence.
    let mut sequences: Vec<(String, Sequence)> = Vec::new();
    for seed in 0..6u64 {
        let (seq, _) = random_bursty_sequence(64, 64, 36, 2 + (seed % 2) as usize, seed).unwrap();
        sequences.push((format!("bursty-{seed}"), seq));
    }
    sequences.push((
        "translating-a".into(),
        translating_sequence(64, 64, 24, 1.0, 0.5, 7).unwrap(),
    ));
    sequences.push((
        "translating-b".into(),
        translating_sequence(64, 64, 24, 2.0, 0.0, 8).unwrap(),
    ));
    sequences.push(("rotating".into(), rotating_sequence(64, 64, 24, 1.5, 9).unwrap()));
    sequences.push((
        "constant".into(),
        Sequence::new(
            vec![FrameBuffer::constant(64, 64, 1, 0.4).unwrap(); 24],
            Default::default(),
        )
        .unwrap(),
    ));

    let model = CostModel::default();
    for (name, seq) in &sequences {
        let curve = residual_curve(seq);
        let mut last_keys = usize::MAX;
        let mut last_mean = f64::INFINITY;
        for window in [1, 3, 5, 7, 9] {
            let keys = select_keyframes(&curve, window, seq.len()).unwrap();
            let report =
                account_macs(seq.len(), &keys, seq.width(), seq.height(), 282e9, &model).unwrap();
            assert!(
                keys.len() <= last_keys,
                "{name}: window {window} selected {} keys, previous {last_keys}",
                keys.len()
            );
            assert!(
                report.mean_macs_per_frame <= last_mean,
                "{name}: window {window} mean MACs {} > previous {last_mean}",
                report.mean_macs_per_frame
            );
            last_keys = keys.len();
            last_mean = report.mean_macs_per_frame;
        }
    }
    println!(
        "criterion 5: |keys| and mean MACs non-increasing over windows 1,3,5,7,9 on {} sequences",
        sequences.len()
    );
}

#[test]
fn criterion_6_mac_arithmetic() {
    let model = CostModel::default();
    // One 512x512 interpolated frame: 2*(512/16)^2 EPZS MACs per gap and
    // 5*512^2 OBMC MACs.
    let keys = KeyframeSet::new(vec![0, 2], 3).unwrap();
    let report = account_macs(3, &keys, 512, 512, 0.0, &model).unwrap();
    assert_eq!(report.epzs_macs, 2048.0);
    assert_eq!(report.obmc_macs, 1_310_720.0);

    // 282 G-MACs per key-frame, 1 key per 8 frames: the generator's mean
    // cost per frame is exactly 282/8 = 35.25 G, an 8x saving, and the
    // interpolation overhead stays under 0.002 G per frame.
    let keys = KeyframeSet::new((0..64).step_by(9).collect(), 64).unwrap();
    assert_eq!(keys.len(), 8);
    let report = account_macs(64, &keys, 512, 512, 282e9, &model).unwrap();
    let mean_generator_g = report.generator_macs / 64.0 / 1e9;
    assert_eq!(mean_generator_g, 35.25);
    assert_eq!(282.0 / mean_generator_g, 8.0);
    let interp_overhead_g = (report.epzs_macs + report.obmc_macs) / 64.0 / 1e9;
    assert!(interp_overhead_g < 0.002, "overhead {interp_overhead_g} G");
    println!(
        "criterion 6: 2048 EPZS MACs/gap, 1310720 OBMC MACs/frame, mean generator {mean_generator_g} G (8x saving), overhead {interp_overhead_g:.5} G"
    );
}

#[test]
fn criterion_7_loss_identities() {
    let weights = LossWeights::default();
    let extractor = ReferenceExtractor;
    let seq = translating_sequence(32, 32, 6, 1.0, 0.0, 3).unwrap();
    assert_eq!(loss_skd(&seq, &seq, &extractor).unwrap(), 0.0);
    assert_eq!(loss_ltkd(&seq, &seq, &extractor).unwrap(), 0.0);
    assert_eq!(loss_gtkd(&seq, &seq, &extractor).unwrap(), 0.0);
    assert_eq!(loss_tkd(&seq, &seq, &weights, &extractor).unwrap(), 0.0);
    assert_eq!(loss_kd(0.0, 0.0, &weights), 0.0);

    let tkd = combine_tkd(0.1, 0.02, &weights);
    assert!((tkd - 0.5).abs() < 1e-15, "tkd {tkd}");
    let kd = loss_kd(0.3, 0.2, &weights);
    assert!((kd - 0.7).abs() < 1e-15, "kd {kd}");
    println!("criterion 7: zero on identical inputs; tkd(0.1,0.02)={tkd}, kd(0.3,0.2)={kd}");
}

#[test]
fn criterion_8_end_to_end_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("semantic.maiv");
    let (seq, _) = random_bursty_sequence(64, 64, 24, 2, 42).unwrap();
    maiv::io::save_sequence(&seq, &input, maiv::io::SequenceFormat::Raw).unwrap();

    let run = |tag: &str| {
        let out = dir.path().join(format!("out-{tag}.maiv"));
        let report = dir.path().join(format!("report-{tag}.json"));
        let status = Command::new(MAIV_BIN)
            .args(["synthesize", "--input"])
            .arg(&input)
            .arg("--output")
            .arg(&out)
            .arg("--report")
            .arg(&report)
            .status()
            .unwrap();
        assert!(status.success());
        (std::fs::read(out).unwrap(), std::fs::read(report).unwrap())
    };
    let (video1, report1) = run("a");
    let (video2, report2) = run("b");
    assert_eq!(video1, video2, "output videos differ between runs");
    assert_eq!(report1, report2, "cost reports differ between runs");
    println!(
        "criterion 8: two runs produced bit-identical video ({} bytes) and report ({} bytes)",
        video1.len(),
        report1.len()
    );
}

#[test]
fn criterion_9_subprocess_protocol() {
    // 100 frames at 256x256 through the echo backend, zero protocol errors.
    let frames: Vec<FrameBuffer> = (0..100)
        .map(|t| {
            FrameBuffer::from_fn(256, 256, |x, y| {
                (((x / 4 + y / 4 + t) % 251) as f64) / 250.0
            })
            .unwrap()
        })
        .collect();
    let seq = Sequence::new(frames, Default::default()).unwrap();
    let all_keys = KeyframeSet::new((0..100).collect(), 100).unwrap();

    let mut backend = SubprocessBackend::launch(ECHO_BIN, 0.0).unwrap();
    let generated = run_keyframes(&seq, &all_keys, &mut backend, 1, 1, None).unwrap();
    backend.finish().unwrap();
    assert_eq!(generated.len(), 100);
    for (k, frame) in &generated {
        assert_eq!((frame.width(), frame.height()), (256, 256), "frame {k}");
    }

    // A child dying mid-stream surfaces the failing frame index...
    let mut crashing =
        SubprocessBackend::launch(&format!("{ECHO_BIN} --fail-after 50"), 0.0).unwrap();
    let err = run_keyframes(&seq, &all_keys, &mut crashing, 1, 1, None).unwrap_err();
    match &err {
        maiv::Error::Backend { frame_index, .. } => assert_eq!(*frame_index, Some(50)),
        other => panic!("expected backend error, got {other:?}"),
    }
    drop(crashing);

    // ...and exits the CLI with code 4, naming the frame.
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("sem.maiv");
    let small: Vec<FrameBuffer> = (0..12)
        .map(|t| FrameBuffer::from_fn(32, 32, |x, _| (((x + t) % 100) as f64) / 99.0).unwrap())
        .collect();
    maiv::io::save_sequence(
        &Sequence::new(small, Default::default()).unwrap(),
        &input,
        maiv::io::SequenceFormat::Raw,
    )
    .unwrap();
    let output = Command::new(MAIV_BIN)
        .args(["synthesize", "--input"])
        .arg(&input)
        .arg("--output")
        .arg(dir.path().join("out.maiv"))
        .args(["--strategy", "fixed", "--gap", "1"])
        .args(["--backend", "subprocess"])
        .args(["--backend-cmd", &format!("{ECHO_BIN} --fail-after 5")])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(4), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("frame 5"), "stderr: {stderr}");
    println!("criterion 9: 100-frame echo round-trip clean; crash at frame 50 reported, CLI exit 4 naming frame 5");
}
