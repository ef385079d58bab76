//! `maiv` — motion-aware video synthesis pipeline.
//!
//! Subcommands: `select-keyframes`, `synthesize`, `interpolate`,
//! `evaluate`, `budget`. Structured results are JSON, written to a file
//! with `--output`/`--report` or to standard output. Exit codes: 0
//! success, 2 validation/format error, 3 I/O error, 4 backend or protocol
//! error.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use maiv::error::{Error, Result};
use maiv::frame::Sequence;
use maiv::generator::{OracleBackend, SubprocessBackend};
use maiv::io::{detect_format, load_frame, load_sequence, save_sequence, SequenceFormat};
use maiv::keyframe::KeyframeSet;
use maiv::metrics::{
    account_macs, combine_tkd, loss_gtkd, loss_kd, loss_ltkd, loss_skd, mse_sequences,
    psnr_frames, ReferenceExtractor,
};
use maiv::pipeline::{reconstruct, synthesize};

use config::{BackendKind, ConfigOverrides, PipelineConfig};

#[derive(Parser)]
#[command(name = "maiv", version, about = "Motion-aware video synthesis pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pick key-frame timestamps from a semantic-map sequence
    SelectKeyframes(SelectArgs),
    /// Full pipeline: select, generate key-frames, interpolate, save
    Synthesize(SynthesizeArgs),
    /// Re-interpolate a sequence from its own frames at the key indices
    Interpolate(InterpolateArgs),
    /// Distillation losses and reconstruction metrics between two sequences
    Evaluate(EvaluateArgs),
    /// MAC budget for a key-frame plan
    Budget(BudgetArgs),
}

#[derive(Args)]
struct IoArgs {
    /// Input sequence: a raw .maiv file or a PNM directory
    #[arg(long)]
    input: PathBuf,
    /// Input format (raw | pnm-dir); inferred from the path when omitted
    #[arg(long)]
    format: Option<String>,
    /// Configuration file (TOML); flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    io: IoArgs,
    #[command(flatten)]
    overrides: ConfigOverrides,
    /// Write the key-frame JSON here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SynthesizeArgs {
    #[command(flatten)]
    io: IoArgs,
    #[command(flatten)]
    overrides: ConfigOverrides,
    /// Output sequence path
    #[arg(long)]
    output: PathBuf,
    /// Output format (raw | pnm-dir); inferred from the path when omitted
    #[arg(long)]
    output_format: Option<String>,
    /// Write the cost report JSON here instead of stdout
    #[arg(long)]
    report: Option<PathBuf>,
    /// Also write the selected key-frame JSON here
    #[arg(long)]
    keys_out: Option<PathBuf>,
    /// Initial real frame (PGM/PPM) seeding the generator context
    #[arg(long)]
    initial: Option<PathBuf>,
    /// Archive the resolved configuration (TOML) here for reproducibility
    #[arg(long)]
    config_out: Option<PathBuf>,
}

#[derive(Args)]
struct InterpolateArgs {
    #[command(flatten)]
    io: IoArgs,
    #[command(flatten)]
    overrides: ConfigOverrides,
    /// Key-frame JSON produced by select-keyframes; when omitted the
    /// configured strategy runs on the input
    #[arg(long)]
    keys: Option<PathBuf>,
    /// Output sequence path
    #[arg(long)]
    output: PathBuf,
    /// Output format (raw | pnm-dir); inferred from the path when omitted
    #[arg(long)]
    output_format: Option<String>,
    /// Write the reconstruction report JSON here instead of stdout
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Predicted/student sequence
    #[arg(long)]
    pred: PathBuf,
    /// Reference/teacher sequence
    #[arg(long)]
    reference: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Local temporal loss weight
    #[arg(long)]
    alpha: Option<f64>,
    /// Global temporal loss weight
    #[arg(long)]
    beta: Option<f64>,
    /// Spatial loss weight
    #[arg(long)]
    sigma: Option<f64>,
    /// Temporal loss weight
    #[arg(long)]
    gamma: Option<f64>,
    /// Write the metrics JSON here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BudgetArgs {
    /// Sequence length in frames (required unless --input or --keys is given)
    #[arg(long)]
    frames: Option<usize>,
    /// Frame width in pixels
    #[arg(long)]
    width: Option<usize>,
    /// Frame height in pixels
    #[arg(long)]
    height: Option<usize>,
    /// Key-frame JSON; alternative to selecting on --input
    #[arg(long)]
    keys: Option<PathBuf>,
    /// Semantic sequence to select on when no --keys is given
    #[arg(long)]
    input: Option<PathBuf>,
    /// Input format (raw | pnm-dir)
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: ConfigOverrides,
    /// Write the cost report JSON here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::SelectKeyframes(args) => cmd_select(args),
        Command::Synthesize(args) => cmd_synthesize(args),
        Command::Interpolate(args) => cmd_interpolate(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Budget(args) => cmd_budget(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("maiv: {e}");
            ExitCode::from(match e {
                Error::Validation(_) | Error::Format(_) => 2,
                Error::Io { .. } => 3,
                Error::Backend { .. } => 4,
            })
        }
    }
}

fn parse_format(path: &Path, flag: Option<&String>) -> Result<SequenceFormat> {
    match flag {
        Some(s) => s.parse(),
        None => Ok(detect_format(path)),
    }
}

fn load_input(path: &Path, flag: Option<&String>) -> Result<Sequence> {
    load_sequence(path, parse_format(path, flag)?)
}

fn emit(text: &str, path: Option<&PathBuf>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(e, p)),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn cmd_select(args: SelectArgs) -> Result<()> {
    let config = PipelineConfig::resolve(args.io.config.as_ref(), &args.overrides)?;
    let seq = load_input(&args.io.input, args.io.format.as_ref())?;
    let keys = config.selection_strategy()?.select(&seq)?;
    emit(&keys.to_json(), args.output.as_ref())
}

fn cmd_synthesize(args: SynthesizeArgs) -> Result<()> {
    let config = PipelineConfig::resolve(args.io.config.as_ref(), &args.overrides)?;
    if let Some(path) = &args.config_out {
        emit(&config.to_toml(), Some(path))?;
    }
    let semantic = load_input(&args.io.input, args.io.format.as_ref())?;
    let initial = args.initial.as_ref().map(load_frame).transpose()?;
    let options = config.synthesis_options()?;
    let macs = config.generator_macs_per_frame();

    let result = match config.backend {
        BackendKind::Oracle => {
            let mut backend = OracleBackend {
                mode: config.oracle_mode,
                macs_per_frame: macs,
            };
            synthesize(&semantic, &mut backend, &options, initial.as_ref())?
        }
        BackendKind::Subprocess => {
            let cmd = config.backend_cmd.as_deref().ok_or_else(|| {
                Error::validation("subprocess backend needs --backend-cmd".to_string())
            })?;
            let mut backend = SubprocessBackend::launch(cmd, macs)?;
            let result = synthesize(&semantic, &mut backend, &options, initial.as_ref())?;
            backend.finish()?;
            result
        }
    };

    save_sequence(
        &result.sequence,
        &args.output,
        parse_format(&args.output, args.output_format.as_ref())?,
    )?;
    if let Some(path) = &args.keys_out {
        emit(&result.keys.to_json(), Some(path))?;
    }
    emit(&result.report.to_json(), args.report.as_ref())
}

fn cmd_interpolate(args: InterpolateArgs) -> Result<()> {
    let config = PipelineConfig::resolve(args.io.config.as_ref(), &args.overrides)?;
    let seq = load_input(&args.io.input, args.io.format.as_ref())?;
    let keys = match &args.keys {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(e, path))?;
            KeyframeSet::from_json(&text)?
        }
        None => config.selection_strategy()?.select(&seq)?,
    };
    if keys.source_length() != seq.len() {
        return Err(Error::validation(format!(
            "key-frame set is for {} frames, input has {}",
            keys.source_length(),
            seq.len()
        )));
    }
    let recon = reconstruct(
        &seq,
        &keys,
        config.method,
        &config.search_params(),
        &config.obmc_params(),
    )?;
    save_sequence(
        &recon,
        &args.output,
        parse_format(&args.output, args.output_format.as_ref())?,
    )?;
    let mse = mse_sequences(&recon, &seq)?;
    let report = serde_json::json!({
        "method": config.method,
        "keys": keys,
        "mse_vs_input": mse,
        "frames_interpolated": seq.len() - keys.len(),
    });
    emit(&serde_json::to_string_pretty(&report).expect("report serializes"), args.report.as_ref())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(v) = args.alpha {
        config.alpha = v;
    }
    if let Some(v) = args.beta {
        config.beta = v;
    }
    if let Some(v) = args.sigma {
        config.sigma = v;
    }
    if let Some(v) = args.gamma {
        config.gamma = v;
    }
    let weights = config.loss_weights();
    weights.validate()?;

    let pred = load_input(&args.pred, None)?;
    let reference = load_input(&args.reference, None)?;
    let extractor = ReferenceExtractor;

    let mse = mse_sequences(&pred, &reference)?;
    let mut psnr_acc = 0.0;
    for (a, b) in pred.frames().iter().zip(reference.frames()) {
        psnr_acc += psnr_frames(a, b)?;
    }
    let skd = loss_skd(&pred, &reference, &extractor)?;
    let ltkd = loss_ltkd(&pred, &reference, &extractor)?;
    let gtkd = loss_gtkd(&pred, &reference, &extractor)?;
    let tkd = combine_tkd(ltkd, gtkd, &weights);
    let kd = loss_kd(skd, tkd, &weights);

    let report = serde_json::json!({
        "mse": mse,
        "psnr": psnr_acc / pred.len() as f64,
        "loss_skd": skd,
        "loss_ltkd": ltkd,
        "loss_gtkd": gtkd,
        "loss_tkd": tkd,
        "loss_kd": kd,
        "weights": weights,
    });
    emit(&serde_json::to_string_pretty(&report).expect("report serializes"), args.output.as_ref())
}

fn cmd_budget(args: BudgetArgs) -> Result<()> {
    let config = PipelineConfig::resolve(args.config.as_ref(), &args.overrides)?;

    let (keys, dims) = match (&args.keys, &args.input) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(e, path))?;
            (KeyframeSet::from_json(&text)?, None)
        }
        (None, Some(input)) => {
            let seq = load_input(input, args.format.as_ref())?;
            let keys = config.selection_strategy()?.select(&seq)?;
            (keys, Some((seq.width(), seq.height())))
        }
        (None, None) => {
            let frames = args.frames.ok_or_else(|| {
                Error::validation("budget needs --keys, --input, or --frames".to_string())
            })?;
            (config.selection_strategy()?.select_abstract(frames)?, None)
        }
    };

    let t_len = keys.source_length();
    let (width, height) = match (args.width, args.height) {
        (Some(w), Some(h)) => (w, h),
        _ => dims.ok_or_else(|| {
            Error::validation("budget needs --width and --height (or --input)".to_string())
        })?,
    };
    let report = account_macs(
        t_len,
        &keys,
        width,
        height,
        config.generator_macs_per_frame(),
        &config.cost_model(),
    )?;
    emit(&report.to_json(), args.output.as_ref())
}
