//! Pipeline configuration: a flat TOML file plus flag overrides, flags
//! winning. The file round-trips losslessly so experiment configs can be
//! archived next to their outputs.

use std::path::{Path, PathBuf};

use maiv::compensate::{InterpolationMethod, ObmcParams, ObmcWindow};
use maiv::error::{Error, Result};
use maiv::frame::UpsampleMode;
use maiv::metrics::{CostModel, LossWeights};
use maiv::motion::SearchParams;
use maiv::pipeline::{SelectionStrategy, SynthesisOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Peaks,
    Fixed,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Oracle,
    Subprocess,
}

fn default_window() -> usize {
    3
}
fn default_d() -> u32 {
    1
}
fn default_p() -> usize {
    1
}
fn default_strategy() -> StrategyKind {
    StrategyKind::Peaks
}
fn default_seed() -> u64 {
    0
}
fn default_method() -> InterpolationMethod {
    InterpolationMethod::Obmc
}
fn default_backend() -> BackendKind {
    BackendKind::Oracle
}
fn default_oracle_mode() -> UpsampleMode {
    UpsampleMode::Nearest
}
fn default_block_size() -> usize {
    16
}
fn default_search_range() -> i32 {
    16
}
fn default_early_exit() -> f64 {
    1.0 / 255.0
}
fn default_generator_gmacs() -> f64 {
    282.0
}
fn default_epzs_macs() -> f64 {
    2.0
}
fn default_obmc_macs() -> f64 {
    5.0
}

/// Serialized experiment configuration. Every field has a default, so an
/// empty file (or none at all) is the reference setup.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub window: usize,
    pub d: u32,
    pub p: usize,
    pub strategy: StrategyKind,
    /// Interval for the fixed strategy; required when selected.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<usize>,
    /// Key-frame count for the random strategy; required when selected.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    pub seed: u64,
    pub method: InterpolationMethod,
    pub backend: BackendKind,
    /// Command line of the external generator (subprocess backend).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backend_cmd: Option<String>,
    pub oracle_mode: UpsampleMode,
    pub block_size: usize,
    pub search_range: i32,
    pub early_exit_threshold: f64,
    /// Declared generator cost per key-frame, in G-MACs.
    pub generator_gmacs: f64,
    pub epzs_macs_per_patch: f64,
    pub obmc_macs_per_pixel: f64,
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    pub gamma: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let w = LossWeights::default();
        PipelineConfig {
            window: default_window(),
            d: default_d(),
            p: default_p(),
            strategy: default_strategy(),
            gap: None,
            count: None,
            seed: default_seed(),
            method: default_method(),
            backend: default_backend(),
            backend_cmd: None,
            oracle_mode: default_oracle_mode(),
            block_size: default_block_size(),
            search_range: default_search_range(),
            early_exit_threshold: default_early_exit(),
            generator_gmacs: default_generator_gmacs(),
            epzs_macs_per_patch: default_epzs_macs(),
            obmc_macs_per_pixel: default_obmc_macs(),
            alpha: w.alpha,
            beta: w.beta,
            sigma: w.sigma,
            gamma: w.gamma,
        }
    }
}

/// Flag-level overrides; any present value wins over the file.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct ConfigOverrides {
    /// Sliding window for peak selection (odd)
    #[arg(long)]
    pub window: Option<usize>,
    /// Downsample exponent: maps shrink to 1/2^d per side
    #[arg(long)]
    pub d: Option<u32>,
    /// Generator temporal context length
    #[arg(long)]
    pub p: Option<usize>,
    /// Key-frame selection strategy
    #[arg(long, value_enum)]
    pub strategy: Option<StrategyKind>,
    /// Key-frame interval (fixed strategy)
    #[arg(long)]
    pub gap: Option<usize>,
    /// Key-frame count (random strategy)
    #[arg(long)]
    pub count: Option<usize>,
    /// RNG seed (random strategy)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Interpolation method
    #[arg(long, value_parser = parse_method)]
    pub method: Option<InterpolationMethod>,
    /// Generator backend
    #[arg(long, value_enum)]
    pub backend: Option<BackendKind>,
    /// Command line of the external generator
    #[arg(long)]
    pub backend_cmd: Option<String>,
    /// Oracle upsampling mode: nearest or bilinear
    #[arg(long, value_parser = parse_upsample)]
    pub oracle_mode: Option<UpsampleMode>,
    /// Motion block size in pixels
    #[arg(long)]
    pub block_size: Option<usize>,
    /// Motion search range in pixels
    #[arg(long)]
    pub search_range: Option<i32>,
    /// Early-exit SAD per pixel
    #[arg(long)]
    pub early_exit_threshold: Option<f64>,
    /// Declared generator cost per key-frame in G-MACs
    #[arg(long)]
    pub generator_gmacs: Option<f64>,
}

fn parse_method(s: &str) -> std::result::Result<InterpolationMethod, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_upsample(s: &str) -> std::result::Result<UpsampleMode, String> {
    match s {
        "nearest" => Ok(UpsampleMode::Nearest),
        "bilinear" => Ok(UpsampleMode::Bilinear),
        other => Err(format!("unknown oracle mode {other:?}")),
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(e, path))?;
        toml::from_str(&text).map_err(|e| Error::format(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Start from `path` (or defaults when absent) and apply flag overrides.
    pub fn resolve(path: Option<&PathBuf>, overrides: &ConfigOverrides) -> Result<Self> {
        let mut config = match path {
            Some(p) => PipelineConfig::load(p)?,
            None => PipelineConfig::default(),
        };
        config.apply(overrides);
        Ok(config)
    }

    pub fn apply(&mut self, o: &ConfigOverrides) {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = o.$field.clone() { self.$field = v; })*
            };
        }
        take!(
            window,
            d,
            p,
            strategy,
            seed,
            method,
            backend,
            oracle_mode,
            block_size,
            search_range,
            early_exit_threshold,
            generator_gmacs
        );
        if o.gap.is_some() {
            self.gap = o.gap;
        }
        if o.count.is_some() {
            self.count = o.count;
        }
        if o.backend_cmd.is_some() {
            self.backend_cmd = o.backend_cmd.clone();
        }
    }

    pub fn selection_strategy(&self) -> Result<SelectionStrategy> {
        Ok(match self.strategy {
            StrategyKind::Peaks => SelectionStrategy::Peaks {
                window: self.window,
            },
            StrategyKind::Fixed => SelectionStrategy::Fixed {
                gap: self.gap.ok_or_else(|| {
                    Error::validation("fixed strategy needs --gap".to_string())
                })?,
            },
            StrategyKind::Random => SelectionStrategy::Random {
                count: self.count.ok_or_else(|| {
                    Error::validation("random strategy needs --count".to_string())
                })?,
                seed: self.seed,
            },
        })
    }

    pub fn search_params(&self) -> SearchParams {
        SearchParams {
            block_size: self.block_size,
            search_range: self.search_range,
            early_exit_threshold: self.early_exit_threshold,
        }
    }

    pub fn obmc_params(&self) -> ObmcParams {
        ObmcParams {
            block_size: self.block_size,
            window: ObmcWindow::Bilinear,
        }
    }

    pub fn cost_model(&self) -> CostModel {
        CostModel {
            epzs_macs_per_patch: self.epzs_macs_per_patch,
            obmc_macs_per_pixel: self.obmc_macs_per_pixel,
            block_size: self.block_size,
        }
    }

    pub fn loss_weights(&self) -> LossWeights {
        LossWeights {
            alpha: self.alpha,
            beta: self.beta,
            sigma: self.sigma,
            gamma: self.gamma,
        }
    }

    pub fn generator_macs_per_frame(&self) -> f64 {
        self.generator_gmacs * 1e9
    }

    pub fn synthesis_options(&self) -> Result<SynthesisOptions> {
        Ok(SynthesisOptions {
            strategy: self.selection_strategy()?,
            d: self.d,
            p: self.p,
            method: self.method,
            search: self.search_params(),
            obmc: self.obmc_params(),
            cost_model: self.cost_model(),
        })
    }
}
