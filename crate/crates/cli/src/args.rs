use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use keystep_core::bmc2::BootstrapVariant;
use keystep_core::eval::Baseline;
use keystep_core::keysteps::ClusteringAlgorithm;
use serde::de::DeserializeOwned;

use crate::config::{FeatureSource, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "keystep", version, about = "Multi-cue temporal representation learning and key-step extraction")]
#[command(arg_required_else_help = true, args_override_self = true)]
pub struct Cli {
    /// TOML run configuration; flags take precedence over it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Print the fully resolved configuration as TOML and exit.
    #[arg(long, global = true)]
    pub print_config: bool,
    /// Worker threads (default: $KEYSTEP_THREADS, else all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// More log output on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    /// Only log errors.
    #[arg(short, long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic procedural dataset.
    Synth(SynthArgs),
    /// Train the temporal encoders.
    Train(TrainArgs),
    /// Extract key steps for every video.
    Extract(ExtractArgs),
    /// Score features against ground truth.
    Eval(EvalArgs),
}

/// Parses a lowercase/snake_case enum name through its serde representation.
fn serde_name<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_owned())).map_err(|e| e.to_string())
}

fn bootstrap_variant(s: &str) -> Result<BootstrapVariant, String> {
    serde_name(s).map_err(|_| format!("unknown variant {s:?}; expected union_pos_neg, union_neg_only, sampled_only or none"))
}

fn baseline(s: &str) -> Result<Baseline, String> {
    s.parse().map_err(|e: keystep_core::Error| e.to_string())
}

fn clustering(s: &str) -> Result<ClusteringAlgorithm, String> {
    s.parse().map_err(|e: keystep_core::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub videos: Option<usize>,
    /// Number of distinct key steps.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Frames per video.
    #[arg(long)]
    pub frames: Option<usize>,
    #[arg(long)]
    pub modalities: Option<usize>,
    /// Feature dimension per modality (comma separated, or one for all).
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    /// Fraction of frames that are background.
    #[arg(long)]
    pub background: Option<f64>,
    /// Probability of a recurring step per video.
    #[arg(long)]
    pub repeat: Option<f64>,
    /// Noise standard deviation per modality (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub noise: Option<Vec<f64>>,
    #[arg(long)]
    pub fps: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Output directory for model.ckpt, history.json and timing.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Chunks sampled per video (N).
    #[arg(long)]
    pub chunks: Option<usize>,
    /// Temporal extent of a sampled sequence as a fraction of the video.
    #[arg(long)]
    pub extent: Option<f64>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Epoch from which the learning rate is divided by ten.
    #[arg(long)]
    pub lr_drop: Option<usize>,
    /// Positive window half-width in seconds.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub margin: Option<f64>,
    #[arg(long, value_parser = bootstrap_variant)]
    pub bootstrap: Option<BootstrapVariant>,
    /// Modalities to train on (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub modalities: Option<Vec<String>>,
    #[arg(long)]
    pub dropout: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sequential batches; artifacts become byte-reproducible.
    #[arg(long)]
    pub deterministic: bool,
    /// Continue from <out>/model.ckpt.
    #[arg(long)]
    pub resume: bool,
    /// Check gradients against finite differences before training; abort
    /// when the relative error exceeds 1e-3.
    #[arg(long)]
    pub grad_check: bool,
    /// Also write a checkpoint every N epochs.
    #[arg(long, default_value_t = 0)]
    pub save_every: usize,
}

#[derive(Debug, Args)]
pub struct InferenceArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Number of clusters (K).
    #[arg(short = 'K', long = "clusters")]
    pub clusters: Option<usize>,
    /// Background rejection ratio.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Largest in-segment gap in seconds.
    #[arg(long)]
    pub gamma_split: Option<f64>,
    #[arg(long, value_parser = clustering)]
    pub clustering: Option<ClusteringAlgorithm>,
    /// k-means restarts.
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Modalities encoded and concatenated at inference (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub inference_modalities: Option<Vec<String>>,
    #[arg(long, value_enum)]
    pub features: Option<FeatureSource>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[command(flatten)]
    pub inference: InferenceArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub inference: InferenceArgs,
    /// Baselines scored next to the features (comma separated).
    #[arg(long, value_delimiter = ',', value_parser = baseline)]
    pub baselines: Option<Vec<Baseline>>,
    /// Label fractions for the phase probe (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub fractions: Option<Vec<f64>>,
    /// Score every n-th frame only.
    #[arg(long)]
    pub subsample: Option<usize>,
    /// Static HTML report.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Score table as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn set_opt<T>(slot: &mut Option<T>, value: Option<T>) {
    if value.is_some() {
        *slot = value;
    }
}

impl SynthArgs {
    pub fn apply(&self, cfg: &mut RunConfig) {
        let s = &mut cfg.synth;
        set(&mut s.num_videos, self.videos);
        set(&mut s.num_steps, self.steps);
        set(&mut s.frames_per_video, self.frames);
        set(&mut s.modalities, self.modalities);
        set(&mut s.dims, self.dims.clone());
        set(&mut s.background_fraction, self.background);
        set(&mut s.repeat_probability, self.repeat);
        set(&mut s.cue_noise, self.noise.clone());
        set(&mut s.fps, self.fps);
        set(&mut s.seed, self.seed);
        set_opt(&mut cfg.paths.out, self.out.clone());
    }
}

impl TrainArgs {
    pub fn apply(&self, cfg: &mut RunConfig) {
        let t = &mut cfg.train;
        set(&mut t.epochs, self.epochs);
        set(&mut t.batch_size, self.batch_size);
        set(&mut t.num_chunks, self.chunks);
        set(&mut t.temporal_extent, self.extent);
        set(&mut t.learning_rate, self.lr);
        set_opt(&mut t.lr_drop_epoch, self.lr_drop);
        set(&mut t.loss.sigma, self.sigma);
        set(&mut t.loss.margin, self.margin);
        set(&mut t.loss.bootstrap_variant, self.bootstrap);
        set_opt(&mut t.modalities, self.modalities.clone());
        set(&mut t.encoder.dropout, self.dropout);
        set(&mut t.seed, self.seed);
        if self.deterministic {
            t.deterministic = true;
        }
        set_opt(&mut cfg.paths.manifest, self.manifest.clone());
        set_opt(&mut cfg.paths.out, self.out.clone());
    }
}

impl InferenceArgs {
    pub fn apply(&self, cfg: &mut RunConfig) {
        let e = &mut cfg.extract;
        set(&mut e.num_clusters, self.clusters);
        set(&mut e.background_ratio, self.alpha);
        set(&mut e.gamma_split, self.gamma_split);
        set(&mut e.clustering, self.clustering);
        set(&mut e.kmeans.restarts, self.restarts);
        set(&mut e.seed, self.seed);
        set(&mut cfg.eval.seed, self.seed);
        set_opt(&mut cfg.inference.modalities, self.inference_modalities.clone());
        set(&mut cfg.inference.features, self.features);
        set_opt(&mut cfg.paths.manifest, self.manifest.clone());
        set_opt(&mut cfg.paths.checkpoint, self.checkpoint.clone());
        set_opt(&mut cfg.paths.out, self.out.clone());
    }
}

impl EvalArgs {
    pub fn apply(&self, cfg: &mut RunConfig) {
        self.inference.apply(cfg);
        set(&mut cfg.eval.baselines, self.baselines.clone());
        set(&mut cfg.eval.fractions, self.fractions.clone());
        set(&mut cfg.eval.subsample, self.subsample);
        set_opt(&mut cfg.paths.report, self.report.clone());
        set_opt(&mut cfg.paths.csv, self.csv.clone());
    }
}

impl Cli {
    /// Defaults, overlaid by the config file, overlaid by flags.
    pub fn resolve(&self) -> keystep_core::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        set_opt(&mut cfg.threads, self.threads);
        match &self.command {
            Some(Command::Synth(a)) => a.apply(&mut cfg),
            Some(Command::Train(a)) => a.apply(&mut cfg),
            Some(Command::Extract(a)) => a.inference.apply(&mut cfg),
            Some(Command::Eval(a)) => a.apply(&mut cfg),
            None => {}
        }
        Ok(cfg)
    }
}
