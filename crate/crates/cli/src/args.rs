use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "asrfair", version, about = "Augmentation, VTLN and bias scoring for ASR evaluation")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct GlobalArgs {
    /// Pipeline configuration file (TOML)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every random draw; overrides the config file
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Base directory for relative audio paths
    #[arg(long, global = true)]
    pub audio_root: Option<PathBuf>,
    /// More log output (-v info, -vv debug)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Manifest checks
    #[command(subcommand)]
    Corpus(CorpusCmd),
    /// Feature extraction
    #[command(subcommand)]
    Features(FeaturesCmd),
    /// Data augmentation
    #[command(subcommand)]
    Augment(AugmentCmd),
    /// Vocal tract length normalization
    #[command(subcommand)]
    Vtln(VtlnCmd),
    /// Error rates per speaker group from hypothesis files
    Score(ScoreArgs),
    /// Individual and overall bias tables
    BiasReport(BiasArgs),
    /// SVG plots
    #[command(subcommand)]
    Plot(PlotCmd),
    /// Write a synthetic formant corpus (WAVs and manifest)
    SynthCorpus(SynthArgs),
    /// Print the effective configuration
    ShowConfig,
}

#[derive(Subcommand, Debug)]
pub enum CorpusCmd {
    /// Parse a manifest and check that every audio file decodes
    Validate {
        #[arg(long)]
        manifest: PathBuf,
        /// Skip decoding audio
        #[arg(long)]
        no_audio: bool,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Logmel,
    Mfcc,
    Power,
}

#[derive(Subcommand, Debug)]
pub enum FeaturesCmd {
    /// Extract features for every manifest entry into an archive
    Extract {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "logmel")]
        kind: Kind,
        /// Warp assignments TSV; listed utterances are extracted warped
        #[arg(long)]
        warps: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum AugmentCmd {
    /// One resampled copy per speed factor, ids suffixed `#sp<factor>`
    Speed {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Comma-separated factors (default from config: 0.9,1.0,1.1)
        #[arg(long, value_delimiter = ',')]
        factors: Option<Vec<f64>>,
    },
    /// Time warp and masks on a log-mel archive
    Specaug {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum VtlnCmd {
    /// Train a model on the manifest's audio
    Train {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Also write the final training assignments
        #[arg(long)]
        assignments: Option<PathBuf>,
    },
    /// Warp factor per utterance
    Estimate {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract features warped by estimated factors
    Apply {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        warps: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "logmel")]
        kind: Kind,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Word,
    Char,
}

#[derive(Args, Debug)]
pub struct ScoreArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// `utt_id<TAB>hypothesis` lines
    #[arg(long)]
    pub hyp: PathBuf,
    #[arg(long, value_enum)]
    pub unit: Option<Unit>,
    #[arg(long)]
    pub lowercase: bool,
    #[arg(long)]
    pub strip_punct: bool,
    /// Group-score CSV (default: stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Column,
    Table,
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct BiasSource {
    /// Tab-separated WER table
    #[arg(long)]
    pub wer_table: Option<PathBuf>,
    /// Group-score CSV from `score`, as `[augmentation|normalization=]path`; repeatable
    #[arg(long)]
    pub scores: Vec<String>,
}

#[derive(Args, Debug)]
pub struct BiasArgs {
    #[command(flatten)]
    pub source: BiasSource,
    /// Norm style compared with a diverse style, as `DIVERSE=NORM`; repeatable (default HMI=CTS)
    #[arg(long)]
    pub norm_style: Vec<String>,
    /// Full per-cell bias CSV
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Shaded overall-bias table as HTML; a matching CSV is written next to it
    #[arg(long)]
    pub html: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "column")]
    pub shade_scope: Scope,
}

#[derive(Subcommand, Debug)]
pub enum PlotCmd {
    /// Box plot of warp factors per speaker group
    Warps {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        warps: PathBuf,
        #[arg(long, default_value = "Warping factors")]
        title: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Grouped bars of individual bias per speaker group
    Bias {
        #[command(flatten)]
        source: BiasSource,
        #[arg(long)]
        norm_style: Vec<String>,
        /// Only these model labels (comma-separated)
        #[arg(long, value_delimiter = ',')]
        rows: Option<Vec<String>>,
        #[arg(long, default_value = "Bias per speaker group")]
        title: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Utterances per scale
    #[arg(long, default_value_t = 10)]
    pub per_scale: usize,
    /// Normalizing warp factors of the synthetic speakers
    #[arg(long, value_delimiter = ',', default_value = "0.85,1.0,1.15")]
    pub scales: Vec<f64>,
    #[arg(long, default_value_t = 6)]
    pub vowels: usize,
    #[arg(long, default_value_t = 16000)]
    pub rate: u32,
}
