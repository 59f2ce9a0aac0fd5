use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rarity_core::coder::{CoderConfig, CoderMode};
use rarity_core::ksvd::{InitStrategy, LearnConfig, UnusedPolicy};
use rarity_core::pipeline::PipelineConfig;
use rarity_core::rarity::{RarityKind, RarityMeasure, TransformKind, TransformSpec};

/// Rarity-driven sparse-coding enhancement and saliency for grayscale images.
#[derive(Debug, Parser)]
#[command(name = "rarity", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Learn a dictionary on an image's blocks and write it as RDCT.
    Learn {
        #[arg(long = "in", value_name = "PGM")]
        input: Option<PathBuf>,
        #[arg(long, value_name = "RDCT")]
        dict: Option<PathBuf>,
        /// Also write the report here (it always goes to stdout).
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Reconstruct an image from rarity-reweighted atoms.
    Enhance {
        #[command(flatten)]
        io: ImageIo,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Rarity saliency map.
    Saliency {
        #[command(flatten)]
        io: ImageIo,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Center-surround baseline saliency map.
    Itti {
        #[command(flatten)]
        io: ImageIo,
        #[arg(long, default_value_t = 255, value_parser = clap::value_parser!(u16).range(1..))]
        maxval: u16,
    },
    /// Tile the atoms of an RDCT dictionary into one PGM.
    DictAtlas {
        #[arg(long, value_name = "RDCT")]
        dict: Option<PathBuf>,
        #[arg(long, value_name = "PGM")]
        out: Option<PathBuf>,
        /// Pixels of black between tiles.
        #[arg(long, default_value_t = 1)]
        gap: usize,
        #[arg(long, default_value_t = 255, value_parser = clap::value_parser!(u16).range(1..))]
        maxval: u16,
    },
    /// Seeded anomaly-detection benchmark; prints `name=value` metrics.
    EvalSynthetic {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Scene side in pixels.
        #[arg(long, default_value_t = 128)]
        size: usize,
        /// Additive Gaussian pixel noise.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        noise: f64,
        /// Skip the baseline comparison.
        #[arg(long)]
        no_itti: bool,
        /// Also write the metrics here.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
}

#[derive(Debug, Args)]
pub struct ImageIo {
    #[arg(long = "in", value_name = "PGM")]
    pub input: Option<PathBuf>,
    #[arg(long, value_name = "PGM")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CoderArg {
    Omp,
    Ista,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InitArg {
    Sample,
    Gaussian,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum UnusedArg {
    WorstSignal,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MeasureArg {
    Count,
    Mass,
    Neglog,
    Squared,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TransformArg {
    Identity,
    Sigmoid,
    Gamma,
    Affine,
}

/// One flag per pipeline setting; defaults match `PipelineConfig::default()`.
#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Block side in pixels.
    #[arg(long, default_value_t = 8)]
    pub block: usize,
    /// Dictionary size.
    #[arg(long = "K", default_value_t = 256)]
    pub atoms: usize,
    /// OMP sparsity.
    #[arg(long = "T", default_value_t = 8)]
    pub sparsity: usize,
    #[arg(long, default_value_t = 20)]
    pub iters: usize,
    #[arg(long, value_enum, default_value_t = CoderArg::Omp)]
    pub coder: CoderArg,
    /// OMP early-stop threshold on the residual norm.
    #[arg(long, default_value_t = 1e-6, allow_hyphen_values = true)]
    pub residual_tol: f64,
    /// ISTA l1 weight.
    #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
    pub alpha: f64,
    /// ISTA iteration cap.
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    /// ISTA relative objective tolerance.
    #[arg(long, default_value_t = 1e-6, allow_hyphen_values = true)]
    pub obj_tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = InitArg::Sample)]
    pub init: InitArg,
    #[arg(long, value_enum, default_value_t = UnusedArg::WorstSignal)]
    pub unused: UnusedArg,
    #[arg(long, value_enum, default_value_t = MeasureArg::Count)]
    pub measure: MeasureArg,
    /// Rarity scale constant S (default: number of patches).
    #[arg(long, allow_hyphen_values = true)]
    pub scale: Option<f64>,
    /// Smoothing for the neglog measure.
    #[arg(long, default_value_t = 1e-12, allow_hyphen_values = true)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value_t = TransformArg::Sigmoid)]
    pub transform: TransformArg,
    #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
    pub sigmoid_a: f64,
    #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
    pub sigmoid_b: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub affine_scale: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub affine_offset: f64,
    /// Remove each block's mean before learning.
    #[arg(long)]
    pub dc_remove: bool,
    /// Blur applied to blockwise saliency, in pixels.
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    pub blur_sigma: f64,
    /// Maximum sample value of written PGMs.
    #[arg(long, default_value_t = 255, value_parser = clap::value_parser!(u16).range(1..))]
    pub maxval: u16,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    pub print_config: bool,
}

impl PipelineArgs {
    pub fn config(&self) -> PipelineConfig {
        PipelineConfig {
            block: self.block,
            learn: LearnConfig {
                atoms: self.atoms,
                iters: self.iters,
                coder: CoderConfig {
                    mode: match self.coder {
                        CoderArg::Omp => CoderMode::Omp,
                        CoderArg::Ista => CoderMode::Ista,
                    },
                    max_atoms: self.sparsity,
                    residual_tol: self.residual_tol,
                    alpha: self.alpha,
                    max_iter: self.max_iter,
                    obj_tol: self.obj_tol,
                },
                seed: self.seed,
                unused_policy: match self.unused {
                    UnusedArg::WorstSignal => UnusedPolicy::ReplaceWithWorstSignal,
                },
                init: match self.init {
                    InitArg::Sample => InitStrategy::SamplePatches,
                    InitArg::Gaussian => InitStrategy::RandomGaussian,
                },
            },
            measure: RarityMeasure {
                kind: match self.measure {
                    MeasureArg::Count => RarityKind::CountFraction,
                    MeasureArg::Mass => RarityKind::CoeffMass,
                    MeasureArg::Neglog => RarityKind::NegLogCount,
                    MeasureArg::Squared => RarityKind::SquaredCount,
                },
                scale: self.scale,
                epsilon: self.epsilon,
            },
            transform: TransformSpec {
                kind: match self.transform {
                    TransformArg::Identity => TransformKind::Identity,
                    TransformArg::Sigmoid => TransformKind::Sigmoid,
                    TransformArg::Gamma => TransformKind::Gamma,
                    TransformArg::Affine => TransformKind::Affine,
                },
                slope: self.sigmoid_a,
                center: self.sigmoid_b,
                gamma: self.gamma,
                scale: self.affine_scale,
                offset: self.affine_offset,
            },
            dc_remove: self.dc_remove,
            saliency_blur_sigma: self.blur_sigma,
        }
    }

    /// The resolved configuration as `name=value` lines, named after the flags.
    pub fn describe(&self) -> String {
        let c = self.config();
        let l = &c.learn;
        let lines = [
            ("block", c.block.to_string()),
            ("K", l.atoms.to_string()),
            ("T", l.coder.max_atoms.to_string()),
            ("iters", l.iters.to_string()),
            ("coder", name(self.coder)),
            ("residual-tol", l.coder.residual_tol.to_string()),
            ("alpha", l.coder.alpha.to_string()),
            ("max-iter", l.coder.max_iter.to_string()),
            ("obj-tol", l.coder.obj_tol.to_string()),
            ("seed", l.seed.to_string()),
            ("init", name(self.init)),
            ("unused", name(self.unused)),
            ("measure", name(self.measure)),
            (
                "scale",
                c.measure
                    .scale
                    .map_or_else(|| "N".to_string(), |s| s.to_string()),
            ),
            ("epsilon", c.measure.epsilon.to_string()),
            ("transform", name(self.transform)),
            ("sigmoid-a", c.transform.slope.to_string()),
            ("sigmoid-b", c.transform.center.to_string()),
            ("gamma", c.transform.gamma.to_string()),
            ("affine-scale", c.transform.scale.to_string()),
            ("affine-offset", c.transform.offset.to_string()),
            ("dc-remove", c.dc_remove.to_string()),
            ("blur-sigma", c.saliency_blur_sigma.to_string()),
            ("maxval", self.maxval.to_string()),
        ];
        lines.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}

fn name<T: ValueEnum>(v: T) -> String {
    v.to_possible_value()
        .map(|p| p.get_name().to_string())
        .unwrap_or_default()
}
