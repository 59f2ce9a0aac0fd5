use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rarity_core::imageio::to_patches;
use rarity_core::imageio::{read_pgm, write_pgm, Image};
use rarity_core::ksvd::learn;
use rarity_core::ksvd::rdct::{read_dictionary, write_dictionary};
use rarity_core::pipeline::{
    enhance, itti_lite, run_synthetic_suite, saliency_map, SyntheticSuite,
};
use rarity_core::synth::AnomalySceneSpec;
use rarity_core::Error;
use tempfile::NamedTempFile;

use crate::args::{Command, ImageIo, PipelineArgs};

/// A failure, classified by the exit status it maps to.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Input(String),
    Contract(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Contract(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Contract(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Contract(_) => Failure::Contract(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn required<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, Failure> {
    path.as_deref()
        .ok_or_else(|| Failure::Usage(format!("missing required flag --{flag}")))
}

fn read_file(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_image(path: &Path) -> Result<Image, Failure> {
    read_pgm(&read_file(path)?).map_err(|e| match e {
        Error::Contract(_) => Failure::from(e),
        _ => Failure::Input(format!("{}: {e}", path.display())),
    })
}

/// Writes through a temporary file in the target directory, renamed into
/// place only once fully written.
fn write_atomic(path: &Path, bytes: &[u8]) -> Outcome {
    let io_err = |e: std::io::Error| Failure::Input(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn image_paths(io: &ImageIo) -> Result<(&Path, &Path), Failure> {
    Ok((required(&io.input, "in")?, required(&io.out, "out")?))
}

pub fn run(command: Command) -> Outcome {
    match command {
        Command::Learn {
            input,
            dict,
            report,
            pipeline,
        } => {
            if print_config(&pipeline) {
                return Ok(());
            }
            let (input, dict_path) = (required(&input, "in")?, required(&dict, "dict")?);
            let cfg = pipeline.config();
            cfg.validate()?;
            let img = read_image(input)?;
            let (patches, _) = to_patches(&img, cfg.block)?;
            let (dict, _, rep) = learn(&patches, &cfg.learn)?;
            write_atomic(dict_path, &write_dictionary(&dict))?;

            let mut text = format!(
                "patches={}\natoms={}\ndim={}\nfinal_psnr={}\n",
                patches.len(),
                dict.len(),
                dict.dim(),
                rep.final_psnr
            );
            for (i, obj) in rep.objective_per_iter.iter().enumerate() {
                text.push_str(&format!("objective_{}={obj}\n", i + 1));
            }
            let replaced: usize = rep.atoms_replaced_per_iter.iter().sum();
            text.push_str(&format!("atoms_replaced={replaced}\n"));
            print!("{text}");
            if let Some(p) = &report {
                write_atomic(p, text.as_bytes())?;
            }
            Ok(())
        }
        Command::Enhance { io, pipeline } => {
            if print_config(&pipeline) {
                return Ok(());
            }
            let (input, out) = image_paths(&io)?;
            let cfg = pipeline.config();
            cfg.validate()?;
            let e = enhance(&read_image(input)?, &cfg)?;
            write_atomic(out, &write_pgm(&e.image, pipeline.maxval.into())?)
        }
        Command::Saliency { io, pipeline } => {
            if print_config(&pipeline) {
                return Ok(());
            }
            let (input, out) = image_paths(&io)?;
            let cfg = pipeline.config();
            cfg.validate()?;
            let map = saliency_map(&read_image(input)?, &cfg)?;
            write_atomic(out, &write_pgm(map.image(), pipeline.maxval.into())?)
        }
        Command::Itti { io, maxval } => {
            let (input, out) = image_paths(&io)?;
            let map = itti_lite(&read_image(input)?)?;
            write_atomic(out, &write_pgm(map.image(), maxval.into())?)
        }
        Command::DictAtlas {
            dict,
            out,
            gap,
            maxval,
        } => {
            let (dict_path, out) = (required(&dict, "dict")?, required(&out, "out")?);
            let bytes = read_file(dict_path)?;
            let d = read_dictionary(&bytes)
                .map_err(|e| Failure::Input(format!("{}: {e}", dict_path.display())))?;
            let atlas = crate::atlas::atlas(d.atoms(), gap)?;
            write_atomic(out, &write_pgm(&atlas, maxval.into())?)
        }
        Command::EvalSynthetic {
            trials,
            size,
            noise,
            no_itti,
            out,
            pipeline,
        } => {
            if print_config(&pipeline) {
                return Ok(());
            }
            let cfg = pipeline.config();
            cfg.validate()?;
            if size == 0 || cfg.block == 0 || !size.is_multiple_of(cfg.block) {
                return Err(Failure::Contract(format!(
                    "scene size {size} must be a positive multiple of the block size {}",
                    cfg.block
                )));
            }
            if !(noise >= 0.0 && noise.is_finite()) {
                return Err(Failure::Contract(format!(
                    "noise must be finite and >= 0, got {noise}"
                )));
            }
            let suite = SyntheticSuite {
                seed: cfg.learn.seed,
                trials,
                scene: AnomalySceneSpec {
                    size,
                    block: cfg.block,
                    noise,
                },
                pipeline: cfg,
                with_itti: !no_itti,
            };
            let text = run_synthetic_suite(&suite)?.to_lines();
            print!("{text}");
            if let Some(p) = &out {
                write_atomic(p, text.as_bytes())?;
            }
            Ok(())
        }
    }
}

fn print_config(p: &PipelineArgs) -> bool {
    if p.print_config {
        print!("{}", p.describe());
    }
    p.print_config
}
