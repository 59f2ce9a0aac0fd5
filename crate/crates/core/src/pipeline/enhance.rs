use nalgebra::DMatrix;

use super::PipelineConfig;
use crate::coder::{reconstruct_with, Dictionary, SparseCodes};
use crate::imageio::{from_patches, to_patches, Image, PatchGrid, PatchMatrix};
use crate::ksvd::{learn, LearnReport};
use crate::rarity::{activation_stats, rarity, reweight_dictionary, transform, RarityVector};
use crate::Result;

/// A dictionary and sparse codes learned on one image's blocks.
#[derive(Debug, Clone)]
pub struct ImageModel {
    pub grid: PatchGrid,
    pub dictionary: Dictionary,
    pub codes: SparseCodes,
    /// Per-patch means removed before learning, when DC removal is on.
    pub means: Option<Vec<f64>>,
    pub report: LearnReport,
}

impl ImageModel {
    /// Rebuilds an image from `atoms · X`, restoring patch means if they
    /// were removed.
    pub fn reconstruct_with(&self, atoms: &DMatrix<f64>) -> Result<Image> {
        let mut patches = reconstruct_with(atoms, &self.codes)?.into_matrix();
        if let Some(means) = &self.means {
            for (mut col, &m) in patches.column_iter_mut().zip(means) {
                col.add_scalar_mut(m);
            }
        }
        from_patches(&PatchMatrix::new(patches), &self.grid)
    }

    /// `from_patches(D·X)`: the unweighted reconstruction.
    pub fn plain_reconstruction(&self) -> Result<Image> {
        self.reconstruct_with(self.dictionary.atoms())
    }
}

/// Tiles `img` into blocks and learns a dictionary on them.
pub fn fit(img: &Image, cfg: &PipelineConfig) -> Result<ImageModel> {
    cfg.validate()?;
    let (patches, grid) = to_patches(img, cfg.block)?;
    let (patches, means) = if cfg.dc_remove {
        let mut m = patches.into_matrix();
        let mut means = Vec::with_capacity(m.ncols());
        for mut col in m.column_iter_mut() {
            let mean = col.mean();
            col.add_scalar_mut(-mean);
            means.push(mean);
        }
        (PatchMatrix::new(m), Some(means))
    } else {
        (patches, None)
    };
    let (dictionary, codes, report) = learn(&patches, &cfg.learn)?;
    Ok(ImageModel {
        grid,
        dictionary,
        codes,
        means,
        report,
    })
}

/// Result of [`enhance`].
#[derive(Debug, Clone)]
pub struct Enhancement {
    /// `from_patches(D̃·X)`.
    pub image: Image,
    /// `from_patches(D·X)`, for comparison.
    pub plain: Image,
    pub model: ImageModel,
    /// Atom rarity `R`.
    pub rarity: RarityVector,
    /// Transformed rarity `R̃ = f(R)`, the atom weights.
    pub weights: RarityVector,
}

impl Enhancement {
    pub fn dictionary(&self) -> &Dictionary {
        &self.model.dictionary
    }

    pub fn codes(&self) -> &SparseCodes {
        &self.model.codes
    }
}

/// Rarity-driven enhancement.
///
/// Learns `(D, X)` on the image blocks, scores atom rarity from `X`, maps
/// it through the configured transform to weights `R̃`, and reconstructs
/// the image from `D·diag(R̃)·X`.
pub fn enhance(img: &Image, cfg: &PipelineConfig) -> Result<Enhancement> {
    let model = fit(img, cfg)?;
    let r = rarity(&activation_stats(&model.codes), &cfg.measure)?;
    let weights = transform(&r, &cfg.transform)?;
    let weighted = reweight_dictionary(&model.dictionary, &weights)?;
    let image = model.reconstruct_with(&weighted)?;
    let plain = model.plain_reconstruction()?;
    Ok(Enhancement {
        image,
        plain,
        model,
        rarity: r,
        weights,
    })
}
