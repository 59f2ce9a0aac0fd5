//! End-to-end processing: enhancement by atom reweighting, rarity saliency
//! maps, the Itti-lite baseline, and saliency evaluation.

mod enhance;
mod eval;
mod filter;
mod itti;
mod saliency;

pub use enhance::{enhance, fit, Enhancement, ImageModel};
pub use eval::{
    evaluate_saliency, run_synthetic_suite, SaliencyMetrics, SuiteReport, SyntheticSuite,
};
pub use filter::gaussian_blur;
pub use itti::itti_lite;
pub use saliency::{
    patch_scores, rarity_weights, saliency_from_model, saliency_from_scores, saliency_map,
    SaliencyMap,
};

use crate::ksvd::LearnConfig;
use crate::rarity::{RarityMeasure, TransformSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    /// Block side in pixels.
    pub block: usize,
    pub learn: LearnConfig,
    pub measure: RarityMeasure,
    pub transform: TransformSpec,
    /// Subtract each patch's mean before learning and add it back afterwards.
    pub dc_remove: bool,
    /// Gaussian blur applied to blockwise saliency scores, in pixels.
    pub saliency_blur_sigma: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            block: 8,
            learn: LearnConfig::default(),
            measure: RarityMeasure::default(),
            transform: TransformSpec::default(),
            dc_remove: false,
            saliency_blur_sigma: 2.0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.block < 1 {
            return Err(Error::contract("block size must be at least 1"));
        }
        if !(self.saliency_blur_sigma >= 0.0 && self.saliency_blur_sigma.is_finite()) {
            return Err(Error::contract(
                "saliency blur sigma must be finite and >= 0",
            ));
        }
        if let Some(s) = self.measure.scale {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::contract(format!(
                    "scale constant S must be positive, got {s}"
                )));
            }
        }
        self.learn.validate()?;
        self.transform.validate()
    }
}
