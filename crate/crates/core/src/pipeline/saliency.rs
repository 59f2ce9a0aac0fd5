use super::filter::{blur_plane, Plane};
use super::{fit, ImageModel, PipelineConfig};
use crate::coder::SparseCodes;
use crate::imageio::{Image, PatchGrid};
use crate::rarity::{activation_stats, ActivationStats};
use crate::{Error, Result};

/// Per-pixel saliency in `[0, 1]`, same size as the input image.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap(Image);

impl SaliencyMap {
    /// Wraps an externally produced map, e.g. for scoring with
    /// [`evaluate_saliency`](super::evaluate_saliency).
    pub fn from_image(img: Image) -> Self {
        SaliencyMap(img)
    }

    pub fn image(&self) -> &Image {
        &self.0
    }

    pub fn into_image(self) -> Image {
        self.0
    }

    pub(crate) fn from_plane(p: Plane) -> Self {
        SaliencyMap(p.min_max_normalized().into_image())
    }
}

/// Atom weights `w_i = −log((m_i + 1)/(N + 1))`: Laplace-smoothed
/// self-information of an atom being active in a patch.
pub fn rarity_weights(stats: &ActivationStats) -> Vec<f64> {
    let denom = stats.columns as f64 + 1.0;
    stats
        .counts
        .iter()
        .map(|&m| -((m as f64 + 1.0) / denom).ln())
        .collect()
}

/// Patch scores `s_j = Σ_i w_i·|X_ij|`.
///
/// The terms of each column are summed in ascending order of value, so the
/// score does not depend on how atoms are labelled.
pub fn patch_scores(codes: &SparseCodes, weights: &[f64]) -> Result<Vec<f64>> {
    if weights.len() != codes.num_atoms() {
        return Err(Error::contract(format!(
            "{} weights for {} atoms",
            weights.len(),
            codes.num_atoms()
        )));
    }
    let mut terms = Vec::new();
    Ok(codes
        .columns()
        .iter()
        .map(|col| {
            terms.clear();
            terms.extend(col.entries().iter().map(|&(i, c)| weights[i] * c.abs()));
            terms.sort_by(f64::total_cmp);
            terms.iter().sum()
        })
        .collect())
}

/// Spreads each patch score over its block, blurs with `sigma` and
/// min-max normalizes. Constant scores give an all-zero map.
pub fn saliency_from_scores(scores: &[f64], grid: &PatchGrid, sigma: f64) -> Result<SaliencyMap> {
    if scores.len() != grid.num_patches() {
        return Err(Error::contract(format!(
            "{} scores for {} patches",
            scores.len(),
            grid.num_patches()
        )));
    }
    let (lo, hi) = scores
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| {
            (lo.min(s), hi.max(s))
        });
    let (w, h) = (grid.orig_width, grid.orig_height);
    if lo == hi {
        return Ok(SaliencyMap(Image::filled(w, h, 0.0)?));
    }
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            data.push(scores[grid.patch_of(x, y)]);
        }
    }
    Ok(SaliencyMap::from_plane(blur_plane(
        &Plane::new(w, h, data),
        sigma,
    )))
}

pub fn saliency_from_model(model: &ImageModel, sigma: f64) -> Result<SaliencyMap> {
    let weights = rarity_weights(&activation_stats(&model.codes));
    let scores = patch_scores(&model.codes, &weights)?;
    saliency_from_scores(&scores, &model.grid, sigma)
}

/// Rarity saliency: learns `(D, X)` on the image and scores each patch by
/// the rarity-weighted mass of its code.
pub fn saliency_map(img: &Image, cfg: &PipelineConfig) -> Result<SaliencyMap> {
    let model = fit(img, cfg)?;
    saliency_from_model(&model, cfg.saliency_blur_sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coder::{CoderConfig, SparseVector};
    use crate::ksvd::LearnConfig;
    use crate::synth::{anomaly_scene, uniform_image, AnomalySceneSpec};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small_cfg(seed: u64) -> PipelineConfig {
        PipelineConfig {
            learn: LearnConfig {
                atoms: 32,
                iters: 4,
                coder: CoderConfig {
                    max_atoms: 4,
                    ..CoderConfig::default()
                },
                seed,
                ..LearnConfig::default()
            },
            ..PipelineConfig::default()
        }
    }

    fn argmax(v: &[f64]) -> usize {
        let mut best = 0;
        for (i, &x) in v.iter().enumerate() {
            if x > v[best] {
                best = i;
            }
        }
        best
    }

    #[test]
    fn weights_follow_laplace_smoothing() {
        let stats = ActivationStats {
            counts: vec![0, 9],
            mass: vec![0.0, 4.0],
            columns: 9,
        };
        let w = rarity_weights(&stats);
        assert!((w[0] - 10f64.ln()).abs() < 1e-15);
        assert_eq!(w[1], 0.0);
    }

    #[test]
    fn constant_image_gives_zero_map() {
        let img = Image::filled(40, 24, 0.6).unwrap();
        let map = saliency_map(&img, &small_cfg(1)).unwrap();
        assert_eq!((map.image().width(), map.image().height()), (40, 24));
        assert!(map.image().data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn map_is_normalized() {
        let img = uniform_image(48, 40, 2);
        let map = saliency_map(&img, &small_cfg(2)).unwrap();
        let d = map.image().data();
        assert!(d.iter().all(|v| (0.0..=1.0).contains(v)));
        assert_eq!(d.iter().copied().fold(0.0, f64::max), 1.0);
        assert_eq!(d.iter().copied().fold(1.0, f64::min), 0.0);
    }

    #[test]
    fn anomalous_block_has_top_score() {
        let spec = AnomalySceneSpec::default();
        for seed in 0..5 {
            let scene = anomaly_scene(seed, &spec);
            let model = fit(&scene.image, &small_cfg(seed)).unwrap();
            let w = rarity_weights(&activation_stats(&model.codes));
            let s = patch_scores(&model.codes, &w).unwrap();
            assert_eq!(argmax(&s), scene.anomaly_patch, "seed {seed}");
        }
    }

    #[test]
    fn score_length_checks() {
        let codes = SparseCodes::new(2, vec![SparseVector::default()]).unwrap();
        assert!(patch_scores(&codes, &[1.0]).is_err());
        let grid = PatchGrid::for_image(16, 8, 8).unwrap();
        assert!(saliency_from_scores(&[1.0], &grid, 2.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn weight_scaling_invariance(seed in any::<u64>(), factor in 0.01f64..100.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = 12;
            let cols: Vec<SparseVector> = (0..24)
                .map(|_| {
                    let mut e = Vec::new();
                    for i in 0..k {
                        if rng.random_bool(0.25) {
                            e.push((i, rng.random_range(-2.0..2.0)));
                        }
                    }
                    SparseVector::from_entries(e).unwrap()
                })
                .collect();
            let codes = SparseCodes::new(k, cols).unwrap();
            let grid = PatchGrid::for_image(48, 32, 8).unwrap();
            let w = rarity_weights(&activation_stats(&codes));
            let scaled: Vec<f64> = w.iter().map(|v| v * factor).collect();
            let s1 = patch_scores(&codes, &w).unwrap();
            let s2 = patch_scores(&codes, &scaled).unwrap();
            prop_assert_eq!(argmax(&s1), argmax(&s2));
            let m1 = saliency_from_scores(&s1, &grid, 2.0).unwrap();
            let m2 = saliency_from_scores(&s2, &grid, 2.0).unwrap();
            for (a, b) in m1.image().data().iter().zip(m2.image().data()) {
                prop_assert!((a - b).abs() <= 1e-9);
            }
        }
    }
}
