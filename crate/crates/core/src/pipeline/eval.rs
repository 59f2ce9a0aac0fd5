use rayon::prelude::*;

use super::{
    fit, itti_lite, patch_scores, rarity_weights, saliency_from_scores, PipelineConfig, SaliencyMap,
};
use crate::imageio::Image;
use crate::rarity::activation_stats;
use crate::synth::{anomaly_scene, AnomalySceneSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaliencyMetrics {
    /// The map's maximum (first in row-major order) lies inside the mask.
    pub hit: bool,
    /// Area under the ROC curve of the map as a detector of mask pixels.
    pub auc: f64,
}

/// Scores a saliency map against a binary mask (pixels > 0.5 are positive).
///
/// The ROC curve is traced by sweeping the threshold over every distinct
/// map value; tied pixels enter together, which is equivalent to counting
/// ties as half in the rank-sum formulation.
pub fn evaluate_saliency(map: &SaliencyMap, truth: &Image) -> Result<SaliencyMetrics> {
    let m = map.image();
    if !m.same_dims(truth) {
        return Err(Error::contract(format!(
            "map is {}x{}, mask is {}x{}",
            m.width(),
            m.height(),
            truth.width(),
            truth.height()
        )));
    }
    let labels: Vec<bool> = truth.data().iter().map(|&v| v > 0.5).collect();
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::contract(
            "mask needs both positive and negative pixels",
        ));
    }

    let scores = m.data();
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let (mut tp, mut fp) = (0usize, 0usize);
    let (mut prev_tpr, mut prev_fpr) = (0.0, 0.0);
    let mut area = 0.0;
    let mut i = 0;
    while i < order.len() {
        let value = scores[order[i]];
        while i < order.len() && scores[order[i]] == value {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let tpr = tp as f64 / positives as f64;
        let fpr = fp as f64 / negatives as f64;
        area += (fpr - prev_fpr) * (tpr + prev_tpr) * 0.5;
        prev_tpr = tpr;
        prev_fpr = fpr;
    }

    Ok(SaliencyMetrics {
        hit: labels[best],
        auc: area,
    })
}

/// Seeded tiled-texture anomaly benchmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSuite {
    pub seed: u64,
    pub trials: usize,
    pub scene: AnomalySceneSpec,
    pub pipeline: PipelineConfig,
    /// Also run the Itti-lite baseline on every scene.
    pub with_itti: bool,
}

impl Default for SyntheticSuite {
    fn default() -> Self {
        SyntheticSuite {
            seed: 1,
            trials: 100,
            scene: AnomalySceneSpec::default(),
            pipeline: PipelineConfig::default(),
            with_itti: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub trials: usize,
    /// Trials whose highest patch score is the anomalous block.
    pub anomaly_hits: usize,
    pub mean_auc: f64,
    pub min_auc: f64,
    /// Trials whose map maximum falls inside the anomalous block.
    pub map_hits: usize,
    pub itti: Option<(usize, f64)>,
}

impl SuiteReport {
    pub fn anomaly_hit_rate(&self) -> f64 {
        self.anomaly_hits as f64 / self.trials as f64
    }

    /// Metrics as `name=value` lines.
    pub fn to_lines(&self) -> String {
        let mut out = format!(
            "trials={}\nanomaly_hit_rate={}\nmap_hit_rate={}\nmean_auc={}\nmin_auc={}\n",
            self.trials,
            self.anomaly_hit_rate(),
            self.map_hits as f64 / self.trials as f64,
            self.mean_auc,
            self.min_auc
        );
        if let Some((hits, auc)) = self.itti {
            out.push_str(&format!(
                "itti_hit_rate={}\nitti_mean_auc={}\n",
                hits as f64 / self.trials as f64,
                auc
            ));
        }
        out
    }
}

struct Trial {
    patch_hit: bool,
    map: SaliencyMetrics,
    itti: Option<SaliencyMetrics>,
}

/// Seed of trial `t`; distinct trials draw distinct scenes.
pub(crate) fn trial_seed(seed: u64, t: usize) -> u64 {
    seed.wrapping_mul(0x2545_f491_4f6c_dd1d)
        .wrapping_add(t as u64)
}

fn run_trial(suite: &SyntheticSuite, t: usize) -> Result<Trial> {
    let seed = trial_seed(suite.seed, t);
    let scene = anomaly_scene(seed, &suite.scene);
    let mut cfg = suite.pipeline;
    cfg.block = suite.scene.block;
    cfg.learn.seed = seed;
    let model = fit(&scene.image, &cfg)?;
    let weights = rarity_weights(&activation_stats(&model.codes));
    let scores = patch_scores(&model.codes, &weights)?;
    let mut top = 0;
    for (j, &s) in scores.iter().enumerate() {
        if s > scores[top] {
            top = j;
        }
    }
    let map = saliency_from_scores(&scores, &model.grid, cfg.saliency_blur_sigma)?;
    let itti = if suite.with_itti {
        Some(evaluate_saliency(&itti_lite(&scene.image)?, &scene.mask)?)
    } else {
        None
    };
    Ok(Trial {
        patch_hit: top == scene.anomaly_patch,
        map: evaluate_saliency(&map, &scene.mask)?,
        itti,
    })
}

/// Runs every trial (in parallel; results do not depend on scheduling).
pub fn run_synthetic_suite(suite: &SyntheticSuite) -> Result<SuiteReport> {
    if suite.trials == 0 {
        return Err(Error::contract("trials must be at least 1"));
    }
    let trials: Vec<Trial> = (0..suite.trials)
        .into_par_iter()
        .map(|t| run_trial(suite, t))
        .collect::<Result<_>>()?;
    let n = trials.len() as f64;
    let itti = suite.with_itti.then(|| {
        let hits = trials
            .iter()
            .filter(|t| t.itti.is_some_and(|m| m.hit))
            .count();
        let auc = trials
            .iter()
            .filter_map(|t| t.itti.map(|m| m.auc))
            .sum::<f64>()
            / n;
        (hits, auc)
    });
    Ok(SuiteReport {
        trials: trials.len(),
        anomaly_hits: trials.iter().filter(|t| t.patch_hit).count(),
        mean_auc: trials.iter().map(|t| t.map.auc).sum::<f64>() / n,
        min_auc: trials
            .iter()
            .map(|t| t.map.auc)
            .fold(f64::INFINITY, f64::min),
        map_hits: trials.iter().filter(|t| t.map.hit).count(),
        itti,
    })
}
