//! Seeded synthetic inputs for tests and the evaluation harness.
//!
//! Every generator is a pure function of its seed (ChaCha8 stream), so
//! results reproduce across platforms.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::coder::Dictionary;
use crate::imageio::Image;

/// Largest absolute inner product between two distinct atoms.
pub fn mutual_coherence(dict: &Dictionary) -> f64 {
    let g = dict.atoms().tr_mul(dict.atoms());
    let k = dict.len();
    let mut mu: f64 = 0.0;
    for j in 0..k {
        for i in 0..j {
            mu = mu.max(g[(i, j)].abs());
        }
    }
    mu
}

fn gaussian_unit<R: Rng>(n: usize, rng: &mut R) -> DVector<f64> {
    loop {
        let v = DVector::<f64>::from_fn(n, |_, _| StandardNormal.sample(rng));
        let norm = v.norm();
        if norm > 0.0 {
            return v / norm;
        }
    }
}

/// `n × k` dictionary of normalized Gaussian atoms with mutual coherence
/// strictly below `mu_max`.
///
/// A Gaussian dictionary is drawn and then decorrelated: the most coherent
/// pair of atoms is pushed apart (`d_i ← d_i − η·g·d_j` and symmetrically,
/// then renormalized) until the coherence is below `0.9·mu_max`. The result
/// is kept only if it passes the `mu_max` filter; otherwise a fresh draw is
/// made. Plain rejection of Gaussian draws is hopeless at useful sizes: a
/// 16×32 Gaussian dictionary essentially never has μ < 1/3, and greedy
/// atom-by-atom rejection wedges itself around 26–29 atoms.
///
/// Panics if no dictionary is found within `MAX_DRAWS` draws.
pub fn incoherent_dictionary<R: Rng>(n: usize, k: usize, mu_max: f64, rng: &mut R) -> Dictionary {
    const MAX_DRAWS: usize = 100;
    const MAX_STEPS: usize = 20_000;
    const ETA: f64 = 0.1;
    let target = 0.9 * mu_max;
    for _ in 0..MAX_DRAWS {
        let cols: Vec<_> = (0..k).map(|_| gaussian_unit(n, rng)).collect();
        let mut d = DMatrix::from_columns(&cols);
        for _ in 0..MAX_STEPS {
            let gram = d.transpose() * &d;
            let (mut bi, mut bj, mut worst) = (0, 0, 0.0f64);
            for j in 0..k {
                for i in 0..j {
                    if gram[(i, j)].abs() > worst {
                        (bi, bj, worst) = (i, j, gram[(i, j)].abs());
                    }
                }
            }
            if worst < target {
                break;
            }
            let g = gram[(bi, bj)];
            let (ai, aj) = (d.column(bi).clone_owned(), d.column(bj).clone_owned());
            let ni = (&ai - &aj * (ETA * g)).normalize();
            let nj = (&aj - &ai * (ETA * g)).normalize();
            d.set_column(bi, &ni);
            d.set_column(bj, &nj);
        }
        let dict = Dictionary::new(d).expect("atoms are unit norm");
        if mutual_coherence(&dict) < mu_max {
            return dict;
        }
    }
    panic!("cannot reach coherence {mu_max} with {k} atoms in R^{n}");
}

/// Normalized Gaussian dictionary with no coherence constraint.
pub fn gaussian_dictionary<R: Rng>(n: usize, k: usize, rng: &mut R) -> Dictionary {
    let cols: Vec<_> = (0..k).map(|_| gaussian_unit(n, rng)).collect();
    Dictionary::new(DMatrix::from_columns(&cols)).expect("atoms are unit norm")
}

/// Image with independent uniform `[0, 1)` samples.
pub fn uniform_image(width: usize, height: usize, seed: u64) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..width * height).map(|_| rng.random::<f64>()).collect();
    Image::new(width, height, data).expect("samples in range")
}

/// Bright disks of radius `radius` on a dark background.
pub fn disk_image(
    width: usize,
    height: usize,
    centers: &[(f64, f64)],
    radius: f64,
    fg: f64,
    bg: f64,
) -> Image {
    let mut data = vec![bg; width * height];
    for y in 0..height {
        for x in 0..width {
            let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
            if centers
                .iter()
                .any(|&(cx, cy)| (px - cx).powi(2) + (py - cy).powi(2) <= radius * radius)
            {
                data[y * width + x] = fg;
            }
        }
    }
    Image::new(width, height, data).expect("samples in range")
}

/// Parameters of the tiled-texture anomaly scene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnomalySceneSpec {
    /// Image side in pixels; a multiple of `block`.
    pub size: usize,
    pub block: usize,
    /// Standard deviation of additive Gaussian pixel noise (0 for none).
    pub noise: f64,
}

impl Default for AnomalySceneSpec {
    fn default() -> Self {
        AnomalySceneSpec {
            size: 128,
            block: 8,
            noise: 0.0,
        }
    }
}

/// A generated scene: the image, which block is anomalous, and its pixel mask.
#[derive(Debug, Clone)]
pub struct AnomalyScene {
    pub image: Image,
    /// Row-major index of the anomalous block in the block grid.
    pub anomaly_patch: usize,
    /// 1 inside the anomalous block, 0 elsewhere.
    pub mask: Image,
}

fn random_tile(rng: &mut ChaCha8Rng, block: usize) -> Vec<f64> {
    (0..block * block)
        .map(|_| rng.random_range(0.2..0.8))
        .collect()
}

/// Square image tiled with one random `block × block` texture, except for a
/// single block (at a random grid position) filled with a different random
/// texture.
pub fn anomaly_scene(seed: u64, spec: &AnomalySceneSpec) -> AnomalyScene {
    let b = spec.block;
    assert!(
        b > 0 && spec.size.is_multiple_of(b),
        "size must be a multiple of block"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let texture = random_tile(&mut rng, b);
    let odd = random_tile(&mut rng, b);
    let cells = spec.size / b;
    let (ar, ac) = (rng.random_range(0..cells), rng.random_range(0..cells));
    let noise = Normal::new(0.0, spec.noise.max(0.0)).expect("finite sigma");

    let n = spec.size;
    let mut data = vec![0.0; n * n];
    let mut mask = vec![0.0; n * n];
    for y in 0..n {
        for x in 0..n {
            let inside = y / b == ar && x / b == ac;
            let tile = if inside { &odd } else { &texture };
            let mut v = tile[(y % b) * b + x % b];
            if spec.noise > 0.0 {
                v += noise.sample(&mut rng);
            }
            data[y * n + x] = v.clamp(0.0, 1.0);
            if inside {
                mask[y * n + x] = 1.0;
            }
        }
    }
    AnomalyScene {
        image: Image::new(n, n, data).expect("clamped"),
        anomaly_patch: ar * cells + ac,
        mask: Image::new(n, n, mask).expect("binary"),
    }
}

/// Two-texture scene: `width × height` of a common texture with a
/// `rare_blocks × rare_blocks` square of a second texture at the top-left
/// block corner `(1, 1)`. Returns the image and the rare-region mask.
pub fn two_texture_image(
    width: usize,
    height: usize,
    block: usize,
    rare_blocks: usize,
    seed: u64,
) -> (Image, Image) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let common = random_tile(&mut rng, block);
    let rare = random_tile(&mut rng, block);
    let lo = block;
    let hi = block * (1 + rare_blocks);
    let mut data = vec![0.0; width * height];
    let mut mask = vec![0.0; width * height];
    for y in 0..height {
        for x in 0..width {
            let inside = (lo..hi).contains(&x) && (lo..hi).contains(&y);
            let tile = if inside { &rare } else { &common };
            data[y * width + x] = tile[(y % block) * block + x % block];
            if inside {
                mask[y * width + x] = 1.0;
            }
        }
    }
    (
        Image::new(width, height, data).expect("in range"),
        Image::new(width, height, mask).expect("binary"),
    )
}
