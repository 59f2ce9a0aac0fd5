//! K-SVD dictionary learning.
//!
//! [`learn`] alternates sparse coding of all patches with a sequential
//! rank-1 update of every atom ([`ksvd_update`]), replacing atoms that no
//! patch uses. The [`rdct`] submodule persists dictionaries to disk.

pub mod rdct;

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::coder::{encode_all, CoderConfig, CoderMode, Dictionary, SparseCodes};
use crate::imageio::{psnr_slices, PatchMatrix};
use crate::linalg::power_iteration;
use crate::{Error, Result};

const SVD_POWER_ITERS: usize = 100;
const SVD_POWER_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitStrategy {
    /// Normalized random columns of the patch matrix.
    #[default]
    SamplePatches,
    /// Normalized i.i.d. Gaussian columns.
    RandomGaussian,
}

/// What to do with atoms that no patch uses after a dictionary sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnusedPolicy {
    /// Replace with the normalized patch that is currently worst reconstructed.
    #[default]
    ReplaceWithWorstSignal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnConfig {
    /// Number of atoms `K`.
    pub atoms: usize,
    /// Number of code/update alternations.
    pub iters: usize,
    pub coder: CoderConfig,
    pub seed: u64,
    pub unused_policy: UnusedPolicy,
    pub init: InitStrategy,
}

impl Default for LearnConfig {
    fn default() -> Self {
        LearnConfig {
            atoms: 256,
            iters: 20,
            coder: CoderConfig::default(),
            seed: 0,
            unused_policy: UnusedPolicy::default(),
            init: InitStrategy::default(),
        }
    }
}

impl LearnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.atoms < 1 {
            return Err(Error::contract("atom count K must be at least 1"));
        }
        if self.iters < 1 {
            return Err(Error::contract("iters must be at least 1"));
        }
        self.coder.validate()
    }
}

/// Per-iteration trace of a [`learn`] run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LearnReport {
    /// Objective after each dictionary sweep: `‖Y − DX‖²_F`, plus `α‖X‖₁` in ISTA mode.
    pub objective_per_iter: Vec<f64>,
    /// `‖Y − DX‖²_F` right after sparse coding, before the sweep.
    pub coded_error_per_iter: Vec<f64>,
    /// `‖Y − DX‖²_F` right after the sweep.
    pub updated_error_per_iter: Vec<f64>,
    pub atoms_replaced_per_iter: Vec<usize>,
    /// PSNR of `DX` against `Y` in dB, for the returned pair.
    pub final_psnr: f64,
}

/// Initial dictionary of `k` unit-norm atoms.
///
/// `SamplePatches` draws `k` distinct columns of `y` (every column, then
/// draws with replacement, when `y` has fewer than `k`). Zero-norm draws are
/// replaced by Gaussian atoms from the same seeded stream.
pub fn init_dictionary(
    y: &PatchMatrix,
    k: usize,
    seed: u64,
    init: InitStrategy,
) -> Result<Dictionary> {
    if y.is_empty() || y.dim() == 0 {
        return Err(Error::contract(
            "cannot initialize a dictionary from an empty patch matrix",
        ));
    }
    if k == 0 {
        return Err(Error::contract("atom count K must be at least 1"));
    }
    let n = y.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut atoms = DMatrix::zeros(n, k);
    match init {
        InitStrategy::SamplePatches => {
            let count = y.len();
            let picks: Vec<usize> = if count >= k {
                index::sample(&mut rng, count, k).into_vec()
            } else {
                let mut all = index::sample(&mut rng, count, count).into_vec();
                all.extend((count..k).map(|_| rng.random_range(0..count)));
                all
            };
            for (a, &j) in picks.iter().enumerate() {
                let col = y.as_matrix().column(j);
                let norm = col.norm();
                if norm > 0.0 {
                    atoms.set_column(a, &(col / norm));
                } else {
                    atoms.set_column(a, &gaussian_atom(n, &mut rng));
                }
            }
        }
        InitStrategy::RandomGaussian => {
            for a in 0..k {
                atoms.set_column(a, &gaussian_atom(n, &mut rng));
            }
        }
    }
    Ok(Dictionary::from_normalized_unchecked(atoms))
}

fn gaussian_atom<R: Rng>(n: usize, rng: &mut R) -> DVector<f64> {
    loop {
        let v = DVector::<f64>::from_fn(n, |_, _| StandardNormal.sample(rng));
        let norm = v.norm();
        if norm > 0.0 {
            return v / norm;
        }
    }
}

fn check_shapes(dict: &Dictionary, codes: &SparseCodes, y: &PatchMatrix) -> Result<()> {
    if dict.dim() != y.dim() || dict.len() != codes.num_atoms() || codes.len() != y.len() {
        return Err(Error::contract(format!(
            "inconsistent shapes: D {}x{}, X {}x{}, Y {}x{}",
            dict.dim(),
            dict.len(),
            codes.num_atoms(),
            codes.len(),
            y.dim(),
            y.len()
        )));
    }
    Ok(())
}

/// `Y − DX` as a dense matrix.
fn residual_matrix(
    dict: &Dictionary,
    codes: &SparseCodes,
    y: &PatchMatrix,
) -> Result<DMatrix<f64>> {
    check_shapes(dict, codes, y)?;
    Ok(y.as_matrix() - dict.reconstruct(codes)?.as_matrix())
}

/// Squared Frobenius error `‖Y − DX‖²_F`.
pub fn reconstruction_error(
    dict: &Dictionary,
    codes: &SparseCodes,
    y: &PatchMatrix,
) -> Result<f64> {
    Ok(residual_matrix(dict, codes, y)?.norm_squared())
}

/// One K-SVD dictionary sweep.
///
/// Atoms are visited in ascending order, each seeing the atoms already
/// updated in this sweep. For atom `k` with support `ω = {j : X_kj ≠ 0}`, the
/// residual `E` restricted to `ω` (with atom `k`'s own contribution added
/// back) is replaced by its best rank-1 approximation: `d_k` becomes the
/// leading left singular vector and the row `X_k|ω` becomes `Eᵀd_k`. The
/// singular vector comes from power iteration on `EEᵀ` warm-started at the
/// old atom, which cannot lose ground against the old pair, so
/// `‖Y − DX‖_F` never increases. Each atom is signed so its first nonzero
/// entry is positive. Supports never grow; atoms with empty support are
/// left untouched.
pub fn ksvd_update(
    dict: &Dictionary,
    codes: &SparseCodes,
    y: &PatchMatrix,
) -> Result<(Dictionary, SparseCodes)> {
    let mut residual = residual_matrix(dict, codes, y)?;
    let mut atoms = dict.atoms().clone();
    let mut rows = codes.rows();
    let n = dict.dim();

    for (k, row) in rows.iter_mut().enumerate() {
        if row.is_empty() {
            continue;
        }
        let old = atoms.column(k).clone_owned();
        let mut e = DMatrix::zeros(n, row.len());
        for (p, &(j, c)) in row.iter().enumerate() {
            let mut col = e.column_mut(p);
            col.copy_from(&residual.column(j));
            col.axpy(c, &old, 1.0);
        }
        let (mut u, _) = power_iteration(|v| &e * e.tr_mul(v), old, SVD_POWER_ITERS, SVD_POWER_TOL);
        if u.iter().find(|&&v| v != 0.0).is_some_and(|&v| v < 0.0) {
            u.neg_mut();
        }
        let coefs = e.tr_mul(&u);
        for (p, entry) in row.iter_mut().enumerate() {
            let mut col = residual.column_mut(entry.0);
            col.copy_from(&e.column(p));
            col.axpy(-coefs[p], &u, 1.0);
            entry.1 = coefs[p];
        }
        atoms.set_column(k, &u);
    }

    Ok((
        Dictionary::from_normalized_unchecked(atoms),
        SparseCodes::from_rows(&rows, codes.len()),
    ))
}

/// Replaces every atom with no nonzero coefficient in `codes`.
///
/// Patches are ranked by reconstruction error (largest first, ties to the
/// lowest column index) and unused atoms, in ascending order, take the
/// normalized patches in that order. A zero patch is swapped for a
/// Gaussian atom drawn from `fallback_seed`. Returns the number of atoms
/// replaced.
pub fn replace_unused_atoms(
    dict: &mut Dictionary,
    codes: &SparseCodes,
    y: &PatchMatrix,
    fallback_seed: u64,
) -> Result<usize> {
    let residual = residual_matrix(dict, codes, y)?;
    let mut used = vec![false; dict.len()];
    for col in codes.columns() {
        for &(i, c) in col.entries() {
            if c != 0.0 {
                used[i] = true;
            }
        }
    }
    let unused: Vec<usize> = (0..dict.len()).filter(|&k| !used[k]).collect();
    if unused.is_empty() {
        return Ok(0);
    }
    let errors: Vec<f64> = residual.column_iter().map(|c| c.norm_squared()).collect();
    let mut order: Vec<usize> = (0..y.len()).collect();
    order.sort_by(|&a, &b| errors[b].total_cmp(&errors[a]).then(a.cmp(&b)));

    let mut rng = ChaCha8Rng::seed_from_u64(fallback_seed);
    let n = dict.dim();
    let atoms = dict.atoms_mut();
    for (slot, &k) in unused.iter().enumerate() {
        let col = y.as_matrix().column(order[slot % order.len()]);
        let norm = col.norm();
        if norm > 0.0 {
            atoms.set_column(k, &(col / norm));
        } else {
            atoms.set_column(k, &gaussian_atom(n, &mut rng));
        }
    }
    Ok(unused.len())
}

/// Learns a `K`-atom dictionary and sparse codes for `y`.
///
/// Each of the `iters` rounds codes every patch, runs one [`ksvd_update`]
/// sweep, then replaces unused atoms. Deterministic for a given `(y, cfg)`.
pub fn learn(y: &PatchMatrix, cfg: &LearnConfig) -> Result<(Dictionary, SparseCodes, LearnReport)> {
    cfg.validate()?;
    let mut dict = init_dictionary(y, cfg.atoms, cfg.seed, cfg.init)?;
    let mut report = LearnReport::default();
    let mut codes = None;

    for iter in 0..cfg.iters {
        let coded = encode_all(&dict, y, &cfg.coder)?;
        report
            .coded_error_per_iter
            .push(reconstruction_error(&dict, &coded, y)?);
        let (next_dict, next_codes) = ksvd_update(&dict, &coded, y)?;
        dict = next_dict;
        let err = reconstruction_error(&dict, &next_codes, y)?;
        report.updated_error_per_iter.push(err);
        report.objective_per_iter.push(match cfg.coder.mode {
            CoderMode::Omp => err,
            CoderMode::Ista => err + cfg.coder.alpha * next_codes.l1_norm(),
        });
        let fallback_seed = cfg
            .seed
            .wrapping_add(0x9e37_79b9_7f4a_7c15_u64.wrapping_mul(iter as u64 + 1));
        report.atoms_replaced_per_iter.push(replace_unused_atoms(
            &mut dict,
            &next_codes,
            y,
            fallback_seed,
        )?);
        codes = Some(next_codes);
    }

    let codes = codes.expect("iters >= 1");
    let recon = dict.reconstruct(&codes)?;
    report.final_psnr = psnr_slices(recon.as_matrix().as_slice(), y.as_matrix().as_slice());
    Ok((dict, codes, report))
}

#[cfg(test)]
mod tests;
