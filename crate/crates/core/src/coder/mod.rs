//! Sparse coding against a fixed dictionary.
//!
//! Two coders are provided: greedy orthogonal matching pursuit ([`omp`]),
//! which bounds the number of atoms per signal, and iterative
//! shrinkage-thresholding ([`ista`]) for the ℓ1-penalized least-squares
//! problem `min ‖y − Dx‖² + α‖x‖₁`. OMP is the default.

mod codes;
mod dictionary;
mod ista;
mod omp;

pub use codes::{SparseCodes, SparseVector};
pub use dictionary::{reconstruct_with, Dictionary};
pub use ista::{dictionary_lipschitz, ista, ista_trace, IstaTrace};
pub use omp::omp;

use rayon::prelude::*;

use crate::imageio::PatchMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoderMode {
    #[default]
    Omp,
    Ista,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoderConfig {
    pub mode: CoderMode,
    /// Maximum atoms per column (OMP).
    pub max_atoms: usize,
    /// Euclidean residual norm at which OMP stops early.
    pub residual_tol: f64,
    /// ℓ1 weight α (ISTA).
    pub alpha: f64,
    /// Iteration cap (ISTA).
    pub max_iter: usize,
    /// Relative objective change below which ISTA stops.
    pub obj_tol: f64,
}

impl Default for CoderConfig {
    fn default() -> Self {
        CoderConfig {
            mode: CoderMode::Omp,
            max_atoms: 8,
            residual_tol: 1e-6,
            alpha: 0.1,
            max_iter: 200,
            obj_tol: 1e-6,
        }
    }
}

impl CoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_atoms < 1 {
            return Err(Error::contract("max_atoms (T) must be at least 1"));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::contract(format!(
                "alpha must be finite and >= 0, got {}",
                self.alpha
            )));
        }
        if !(self.residual_tol > 0.0) || !(self.obj_tol > 0.0) {
            return Err(Error::contract("tolerances must be positive"));
        }
        if self.max_iter < 1 {
            return Err(Error::contract("max_iter must be at least 1"));
        }
        Ok(())
    }
}

/// Codes every column of `patches` independently.
///
/// Columns are processed in parallel; the result is identical to sequential
/// evaluation since no state is shared between columns.
pub fn encode_all(
    dict: &Dictionary,
    patches: &PatchMatrix,
    cfg: &CoderConfig,
) -> Result<SparseCodes> {
    cfg.validate()?;
    if patches.dim() != dict.dim() {
        return Err(Error::contract(format!(
            "patch dimension {} does not match dictionary dimension {}",
            patches.dim(),
            dict.dim()
        )));
    }
    let y = patches.as_matrix();
    let columns: Vec<SparseVector> = match cfg.mode {
        CoderMode::Omp => {
            let t = cfg.max_atoms.min(dict.dim()).min(dict.len());
            (0..patches.len())
                .into_par_iter()
                .map(|j| omp(dict, y.column(j).as_slice(), t, cfg.residual_tol))
                .collect::<Result<_>>()?
        }
        CoderMode::Ista => {
            let lip = dictionary_lipschitz(dict);
            (0..patches.len())
                .into_par_iter()
                .map(|j| {
                    let x = ista::solve(dict, y.column(j).as_slice(), cfg, lip, None);
                    SparseVector::from_dense(x.as_slice())
                })
                .collect()
        }
    };
    SparseCodes::new(dict.len(), columns)
}
