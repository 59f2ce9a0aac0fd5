use nalgebra::{DMatrix, DVectorView};

use super::SparseCodes;
use crate::imageio::PatchMatrix;
use crate::{Error, Result};

/// Tolerance on atom norms: every column satisfies `|‖d‖₂ − 1| ≤ NORM_TOL`.
pub(crate) const NORM_TOL: f64 = 1e-9;

/// `n × K` matrix of unit-norm atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    atoms: DMatrix<f64>,
}

impl Dictionary {
    /// Wraps `atoms`, checking that each column has unit Euclidean norm.
    pub fn new(atoms: DMatrix<f64>) -> Result<Self> {
        if atoms.nrows() == 0 || atoms.ncols() == 0 {
            return Err(Error::contract(
                "dictionary must have at least one row and one atom",
            ));
        }
        for (k, col) in atoms.column_iter().enumerate() {
            let norm = col.norm();
            if !(norm > 1.0 - NORM_TOL && norm <= 1.0 + NORM_TOL) {
                return Err(Error::contract(format!(
                    "atom {k} has norm {norm}, expected 1"
                )));
            }
        }
        Ok(Dictionary { atoms })
    }

    /// Normalizes every column of `atoms` to unit length. Zero columns are an error.
    pub fn normalized(mut atoms: DMatrix<f64>) -> Result<Self> {
        for (k, mut col) in atoms.column_iter_mut().enumerate() {
            let norm = col.norm();
            if !(norm > 0.0 && norm.is_finite()) {
                return Err(Error::contract(format!(
                    "atom {k} cannot be normalized (norm {norm})"
                )));
            }
            col /= norm;
        }
        Dictionary::new(atoms)
    }

    pub(crate) fn from_normalized_unchecked(atoms: DMatrix<f64>) -> Self {
        debug_assert!(atoms
            .column_iter()
            .all(|c| (c.norm() - 1.0).abs() <= NORM_TOL));
        Dictionary { atoms }
    }

    /// Signal dimension `n`.
    pub fn dim(&self) -> usize {
        self.atoms.nrows()
    }

    /// Atom count `K`.
    pub fn len(&self) -> usize {
        self.atoms.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.ncols() == 0
    }

    pub fn atoms(&self) -> &DMatrix<f64> {
        &self.atoms
    }

    pub fn into_atoms(self) -> DMatrix<f64> {
        self.atoms
    }

    pub fn atom(&self, k: usize) -> DVectorView<'_, f64> {
        self.atoms.column(k)
    }

    pub(crate) fn atoms_mut(&mut self) -> &mut DMatrix<f64> {
        &mut self.atoms
    }

    /// Reorders atoms so that atom `k` moves to position `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.len())?;
        let mut atoms = DMatrix::zeros(self.dim(), self.len());
        for (k, &to) in perm.iter().enumerate() {
            atoms.set_column(to, &self.atoms.column(k));
        }
        Ok(Dictionary { atoms })
    }

    /// `D·X` as a patch matrix.
    pub fn reconstruct(&self, codes: &SparseCodes) -> Result<PatchMatrix> {
        reconstruct_with(&self.atoms, codes)
    }
}

/// Computes `A·X` for any `n × K` atom matrix, weighted or not.
///
/// Each output column accumulates `x_ij·a_i` in ascending atom order, so the
/// result for a given `(A, X)` is reproducible bit for bit.
pub fn reconstruct_with(atoms: &DMatrix<f64>, codes: &SparseCodes) -> Result<PatchMatrix> {
    if atoms.ncols() != codes.num_atoms() {
        return Err(Error::contract(format!(
            "codes index {} atoms, matrix has {}",
            codes.num_atoms(),
            atoms.ncols()
        )));
    }
    let n = atoms.nrows();
    let mut out = DMatrix::zeros(n, codes.len());
    for (j, col) in codes.columns().iter().enumerate() {
        let mut dst = out.column_mut(j);
        for &(i, c) in col.entries() {
            dst.axpy(c, &atoms.column(i), 1.0);
        }
    }
    Ok(PatchMatrix::new(out))
}

pub(crate) fn check_permutation(perm: &[usize], len: usize) -> Result<()> {
    if perm.len() != len {
        return Err(Error::contract(format!(
            "permutation has length {}, expected {len}",
            perm.len()
        )));
    }
    let mut seen = vec![false; len];
    for &p in perm {
        if p >= len || std::mem::replace(&mut seen[p], true) {
            return Err(Error::contract("not a permutation"));
        }
    }
    Ok(())
}
