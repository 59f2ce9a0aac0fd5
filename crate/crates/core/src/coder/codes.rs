use nalgebra::DMatrix;

use super::dictionary::check_permutation;
use crate::{Error, Result};

/// One sparse column: `(atom index, coefficient)` pairs with strictly
/// increasing indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    /// Builds a column from pairs in any order. Duplicate indices are an error.
    pub fn from_entries(mut entries: Vec<(usize, f64)>) -> Result<Self> {
        entries.sort_by_key(|&(i, _)| i);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::contract("duplicate atom index in sparse column"));
        }
        Ok(SparseVector { entries })
    }

    /// Keeps the exactly-nonzero entries of a dense vector.
    pub fn from_dense(values: &[f64]) -> Self {
        SparseVector {
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(i, &v)| (i, v))
                .collect(),
        }
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, atom: usize) -> f64 {
        self.entries
            .binary_search_by_key(&atom, |&(i, _)| i)
            .map_or(0.0, |p| self.entries[p].1)
    }

    pub fn l1_norm(&self) -> f64 {
        self.entries.iter().map(|&(_, c)| c.abs()).sum()
    }
}

/// `K × N` sparse coefficient matrix stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCodes {
    atoms: usize,
    columns: Vec<SparseVector>,
}

impl SparseCodes {
    pub fn new(atoms: usize, columns: Vec<SparseVector>) -> Result<Self> {
        for (j, col) in columns.iter().enumerate() {
            if let Some(&(i, _)) = col.entries.last() {
                if i >= atoms {
                    return Err(Error::contract(format!(
                        "column {j} references atom {i}, only {atoms} atoms"
                    )));
                }
            }
        }
        Ok(SparseCodes { atoms, columns })
    }

    /// Dense `K × N` matrix to sparse form, dropping exact zeros.
    pub fn from_dense(x: &DMatrix<f64>) -> Self {
        SparseCodes {
            atoms: x.nrows(),
            columns: x
                .column_iter()
                .map(|c| SparseVector::from_dense(c.as_slice()))
                .collect(),
        }
    }

    /// Row count `K`.
    pub fn num_atoms(&self) -> usize {
        self.atoms
    }

    /// Column count `N`.
    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn column(&self, j: usize) -> &SparseVector {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[SparseVector] {
        &self.columns
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(SparseVector::nnz).sum()
    }

    pub fn l1_norm(&self) -> f64 {
        self.columns.iter().map(SparseVector::l1_norm).sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut x = DMatrix::zeros(self.atoms, self.columns.len());
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, c) in &col.entries {
                x[(i, j)] = c;
            }
        }
        x
    }

    /// Relabels atoms so that row `k` moves to row `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.atoms)?;
        let columns = self
            .columns
            .iter()
            .map(|col| {
                let mut entries: Vec<_> = col.entries.iter().map(|&(i, c)| (perm[i], c)).collect();
                entries.sort_by_key(|&(i, _)| i);
                SparseVector { entries }
            })
            .collect();
        Ok(SparseCodes {
            atoms: self.atoms,
            columns,
        })
    }

    /// Per-atom lists of `(column, coefficient)`, columns ascending.
    pub(crate) fn rows(&self) -> Vec<Vec<(usize, f64)>> {
        let mut rows = vec![Vec::new(); self.atoms];
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, c) in &col.entries {
                rows[i].push((j, c));
            }
        }
        rows
    }

    /// Inverse of [`rows`](Self::rows). Exact zeros are dropped.
    pub(crate) fn from_rows(rows: &[Vec<(usize, f64)>], len: usize) -> Self {
        let mut columns = vec![SparseVector::default(); len];
        for (i, row) in rows.iter().enumerate() {
            for &(j, c) in row {
                if c != 0.0 {
                    columns[j].entries.push((i, c));
                }
            }
        }
        SparseCodes {
            atoms: rows.len(),
            columns,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entries_sorted_and_unique() {
        let v = SparseVector::from_entries(vec![(4, 1.0), (1, -2.0)]).unwrap();
        assert_eq!(v.entries(), &[(1, -2.0), (4, 1.0)]);
        assert_eq!(v.get(4), 1.0);
        assert_eq!(v.get(2), 0.0);
        assert!(SparseVector::from_entries(vec![(1, 1.0), (1, 2.0)]).is_err());
    }

    #[test]
    fn out_of_range_index() {
        let v = SparseVector::from_entries(vec![(3, 1.0)]).unwrap();
        assert!(SparseCodes::new(3, vec![v]).is_err());
    }

    #[test]
    fn dense_round_trip_and_rows() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, -2.0, 0.5, 0.0]);
        let codes = SparseCodes::from_dense(&x);
        assert_eq!(codes.nnz(), 3);
        assert_eq!(codes.to_dense(), x);
        assert_eq!(codes.l1_norm(), 3.5);
        let rows = codes.rows();
        assert_eq!(rows[1], vec![(1, -2.0)]);
        assert_eq!(SparseCodes::from_rows(&rows, 2), codes);
    }

    #[test]
    fn permuting_rows() {
        let x = DMatrix::from_row_slice(3, 1, &[1.0, 2.0, 3.0]);
        let p = SparseCodes::from_dense(&x).permuted(&[2, 0, 1]).unwrap();
        assert_eq!(p.to_dense().as_slice(), &[2.0, 3.0, 1.0]);
    }
}
