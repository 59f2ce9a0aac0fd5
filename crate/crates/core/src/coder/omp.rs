use nalgebra::{DMatrix, DVector};

use super::{Dictionary, SparseVector};
use crate::{Error, Result};

/// Orthogonal matching pursuit.
///
/// Repeatedly selects the atom with the largest absolute correlation with
/// the current residual (ties go to the lowest index), then refits all
/// selected coefficients by least squares. Stops once `max_atoms` atoms are
/// selected, the residual norm drops to `residual_tol`, or no remaining atom
/// can reduce the residual.
///
/// A rank-deficient support is solved with the pseudoinverse, which returns
/// the minimum-norm coefficients among the equally good fits.
pub fn omp(
    dict: &Dictionary,
    y: &[f64],
    max_atoms: usize,
    residual_tol: f64,
) -> Result<SparseVector> {
    let (n, k) = (dict.dim(), dict.len());
    if y.len() != n {
        return Err(Error::contract(format!(
            "signal has length {}, dictionary dimension is {n}",
            y.len()
        )));
    }
    if max_atoms < 1 || max_atoms > n.min(k) {
        return Err(Error::contract(format!(
            "max_atoms must lie in 1..={}, got {max_atoms}",
            n.min(k)
        )));
    }
    let d = dict.atoms();
    let y = DVector::from_column_slice(y);
    let mut residual = y.clone();
    let mut rnorm = residual.norm();
    let mut support: Vec<usize> = Vec::with_capacity(max_atoms);
    let mut coefs: DVector<f64> = DVector::zeros(0);
    let mut selected = vec![false; k];

    while support.len() < max_atoms && rnorm > residual_tol {
        let corr = d.tr_mul(&residual);
        let mut best: Option<(usize, f64)> = None;
        for (i, c) in corr.iter().enumerate() {
            let a = c.abs();
            if !selected[i] && best.is_none_or(|(_, b)| a > b) {
                best = Some((i, a));
            }
        }
        let Some((atom, score)) = best else { break };
        // The residual is already orthogonal to every remaining atom.
        if score <= f64::EPSILON * rnorm {
            break;
        }

        support.push(atom);
        let sub = d.select_columns(&support);
        let fit = least_squares(&sub, &y);
        let next = &y - &sub * &fit;
        let next_norm = next.norm();
        if !(next_norm < rnorm) {
            support.pop();
            break;
        }
        selected[atom] = true;
        coefs = fit;
        residual = next;
        rnorm = next_norm;
    }

    SparseVector::from_entries(support.into_iter().zip(coefs.iter().copied()).collect())
}

/// Least-squares coefficients of `y` on the columns of `a`.
fn least_squares(a: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
    let gram = a.tr_mul(a);
    let rhs = a.tr_mul(y);
    if let Some(chol) = gram.clone().cholesky() {
        let l = chol.l_dirty();
        let diag = l.diagonal();
        let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
        // Reject near-singular factors; the normal equations square the conditioning.
        if lo > 1e-7 * hi {
            return chol.solve(&rhs);
        }
    }
    let svd = a.clone().svd(true, true);
    let eps = 1e-12 * svd.singular_values.max();
    svd.solve(y, eps).expect("SVD computed with both factors")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coder::tests::random_dictionary;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn axis_aligned() {
        let d = Dictionary::new(DMatrix::identity(2, 2)).unwrap();
        let x = omp(&d, &[3.0, 0.0], 1, 1e-6).unwrap();
        assert_eq!(x.entries(), &[(0, 3.0)]);
    }

    #[test]
    fn diagonal_atom_wins() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let d = Dictionary::new(DMatrix::from_column_slice(
            2,
            3,
            &[1.0, 0.0, 0.0, 1.0, s, s],
        ))
        .unwrap();
        let x = omp(&d, &[1.0, 1.0], 1, 1e-6).unwrap();
        // Enumerating all 1-sparse fits: atoms 0 and 1 leave residual 1,
        // atom 2 alone fits exactly with coefficient sqrt(2).
        assert_eq!(x.nnz(), 1);
        assert_eq!(x.entries()[0].0, 2);
        assert!((x.entries()[0].1 - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn tie_breaks_to_lowest_index() {
        let d = Dictionary::new(DMatrix::identity(2, 2)).unwrap();
        let x = omp(&d, &[1.0, -1.0], 1, 1e-6).unwrap();
        assert_eq!(x.entries(), &[(0, 1.0)]);
    }

    #[test]
    fn zero_signal_gives_empty_support() {
        let d = random_dictionary(8, 12, 1);
        assert_eq!(omp(&d, &[0.0; 8], 4, 1e-6).unwrap().nnz(), 0);
    }

    #[test]
    fn bad_arguments() {
        let d = random_dictionary(4, 6, 1);
        assert!(omp(&d, &[0.0; 3], 1, 1e-6).is_err());
        assert!(omp(&d, &[0.0; 4], 0, 1e-6).is_err());
        assert!(omp(&d, &[0.0; 4], 5, 1e-6).is_err());
    }

    #[test]
    fn duplicate_atoms_never_both_selected() {
        // Atoms 0 and 1 are identical: once one is selected the other has zero
        // correlation with the residual.
        let m = DMatrix::from_column_slice(3, 3, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let d = Dictionary::new(m).unwrap();
        let x = omp(&d, &[2.0, 1.0, 0.5], 3, 1e-9).unwrap();
        assert_eq!(
            x.entries().iter().map(|e| e.0).collect::<Vec<_>>(),
            vec![0, 2]
        );
    }

    fn residual_of(d: &Dictionary, y: &[f64], x: &SparseVector) -> DVector<f64> {
        let mut r = DVector::from_column_slice(y);
        for &(i, c) in x.entries() {
            r.axpy(-c, &d.atom(i), 1.0);
        }
        r
    }

    #[test]
    fn residual_orthogonal_to_support() {
        let d = random_dictionary(16, 40, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let y: Vec<f64> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
            let x = omp(&d, &y, 6, 1e-9).unwrap();
            assert!(x.nnz() <= 6);
            let r = residual_of(&d, &y, &x);
            for &(i, _) in x.entries() {
                assert!(d.atom(i).dot(&r).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn residual_strictly_decreases_with_each_atom() {
        let d = random_dictionary(16, 40, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let y: Vec<f64> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut prev = f64::INFINITY;
        for t in 1..=10 {
            let x = omp(&d, &y, t, 1e-12).unwrap();
            let r = residual_of(&d, &y, &x).norm();
            assert!(r < prev, "T={t}: {r} !< {prev}");
            prev = r;
        }
    }

    /// Exhaustive search over all 2-sparse supports, solving each by least squares.
    fn best_two_sparse(d: &Dictionary, y: &[f64]) -> (usize, usize, f64) {
        let yv = DVector::from_column_slice(y);
        let mut best = (0, 0, f64::INFINITY);
        for a in 0..d.len() {
            for b in a + 1..d.len() {
                let sub = d.atoms().select_columns(&[a, b]);
                let c = sub.clone().pseudo_inverse(1e-14).unwrap() * &yv;
                let r = (&yv - sub * c).norm();
                if r < best.2 {
                    best = (a, b, r);
                }
            }
        }
        best
    }

    #[test]
    fn planted_two_sparse_recovery() {
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        let d = crate::synth::incoherent_dictionary(16, 32, 1.0 / 3.0, &mut rng);
        assert!(crate::synth::mutual_coherence(&d) < 1.0 / 3.0);
        let mut y = DVector::zeros(16);
        y.axpy(2.0, &d.atom(3), 0.0);
        y.axpy(-1.0, &d.atom(7), 1.0);
        let (a, b, r) = best_two_sparse(&d, y.as_slice());
        assert_eq!((a, b), (3, 7));
        assert!(r < 1e-10);

        let x = omp(&d, y.as_slice(), 2, 1e-12).unwrap();
        assert_eq!(
            x.entries().iter().map(|e| e.0).collect::<Vec<_>>(),
            vec![3, 7]
        );
        assert!((x.get(3) - 2.0).abs() < 1e-8);
        assert!((x.get(7) + 1.0).abs() < 1e-8);
    }
}
