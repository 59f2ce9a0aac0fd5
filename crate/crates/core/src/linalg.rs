use nalgebra::DVector;

/// Leading eigenpair of a symmetric positive semidefinite operator by power
/// iteration.
///
/// Stops after `max_iter` products or once successive unit iterates differ by
/// less than `tol`. For PSD operators the Rayleigh quotient never decreases
/// from `start` onward, so warm starts only improve the estimate. Returns
/// `(start / |start|, 0)` if the operator annihilates the iterate.
pub(crate) fn power_iteration<F>(
    apply: F,
    start: DVector<f64>,
    max_iter: usize,
    tol: f64,
) -> (DVector<f64>, f64)
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let mut v = start;
    let norm = v.norm();
    if norm > 0.0 {
        v /= norm;
    }
    for _ in 0..max_iter {
        let w = apply(&v);
        let wn = w.norm();
        if wn == 0.0 {
            return (v, 0.0);
        }
        let next = w / wn;
        let delta = (&next - &v).norm();
        v = next;
        if delta < tol {
            break;
        }
    }
    let rayleigh = v.dot(&apply(&v));
    (v, rayleigh)
}

/// Soft-thresholding operator `sign(v)·max(|v| − t, 0)`.
#[inline]
pub(crate) fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn finds_dominant_eigenvalue() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 0.0, 0.0, 0.0, 1.0]);
        let (v, lambda) = power_iteration(|x| &a * x, DVector::from_element(3, 1.0), 500, 1e-14);
        let expected = (7.0 + 5.0f64.sqrt()) / 2.0;
        assert!((lambda - expected).abs() < 1e-10);
        assert!((&a * &v - &v * expected).norm() < 1e-6);
    }

    #[test]
    fn zero_operator() {
        let (v, lambda) = power_iteration(|x| x * 0.0, DVector::from_element(2, 3.0), 10, 1e-9);
        assert_eq!(lambda, 0.0);
        assert!((v.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn soft_threshold_cases() {
        assert_eq!(soft_threshold(3.0, 0.5), 2.5);
        assert_eq!(soft_threshold(-3.0, 0.5), -2.5);
        assert_eq!(soft_threshold(0.2, 0.5), 0.0);
    }
}
