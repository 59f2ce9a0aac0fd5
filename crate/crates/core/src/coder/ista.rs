use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{CoderConfig, Dictionary};
use crate::linalg::{power_iteration, soft_threshold};
use crate::{Error, Result};

const POWER_ITERS: usize = 30;
const POWER_TOL: f64 = 1e-8;
/// Step halvings tried before an iterate is declared stalled.
const MAX_BACKTRACKS: usize = 60;

/// Objective values of an ISTA run, starting with the value at `x = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct IstaTrace {
    pub x: DVector<f64>,
    pub objectives: Vec<f64>,
}

/// Largest eigenvalue of `DᵀD`, estimated by power iteration on the smaller
/// Gram matrix `DDᵀ` (same nonzero spectrum).
pub fn dictionary_lipschitz(dict: &Dictionary) -> f64 {
    let d = dict.atoms();
    let gram: DMatrix<f64> = d * d.transpose();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6c69_7073);
    let start = DVector::from_fn(dict.dim(), |_, _| StandardNormal.sample(&mut rng));
    let (_, lambda) = power_iteration(|v| &gram * v, start, POWER_ITERS, POWER_TOL);
    lambda
}

/// Iterative shrinkage-thresholding for `min ‖y − Dx‖² + α‖x‖₁`.
///
/// Each step is `x ← soft(x − s·2Dᵀ(Dx − y), s·α)` with `s = 1/(2L)` and
/// `L` the power-iteration estimate of `λ_max(DᵀD)`. An estimate that falls
/// short of the true constant can make a step overshoot; such a step is
/// rejected and retried with `L` doubled, so the objective never increases.
pub fn ista(dict: &Dictionary, y: &[f64], cfg: &CoderConfig) -> Result<DVector<f64>> {
    Ok(ista_trace(dict, y, cfg)?.x)
}

/// Like [`ista`], also returning the objective after every accepted step.
pub fn ista_trace(dict: &Dictionary, y: &[f64], cfg: &CoderConfig) -> Result<IstaTrace> {
    cfg.validate()?;
    if y.len() != dict.dim() {
        return Err(Error::contract(format!(
            "signal has length {}, dictionary dimension is {}",
            y.len(),
            dict.dim()
        )));
    }
    let mut objectives = Vec::new();
    let x = solve(
        dict,
        y,
        cfg,
        dictionary_lipschitz(dict),
        Some(&mut objectives),
    );
    Ok(IstaTrace { x, objectives })
}

fn objective(d: &DMatrix<f64>, y: &DVector<f64>, x: &DVector<f64>, alpha: f64) -> f64 {
    (y - d * x).norm_squared() + alpha * x.lp_norm(1)
}

pub(super) fn solve(
    dict: &Dictionary,
    y: &[f64],
    cfg: &CoderConfig,
    lipschitz: f64,
    mut trace: Option<&mut Vec<f64>>,
) -> DVector<f64> {
    let d = dict.atoms();
    let y = DVector::from_column_slice(y);
    let mut x = DVector::zeros(dict.len());
    let mut f = objective(d, &y, &x, cfg.alpha);
    if let Some(t) = trace.as_deref_mut() {
        t.push(f);
    }
    let mut lip = lipschitz.max(f64::MIN_POSITIVE);

    for _ in 0..cfg.max_iter {
        if f == 0.0 {
            break;
        }
        let grad = d.tr_mul(&(d * &x - &y)) * 2.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let step = 1.0 / (2.0 * lip);
            let thresh = step * cfg.alpha;
            let cand = DVector::from_fn(x.len(), |i, _| {
                soft_threshold(x[i] - step * grad[i], thresh)
            });
            let fc = objective(d, &y, &cand, cfg.alpha);
            if fc <= f {
                accepted = Some((cand, fc));
                break;
            }
            lip *= 2.0;
        }
        let Some((next, f_next)) = accepted else {
            break;
        };
        let change = (f - f_next) / f;
        x = next;
        f = f_next;
        if let Some(t) = trace.as_deref_mut() {
            t.push(f);
        }
        if change < cfg.obj_tol {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coder::tests::random_dictionary;
    use crate::coder::CoderMode;
    use rand::Rng;

    fn cfg(alpha: f64) -> CoderConfig {
        CoderConfig {
            mode: CoderMode::Ista,
            alpha,
            max_iter: 20_000,
            obj_tol: 1e-15,
            ..CoderConfig::default()
        }
    }

    /// Cyclic coordinate descent on the same objective, run to tolerance `tol`.
    fn coordinate_descent(
        d: &DMatrix<f64>,
        y: &DVector<f64>,
        alpha: f64,
        tol: f64,
    ) -> DVector<f64> {
        let k = d.ncols();
        let mut x: DVector<f64> = DVector::zeros(k);
        let mut r = y.clone();
        loop {
            let mut max_delta: f64 = 0.0;
            for i in 0..k {
                let di = d.column(i);
                let sq = di.norm_squared();
                let rho = di.dot(&r) + sq * x[i];
                let new = soft_threshold(rho, alpha / 2.0) / sq;
                let delta = new - x[i];
                if delta != 0.0 {
                    r.axpy(-delta, &di, 1.0);
                    x[i] = new;
                }
                max_delta = max_delta.max(delta.abs());
            }
            if max_delta < tol {
                return x;
            }
        }
    }

    #[test]
    fn identity_dictionary_closed_form() {
        let d = Dictionary::new(DMatrix::identity(2, 2)).unwrap();
        let x = ista(&d, &[3.0, 0.0], &cfg(1.0)).unwrap();
        assert!((x[0] - 2.5).abs() < 1e-9);
        assert_eq!(x[1], 0.0);
    }

    #[test]
    fn zero_signal() {
        let d = random_dictionary(8, 12, 1);
        let x = ista(&d, &[0.0; 8], &cfg(0.5)).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn lipschitz_estimate_close_to_exact() {
        let d = random_dictionary(8, 12, 2);
        let exact = (d.atoms().tr_mul(d.atoms())).symmetric_eigenvalues().max();
        let est = dictionary_lipschitz(&d);
        assert!(est <= exact * (1.0 + 1e-12));
        assert!(est > 0.99 * exact);
    }

    #[test]
    fn matches_coordinate_descent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for seed in 0..10 {
            let d = random_dictionary(8, 12, 50 + seed);
            let y: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
            let yv = DVector::from_column_slice(&y);
            let oracle = coordinate_descent(d.atoms(), &yv, 0.5, 1e-10);
            let x = ista(&d, &y, &cfg(0.5)).unwrap();
            let (fo, fi) = (
                objective(d.atoms(), &yv, &oracle, 0.5),
                objective(d.atoms(), &yv, &x, 0.5),
            );
            assert!((fi - fo).abs() < 1e-4, "seed {seed}: ista {fi} vs cd {fo}");
        }
    }

    #[test]
    fn objective_never_increases() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for seed in 0..10 {
            let d = random_dictionary(16, 32, seed);
            let y: Vec<f64> = (0..16).map(|_| rng.random_range(-2.0..2.0)).collect();
            let trace = ista_trace(
                &d,
                &y,
                &CoderConfig {
                    mode: CoderMode::Ista,
                    ..CoderConfig::default()
                },
            )
            .unwrap();
            for w in trace.objectives.windows(2) {
                assert!(w[1] <= w[0] + 1e-12);
            }
        }
    }

    #[test]
    fn zero_alpha_is_least_squares_descent() {
        let d = Dictionary::new(DMatrix::identity(3, 3)).unwrap();
        let x = ista(&d, &[1.0, -2.0, 0.5], &cfg(0.0)).unwrap();
        assert!((x - DVector::from_column_slice(&[1.0, -2.0, 0.5])).norm() < 1e-9);
    }
}
