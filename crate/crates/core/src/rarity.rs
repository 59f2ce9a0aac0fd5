//! Atom rarity from sparse-code statistics, rarity transforms, and atom
//! reweighting.
//!
//! The measures are activation frequencies: an atom used by many patches
//! scores high under `CountFraction`, `CoeffMass` and `SquaredCount`, and
//! low under `NegLogCount`. A transform that should boost rare content must
//! therefore be decreasing in the frequency measures (a sigmoid with
//! negative slope, for example) or increasing in `NegLogCount`.

use nalgebra::DMatrix;

use crate::coder::{Dictionary, SparseCodes};
use crate::{Error, Result};

/// Coefficients at or below this magnitude count as zero.
pub const ZERO_COEF: f64 = 1e-12;

/// Per-atom usage of a code matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationStats {
    /// Number of columns with a nonzero coefficient for each atom.
    pub counts: Vec<usize>,
    /// Sum of absolute coefficients for each atom.
    pub mass: Vec<f64>,
    /// Number of columns `N`.
    pub columns: usize,
}

pub fn activation_stats(codes: &SparseCodes) -> ActivationStats {
    let k = codes.num_atoms();
    let mut counts = vec![0usize; k];
    let mut mass = vec![0.0f64; k];
    // Column-ascending accumulation keeps the sums independent of atom labels.
    for col in codes.columns() {
        for &(i, c) in col.entries() {
            if c.abs() > ZERO_COEF {
                counts[i] += 1;
                mass[i] += c.abs();
            }
        }
    }
    ActivationStats {
        counts,
        mass,
        columns: codes.len(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RarityKind {
    /// `m_i / S`
    #[default]
    CountFraction,
    /// `Σ_j |X_ij| / S`
    CoeffMass,
    /// `−log((m_i + ε·S) / S)`, clamped at 0
    NegLogCount,
    /// `(m_i / S)²`
    SquaredCount,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RarityMeasure {
    pub kind: RarityKind,
    /// Scale constant `S`; `None` uses the column count `N`.
    pub scale: Option<f64>,
    /// Smoothing for `NegLogCount`.
    pub epsilon: f64,
}

impl Default for RarityMeasure {
    fn default() -> Self {
        RarityMeasure {
            kind: RarityKind::CountFraction,
            scale: None,
            epsilon: 1e-12,
        }
    }
}

impl RarityMeasure {
    pub fn resolved_scale(&self, columns: usize) -> f64 {
        self.scale.unwrap_or(columns as f64)
    }
}

/// `K` nonnegative finite scores, one per atom.
#[derive(Debug, Clone, PartialEq)]
pub struct RarityVector(Vec<f64>);

impl RarityVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::contract(format!(
                "rarity {i} = {v} is not finite and nonnegative"
            )));
        }
        Ok(RarityVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Moves entry `k` to position `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.0.len() {
            return Err(Error::contract("permutation length mismatch"));
        }
        let mut out = vec![0.0; self.0.len()];
        for (k, &to) in perm.iter().enumerate() {
            out[to] = self.0[k];
        }
        Ok(RarityVector(out))
    }
}

pub fn rarity(stats: &ActivationStats, measure: &RarityMeasure) -> Result<RarityVector> {
    let s = measure.resolved_scale(stats.columns);
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::contract(format!(
            "scale constant S must be positive, got {s}"
        )));
    }
    if !(measure.epsilon >= 0.0) {
        return Err(Error::contract("epsilon must be nonnegative"));
    }
    let values = match measure.kind {
        RarityKind::CountFraction => stats.counts.iter().map(|&m| m as f64 / s).collect(),
        RarityKind::CoeffMass => stats.mass.iter().map(|&w| w / s).collect(),
        RarityKind::NegLogCount => stats
            .counts
            .iter()
            .map(|&m| (-((m as f64 + measure.epsilon * s) / s).ln()).max(0.0))
            .collect(),
        RarityKind::SquaredCount => stats
            .counts
            .iter()
            .map(|&m| {
                let f = m as f64 / s;
                f * f
            })
            .collect(),
    };
    RarityVector::new(values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransformKind {
    Identity,
    #[default]
    Sigmoid,
    Gamma,
    Affine,
}

/// Elementwise rarity transform.
///
/// The base map is selected by `kind`: identity, `1/(1+exp(−a(R−b)))`,
/// `R^g`, or `R` for `Affine`. Every kind is then followed by the affine
/// stage `max(0, scale·v + offset)`, which is skipped at its neutral setting
/// (`scale = 1`, `offset = 0`) so the identity stays bit-exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformSpec {
    pub kind: TransformKind,
    /// Sigmoid slope `a`.
    pub slope: f64,
    /// Sigmoid center `b`.
    pub center: f64,
    /// Gamma exponent `g`.
    pub gamma: f64,
    pub scale: f64,
    pub offset: f64,
}

impl Default for TransformSpec {
    fn default() -> Self {
        TransformSpec {
            kind: TransformKind::Sigmoid,
            slope: -10.0,
            center: 0.1,
            gamma: 1.0,
            scale: 1.0,
            offset: 0.0,
        }
    }
}

impl TransformSpec {
    pub fn identity() -> Self {
        TransformSpec {
            kind: TransformKind::Identity,
            ..TransformSpec::default()
        }
    }

    /// Maps every rarity to the constant `c ≥ 0`.
    pub fn constant(c: f64) -> Self {
        TransformSpec {
            kind: TransformKind::Affine,
            scale: 0.0,
            offset: c,
            ..TransformSpec::default()
        }
    }

    pub fn sigmoid(slope: f64, center: f64) -> Self {
        TransformSpec {
            kind: TransformKind::Sigmoid,
            slope,
            center,
            ..TransformSpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let params = [self.slope, self.center, self.gamma, self.scale, self.offset];
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::contract("transform parameters must be finite"));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::contract(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        Ok(())
    }

    fn apply(&self, r: f64) -> f64 {
        let v = match self.kind {
            TransformKind::Identity | TransformKind::Affine => r,
            TransformKind::Sigmoid => 1.0 / (1.0 + (-self.slope * (r - self.center)).exp()),
            TransformKind::Gamma => r.powf(self.gamma),
        };
        if self.scale == 1.0 && self.offset == 0.0 {
            v
        } else {
            (self.scale * v + self.offset).max(0.0)
        }
    }
}

pub fn transform(r: &RarityVector, f: &TransformSpec) -> Result<RarityVector> {
    f.validate()?;
    RarityVector::new(r.values().iter().map(|&v| f.apply(v)).collect())
}

/// `D·diag(R̃)`: column `i` scaled by `R̃_i`, without renormalization.
pub fn reweight_dictionary(dict: &Dictionary, weights: &RarityVector) -> Result<DMatrix<f64>> {
    if weights.len() != dict.len() {
        return Err(Error::contract(format!(
            "{} weights for {} atoms",
            weights.len(),
            dict.len()
        )));
    }
    let mut out = dict.atoms().clone();
    for (mut col, &w) in out.column_iter_mut().zip(weights.values()) {
        col *= w;
    }
    Ok(out)
}
