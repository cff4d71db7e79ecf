//! Projective tensor norm values for pure states, and product-size accounting.
//!
//! Under the Hilbert–Schmidt norm the projective tensor norm of a pure state
//! with Schmidt coefficients `λ` is `(Σ λ_i)²`. Any product decomposition
//! `Ψ = Σ p_k A_k ⊗ B_k` gives the upper bound
//! `Σ p_k ‖A_k‖₂‖B_k‖₂ ≤ max_k ‖A_k‖₂‖B_k‖₂`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::decomposition::SeparableDecomposition;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{frobenius_norm, schmidt_form_state, DenseOperator};

/// Schmidt coefficients below this are dropped before building decompositions.
pub const SCHMIDT_TRUNCATION: f64 = 1e-12;

const NORMALIZATION_TOL: f64 = 1e-10;

/// Nonnegative, nonincreasing coefficients with `Σ λ_i² = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtVector {
    values: Vec<f64>,
}

impl SchmidtVector {
    /// Validates and sorts the coefficients into nonincreasing order.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("empty Schmidt vector".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidInput(format!("Schmidt coefficient {v} is not a nonnegative real")));
        }
        let sq: f64 = values.iter().map(|v| v * v).sum();
        if (sq - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidInput(format!("Schmidt coefficients have Σλ² = {sq}, expected 1")));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { values })
    }

    /// From squared coefficients (the probabilities `λ_i²`).
    pub fn from_squared(weights: &[f64]) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidInput(format!("Schmidt weight {w} is not a nonnegative real")));
        }
        Self::new(weights.iter().map(|w| w.sqrt()).collect())
    }

    /// `d` equal coefficients `1/√d`.
    pub fn uniform(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidInput("empty Schmidt vector".into()));
        }
        Self::new(vec![(1.0 / d as f64).sqrt(); d])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Coefficients above [`SCHMIDT_TRUNCATION`].
    pub fn truncated(&self) -> Vec<f64> {
        self.values.iter().copied().filter(|v| *v > SCHMIDT_TRUNCATION).collect()
    }

    /// Schmidt rank after truncation.
    pub fn rank(&self) -> usize {
        self.truncated().len()
    }

    /// `Σ_ij λ_iλ_j |ii⟩⟨jj|` on the truncated rank-`d` space.
    pub fn target_state(&self) -> DenseOperator {
        schmidt_form_state(&self.truncated()).expect("at least one coefficient survives truncation")
    }
}

/// Schmidt coefficients of a `dim_a · dim_b` state vector indexed `i·dim_b + j`.
pub fn schmidt_coefficients(state: &[Complex64], dim_a: usize, dim_b: usize) -> Result<SchmidtVector> {
    if dim_a == 0 || dim_b == 0 {
        return Err(Error::InvalidInput("local dimensions must be positive".into()));
    }
    check_dim(dim_a * dim_b, state.len())?;
    let norm = state.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::InvalidInput(format!("state has norm {norm}, expected 1")));
    }
    let m = DMatrix::from_row_slice(dim_a, dim_b, state);
    let sv: Vec<f64> = m.singular_values().iter().copied().collect();
    // renormalize away the SVD's last-bit drift
    let s = sv.iter().map(|v| v * v).sum::<f64>().sqrt();
    SchmidtVector::new(sv.into_iter().map(|v| v / s).collect())
}

/// `(Σ λ_i)²`, the minimal product size for the pure state under the 2-norm.
pub fn gamma2_pure(lambda: &SchmidtVector) -> f64 {
    lambda.values.iter().sum::<f64>().powi(2)
}

/// Average and worst product of local 2-norms over the terms of a decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CrossBound {
    /// `Σ_k p_k ‖A_k‖₂‖B_k‖₂`.
    pub sum: f64,
    /// `max_k ‖A_k‖₂‖B_k‖₂` over terms with nonzero weight.
    pub max: f64,
}

pub fn decomposition_cross_bound(d: &SeparableDecomposition) -> CrossBound {
    let mut sum = 0.0;
    let mut max: f64 = 0.0;
    for ((p, a), b) in d.weights().iter().zip(d.a_ops()).zip(d.b_ops()) {
        let np = frobenius_norm(a) * frobenius_norm(b);
        sum += p * np;
        if *p > 0.0 {
            max = max.max(np);
        }
    }
    CrossBound { sum, max }
}

/// `(max_i ‖genA_i‖₂)·(max_j ‖genB_j‖₂)`, which is the product size of the
/// convex hulls since the 2-norm is convex.
pub fn product_size(gen_a: &[DenseOperator], gen_b: &[DenseOperator]) -> Result<f64> {
    if gen_a.is_empty() || gen_b.is_empty() {
        return Err(Error::InvalidInput("generator lists must be nonempty".into()));
    }
    let set_norm = |g: &[DenseOperator]| g.iter().map(frobenius_norm).fold(0.0, f64::max);
    Ok(set_norm(gen_a) * set_norm(gen_b))
}
