//! Generalized separable decompositions `Ψ = Σ_k p_k A_k ⊗ B_k`.
//!
//! Local operators on the B side are expanded in the conjugate basis:
//! with `A_k = Σ_i α^k_i C_i` and `B_k = Σ_j (β^k_j)* C̄_j`, where
//! `C̄_j = conj(C_j)` (equal to `C_j^T` for Hermitian bases), the matching
//! condition for a target `Ψ` reads
//!
//! ```text
//! d² Σ_k p_k α^k_i (β^k_j)* = tr(Ψ (C_i ⊗ C̄_j)†)
//! ```
//!
//! which is `δ_ij` for the maximally entangled state and
//! `d λ_g λ_h δ_gi δ_hj` for a Schmidt-form state over matrix units.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{coefficients, verify_basis, CoefficientVector, OperatorBasis};
use crate::cross_norm::SchmidtVector;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{frobenius_distance, frobenius_norm, hs_inner, maxent_state, tensor_product, DenseOperator};

/// Tolerance on `Σ p_k = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Tolerance for declaring a term's norm product extremal.
pub const EXTREMAL_TOL: f64 = 1e-9;
/// Frobenius distance under which two local operators count as the same.
pub const DISTINCT_TOL: f64 = 1e-10;

/// Weighted list of product terms. Weights must be finite and nonnegative;
/// normalization is checked by [`verify`] rather than on construction so
/// corrupted inputs can still be inspected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDecomposition")]
pub struct SeparableDecomposition {
    #[serde(rename = "dimA")]
    dim_a: usize,
    #[serde(rename = "dimB")]
    dim_b: usize,
    weights: Vec<f64>,
    a_ops: Vec<DenseOperator>,
    b_ops: Vec<DenseOperator>,
}

#[derive(Deserialize)]
struct RawDecomposition {
    #[serde(rename = "dimA")]
    dim_a: usize,
    #[serde(rename = "dimB")]
    dim_b: usize,
    weights: Vec<f64>,
    a_ops: Vec<DenseOperator>,
    b_ops: Vec<DenseOperator>,
}

impl TryFrom<RawDecomposition> for SeparableDecomposition {
    type Error = Error;
    fn try_from(r: RawDecomposition) -> Result<Self> {
        SeparableDecomposition::new(r.dim_a, r.dim_b, r.weights, r.a_ops, r.b_ops)
    }
}

impl SeparableDecomposition {
    pub fn new(
        dim_a: usize,
        dim_b: usize,
        weights: Vec<f64>,
        a_ops: Vec<DenseOperator>,
        b_ops: Vec<DenseOperator>,
    ) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidInput("decomposition has no terms".into()));
        }
        if a_ops.len() != weights.len() || b_ops.len() != weights.len() {
            return Err(Error::InvalidInput(format!(
                "term count mismatch: {} weights, {} A operators, {} B operators",
                weights.len(),
                a_ops.len(),
                b_ops.len()
            )));
        }
        if let Some(p) = weights.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidInput(format!("weight {p} is not a nonnegative real")));
        }
        for a in &a_ops {
            check_dim(dim_a, a.dim())?;
        }
        for b in &b_ops {
            check_dim(dim_b, b.dim())?;
        }
        Ok(Self {
            dim_a,
            dim_b,
            weights,
            a_ops,
            b_ops,
        })
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn a_ops(&self) -> &[DenseOperator] {
        &self.a_ops
    }

    pub fn b_ops(&self) -> &[DenseOperator] {
        &self.b_ops
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (f64, &DenseOperator, &DenseOperator)> {
        self.weights
            .iter()
            .zip(&self.a_ops)
            .zip(&self.b_ops)
            .map(|((p, a), b)| (*p, a, b))
    }

    pub fn weight_sum_residual(&self) -> f64 {
        (self.weights.iter().sum::<f64>() - 1.0).abs()
    }

    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(self.dim_a, self.dim_b, weights, self.a_ops.clone(), self.b_ops.clone())
    }

    /// Keeps only the listed terms and renormalizes their weights.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let total: f64 = indices.iter().map(|&k| self.weights[k]).sum();
        if total <= 0.0 {
            return Err(Error::InvalidInput("selected terms carry no weight".into()));
        }
        Self::new(
            self.dim_a,
            self.dim_b,
            indices.iter().map(|&k| self.weights[k] / total).collect(),
            indices.iter().map(|&k| self.a_ops[k].clone()).collect(),
            indices.iter().map(|&k| self.b_ops[k].clone()).collect(),
        )
    }

    /// `Σ_k p_k A_k ⊗ B_k`.
    pub fn reconstruct(&self) -> DenseOperator {
        let n = self.dim_a * self.dim_b;
        let mut acc = DenseOperator::zeros(n).into_matrix();
        for (p, a, b) in self.terms() {
            acc.zip_apply(tensor_product(a, b).matrix(), |x, y| *x += y * p);
        }
        DenseOperator::from_matrix(acc).expect("square")
    }
}

/// `p_k = 1/d²`, `A_k = C_k`, `B_k = C̄_k` (the transpose, for Hermitian bases).
pub fn maxent_decomposition(basis: &OperatorBasis) -> Result<SeparableDecomposition> {
    let report = verify_basis(basis);
    if !report.passed() {
        return Err(Error::InvalidInput(format!(
            "basis fails verification (Gram residual {:e}, norm residual {:e})",
            report.gram_residual, report.norm_residual
        )));
    }
    let d = basis.dim();
    let n = d * d;
    let a_ops = basis.operators().to_vec();
    let b_ops = basis.operators().iter().map(|c| c.conj()).collect();
    SeparableDecomposition::new(d, d, vec![1.0 / n as f64; n], a_ops, b_ops)
}

/// `d²`-term decomposition of `Σ_ij λ_iλ_j |ii⟩⟨jj|` over matrix units.
///
/// Terms are labelled `k = (s, t)` with `A_k[i][j] = √(λ_iλ_j) ω^(si+tj)`
/// (coefficients `√(λ_iλ_j/d) ω^(si+tj)` on `√d|i⟩⟨j|`), `ω = e^(2πi/d)`,
/// `B_k = conj(A_k)` and `p_k = 1/d²`. Coefficients below the truncation
/// threshold are dropped first, so `d` is the Schmidt rank.
pub fn pure_state_decomposition(lambda: &SchmidtVector) -> Result<SeparableDecomposition> {
    let l = lambda.truncated();
    let d = l.len();
    if d == 0 {
        return Err(Error::InvalidInput("Schmidt vector is zero after truncation".into()));
    }
    let n = d * d;
    let omega: Vec<Complex64> = (0..d)
        .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / d as f64))
        .collect();
    let mut a_ops = Vec::with_capacity(n);
    let mut b_ops = Vec::with_capacity(n);
    for s in 0..d {
        for t in 0..d {
            let a = DenseOperator::from_fn(d, |i, j| omega[(s * i + t * j) % d] * (l[i] * l[j]).sqrt());
            b_ops.push(a.conj());
            a_ops.push(a);
        }
    }
    SeparableDecomposition::new(d, d, vec![1.0 / n as f64; n], a_ops, b_ops)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    /// Frobenius distance between `Σ p_k A_k ⊗ B_k` and the target.
    pub distance: f64,
    pub tol: f64,
    pub weight_sum_residual: f64,
    pub passed: bool,
}

/// Passes iff the reconstruction is within `tol` of `target` and the weights
/// form a probability distribution.
pub fn verify(d: &SeparableDecomposition, target: &DenseOperator, tol: f64) -> Result<VerifyReport> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    check_dim(d.dim_a * d.dim_b, target.dim())?;
    let distance = frobenius_distance(&d.reconstruct(), target)?;
    let weight_sum_residual = d.weight_sum_residual();
    Ok(VerifyReport {
        distance,
        tol,
        weight_sum_residual,
        passed: distance <= tol && weight_sum_residual <= WEIGHT_SUM_TOL,
    })
}

/// Matching-condition diagnostics for a decomposition expanded in a basis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionDiagnostics {
    /// Frobenius distance of the reconstruction to the target.
    pub reconstruction_error: f64,
    pub term_count: usize,
    pub distinct_a_ops: usize,
    pub distinct_b_ops: usize,
    /// `‖A_k‖₂‖B_k‖₂` per term.
    pub norm_products: Vec<f64>,
    /// `max_ij |d² Σ_k p_k α^k_i (β^k_j)* − T_ij|`.
    pub match_residual: f64,
    /// `Re Σ_k p_k ⟨β^k, α^k⟩`.
    pub overlap_sum: f64,
    /// `Re tr(T)/d²`, the value `overlap_sum` must take.
    pub overlap_expected: f64,
    /// `max_k (1 − |⟨β^k, α^k⟩| / (‖α^k‖‖β^k‖))`; zero iff every pair is proportional.
    pub proportionality_residual: f64,
    /// `d · overlap_expected`, the norm product every term attains when the
    /// decomposition is optimal.
    pub extremal_norm_product: f64,
    pub all_terms_extremal: bool,
}

/// Diagnostics against the maximally entangled state, where `T_ij = δ_ij`.
pub fn diagnostics(d: &SeparableDecomposition, basis: &OperatorBasis) -> Result<DecompositionDiagnostics> {
    check_dim(basis.dim(), d.dim_a)?;
    let target = maxent_state(basis.dim())?;
    let n = basis.len();
    let identity = |i: usize, j: usize| if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
    let expected: Vec<Complex64> = (0..n * n).map(|u| identity(u / n, u % n)).collect();
    diagnostics_with(d, basis, &target, &expected)
}

/// Diagnostics against an arbitrary target, with `T_ij = tr(Ψ (C_i ⊗ C̄_j)†)`.
pub fn diagnostics_for_target(
    d: &SeparableDecomposition,
    basis: &OperatorBasis,
    target: &DenseOperator,
) -> Result<DecompositionDiagnostics> {
    check_dim(basis.dim(), d.dim_a)?;
    check_dim(basis.dim() * basis.dim(), target.dim())?;
    let conj: Vec<DenseOperator> = basis.operators().iter().map(|c| c.conj()).collect();
    let mut expected = Vec::with_capacity(basis.len() * basis.len());
    for ci in basis.operators() {
        for cj in &conj {
            expected.push(hs_inner(target, &tensor_product(ci, cj))?);
        }
    }
    diagnostics_with(d, basis, target, &expected)
}

fn diagnostics_with(
    dec: &SeparableDecomposition,
    basis: &OperatorBasis,
    target: &DenseOperator,
    expected: &[Complex64],
) -> Result<DecompositionDiagnostics> {
    check_dim(basis.dim(), dec.dim_a)?;
    check_dim(basis.dim(), dec.dim_b)?;
    let dim = basis.dim();
    let n = basis.len();
    let d2 = (dim * dim) as f64;

    let alphas: Vec<CoefficientVector> = dec.a_ops.iter().map(|a| coefficients(a, basis)).collect::<Result<_>>()?;
    let betas: Vec<CoefficientVector> = dec
        .b_ops
        .iter()
        .map(|b| coefficients(&b.conj(), basis))
        .collect::<Result<_>>()?;

    let mut matching = vec![Complex64::new(0.0, 0.0); n * n];
    for ((p, alpha), beta) in dec.weights.iter().zip(&alphas).zip(&betas) {
        for (i, a) in alpha.values().iter().enumerate() {
            let scaled = a * (d2 * p);
            for (j, b) in beta.values().iter().enumerate() {
                matching[i * n + j] += scaled * b.conj();
            }
        }
    }
    let match_residual = matching
        .iter()
        .zip(expected)
        .map(|(m, t)| (m - t).norm())
        .fold(0.0, f64::max);

    let overlap_sum = dec
        .weights
        .iter()
        .zip(alphas.iter().zip(&betas))
        .map(|(p, (a, b))| p * b.inner(a).re)
        .sum();
    let overlap_expected = (0..n).map(|i| expected[i * n + i].re).sum::<f64>() / d2;

    let proportionality_residual = alphas
        .iter()
        .zip(&betas)
        .map(|(a, b)| {
            let scale = a.norm() * b.norm();
            if scale == 0.0 {
                0.0
            } else {
                (1.0 - b.inner(a).norm() / scale).max(0.0)
            }
        })
        .fold(0.0, f64::max);

    let norm_products: Vec<f64> = dec
        .a_ops
        .iter()
        .zip(&dec.b_ops)
        .map(|(a, b)| frobenius_norm(a) * frobenius_norm(b))
        .collect();
    let extremal_norm_product = dim as f64 * overlap_expected;
    let all_terms_extremal = norm_products
        .iter()
        .all(|np| (np - extremal_norm_product).abs() <= EXTREMAL_TOL);

    Ok(DecompositionDiagnostics {
        reconstruction_error: frobenius_distance(&dec.reconstruct(), target)?,
        term_count: dec.len(),
        distinct_a_ops: count_distinct(&dec.a_ops),
        distinct_b_ops: count_distinct(&dec.b_ops),
        norm_products,
        match_residual,
        overlap_sum,
        overlap_expected,
        proportionality_residual,
        extremal_norm_product,
        all_terms_extremal,
    })
}

fn count_distinct(ops: &[DenseOperator]) -> usize {
    let mut reps: Vec<&DenseOperator> = Vec::new();
    for op in ops {
        if !reps
            .iter()
            .any(|r| frobenius_distance(r, op).is_ok_and(|dist| dist <= DISTINCT_TOL))
        {
            reps.push(op);
        }
    }
    reps.len()
}

/// Rescales every term so all local operators share the 2-norm `√γ`, where
/// `γ = Σ_k p_k ‖A_k‖₂‖B_k‖₂`, moving the norm products into the weights.
pub fn equalize_norms(d: &SeparableDecomposition) -> Result<SeparableDecomposition> {
    let mut gamma = 0.0;
    let mut norms = Vec::with_capacity(d.len());
    for (k, (p, a, b)) in d.terms().enumerate() {
        let (na, nb) = (frobenius_norm(a), frobenius_norm(b));
        if p > 0.0 && (na == 0.0 || nb == 0.0) {
            return Err(Error::InvalidInput(format!("term {k} has a zero-norm local operator")));
        }
        gamma += p * na * nb;
        norms.push((na, nb));
    }
    let root = gamma.sqrt();
    let mut weights = Vec::with_capacity(d.len());
    let mut a_ops = Vec::with_capacity(d.len());
    let mut b_ops = Vec::with_capacity(d.len());
    for ((p, a, b), (na, nb)) in d.terms().zip(norms) {
        if p > 0.0 {
            weights.push(p * na * nb / gamma);
            a_ops.push(a.scale_real(root / na));
            b_ops.push(b.scale_real(root / nb));
        } else {
            weights.push(0.0);
            a_ops.push(a.clone());
            b_ops.push(b.clone());
        }
    }
    SeparableDecomposition::new(d.dim_a, d.dim_b, weights, a_ops, b_ops)
}
