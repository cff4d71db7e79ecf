//! Orthogonal operator bases normalized to `tr(C_i C_j†) = d δ_ij`.
//!
//! Every factory here returns `d²` operators of Frobenius norm `√d`. The
//! Hermitian factories differ in their trace profile:
//!
//! * [`gell_mann_basis`]: identity first, then traceless generalized
//!   Gell-Mann matrices.
//! * [`phase_point_basis`]: discrete Wigner phase-point operators for prime
//!   `d`, all unit trace.
//! * [`unit_trace_basis`]: a seeded real orthogonal rotation of the Gell-Mann
//!   basis whose top row is `(1/d, …, 1/d)`, so every element has unit trace.
//! * [`positive_trace_basis`]: Gram–Schmidt completion of a random positive
//!   top row, so every element has strictly positive trace.
//!
//! [`matrix_unit_basis`] is the non-Hermitian basis `√d |i⟩⟨j|`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{hs_inner, DenseOperator, HermitianSpectrum, I, ONE, ZERO};

/// Absolute tolerance for the basis axioms.
pub const BASIS_TOL: f64 = 1e-10;

/// Residual norm below which a Gram–Schmidt candidate is treated as dependent.
const GS_DEPENDENCE_TOL: f64 = 1e-8;
const GS_MAX_FAILURES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKind {
    GellMann,
    PhasePoint,
    UnitTraceRandom,
    PositiveTraceRandom,
    MatrixUnit,
    Custom,
}

impl BasisKind {
    pub fn name(self) -> &'static str {
        match self {
            BasisKind::GellMann => "gell-mann",
            BasisKind::PhasePoint => "phase-point",
            BasisKind::UnitTraceRandom => "unit-trace-random",
            BasisKind::PositiveTraceRandom => "positive-trace-random",
            BasisKind::MatrixUnit => "matrix-unit",
            BasisKind::Custom => "custom",
        }
    }

    fn requires_unit_trace(self) -> bool {
        matches!(self, BasisKind::UnitTraceRandom | BasisKind::PhasePoint)
    }

    const ALL: [BasisKind; 6] = [
        BasisKind::GellMann,
        BasisKind::PhasePoint,
        BasisKind::UnitTraceRandom,
        BasisKind::PositiveTraceRandom,
        BasisKind::MatrixUnit,
        BasisKind::Custom,
    ];
}

impl std::str::FromStr for BasisKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown basis kind {s:?}")))
    }
}

/// Builds a factory basis by kind; `seed` only affects the random kinds.
pub fn basis_by_kind(kind: BasisKind, d: usize, seed: u64) -> Result<OperatorBasis> {
    match kind {
        BasisKind::GellMann => gell_mann_basis(d),
        BasisKind::PhasePoint => phase_point_basis(d),
        BasisKind::UnitTraceRandom => unit_trace_basis(d, seed),
        BasisKind::PositiveTraceRandom => positive_trace_basis(d, seed),
        BasisKind::MatrixUnit => matrix_unit_basis(d),
        BasisKind::Custom => Err(Error::InvalidInput("custom bases are loaded from JSON, not generated".into())),
    }
}

/// An ordered set of `d²` operators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBasis")]
pub struct OperatorBasis {
    dim: usize,
    kind: BasisKind,
    hermitian: bool,
    operators: Vec<DenseOperator>,
}

#[derive(Deserialize)]
struct RawBasis {
    dim: usize,
    kind: BasisKind,
    hermitian: bool,
    operators: Vec<DenseOperator>,
}

impl TryFrom<RawBasis> for OperatorBasis {
    type Error = Error;
    fn try_from(raw: RawBasis) -> Result<Self> {
        let mut b = OperatorBasis::custom(raw.dim, raw.hermitian, raw.operators)?;
        b.kind = raw.kind;
        Ok(b)
    }
}

impl OperatorBasis {
    /// Wraps a user-supplied operator list. Shape is checked here; the
    /// orthogonality axioms are checked by [`verify_basis`].
    pub fn custom(dim: usize, hermitian: bool, operators: Vec<DenseOperator>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("basis dimension must be at least 1".into()));
        }
        if operators.len() != dim * dim {
            return Err(Error::InvalidInput(format!(
                "a basis of dimension {dim} needs {} operators, found {}",
                dim * dim,
                operators.len()
            )));
        }
        for op in &operators {
            check_dim(dim, op.dim())?;
        }
        Ok(Self {
            dim,
            kind: BasisKind::Custom,
            hermitian,
            operators,
        })
    }

    fn built(dim: usize, kind: BasisKind, hermitian: bool, operators: Vec<DenseOperator>) -> Self {
        debug_assert_eq!(operators.len(), dim * dim);
        Self {
            dim,
            kind,
            hermitian,
            operators,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn operators(&self) -> &[DenseOperator] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    /// Returns a copy with operator `i` replaced; the result is tagged `Custom`.
    pub fn with_operator(&self, i: usize, op: DenseOperator) -> Result<Self> {
        check_dim(self.dim, op.dim())?;
        let mut out = self.clone();
        out.operators[i] = op;
        out.kind = BasisKind::Custom;
        Ok(out)
    }

    /// Eigenvalues of every element, in basis order.
    pub fn element_spectra(&self) -> Result<Vec<HermitianSpectrum>> {
        self.operators.iter().map(|c| c.hermitian_spectrum()).collect()
    }
}

/// Whether two Hermitian bases have the same multiset of element spectra.
///
/// Unitarily equivalent bases always agree here; disagreement proves
/// inequivalence.
pub fn same_spectra(a: &OperatorBasis, b: &OperatorBasis, tol: f64) -> Result<bool> {
    check_dim(a.dim, b.dim)?;
    let sorted = |basis: &OperatorBasis| -> Result<Vec<Vec<f64>>> {
        let mut s: Vec<Vec<f64>> = basis
            .element_spectra()?
            .into_iter()
            .map(|s| s.eigenvalues().to_vec())
            .collect();
        s.sort_by(|x, y| {
            x.iter()
                .zip(y)
                .map(|(p, q)| p.total_cmp(q))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        Ok(s)
    };
    let (sa, sb) = (sorted(a)?, sorted(b)?);
    Ok(sa
        .iter()
        .zip(&sb)
        .all(|(x, y)| x.iter().zip(y).all(|(p, q)| (p - q).abs() <= tol)))
}

/// Identity followed by the traceless generalized Gell-Mann matrices, all
/// rescaled to norm `√d`.
///
/// Order: `𝟙`, then for each pair `j < k` the symmetric and antisymmetric
/// off-diagonal elements, then the `d − 1` diagonal elements. At `d = 2`
/// this is `(𝟙, σ_x, σ_y, σ_z)`.
pub fn gell_mann_basis(d: usize) -> Result<OperatorBasis> {
    if d == 0 {
        return Err(Error::InvalidInput("basis dimension must be at least 1".into()));
    }
    let s = (d as f64 / 2.0).sqrt();
    let mut ops = Vec::with_capacity(d * d);
    ops.push(DenseOperator::identity(d));
    for j in 0..d {
        for k in j + 1..d {
            let sym = DenseOperator::from_fn(d, |r, c| {
                if (r, c) == (j, k) || (r, c) == (k, j) {
                    Complex64::new(s, 0.0)
                } else {
                    ZERO
                }
            });
            let anti = DenseOperator::from_fn(d, |r, c| {
                if (r, c) == (j, k) {
                    -I * s
                } else if (r, c) == (k, j) {
                    I * s
                } else {
                    ZERO
                }
            });
            ops.push(sym);
            ops.push(anti);
        }
    }
    for l in 1..d {
        let lf = l as f64;
        let norm = (2.0 / (lf * (lf + 1.0))).sqrt() * s;
        ops.push(DenseOperator::from_fn(d, |r, c| {
            if r != c {
                ZERO
            } else if r < l {
                Complex64::new(norm, 0.0)
            } else if r == l {
                Complex64::new(-lf * norm, 0.0)
            } else {
                ZERO
            }
        }));
    }
    Ok(OperatorBasis::built(d, BasisKind::GellMann, true, ops))
}

pub(crate) fn is_prime(n: usize) -> bool {
    n >= 2 && (2..).take_while(|k| k * k <= n).all(|k| !n.is_multiple_of(k))
}

/// Phase-point operators `A_(q,p)` for prime `d`, row-major in `(q, p)`.
///
/// For odd `d`, `A_(q,p) = (1/d) Σ_(q',p') ω^(p'q − q'p) D_(q',p')` with
/// `D_(q,p) = τ^(qp) X^q Z^p`, `τ = ω^((d+1)/2)`, `X|j⟩ = |j+1⟩` and
/// `Z|j⟩ = ω^j|j⟩`. For `d = 2`, `A_(q,p) = ρ(c)` with the cube vertex
/// `c = ((−1)^p, (−1)^(q+p), (−1)^q)`.
pub fn phase_point_basis(d: usize) -> Result<OperatorBasis> {
    if !is_prime(d) {
        return Err(Error::UnsupportedDimension(d));
    }
    let ops = if d == 2 {
        let sign = |k: usize| if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        let mut ops = Vec::with_capacity(4);
        for q in 0..2 {
            for p in 0..2 {
                ops.push(crate::linalg::bloch_operator([sign(p), sign(q + p), sign(q)]));
            }
        }
        ops
    } else {
        odd_prime_phase_points(d)
    };
    Ok(OperatorBasis::built(d, BasisKind::PhasePoint, true, ops))
}

fn odd_prime_phase_points(d: usize) -> Vec<DenseOperator> {
    let omega: Vec<Complex64> = (0..d)
        .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / d as f64))
        .collect();
    let half = d.div_ceil(2);
    // displacement D_(q,p): column j carries ω^{half·qp + pj} at row j+q
    let displacement = |q: usize, p: usize| -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(d, d, ZERO);
        for j in 0..d {
            m[((j + q) % d, j)] = omega[(half * q * p + p * j) % d];
        }
        m
    };
    let displacements: Vec<DMatrix<Complex64>> = (0..d * d).map(|u| displacement(u / d, u % d)).collect();
    let inv_d = 1.0 / d as f64;
    let mut ops = Vec::with_capacity(d * d);
    for q in 0..d {
        for p in 0..d {
            let mut acc = DMatrix::from_element(d, d, ZERO);
            for (u, disp) in displacements.iter().enumerate() {
                let (qq, pp) = (u / d, u % d);
                // ω^(pp·q − qq·p) with the exponent reduced mod d
                let e = (pp * q + (d - qq) * p) % d;
                let c = omega[e] * inv_d;
                acc.zip_apply(disp, |a, b| *a += c * b);
            }
            ops.push(DenseOperator::from_matrix(acc).expect("square"));
        }
    }
    ops
}

/// Operators `W_k = Σ_i Q_ik G_i` over the Gell-Mann basis `G`.
fn rotate_gell_mann(d: usize, q: &DMatrix<f64>) -> Vec<DenseOperator> {
    let gm = gell_mann_basis(d).expect("d >= 1");
    (0..d * d)
        .map(|k| {
            DenseOperator::combination(
                d,
                gm.operators()
                    .iter()
                    .enumerate()
                    .map(|(i, g)| (Complex64::new(q[(i, k)], 0.0), g)),
            )
            .expect("uniform dims")
        })
        .collect()
}

fn gaussian_matrix(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| rng.sample(StandardNormal))
}

/// Haar-distributed orthogonal matrix from the QR factorization of a Gaussian matrix.
fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let qr = gaussian_matrix(n, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Hermitian basis with every element of unit trace.
///
/// The rotation is `blockdiag(1, R) · H`, where `H` is the Householder
/// reflection exchanging `e₁` and `(1/d)·𝟏` and `R` is a seeded random
/// orthogonal matrix, so the top row of the rotation is exactly `(1/d, …, 1/d)`.
pub fn unit_trace_basis(d: usize, seed: u64) -> Result<OperatorBasis> {
    if d < 2 {
        return Err(Error::InvalidInput("unit-trace bases need d >= 2".into()));
    }
    let n = d * d;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = nalgebra::DVector::from_element(n, 1.0 / d as f64);
    let mut w = -u;
    w[0] += 1.0;
    let house = DMatrix::<f64>::identity(n, n) - (&w * w.transpose()) * (2.0 / w.norm_squared());
    let r = random_orthogonal(n - 1, &mut rng);
    let mut block = DMatrix::<f64>::identity(n, n);
    block.view_mut((1, 1), (n - 1, n - 1)).copy_from(&r);
    let q = block * house;
    Ok(OperatorBasis::built(d, BasisKind::UnitTraceRandom, true, rotate_gell_mann(d, &q)))
}

/// Hermitian basis with strictly positive traces.
///
/// A random strictly positive unit vector is completed to an orthonormal
/// basis of `ℝ^(d²)` by modified Gram–Schmidt (two passes) over Gaussian
/// candidates; those rows form the rotation of the Gell-Mann basis, so
/// `tr W_k = d · top_k > 0`.
pub fn positive_trace_basis(d: usize, seed: u64) -> Result<OperatorBasis> {
    if d < 2 {
        return Err(Error::InvalidInput("positive-trace bases need d >= 2".into()));
    }
    let n = d * d;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut top: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let norm = top.iter().map(|x| x * x).sum::<f64>().sqrt();
    top.iter_mut().for_each(|x| *x /= norm);

    let mut rows: Vec<Vec<f64>> = vec![top];
    let mut failures = 0;
    while rows.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        for _pass in 0..2 {
            for r in &rows {
                let dot: f64 = r.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(r).for_each(|(x, y)| *x -= dot * y);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < GS_DEPENDENCE_TOL {
            failures += 1;
            if failures >= GS_MAX_FAILURES {
                return Err(Error::Internal(format!(
                    "Gram-Schmidt degenerate {failures} times at d = {d}"
                )));
            }
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        rows.push(v);
    }
    let q = DMatrix::from_fn(n, n, |i, k| rows[i][k]);
    Ok(OperatorBasis::built(d, BasisKind::PositiveTraceRandom, true, rotate_gell_mann(d, &q)))
}

/// `C_ij = √d |i⟩⟨j|`, row-major in `(i, j)`.
pub fn matrix_unit_basis(d: usize) -> Result<OperatorBasis> {
    if d == 0 {
        return Err(Error::InvalidInput("basis dimension must be at least 1".into()));
    }
    let s = Complex64::new((d as f64).sqrt(), 0.0);
    let ops = (0..d * d).map(|k| DenseOperator::unit(d, k / d, k % d, s)).collect();
    Ok(OperatorBasis::built(d, BasisKind::MatrixUnit, false, ops))
}

/// Expansion coefficients `x_i` with `X = Σ x_i C_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientVector(pub Vec<Complex64>);

impl CoefficientVector {
    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self, other⟩ = Σ conj(self_i) other_i`.
    pub fn inner(&self, other: &CoefficientVector) -> Complex64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }
}

/// `x_i = tr(X C_i†) / d`.
pub fn coefficients(x: &DenseOperator, basis: &OperatorBasis) -> Result<CoefficientVector> {
    check_dim(basis.dim, x.dim())?;
    let inv_d = 1.0 / basis.dim as f64;
    basis
        .operators
        .iter()
        .map(|c| hs_inner(x, c).map(|z| z * inv_d))
        .collect::<Result<Vec<_>>>()
        .map(CoefficientVector)
}

/// `Σ x_i C_i`.
pub fn reconstruct(x: &CoefficientVector, basis: &OperatorBasis) -> Result<DenseOperator> {
    if x.0.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            found: x.0.len(),
        });
    }
    DenseOperator::combination(basis.dim, x.0.iter().copied().zip(&basis.operators))
}

/// Outcome of [`verify_basis`]. Residuals are absolute.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BasisReport {
    pub dim: usize,
    pub kind: BasisKind,
    /// `max_ij |tr(C_i C_j†) − d δ_ij|`.
    pub gram_residual: f64,
    /// Index pair attaining `gram_residual`.
    pub worst_pair: (usize, usize),
    pub norm_residual: f64,
    pub hermiticity_residual: Option<f64>,
    pub unit_trace_residual: Option<f64>,
    pub min_real_trace: Option<f64>,
    pub gram_ok: bool,
    pub norm_ok: bool,
    pub hermitian_ok: bool,
    pub trace_ok: bool,
}

impl BasisReport {
    pub fn passed(&self) -> bool {
        self.gram_ok && self.norm_ok && self.hermitian_ok && self.trace_ok
    }
}

/// Checks the basis axioms for the basis' declared kind. Failures are
/// reported, never raised.
pub fn verify_basis(basis: &OperatorBasis) -> BasisReport {
    let d = basis.dim;
    let df = d as f64;
    let ops = &basis.operators;

    let mut gram_residual: f64 = 0.0;
    let mut worst_pair = (0, 0);
    for i in 0..ops.len() {
        for j in i..ops.len() {
            let g = hs_inner(&ops[i], &ops[j]).expect("uniform dims");
            let want = if i == j { df } else { 0.0 };
            let r = (g - want).norm();
            if r > gram_residual {
                gram_residual = r;
                worst_pair = (i, j);
            }
        }
    }
    let norm_residual = ops
        .iter()
        .map(|c| (crate::linalg::frobenius_norm(c) - df.sqrt()).abs())
        .fold(0.0, f64::max);

    let hermiticity_residual = basis
        .hermitian
        .then(|| ops.iter().map(|c| c.hermiticity_residual()).fold(0.0, f64::max));
    let hermitian_ok = !basis.hermitian || ops.iter().all(|c| c.is_hermitian());

    let unit_trace_residual = basis
        .kind
        .requires_unit_trace()
        .then(|| ops.iter().map(|c| (c.trace() - ONE).norm()).fold(0.0, f64::max));
    let min_real_trace = (basis.kind == BasisKind::PositiveTraceRandom)
        .then(|| ops.iter().map(|c| c.trace().re).fold(f64::INFINITY, f64::min));
    let trace_ok = unit_trace_residual.is_none_or(|r| r <= BASIS_TOL) && min_real_trace.is_none_or(|t| t > 0.0);

    BasisReport {
        dim: d,
        kind: basis.kind,
        gram_residual,
        worst_pair,
        norm_residual,
        hermiticity_residual,
        unit_trace_residual,
        min_real_trace,
        gram_ok: gram_residual <= BASIS_TOL,
        norm_ok: norm_residual <= BASIS_TOL,
        hermitian_ok,
        trace_ok,
    }
}
