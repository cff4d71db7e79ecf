//! Dense complex operators on a `d`-dimensional Hilbert space.
//!
//! [`DenseOperator`] is the single carrier type used for states, basis
//! elements, local operators of product decompositions and POVM elements.
//! The norms here are the Hilbert–Schmidt (Frobenius) 2-norm and the trace
//! norm; the negativity of a Hermitian operator is the absolute sum of its
//! negative eigenvalues, `(‖X‖₁ − tr X) / 2`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{check_dim, Error, Result};

/// Relative tolerance of the Hermiticity predicate.
pub const HERMITIAN_TOL: f64 = 1e-12;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

/// A `d × d` complex matrix.
#[derive(Clone, PartialEq)]
pub struct DenseOperator {
    m: DMatrix<Complex64>,
}

impl DenseOperator {
    /// Builds an operator from `d²` row-major entries.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("operator dimension must be at least 1".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for dimension {dim}, found {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(Self {
            m: DMatrix::from_row_slice(dim, dim, &entries),
        })
    }

    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return Err(Error::InvalidInput(format!(
                "operator must be square and nonempty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Self { m })
    }

    /// Real matrix given as rows; panics on ragged input. Intended for literals.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let d = rows.len();
        assert!(d > 0 && rows.iter().all(|r| r.len() == d), "rows must form a square matrix");
        Self {
            m: DMatrix::from_fn(d, d, |i, j| Complex64::new(rows[i][j], 0.0)),
        }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        assert!(dim > 0, "operator dimension must be at least 1");
        Self {
            m: DMatrix::from_fn(dim, dim, f),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_fn(dim, |_, _| ZERO)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { ONE } else { ZERO })
    }

    /// `|i⟩⟨j|` scaled by `value`.
    pub fn unit(dim: usize, i: usize, j: usize, value: Complex64) -> Self {
        let mut out = Self::zeros(dim);
        out.m[(i, j)] = value;
        out
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.m[(i, j)]
    }

    /// Row-major entries.
    pub fn entries(&self) -> Vec<Complex64> {
        let d = self.dim();
        (0..d * d).map(|k| self.m[(k / d, k % d)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self { m: self.m.adjoint() }
    }

    /// Entrywise transpose, no conjugation.
    pub fn transpose(&self) -> Self {
        Self { m: self.m.transpose() }
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        Self { m: self.m.map(|z| z.conj()) }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { m: self.m.map(|z| z * c) }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        Self { m: self.m.map(|z| z * c) }
    }

    pub fn trace(&self) -> Complex64 {
        self.m.trace()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    /// `max |X − X†|`, entrywise.
    pub fn hermiticity_residual(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.m[(i, j)] - self.m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_residual() <= HERMITIAN_TOL * (1.0 + frobenius_norm(self))
    }

    /// Eigenvalues of a Hermitian operator, nonincreasing.
    pub fn hermitian_spectrum(&self) -> Result<HermitianSpectrum> {
        if !self.is_hermitian() {
            return Err(Error::NotHermitian(self.hermiticity_residual()));
        }
        Ok(HermitianSpectrum::of_hermitian_part(self))
    }

    /// Smallest eigenvalue of a Hermitian operator.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.hermitian_spectrum()?.min())
    }

    /// Hermitian with all eigenvalues at least `-tol`.
    pub fn is_psd(&self, tol: f64) -> bool {
        self.hermitian_spectrum().map(|s| s.min() >= -tol).unwrap_or(false)
    }

    /// Operator product `self · rhs`.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        check_dim(self.dim(), rhs.dim())?;
        Ok(Self { m: &self.m * &rhs.m })
    }

    /// Linear combination `Σ c_i X_i` of operators of equal dimension.
    pub fn combination<'a>(
        dim: usize,
        terms: impl IntoIterator<Item = (Complex64, &'a DenseOperator)>,
    ) -> Result<Self> {
        let mut acc = DMatrix::from_element(dim, dim, ZERO);
        for (c, x) in terms {
            check_dim(dim, x.dim())?;
            acc.zip_apply(&x.m, |a, b| *a += c * b);
        }
        Ok(Self { m: acc })
    }
}

impl fmt::Debug for DenseOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DenseOperator(dim={}) {}", self.dim(), self.m)
    }
}

impl Add for &DenseOperator {
    type Output = DenseOperator;
    fn add(self, rhs: Self) -> DenseOperator {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in operator sum");
        DenseOperator { m: &self.m + &rhs.m }
    }
}

impl Sub for &DenseOperator {
    type Output = DenseOperator;
    fn sub(self, rhs: Self) -> DenseOperator {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in operator difference");
        DenseOperator { m: &self.m - &rhs.m }
    }
}

impl Neg for &DenseOperator {
    type Output = DenseOperator;
    fn neg(self) -> DenseOperator {
        DenseOperator { m: -&self.m }
    }
}

impl Mul<f64> for &DenseOperator {
    type Output = DenseOperator;
    fn mul(self, rhs: f64) -> DenseOperator {
        self.scale_real(rhs)
    }
}

#[derive(Serialize, Deserialize)]
struct RawOperator {
    dim: usize,
    entries: Vec<[f64; 2]>,
}

impl Serialize for DenseOperator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawOperator {
            dim: self.dim(),
            entries: self.entries().into_iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DenseOperator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawOperator::deserialize(d)?;
        let entries = raw.entries.into_iter().map(|[re, im]| Complex64::new(re, im)).collect();
        DenseOperator::new(raw.dim, entries).map_err(serde::de::Error::custom)
    }
}

/// Real eigenvalues of a Hermitian operator in nonincreasing order.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianSpectrum {
    eigenvalues: Vec<f64>,
}

impl HermitianSpectrum {
    fn of_hermitian_part(x: &DenseOperator) -> Self {
        let h = (&x.m + x.m.adjoint()).map(|z| z * 0.5);
        let mut eigenvalues: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        Self { eigenvalues }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    pub fn sum(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }
}

/// Hilbert–Schmidt pairing `tr(X Y†)`.
pub fn hs_inner(x: &DenseOperator, y: &DenseOperator) -> Result<Complex64> {
    check_dim(x.dim(), y.dim())?;
    Ok(x.m.iter().zip(y.m.iter()).map(|(a, b)| a * b.conj()).sum())
}

/// `√tr(X X†)`.
pub fn frobenius_norm(x: &DenseOperator) -> f64 {
    x.m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frobenius_distance(x: &DenseOperator, y: &DenseOperator) -> Result<f64> {
    check_dim(x.dim(), y.dim())?;
    Ok(x.m
        .iter()
        .zip(y.m.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// Sum of singular values. Hermitian inputs go through the eigensolver.
pub fn trace_norm(x: &DenseOperator) -> f64 {
    if x.is_hermitian() {
        HermitianSpectrum::of_hermitian_part(x)
            .eigenvalues
            .iter()
            .map(|e| e.abs())
            .sum()
    } else {
        x.m.clone().singular_values().iter().sum()
    }
}

/// `(‖X‖₁ − Re tr X) / 2` for Hermitian `X`.
pub fn negativity(x: &DenseOperator) -> Result<f64> {
    if !x.is_hermitian() {
        return Err(Error::NotHermitian(x.hermiticity_residual()));
    }
    Ok(((trace_norm(x) - x.trace().re) / 2.0).max(0.0))
}

/// Kronecker product `X ⊗ Y`.
pub fn tensor_product(x: &DenseOperator, y: &DenseOperator) -> DenseOperator {
    DenseOperator { m: x.m.kronecker(&y.m) }
}

/// Projector onto `(1/√d) Σ_j |jj⟩`.
pub fn maxent_state(d: usize) -> Result<DenseOperator> {
    if d == 0 {
        return Err(Error::InvalidInput("dimension must be at least 1".into()));
    }
    let value = Complex64::new(1.0 / d as f64, 0.0);
    Ok(DenseOperator::from_fn(d * d, |r, c| {
        if r % (d + 1) == 0 && c % (d + 1) == 0 {
            value
        } else {
            ZERO
        }
    }))
}

/// `Σ_ij c_i c_j* |ii⟩⟨jj|` for real amplitudes `c`.
pub fn schmidt_form_state(amplitudes: &[f64]) -> Result<DenseOperator> {
    let d = amplitudes.len();
    if d == 0 {
        return Err(Error::InvalidInput("empty amplitude list".into()));
    }
    Ok(DenseOperator::from_fn(d * d, |r, c| {
        if r % (d + 1) == 0 && c % (d + 1) == 0 {
            Complex64::new(amplitudes[r / (d + 1)] * amplitudes[c / (d + 1)], 0.0)
        } else {
            ZERO
        }
    }))
}

pub fn pauli_x() -> DenseOperator {
    DenseOperator::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
}

pub fn pauli_y() -> DenseOperator {
    DenseOperator::new(2, vec![ZERO, -I, I, ZERO]).expect("static shape")
}

pub fn pauli_z() -> DenseOperator {
    DenseOperator::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
}

/// `½(𝟙 + x₁σ_x + x₂σ_y + x₃σ_z)`. The vector is not restricted to the unit ball.
pub fn bloch_operator(x: [f64; 3]) -> DenseOperator {
    let h = 0.5;
    DenseOperator::new(
        2,
        vec![
            Complex64::new(h * (1.0 + x[2]), 0.0),
            Complex64::new(h * x[0], -h * x[1]),
            Complex64::new(h * x[0], h * x[1]),
            Complex64::new(h * (1.0 - x[2]), 0.0),
        ],
    )
    .expect("static shape")
}

/// Bloch vector `(tr Xσ_x, tr Xσ_y, tr Xσ_z)` of a qubit operator.
pub fn bloch_vector(x: &DenseOperator) -> Result<[f64; 3]> {
    check_dim(2, x.dim())?;
    let [a, b, c, d] = [x.get(0, 0), x.get(0, 1), x.get(1, 0), x.get(1, 1)];
    Ok([(b + c).re, (I * (b - c)).re, (a - d).re])
}
