//! Dual cones of measurement families, conic hulls of generator sets, and
//! the extremality probe for unit-trace elements of `conic(W ∪ Q)`.
//!
//! An operator `X` is in the dual of a family `F` when `Re tr(X M) ≥ 0` for
//! every element `M` of every POVM in `F`. Positivity against all density
//! matrices is the same as matrix positivity, so a measurement element is
//! compatible with `conic(W ∪ Q)` iff it is PSD and pairs nonnegatively with
//! every generator in `W`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{frobenius_norm, hs_inner, pauli_x, pauli_y, pauli_z, DenseOperator, ONE};

/// One-sided slack on `tr(X M) ≥ 0` and on PSD checks.
pub const DUAL_TOL: f64 = 1e-10;
/// Samples whose largest mixture weight exceeds `1 − VERTEX_MARGIN` are skipped by the probe.
pub const VERTEX_MARGIN: f64 = 1e-3;

/// A finite POVM: PSD elements summing to the identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPovm")]
pub struct Povm {
    dim: usize,
    elements: Vec<DenseOperator>,
}

#[derive(Deserialize)]
struct RawPovm {
    dim: usize,
    elements: Vec<DenseOperator>,
}

impl TryFrom<RawPovm> for Povm {
    type Error = Error;
    fn try_from(r: RawPovm) -> Result<Self> {
        let p = Povm::new(r.elements)?;
        check_dim(r.dim, p.dim)?;
        Ok(p)
    }
}

impl Povm {
    pub fn new(elements: Vec<DenseOperator>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::InvalidInput("POVM has no elements".into()))?;
        let dim = first.dim();
        let mut sum = DenseOperator::zeros(dim);
        for (a, m) in elements.iter().enumerate() {
            check_dim(dim, m.dim())?;
            if !m.is_psd(DUAL_TOL) {
                return Err(Error::InvalidInput(format!("POVM element {a} is not positive semidefinite")));
            }
            sum = &sum + m;
        }
        let residual = (&sum - &DenseOperator::identity(dim)).max_abs();
        if residual > DUAL_TOL {
            return Err(Error::InvalidInput(format!("POVM elements sum to identity only within {residual:e}")));
        }
        Ok(Self { dim, elements })
    }

    /// The single-outcome measurement `{𝟙}`.
    pub fn trivial(dim: usize) -> Self {
        Self {
            dim,
            elements: vec![DenseOperator::identity(dim)],
        }
    }

    /// Two-outcome projective measurement of a qubit along `n` (unit vector),
    /// outcome 0 is `(𝟙 + n·σ)/2`.
    pub fn qubit_projective(n: [f64; 3]) -> Result<Self> {
        let len = n.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (len - 1.0).abs() > DUAL_TOL {
            return Err(Error::InvalidInput(format!("measurement direction has length {len}")));
        }
        let neg = [-n[0], -n[1], -n[2]];
        Self::new(vec![crate::linalg::bloch_operator(n), crate::linalg::bloch_operator(neg)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[DenseOperator] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn transposed(&self) -> Self {
        Self {
            dim: self.dim,
            elements: self.elements.iter().map(|m| m.transpose()).collect(),
        }
    }
}

/// A nonempty collection of POVMs on the same system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFamily")]
pub struct MeasurementFamily {
    povms: Vec<Povm>,
}

#[derive(Deserialize)]
struct RawFamily {
    povms: Vec<Povm>,
}

impl TryFrom<RawFamily> for MeasurementFamily {
    type Error = Error;
    fn try_from(r: RawFamily) -> Result<Self> {
        MeasurementFamily::new(r.povms)
    }
}

impl MeasurementFamily {
    pub fn new(povms: Vec<Povm>) -> Result<Self> {
        let first = povms
            .first()
            .ok_or_else(|| Error::InvalidInput("measurement family is empty".into()))?;
        for p in &povms {
            check_dim(first.dim, p.dim)?;
        }
        Ok(Self { povms })
    }

    /// Projective σ_x, σ_y, σ_z measurements, in that order.
    pub fn pauli() -> Self {
        let axes = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        Self {
            povms: axes.iter().map(|n| Povm::qubit_projective(*n).expect("unit axis")).collect(),
        }
    }

    pub fn trivial(dim: usize) -> Self {
        Self {
            povms: vec![Povm::trivial(dim)],
        }
    }

    pub fn dim(&self) -> usize {
        self.povms[0].dim
    }

    pub fn povms(&self) -> &[Povm] {
        &self.povms
    }

    pub fn transposed(&self) -> Self {
        Self {
            povms: self.povms.iter().map(Povm::transposed).collect(),
        }
    }
}

/// Generators of `conic(W)` or, with `include_quantum`, of `conic(W ∪ Q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSet {
    dim: usize,
    generators: Vec<DenseOperator>,
    include_quantum: bool,
}

impl GeneratorSet {
    pub fn new(generators: Vec<DenseOperator>, include_quantum: bool) -> Result<Self> {
        let first = generators
            .first()
            .ok_or_else(|| Error::InvalidInput("generator set is empty".into()))?;
        let dim = first.dim();
        for g in &generators {
            check_dim(dim, g.dim())?;
        }
        Ok(Self {
            dim,
            generators,
            include_quantum,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[DenseOperator] {
        &self.generators
    }

    pub fn include_quantum(&self) -> bool {
        self.include_quantum
    }
}

/// First `(povm, element, Re tr(X M))` with `Re tr(X M) < −DUAL_TOL`, if any.
pub fn dual_violation(x: &DenseOperator, family: &MeasurementFamily) -> Result<Option<(usize, usize, f64)>> {
    check_dim(family.dim(), x.dim())?;
    for (i, povm) in family.povms.iter().enumerate() {
        for (a, m) in povm.elements.iter().enumerate() {
            let v = born_pairing(x, m);
            if v < -DUAL_TOL {
                return Ok(Some((i, a, v)));
            }
        }
    }
    Ok(None)
}

/// `Re tr(X M)` for equal-dimension operators.
fn born_pairing(x: &DenseOperator, m: &DenseOperator) -> f64 {
    // tr(XM) = ⟨X, M†⟩
    hs_inner(x, &m.adjoint()).expect("dims checked").re
}

/// Whether `X` is `F`-positive.
pub fn is_in_dual(x: &DenseOperator, family: &MeasurementFamily) -> Result<bool> {
    Ok(dual_violation(x, family)?.is_none())
}

/// Whether the measurement element `M` pairs nonnegatively with every
/// generator (and, with `include_quantum`, with every density matrix).
pub fn measurement_compatible(m: &DenseOperator, gens: &GeneratorSet) -> Result<bool> {
    check_dim(gens.dim, m.dim())?;
    if gens.generators.iter().any(|g| born_pairing(m, g) < -DUAL_TOL) {
        return Ok(false);
    }
    Ok(!gens.include_quantum || m.is_psd(DUAL_TOL))
}

/// Result of a conic-hull membership test.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeMembership {
    pub member: bool,
    /// `min_{c ≥ 0} ‖Σ c_i g_i − X‖₂`.
    pub residual: f64,
    /// Nonnegative coefficients attaining the residual; a certificate when `member`.
    pub coefficients: Vec<f64>,
}

/// Decides `X ∈ conic(generators)` by nonnegative least squares over the
/// real vector space of operators.
pub fn cone_membership(x: &DenseOperator, gens: &GeneratorSet, tol: f64) -> Result<ConeMembership> {
    check_dim(gens.dim, x.dim())?;
    if gens.include_quantum {
        return Err(Error::InvalidInput(
            "cone membership is only decided for finite generator sets".into(),
        ));
    }
    let a = realify_columns(&gens.generators);
    let b = realify(x);
    let coefficients = nnls(&a, &b)?;
    let c = DVector::from_vec(coefficients.clone());
    let residual = (&a * c - &b).norm();
    Ok(ConeMembership {
        member: residual <= tol,
        residual,
        coefficients,
    })
}

fn realify(x: &DenseOperator) -> DVector<f64> {
    let entries = x.entries();
    let n = entries.len();
    DVector::from_fn(2 * n, |i, _| if i < n { entries[i].re } else { entries[i - n].im })
}

fn realify_columns(ops: &[DenseOperator]) -> DMatrix<f64> {
    let cols: Vec<DVector<f64>> = ops.iter().map(realify).collect();
    DMatrix::from_columns(&cols)
}

/// Lawson–Hanson active-set NNLS: `argmin_{c ≥ 0} ‖A c − b‖₂`.
///
/// Gives up with an internal error after `50 · n` passive-set updates.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<Vec<f64>> {
    let (m, n) = a.shape();
    if m != b.len() {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: b.len(),
        });
    }
    let cap = 50 * n.max(1);
    let scale = a.iter().fold(0.0f64, |s, v| s.max(v.abs())) * b.norm().max(1.0);
    let grad_tol = 1e-12 * scale.max(f64::MIN_POSITIVE) * (m.max(n) as f64);

    let mut x = DVector::<f64>::zeros(n);
    let mut passive = vec![false; n];
    let mut iterations = 0;

    let solve_passive = |passive: &[bool]| -> DVector<f64> {
        let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
        let sub = DMatrix::from_fn(m, idx.len(), |r, c| a[(r, idx[c])]);
        let sol = sub
            .svd(true, true)
            .solve(b, 1e-14)
            .unwrap_or_else(|_| DVector::zeros(idx.len()));
        let mut full = DVector::zeros(n);
        for (c, &j) in idx.iter().enumerate() {
            full[j] = sol[c];
        }
        full
    };

    loop {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..n)
            .filter(|&j| !passive[j])
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        match candidate {
            Some(j) if w[j] > grad_tol => passive[j] = true,
            _ => break,
        }
        loop {
            iterations += 1;
            if iterations > cap {
                return Err(Error::Internal(format!("NNLS did not converge within {cap} iterations")));
            }
            let s = solve_passive(&passive);
            if (0..n).filter(|&j| passive[j]).all(|j| s[j] > 0.0) {
                x = s;
                break;
            }
            // step back to the feasible boundary and drop the blocking variables
            let alpha = (0..n)
                .filter(|&j| passive[j] && s[j] <= 0.0)
                .map(|j| x[j] / (x[j] - s[j]))
                .fold(f64::INFINITY, f64::min);
            x += (s - &x) * alpha;
            for j in 0..n {
                if passive[j] && x[j] <= 1e-15 {
                    passive[j] = false;
                    x[j] = 0.0;
                }
            }
        }
    }
    Ok(x.iter().copied().collect())
}

/// Summary of [`unit_trace_extremality_probe`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeReport {
    pub dim: usize,
    pub trials: usize,
    /// Samples kept after the near-vertex exclusion.
    pub accepted: usize,
    pub skipped_near_vertex: usize,
    /// Largest `‖X‖₂²` over accepted samples.
    pub max_norm_sq: f64,
    /// `d(1 − VERTEX_MARGIN) + 1e-9`.
    pub bound: f64,
    /// Largest `‖X‖₂²` over accepted samples without density-matrix admixture.
    pub max_norm_sq_generators_only: f64,
    /// Largest `|‖X‖₂² − d Σ q_i²|` over generator-only samples.
    pub max_identity_residual: f64,
    /// Largest `‖X‖₂ − (√(d Σ q_i²) + Σ r_j ‖ρ_j‖₂)` over all accepted samples;
    /// nonpositive up to rounding by the triangle inequality.
    pub max_triangle_excess: f64,
    /// Largest `|‖W_i‖₂ − √d|` over the generators.
    pub max_vertex_residual: f64,
    /// Largest 2-norm among sampled density matrices.
    pub max_density_norm: f64,
    /// Every accepted sample has `‖X‖₂² < d`.
    pub below_vertex_norm: bool,
    pub passed: bool,
}

/// Samples unit-trace elements of `conic(W ∪ Q)` as convex mixtures of the
/// generators and random density matrices, skipping samples whose largest
/// weight exceeds `1 − VERTEX_MARGIN`, and checks they stay below the vertex
/// norm `√d`.
///
/// The generators must be Hermitian, unit trace and orthogonal with
/// `tr(W_i W_j) = d δ_ij`.
pub fn unit_trace_extremality_probe(gens: &GeneratorSet, trials: usize, seed: u64) -> Result<ProbeReport> {
    if !gens.include_quantum {
        return Err(Error::InvalidInput("the probe samples conic(W ∪ Q); include_quantum must be set".into()));
    }
    let d = gens.dim;
    let df = d as f64;
    let ws = &gens.generators;
    for (i, w) in ws.iter().enumerate() {
        if !w.is_hermitian() || (w.trace() - ONE).norm() > crate::basis::BASIS_TOL {
            return Err(Error::InvalidInput(format!("generator {i} is not a Hermitian unit-trace operator")));
        }
        for (j, v) in ws.iter().enumerate().skip(i + 1) {
            if hs_inner(w, v)?.norm() > crate::basis::BASIS_TOL {
                return Err(Error::InvalidInput(format!("generators {i} and {j} are not orthogonal")));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_vertex_residual = ws.iter().map(|w| (frobenius_norm(w) - df.sqrt()).abs()).fold(0.0, f64::max);
    let mut report = ProbeReport {
        dim: d,
        trials,
        accepted: 0,
        skipped_near_vertex: 0,
        max_norm_sq: 0.0,
        bound: df * (1.0 - VERTEX_MARGIN) + 1e-9,
        max_norm_sq_generators_only: 0.0,
        max_identity_residual: 0.0,
        max_triangle_excess: f64::NEG_INFINITY,
        max_vertex_residual,
        max_density_norm: 0.0,
        below_vertex_norm: true,
        passed: false,
    };

    for _ in 0..trials {
        let states: Vec<DenseOperator> = (0..rng.random_range(0..=2)).map(|_| random_density(d, &mut rng)).collect();
        for rho in &states {
            report.max_density_norm = report.max_density_norm.max(frobenius_norm(rho));
        }
        // Dirichlet weights with a random concentration, from sparse to flat
        let alpha = 10f64.powf(rng.random_range(-1.5..0.5));
        let gamma = Gamma::new(alpha, 1.0).map_err(|e| Error::Internal(e.to_string()))?;
        let mut weights: Vec<f64> = (0..ws.len() + states.len()).map(|_| gamma.sample(&mut rng)).collect();
        let total: f64 = weights.iter().sum();
        if total.is_nan() || total <= 0.0 {
            report.skipped_near_vertex += 1;
            continue;
        }
        weights.iter_mut().for_each(|w| *w /= total);
        if weights.iter().fold(0.0f64, |m, w| m.max(*w)) > 1.0 - VERTEX_MARGIN {
            report.skipped_near_vertex += 1;
            continue;
        }
        let (q, r) = weights.split_at(ws.len());
        let x = DenseOperator::combination(
            d,
            q.iter()
                .zip(ws)
                .chain(r.iter().zip(&states))
                .map(|(w, op)| (num_complex::Complex64::new(*w, 0.0), op)),
        )?;
        let norm_sq = frobenius_norm(&x).powi(2);
        let basis_part = df * q.iter().map(|w| w * w).sum::<f64>();
        let triangle = basis_part.sqrt() + r.iter().zip(&states).map(|(w, s)| w * frobenius_norm(s)).sum::<f64>();
        report.accepted += 1;
        report.max_norm_sq = report.max_norm_sq.max(norm_sq);
        report.max_triangle_excess = report.max_triangle_excess.max(norm_sq.sqrt() - triangle);
        if states.is_empty() {
            report.max_norm_sq_generators_only = report.max_norm_sq_generators_only.max(norm_sq);
            report.max_identity_residual = report.max_identity_residual.max((norm_sq - basis_part).abs());
        }
    }
    if report.accepted == 0 {
        report.max_triangle_excess = 0.0;
    }
    report.below_vertex_norm = report.max_norm_sq < df;
    report.passed = report.max_norm_sq <= report.bound
        && report.max_identity_residual <= 1e-10
        && report.max_triangle_excess <= 1e-12
        && report.max_vertex_residual <= 1e-10
        && report.max_density_norm <= 1.0 + 1e-10;
    Ok(report)
}

/// Random density matrix `G G† / tr(G G†)` from a complex Gaussian `d × r`
/// matrix with random rank `r`.
pub fn random_density(d: usize, rng: &mut impl Rng) -> DenseOperator {
    let rank = rng.random_range(1..=d);
    let g = DMatrix::from_fn(d, rank, |_, _| {
        num_complex::Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let rho = &g * g.adjoint();
    let tr = rho.trace().re;
    DenseOperator::from_matrix(rho.map(|z| z / tr)).expect("square")
}

/// The qubit measurement element `(𝟙 + r·σ)/2`.
pub fn qubit_element(r: [f64; 3]) -> DenseOperator {
    let id = DenseOperator::identity(2);
    let sum = &(&(&id + &pauli_x().scale_real(r[0])) + &pauli_y().scale_real(r[1])) + &pauli_z().scale_real(r[2]);
    sum.scale_real(0.5)
}

/// Grid scan of `measurement_compatible` over Bloch directions `r` of
/// `(𝟙 + r·σ)/2` against `gens`, next to the analytic predicate for a
/// qubit generator set with `include_quantum`:
/// `|r| ≤ 1` and `1 + r·c ≥ 0` for every generator Bloch vector `c`
/// (pairings scaled by `tr W`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QubitRegionScan {
    pub points: usize,
    pub compatible: usize,
    pub disagreements: usize,
    /// Compatible grid points, for external plotting.
    pub inside: Vec<[f64; 3]>,
}

pub fn qubit_dual_region(gens: &GeneratorSet, per_axis: usize, extent: f64) -> Result<QubitRegionScan> {
    check_dim(2, gens.dim)?;
    if per_axis < 2 {
        return Err(Error::InvalidInput("grid needs at least two points per axis".into()));
    }
    let bloch: Vec<([f64; 3], f64)> = gens
        .generators
        .iter()
        .map(|g| Ok((crate::linalg::bloch_vector(g)?, g.trace().re)))
        .collect::<Result<_>>()?;
    let step = 2.0 * extent / (per_axis - 1) as f64;
    let axis: Vec<f64> = (0..per_axis).map(|i| -extent + step * i as f64).collect();
    let mut scan = QubitRegionScan {
        points: 0,
        compatible: 0,
        disagreements: 0,
        inside: Vec::new(),
    };
    for &x in &axis {
        for &y in &axis {
            for &z in &axis {
                let r = [x, y, z];
                let m = qubit_element(r);
                let got = measurement_compatible(&m, gens)?;
                // tr((𝟙 + r·σ)/2 · (t𝟙 + c·σ)/2) = (t + r·c)/2
                let len = (x * x + y * y + z * z).sqrt();
                let analytic = (!gens.include_quantum || 1.0 - len >= -2.0 * DUAL_TOL)
                    && bloch
                        .iter()
                        .all(|(c, t)| (t + x * c[0] + y * c[1] + z * c[2]) / 2.0 >= -DUAL_TOL);
                scan.points += 1;
                if got {
                    scan.compatible += 1;
                    scan.inside.push(r);
                }
                if got != analytic {
                    scan.disagreements += 1;
                }
            }
        }
    }
    Ok(scan)
}
