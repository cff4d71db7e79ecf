//! Local hidden variable models read off a generalized separable decomposition.
//!
//! With `Ψ = Σ_k p_k A_k ⊗ B_k` and every `A_k` (`B_k`) in the dual of the
//! A-side (B-side) measurement family, the hidden variable `k` is drawn with
//! probability `p_k` and each side answers independently with weights
//! `tr(M_a A_k)` and `tr(N_b B_k)`. Their mixture reproduces the Born rule
//! `tr((M_a ⊗ N_b) Ψ)` exactly.

use std::fmt;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decomposition::SeparableDecomposition;
use crate::duality::{dual_violation, MeasurementFamily, DUAL_TOL};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{tensor_product, DenseOperator, ONE};

/// `hidden_probs[k]`, and response weights indexed `[k][setting][outcome]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel")]
pub struct LhvModel {
    pub hidden_probs: Vec<f64>,
    pub responses_a: Vec<Vec<Vec<f64>>>,
    pub responses_b: Vec<Vec<Vec<f64>>>,
}

#[derive(Deserialize)]
struct RawModel {
    hidden_probs: Vec<f64>,
    responses_a: Vec<Vec<Vec<f64>>>,
    responses_b: Vec<Vec<Vec<f64>>>,
}

impl TryFrom<RawModel> for LhvModel {
    type Error = Error;
    fn try_from(r: RawModel) -> Result<Self> {
        let m = LhvModel {
            hidden_probs: r.hidden_probs,
            responses_a: r.responses_a,
            responses_b: r.responses_b,
        };
        m.validate()?;
        Ok(m)
    }
}

impl LhvModel {
    /// Checks that every hidden value has the same setting/outcome shape and
    /// that all weights are finite and nonnegative.
    pub fn validate(&self) -> Result<()> {
        let n = self.hidden_probs.len();
        if n == 0 {
            return Err(Error::InvalidInput("model has no hidden values".into()));
        }
        check_dim(n, self.responses_a.len())?;
        check_dim(n, self.responses_b.len())?;
        for side in [&self.responses_a, &self.responses_b] {
            let shape: Vec<usize> = side[0].iter().map(Vec::len).collect();
            if shape.is_empty() || shape.contains(&0) {
                return Err(Error::InvalidInput("model has an empty setting list or outcome list".into()));
            }
            if side.iter().any(|r| r.len() != shape.len() || r.iter().zip(&shape).any(|(o, s)| o.len() != *s)) {
                return Err(Error::InvalidInput("response tables differ in shape across hidden values".into()));
            }
        }
        let all = self
            .hidden_probs
            .iter()
            .chain(self.responses_a.iter().chain(&self.responses_b).flatten().flatten());
        for w in all {
            // responses are traces, so allow the dual-check slack below zero
            if !w.is_finite() || *w < -DUAL_TOL {
                return Err(Error::InvalidInput(format!("model weight {w} is not a nonnegative real")));
            }
        }
        Ok(())
    }

    pub fn settings_a(&self) -> usize {
        self.responses_a.first().map_or(0, Vec::len)
    }

    pub fn settings_b(&self) -> usize {
        self.responses_b.first().map_or(0, Vec::len)
    }

    pub fn outcomes_a(&self, setting: usize) -> usize {
        self.responses_a.first().and_then(|r| r.get(setting)).map_or(0, Vec::len)
    }

    pub fn outcomes_b(&self, setting: usize) -> usize {
        self.responses_b.first().and_then(|r| r.get(setting)).map_or(0, Vec::len)
    }

    fn check_setting(&self, a: usize, b: usize) -> Result<()> {
        if a >= self.settings_a() || b >= self.settings_b() {
            return Err(Error::InvalidInput(format!(
                "setting pair ({a}, {b}) out of range ({} x {})",
                self.settings_a(),
                self.settings_b()
            )));
        }
        Ok(())
    }
}

fn responses(ops: &[DenseOperator], family: &MeasurementFamily) -> Vec<Vec<Vec<f64>>> {
    ops.iter()
        .map(|x| {
            family
                .povms()
                .iter()
                .map(|povm| povm.elements().iter().map(|m| x.matmul(m).expect("dims checked").trace().re).collect())
                .collect()
        })
        .collect()
}

/// Builds the model, after checking every local operator is unit trace and
/// positive on its side's family.
pub fn lhv_from_decomposition(
    d: &SeparableDecomposition,
    family_a: &MeasurementFamily,
    family_b: &MeasurementFamily,
) -> Result<LhvModel> {
    check_dim(d.dim_a(), family_a.dim())?;
    check_dim(d.dim_b(), family_b.dim())?;
    for (k, (_, a, b)) in d.terms().enumerate() {
        for (side, x) in [("A", a), ("B", b)] {
            if (x.trace() - ONE).norm() > DUAL_TOL {
                return Err(Error::InvalidInput(format!("{side}-side operator of term {k} is not unit trace")));
            }
        }
    }
    for (k, (_, a, b)) in d.terms().enumerate() {
        for (x, family) in [(a, family_a), (b, family_b)] {
            if let Some((povm, element, value)) = dual_violation(x, family)? {
                return Err(Error::DualViolation {
                    term: k,
                    povm,
                    element,
                    value,
                });
            }
        }
    }
    Ok(LhvModel {
        hidden_probs: d.weights().to_vec(),
        responses_a: responses(d.a_ops(), family_a),
        responses_b: responses(d.b_ops(), family_b),
    })
}

/// `Σ_k p_k respA(k, a) respB(k, b)`.
pub fn lhv_joint(model: &LhvModel, a_setting: usize, a_outcome: usize, b_setting: usize, b_outcome: usize) -> Result<f64> {
    model.check_setting(a_setting, b_setting)?;
    if a_outcome >= model.outcomes_a(a_setting) || b_outcome >= model.outcomes_b(b_setting) {
        return Err(Error::InvalidInput(format!("outcome pair ({a_outcome}, {b_outcome}) out of range")));
    }
    Ok(model
        .hidden_probs
        .iter()
        .zip(model.responses_a.iter().zip(&model.responses_b))
        .map(|(p, (ra, rb))| p * ra[a_setting][a_outcome] * rb[b_setting][b_outcome])
        .sum())
}

/// Born-rule probability `Re tr((M_a ⊗ N_b) Ψ)`, clamped to `[0, 1]`.
pub fn quantum_joint(state: &DenseOperator, ma: &DenseOperator, nb: &DenseOperator) -> Result<f64> {
    check_dim(ma.dim() * nb.dim(), state.dim())?;
    let v = tensor_product(ma, nb).matmul(state)?.trace().re;
    Ok(v.clamp(0.0, 1.0))
}

/// Joint outcome distribution for one setting pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LhvTable {
    pub settings: [usize; 2],
    pub probs: Vec<Vec<f64>>,
}

impl LhvTable {
    /// `Σ_ab s_a s_b P(a, b)` with `s = +1` for outcome 0 and `−1` for outcome 1.
    /// Only meaningful for two-outcome settings.
    pub fn correlation(&self) -> f64 {
        let sign = |i: usize| if i == 0 { 1.0 } else { -1.0 };
        self.probs
            .iter()
            .enumerate()
            .flat_map(|(a, row)| row.iter().enumerate().map(move |(b, p)| sign(a) * sign(b) * p))
            .sum()
    }
}

impl fmt::Display for LhvTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "settings a={} b={}", self.settings[0], self.settings[1])?;
        let cols = self.probs.first().map_or(0, Vec::len);
        write!(f, "{:>6}", "a\\b")?;
        for b in 0..cols {
            write!(f, " {b:>12}")?;
        }
        writeln!(f)?;
        for (a, row) in self.probs.iter().enumerate() {
            write!(f, "{a:>6}")?;
            for p in row {
                write!(f, " {p:>12.9}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

pub fn lhv_table(model: &LhvModel, a_setting: usize, b_setting: usize) -> Result<LhvTable> {
    model.check_setting(a_setting, b_setting)?;
    let probs = (0..model.outcomes_a(a_setting))
        .map(|a| {
            (0..model.outcomes_b(b_setting))
                .map(|b| lhv_joint(model, a_setting, a, b_setting, b))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(LhvTable {
        settings: [a_setting, b_setting],
        probs,
    })
}

/// Born-rule table for the same setting pair, for comparison with [`lhv_table`].
pub fn quantum_table(
    state: &DenseOperator,
    family_a: &MeasurementFamily,
    family_b: &MeasurementFamily,
    a_setting: usize,
    b_setting: usize,
) -> Result<LhvTable> {
    let (pa, pb) = match (family_a.povms().get(a_setting), family_b.povms().get(b_setting)) {
        (Some(pa), Some(pb)) => (pa, pb),
        _ => return Err(Error::InvalidInput(format!("setting pair ({a_setting}, {b_setting}) out of range"))),
    };
    let probs = pa
        .elements()
        .iter()
        .map(|m| pb.elements().iter().map(|n| quantum_joint(state, m, n)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    Ok(LhvTable {
        settings: [a_setting, b_setting],
        probs,
    })
}

/// Outcome counts from sampling the model.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountTable {
    pub settings: [usize; 2],
    pub shots: u64,
    pub counts: Vec<Vec<u64>>,
}

fn response_sampler(weights: &[f64]) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(weights.iter().map(|w| w.max(0.0))).map_err(|e| Error::Internal(format!("response weights: {e}")))
}

/// Draws `k ~ p`, then the two outcomes independently from the responses of `k`.
pub fn lhv_sample(model: &LhvModel, a_setting: usize, b_setting: usize, shots: u64, seed: u64) -> Result<CountTable> {
    model.check_setting(a_setting, b_setting)?;
    if shots == 0 {
        return Err(Error::InvalidInput("shots must be at least 1".into()));
    }
    let hidden = WeightedIndex::new(&model.hidden_probs).map_err(|e| Error::Internal(format!("hidden distribution: {e}")))?;
    let resp_a = model
        .responses_a
        .iter()
        .map(|r| response_sampler(&r[a_setting]))
        .collect::<Result<Vec<_>>>()?;
    let resp_b = model
        .responses_b
        .iter()
        .map(|r| response_sampler(&r[b_setting]))
        .collect::<Result<Vec<_>>>()?;
    let mut counts = vec![vec![0u64; model.outcomes_b(b_setting)]; model.outcomes_a(a_setting)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..shots {
        let k = hidden.sample(&mut rng);
        let a = resp_a[k].sample(&mut rng);
        let b = resp_b[k].sample(&mut rng);
        counts[a][b] += 1;
    }
    Ok(CountTable {
        settings: [a_setting, b_setting],
        shots,
        counts,
    })
}
