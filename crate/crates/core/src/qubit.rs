//! Exact state-vector algebra for small qubit registers.
//!
//! Qubit `0` is the most significant bit of a basis index, so for a pair
//! `|q0 q1⟩` the amplitude order is `|00⟩, |01⟩, |10⟩, |11⟩`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use thiserror::Error;

/// Tolerance for identities that hold exactly in exact arithmetic.
pub const EXACT_TOL: f64 = 1e-12;

/// Branch weights at or below this value are treated as an absent outcome.
pub const ABSENT_WEIGHT: f64 = 1e-24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QubitError {
    #[error("expected {expected} amplitudes for {n} qubits, got {got}")]
    DimensionMismatch { n: usize, expected: usize, got: usize },

    #[error("state vector has zero norm")]
    ZeroVector,

    #[error("qubit count must be at least 1")]
    NoQubits,

    #[error("amplitudes must be finite")]
    NonFinite,

    #[error("qubit index {index} out of range for {n} qubits")]
    TargetOutOfRange { index: usize, n: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("states have different dimensions ({0} vs {1})")]
    StateMismatch(usize, usize),
}

pub type QubitResult<T> = Result<T, QubitError>;

/// A normalized pure state on `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    n: usize,
    amps: Vec<C64>,
}

impl PureState {
    /// Builds a state from raw amplitudes, normalizing them. The global phase
    /// is kept as given.
    pub fn new(n: usize, amplitudes: Vec<C64>) -> QubitResult<Self> {
        if n == 0 {
            return Err(QubitError::NoQubits);
        }
        let expected = 1usize
            .checked_shl(n as u32)
            .ok_or(QubitError::DimensionMismatch { n, expected: usize::MAX, got: amplitudes.len() })?;
        if amplitudes.len() != expected {
            return Err(QubitError::DimensionMismatch { n, expected, got: amplitudes.len() });
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(QubitError::NonFinite);
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(QubitError::ZeroVector);
        }
        let amps = amplitudes.into_iter().map(|a| a / norm).collect();
        Ok(Self { n, amps })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n: usize, index: usize) -> QubitResult<Self> {
        let dim = 1usize << n;
        if index >= dim {
            return Err(QubitError::DimensionMismatch { n, expected: dim, got: index });
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Self::new(n, amps)
    }

    /// The two-qubit Schmidt-form state `α|00⟩ + β|11⟩`.
    pub fn schmidt_pair(alpha: C64, beta: C64) -> QubitResult<Self> {
        let zero = C64::new(0.0, 0.0);
        Self::new(2, vec![alpha, zero, zero, beta])
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> QubitResult<C64> {
        if self.dim() != other.dim() {
            return Err(QubitError::StateMismatch(self.dim(), other.dim()));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    fn bit(&self, qubit: usize) -> usize {
        1 << (self.n - 1 - qubit)
    }
}

/// `make_state`: normalized state from an amplitude list.
pub fn make_state(n: usize, amplitudes: Vec<C64>) -> QubitResult<PureState> {
    PureState::new(n, amplitudes)
}

/// A single-qubit operator. Kraus operators are contractions, so no
/// unitarity is required.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct QubitOperator(pub [[C64; 2]; 2]);

impl QubitOperator {
    pub fn new(entries: [[C64; 2]; 2]) -> Self {
        Self(entries)
    }

    pub fn identity() -> Self {
        let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        Self([[o, z], [z, o]])
    }

    pub fn diagonal(d0: C64, d1: C64) -> Self {
        let z = C64::new(0.0, 0.0);
        Self([[d0, z], [z, d1]])
    }

    /// `|k⟩⟨k|`.
    pub fn projector(k: usize) -> Self {
        let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        if k == 0 { Self::diagonal(o, z) } else { Self::diagonal(z, o) }
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.0[row][col]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Self([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[C64::new(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Self(out)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.0;
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell += rhs.0[i][j];
            }
        }
        Self(out)
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.0;
        out.iter_mut().flatten().for_each(|c| *c *= s);
        Self(out)
    }

    /// Largest entrywise modulus of `self - rhs`.
    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(rhs.0.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, spinor: [C64; 2]) -> [C64; 2] {
        let m = &self.0;
        [m[0][0] * spinor[0] + m[0][1] * spinor[1], m[1][0] * spinor[0] + m[1][1] * spinor[1]]
    }
}

/// Applies `op` to qubit `target`. Returns the normalized post-operation
/// state (or `None` when the branch weight vanishes) together with the
/// weight `⟨Ψ|op†op|Ψ⟩`.
pub fn apply_single_qubit_op(
    state: &PureState,
    op: &QubitOperator,
    target: usize,
) -> QubitResult<(Option<PureState>, f64)> {
    if target >= state.n {
        return Err(QubitError::TargetOutOfRange { index: target, n: state.n });
    }
    let bit = state.bit(target);
    let mut out = vec![C64::new(0.0, 0.0); state.dim()];
    for i0 in (0..state.dim()).filter(|i| i & bit == 0) {
        let i1 = i0 | bit;
        let [a0, a1] = op.apply([state.amps[i0], state.amps[i1]]);
        out[i0] = a0;
        out[i1] = a1;
    }
    let weight: f64 = out.iter().map(|a| a.norm_sqr()).sum();
    if weight <= ABSENT_WEIGHT {
        return Ok((None, weight));
    }
    let norm = weight.sqrt();
    out.iter_mut().for_each(|a| *a /= norm);
    Ok((Some(PureState { n: state.n, amps: out }), weight))
}

/// `H(p) = -p log2 p - (1-p) log2 (1-p)`, with `H(0) = H(1) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    term(p) + term(1.0 - p)
}

/// Von Neumann entropy (bits) of a list of eigenvalues.
fn spectrum_entropy(eigs: impl IntoIterator<Item = f64>) -> f64 {
    eigs.into_iter().filter(|&l| l > 0.0).map(|l| -l * l.log2()).sum()
}

/// Entropy of entanglement (bits) between `partition` and the remaining qubits.
pub fn entropy_of_entanglement(state: &PureState, partition: &[usize]) -> QubitResult<f64> {
    let n = state.n;
    let mut sorted = partition.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != partition.len() {
        return Err(QubitError::InvalidPartition("repeated qubit".into()));
    }
    if sorted.is_empty() || sorted.len() >= n {
        return Err(QubitError::InvalidPartition(
            "partition must be a nonempty proper subset".into(),
        ));
    }
    if let Some(&q) = sorted.iter().find(|&&q| q >= n) {
        return Err(QubitError::TargetOutOfRange { index: q, n });
    }
    if n == 2 {
        return Ok(pair_entropy(state));
    }
    // Both reduced states share their nonzero spectrum; trace out the larger side.
    let complement: Vec<usize> = (0..n).filter(|q| !sorted.contains(q)).collect();
    let kept = if sorted.len() <= complement.len() { &sorted } else { &complement };
    Ok(spectrum_entropy(reduced_density_matrix(state, kept).symmetric_eigen().eigenvalues.iter().copied()))
}

/// For any two-qubit pure state the reduced spectrum is `(1 ± √(1 - 4|det A|²))/2`
/// where `A` is the 2×2 amplitude matrix. The small eigenvalue is taken in
/// the cancellation-free form `2|det A|² / (1 + √(1 - 4|det A|²))`.
fn pair_entropy(state: &PureState) -> f64 {
    let a = &state.amps;
    let det = (a[0] * a[3] - a[1] * a[2]).norm_sqr();
    let disc = (1.0 - 4.0 * det).max(0.0).sqrt();
    binary_entropy(2.0 * det / (1.0 + disc))
}

/// Dense partial trace onto the qubits in `kept` (sorted).
pub fn reduced_density_matrix(state: &PureState, kept: &[usize]) -> DMatrix<C64> {
    let n = state.n;
    let traced: Vec<usize> = (0..n).filter(|q| !kept.contains(q)).collect();
    let dk = 1usize << kept.len();
    let dt = 1usize << traced.len();
    let compose = |k: usize, t: usize| -> usize {
        let mut idx = 0;
        for (pos, &q) in kept.iter().enumerate() {
            if k >> (kept.len() - 1 - pos) & 1 == 1 {
                idx |= state.bit(q);
            }
        }
        for (pos, &q) in traced.iter().enumerate() {
            if t >> (traced.len() - 1 - pos) & 1 == 1 {
                idx |= state.bit(q);
            }
        }
        idx
    };
    DMatrix::from_fn(dk, dk, |r, c| {
        (0..dt).map(|t| state.amps[compose(r, t)] * state.amps[compose(c, t)].conj()).sum()
    })
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &PureState, b: &PureState) -> QubitResult<f64> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

/// Fidelity between two (not necessarily normalized) single-qubit spinors.
pub fn spinor_fidelity(a: [C64; 2], b: [C64; 2]) -> f64 {
    let na = a[0].norm_sqr() + a[1].norm_sqr();
    let nb = b[0].norm_sqr() + b[1].norm_sqr();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let ov = a[0].conj() * b[0] + a[1].conj() * b[1];
    (ov.norm_sqr() / (na * nb)).min(1.0)
}
