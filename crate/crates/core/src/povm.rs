//! The two-outcome double-interferometer POVM, its reduction to a distillation
//! angle and phase, and its action on Schmidt-form pairs and GHZ-class states.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qubit::{apply_single_qubit_op, PureState, QubitError, QubitOperator};

/// Normalization tolerance for user-supplied amplitudes.
pub const INPUT_NORM_TOL: f64 = 1e-9;

/// Tolerance on the off-diagonal amplitudes of a Schmidt-form pair.
pub const SCHMIDT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistillError {
    #[error("amplitudes are not normalized: |α|² + |β|² = {0}")]
    Unnormalized(f64),

    #[error("state is not of the form α|00⟩ + β|11⟩ (off-diagonal weight {0:e})")]
    NotSchmidtForm(f64),

    #[error("expected a two-qubit state, got {0} qubits")]
    NotAPair(usize),

    #[error("GHZ-class states need at least two qubits, got {0}")]
    TooFewQubits(usize),

    #[error("invalid resource parameters: {0}")]
    InvalidResources(String),

    #[error("non-finite parameter")]
    NonFinite,

    #[error(transparent)]
    Qubit(#[from] QubitError),
}

pub type DistillResult<T> = Result<T, DistillError>;

/// Distillation angle `φ ∈ [0, π/2]` and phase `γ ∈ (-π, π]`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistillParams {
    pub phi: f64,
    pub gamma: f64,
}

impl DistillParams {
    /// Canonicalizes `(φ, γ)` so that `cos φ` and `e^{iγ} sin φ` are
    /// unchanged up to a global sign.
    pub fn new(phi: f64, gamma: f64) -> DistillResult<Self> {
        if !phi.is_finite() || !gamma.is_finite() {
            return Err(DistillError::NonFinite);
        }
        // Map the pair (cos φ, e^{iγ} sin φ) onto φ ∈ [0, π/2] by absorbing
        // signs into γ or the global phase.
        let (c, s) = (phi.cos(), phi.sin());
        let beta = C64::from_polar(s, gamma);
        let (c, beta) = if c < 0.0 { (-c, -beta) } else { (c, beta) };
        let phi = c.clamp(0.0, 1.0).acos().min(FRAC_PI_2);
        let gamma = if beta.norm() == 0.0 { 0.0 } else { wrap_phase(beta.arg()) };
        Ok(Self { phi, gamma })
    }

    /// `(cos φ, e^{iγ} sin φ)`.
    pub fn amplitudes(&self) -> (C64, C64) {
        (C64::new(self.phi.cos(), 0.0), C64::from_polar(self.phi.sin(), self.gamma))
    }

    /// Success probability `1 - |cos 2φ|` for a matched input.
    pub fn success_probability(&self) -> f64 {
        1.0 - (2.0 * self.phi).cos().abs()
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    if y <= -PI {
        y += 2.0 * PI;
    }
    y
}

/// Rotation angles and phases of the double interferometer.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PovmConfig {
    pub theta1: f64,
    pub theta2: f64,
    pub phase1: f64,
    pub phase2: f64,
    pub phase3: f64,
    pub phase4: f64,
}

impl PovmConfig {
    pub fn trivial() -> Self {
        Self { theta1: 0.0, theta2: 0.0, phase1: 0.0, phase2: 0.0, phase3: 0.0, phase4: 0.0 }
    }
}

/// Real part of the principal complex `arccos`: `0` for `x ≥ 1`, `π` for `x ≤ -1`.
pub fn re_arccos(x: f64) -> f64 {
    if x.is_nan() {
        return FRAC_PI_2;
    }
    x.clamp(-1.0, 1.0).acos()
}

/// Settings that turn `M₁` into the Procrustean filter for the state
/// `cos φ |00⟩ + e^{iγ} sin φ |11⟩`.
pub fn config_from_params(params: &DistillParams) -> PovmConfig {
    let (s, c) = params.phi.sin_cos();
    let tan = s / c;
    let cot = c / s;
    PovmConfig {
        theta1: re_arccos(tan),
        theta2: re_arccos(cot),
        phase1: 0.0,
        phase2: -params.gamma,
        phase3: -params.gamma,
        phase4: 0.0,
    }
}

/// Recovers `(φ, γ)` from Schmidt amplitudes, removing the global phase of `α`.
pub fn params_from_state(alpha: C64, beta: C64) -> DistillResult<DistillParams> {
    if !(alpha.re.is_finite() && alpha.im.is_finite() && beta.re.is_finite() && beta.im.is_finite()) {
        return Err(DistillError::NonFinite);
    }
    let norm = alpha.norm_sqr() + beta.norm_sqr();
    if (norm - 1.0).abs() > INPUT_NORM_TOL {
        return Err(DistillError::Unnormalized(norm));
    }
    let global = if alpha.norm() > 0.0 { C64::from_polar(1.0, -alpha.arg()) } else { C64::new(1.0, 0.0) };
    let a = (alpha * global).re.max(0.0);
    let b = beta * global;
    let phi = (a / norm.sqrt()).clamp(0.0, 1.0).acos();
    let gamma = if b.norm() == 0.0 { 0.0 } else { wrap_phase(b.arg()) };
    Ok(DistillParams { phi, gamma })
}

/// `(M₁, M₂)` with `M₁ = cos θ₁ e^{iφ₁}|0⟩⟨0| + cos θ₂ e^{iφ₂}|1⟩⟨1|` and
/// `M₂ = sin θ₁ e^{iφ₃}|0⟩⟨0| + sin θ₂ e^{iφ₄}|1⟩⟨1|`.
pub fn kraus_operators(config: &PovmConfig) -> (QubitOperator, QubitOperator) {
    let m1 = QubitOperator::diagonal(
        C64::from_polar(config.theta1.cos(), config.phase1),
        C64::from_polar(config.theta2.cos(), config.phase2),
    );
    let m2 = QubitOperator::diagonal(
        C64::from_polar(config.theta1.sin(), config.phase3),
        C64::from_polar(config.theta2.sin(), config.phase4),
    );
    (m1, m2)
}

/// `M₁†M₁ + M₂†M₂`.
pub fn completeness(config: &PovmConfig) -> QubitOperator {
    let (m1, m2) = kraus_operators(config);
    m1.adjoint().matmul(&m1).add(&m2.adjoint().matmul(&m2))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    /// Heralded success output.
    P1,
    /// Failure output.
    P2,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Branch::P1 => "p1",
            Branch::P2 => "p2",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistillationOutcome {
    pub branch: Branch,
    /// Normalized output, `None` when the branch has zero probability.
    pub state: Option<PureState>,
    pub probability: f64,
}

fn apply_povm(
    state: &PureState,
    config: &PovmConfig,
    target: usize,
) -> DistillResult<(DistillationOutcome, DistillationOutcome)> {
    let (m1, m2) = kraus_operators(config);
    let (s1, p1) = apply_single_qubit_op(state, &m1, target)?;
    let (s2, p2) = apply_single_qubit_op(state, &m2, target)?;
    Ok((
        DistillationOutcome { branch: Branch::P1, state: s1, probability: p1 },
        DistillationOutcome { branch: Branch::P2, state: s2, probability: p2 },
    ))
}

/// Runs the POVM configured by `params` on qubit `target` of a Schmidt-form
/// pair. Returns the `p1` and `p2` outcomes in that order.
pub fn distill_pair(
    state: &PureState,
    params: &DistillParams,
    target: usize,
) -> DistillResult<(DistillationOutcome, DistillationOutcome)> {
    if state.num_qubits() != 2 {
        return Err(DistillError::NotAPair(state.num_qubits()));
    }
    let a = state.amplitudes();
    let off = a[1].norm_sqr() + a[2].norm_sqr();
    if off.sqrt() > SCHMIDT_TOL {
        return Err(DistillError::NotSchmidtForm(off));
    }
    apply_povm(state, &config_from_params(params), target)
}

/// `α|0…0⟩ + β|1…1⟩` on `n` qubits.
pub fn ghz_class_state(n: usize, alpha: C64, beta: C64) -> DistillResult<PureState> {
    if n < 2 {
        return Err(DistillError::TooFewQubits(n));
    }
    if n >= usize::BITS as usize {
        return Err(DistillError::InvalidResources(format!("{n} qubits is beyond a dense state vector")));
    }
    let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
    amps[0] = alpha;
    amps[(1 << n) - 1] = beta;
    Ok(PureState::new(n, amps)?)
}

/// The `n`-qubit GHZ state `(|0…0⟩ + |1…1⟩)/√2`.
pub fn ghz_state(n: usize) -> DistillResult<PureState> {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    ghz_class_state(n, h, h)
}

/// Sends one qubit of `α|0⟩^⊗n + β|1⟩^⊗n` through the matched POVM.
pub fn distill_ghz(n: usize, alpha: C64, beta: C64) -> DistillResult<(DistillationOutcome, DistillationOutcome)> {
    if n < 2 {
        return Err(DistillError::TooFewQubits(n));
    }
    let params = params_from_state(alpha, beta)?;
    let state = ghz_class_state(n, alpha, beta)?;
    apply_povm(&state, &config_from_params(&params), 0)
}

/// Order-of-magnitude resource count for building an MBQC cluster from
/// distilled GHZ and Bell states.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MbqcResourceEstimate {
    pub ghz_count: u64,
    pub bell_count: u64,
    pub ensemble_size: u64,
    pub alpha: f64,
}

/// `ghz = bell = ⌈c·n·k·L³⌉`, `ensemble = ⌈(ghz + bell)/α²⌉`.
pub fn mbqc_resource_estimate(
    n_logical: u64,
    depth_k: u64,
    lattice_l: u64,
    alpha: f64,
    prefactor: f64,
) -> DistillResult<MbqcResourceEstimate> {
    if n_logical == 0 || depth_k == 0 || lattice_l == 0 {
        return Err(DistillError::InvalidResources("counts must be at least 1".into()));
    }
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(DistillError::InvalidResources(format!("alpha must be positive (got {alpha})")));
    }
    if alpha > std::f64::consts::FRAC_1_SQRT_2 + 1e-12 {
        return Err(DistillError::InvalidResources(format!("alpha must not exceed 1/√2 (got {alpha})")));
    }
    if !prefactor.is_finite() || prefactor <= 0.0 {
        return Err(DistillError::InvalidResources(format!("prefactor must be positive (got {prefactor})")));
    }
    let volume = prefactor * n_logical as f64 * depth_k as f64 * (lattice_l as f64).powi(3);
    let ghz = ceil_count(volume)?;
    let bell = ghz;
    let ensemble = ceil_count((ghz + bell) as f64 / (alpha * alpha))?;
    Ok(MbqcResourceEstimate { ghz_count: ghz, bell_count: bell, ensemble_size: ensemble, alpha })
}

/// Ceiling that ignores representation noise just above an integer.
fn ceil_count(x: f64) -> DistillResult<u64> {
    if !x.is_finite() || x >= u64::MAX as f64 {
        return Err(DistillError::InvalidResources("resource count overflows".into()));
    }
    let r = x.round();
    let c = if (x - r).abs() <= 1e-9 * r.max(1.0) { r } else { x.ceil() };
    Ok((c as u64).max(1))
}
