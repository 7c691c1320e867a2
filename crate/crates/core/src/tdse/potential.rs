use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::grid::Rect;
use super::{TdseError, TdseResult};

/// Barrier height of a hard wall in units of `ħω`.
pub const DEFAULT_WALL_HEIGHT: f64 = 1e3;

/// Physical constants of the trapped particle. Natural units by default.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicalParams {
    pub mass: f64,
    pub hbar: f64,
    pub omega: f64,
    /// Magnetic moment.
    pub mu: f64,
    /// Magnetic field gradient.
    pub b0: f64,
    pub charge: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self { mass: 1.0, hbar: 1.0, omega: 1.0, mu: 1.0, b0: 3.0, charge: 1.0 }
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> TdseResult<()> {
        let all = [self.mass, self.hbar, self.omega, self.mu, self.b0, self.charge];
        if all.iter().all(|x| x.is_finite() && *x > 0.0) {
            Ok(())
        } else {
            Err(TdseError::InvalidParameter(format!("physical parameters must be positive and finite: {self:?}")))
        }
    }

    /// Spin-dependent displacement of the trap minimum, `z₁ = μB₀/(ω²m)`.
    pub fn z1(&self) -> f64 {
        self.mu * self.b0 / (self.omega * self.omega * self.mass)
    }

    /// Uniform electric field completing the square, `E₀ = (z₁ω)²m/(2q)`.
    pub fn e0(&self) -> f64 {
        (self.z1() * self.omega).powi(2) * self.mass / (2.0 * self.charge)
    }

    /// Field gradient that displaces the trap minimum by `z1`.
    pub fn b0_for_shift(&self, z1: f64) -> f64 {
        z1 * self.omega * self.omega * self.mass / self.mu
    }

    /// `mω²`.
    pub fn spring(&self) -> f64 {
        self.mass * self.omega * self.omega
    }

    /// Ground-state density width `√(ħ/2mω)`.
    pub fn ground_width(&self) -> f64 {
        (self.hbar / (2.0 * self.mass * self.omega)).sqrt()
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega
    }
}

/// Hermitian 2×2 matrix `[[d0, off], [off*, d1]]` in the (↓, ↑) basis.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SpinMatrix {
    pub d0: f64,
    pub d1: f64,
    pub off: C64,
}

impl SpinMatrix {
    pub const ZERO: Self = Self { d0: 0.0, d1: 0.0, off: C64 { re: 0.0, im: 0.0 } };

    pub fn diagonal(d0: f64, d1: f64) -> Self {
        Self { d0, d1, off: C64::new(0.0, 0.0) }
    }

    /// `c·σ_k`.
    pub fn pauli(axis: PauliAxis, c: f64) -> Self {
        match axis {
            PauliAxis::X => Self { d0: 0.0, d1: 0.0, off: C64::new(c, 0.0) },
            PauliAxis::Y => Self { d0: 0.0, d1: 0.0, off: C64::new(0.0, -c) },
            PauliAxis::Z => Self::diagonal(c, -c),
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        match (i, j) {
            (0, 0) => C64::new(self.d0, 0.0),
            (1, 1) => C64::new(self.d1, 0.0),
            (0, 1) => self.off,
            _ => self.off.conj(),
        }
    }

    /// Largest eigenvalue magnitude.
    pub fn norm(&self) -> f64 {
        let mean = 0.5 * (self.d0 + self.d1);
        let half = 0.5 * (self.d0 - self.d1);
        mean.abs() + (half * half + self.off.norm_sqr()).sqrt()
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { d0: self.d0 + o.d0, d1: self.d1 + o.d1, off: self.off + o.off }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { d0: self.d0 * s, d1: self.d1 * s, off: self.off * s }
    }

    pub fn is_finite(&self) -> bool {
        self.d0.is_finite() && self.d1.is_finite() && self.off.re.is_finite() && self.off.im.is_finite()
    }
}

/// Value of one term at one point: `scalar·I + spin`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct PotentialSample {
    pub scalar: f64,
    pub spin: SpinMatrix,
}

impl PotentialSample {
    pub const ZERO: Self = Self { scalar: 0.0, spin: SpinMatrix::ZERO };

    pub fn add(&self, o: &Self) -> Self {
        Self { scalar: self.scalar + o.scalar, spin: self.spin.add(&o.spin) }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { scalar: self.scalar * s, spin: self.spin.scale(s) }
    }

    /// Splits into a scalar and a traceless spin part.
    pub fn canonical(&self) -> Self {
        let tr = 0.5 * (self.spin.d0 + self.spin.d1);
        Self {
            scalar: self.scalar + tr,
            spin: SpinMatrix { d0: self.spin.d0 - tr, d1: self.spin.d1 - tr, off: self.spin.off },
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Envelope {
    #[default]
    TopHat,
    SinSquared,
}

#[derive(Copy, Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum Switching {
    #[default]
    Diabatic,
    /// Offsets grow linearly from zero over `ramp`.
    Adiabatic { ramp: f64 },
}

fn default_centers() -> Vec<[f64; 2]> {
    vec![[0.0, 0.0]]
}

/// Serializable description of a potential term. Times are local to the
/// stage the term belongs to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum TermSpec {
    /// `½mω² min_k |r - c_k|²`.
    HarmonicTrap {
        #[serde(default = "default_centers")]
        centers: Vec<[f64; 2]>,
    },
    /// Spin-dependent trap `½mω² min_k |r - c_k ∓ o_k|²`, `+` for ↑ and `-`
    /// for ↓. A single offset applies to every center; no offset means
    /// `(0, z₁)`.
    SpinShift {
        #[serde(default = "default_centers")]
        centers: Vec<[f64; 2]>,
        #[serde(default)]
        offsets: Option<Vec<[f64; 2]>>,
        #[serde(default)]
        switching: Switching,
    },
    /// `-ħλ(t)σ_k` with `∫λ dt = area`, so the spin rotates by `exp(i·area·σ_k)`.
    ZeemanPulse {
        axis: PauliAxis,
        area: f64,
        #[serde(default)]
        start: f64,
        duration: f64,
        #[serde(default)]
        envelope: Envelope,
        #[serde(default)]
        region: Option<Rect>,
    },
    /// Barrier of `height·ħω` (default 10³) inside each rectangle.
    HardWall {
        rects: Vec<Rect>,
        #[serde(default)]
        height: Option<f64>,
    },
    /// Spin-dependent linear potential `V↑ = -F·r`, `V↓ = +F·r` switched on
    /// over `[start, start + duration]`.
    SpinGradient {
        force: [f64; 2],
        #[serde(default)]
        start: f64,
        duration: f64,
    },
    /// Constant scalar offset.
    Uniform { value: f64 },
}

/// Pulse windows are closed, so a pulse spanning a whole stage is constant
/// at every sample the stepper takes; the slack absorbs clock rounding.
fn in_window(s: f64) -> bool {
    (-1e-9..=1.0 + 1e-9).contains(&s)
}

type SampleFn = dyn Fn(f64, f64, f64) -> PotentialSample + Send + Sync;

#[derive(Clone)]
enum Kind {
    Trap { centers: Vec<[f64; 2]>, offsets: Vec<[f64; 2]>, ramp: Option<f64>, half_k: f64 },
    Zeeman { unit: SpinMatrix, lambda0: f64, start: f64, duration: f64, envelope: Envelope, region: Option<Rect> },
    Wall { rects: Vec<Rect>, height: f64 },
    Gradient { force: [f64; 2], start: f64, duration: f64 },
    Uniform(f64),
    Custom { f: Arc<SampleFn>, bound_times: Vec<f64> },
}

/// How a term depends on time.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum TimeDependence {
    Static,
    /// `envelope(t) · sample(x, y, t_peak)`.
    Separable,
    Dynamic,
}

/// A potential contribution with scalar and spin-coupling parts. The spin
/// coupling is Hermitian by representation.
#[derive(Clone)]
pub struct PotentialTerm {
    label: String,
    kind: Kind,
}

impl fmt::Debug for PotentialTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialTerm").field("label", &self.label).finish_non_exhaustive()
    }
}

fn check_finite(what: &str, xs: &[f64]) -> TdseResult<()> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(TdseError::InvalidParameter(format!("{what} must be finite")))
    }
}

/// Builds a term from its description.
pub fn potential_term(spec: &TermSpec, params: &PhysicalParams) -> TdseResult<PotentialTerm> {
    params.validate()?;
    let (label, kind) = match spec {
        TermSpec::HarmonicTrap { centers } => {
            check_centers(centers)?;
            let offsets = vec![[0.0, 0.0]; centers.len()];
            ("harmonic_trap", Kind::Trap { centers: centers.clone(), offsets, ramp: None, half_k: 0.5 * params.spring() })
        }
        TermSpec::SpinShift { centers, offsets, switching } => {
            check_centers(centers)?;
            let offsets = match offsets {
                None => vec![[0.0, params.z1()]; centers.len()],
                Some(o) if o.len() == 1 => vec![o[0]; centers.len()],
                Some(o) if o.len() == centers.len() => o.clone(),
                Some(o) => {
                    return Err(TdseError::InvalidParameter(format!(
                        "{} offsets for {} centers",
                        o.len(),
                        centers.len()
                    )))
                }
            };
            check_finite("offsets", &offsets.concat())?;
            let ramp = match *switching {
                Switching::Diabatic => None,
                Switching::Adiabatic { ramp } if ramp > 0.0 && ramp.is_finite() => Some(ramp),
                Switching::Adiabatic { ramp } => {
                    return Err(TdseError::InvalidParameter(format!("ramp time must be positive (got {ramp})")))
                }
            };
            ("spin_shift", Kind::Trap { centers: centers.clone(), offsets, ramp, half_k: 0.5 * params.spring() })
        }
        TermSpec::ZeemanPulse { axis, area, start, duration, envelope, region } => {
            check_finite("pulse timing", &[*area, *start, *duration])?;
            if *duration <= 0.0 || *start < 0.0 {
                return Err(TdseError::InvalidParameter(format!(
                    "pulse needs start ≥ 0 and duration > 0 (got {start}, {duration})"
                )));
            }
            let lambda0 = match envelope {
                Envelope::TopHat => area / duration,
                Envelope::SinSquared => 2.0 * area / duration,
            };
            let kind = Kind::Zeeman {
                unit: SpinMatrix::pauli(*axis, -params.hbar),
                lambda0,
                start: *start,
                duration: *duration,
                envelope: *envelope,
                region: *region,
            };
            ("zeeman_pulse", kind)
        }
        TermSpec::HardWall { rects, height } => {
            let h = height.unwrap_or(DEFAULT_WALL_HEIGHT) * params.hbar * params.omega;
            if !(h > 0.0 && h.is_finite()) {
                return Err(TdseError::InvalidParameter(format!("wall height must be positive (got {h})")));
            }
            ("hard_wall", Kind::Wall { rects: rects.clone(), height: h })
        }
        TermSpec::SpinGradient { force, start, duration } => {
            check_finite("gradient", &[force[0], force[1], *start, *duration])?;
            if *duration <= 0.0 || *start < 0.0 {
                return Err(TdseError::InvalidParameter("gradient needs start ≥ 0 and duration > 0".into()));
            }
            ("spin_gradient", Kind::Gradient { force: *force, start: *start, duration: *duration })
        }
        TermSpec::Uniform { value } => {
            check_finite("uniform value", &[*value])?;
            ("uniform", Kind::Uniform(*value))
        }
    };
    Ok(PotentialTerm { label: label.into(), kind })
}

fn check_centers(centers: &[[f64; 2]]) -> TdseResult<()> {
    if centers.is_empty() {
        return Err(TdseError::InvalidParameter("a trap needs at least one center".into()));
    }
    check_finite("centers", &centers.concat())
}

impl PotentialTerm {
    /// Arbitrary term given as a sampling function. `bound_times` are the
    /// stage-local times sampled when bounding its energy.
    pub fn custom(
        label: impl Into<String>,
        f: impl Fn(f64, f64, f64) -> PotentialSample + Send + Sync + 'static,
        bound_times: Vec<f64>,
    ) -> Self {
        Self { label: label.into(), kind: Kind::Custom { f: Arc::new(f), bound_times } }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn time_dependence(&self) -> TimeDependence {
        match &self.kind {
            Kind::Trap { ramp: None, .. } | Kind::Wall { .. } | Kind::Uniform(_) => TimeDependence::Static,
            Kind::Zeeman { .. } | Kind::Gradient { .. } => TimeDependence::Separable,
            Kind::Trap { ramp: Some(_), .. } | Kind::Custom { .. } => TimeDependence::Dynamic,
        }
    }

    /// Time profile of a separable term; 1 for static terms.
    pub fn envelope(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Zeeman { lambda0, start, duration, envelope, .. } => {
                let s = (t - start) / duration;
                if !in_window(s) {
                    return 0.0;
                }
                match envelope {
                    Envelope::TopHat => *lambda0,
                    Envelope::SinSquared => lambda0 * (std::f64::consts::PI * s).sin().powi(2),
                }
            }
            Kind::Gradient { start, duration, .. } => f64::from(u8::from(in_window((t - start) / duration))),
            _ => 1.0,
        }
    }

    /// Largest envelope magnitude.
    pub fn peak_envelope(&self) -> f64 {
        match &self.kind {
            Kind::Zeeman { lambda0, .. } => lambda0.abs(),
            _ => 1.0,
        }
    }

    /// Spatial profile at unit envelope.
    pub fn sample_profile(&self, x: f64, y: f64) -> PotentialSample {
        match &self.kind {
            Kind::Zeeman { unit, region, .. } => {
                if region.map_or(true, |r| r.contains([x, y])) {
                    PotentialSample { scalar: 0.0, spin: *unit }
                } else {
                    PotentialSample::ZERO
                }
            }
            Kind::Gradient { force, .. } => {
                let fr = force[0] * x + force[1] * y;
                PotentialSample { scalar: 0.0, spin: SpinMatrix::diagonal(fr, -fr) }
            }
            _ => self.sample(x, y, 0.0),
        }
    }

    /// Scalar potential and spin coupling at `(x, y)` and stage time `t`.
    pub fn sample(&self, x: f64, y: f64, t: f64) -> PotentialSample {
        match &self.kind {
            Kind::Trap { centers, offsets, ramp, half_k } => {
                let frac = ramp.map_or(1.0, |r| (t / r).clamp(0.0, 1.0));
                let well = |sign: f64| {
                    centers
                        .iter()
                        .zip(offsets)
                        .map(|(c, o)| {
                            let dx = x - c[0] - sign * frac * o[0];
                            let dy = y - c[1] - sign * frac * o[1];
                            dx * dx + dy * dy
                        })
                        .fold(f64::INFINITY, f64::min)
                        * half_k
                };
                let (down, up) = (well(-1.0), well(1.0));
                let mean = 0.5 * (down + up);
                PotentialSample { scalar: mean, spin: SpinMatrix::diagonal(down - mean, up - mean) }
            }
            Kind::Zeeman { .. } | Kind::Gradient { .. } => self.sample_profile(x, y).scale(self.envelope(t)),
            Kind::Wall { rects, height } => {
                let inside = rects.iter().any(|r| r.contains([x, y]));
                PotentialSample { scalar: if inside { *height } else { 0.0 }, spin: SpinMatrix::ZERO }
            }
            Kind::Uniform(v) => PotentialSample { scalar: *v, spin: SpinMatrix::ZERO },
            Kind::Custom { f, .. } => f(x, y, t),
        }
    }

    /// Stage times at which a dynamic term is sampled for energy bounds.
    pub fn bound_times(&self) -> Vec<f64> {
        match &self.kind {
            Kind::Trap { ramp: Some(r), .. } => (0..=8).map(|i| r * i as f64 / 8.0).collect(),
            Kind::Custom { bound_times, .. } if !bound_times.is_empty() => bound_times.clone(),
            _ => vec![0.0],
        }
    }

    /// Last stage time at which the term still changes; static afterwards.
    pub fn settles_at(&self) -> f64 {
        match &self.kind {
            Kind::Trap { ramp: Some(r), .. } => *r,
            Kind::Custom { .. } => f64::INFINITY,
            _ => 0.0,
        }
    }
}
