//! Stage scripts realizing the double-interferometer POVM on a trapped
//! spin-½ wavepacket, and a free-space interferometer for contrast.
//!
//! Trapped layout along `y`, in oscillator lengths `ℓ = √(ħ/mω)` with
//! separation `a` (default 6):
//!
//! ```text
//!   t1      s1      t2      i/p1      t3      s2      t4
//! -3a/2     -a     -a/2      0       a/2      a      3a/2
//! ```
//!
//! Every transport is a diabatic jump of the well minimum to the midpoint of
//! the move, held for half a trap period, which delivers the packet at rest.

use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::field::{init_gaussian, SpinorField};
use super::grid::{Grid2D, Rect};
use super::potential::{potential_term, Envelope, PauliAxis, DEFAULT_WALL_HEIGHT, PhysicalParams, PotentialTerm, Switching, TermSpec};
use super::script::{conditional_spin_state, region_probabilities, run_script_with, Region, RunOptions, Stage, StageScript};
use super::{TdseError, TdseResult};
use crate::povm::{config_from_params, wrap_phase, kraus_operators, DistillParams, PovmConfig};
use crate::qubit::spinor_fidelity;

/// Pulses with a smaller area are omitted; they move probability by under 1e-12.
pub const MIN_PULSE_AREA: f64 = 1e-6;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    TrappedPovm,
    FreeMzi,
}

impl FromStr for ScenarioKind {
    type Err = TdseError;

    fn from_str(s: &str) -> TdseResult<Self> {
        match s {
            "trapped_povm" => Ok(Self::TrappedPovm),
            "free_mzi" => Ok(Self::FreeMzi),
            other => Err(TdseError::UnknownScenario(other.into())),
        }
    }
}

/// Geometry and timing knobs. Lengths in `ℓ`, times in `1/ω`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub dx: f64,
    pub separation: f64,
    pub pulse_duration: f64,
    pub hold: f64,
    pub envelope: Envelope,
    /// Grid padding beyond the outermost well.
    pub margin: f64,
    /// Half-extent of the grid across the device.
    pub half_width: f64,
    /// Region half-width in ground-state widths.
    pub region_half_width: f64,
    /// Area of a σ_z trim pulse on p1 before the final hold; see
    /// [`calibrate_trim`].
    pub trim: f64,
    /// Hard-wall barrier of the free interferometer in units of `ħω`.
    pub wall_height: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            dx: 0.1,
            separation: 6.0,
            pulse_duration: 0.5,
            hold: 0.25,
            envelope: Envelope::TopHat,
            margin: 3.75,
            half_width: 4.0,
            region_half_width: 4.0,
            trim: 0.0,
            wall_height: DEFAULT_WALL_HEIGHT,
        }
    }
}

/// A ready-to-run scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub params: PhysicalParams,
    pub initial: SpinorField,
    pub script: StageScript,
    /// `M₁|Ψ⟩`, normalized.
    pub expected_p1: [C64; 2],
    /// Region group holding the final outputs.
    pub output_group: String,
    /// Field gradient realizing the largest spin-dependent offset.
    pub required_b0: f64,
}

/// Builds a scenario for the matched POVM of `state`.
pub fn scenario(
    kind: ScenarioKind,
    state: &DistillParams,
    params: &PhysicalParams,
    config: &ScenarioConfig,
) -> TdseResult<Scenario> {
    let povm = config_from_params(state);
    match kind {
        ScenarioKind::TrappedPovm => trapped_povm(state, &povm, params, config),
        ScenarioKind::FreeMzi => free_mzi(state, &povm, params, config),
    }
}

fn input_spinor(state: &DistillParams) -> [C64; 2] {
    let (a, b) = state.amplitudes();
    [a, b]
}

fn expected_output(state: &DistillParams, povm: &PovmConfig) -> [C64; 2] {
    let (m1, _) = kraus_operators(povm);
    let out = m1.apply(input_spinor(state));
    let n = (out[0].norm_sqr() + out[1].norm_sqr()).sqrt();
    if n > 0.0 {
        [out[0] / n, out[1] / n]
    } else {
        out
    }
}

fn validate_config(c: &ScenarioConfig) -> TdseResult<()> {
    if !c.trim.is_finite() {
        return Err(TdseError::InvalidParameter(format!("trim must be finite (got {})", c.trim)));
    }
    let all = [c.dx, c.separation, c.pulse_duration, c.hold, c.margin, c.half_width, c.region_half_width, c.wall_height];
    if all.iter().all(|x| x.is_finite() && *x > 0.0) {
        Ok(())
    } else {
        Err(TdseError::InvalidParameter(format!("scenario lengths and times must be positive: {c:?}")))
    }
}

struct Builder<'a> {
    params: &'a PhysicalParams,
    stages: Vec<Stage>,
}

impl Builder<'_> {
    fn term(&self, spec: TermSpec) -> TdseResult<PotentialTerm> {
        potential_term(&spec, self.params)
    }

    fn stage(&mut self, label: &str, duration: f64, terms: Vec<PotentialTerm>) {
        self.stages.push(Stage { label: label.into(), duration, terms });
    }
}

/// Trapped four-stage POVM for `state` with Kraus settings `povm`.
pub fn trapped_povm(
    state: &DistillParams,
    povm: &PovmConfig,
    params: &PhysicalParams,
    config: &ScenarioConfig,
) -> TdseResult<Scenario> {
    params.validate()?;
    validate_config(config)?;
    let ell = (params.hbar / (params.mass * params.omega)).sqrt();
    let w = 1.0 / params.omega;
    let sigma0 = params.ground_width();
    let a = config.separation * ell;
    let half_period = std::f64::consts::PI * w;
    let (pulse, hold) = (config.pulse_duration * w, config.hold * w);

    let y_extent = 1.5 * a + config.margin * ell;
    let x_extent = config.half_width * ell;
    let grid = Grid2D::covering([-x_extent, x_extent], [-y_extent, y_extent], config.dx * ell)?;

    let at = |y: f64| [0.0, y];
    let (s1, s2) = (at(-a), at(a));
    let (t1, t2, t3, t4) = (at(-1.5 * a), at(-0.5 * a), at(0.5 * a), at(1.5 * a));
    let half = config.region_half_width * sigma0;
    let rect = |c: [f64; 2]| Rect::centered(c, [half, half]);
    let p2_at = if povm.theta1 >= povm.theta2 { t1 } else { t4 };
    let regions = vec![
        Region::new("i", "i", rect(at(0.0))),
        Region::new("s1", "s", rect(s1)),
        Region::new("s2", "s", rect(s2)),
        Region::new("t1", "t", rect(t1)),
        Region::new("t2", "t", rect(t2)),
        Region::new("t3", "t", rect(t3)),
        Region::new("t4", "t", rect(t4)),
        Region::new("p1", "p", rect(at(0.0))),
        Region::new("p2", "p", rect(p2_at)),
    ];

    let mut b = Builder { params, stages: Vec::new() };
    let trap = |b: &Builder, centers: Vec<[f64; 2]>| b.term(TermSpec::HarmonicTrap { centers });
    let shift = |b: &Builder, centers: Vec<[f64; 2]>, offsets: Vec<[f64; 2]>| {
        b.term(TermSpec::SpinShift { centers, offsets: Some(offsets), switching: Switching::Diabatic })
    };
    let zeeman = |b: &Builder, axis: PauliAxis, area: f64, region: [f64; 2]| {
        b.term(TermSpec::ZeemanPulse {
            axis,
            area,
            start: 0.0,
            duration: pulse,
            envelope: config.envelope,
            region: Some(rect(region)),
        })
    };

    // (a) i → s1 (↓), s2 (↑)
    let t = shift(&b, vec![at(0.0)], vec![at(0.5 * a)])?;
    b.stage("a-split", half_period, vec![t]);
    let s_wells = trap(&b, vec![s1, s2])?;
    b.stage("a-hold", hold, vec![s_wells.clone()]);

    // (b) relative phase, per-arm rotations, spin split of both arms
    let phase = povm.phase1 - povm.phase2;
    if phase.abs() > MIN_PULSE_AREA {
        let z = zeeman(&b, PauliAxis::Z, phase, s2)?;
        b.stage("b-phase", pulse, vec![s_wells.clone(), z]);
    }
    let mut rot = vec![s_wells.clone()];
    if povm.theta1.abs() > MIN_PULSE_AREA {
        rot.push(zeeman(&b, PauliAxis::X, povm.theta1, s1)?);
    }
    if povm.theta2.abs() > MIN_PULSE_AREA {
        rot.push(zeeman(&b, PauliAxis::X, povm.theta2, s2)?);
    }
    if rot.len() > 1 {
        b.stage("b-rot", pulse, rot);
    }
    let t = shift(&b, vec![s1, s2], vec![at(-0.25 * a)])?;
    b.stage("b-split", half_period, vec![t]);

    // (c) flip the discarded arms back, merge t2 and t3 into p1
    let t_wells = trap(&b, vec![t1, t2, t3, t4])?;
    let mut flip = vec![t_wells.clone()];
    if povm.theta1.abs() > MIN_PULSE_AREA {
        flip.push(zeeman(&b, PauliAxis::X, std::f64::consts::FRAC_PI_2, t1)?);
    }
    if povm.theta2.abs() > MIN_PULSE_AREA {
        flip.push(zeeman(&b, PauliAxis::X, std::f64::consts::FRAC_PI_2, t4)?);
    }
    if flip.len() > 1 {
        b.stage("c-flip", pulse, flip);
    } else {
        b.stage("c-hold", hold, flip);
    }
    // Outer wells share the minimum with the moving one and stay put.
    let merge = shift(&b, vec![at(0.0), t1, t4], vec![at(0.25 * a), at(0.0), at(0.0)])?;
    b.stage("c-merge", half_period, vec![merge]);

    // (d) p1 held at the center, p2 at the outer well
    let d_wells = trap(&b, vec![at(0.0), t1, t4])?;
    if config.trim.abs() > MIN_PULSE_AREA {
        let z = zeeman(&b, PauliAxis::Z, config.trim, at(0.0))?;
        b.stage("d-trim", pulse, vec![d_wells.clone(), z]);
    }
    b.stage("d-hold", hold, vec![d_wells]);

    let initial = init_gaussian(grid, at(0.0), sigma0, [0.0, 0.0], input_spinor(state))?;
    Ok(Scenario {
        kind: ScenarioKind::TrappedPovm,
        params: *params,
        initial,
        script: StageScript { stages: b.stages, regions },
        expected_p1: expected_output(state, povm),
        output_group: "p".into(),
        required_b0: params.b0_for_shift(0.5 * a),
    })
}

/// Free-space interferometer: a moving packet split by a spin-dependent
/// momentum kick, steered around a hard-walled island, and recombined, with
/// no transverse confinement.
pub fn free_mzi(
    state: &DistillParams,
    povm: &PovmConfig,
    params: &PhysicalParams,
    config: &ScenarioConfig,
) -> TdseResult<Scenario> {
    params.validate()?;
    validate_config(config)?;
    let ell = (params.hbar / (params.mass * params.omega)).sqrt();
    let w = 1.0 / params.omega;
    let sigma0 = params.ground_width();
    let grid = Grid2D::covering([-10.0 * ell, 10.0 * ell], [-8.0 * ell, 8.0 * ell], config.dx * ell)?;

    // Forward wavevector 4/ℓ; kicks of ±3/ℓ over a quarter time unit.
    let k = 4.0 / ell;
    let kick = 0.25 * w;
    let force = 3.0 * params.hbar / ell / kick;
    let v = params.hbar * k / params.mass;
    let walls = TermSpec::HardWall {
        rects: vec![
            Rect::new([-3.0 * ell, 3.0 * ell], [-2.0 * ell, 2.0 * ell]),
            Rect::new([grid.origin[0], grid.x_max()], [6.5 * ell, grid.y_max()]),
            Rect::new([grid.origin[0], grid.x_max()], [grid.origin[1], -6.5 * ell]),
        ],
        height: Some(config.wall_height),
    };
    let b = Builder { params, stages: Vec::new() };
    let wall = b.term(walls)?;
    let grad = |f: f64| b.term(TermSpec::SpinGradient { force: [0.0, f], start: 0.0, duration: kick });
    // The packet crosses x = 0 at t = 6ℓ/v; the arms turn there.
    let t_mid = 6.0 * ell / v;
    let stages = vec![
        Stage { label: "j1".into(), duration: kick, terms: vec![wall.clone(), grad(force)?] },
        Stage { label: "flight1".into(), duration: t_mid - kick, terms: vec![wall.clone()] },
        Stage { label: "j2".into(), duration: kick, terms: vec![wall.clone(), grad(-2.0 * force)?] },
        Stage { label: "flight2".into(), duration: t_mid - kick, terms: vec![wall.clone()] },
        Stage { label: "j3".into(), duration: kick, terms: vec![wall, grad(force)?] },
    ];
    let half = config.region_half_width * sigma0;
    let regions = vec![Region::new("p1", "p", Rect::centered([6.0 * ell, 0.0], [half, half]))];
    let initial = init_gaussian(grid, [-6.0 * ell, 0.0], sigma0, [k, 0.0], input_spinor(state))?;
    Ok(Scenario {
        kind: ScenarioKind::FreeMzi,
        params: *params,
        initial,
        script: StageScript { stages, regions },
        expected_p1: expected_output(state, povm),
        output_group: "p".into(),
        required_b0: params.b0_for_shift(0.0),
    })
}

/// Trim area cancelling the residual relative phase at p1.
///
/// Runs the untrimmed trapped scenario once on `state` and compares the
/// phase of `⟨↓|ψ⟩*⟨↑|ψ⟩` at p1 with that of `M₁|Ψ⟩`. A σ_z pulse of area `A`
/// shifts that phase by `-2A`, so the trim is half the residual.
pub fn calibrate_trim(
    state: &DistillParams,
    params: &PhysicalParams,
    config: &ScenarioConfig,
    options: &RunOptions,
) -> TdseResult<f64> {
    let untrimmed = ScenarioConfig { trim: 0.0, ..*config };
    let sc = scenario(ScenarioKind::TrappedPovm, state, params, &untrimmed)?;
    let (report, _) = run_scenario(&sc, options, |_, _| {})?;
    let got = report.p1_spinor.ok_or(TdseError::EmptyRegion(report.p1_probability))?;
    let want = sc.expected_p1;
    if want[0].norm() < 1e-9 || want[1].norm() < 1e-9 {
        return Err(TdseError::InvalidParameter("trim calibration needs both spin components at p1".into()));
    }
    let residual = (got[0].conj() * got[1]).arg() - (want[0].conj() * want[1]).arg();
    Ok(0.5 * wrap_phase(residual))
}

/// Outcome of a scenario run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub kind: ScenarioKind,
    pub final_time: f64,
    pub steps: usize,
    pub outputs: Vec<(String, f64)>,
    pub leakage: f64,
    pub p1_probability: f64,
    pub p1_spinor: Option<[C64; 2]>,
    pub expected_p1: [C64; 2],
    pub fidelity: Option<f64>,
    pub max_norm_drift: f64,
    pub stage_labels: Vec<String>,
}

/// Runs a scenario, returning the report and the final field. `observe`
/// sees the field at the cadence of `options`.
pub fn run_scenario(
    sc: &Scenario,
    options: &RunOptions,
    observe: impl FnMut(&SpinorField, usize),
) -> TdseResult<(ScenarioReport, super::script::Trajectory)> {
    let traj = run_script_with(&sc.initial, &sc.script, &sc.params, options, observe)?;
    let outputs = region_probabilities(&traj.final_field, &sc.script.regions_in(&sc.output_group))?;
    let p1 = sc.script.regions.iter().find(|r| r.label == "p1").map(|r| r.rect);
    let p1_probability = p1.map_or(0.0, |r| traj.final_field.probability_in(&r));
    let p1_spinor = p1.and_then(|r| conditional_spin_state(&traj.final_field, &r).ok());
    let report = ScenarioReport {
        kind: sc.kind,
        final_time: traj.final_field.time(),
        steps: traj.stages.iter().map(|s| s.steps).sum(),
        leakage: outputs.leakage,
        outputs: outputs.probabilities,
        p1_probability,
        p1_spinor,
        expected_p1: sc.expected_p1,
        fidelity: p1_spinor.map(|s| spinor_fidelity(s, sc.expected_p1)),
        max_norm_drift: traj.max_norm_drift(sc.initial.norm()),
        stage_labels: traj.stages.iter().map(|s| s.label.clone()).collect(),
    };
    Ok((report, traj))
}
