use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::field::SpinorField;
use super::grid::Rect;
use super::potential::{PhysicalParams, PotentialTerm};
use super::stepper::Stepper;
use super::{TdseError, TdseResult};

/// Labeled spatial region. Regions in the same group must be disjoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub label: String,
    pub group: String,
    pub rect: Rect,
}

impl Region {
    pub fn new(label: impl Into<String>, group: impl Into<String>, rect: Rect) -> Self {
        Self { label: label.into(), group: group.into(), rect }
    }
}

/// One stage: fixed terms for `duration`, with term times measured from the
/// stage start.
#[derive(Clone, Debug)]
pub struct Stage {
    pub label: String,
    pub duration: f64,
    pub terms: Vec<PotentialTerm>,
}

#[derive(Clone, Debug, Default)]
pub struct StageScript {
    pub stages: Vec<Stage>,
    pub regions: Vec<Region>,
}

impl StageScript {
    pub fn total_duration(&self) -> f64 {
        self.stages.iter().map(|s| s.duration).sum()
    }

    pub fn regions_in(&self, group: &str) -> Vec<Region> {
        self.regions.iter().filter(|r| r.group == group).cloned().collect()
    }

    pub fn groups(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.regions {
            if !out.contains(&r.group) {
                out.push(r.group.clone());
            }
        }
        out
    }

    pub fn validate(&self, field: &SpinorField) -> TdseResult<()> {
        if let Some(s) = self.stages.iter().find(|s| !(s.duration > 0.0 && s.duration.is_finite())) {
            return Err(TdseError::InvalidParameter(format!("stage `{}` has duration {}", s.label, s.duration)));
        }
        let bounds = field.grid().bounds();
        if let Some(r) = self.regions.iter().find(|r| !r.rect.within(&bounds)) {
            return Err(TdseError::RegionOutsideGrid(r.label.clone()));
        }
        for group in self.groups() {
            check_disjoint(&self.regions_in(&group))?;
        }
        Ok(())
    }
}

fn check_disjoint(regions: &[Region]) -> TdseResult<()> {
    for (i, a) in regions.iter().enumerate() {
        for b in &regions[i + 1..] {
            if a.rect.overlaps(&b.rect) {
                return Err(TdseError::OverlappingRegions(a.label.clone(), b.label.clone()));
            }
        }
    }
    Ok(())
}

/// Step-size rule applied to each stage. Every stage is split into equal
/// steps so that its duration is met exactly.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DtPolicy {
    /// Steps of at most this fraction of the stage's `Δt_max`.
    Fraction(f64),
    /// Steps of at most this size; stages where it is unstable are rejected.
    Fixed(f64),
}

impl Default for DtPolicy {
    fn default() -> Self {
        DtPolicy::Fraction(0.5)
    }
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct RunOptions {
    pub dt: DtPolicy,
    /// Observer and norm cadence in steps; stage ends are always recorded.
    pub record_every: Option<usize>,
    /// Keep a copy of the field at the end of every stage.
    pub keep_stage_fields: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub probabilities: Vec<(String, f64)>,
    pub leakage: f64,
}

impl RegionReport {
    pub fn get(&self, label: &str) -> Option<f64> {
        self.probabilities.iter().find(|(l, _)| l == label).map(|(_, p)| *p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub label: String,
    pub t_end: f64,
    pub dt: f64,
    pub steps: usize,
    pub norm: f64,
    /// One report per region group.
    pub regions: Vec<(String, RegionReport)>,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSample {
    pub t: f64,
    pub stage: usize,
    pub norm: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub stages: Vec<StageRecord>,
    pub norms: Vec<NormSample>,
    pub stage_fields: Vec<SpinorField>,
    pub final_field: SpinorField,
}

impl Trajectory {
    pub fn max_norm_drift(&self, reference: f64) -> f64 {
        self.norms.iter().map(|s| (s.norm - reference).abs()).fold(0.0, f64::max)
    }
}

/// Integrated density per region and the leakage `1 - Σ`.
pub fn region_probabilities(field: &SpinorField, regions: &[Region]) -> TdseResult<RegionReport> {
    check_disjoint(regions)?;
    let bounds = field.grid().bounds();
    if let Some(r) = regions.iter().find(|r| !r.rect.within(&bounds)) {
        return Err(TdseError::RegionOutsideGrid(r.label.clone()));
    }
    let probabilities: Vec<(String, f64)> =
        regions.iter().map(|r| (r.label.clone(), field.probability_in(&r.rect))).collect();
    let leakage = 1.0 - probabilities.iter().map(|(_, p)| p).sum::<f64>();
    Ok(RegionReport { probabilities, leakage })
}

/// Minimum region probability for [`conditional_spin_state`].
pub const MIN_REGION_PROBABILITY: f64 = 1e-6;

/// Spin state carried by the dominant spatial mode inside `rect`.
///
/// Fits a Gaussian `g` with the region's center, per-axis width and mean
/// wavevector, projects each component onto `g`, and normalizes the result.
pub fn conditional_spin_state(field: &SpinorField, rect: &Rect) -> TdseResult<[C64; 2]> {
    let p = field.probability_in(rect);
    if !(p > MIN_REGION_PROBABILITY) {
        return Err(TdseError::EmptyRegion(p));
    }
    let m = field.moments_in(rect);
    let g = field.grid();
    let wx = 1.0 / (4.0 * m.width[0].max(g.dx).powi(2));
    let wy = 1.0 / (4.0 * m.width[1].max(g.dy).powi(2));
    let mut acc = [C64::new(0.0, 0.0); 2];
    for ix in 0..g.nx {
        let x = g.x(ix);
        if x < rect.x[0] || x > rect.x[1] {
            continue;
        }
        for iy in 0..g.ny {
            let y = g.y(iy);
            if y < rect.y[0] || y > rect.y[1] {
                continue;
            }
            let (rx, ry) = (x - m.center[0], y - m.center[1]);
            let mode = C64::from_polar((-wx * rx * rx - wy * ry * ry).exp(), m.wavevector[0] * rx + m.wavevector[1] * ry);
            let psi = field.psi(g.index(ix, iy));
            acc[0] += mode.conj() * psi[0];
            acc[1] += mode.conj() * psi[1];
        }
    }
    let n = (acc[0].norm_sqr() + acc[1].norm_sqr()).sqrt();
    if !(n > 0.0) {
        return Err(TdseError::EmptyRegion(p));
    }
    Ok([acc[0] / n, acc[1] / n])
}

/// Step count and uniform step for a stage: `⌈duration/cap⌉` steps with the
/// cap set by `policy`.
pub fn stage_steps(duration: f64, dt_max: f64, policy: DtPolicy) -> TdseResult<(usize, f64)> {
    let cap = match policy {
        DtPolicy::Fraction(f) if f > 0.0 && f <= 1.0 => f * dt_max,
        DtPolicy::Fraction(f) => return Err(TdseError::InvalidParameter(format!("dt fraction {f} outside (0, 1]"))),
        DtPolicy::Fixed(dt) if dt > dt_max => return Err(TdseError::Unstable { dt, dt_max }),
        DtPolicy::Fixed(dt) if dt > 0.0 => dt,
        DtPolicy::Fixed(dt) => return Err(TdseError::InvalidParameter(format!("time step must be positive (got {dt})"))),
    };
    let steps = (duration / cap).ceil().max(1.0) as usize;
    Ok((steps, duration / steps as f64))
}

/// Runs every stage in order.
pub fn run_script(
    initial: &SpinorField,
    script: &StageScript,
    params: &PhysicalParams,
    options: &RunOptions,
) -> TdseResult<Trajectory> {
    run_script_with(initial, script, params, options, |_, _| {})
}

/// [`run_script`] calling `observe(field, stage)` at the start, every
/// `record_every` steps, and at each stage end.
pub fn run_script_with(
    initial: &SpinorField,
    script: &StageScript,
    params: &PhysicalParams,
    options: &RunOptions,
    mut observe: impl FnMut(&SpinorField, usize),
) -> TdseResult<Trajectory> {
    script.validate(initial)?;
    let mut field = initial.clone();
    let groups = script.groups();
    let mut traj = Trajectory { stages: Vec::new(), norms: Vec::new(), stage_fields: Vec::new(), final_field: initial.clone() };
    traj.norms.push(NormSample { t: field.t, stage: 0, norm: field.norm() });
    observe(&field, 0);
    for (k, stage) in script.stages.iter().enumerate() {
        let t0 = field.t;
        let mut stepper = Stepper::new(*field.grid(), &stage.terms, params, t0)?;
        let (steps, dt) = stage_steps(stage.duration, stepper.max_stable_dt(), options.dt)?;
        let carried = field.norm();
        for n in 1..=steps {
            stepper.step(&mut field, dt)?;
            if n == 1 {
                // The first step re-staggers under this stage's Hamiltonian;
                // carry the conserved norm across the switch.
                let fresh = field.norm();
                if fresh > 0.0 && carried > 0.0 {
                    field.scale((carried / fresh).sqrt());
                }
            }
            if n == steps {
                // Removes rounding drift so stage boundaries are exact.
                field.t = t0 + stage.duration;
            }
            if options.record_every.is_some_and(|e| e > 0 && n % e == 0) && n != steps {
                traj.norms.push(NormSample { t: field.t, stage: k, norm: field.norm() });
                observe(&field, k);
            }
        }
        let norm = field.norm();
        traj.norms.push(NormSample { t: field.t, stage: k, norm });
        observe(&field, k);
        let regions = groups
            .iter()
            .map(|g| Ok((g.clone(), region_probabilities(&field, &script.regions_in(g))?)))
            .collect::<TdseResult<Vec<_>>>()?;
        traj.stages.push(StageRecord { label: stage.label.clone(), t_end: field.t, dt, steps, norm, regions });
        if options.keep_stage_fields {
            traj.stage_fields.push(field.clone());
        }
    }
    traj.final_field = field;
    Ok(traj)
}
