//! Real-space spinor wavepacket dynamics on a 2D grid.

use thiserror::Error;

pub mod field;
pub mod grid;
pub mod potential;
pub mod scenario;
pub mod script;
pub mod stepper;

pub use field::{init_gaussian, Moments, SpinorField};
pub use grid::{Grid2D, Rect};
pub use potential::{
    potential_term, Envelope, PauliAxis, PhysicalParams, PotentialSample, PotentialTerm, SpinMatrix, Switching,
    TermSpec, TimeDependence,
};
pub use script::{
    conditional_spin_state, region_probabilities, run_script, run_script_with, stage_steps, DtPolicy, Region, RegionReport,
    RunOptions, Stage, StageRecord, StageScript, Trajectory,
};
pub use scenario::{calibrate_trim, free_mzi, run_scenario, scenario, trapped_povm, Scenario, ScenarioConfig, ScenarioKind, ScenarioReport};
pub use stepper::{max_stable_dt, step, Stepper};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TdseError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("packet width {width} is under-resolved by spacing {spacing} (need width ≥ 3·spacing)")]
    UnderResolved { width: f64, spacing: f64 },
    #[error("point {0:?} lies outside the grid")]
    OutsideGrid([f64; 2]),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("time step {dt:e} exceeds the stability bound {dt_max:e}")]
    Unstable { dt: f64, dt_max: f64 },
    #[error("potential is not finite on the grid")]
    UnboundedPotential,
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("field has zero norm")]
    ZeroField,
    #[error("regions `{0}` and `{1}` overlap")]
    OverlappingRegions(String, String),
    #[error("region `{0}` extends beyond the grid")]
    RegionOutsideGrid(String),
    #[error("region probability {0:e} is too small to define a spin state")]
    EmptyRegion(f64),
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
}

pub type TdseResult<T> = Result<T, TdseError>;
