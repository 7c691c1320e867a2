//! Procrustean entanglement distillation with a local two-outcome POVM.
//!
//! Three tiers share one set of types:
//!
//! * [`qubit`]: exact state-vector algebra for small registers.
//! * [`povm`]: Kraus operators of the double-interferometer POVM, pair and
//!   GHZ distillation, and MBQC resource counts.
//! * [`ensemble`]: seeded Monte-Carlo over ensembles of weakly entangled
//!   pairs, the `(S̄_in, φ)` sweep and basis-measurement calibration.
//! * [`tdse`]: a staggered leapfrog solver for a two-component spinor on a
//!   2D grid, with stage scripts that realize the POVM on a trapped packet.

pub mod ensemble;
pub mod povm;
pub mod qubit;
pub mod tdse;

pub use ensemble::{
    calibrate_and_distill, distill_ensemble, distill_ensemble_with, mean_alpha2_from_entropy, sample_ensemble,
    sweep_grid, Calibration, DistillOptions, EnsembleError, EnsembleFamily, EnsembleOutcome, EnsembleSpec, Histogram,
    SurvivorMode, SweepGrid, SweepSpec, NORMAL_SAMPLER, RNG_ALGORITHM,
};
pub use num_complex::Complex64;
pub use povm::{
    config_from_params, distill_ghz, distill_pair, kraus_operators, mbqc_resource_estimate, params_from_state, Branch,
    DistillError, DistillParams, DistillationOutcome, MbqcResourceEstimate, PovmConfig,
};
pub use qubit::{
    apply_single_qubit_op, binary_entropy, entropy_of_entanglement, fidelity, make_state, spinor_fidelity, PureState,
    QubitError, QubitOperator,
};
pub use tdse::{
    init_gaussian, max_stable_dt, potential_term, region_probabilities, run_script, scenario, Grid2D, PhysicalParams,
    PotentialTerm, Rect, Region, Scenario, ScenarioKind, SpinorField, StageScript, TdseError, TermSpec,
};
