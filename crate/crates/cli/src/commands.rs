//! One function per command. Each writes its artifacts into the output
//! directory and may complete defaults left open by the config.

use std::path::Path;

use procrustean::ensemble::{
    calibrate_and_distill, distill_ensemble_with, mean_alpha2_from_entropy, sample_ensemble, sweep_grid,
    DistillOptions, EnsembleOutcome, EnsembleSpec, SweepSpec,
};
use procrustean::povm::{distill_ghz, distill_pair, ghz_state, mbqc_resource_estimate, DistillParams};
use procrustean::qubit::{entropy_of_entanglement, fidelity, PureState};
use procrustean::tdse::{calibrate_trim, run_scenario, scenario, RunOptions, ScenarioKind, SpinorField};

use crate::config::{DistillConfig, EnsembleConfig, FamilyName, GhzConfig, MbqcConfig, SweepConfig, TdseConfig};
use crate::error::{CliError, CliResult};
use crate::output::{write_heatmap, write_table, Cell, OutputArtifact};

/// Artifacts and warnings of one command.
#[derive(Debug, Default)]
pub struct Produced {
    pub artifacts: Vec<OutputArtifact>,
    pub warnings: Vec<String>,
}

impl Produced {
    fn table(&mut self, dir: &Path, name: &str, columns: &[&str], rows: &[Vec<Cell>]) -> CliResult<()> {
        self.artifacts.push(write_table(rows, columns, &dir.join(name))?);
        Ok(())
    }

    fn heatmap(&mut self, dir: &Path, name: &str, matrix: &[Vec<f64>]) -> CliResult<()> {
        let h = write_heatmap(matrix, None, &dir.join(name))?;
        self.artifacts.extend([h.image, h.sidecar]);
        self.warnings.extend(h.warning);
        Ok(())
    }
}

fn params(phi: f64, gamma: f64) -> CliResult<DistillParams> {
    DistillParams::new(phi, gamma).map_err(|e| CliError::runtime("parameters", e))
}

/// Entanglement entropy across the first qubit, `None` for an empty branch.
fn branch_entropy(state: Option<&PureState>) -> CliResult<Option<f64>> {
    state.map(|s| entropy_of_entanglement(s, &[0])).transpose().map_err(|e| CliError::runtime("entropy", e))
}

fn ghz_fidelity(state: Option<&PureState>) -> CliResult<Option<f64>> {
    let Some(s) = state else { return Ok(None) };
    let target = ghz_state(s.num_qubits()).map_err(|e| CliError::runtime("ghz", e))?;
    fidelity(s, &target).map(Some).map_err(|e| CliError::runtime("fidelity", e))
}

/// `distill.csv`: one row per branch.
pub fn distill(cfg: &DistillConfig, dir: &Path) -> CliResult<Produced> {
    let p = params(cfg.phi, cfg.gamma)?;
    let (a, b) = p.amplitudes();
    let state = PureState::schmidt_pair(a, b).map_err(|e| CliError::runtime("state", e))?;
    let (p1, p2) = distill_pair(&state, &p, cfg.target).map_err(|e| CliError::runtime("distill", e))?;
    let mut rows = Vec::new();
    for o in [&p1, &p2] {
        rows.push(vec![
            o.branch.label().into(),
            o.probability.into(),
            branch_entropy(o.state.as_ref())?.into(),
            ghz_fidelity(o.state.as_ref())?.into(),
        ]);
    }
    let mut out = Produced::default();
    out.table(dir, "distill.csv", &["branch", "probability", "entropy", "bell_fidelity"], &rows)?;
    Ok(out)
}

/// `ghz.csv`: the `p1` branch for every register size.
pub fn ghz(cfg: &GhzConfig, dir: &Path) -> CliResult<Produced> {
    let (a, b) = params(cfg.phi, cfg.gamma)?.amplitudes();
    let mut rows = Vec::new();
    for n in cfg.n_min..=cfg.n_max {
        let (p1, _) = distill_ghz(n, a, b).map_err(|e| CliError::runtime(format!("ghz n = {n}"), e))?;
        rows.push(vec![n.into(), p1.probability.into(), ghz_fidelity(p1.state.as_ref())?.into()]);
    }
    let mut out = Produced::default();
    out.table(dir, "ghz.csv", &["n", "probability", "ghz_fidelity"], &rows)?;
    Ok(out)
}

/// `sweep.csv` (one row per cell), `locus.csv` (one row per S_in) and the
/// `delta_s.pgm` heatmap with rows along S_in and columns along phi.
pub fn sweep(cfg: &SweepConfig, seed: u64, dir: &Path) -> CliResult<Produced> {
    let spec = SweepSpec {
        phi_axis: cfg.phi_axis.values(),
        s_in_axis: cfg.s_in_axis.values(),
        sigma: cfg.sigma,
        size: cfg.size,
        seed,
        gamma: cfg.gamma,
    };
    let g = sweep_grid(&spec).map_err(|e| CliError::runtime("sweep", e))?;
    let mut cells = Vec::with_capacity(g.s_in_axis.len() * g.phi_axis.len());
    let mut locus = Vec::with_capacity(g.s_in_axis.len());
    for (r, &s_in) in g.s_in_axis.iter().enumerate() {
        for (c, &phi) in g.phi_axis.iter().enumerate() {
            cells.push(vec![
                s_in.into(),
                g.mean_alpha2[r].into(),
                phi.into(),
                g.delta_s[r][c].into(),
                g.delta_s_se[r][c].into(),
                g.survival[r][c].into(),
            ]);
        }
        let (best, se) = g.row_max(r);
        locus.push(vec![s_in.into(), g.mean_alpha2[r].into(), g.optimal_phi_locus[r].1.into(), best.into(), se.into()]);
    }
    let mut out = Produced::default();
    out.table(dir, "sweep.csv", &["s_in", "mean_alpha2", "phi", "delta_s", "delta_s_se", "survival"], &cells)?;
    out.table(dir, "locus.csv", &["s_in", "mean_alpha2", "phi_opt", "delta_s", "delta_s_se"], &locus)?;
    out.heatmap(dir, "delta_s.pgm", &g.delta_s)?;
    Ok(out)
}

fn summary_row(label: &str, phi: f64, gamma: f64, o: &EnsembleOutcome) -> Vec<Cell> {
    vec![
        label.into(),
        phi.into(),
        gamma.into(),
        o.size.into(),
        o.mean_s_in.into(),
        o.mean_s_out.into(),
        o.delta_s.into(),
        o.delta_s_se.into(),
        o.survival_fraction.into(),
    ]
}

/// `ensemble.csv` (one row per run), `histogram.csv` for the fixed-angle
/// run, and `calibration.csv` when calibrating. Fills in `phi`.
pub fn ensemble(cfg: &mut EnsembleConfig, seed: u64, dir: &Path) -> CliResult<Produced> {
    let mean = match (cfg.mean_alpha2, cfg.s_in) {
        (Some(m), _) => m,
        (None, Some(s)) => mean_alpha2_from_entropy(s).map_err(|e| CliError::runtime("s_in", e))?,
        (None, None) => return Err(CliError::schema("exactly one of `s_in` and `mean_alpha2` is required")),
    };
    let spec = match cfg.family {
        FamilyName::Gaussian => EnsembleSpec::gaussian(mean, cfg.sigma, cfg.size, seed),
        FamilyName::Delta => EnsembleSpec { seed, ..EnsembleSpec::delta(mean, cfg.size) },
    };
    let samples = sample_ensemble(&spec).map_err(|e| CliError::runtime("sampling", e))?;
    let phi = match cfg.phi {
        Some(phi) => phi,
        None => mean.clamp(0.0, 1.0).sqrt().acos(),
    };
    cfg.phi = Some(phi);
    let p = params(phi, cfg.gamma)?;
    let options = DistillOptions { survivors: cfg.survivors, bins: cfg.bins, seed };
    let fixed = distill_ensemble_with(&samples, &p, &options).map_err(|e| CliError::runtime("ensemble", e))?;

    let columns = ["run", "phi", "gamma", "size", "mean_s_in", "mean_s_out", "delta_s", "delta_s_se", "survival"];
    let mut rows = vec![summary_row("fixed", phi, cfg.gamma, &fixed)];
    let mut out = Produced::default();
    if let Some(fraction) = cfg.calibration_fraction {
        let (cal, o) = calibrate_and_distill(&samples, fraction, cfg.gamma, seed)
            .map_err(|e| CliError::runtime("calibration", e))?;
        rows.push(summary_row("calibrated", cal.params.phi, cal.params.gamma, &o));
        let cal_rows = vec![vec![cal.consumed.into(), cal.p0_hat.into(), cal.params.phi.into()]];
        out.table(dir, "calibration.csv", &["consumed", "p0_hat", "phi"], &cal_rows)?;
    }
    out.table(dir, "ensemble.csv", &columns, &rows)?;

    let h_in = &fixed.in_histogram;
    let h_out = &fixed.out_histogram;
    let hist: Vec<Vec<Cell>> =
        (0..h_in.bins()).map(|i| vec![h_in.bin_center(i).into(), h_in.mass[i].into(), h_out.mass[i].into()]).collect();
    out.table(dir, "histogram.csv", &["alpha2", "in_mass", "out_mass"], &hist)?;
    Ok(out)
}

fn kind_name(kind: ScenarioKind) -> String {
    serde_json::to_value(kind).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
}

/// Total density as a matrix with rows along y.
fn density_matrix(field: &SpinorField) -> Vec<Vec<f64>> {
    let g = field.grid();
    (0..g.ny)
        .map(|iy| {
            (0..g.nx)
                .map(|ix| {
                    let [d, u] = field.density(g.index(ix, iy));
                    d + u
                })
                .collect()
        })
        .collect()
}

/// `tdse.csv` (run summary), `regions.csv`, `stages.csv`, `norms.csv`, the
/// final `density.pgm` and optionally `snapshot.csv`. Fills in
/// `layout.trim` when calibrating.
pub fn tdse(cfg: &mut TdseConfig, dir: &Path) -> CliResult<Produced> {
    let state = params(cfg.phi, cfg.gamma)?;
    let options = RunOptions { dt: cfg.dt, record_every: cfg.record_every, keep_stage_fields: false };
    if cfg.calibrate_trim {
        cfg.layout.trim = calibrate_trim(&state, &cfg.physical, &cfg.layout, &options)
            .map_err(|e| CliError::runtime("trim calibration", e))?;
        cfg.calibrate_trim = false;
    }
    let sc = scenario(cfg.scenario, &state, &cfg.physical, &cfg.layout).map_err(|e| CliError::runtime("scenario", e))?;
    let (report, traj) = run_scenario(&sc, &options, |_, _| {}).map_err(|e| CliError::runtime("tdse", e))?;
    let grid = sc.initial.grid();

    let mut out = Produced::default();
    let columns = [
        "scenario", "nx", "ny", "dx", "final_time", "steps", "p1_probability", "fidelity", "leakage",
        "max_norm_drift", "trim", "required_b0",
    ];
    let summary = vec![vec![
        kind_name(report.kind).into(),
        grid.nx.into(),
        grid.ny.into(),
        grid.dx.into(),
        report.final_time.into(),
        report.steps.into(),
        report.p1_probability.into(),
        report.fidelity.into(),
        report.leakage.into(),
        report.max_norm_drift.into(),
        cfg.layout.trim.into(),
        sc.required_b0.into(),
    ]];
    out.table(dir, "tdse.csv", &columns, &summary)?;

    let regions: Vec<Vec<Cell>> =
        report.outputs.iter().map(|(label, p)| vec![label.as_str().into(), (*p).into()]).collect();
    out.table(dir, "regions.csv", &["region", "probability"], &regions)?;

    let stages: Vec<Vec<Cell>> = traj
        .stages
        .iter()
        .map(|s| vec![s.label.as_str().into(), s.t_end.into(), s.dt.into(), s.steps.into(), s.norm.into()])
        .collect();
    out.table(dir, "stages.csv", &["stage", "t_end", "dt", "steps", "norm"], &stages)?;

    let norms: Vec<Vec<Cell>> = traj.norms.iter().map(|n| vec![n.t.into(), n.stage.into(), n.norm.into()]).collect();
    out.table(dir, "norms.csv", &["t", "stage", "norm"], &norms)?;

    out.heatmap(dir, "density.pgm", &density_matrix(&traj.final_field))?;

    if cfg.snapshot {
        let snap = traj.final_field.snapshot();
        let rows: Vec<Vec<Cell>> = (0..grid.nx)
            .flat_map(|ix| (0..grid.ny).map(move |iy| (ix, iy)))
            .map(|(ix, iy)| {
                let s = snap[grid.index(ix, iy)];
                vec![grid.x(ix).into(), grid.y(iy).into(), s[0].into(), s[1].into(), s[2].into(), s[3].into()]
            })
            .collect();
        out.table(dir, "snapshot.csv", &["x", "y", "re_down", "im_down", "re_up", "im_up"], &rows)?;
    }
    Ok(out)
}

/// `mbqc.csv`: one row with the inputs and the counts.
pub fn mbqc(cfg: &MbqcConfig, dir: &Path) -> CliResult<Produced> {
    let est = mbqc_resource_estimate(cfg.n_logical, cfg.depth_k, cfg.lattice_l, cfg.alpha, cfg.prefactor)
        .map_err(|e| CliError::runtime("mbqc", e))?;
    let rows = vec![vec![
        cfg.n_logical.into(),
        cfg.depth_k.into(),
        cfg.lattice_l.into(),
        cfg.alpha.into(),
        cfg.prefactor.into(),
        est.ghz_count.into(),
        est.bell_count.into(),
        est.ensemble_size.into(),
    ]];
    let columns =
        ["n_logical", "depth_k", "lattice_l", "alpha", "prefactor", "ghz_count", "bell_count", "ensemble_size"];
    let mut out = Produced::default();
    out.table(dir, "mbqc.csv", &columns, &rows)?;
    Ok(out)
}
