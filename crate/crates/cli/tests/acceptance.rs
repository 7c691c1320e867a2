//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64 as C64;
use procrustean::ensemble::{
    distill_ensemble_with, sample_ensemble, stream_rng, sweep_grid, DistillOptions,
    EnsembleSpec, SurvivorMode, SweepSpec,
};
use procrustean::povm::{
    completeness, config_from_params, distill_ghz, distill_pair, ghz_state, mbqc_resource_estimate, params_from_state,
    DistillParams,
};
use procrustean::qubit::{entropy_of_entanglement, fidelity, spinor_fidelity, PureState, QubitOperator};
use procrustean::tdse::{
    conditional_spin_state, init_gaussian, potential_term, run_scenario, run_script, run_script_with, scenario,
    DtPolicy, Envelope, Grid2D, PauliAxis, PhysicalParams, RunOptions, ScenarioConfig, ScenarioKind, ScenarioReport,
    Stage, StageScript, TermSpec,
};
use rand::Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

/// Runs `check` and prints its line. A panic counts as a failure.
fn criterion(id: &str, name: &str, budget: Option<Duration>, check: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(check));
    let elapsed = start.elapsed();
    let (mut pass, mut detail) = match result {
        Ok(v) => (v.pass, v.detail),
        Err(e) => {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            (false, format!("panicked: {}", msg.unwrap_or_default()))
        }
    };
    if let Some(limit) = budget {
        if elapsed > limit {
            pass = false;
            detail.push_str(&format!("; over the {:.0} s budget", limit.as_secs_f64()));
        }
    }
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("{tag} [{id:>2}] {name}: {detail} ({:.2} s)", elapsed.as_secs_f64());
    pass
}

fn weak_pair() -> DistillParams {
    DistillParams { phi: PI / 6.0, gamma: FRAC_PI_2 }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn completeness_check() -> Verdict {
    let mut rng = stream_rng(1, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let p = DistillParams { phi: rng.random_range(-PI..PI), gamma: rng.random_range(-PI..PI) };
        worst = worst.max(completeness(&config_from_params(&p)).max_abs_diff(&QubitOperator::identity()));
    }
    verdict(worst < 1e-12, format!("max |M1'M1 + M2'M2 - I| = {worst:.2e} over 1000 configs"))
}

fn matched_pair_check() -> Verdict {
    let (a, b) = weak_pair().amplitudes();
    let state = PureState::schmidt_pair(a, b).unwrap();
    let params = params_from_state(a, b).unwrap();
    let (p1, _) = distill_pair(&state, &params, 0).unwrap();
    let analytic = 1.0 - (2.0 * params.phi).cos().abs();
    let s = entropy_of_entanglement(p1.state.as_ref().unwrap(), &[0]).unwrap();
    let pass = (p1.probability - 0.5).abs() < 1e-12 && (analytic - 0.5).abs() < 1e-12 && (s - 1.0).abs() < 1e-9;
    verdict(pass, format!("p1 = {:.15}, 1 - |cos 2phi| = {analytic:.15}, S_out = {s:.12}", p1.probability))
}

fn ghz_check() -> Verdict {
    let (a, b) = weak_pair().amplitudes();
    let mut probs = Vec::new();
    let mut worst_f: f64 = 0.0;
    for n in 2..=8 {
        let (p1, _) = distill_ghz(n, a, b).unwrap();
        let f = fidelity(p1.state.as_ref().unwrap(), &ghz_state(n).unwrap()).unwrap();
        worst_f = worst_f.max((1.0 - f).abs());
        probs.push(p1.probability);
    }
    let spread = probs.iter().map(|p| (p - probs[0]).abs()).fold(0.0, f64::max);
    verdict(spread < 1e-12 && worst_f < 1e-9, format!("p1 spread {spread:.2e}, max |1 - F| {worst_f:.2e} for n = 2..8"))
}

fn sweep_check() -> Verdict {
    let phi_axis = linspace(0.0, FRAC_PI_4, 30);
    let step = phi_axis[1] - phi_axis[0];
    let spec =
        SweepSpec { phi_axis: phi_axis.clone(), s_in_axis: linspace(0.1, 0.98, 30), sigma: 0.01, size: 10_000, seed: 4, gamma: 0.0 };
    let g = sweep_grid(&spec).unwrap();
    let rows = g.s_in_axis.len();

    // (i) the optimum never loses entropy
    let min_best = (0..rows).map(|r| g.row_max(r).0).fold(f64::INFINITY, f64::min);
    let ok_i = min_best >= -1e-3;

    // (ii) row maxima fall with S_in; a rise counts only beyond one
    // standard error of the difference
    let mut violations = 0;
    for r in 0..rows - 1 {
        let (m0, s0) = g.row_max(r);
        let (m1, s1) = g.row_max(r + 1);
        if m1 - m0 >= s0.hypot(s1) {
            violations += 1;
        }
    }
    let ok_ii = violations == 0;

    // (iii) near-delta rows peak at arccos √mean
    let delta = sweep_grid(&SweepSpec { sigma: 1e-6, seed: 5, ..spec.clone() }).unwrap();
    let worst_iii = (0..rows)
        .map(|r| (delta.optimal_phi_locus[r].1 - delta.mean_alpha2[r].sqrt().acos()).abs())
        .fold(0.0, f64::max);
    let ok_iii = worst_iii <= step * (1.0 + 1e-9);

    verdict(
        ok_i && ok_ii && ok_iii,
        format!(
            "(i) min optimum dS = {min_best:.3e}; (ii) {violations} rising rows of {}; (iii) max |phi* - arccos sqrt(mean)| = {worst_iii:.4} vs step {step:.4}",
            rows - 1
        ),
    )
}

fn histogram_check() -> Verdict {
    let samples = sample_ensemble(&EnsembleSpec::gaussian(0.8, 0.05, 10_000, 6)).unwrap();
    let params = DistillParams { phi: 0.8f64.sqrt().acos(), gamma: 0.0 };
    let mut worst: f64 = 0.0;
    for survivors in [SurvivorMode::Weighted, SurvivorMode::CoinFlip] {
        let o = distill_ensemble_with(&samples, &params, &DistillOptions { survivors, bins: 200, seed: 6 }).unwrap();
        worst = worst.max((o.out_histogram.total() - o.survival_fraction).abs());
        worst = worst.max((o.in_histogram.total() - 1.0).abs());
    }
    verdict(worst < 1e-12, format!("max |mass - survival| = {worst:.2e} (weighted and coin-flip)"))
}

struct Trapped {
    report: ScenarioReport,
    shape: [usize; 2],
}

fn trapped_run() -> Trapped {
    let sc = scenario(ScenarioKind::TrappedPovm, &weak_pair(), &PhysicalParams::default(), &ScenarioConfig::default())
        .unwrap();
    let g = sc.initial.grid();
    let opts = RunOptions { record_every: Some(100), ..Default::default() };
    Trapped { report: run_scenario(&sc, &opts, |_, _| {}).unwrap().0, shape: [g.nx, g.ny] }
}

fn one_stage(duration: f64, terms: Vec<TermSpec>) -> StageScript {
    let p = PhysicalParams::default();
    let terms = terms.iter().map(|t| potential_term(t, &p).unwrap()).collect();
    StageScript { stages: vec![Stage { label: "run".into(), duration, terms }], regions: vec![] }
}

const DOWN: [C64; 2] = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];

fn dispersion() -> (bool, String) {
    // σ(t) = σ₀√(1 + (ħt/2mσ₀²)²) = √2 at t = 2 for σ₀ = 1
    let g = Grid2D::covering([-9.0, 9.0], [-9.0, 9.0], 0.1).unwrap();
    let f = init_gaussian(g, [0.0, 0.0], 1.0, [0.0, 0.0], DOWN).unwrap();
    let traj = run_script(&f, &one_stage(2.0, vec![]), &PhysicalParams::default(), &RunOptions::default()).unwrap();
    let w = traj.final_field.moments().width;
    let err = w.iter().map(|w| (w / 2f64.sqrt() - 1.0).abs()).fold(0.0, f64::max);
    (err < 0.01, format!("(b) width error {:.2}%", 100.0 * err))
}

fn coherent_orbit() -> (bool, String) {
    // ⟨y⟩(t) = d·cos ωt; lattice dispersion needs dx = 0.05 for 1% of d
    let d = 1.0;
    let p = PhysicalParams::default();
    let g = Grid2D::covering([-3.6, 3.6], [-4.8, 4.8], 0.05).unwrap();
    let f = init_gaussian(g, [0.0, d], p.ground_width(), [0.0, 0.0], DOWN).unwrap();
    let opts = RunOptions { dt: DtPolicy::Fraction(1.0), record_every: Some(100), ..Default::default() };
    let trap = TermSpec::HarmonicTrap { centers: vec![[0.0, 0.0]] };
    let mut worst: f64 = 0.0;
    run_script_with(&f, &one_stage(4.0 * PI, vec![trap]), &p, &opts, |field, _| {
        worst = worst.max((field.moments().center[1] - d * field.time().cos()).abs());
    })
    .unwrap();
    (worst < 0.01 * d, format!("(c) max |<y> - d cos t| = {:.2}% of d", 100.0 * worst / d))
}

/// `exp(iAσ_k)·s`.
fn rotate(axis: PauliAxis, area: f64, s: [C64; 2]) -> [C64; 2] {
    let i = C64::new(0.0, 1.0);
    let sigma = match axis {
        PauliAxis::X => [s[1], s[0]],
        PauliAxis::Y => [-i * s[1], i * s[0]],
        PauliAxis::Z => [s[0], -s[1]],
    };
    let (sn, cs) = area.sin_cos();
    [s[0] * cs + i * sn * sigma[0], s[1] * cs + i * sn * sigma[1]]
}

fn zeeman_pulses() -> (bool, String) {
    let p = PhysicalParams::default();
    let g = Grid2D::covering([-4.0, 4.0], [-4.0, 4.0], 0.1).unwrap();
    let h = FRAC_1_SQRT_2;
    let cases = [
        (PauliAxis::X, FRAC_PI_2, Envelope::TopHat, DOWN),
        (PauliAxis::Y, PI / 3.0, Envelope::SinSquared, DOWN),
        (PauliAxis::Z, 1.1, Envelope::TopHat, [C64::new(h, 0.0), C64::new(h, 0.0)]),
        (PauliAxis::X, -0.7, Envelope::SinSquared, [C64::new(0.6, 0.0), C64::new(0.0, 0.8)]),
    ];
    let mut worst: f64 = 1.0;
    for (axis, area, envelope, spinor) in cases {
        let f = init_gaussian(g, [0.0, 0.0], p.ground_width(), [0.0, 0.0], spinor).unwrap();
        let terms = vec![
            TermSpec::HarmonicTrap { centers: vec![[0.0, 0.0]] },
            TermSpec::ZeemanPulse { axis, area, start: 0.0, duration: 0.5, envelope, region: None },
        ];
        let traj = run_script(&f, &one_stage(0.5, terms), &p, &RunOptions::default()).unwrap();
        let out = conditional_spin_state(&traj.final_field, &g.bounds()).unwrap();
        worst = worst.min(spinor_fidelity(out, rotate(axis, area, spinor)));
    }
    (worst >= 0.999, format!("(d) min pulse fidelity {worst:.6}"))
}

fn ladder_check(trapped: Option<&ScenarioReport>) -> Verdict {
    let (ok_a, a) = match trapped {
        Some(r) => (r.max_norm_drift < 1e-6, format!("(a) norm drift {:.2e}", r.max_norm_drift)),
        None => (false, "(a) trapped run unavailable".into()),
    };
    let parts = [(ok_a, a), dispersion(), coherent_orbit(), zeeman_pulses()];
    let pass = parts.iter().all(|p| p.0);
    verdict(pass, parts.into_iter().map(|p| p.1).collect::<Vec<_>>().join("; "))
}

fn trapped_check(trapped: Option<&Trapped>) -> Verdict {
    let Some(Trapped { report: r, shape: [nx, ny] }) = trapped else {
        return verdict(false, "trapped run failed".into());
    };
    let f = r.fidelity.unwrap_or(0.0);
    let pass = f >= 0.995 && (r.p1_probability - 0.5).abs() <= 0.01 && *nx <= 512 && *ny <= 512;
    verdict(pass, format!("fidelity {f:.6}, p1 = {:.5} on a {nx}x{ny} grid", r.p1_probability))
}

fn mzi_check(trapped: Option<&ScenarioReport>) -> Verdict {
    let Some(t) = trapped else { return verdict(false, "trapped run failed".into()) };
    let sc =
        scenario(ScenarioKind::FreeMzi, &weak_pair(), &PhysicalParams::default(), &ScenarioConfig::default()).unwrap();
    let opts = RunOptions { record_every: Some(500), ..Default::default() };
    let free = run_scenario(&sc, &opts, |_, _| {}).unwrap().0;
    let ratio = free.leakage / t.leakage.max(f64::MIN_POSITIVE);
    verdict(
        free.leakage >= 5.0 * t.leakage,
        format!("leakage free {:.4} vs trapped {:.2e} (ratio {ratio:.0})", free.leakage, t.leakage),
    )
}

fn mbqc_check() -> Verdict {
    let mut worst_l: i64 = 0;
    let mut worst_a: i64 = 0;
    for (n, k, l, prefactor) in [(1, 1, 1, 1.0), (3, 2, 2, 1.0), (2, 5, 3, 0.37), (4, 1, 7, 2.5)] {
        for alpha in [FRAC_1_SQRT_2, 0.5, 0.3, 0.1] {
            let base = mbqc_resource_estimate(n, k, l, alpha, prefactor).unwrap();
            let big = mbqc_resource_estimate(n, k, 2 * l, alpha, prefactor).unwrap();
            let thin = mbqc_resource_estimate(n, k, l, alpha / 2.0, prefactor).unwrap();
            if prefactor == 1.0 {
                worst_l = worst_l.max((big.ghz_count as i64 - 8 * base.ghz_count as i64).abs());
            }
            // each ceiling moves its count by less than one
            worst_a = worst_a.max((thin.ensemble_size as i64 - 4 * base.ensemble_size as i64).abs() - 3);
        }
    }
    verdict(
        worst_l == 0 && worst_a <= 0,
        format!("L -> 2L: max |ghz' - 8 ghz| = {worst_l}; alpha -> alpha/2: rounding excess {}", worst_a.max(0)),
    )
}

fn run_cli(config: &Path, out: &Path) {
    let status = Command::new(env!("CARGO_BIN_EXE_pdistill"))
        .args(["sweep", "--config"])
        .arg(config)
        .args(["--seed", "2718", "--out"])
        .arg(out)
        .status()
        .unwrap();
    assert!(status.success(), "pdistill sweep exited with {status}");
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn reproducibility_check() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("sweep.json");
    let doc = r#"{ "angle_unit": "deg", "parameters": {
        "phi_axis": { "start": 0, "stop": 45, "count": 12 },
        "s_in_axis": { "start": 0.1, "stop": 0.95, "count": 10 },
        "sigma": 0.01, "size": 5000 } }"#;
    fs::write(&config, doc).unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_cli(&config, &a);
    run_cli(&config, &b);
    let (fa, fb) = (csv_files(&a), csv_files(&b));
    let bytes: usize = fa.iter().map(|f| f.1.len()).sum();
    let meta_same = fs::read(a.join("metadata.json")).unwrap() == fs::read(b.join("metadata.json")).unwrap();
    verdict(
        !fa.is_empty() && fa == fb && meta_same,
        format!("{} CSV files, {bytes} bytes, identical across two runs: {}", fa.len(), fa == fb),
    )
}

fn main() {
    let mut results = Vec::new();
    results.push(criterion("1", "POVM completeness", Some(Duration::from_secs(1)), completeness_check));
    results.push(criterion("2", "matched single-pair distillation", Some(Duration::from_secs(1)), matched_pair_check));
    results.push(criterion("3", "GHZ invariance", None, ghz_check));
    results.push(criterion("4", "30x30 sweep reproduction", Some(Duration::from_secs(300)), sweep_check));
    results.push(criterion("5", "survivor histogram mass", None, histogram_check));

    let start = Instant::now();
    let trapped = catch_unwind(trapped_run).ok();
    let report = trapped.as_ref().map(|t| &t.report);
    let trapped_time = start.elapsed();
    results.push(criterion("7", "trapped POVM scenario", Some(Duration::from_secs(600).saturating_sub(trapped_time)), || {
        trapped_check(trapped.as_ref())
    }));
    println!("       trapped scenario run took {:.2} s", trapped_time.as_secs_f64());
    results.push(criterion("6", "TDSE verification ladder", None, || ladder_check(report)));
    results.push(criterion("8", "dispersive MZI contrast", None, || mzi_check(report)));
    results.push(criterion("9", "MBQC scaling ratios", None, mbqc_check));
    results.push(criterion("10", "sweep CSV reproducibility", None, reproducibility_check));

    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
