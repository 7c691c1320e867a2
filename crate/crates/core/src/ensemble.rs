//! Monte-Carlo ensembles of weakly entangled pairs pushed through a single
//! POVM setting, and grid sweeps over setting and initial mean entropy.
//!
//! Randomness comes from ChaCha20 with position-based streams so that
//! parallel evaluation reproduces sequential evaluation exactly:
//!
//! | stream          | consumer                        |
//! |-----------------|---------------------------------|
//! | `0`             | [`sample_ensemble`]             |
//! | `r + 1`         | row `r` of [`sweep_grid`]       |
//! | `u64::MAX - 1`  | coin-flip survivor decisions    |
//! | `u64::MAX`      | calibration measurements        |

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::povm::{config_from_params, kraus_operators, DistillParams};
use crate::qubit::{binary_entropy, QubitOperator};

/// Generator identification written to output metadata.
pub const RNG_ALGORITHM: &str = "ChaCha20 (rand_chacha 0.9)";

/// Normal sampler identification written to output metadata.
pub const NORMAL_SAMPLER: &str = "rand_distr 0.5 Normal (ziggurat), truncated to [0,1] by rejection";

pub const DEFAULT_BINS: usize = 200;

const COIN_FLIP_STREAM: u64 = u64::MAX - 1;
const CALIBRATION_STREAM: u64 = u64::MAX;

/// Rejection attempts allowed per accepted gaussian sample.
const MAX_REJECTIONS: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnsembleError {
    #[error("mean |α|² must lie in [0, 1] (got {0})")]
    MeanOutOfRange(f64),
    #[error("sigma must be finite and non-negative (got {0})")]
    InvalidSigma(f64),
    #[error("ensemble size must be at least 1")]
    EmptyEnsemble,
    #[error("sample {index} = {value} lies outside [0, 1]")]
    SampleOutOfRange { index: usize, value: f64 },
    #[error("target entropy must lie in [0, 1] bits (got {0})")]
    EntropyOutOfRange(f64),
    #[error("invalid axis `{axis}`: {reason}")]
    InvalidAxis { axis: &'static str, reason: String },
    #[error("histogram needs at least one bin")]
    NoBins,
    #[error("calibration fraction must lie strictly between 0 and 1 (got {0})")]
    FractionOutOfRange(f64),
    #[error("calibration consumes {consumed} of {total} pairs, leaving nothing on one side")]
    CalibrationSplit { consumed: usize, total: usize },
    #[error("truncated gaussian rejected {0} consecutive draws")]
    RejectionStalled(usize),
}

pub type EnsembleResult<T> = Result<T, EnsembleError>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleFamily {
    GaussianAlpha2,
    Delta,
    CustomSamples(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub family: EnsembleFamily,
    pub mean_alpha2: f64,
    pub sigma: f64,
    pub size: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn gaussian(mean_alpha2: f64, sigma: f64, size: usize, seed: u64) -> Self {
        Self { family: EnsembleFamily::GaussianAlpha2, mean_alpha2, sigma, size, seed }
    }

    pub fn delta(mean_alpha2: f64, size: usize) -> Self {
        Self { family: EnsembleFamily::Delta, mean_alpha2, sigma: 0.0, size, seed: 0 }
    }
}

/// A ChaCha20 generator positioned on `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn validate_samples(samples: &[f64]) -> EnsembleResult<()> {
    if samples.is_empty() {
        return Err(EnsembleError::EmptyEnsemble);
    }
    match samples.iter().position(|s| !(0.0..=1.0).contains(s)) {
        Some(index) => Err(EnsembleError::SampleOutOfRange { index, value: samples[index] }),
        None => Ok(()),
    }
}

/// Draws the `|α|²` samples of `spec` from stream 0 of its seed.
pub fn sample_ensemble(spec: &EnsembleSpec) -> EnsembleResult<Vec<f64>> {
    sample_from_rng(spec, &mut stream_rng(spec.seed, 0))
}

/// Draws `spec` from an explicit generator; [`sample_ensemble`] uses stream 0.
pub fn sample_from_rng<R: Rng>(spec: &EnsembleSpec, rng: &mut R) -> EnsembleResult<Vec<f64>> {
    if let EnsembleFamily::CustomSamples(samples) = &spec.family {
        validate_samples(samples)?;
        return Ok(samples.clone());
    }
    if spec.size == 0 {
        return Err(EnsembleError::EmptyEnsemble);
    }
    if !(0.0..=1.0).contains(&spec.mean_alpha2) {
        return Err(EnsembleError::MeanOutOfRange(spec.mean_alpha2));
    }
    if !spec.sigma.is_finite() || spec.sigma < 0.0 {
        return Err(EnsembleError::InvalidSigma(spec.sigma));
    }
    if spec.family == EnsembleFamily::Delta || spec.sigma == 0.0 {
        return Ok(vec![spec.mean_alpha2; spec.size]);
    }
    let normal = Normal::new(spec.mean_alpha2, spec.sigma).map_err(|_| EnsembleError::InvalidSigma(spec.sigma))?;
    let mut out = Vec::with_capacity(spec.size);
    while out.len() < spec.size {
        let mut tries = 0;
        let x = loop {
            let x = normal.sample(rng);
            if (0.0..=1.0).contains(&x) {
                break x;
            }
            tries += 1;
            if tries >= MAX_REJECTIONS {
                return Err(EnsembleError::RejectionStalled(tries));
            }
        };
        out.push(x);
    }
    Ok(out)
}

/// Inverts the binary entropy on the branch `|α|² ∈ [0.5, 1]`.
pub fn mean_alpha2_from_entropy(s_target: f64) -> EnsembleResult<f64> {
    if !(0.0..=1.0).contains(&s_target) {
        return Err(EnsembleError::EntropyOutOfRange(s_target));
    }
    if s_target == 1.0 {
        return Ok(0.5);
    }
    if s_target == 0.0 {
        return Ok(1.0);
    }
    // H is strictly decreasing on [0.5, 1].
    let (mut lo, mut hi) = (0.5_f64, 1.0_f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if binary_entropy(mid) > s_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Fixed-width histogram over `[0, 1]` storing the mass per bin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub mass: Vec<f64>,
}

impl Histogram {
    pub fn new(bins: usize) -> EnsembleResult<Self> {
        if bins == 0 {
            return Err(EnsembleError::NoBins);
        }
        Ok(Self { mass: vec![0.0; bins] })
    }

    pub fn bins(&self) -> usize {
        self.mass.len()
    }

    pub fn bin_width(&self) -> f64 {
        1.0 / self.mass.len() as f64
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.bin_width()
    }

    /// Bin index of `x ∈ [0, 1]`; `x = 1` falls in the last bin.
    pub fn index_of(&self, x: f64) -> usize {
        ((x * self.mass.len() as f64) as usize).min(self.mass.len() - 1)
    }

    pub fn add(&mut self, x: f64, weight: f64) {
        let i = self.index_of(x);
        self.mass[i] += weight;
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Mass per unit `|α|²`.
    pub fn density(&self) -> Vec<f64> {
        let w = self.bin_width();
        self.mass.iter().map(|m| m / w).collect()
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurvivorMode {
    /// Every pair survives with weight `P₁`.
    Weighted,
    /// Every pair survives with probability `P₁` and weight 1.
    CoinFlip,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistillOptions {
    pub survivors: SurvivorMode,
    pub bins: usize,
    /// Seed for coin-flip survivor decisions.
    pub seed: u64,
}

impl Default for DistillOptions {
    fn default() -> Self {
        Self { survivors: SurvivorMode::Weighted, bins: DEFAULT_BINS, seed: 0 }
    }
}

/// Ensemble statistics before and after one pass of the POVM.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleOutcome {
    pub size: usize,
    pub mean_s_in: f64,
    /// Survivor-weighted mean output entropy; 0 when nothing survives.
    pub mean_s_out: f64,
    pub delta_s: f64,
    /// Delta-method standard error of `delta_s` over the sampled pairs.
    pub delta_s_se: f64,
    pub survival_fraction: f64,
    /// Input `|α|²`, total mass 1.
    pub in_histogram: Histogram,
    /// Output `|α|²` of survivors, total mass `survival_fraction`.
    pub out_histogram: Histogram,
}

/// `(P₁, output |α|²)` for the pair `√a|00⟩ + e^{iγ}√(1-a)|11⟩` under `m1`.
pub fn pair_success(alpha2: f64, gamma: f64, m1: &QubitOperator) -> (f64, f64) {
    let spinor = [C64::new(alpha2.sqrt(), 0.0), C64::from_polar((1.0 - alpha2).max(0.0).sqrt(), gamma)];
    let [a, b] = m1.apply(spinor);
    let (wa, wb) = (a.norm_sqr(), b.norm_sqr());
    let p = wa + wb;
    if p == 0.0 {
        (0.0, alpha2)
    } else {
        (p, wa / p)
    }
}

/// Pushes every pair of `samples` through the POVM for `params` with
/// probability-weighted survivors.
pub fn distill_ensemble(samples: &[f64], params: &DistillParams) -> EnsembleResult<EnsembleOutcome> {
    distill_ensemble_with(samples, params, &DistillOptions::default())
}

pub fn distill_ensemble_with(
    samples: &[f64],
    params: &DistillParams,
    options: &DistillOptions,
) -> EnsembleResult<EnsembleOutcome> {
    validate_samples(samples)?;
    let (m1, _) = kraus_operators(&config_from_params(params));
    let mut in_hist = Histogram::new(options.bins)?;
    let mut out_hist = Histogram::new(options.bins)?;
    let n = samples.len();
    let inv_n = 1.0 / n as f64;
    let mut coin = match options.survivors {
        SurvivorMode::Weighted => None,
        SurvivorMode::CoinFlip => Some(stream_rng(options.seed, COIN_FLIP_STREAM)),
    };

    // (weight, S_out, S_in) per pair; weight is P₁ or a 0/1 coin.
    let mut rows = Vec::with_capacity(n);
    for &a2 in samples {
        let (p, out_a2) = pair_success(a2, params.gamma, &m1);
        let w = match coin.as_mut() {
            None => p,
            Some(rng) => f64::from(u8::from(rng.random::<f64>() < p)),
        };
        let s_in = binary_entropy(a2);
        let s_out = binary_entropy(out_a2);
        in_hist.add(a2, inv_n);
        if w > 0.0 {
            out_hist.add(out_a2, w * inv_n);
        }
        rows.push((w, s_out, s_in));
    }

    let mean_s_in = rows.iter().map(|r| r.2).sum::<f64>() * inv_n;
    let survival = rows.iter().map(|r| r.0).sum::<f64>() * inv_n;
    let mean_s_out =
        if survival > 0.0 { rows.iter().map(|r| r.0 * r.1).sum::<f64>() * inv_n / survival } else { 0.0 };
    let delta_s = mean_s_out - mean_s_in;

    let delta_s_se = if n < 2 {
        0.0
    } else {
        let infl: Vec<f64> = rows
            .iter()
            .map(|&(w, so, si)| {
                let ratio = if survival > 0.0 { w * (so - mean_s_out) / survival } else { 0.0 };
                ratio - (si - mean_s_in)
            })
            .collect();
        let mean = infl.iter().sum::<f64>() * inv_n;
        let var = infl.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var * inv_n).sqrt()
    };

    Ok(EnsembleOutcome {
        size: n,
        mean_s_in,
        mean_s_out,
        delta_s,
        delta_s_se,
        survival_fraction: survival,
        in_histogram: in_hist,
        out_histogram: out_hist,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub phi_axis: Vec<f64>,
    pub s_in_axis: Vec<f64>,
    pub sigma: f64,
    pub size: usize,
    pub seed: u64,
    pub gamma: f64,
}

/// `ΔS̄` over `(S̄_in, φ)`; rows follow `s_in_axis`, columns `phi_axis`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub phi_axis: Vec<f64>,
    pub s_in_axis: Vec<f64>,
    pub mean_alpha2: Vec<f64>,
    pub delta_s: Vec<Vec<f64>>,
    pub delta_s_se: Vec<Vec<f64>>,
    pub survival: Vec<Vec<f64>>,
    /// `(S̄_in, φ*)` per row, `φ*` the first column attaining the row maximum.
    pub optimal_phi_locus: Vec<(f64, f64)>,
    pub optimal_index: Vec<usize>,
}

impl SweepGrid {
    /// `ΔS̄` and its standard error at the optimum of row `r`.
    pub fn row_max(&self, r: usize) -> (f64, f64) {
        let c = self.optimal_index[r];
        (self.delta_s[r][c], self.delta_s_se[r][c])
    }
}

fn check_axis(name: &'static str, axis: &[f64], lo: f64, hi: f64) -> EnsembleResult<()> {
    let bad = |reason: String| Err(EnsembleError::InvalidAxis { axis: name, reason });
    if axis.is_empty() {
        return bad("empty".into());
    }
    if let Some(x) = axis.iter().find(|x| !(lo..=hi).contains(*x)) {
        return bad(format!("value {x} outside [{lo}, {hi}]"));
    }
    if axis.windows(2).any(|w| w[1] <= w[0]) {
        return bad("not strictly increasing".into());
    }
    Ok(())
}

/// Runs the sweep. Row `r` draws its samples from stream `r + 1` and shares
/// them across every `φ` column.
pub fn sweep_grid(spec: &SweepSpec) -> EnsembleResult<SweepGrid> {
    check_axis("phi_axis", &spec.phi_axis, 0.0, std::f64::consts::FRAC_PI_2)?;
    check_axis("s_in_axis", &spec.s_in_axis, 0.0, 1.0)?;
    if !spec.sigma.is_finite() || spec.sigma < 0.0 {
        return Err(EnsembleError::InvalidSigma(spec.sigma));
    }
    if spec.size == 0 {
        return Err(EnsembleError::EmptyEnsemble);
    }

    let rows: Vec<(f64, Vec<EnsembleOutcome>)> = spec
        .s_in_axis
        .par_iter()
        .enumerate()
        .map(|(r, &s_in)| -> EnsembleResult<_> {
            let mean = mean_alpha2_from_entropy(s_in)?;
            let ens = EnsembleSpec::gaussian(mean, spec.sigma, spec.size, spec.seed);
            let samples = sample_from_rng(&ens, &mut stream_rng(spec.seed, r as u64 + 1))?;
            let cells = spec
                .phi_axis
                .iter()
                .map(|&phi| distill_ensemble(&samples, &DistillParams { phi, gamma: spec.gamma }))
                .collect::<EnsembleResult<Vec<_>>>()?;
            Ok((mean, cells))
        })
        .collect::<EnsembleResult<_>>()?;

    let mut grid = SweepGrid {
        phi_axis: spec.phi_axis.clone(),
        s_in_axis: spec.s_in_axis.clone(),
        mean_alpha2: Vec::with_capacity(rows.len()),
        delta_s: Vec::with_capacity(rows.len()),
        delta_s_se: Vec::with_capacity(rows.len()),
        survival: Vec::with_capacity(rows.len()),
        optimal_phi_locus: Vec::with_capacity(rows.len()),
        optimal_index: Vec::with_capacity(rows.len()),
    };
    for (r, (mean, cells)) in rows.into_iter().enumerate() {
        let ds: Vec<f64> = cells.iter().map(|c| c.delta_s).collect();
        let best = ds.iter().enumerate().fold(0, |b, (i, &v)| if v > ds[b] { i } else { b });
        grid.optimal_phi_locus.push((spec.s_in_axis[r], spec.phi_axis[best]));
        grid.optimal_index.push(best);
        grid.mean_alpha2.push(mean);
        grid.delta_s_se.push(cells.iter().map(|c| c.delta_s_se).collect());
        grid.survival.push(cells.iter().map(|c| c.survival_fraction).collect());
        grid.delta_s.push(ds);
    }
    Ok(grid)
}

/// Calibration result: the consumed subset and the estimate it produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub consumed: usize,
    pub p0_hat: f64,
    pub params: DistillParams,
}

/// Measures the first `⌈fraction·N⌉` pairs in the computational basis,
/// sets `φ* = arccos √p̂₀`, and distills the remaining pairs with `φ*`.
pub fn calibrate_and_distill(
    samples: &[f64],
    subset_fraction: f64,
    gamma: f64,
    seed: u64,
) -> EnsembleResult<(Calibration, EnsembleOutcome)> {
    validate_samples(samples)?;
    if !(subset_fraction > 0.0 && subset_fraction < 1.0) {
        return Err(EnsembleError::FractionOutOfRange(subset_fraction));
    }
    let total = samples.len();
    let consumed = (subset_fraction * total as f64).ceil() as usize;
    if consumed == 0 || consumed >= total {
        return Err(EnsembleError::CalibrationSplit { consumed, total });
    }
    let (subset, rest) = samples.split_at(consumed);
    let mut rng = stream_rng(seed, CALIBRATION_STREAM);
    let zeros = subset.iter().filter(|&&a2| rng.random::<f64>() < a2).count();
    let p0_hat = zeros as f64 / consumed as f64;
    let params = DistillParams { phi: p0_hat.sqrt().acos(), gamma };
    let outcome = distill_ensemble(rest, &params)?;
    Ok((Calibration { consumed, p0_hat, params }, outcome))
}
