//! Staggered leapfrog for `iħ∂ψ/∂t = Hψ` with a two-component spinor.
//!
//! With `ψ = u + iv` and `H = A + iB` (`A` real symmetric, `B` real
//! antisymmetric) the update over one step `τ` is
//!
//! ```text
//! (I - cB) u(t+τ)    = (I + cB) u(t)    + (τ/ħ) A v(t+τ/2)
//! (I - cB) v(t+3τ/2) = (I + cB) v(t+τ/2) - (τ/ħ) A u(t+τ)
//! ```
//!
//! with `c = τ/2ħ`. `A` holds the kinetic stencil, the scalar potential and
//! `Re V_(i,j)`; `B` holds `Im V_(i,j)` and couples spins pointwise, so each
//! solve is a local 2×2 Cayley step. For `B = 0` this is the explicit
//! real/imaginary leapfrog.

use rayon::prelude::*;

use super::field::SpinorField;
use super::grid::Grid2D;
use super::potential::{PhysicalParams, PotentialSample, PotentialTerm, TimeDependence};
use super::{TdseError, TdseResult};

/// `Δt_max = SAFETY·ħ/E_max`.
pub const SAFETY: f64 = 0.5;

/// Local Hamiltonian `[A₀₀, A₁₁, A₀₁, B₀₁]` without the kinetic part.
type Local = [f64; 4];

fn local(s: &PotentialSample) -> Local {
    [s.scalar + s.spin.d0, s.scalar + s.spin.d1, s.spin.off.re, s.spin.off.im]
}

/// `(|V̄|, ‖W‖)` of a local block split into scalar and traceless parts.
fn magnitudes(a: &Local) -> (f64, f64) {
    let mean = 0.5 * (a[0] + a[1]);
    let half = 0.5 * (a[0] - a[1]);
    (mean.abs(), (half * half + a[2] * a[2] + a[3] * a[3]).sqrt())
}

/// Sampled potentials of one stage. Static terms are summed once; separable
/// terms keep a sparse unit profile scaled by their envelope.
pub struct PotentialCache {
    grid: Grid2D,
    terms: Vec<PotentialTerm>,
    base: Vec<Local>,
    separable: Vec<(usize, Vec<(usize, Local)>)>,
    dynamic: Vec<usize>,
    current: Vec<Local>,
    key: Option<Vec<f64>>,
}

impl PotentialCache {
    pub fn new(grid: Grid2D, terms: &[PotentialTerm]) -> TdseResult<Self> {
        let n = grid.len();
        let mut base = vec![[0.0; 4]; n];
        let mut separable = Vec::new();
        let mut dynamic = Vec::new();
        for (k, term) in terms.iter().enumerate() {
            match term.time_dependence() {
                TimeDependence::Static => {
                    for_each_point(&grid, |p, x, y| {
                        let a = local(&term.sample(x, y, 0.0));
                        for i in 0..4 {
                            base[p][i] += a[i];
                        }
                    });
                }
                TimeDependence::Separable => {
                    let mut profile = Vec::new();
                    for_each_point(&grid, |p, x, y| {
                        let a = local(&term.sample_profile(x, y));
                        if a.iter().any(|v| *v != 0.0) {
                            profile.push((p, a));
                        }
                    });
                    separable.push((k, profile));
                }
                TimeDependence::Dynamic => dynamic.push(k),
            }
        }
        let check = |a: &Local| a.iter().all(|v| v.is_finite());
        if !base.iter().all(check) || !separable.iter().all(|(_, prof)| prof.iter().all(|(_, a)| check(a))) {
            return Err(TdseError::UnboundedPotential);
        }
        Ok(Self { grid, terms: terms.to_vec(), current: base.clone(), base, separable, dynamic, key: None })
    }

    /// Composed local Hamiltonian at stage time `t`.
    pub fn at(&mut self, t: f64) -> &[Local] {
        let mut key: Vec<f64> = self.separable.iter().map(|(k, _)| self.terms[*k].envelope(t)).collect();
        key.extend(self.dynamic.iter().map(|&k| t.min(self.terms[k].settles_at())));
        if self.key.as_ref() != Some(&key) {
            self.current.copy_from_slice(&self.base);
            for ((_, profile), &env) in self.separable.iter().zip(&key) {
                if env == 0.0 {
                    continue;
                }
                for (p, a) in profile {
                    for i in 0..4 {
                        self.current[*p][i] += env * a[i];
                    }
                }
            }
            let (terms, current) = (&self.terms, &mut self.current);
            for &k in &self.dynamic {
                for_each_point(&self.grid, |p, x, y| {
                    let a = local(&terms[k].sample(x, y, t));
                    for i in 0..4 {
                        current[p][i] += a[i];
                    }
                });
            }
            self.key = Some(key);
        }
        &self.current
    }

    /// Upper bound on `max|V| + max‖V_(i,j)‖` over the stage.
    pub fn potential_bound(&self) -> TdseResult<f64> {
        let n = self.grid.len();
        let mut v: Vec<f64> = Vec::with_capacity(n);
        let mut w: Vec<f64> = Vec::with_capacity(n);
        for a in &self.base {
            let (mv, mw) = magnitudes(a);
            v.push(mv);
            w.push(mw);
        }
        for (k, profile) in &self.separable {
            let peak = self.terms[*k].peak_envelope();
            for (p, a) in profile {
                let (mv, mw) = magnitudes(a);
                v[*p] += peak * mv;
                w[*p] += peak * mw;
            }
        }
        for &k in &self.dynamic {
            let term = &self.terms[k];
            let mut dv = vec![0.0_f64; n];
            let mut dw = vec![0.0_f64; n];
            for t in term.bound_times() {
                for_each_point(&self.grid, |p, x, y| {
                    let (mv, mw) = magnitudes(&local(&term.sample(x, y, t)));
                    dv[p] = dv[p].max(mv);
                    dw[p] = dw[p].max(mw);
                });
            }
            for p in 0..n {
                v[p] += dv[p];
                w[p] += dw[p];
            }
        }
        let vmax = v.iter().cloned().fold(0.0, f64::max);
        let wmax = w.iter().cloned().fold(0.0, f64::max);
        let bound = vmax + wmax;
        if bound.is_finite() {
            Ok(bound)
        } else {
            Err(TdseError::UnboundedPotential)
        }
    }
}

fn for_each_point(grid: &Grid2D, mut f: impl FnMut(usize, f64, f64)) {
    for ix in 0..grid.nx {
        let x = grid.x(ix);
        for iy in 0..grid.ny {
            f(grid.index(ix, iy), x, grid.y(iy));
        }
    }
}

/// `(ħ²/2m)(4/dx² + 4/dy²)`, the largest eigenvalue of the kinetic stencil.
pub fn kinetic_bound(grid: &Grid2D, params: &PhysicalParams) -> f64 {
    params.hbar * params.hbar / (2.0 * params.mass) * (4.0 / (grid.dx * grid.dx) + 4.0 / (grid.dy * grid.dy))
}

/// `0.5·ħ/E_max` with `E_max = max|V| + max‖V_(i,j)‖ + (ħ²/2m)(4/dx² + 4/dy²)`.
pub fn max_stable_dt(grid: &Grid2D, terms: &[PotentialTerm], params: &PhysicalParams) -> TdseResult<f64> {
    params.validate()?;
    let cache = PotentialCache::new(*grid, terms)?;
    Ok(SAFETY * params.hbar / (cache.potential_bound()? + kinetic_bound(grid, params)))
}

/// Steps a field under a fixed set of terms whose time origin is `t0`.
pub struct Stepper {
    grid: Grid2D,
    cache: PotentialCache,
    hbar: f64,
    kx: f64,
    ky: f64,
    dt_max: f64,
    t0: f64,
    attached: bool,
}

impl Stepper {
    pub fn new(grid: Grid2D, terms: &[PotentialTerm], params: &PhysicalParams, t0: f64) -> TdseResult<Self> {
        params.validate()?;
        let cache = PotentialCache::new(grid, terms)?;
        let dt_max = SAFETY * params.hbar / (cache.potential_bound()? + kinetic_bound(&grid, params));
        let k = params.hbar * params.hbar / (2.0 * params.mass);
        Ok(Self {
            grid,
            cache,
            hbar: params.hbar,
            kx: k / (grid.dx * grid.dx),
            ky: k / (grid.dy * grid.dy),
            dt_max,
            t0,
            attached: false,
        })
    }

    pub fn max_stable_dt(&self) -> f64 {
        self.dt_max
    }

    fn check(&self, field: &SpinorField, dt: f64) -> TdseResult<()> {
        if field.grid != self.grid {
            return Err(TdseError::GridMismatch);
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(TdseError::InvalidParameter(format!("time step must be positive (got {dt})")));
        }
        if dt > self.dt_max * (1.0 + 1e-12) {
            return Err(TdseError::Unstable { dt, dt_max: self.dt_max });
        }
        Ok(())
    }

    /// Advances `field` by `dt`. The first step of a new stepper, or a change
    /// of `dt`, rebuilds the `v` pair under this stepper's Hamiltonian.
    pub fn step(&mut self, field: &mut SpinorField, dt: f64) -> TdseResult<()> {
        self.check(field, dt)?;
        let attached = std::mem::replace(&mut self.attached, true);
        if !(attached && field.stagger == Some(dt)) {
            self.bootstrap(field, dt);
        }
        let t = field.t - self.t0;
        let (kx, ky, ny) = (self.kx, self.ky, self.grid.ny);
        let a = self.cache.at(t + 0.5 * dt);
        update(&mut field.u, None, &field.v, a, kx, ky, ny, dt / self.hbar, dt / (2.0 * self.hbar));
        let a = self.cache.at(t + dt);
        update(&mut field.v_back, Some(&field.v), &field.u, a, kx, ky, ny, -dt / self.hbar, dt / (2.0 * self.hbar));
        std::mem::swap(&mut field.v, &mut field.v_back);
        field.t += dt;
        Ok(())
    }

    /// Replaces the `v` pair by `v(t ± dt/2)` from the synced value at `t`.
    /// The staggered norm moves by `O(τ²⟨H²⟩)`.
    fn bootstrap(&mut self, field: &mut SpinorField, dt: f64) {
        let synced: Vec<f64> = field.v.iter().zip(&field.v_back).map(|(a, b)| 0.5 * (a + b)).collect();
        let t = field.t - self.t0;
        let a = self.cache.at(t);
        let h = 0.5 * dt;
        update(&mut field.v, Some(&synced), &field.u, a, self.kx, self.ky, self.grid.ny, -h / self.hbar, h / (2.0 * self.hbar));
        for ((vb, s), v) in field.v_back.iter_mut().zip(&synced).zip(&field.v) {
            *vb = 2.0 * s - v;
        }
        field.stagger = Some(dt);
    }
}

/// `(I - cB) out = (I + cB) prev + g·A·src` on interior points, where `prev`
/// defaults to `out` itself.
#[allow(clippy::too_many_arguments)]
fn update(out: &mut [f64], prev: Option<&[f64]>, src: &[f64], a: &[Local], kx: f64, ky: f64, ny: usize, g: f64, c: f64) {
    let row = 2 * ny;
    let nx = out.len() / row;
    let diag = 2.0 * (kx + ky);
    out.par_chunks_mut(row).enumerate().for_each(|(ix, orow)| {
        if ix == 0 || ix + 1 == nx {
            return;
        }
        let base = ix * row;
        let prow = prev.map(|p| &p[base..base + row]);
        let s = &src[base..base + row];
        let sm = &src[base - row..base];
        let sp = &src[base + row..base + 2 * row];
        let arow = &a[ix * ny..(ix + 1) * ny];
        for iy in 1..ny - 1 {
            let i = 2 * iy;
            let [a00, a11, a01, b] = arow[iy];
            let lap0 = diag * s[i] - kx * (sm[i] + sp[i]) - ky * (s[i - 2] + s[i + 2]);
            let lap1 = diag * s[i + 1] - kx * (sm[i + 1] + sp[i + 1]) - ky * (s[i - 1] + s[i + 3]);
            let h0 = lap0 + a00 * s[i] + a01 * s[i + 1];
            let h1 = lap1 + a01 * s[i] + a11 * s[i + 1];
            let (p0, p1) = match prow {
                Some(p) => (p[i], p[i + 1]),
                None => (orow[i], orow[i + 1]),
            };
            let cb = c * b;
            let r0 = p0 + cb * p1 + g * h0;
            let r1 = p1 - cb * p0 + g * h1;
            let det = 1.0 + cb * cb;
            orow[i] = (r0 + cb * r1) / det;
            orow[i + 1] = (r1 - cb * r0) / det;
        }
    });
}

/// Advances `field` by one step under `terms`, sampled at the field's own
/// time. A field already staggered for `dt` is assumed to have been staggered
/// under the same terms. Builds a fresh cache; use [`Stepper`] for repeated
/// steps.
pub fn step(field: &mut SpinorField, terms: &[PotentialTerm], params: &PhysicalParams, dt: f64) -> TdseResult<()> {
    let mut stepper = Stepper::new(field.grid, terms, params, 0.0)?;
    stepper.attached = true;
    stepper.step(field, dt)
}
