use num_complex::Complex64 as C64;

use super::grid::{Grid2D, Rect};
use super::{TdseError, TdseResult};

/// Two-component spinor `ψ = u + iv` on a grid, stored for a staggered
/// leapfrog: `u` at time `t`, `v` at `t + τ/2` and `v_back` at `t - τ/2`.
///
/// A freshly built field is synced: `v = v_back = Im ψ(t)` and no stagger is
/// recorded. The stepper bootstraps the stagger on the first step. Arrays are
/// interleaved by spin, `[2·p + s]` with `s = 0` for ↓ and `s = 1` for ↑.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorField {
    pub(crate) grid: Grid2D,
    pub(crate) u: Vec<f64>,
    pub(crate) v: Vec<f64>,
    pub(crate) v_back: Vec<f64>,
    pub(crate) t: f64,
    pub(crate) stagger: Option<f64>,
}

/// Center, per-axis width and mean wavevector of a density.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Moments {
    pub weight: f64,
    pub center: [f64; 2],
    pub width: [f64; 2],
    pub wavevector: [f64; 2],
}

impl SpinorField {
    pub fn zeros(grid: Grid2D) -> Self {
        let n = 2 * grid.len();
        Self { grid, u: vec![0.0; n], v: vec![0.0; n], v_back: vec![0.0; n], t: 0.0, stagger: None }
    }

    /// Samples `f(x, y)` on interior points; the frame stays zero.
    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> [C64; 2]) -> Self {
        let mut field = Self::zeros(grid);
        for ix in 1..grid.nx - 1 {
            for iy in 1..grid.ny - 1 {
                let p = grid.index(ix, iy);
                let psi = f(grid.x(ix), grid.y(iy));
                for s in 0..2 {
                    field.u[2 * p + s] = psi[s].re;
                    field.v[2 * p + s] = psi[s].im;
                }
            }
        }
        field.v_back.copy_from_slice(&field.v);
        field
    }

    /// Builds a staggered field from raw interleaved arrays: `u` at `t`, `v`
    /// at `t + dt/2`, `v_back` at `t - dt/2`.
    pub fn from_staggered(grid: Grid2D, u: Vec<f64>, v: Vec<f64>, v_back: Vec<f64>, t: f64, dt: f64) -> TdseResult<Self> {
        let n = 2 * grid.len();
        if u.len() != n || v.len() != n || v_back.len() != n {
            return Err(TdseError::GridMismatch);
        }
        if !(dt > 0.0 && dt.is_finite() && t.is_finite()) {
            return Err(TdseError::InvalidParameter(format!("need finite t and positive dt (got {t}, {dt})")));
        }
        Ok(Self { grid, u, v, v_back, t, stagger: Some(dt) })
    }

    /// Raw interleaved `(u, v, v_back)`.
    pub fn parts(&self) -> (&[f64], &[f64], &[f64]) {
        (&self.u, &self.v, &self.v_back)
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn set_time(&mut self, t: f64) {
        self.t = t;
    }

    /// Step size the `v` arrays are currently staggered for.
    pub fn stagger(&self) -> Option<f64> {
        self.stagger
    }

    /// `ψ` at the current time, with `Im ψ` averaged across the stagger.
    pub fn psi(&self, p: usize) -> [C64; 2] {
        let s = |c: usize| C64::new(self.u[2 * p + c], 0.5 * (self.v[2 * p + c] + self.v_back[2 * p + c]));
        [s(0), s(1)]
    }

    /// Staggered density `u² + v·v_back` per spin component; sums to the
    /// conserved norm.
    pub fn density(&self, p: usize) -> [f64; 2] {
        let d = |i: usize| self.u[i] * self.u[i] + self.v[i] * self.v_back[i];
        [d(2 * p), d(2 * p + 1)]
    }

    /// `Σ (u² + v·v_back)·dx·dy`, exactly invariant while the Hamiltonian
    /// is held fixed.
    pub fn norm(&self) -> f64 {
        self.component_norms().iter().sum()
    }

    pub fn component_norms(&self) -> [f64; 2] {
        let mut acc = [0.0; 2];
        for p in 0..self.grid.len() {
            let d = self.density(p);
            acc[0] += d[0];
            acc[1] += d[1];
        }
        acc.map(|a| a * self.grid.cell_area())
    }

    /// Probability inside `rect` using the staggered density.
    pub fn probability_in(&self, rect: &Rect) -> f64 {
        let mut acc = 0.0;
        self.for_points_in(rect, |p| {
            let d = self.density(p);
            acc += d[0] + d[1];
        });
        acc * self.grid.cell_area()
    }

    pub(crate) fn for_points_in(&self, rect: &Rect, mut f: impl FnMut(usize)) {
        let g = &self.grid;
        for ix in 0..g.nx {
            let x = g.x(ix);
            if x < rect.x[0] || x > rect.x[1] {
                continue;
            }
            for iy in 0..g.ny {
                let y = g.y(iy);
                if y >= rect.y[0] && y <= rect.y[1] {
                    f(g.index(ix, iy));
                }
            }
        }
    }

    /// `⟨self|other⟩` over both spin components.
    pub fn overlap(&self, other: &SpinorField) -> TdseResult<C64> {
        if self.grid != other.grid {
            return Err(TdseError::GridMismatch);
        }
        let mut acc = C64::new(0.0, 0.0);
        for p in 0..self.grid.len() {
            let (a, b) = (self.psi(p), other.psi(p));
            acc += a[0].conj() * b[0] + a[1].conj() * b[1];
        }
        Ok(acc * self.grid.cell_area())
    }

    /// Multiplies the field by a real factor.
    pub fn scale(&mut self, factor: f64) {
        for a in [&mut self.u, &mut self.v, &mut self.v_back] {
            a.iter_mut().for_each(|x| *x *= factor);
        }
    }

    /// `self += factor·other`. Both fields must share grid, time and stagger.
    pub fn add_scaled(&mut self, other: &SpinorField, factor: f64) -> TdseResult<()> {
        if self.grid != other.grid {
            return Err(TdseError::GridMismatch);
        }
        if self.t != other.t || self.stagger != other.stagger {
            return Err(TdseError::InvalidParameter("fields are at different times or staggers".into()));
        }
        for (x, y) in [(&mut self.u, &other.u), (&mut self.v, &other.v), (&mut self.v_back, &other.v_back)] {
            x.iter_mut().zip(y).for_each(|(x, y)| *x += factor * y);
        }
        Ok(())
    }

    /// Rescales to unit staggered norm.
    pub fn normalize(&mut self) -> TdseResult<()> {
        let n = self.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(TdseError::ZeroField);
        }
        self.scale(1.0 / n.sqrt());
        Ok(())
    }

    /// Moments of `|ψ|²` (both components) inside `rect`. The wavevector is
    /// `Im⟨ψ|∇ψ⟩/⟨ψ|ψ⟩` from central differences.
    pub fn moments_in(&self, rect: &Rect) -> Moments {
        let g = self.grid;
        let (mut w, mut sx, mut sy, mut sxx, mut syy, mut kx, mut ky) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for ix in 1..g.nx - 1 {
            let x = g.x(ix);
            if x < rect.x[0] || x > rect.x[1] {
                continue;
            }
            for iy in 1..g.ny - 1 {
                let y = g.y(iy);
                if y < rect.y[0] || y > rect.y[1] {
                    continue;
                }
                let p = g.index(ix, iy);
                let psi = self.psi(p);
                let (xp, xm) = (self.psi(g.index(ix + 1, iy)), self.psi(g.index(ix - 1, iy)));
                let (yp, ym) = (self.psi(g.index(ix, iy + 1)), self.psi(g.index(ix, iy - 1)));
                for s in 0..2 {
                    let d = psi[s].norm_sqr();
                    w += d;
                    sx += d * x;
                    sy += d * y;
                    sxx += d * x * x;
                    syy += d * y * y;
                    kx += (psi[s].conj() * (xp[s] - xm[s])).im / (2.0 * g.dx);
                    ky += (psi[s].conj() * (yp[s] - ym[s])).im / (2.0 * g.dy);
                }
            }
        }
        if w <= 0.0 {
            return Moments { weight: 0.0, center: rect.center(), width: [0.0; 2], wavevector: [0.0; 2] };
        }
        let (cx, cy) = (sx / w, sy / w);
        Moments {
            weight: w * g.cell_area(),
            center: [cx, cy],
            width: [(sxx / w - cx * cx).max(0.0).sqrt(), (syy / w - cy * cy).max(0.0).sqrt()],
            wavevector: [kx / w, ky / w],
        }
    }

    pub fn moments(&self) -> Moments {
        self.moments_in(&self.grid.bounds())
    }

    /// Synced `ψ` as `[Re ψ↓, Im ψ↓, Re ψ↑, Im ψ↑]` per point, row-major.
    pub fn snapshot(&self) -> Vec<[f64; 4]> {
        (0..self.grid.len())
            .map(|p| {
                let s = self.psi(p);
                [s[0].re, s[0].im, s[1].re, s[1].im]
            })
            .collect()
    }
}

/// Normalized Gaussian wavepacket `∝ exp(-|r-c|²/4σ₀² + i k·r) ⊗ spinor`.
///
/// `σ₀` is the standard deviation of the density. The packet must be resolved
/// by at least three grid spacings.
pub fn init_gaussian(
    grid: Grid2D,
    center: [f64; 2],
    width: f64,
    momentum: [f64; 2],
    spinor: [C64; 2],
) -> TdseResult<SpinorField> {
    let h = grid.dx.max(grid.dy);
    if !(width >= 3.0 * h) {
        return Err(TdseError::UnderResolved { width, spacing: h });
    }
    if !grid.contains(center) {
        return Err(TdseError::OutsideGrid(center));
    }
    let sn = spinor[0].norm_sqr() + spinor[1].norm_sqr();
    if (sn - 1.0).abs() > 1e-9 {
        return Err(TdseError::InvalidParameter(format!("spinor norm² {sn} is not 1")));
    }
    if !momentum.iter().all(|k| k.is_finite()) {
        return Err(TdseError::InvalidParameter("momentum must be finite".into()));
    }
    let inv = 1.0 / (4.0 * width * width);
    let mut field = SpinorField::from_fn(grid, |x, y| {
        let (rx, ry) = (x - center[0], y - center[1]);
        let env = C64::from_polar((-(rx * rx + ry * ry) * inv).exp(), momentum[0] * rx + momentum[1] * ry);
        [env * spinor[0], env * spinor[1]]
    });
    field.normalize()?;
    Ok(field)
}
