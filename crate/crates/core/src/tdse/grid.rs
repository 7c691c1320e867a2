use serde::{Deserialize, Serialize};

use super::{TdseError, TdseResult};

/// Uniform 2D grid. Point `(ix, iy)` sits at `origin + (ix·dx, iy·dy)` and
/// has flat index `ix·ny + iy`. The outer frame is a Dirichlet boundary.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub origin: [f64; 2],
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64, origin: [f64; 2]) -> TdseResult<Self> {
        if nx < 3 || ny < 3 {
            return Err(TdseError::InvalidGrid(format!("need at least 3×3 points, got {nx}×{ny}")));
        }
        if !(dx > 0.0 && dy > 0.0 && dx.is_finite() && dy.is_finite()) {
            return Err(TdseError::InvalidGrid(format!("spacings must be positive (dx = {dx}, dy = {dy})")));
        }
        if !(origin[0].is_finite() && origin[1].is_finite()) {
            return Err(TdseError::InvalidGrid("origin must be finite".into()));
        }
        Ok(Self { nx, ny, dx, dy, origin })
    }

    /// Smallest grid with spacing `h` whose points cover `[x0, x1] × [y0, y1]`,
    /// centered on the rectangle.
    pub fn covering(x: [f64; 2], y: [f64; 2], h: f64) -> TdseResult<Self> {
        let n = |lo: f64, hi: f64| ((hi - lo) / h).ceil() as usize + 1;
        let (nx, ny) = (n(x[0], x[1]), n(y[0], y[1]));
        let cx = 0.5 * (x[0] + x[1]) - 0.5 * (nx - 1) as f64 * h;
        let cy = 0.5 * (y[0] + y[1]) - 0.5 * (ny - 1) as f64 * h;
        Self::new(nx, ny, h, h, [cx, cy])
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        ix * self.ny + iy
    }

    pub fn x(&self, ix: usize) -> f64 {
        self.origin[0] + ix as f64 * self.dx
    }

    pub fn y(&self, iy: usize) -> f64 {
        self.origin[1] + iy as f64 * self.dy
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.nx - 1)
    }

    pub fn y_max(&self) -> f64 {
        self.y(self.ny - 1)
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        (self.origin[0]..=self.x_max()).contains(&p[0]) && (self.origin[1]..=self.y_max()).contains(&p[1])
    }

    pub fn is_interior(&self, ix: usize, iy: usize) -> bool {
        ix > 0 && iy > 0 && ix + 1 < self.nx && iy + 1 < self.ny
    }

    /// Full extent as a rectangle.
    pub fn bounds(&self) -> Rect {
        Rect { x: [self.origin[0], self.x_max()], y: [self.origin[1], self.y_max()] }
    }
}

/// Closed axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

impl Rect {
    pub fn new(x: [f64; 2], y: [f64; 2]) -> Self {
        Self { x: [x[0].min(x[1]), x[0].max(x[1])], y: [y[0].min(y[1]), y[0].max(y[1])] }
    }

    pub fn centered(center: [f64; 2], half_width: [f64; 2]) -> Self {
        Self::new(
            [center[0] - half_width[0], center[0] + half_width[0]],
            [center[1] - half_width[1], center[1] + half_width[1]],
        )
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        (self.x[0]..=self.x[1]).contains(&p[0]) && (self.y[0]..=self.y[1]).contains(&p[1])
    }

    /// True when the interiors intersect; shared edges do not count.
    pub fn overlaps(&self, other: &Rect) -> bool {
        self.x[0] < other.x[1] && other.x[0] < self.x[1] && self.y[0] < other.y[1] && other.y[0] < self.y[1]
    }

    pub fn within(&self, outer: &Rect) -> bool {
        self.x[0] >= outer.x[0] && self.x[1] <= outer.x[1] && self.y[0] >= outer.y[0] && self.y[1] <= outer.y[1]
    }

    pub fn center(&self) -> [f64; 2] {
        [0.5 * (self.x[0] + self.x[1]), 0.5 * (self.y[0] + self.y[1])]
    }
}
