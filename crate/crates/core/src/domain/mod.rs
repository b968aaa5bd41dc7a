//! Planar domains represented as sublevel sets `{phi < 0}` on a uniform
//! cell-centred grid.
//!
//! Node `(i, j)` sits at the centre of cell `(i, j)`, i.e. at
//! `origin + ((i + 1/2) h, (j + 1/2) h)`, and fields are stored row-major
//! with `i` running fastest.

mod boundary;
mod io;
mod reinit;
pub mod shapes;

pub use boundary::{extract_boundary, BoundaryMesh};
pub use io::{
    format_boundary_csv, format_grid_dump, parse_grid_dump, read_grid_dump, write_boundary_csv, write_grid_dump, GridDump,
};
pub use reinit::{reinitialize, ReinitParams, ReinitStats};

use thiserror::Error;

/// Smoothed-Heaviside half width used by [`volume`], in cells.
pub const HEAVISIDE_WIDTH_CELLS: f64 = 1.5;

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("grid needs at least 8x8 cells, got {nx}x{ny}")]
    GridTooSmall { nx: usize, ny: usize },
    #[error("grid spacing must be positive and finite, got {0}")]
    BadSpacing(f64),
    #[error("level set has {expected} nodes expected, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("level set is not finite at node ({i}, {j})")]
    NonFinite { i: usize, j: usize },
    #[error("domain is empty (phi >= 0 at every node)")]
    Empty,
    #[error("dilation factor must be positive, got {0}")]
    BadScale(f64),
    #[error("radius {r} is below the resolvable minimum {min}")]
    RadiusTooSmall { r: f64, min: f64 },
    #[error("grid dump: {0}")]
    Dump(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Uniform Cartesian grid. Immutable once built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    nx: usize,
    ny: usize,
    h: f64,
    origin: [f64; 2],
}

impl Grid {
    pub fn new(nx: usize, ny: usize, h: f64, origin: [f64; 2]) -> Result<Self, DomainError> {
        if nx < 8 || ny < 8 {
            return Err(DomainError::GridTooSmall { nx, ny });
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(DomainError::BadSpacing(h));
        }
        Ok(Self { nx, ny, h, origin })
    }

    /// Grid covering `[xmin, xmax] x [ymin, ymax]` with `nx` cells across;
    /// `ny` follows from the aspect ratio.
    pub fn covering(xmin: f64, xmax: f64, ymin: f64, ymax: f64, nx: usize) -> Result<Self, DomainError> {
        let h = (xmax - xmin) / nx as f64;
        let ny = ((ymax - ymin) / h).round() as usize;
        Self::new(nx, ny, h, [xmin, ymin])
    }

    /// Square box `[lo, hi]^2` with `n x n` cells.
    pub fn square(lo: f64, hi: f64, n: usize) -> Result<Self, DomainError> {
        Self::new(n, n, (hi - lo) / n as f64, [lo, lo])
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn ij(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        [
            self.origin[0] + (i as f64 + 0.5) * self.h,
            self.origin[1] + (j as f64 + 0.5) * self.h,
        ]
    }

    /// Box corners `[xmin, xmax, ymin, ymax]`.
    pub fn extent(&self) -> [f64; 4] {
        [
            self.origin[0],
            self.origin[0] + self.nx as f64 * self.h,
            self.origin[1],
            self.origin[1] + self.ny as f64 * self.h,
        ]
    }

    pub fn cell_area(&self) -> f64 {
        self.h * self.h
    }

    /// Continuous node coordinates of a point, clamped to the node hull.
    fn local(&self, p: [f64; 2]) -> (usize, usize, f64, f64) {
        let fx = ((p[0] - self.origin[0]) / self.h - 0.5).clamp(0.0, (self.nx - 1) as f64);
        let fy = ((p[1] - self.origin[1]) / self.h - 0.5).clamp(0.0, (self.ny - 1) as f64);
        let i = (fx.floor() as usize).min(self.nx - 2);
        let j = (fy.floor() as usize).min(self.ny - 2);
        (i, j, fx - i as f64, fy - j as f64)
    }

    /// Whether `p` lies inside the convex hull of the nodes.
    pub fn in_node_hull(&self, p: [f64; 2]) -> bool {
        let fx = (p[0] - self.origin[0]) / self.h - 0.5;
        let fy = (p[1] - self.origin[1]) / self.h - 0.5;
        fx >= 0.0 && fy >= 0.0 && fx <= (self.nx - 1) as f64 && fy <= (self.ny - 1) as f64
    }

    /// Bilinear interpolation of a node field; points outside the node hull
    /// take the value at the nearest hull point.
    pub fn interpolate(&self, field: &[f64], p: [f64; 2]) -> f64 {
        let (i, j, tx, ty) = self.local(p);
        let f00 = field[self.idx(i, j)];
        let f10 = field[self.idx(i + 1, j)];
        let f01 = field[self.idx(i, j + 1)];
        let f11 = field[self.idx(i + 1, j + 1)];
        (1.0 - ty) * ((1.0 - tx) * f00 + tx * f10) + ty * ((1.0 - tx) * f01 + tx * f11)
    }

    /// Value and gradient of the bilinear interpolant at `p`.
    pub fn interpolate_grad(&self, field: &[f64], p: [f64; 2]) -> (f64, [f64; 2]) {
        let (i, j, tx, ty) = self.local(p);
        let f00 = field[self.idx(i, j)];
        let f10 = field[self.idx(i + 1, j)];
        let f01 = field[self.idx(i, j + 1)];
        let f11 = field[self.idx(i + 1, j + 1)];
        let v = (1.0 - ty) * ((1.0 - tx) * f00 + tx * f10) + ty * ((1.0 - tx) * f01 + tx * f11);
        let gx = ((1.0 - ty) * (f10 - f00) + ty * (f11 - f01)) / self.h;
        let gy = ((1.0 - tx) * (f01 - f00) + tx * (f11 - f10)) / self.h;
        (v, [gx, gy])
    }

    /// Central-difference gradient at a node, one-sided on the box edge.
    pub fn node_gradient(&self, field: &[f64], i: usize, j: usize) -> [f64; 2] {
        let h = self.h;
        let gx = if i == 0 {
            (field[self.idx(1, j)] - field[self.idx(0, j)]) / h
        } else if i == self.nx - 1 {
            (field[self.idx(i, j)] - field[self.idx(i - 1, j)]) / h
        } else {
            (field[self.idx(i + 1, j)] - field[self.idx(i - 1, j)]) / (2.0 * h)
        };
        let gy = if j == 0 {
            (field[self.idx(i, 1)] - field[self.idx(i, 0)]) / h
        } else if j == self.ny - 1 {
            (field[self.idx(i, j)] - field[self.idx(i, j - 1)]) / h
        } else {
            (field[self.idx(i, j + 1)] - field[self.idx(i, j - 1)]) / (2.0 * h)
        };
        [gx, gy]
    }

    /// Quadrature points `(point, weight)` covering the disk `B_r(center)`.
    ///
    /// Sub-cell spacing is `max(h/4, r/64)`, so the point count stays below
    /// ~13k regardless of radius.
    pub fn ball_quadrature(&self, center: [f64; 2], r: f64) -> Vec<([f64; 2], f64)> {
        let delta = (self.h / 4.0).max(r / 64.0);
        let m = (r / delta).ceil() as i64;
        let mut out = Vec::with_capacity((4 * m * m) as usize);
        for b in -m..m {
            let y = center[1] + (b as f64 + 0.5) * delta;
            for a in -m..m {
                let x = center[0] + (a as f64 + 0.5) * delta;
                let dx = x - center[0];
                let dy = y - center[1];
                if dx * dx + dy * dy <= r * r {
                    out.push(([x, y], 0.0));
                }
            }
        }
        // equal weights summing to the exact disk area remove the lattice
        // point-count error
        let w = std::f64::consts::PI * r * r / out.len().max(1) as f64;
        for q in &mut out {
            q.1 = w;
        }
        out
    }
}

/// Open planar set `{phi < 0}` on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridDomain {
    grid: Grid,
    phi: Vec<f64>,
    generation: u64,
}

impl GridDomain {
    pub fn new(grid: Grid, phi: Vec<f64>) -> Result<Self, DomainError> {
        Self::with_generation(grid, phi, 0)
    }

    pub fn with_generation(grid: Grid, phi: Vec<f64>, generation: u64) -> Result<Self, DomainError> {
        if phi.len() != grid.len() {
            return Err(DomainError::LengthMismatch {
                expected: grid.len(),
                got: phi.len(),
            });
        }
        if let Some(k) = phi.iter().position(|v| !v.is_finite()) {
            let (i, j) = grid.ij(k);
            return Err(DomainError::NonFinite { i, j });
        }
        Ok(Self { grid, phi, generation })
    }

    /// Samples a level-set function at every node.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Result<Self, DomainError> {
        let mut phi = Vec::with_capacity(grid.len());
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                let [x, y] = grid.node(i, j);
                phi.push(f(x, y));
            }
        }
        Self::new(grid, phi)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    /// Replaces the level set, bumping the revision counter.
    pub fn evolve(&self, phi: Vec<f64>) -> Result<Self, DomainError> {
        Self::with_generation(self.grid, phi, self.generation + 1)
    }

    #[inline]
    pub fn is_inside(&self, idx: usize) -> bool {
        self.phi[idx] < 0.0
    }

    pub fn active_count(&self) -> usize {
        self.phi.iter().filter(|&&v| v < 0.0).count()
    }

    /// Rejects domains without a single interior node.
    pub fn ensure_nonempty(&self) -> Result<(), DomainError> {
        if self.active_count() == 0 {
            Err(DomainError::Empty)
        } else {
            Ok(())
        }
    }

    /// Bilinear level-set value at an arbitrary point.
    pub fn phi_at(&self, p: [f64; 2]) -> f64 {
        self.grid.interpolate(&self.phi, p)
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.phi_at(p) < 0.0
    }

    /// Number of 4-connected components of the interior node set.
    pub fn component_count(&self) -> usize {
        let g = &self.grid;
        let mut seen = vec![false; g.len()];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..g.len() {
            if seen[start] || !self.is_inside(start) {
                continue;
            }
            count += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(k) = stack.pop() {
                let (i, j) = g.ij(k);
                let mut visit = |n: usize| {
                    if !seen[n] && self.is_inside(n) {
                        seen[n] = true;
                        stack.push(n);
                    }
                };
                if i > 0 {
                    visit(k - 1);
                }
                if i + 1 < g.nx() {
                    visit(k + 1);
                }
                if j > 0 {
                    visit(k - g.nx());
                }
                if j + 1 < g.ny() {
                    visit(k + g.nx());
                }
            }
        }
        count
    }
}

/// Smoothed Heaviside `H_eps(z)`, equal to 1 for `z >= eps` and 0 for `z <= -eps`.
pub fn smoothed_heaviside(z: f64, eps: f64) -> f64 {
    if z <= -eps {
        0.0
    } else if z >= eps {
        1.0
    } else {
        0.5 + z / (2.0 * eps) + (std::f64::consts::PI * z / eps).sin() / (2.0 * std::f64::consts::PI)
    }
}

/// Area of `{phi < 0}` by smoothed-Heaviside node quadrature.
pub fn volume(d: &GridDomain) -> f64 {
    let eps = HEAVISIDE_WIDTH_CELLS * d.grid.h();
    d.phi.iter().map(|&v| smoothed_heaviside(-v, eps)).sum::<f64>() * d.grid.cell_area()
}

/// The dilated domain `t * Omega`, resampling `t * phi(x / t)` about the
/// coordinate origin.
pub fn dilate(d: &GridDomain, t: f64) -> Result<GridDomain, DomainError> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(DomainError::BadScale(t));
    }
    if t == 1.0 {
        return Ok(d.clone());
    }
    let g = d.grid;
    let mut phi = Vec::with_capacity(g.len());
    for j in 0..g.ny() {
        for i in 0..g.nx() {
            let [x, y] = g.node(i, j);
            phi.push(t * g.interpolate(&d.phi, [x / t, y / t]));
        }
    }
    d.evolve(phi)
}

/// Fraction `|B_r(x) ∩ Omega| / |B_r|` by sub-cell quadrature.
pub fn density_ratio(d: &GridDomain, x: [f64; 2], r: f64) -> Result<f64, DomainError> {
    let min = 2.0 * d.grid.h();
    if r < min * (1.0 - 1e-12) {
        return Err(DomainError::RadiusTooSmall { r, min });
    }
    let pts = d.grid.ball_quadrature(x, r);
    let inside = pts.iter().filter(|(p, _)| d.contains(*p)).count();
    Ok(inside as f64 / pts.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn disk(n: usize, lo: f64, hi: f64, r: f64) -> GridDomain {
        GridDomain::from_fn(Grid::square(lo, hi, n).unwrap(), |x, y| (x * x + y * y).sqrt() - r).unwrap()
    }

    #[test]
    fn grid_rejects_small_or_bad_spacing() {
        assert!(matches!(Grid::new(4, 16, 0.1, [0.0; 2]), Err(DomainError::GridTooSmall { .. })));
        assert!(matches!(Grid::new(16, 16, 0.0, [0.0; 2]), Err(DomainError::BadSpacing(_))));
        assert!(matches!(Grid::new(16, 16, f64::NAN, [0.0; 2]), Err(DomainError::BadSpacing(_))));
    }

    #[test]
    fn nonfinite_phi_is_rejected() {
        let g = Grid::square(0.0, 1.0, 8).unwrap();
        let mut phi = vec![-1.0; 64];
        phi[9] = f64::INFINITY;
        assert!(matches!(GridDomain::new(g, phi), Err(DomainError::NonFinite { i: 1, j: 1 })));
    }

    #[test]
    fn volume_of_empty_set_is_zero() {
        let g = Grid::square(0.0, 1.0, 32).unwrap();
        let d = GridDomain::new(g, vec![1.0; g.len()]).unwrap();
        assert_eq!(volume(&d), 0.0);
        assert!(matches!(d.ensure_nonempty(), Err(DomainError::Empty)));
    }

    #[test]
    fn volume_of_full_box() {
        let g = Grid::square(0.0, 1.0, 64).unwrap();
        let d = GridDomain::new(g, vec![-1.0; g.len()]).unwrap();
        assert!((volume(&d) - 1.0).abs() <= 1e-3);
    }

    #[test]
    fn volume_of_unit_disk() {
        let d = disk(256, -2.0, 2.0, 1.0);
        assert!((volume(&d) - PI).abs() <= 2e-2, "{}", volume(&d));
    }

    #[test]
    fn dilate_identity_and_scaling() {
        let d = disk(128, -2.5, 2.5, 1.0);
        assert_eq!(dilate(&d, 1.0).unwrap().phi(), d.phi());
        let big = dilate(&d, 2.0).unwrap();
        let ratio = volume(&big) / volume(&d);
        assert!((ratio - 4.0).abs() <= 0.03 * 4.0, "{ratio}");

        let sq = GridDomain::from_fn(Grid::square(-0.25, 1.25, 128).unwrap(), |x, y| {
            shapes::rectangle_sdf(x, y, [0.0, 1.0, 0.0, 1.0])
        })
        .unwrap();
        let half = dilate(&sq, 0.5).unwrap();
        assert!((volume(&half) - 0.25).abs() <= 0.02 * 0.25, "{}", volume(&half));
        assert!(matches!(dilate(&d, 0.0), Err(DomainError::BadScale(_))));
        assert!(matches!(dilate(&d, -1.0), Err(DomainError::BadScale(_))));
    }

    #[test]
    fn density_ratio_cases() {
        let d = disk(128, -2.0, 2.0, 1.0);
        let h = d.grid().h();
        assert_eq!(density_ratio(&d, [0.0, 0.0], 0.3).unwrap(), 1.0);
        assert!(matches!(density_ratio(&d, [0.0, 0.0], h), Err(DomainError::RadiusTooSmall { .. })));

        let half = GridDomain::from_fn(Grid::square(-1.0, 1.0, 64).unwrap(), |_, y| y).unwrap();
        let rho = density_ratio(&half, [0.1, 0.0], 0.2).unwrap();
        assert!((rho - 0.5).abs() <= 0.05, "{rho}");

        // complement of the open first quadrant
        let notch = GridDomain::from_fn(Grid::square(-1.0, 1.0, 64).unwrap(), |x, y| x.min(y)).unwrap();
        let rho = density_ratio(&notch, [0.0, 0.0], 0.2).unwrap();
        assert!((rho - 0.75).abs() <= 0.05, "{rho}");
    }

    #[test]
    fn components_are_counted() {
        let g = Grid::covering(-3.0, 3.0, -1.5, 1.5, 96).unwrap();
        let two = GridDomain::from_fn(g, |x, y| {
            let a = ((x + 1.5).powi(2) + y * y).sqrt() - 0.8;
            let b = ((x - 1.5).powi(2) + y * y).sqrt() - 0.8;
            a.min(b)
        })
        .unwrap();
        assert_eq!(two.component_count(), 2);
    }

    #[test]
    fn interpolation_reproduces_bilinear_fields() {
        let g = Grid::square(0.0, 1.0, 16).unwrap();
        let d = GridDomain::from_fn(g, |x, y| 2.0 * x - 3.0 * y + 0.5).unwrap();
        let (v, grad) = g.interpolate_grad(d.phi(), [0.41, 0.63]);
        assert!((v - (2.0 * 0.41 - 3.0 * 0.63 + 0.5)).abs() < 1e-12);
        assert!((grad[0] - 2.0).abs() < 1e-9 && (grad[1] + 3.0).abs() < 1e-9);
    }
}
