//! Builtin test shapes. Every builder returns a signed-distance-like level
//! set (exact where the shape allows it).

use super::{DomainError, Grid, GridDomain};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

pub fn disk_sdf(x: f64, y: f64, center: [f64; 2], r: f64) -> f64 {
    ((x - center[0]).powi(2) + (y - center[1]).powi(2)).sqrt() - r
}

/// Exact signed distance to the axis-aligned rectangle `[x0, x1] x [y0, y1]`.
pub fn rectangle_sdf(x: f64, y: f64, rect: [f64; 4]) -> f64 {
    let cx = 0.5 * (rect[0] + rect[1]);
    let cy = 0.5 * (rect[2] + rect[3]);
    let hx = 0.5 * (rect[1] - rect[0]);
    let hy = 0.5 * (rect[3] - rect[2]);
    let qx = (x - cx).abs() - hx;
    let qy = (y - cy).abs() - hy;
    let outside = (qx.max(0.0).powi(2) + qy.max(0.0).powi(2)).sqrt();
    outside + qx.max(qy).min(0.0)
}

/// Distance from `(x, y)` to the segment `a`-`b`.
pub fn segment_distance(x: f64, y: f64, a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((x - a[0]) * dx + (y - a[1]) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    ((x - a[0] - t * dx).powi(2) + (y - a[1] - t * dy).powi(2)).sqrt()
}

pub fn disk(grid: Grid, center: [f64; 2], r: f64) -> Result<GridDomain, DomainError> {
    GridDomain::from_fn(grid, |x, y| disk_sdf(x, y, center, r))
}

pub fn rectangle(grid: Grid, rect: [f64; 4]) -> Result<GridDomain, DomainError> {
    GridDomain::from_fn(grid, |x, y| rectangle_sdf(x, y, rect))
}

/// L-shape: the square `[0, a]^2` with its upper-right quarter removed,
/// shifted so that its bounding box starts at `corner`.
pub fn l_shape(grid: Grid, corner: [f64; 2], a: f64) -> Result<GridDomain, DomainError> {
    let big = [corner[0], corner[0] + a, corner[1], corner[1] + a];
    let cut = [corner[0] + 0.5 * a, corner[0] + 2.0 * a, corner[1] + 0.5 * a, corner[1] + 2.0 * a];
    GridDomain::from_fn(grid, |x, y| rectangle_sdf(x, y, big).max(-rectangle_sdf(x, y, cut)))
}

/// Rectangle with a one-cell-thick slit along `a`-`b` removed.
pub fn slit_rectangle(grid: Grid, rect: [f64; 4], a: [f64; 2], b: [f64; 2]) -> Result<GridDomain, DomainError> {
    let half = 0.5 * grid.h();
    GridDomain::from_fn(grid, |x, y| rectangle_sdf(x, y, rect).max(half - segment_distance(x, y, a, b)))
}

/// Star-shaped blob `r(θ) = r0 (1 + Σ a_k cos(kθ + φ_k))` with seeded
/// random amplitudes for modes 2..=6.
pub fn random_blob(grid: Grid, center: [f64; 2], r0: f64, amplitude: f64, seed: u64) -> Result<GridDomain, DomainError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<(f64, f64, f64)> = (2..=6)
        .map(|k| {
            let a = amplitude * rng.gen_range(0.3..1.0) / k as f64;
            let ph = rng.gen_range(0.0..2.0 * PI);
            (k as f64, a, ph)
        })
        .collect();
    GridDomain::from_fn(grid, |x, y| {
        let dx = x - center[0];
        let dy = y - center[1];
        let rho = (dx * dx + dy * dy).sqrt();
        let th = dy.atan2(dx);
        let radius = r0 * (1.0 + modes.iter().map(|&(k, a, ph)| a * (k * th + ph).cos()).sum::<f64>());
        rho - radius
    })
}

/// Union of two blobs, one around each center.
pub fn two_blobs(
    grid: Grid,
    centers: [[f64; 2]; 2],
    radii: [f64; 2],
    amplitude: f64,
    seed: u64,
) -> Result<GridDomain, DomainError> {
    let a = random_blob(grid, centers[0], radii[0], amplitude, seed)?;
    let b = random_blob(grid, centers[1], radii[1], amplitude, seed.wrapping_add(1))?;
    let phi = a.phi().iter().zip(b.phi()).map(|(p, q)| p.min(*q)).collect();
    GridDomain::new(grid, phi)
}
