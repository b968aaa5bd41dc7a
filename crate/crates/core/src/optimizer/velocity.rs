//! First-variation velocity on the boundary, its extension to a band, and
//! one explicit level-set advection step.

use crate::domain::{BoundaryMesh, Grid, GridDomain};
use crate::objective::WeightVector;
use crate::spectral::{normal_derivative, Spectrum};

/// Half-width of the band carrying the extended velocity, in cells.
pub const BAND_CELLS: f64 = 12.0;

/// `V(x_i) = Σ ξ_k (u_k)_ν²(x_i) − ξ_0(x_i)` at every boundary sample, using
/// the cluster-symmetrized weights. `None` where any normal derivative is
/// unreliable.
pub fn shape_velocity(sp: &Spectrum, w: &WeightVector, bm: &BoundaryMesh, d: &GridDomain) -> Vec<Option<f64>> {
    let derivs: Vec<Vec<Option<f64>>> = sp.modes.iter().map(|m| normal_derivative(m, bm, d)).collect();
    (0..bm.len())
        .map(|i| {
            let mut s = 0.0;
            for (k, dk) in derivs.iter().enumerate() {
                s += w.xi_sym[k] * dk[i]? * dk[i]?;
            }
            Some(s - w.xi0_at(bm.points[i]))
        })
        .collect()
}

/// Uniform bucket grid over boundary samples for nearest-sample queries.
struct SampleIndex<'a> {
    points: &'a [[f64; 2]],
    origin: [f64; 2],
    size: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

impl<'a> SampleIndex<'a> {
    fn new(points: &'a [[f64; 2]], keep: &[bool], g: &Grid, size: f64) -> Self {
        let [x0, x1, y0, y1] = g.extent();
        let nx = ((x1 - x0) / size).ceil() as usize + 1;
        let ny = ((y1 - y0) / size).ceil() as usize + 1;
        let mut buckets = vec![Vec::new(); nx * ny];
        let mut idx = Self {
            points,
            origin: [x0, y0],
            size,
            nx,
            ny,
            buckets: Vec::new(),
        };
        for (s, p) in points.iter().enumerate() {
            if keep[s] {
                let (bi, bj) = idx.bucket(*p);
                buckets[bj * nx + bi].push(s as u32);
            }
        }
        idx.buckets = buckets;
        idx
    }

    fn bucket(&self, p: [f64; 2]) -> (usize, usize) {
        let bi = ((p[0] - self.origin[0]) / self.size).floor().clamp(0.0, (self.nx - 1) as f64) as usize;
        let bj = ((p[1] - self.origin[1]) / self.size).floor().clamp(0.0, (self.ny - 1) as f64) as usize;
        (bi, bj)
    }

    /// Samples within `radius` of `x`, with their distances.
    fn within(&self, x: [f64; 2], radius: f64, out: &mut Vec<(u32, f64)>) {
        out.clear();
        let (i0, j0) = self.bucket([x[0] - radius, x[1] - radius]);
        let (i1, j1) = self.bucket([x[0] + radius, x[1] + radius]);
        for bj in j0..=j1 {
            for bi in i0..=i1 {
                for &s in &self.buckets[bj * self.nx + bi] {
                    let p = self.points[s as usize];
                    let dist = ((p[0] - x[0]).powi(2) + (p[1] - x[1]).powi(2)).sqrt();
                    if dist <= radius {
                        out.push((s, dist));
                    }
                }
            }
        }
    }

    /// Samples within `slack` of the nearest one, with their distances.
    fn near(&self, x: [f64; 2], slack: f64, out: &mut Vec<(u32, f64)>) {
        out.clear();
        let (ci, cj) = self.bucket(x);
        let mut best = f64::INFINITY;
        let max_ring = self.nx.max(self.ny);
        let mut ring = 0usize;
        // expand rings until no unvisited bucket can beat best + slack
        while ring <= max_ring {
            let reach = (ring as f64 - 1.0).max(0.0) * self.size;
            if reach > best + slack {
                break;
            }
            let (i0, i1) = (ci.saturating_sub(ring), (ci + ring).min(self.nx - 1));
            let (j0, j1) = (cj.saturating_sub(ring), (cj + ring).min(self.ny - 1));
            for bj in j0..=j1 {
                for bi in i0..=i1 {
                    let on_ring = bi + ring == ci || bi == ci + ring || bj + ring == cj || bj == cj + ring;
                    if !on_ring {
                        continue;
                    }
                    for &s in &self.buckets[bj * self.nx + bi] {
                        let p = self.points[s as usize];
                        let dist = ((p[0] - x[0]).powi(2) + (p[1] - x[1]).powi(2)).sqrt();
                        best = best.min(dist);
                        out.push((s, dist));
                    }
                }
            }
            ring += 1;
        }
        out.retain(|&(_, dist)| dist <= best + slack);
    }
}

/// Gaussian average of a boundary field over reliable samples, width
/// `sigma`, truncated at `3 sigma`. Damps grid-scale oscillation of the
/// velocity while keeping it a descent direction.
pub fn smooth_boundary_field(d: &GridDomain, bm: &BoundaryMesh, v: &[Option<f64>], sigma: f64) -> Vec<Option<f64>> {
    if sigma <= 0.0 {
        return v.to_vec();
    }
    let g = *d.grid();
    let keep: Vec<bool> = v.iter().map(|x| x.is_some()).collect();
    let index = SampleIndex::new(&bm.points, &keep, &g, 3.0 * sigma);
    let mut near = Vec::new();
    (0..bm.len())
        .map(|i| {
            v[i]?;
            index.within(bm.points[i], 3.0 * sigma, &mut near);
            let (mut num, mut den) = (0.0, 0.0);
            for &(s, dist) in &near {
                let w = bm.weights[s as usize].max(1e-12) * (-0.5 * (dist / sigma).powi(2)).exp();
                num += w * v[s as usize].unwrap_or(0.0);
                den += w;
            }
            Some(num / den)
        })
        .collect()
}

/// Extends boundary velocities to grid nodes with `|φ| <= BAND_CELLS·h`:
/// the arclength-weighted mean of reliable samples within `h` of the
/// nearest one. Zero outside the band and when no sample is reliable.
pub fn extend_velocity(d: &GridDomain, bm: &BoundaryMesh, v: &[Option<f64>]) -> Vec<f64> {
    let g = *d.grid();
    let h = g.h();
    let keep: Vec<bool> = v.iter().map(|x| x.is_some()).collect();
    let mut out = vec![0.0; g.len()];
    if !keep.iter().any(|&k| k) {
        return out;
    }
    let index = SampleIndex::new(&bm.points, &keep, &g, 4.0 * h);
    let band = BAND_CELLS * h;
    let mut near = Vec::new();
    for (k, o) in out.iter_mut().enumerate() {
        if d.phi()[k].abs() > band {
            continue;
        }
        let (i, j) = g.ij(k);
        index.near(g.node(i, j), h, &mut near);
        let (mut num, mut den) = (0.0, 0.0);
        for &(s, _) in &near {
            let w = bm.weights[s as usize].max(1e-12);
            num += w * v[s as usize].unwrap_or(0.0);
            den += w;
        }
        if den > 0.0 {
            *o = num / den;
        }
    }
    out
}

/// Upwind `|∇φ|` for the motion `φ_t + V|∇φ| = 0`.
pub fn godunov_gradient(g: &Grid, phi: &[f64], speed: &[f64]) -> Vec<f64> {
    let (nx, ny, h) = (g.nx(), g.ny(), g.h());
    let mut out = vec![0.0; g.len()];
    for j in 0..ny {
        for i in 0..nx {
            let k = g.idx(i, j);
            if speed[k] == 0.0 {
                continue;
            }
            let c = phi[k];
            let dm_x = if i > 0 { (c - phi[k - 1]) / h } else { 0.0 };
            let dp_x = if i + 1 < nx { (phi[k + 1] - c) / h } else { 0.0 };
            let dm_y = if j > 0 { (c - phi[k - nx]) / h } else { 0.0 };
            let dp_y = if j + 1 < ny { (phi[k + nx] - c) / h } else { 0.0 };
            out[k] = if speed[k] > 0.0 {
                (dm_x.max(0.0).powi(2).max(dp_x.min(0.0).powi(2)) + dm_y.max(0.0).powi(2).max(dp_y.min(0.0).powi(2))).sqrt()
            } else {
                (dm_x.min(0.0).powi(2).max(dp_x.max(0.0).powi(2)) + dm_y.min(0.0).powi(2).max(dp_y.max(0.0).powi(2))).sqrt()
            };
        }
    }
    out
}

/// `φ ← φ − dt·V·|∇φ|`. Positive `V` expands the domain.
pub fn advect(d: &GridDomain, speed: &[f64], dt: f64) -> Result<GridDomain, crate::domain::DomainError> {
    let grad = godunov_gradient(d.grid(), d.phi(), speed);
    let phi: Vec<f64> = d
        .phi()
        .iter()
        .zip(speed.iter().zip(&grad))
        .map(|(p, (v, gn))| p - dt * v * gn)
        .collect();
    d.evolve(phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{extract_boundary, shapes, volume};
    use crate::objective::Xi0Field;
    use crate::spectral::{solve_spectrum, SpectrumOptions};

    #[test]
    fn zero_velocity_leaves_domain_unchanged() {
        let g = Grid::square(-2.0, 2.0, 64).unwrap();
        let d = shapes::disk(g, [0.0, 0.0], 1.0).unwrap();
        let moved = advect(&d, &vec![0.0; g.len()], 0.3).unwrap();
        assert_eq!(moved.phi(), d.phi());
    }

    #[test]
    fn unit_inward_speed_shrinks_by_dt() {
        let g = Grid::square(-2.0, 2.0, 128).unwrap();
        let h = g.h();
        let d = shapes::disk(g, [0.0, 0.0], 1.0).unwrap();
        let bm = extract_boundary(&d);
        let v = vec![Some(-1.0); bm.len()];
        let ext = extend_velocity(&d, &bm, &v);
        let dt = 0.5 * h;
        let mut cur = d;
        for _ in 0..10 {
            cur = advect(&cur, &ext, dt).unwrap();
        }
        let r = (volume(&cur) / std::f64::consts::PI).sqrt();
        assert!((r - (1.0 - 10.0 * dt)).abs() <= h, "{r}");
    }

    #[test]
    fn pure_volume_term_gives_minus_one() {
        let g = Grid::square(-1.5, 1.5, 64).unwrap();
        let d = shapes::disk(g, [0.0, 0.0], 1.0).unwrap();
        let sp = solve_spectrum(&d, &SpectrumOptions::new(1)).unwrap();
        let bm = extract_boundary(&d);
        let w = WeightVector::new(vec![0.0], &sp.lambdas, 1e-3, Xi0Field::constant());
        for v in shape_velocity(&sp, &w, &bm, &d).into_iter().flatten() {
            assert_eq!(v, -1.0);
        }
    }

    #[test]
    fn extension_copies_nearest_sample() {
        let g = Grid::square(-2.0, 2.0, 64).unwrap();
        let d = shapes::disk(g, [0.0, 0.0], 1.0).unwrap();
        let bm = extract_boundary(&d);
        // velocity equal to the polar angle's cosine
        let v: Vec<Option<f64>> = bm.points.iter().map(|p| Some(p[0] / (p[0].hypot(p[1])))).collect();
        let ext = extend_velocity(&d, &bm, &v);
        for (k, (&e, &phi)) in ext.iter().zip(d.phi()).enumerate() {
            let (i, j) = g.ij(k);
            let x = g.node(i, j);
            if phi.abs() <= 6.0 * g.h() && x[0].hypot(x[1]) > 0.5 {
                assert!((e - x[0] / x[0].hypot(x[1])).abs() < 0.05, "{x:?}");
            }
            if phi.abs() > BAND_CELLS * g.h() {
                assert_eq!(e, 0.0);
            }
        }
    }
}
