//! Dirichlet eigenpairs and the torsion function on grid domains.

mod lanczos;
mod laplacian;
mod skyline;

pub use lanczos::{lowest_eigenpairs, EigenPairs, LanczosParams};
pub use laplacian::{cut_fraction, DirichletLaplacian, THETA_MIN};
pub use skyline::{NotPositiveDefinite, SkylineCholesky};

use crate::domain::{BoundaryMesh, DomainError, Grid, GridDomain};
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

/// Relative gap below which neighbouring eigenvalues form a cluster.
pub const CLUSTER_REL_GAP: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("domain has {active} interior nodes, need at least {needed}")]
    TooFewNodes { active: usize, needed: usize },
    #[error("eigensolver did not converge; relative residuals {residuals:?}")]
    NotConverged { residuals: Vec<f64> },
    #[error("factorization failed at row {row} (pivot {pivot})")]
    Factorization { row: usize, pivot: f64 },
    #[error(transparent)]
    Domain(#[from] DomainError),
}

impl From<NotPositiveDefinite> for SpectralError {
    fn from(e: NotPositiveDefinite) -> Self {
        SpectralError::Factorization { row: e.row, pivot: e.pivot }
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumOptions {
    pub count: usize,
    /// relative residual `||A u - lambda u|| / lambda`
    pub tol: f64,
    pub seed: u64,
    /// extra block vectors carried along to keep clusters ordered
    pub guard: usize,
    /// full-grid fields used to start the eigensolver, typically the modes
    /// of a nearby domain
    pub warm_start: Option<Vec<Vec<f64>>>,
}

impl SpectrumOptions {
    pub fn new(count: usize) -> Self {
        Self {
            count,
            tol: 1e-8,
            seed: 0x5eed,
            guard: 2,
            warm_start: None,
        }
    }

    pub fn with_warm_start(mut self, fields: Vec<Vec<f64>>) -> Self {
        self.warm_start = Some(fields);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

/// The lowest `M` Dirichlet eigenpairs of a domain.
///
/// Modes are full grid fields, zero on exterior nodes, normalized so that
/// `Σ u_i u_j h^2 = δ_ij`; each mode's largest-magnitude entry is positive.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub lambdas: Vec<f64>,
    pub modes: Vec<Vec<f64>>,
    pub resid: Vec<f64>,
    /// generation of the domain this was computed on
    pub generation: u64,
    pub grid: Grid,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// Partition of `0..len` into runs whose consecutive relative gaps are
    /// below `rel_gap`.
    pub fn clusters(&self, rel_gap: f64) -> Vec<Vec<usize>> {
        clusters_of(&self.lambdas, rel_gap)
    }

    /// Grid-quadrature inner product of two modes.
    pub fn inner(&self, a: usize, b: usize) -> f64 {
        skyline::dot(&self.modes[a], &self.modes[b]) * self.grid.cell_area()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,lambda,resid\n");
        for (k, (l, r)) in self.lambdas.iter().zip(&self.resid).enumerate() {
            let _ = writeln!(s, "{},{},{}", k + 1, l, r);
        }
        s
    }

    /// Writes `spectrum.csv` plus one `mode_<k>.dump` per eigenfunction.
    pub fn export(&self, dir: &Path) -> Result<(), DomainError> {
        std::fs::write(dir.join("spectrum.csv"), self.to_csv())?;
        for (k, m) in self.modes.iter().enumerate() {
            crate::domain::write_grid_dump(&dir.join(format!("mode_{}.dump", k + 1)), &self.grid, m)?;
        }
        Ok(())
    }
}

pub fn clusters_of(values: &[f64], rel_gap: f64) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (k, &l) in values.iter().enumerate() {
        match out.last_mut() {
            Some(c) if (l - values[k - 1]) <= rel_gap * values[k - 1].abs() => c.push(k),
            _ => out.push(vec![k]),
        }
    }
    out
}

pub fn solve_spectrum(d: &GridDomain, opts: &SpectrumOptions) -> Result<Spectrum, SpectralError> {
    let active = d.active_count();
    if active == 0 {
        return Err(DomainError::Empty.into());
    }
    let needed = opts.count + 5;
    if opts.count == 0 || active < needed {
        return Err(SpectralError::TooFewNodes { active, needed });
    }
    let a = DirichletLaplacian::assemble(d);
    let chol = SkylineCholesky::factor(&a)?;
    let block = opts.count + opts.guard;
    let params = LanczosParams {
        want: opts.count,
        block,
        tol: opts.tol,
        seed: opts.seed,
        max_basis: (24 * block).max(120),
        max_restarts: 12,
        start: opts.warm_start.as_ref().map(|fs| {
            fs.iter()
                .filter(|f| f.len() == d.grid().len())
                .map(|f| a.gather(f))
                .collect()
        }),
    };
    let pairs = lowest_eigenpairs(&a, &chol, &params);
    if !pairs.converged {
        return Err(SpectralError::NotConverged {
            residuals: pairs.residuals.into_iter().take(opts.count).collect(),
        });
    }
    let g = *d.grid();
    let scale = 1.0 / g.h();
    let modes = pairs
        .vectors
        .iter()
        .take(opts.count)
        .map(|x| {
            let peak = x.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
            let s = if peak < 0.0 { -scale } else { scale };
            let scaled: Vec<f64> = x.iter().map(|v| v * s).collect();
            a.scatter(&scaled, g.len())
        })
        .collect();
    Ok(Spectrum {
        lambdas: pairs.values[..opts.count].to_vec(),
        modes,
        resid: pairs.residuals[..opts.count].to_vec(),
        generation: d.generation(),
        grid: g,
    })
}

/// Solution of `-Δv = 1` in the domain with `v = 0` outside.
#[derive(Debug, Clone)]
pub struct TorsionField {
    pub v: Vec<f64>,
    /// `T = ∫ ½|∇v|² - v = -½ ∫ v`
    pub energy: f64,
    pub grid: Grid,
}

impl TorsionField {
    pub fn max(&self) -> f64 {
        self.v.iter().copied().fold(0.0, f64::max)
    }
}

pub fn solve_torsion(d: &GridDomain) -> Result<TorsionField, SpectralError> {
    d.ensure_nonempty()?;
    let a = DirichletLaplacian::assemble(d);
    let chol = SkylineCholesky::factor(&a)?;
    let mut rhs = vec![1.0; a.len()];
    chol.solve(&mut rhs);
    let g = *d.grid();
    let v = a.scatter(&rhs, g.len());
    let energy = -0.5 * v.iter().sum::<f64>() * g.cell_area();
    Ok(TorsionField { v, energy, grid: g })
}

/// Extends a field that vanishes outside the domain one layer across the
/// boundary, using the same ghost values as the discrete Laplacian. The
/// bilinear interpolant of the result is linear across cut cells.
pub fn extend_across_boundary(d: &GridDomain, field: &[f64]) -> Vec<f64> {
    let g = d.grid();
    let phi = d.phi();
    let (nx, ny) = (g.nx(), g.ny());
    let mut out = field.to_vec();
    for j in 0..ny {
        for i in 0..nx {
            let q = g.idx(i, j);
            if phi[q] < 0.0 {
                continue;
            }
            let mut sum = 0.0;
            let mut cnt = 0;
            let nb = [
                (i > 0).then(|| q - 1),
                (i + 1 < nx).then(|| q + 1),
                (j > 0).then(|| q - nx),
                (j + 1 < ny).then(|| q + nx),
            ];
            for p in nb.into_iter().flatten() {
                if phi[p] < 0.0 {
                    let theta = cut_fraction(phi[p], phi[q]);
                    sum += field[p] * (theta - 1.0) / theta;
                    cnt += 1;
                }
            }
            out[q] = if cnt > 0 { sum / cnt as f64 } else { 0.0 };
        }
    }
    out
}

/// Inward probe distances, in cells, for [`normal_derivative`].
pub const PROBE_NEAR: f64 = 1.5;
pub const PROBE_FAR: f64 = 3.0;

/// `|∂u/∂ν|` at each boundary sample from two inward probes, Richardson
/// extrapolated to the boundary. `None` marks samples whose probes leave
/// the domain or the grid.
pub fn normal_derivative(field: &[f64], bm: &BoundaryMesh, d: &GridDomain) -> Vec<Option<f64>> {
    let ext = extend_across_boundary(d, field);
    normal_derivative_extended(&ext, bm, d)
}

pub(crate) fn normal_derivative_extended(ext: &[f64], bm: &BoundaryMesh, d: &GridDomain) -> Vec<Option<f64>> {
    let g = d.grid();
    let h = g.h();
    let (d1, d2) = (PROBE_NEAR * h, PROBE_FAR * h);
    bm.points
        .iter()
        .zip(&bm.normals)
        .map(|(x, nu)| {
            let p1 = [x[0] - d1 * nu[0], x[1] - d1 * nu[1]];
            let p2 = [x[0] - d2 * nu[0], x[1] - d2 * nu[1]];
            if !(g.in_node_hull(p1) && g.in_node_hull(p2) && d.contains(p1) && d.contains(p2)) {
                return None;
            }
            let s1 = g.interpolate(ext, p1) / d1;
            let s2 = g.interpolate(ext, p2) / d2;
            Some((2.0 * s1 - s2).abs())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{extract_boundary, shapes};

    #[test]
    fn clusters_group_close_values() {
        assert_eq!(clusters_of(&[1.0, 2.0, 2.0005, 3.0], 1e-3), vec![vec![0], vec![1, 2], vec![3]]);
        assert_eq!(clusters_of(&[1.0], 1e-3), vec![vec![0]]);
    }

    #[test]
    fn spectrum_rejects_tiny_domains_and_zero_count() {
        let g = Grid::square(-1.0, 1.0, 16).unwrap();
        let d = shapes::disk(g, [0.0, 0.0], 0.15).unwrap();
        assert!(matches!(solve_spectrum(&d, &SpectrumOptions::new(3)), Err(SpectralError::TooFewNodes { .. })));
        let big = shapes::disk(g, [0.0, 0.0], 0.8).unwrap();
        assert!(matches!(solve_spectrum(&big, &SpectrumOptions::new(0)), Err(SpectralError::TooFewNodes { .. })));
    }

    #[test]
    fn torsion_of_empty_domain_fails() {
        let g = Grid::square(-1.0, 1.0, 16).unwrap();
        let d = GridDomain::new(g, vec![1.0; g.len()]).unwrap();
        assert!(solve_torsion(&d).is_err());
    }

    #[test]
    fn normal_derivative_of_linear_profile() {
        let g = Grid::square(-1.0, 1.0, 64).unwrap();
        let d = GridDomain::from_fn(g, |_, y| y).unwrap();
        let u: Vec<f64> = (0..g.len()).map(|k| (-g.node(k % 64, k / 64)[1]).max(0.0)).collect();
        let bm = extract_boundary(&d);
        let du = normal_derivative(&u, &bm, &d);
        for v in du.iter().flatten() {
            assert!((v - 1.0).abs() <= 0.05, "{v}");
        }
        assert!(du.iter().flatten().count() > 50);
        let zero = normal_derivative(&vec![0.0; g.len()], &bm, &d);
        assert!(zero.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn square_eigenvalues_on_a_coarse_grid() {
        let g = Grid::square(-0.25, 1.25, 96).unwrap();
        let d = shapes::rectangle(g, [0.0, 1.0, 0.0, 1.0]).unwrap();
        let sp = solve_spectrum(&d, &SpectrumOptions::new(4)).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((sp.lambdas[0] / (2.0 * pi2) - 1.0).abs() < 0.01, "{:?}", sp.lambdas);
        assert!((sp.lambdas[1] / (5.0 * pi2) - 1.0).abs() < 0.02, "{:?}", sp.lambdas);
        for k in 0..4 {
            assert!(sp.resid[k] <= 1e-8);
            for l in 0..4 {
                let e = sp.inner(k, l) - if k == l { 1.0 } else { 0.0 };
                assert!(e.abs() < 1e-6);
            }
        }
    }
}
