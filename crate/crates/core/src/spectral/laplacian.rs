//! Five-point Dirichlet Laplacian on the interior nodes of a domain.
//!
//! A boundary-adjacent row whose neighbour `q` lies outside gets the
//! diagonal contribution `1 / (theta h^2)`, where `theta h` is the distance to
//! the zero crossing on that edge. This is the ghost-value elimination of
//! `u_q = u_p (theta - 1) / theta`; it only touches the diagonal, so the
//! matrix stays symmetric and an M-matrix.

use crate::domain::GridDomain;

/// Smallest admissible boundary fraction on a cut edge.
pub const THETA_MIN: f64 = 1e-3;

pub(crate) const NONE: u32 = u32::MAX;

/// Fraction of the edge `p -> q` lying inside, for `phi_p < 0 <= phi_q`.
#[inline]
pub fn cut_fraction(phi_p: f64, phi_q: f64) -> f64 {
    (phi_p / (phi_p - phi_q)).clamp(THETA_MIN, 1.0)
}

/// Sparse symmetric operator in stencil form, over renumbered unknowns.
#[derive(Debug, Clone)]
pub struct DirichletLaplacian {
    /// grid node of each unknown
    pub(crate) nodes: Vec<usize>,
    pub(crate) diag: Vec<f64>,
    /// left, right, down, up neighbours as unknown indices
    pub(crate) nbrs: Vec<[u32; 4]>,
    pub(crate) off: f64,
}

impl DirichletLaplacian {
    pub fn assemble(d: &GridDomain) -> Self {
        let g = d.grid();
        let phi = d.phi();
        let (nx, ny) = (g.nx(), g.ny());
        let inv_h2 = 1.0 / (g.h() * g.h());

        // pick the sweep direction that keeps the profile narrow
        let (mut imin, mut imax, mut jmin, mut jmax) = (usize::MAX, 0, usize::MAX, 0);
        for (k, &v) in phi.iter().enumerate() {
            if v < 0.0 {
                let (i, j) = g.ij(k);
                imin = imin.min(i);
                imax = imax.max(i);
                jmin = jmin.min(j);
                jmax = jmax.max(j);
            }
        }
        let x_fastest = imax.saturating_sub(imin) <= jmax.saturating_sub(jmin);
        let mut nodes = Vec::new();
        if x_fastest {
            for j in 0..ny {
                for i in 0..nx {
                    let k = g.idx(i, j);
                    if phi[k] < 0.0 {
                        nodes.push(k);
                    }
                }
            }
        } else {
            for i in 0..nx {
                for j in 0..ny {
                    let k = g.idx(i, j);
                    if phi[k] < 0.0 {
                        nodes.push(k);
                    }
                }
            }
        }
        let mut unknown = vec![NONE; g.len()];
        for (u, &k) in nodes.iter().enumerate() {
            unknown[k] = u as u32;
        }

        let mut diag = vec![0.0; nodes.len()];
        let mut nbrs = vec![[NONE; 4]; nodes.len()];
        for (u, &k) in nodes.iter().enumerate() {
            let (i, j) = g.ij(k);
            let candidates = [
                (i > 0).then(|| k - 1),
                (i + 1 < nx).then(|| k + 1),
                (j > 0).then(|| k - nx),
                (j + 1 < ny).then(|| k + nx),
            ];
            let mut dsum = 0.0;
            for (s, c) in candidates.iter().enumerate() {
                match c {
                    Some(q) if unknown[*q] != NONE => {
                        nbrs[u][s] = unknown[*q];
                        dsum += inv_h2;
                    }
                    Some(q) => dsum += inv_h2 / cut_fraction(phi[k], phi[*q]),
                    // the box wall sits half a cell beyond the outermost node
                    None => dsum += inv_h2 / 0.5,
                }
            }
            diag[u] = dsum;
        }
        Self {
            nodes,
            diag,
            nbrs,
            off: -inv_h2,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (u, yu) in y.iter_mut().enumerate() {
            let mut s = self.diag[u] * x[u];
            for &q in &self.nbrs[u] {
                if q != NONE {
                    s += self.off * x[q as usize];
                }
            }
            *yu = s;
        }
    }

    /// Scatter unknowns to a full grid field, zero on inactive nodes.
    pub fn scatter(&self, x: &[f64], grid_len: usize) -> Vec<f64> {
        let mut out = vec![0.0; grid_len];
        for (u, &k) in self.nodes.iter().enumerate() {
            out[k] = x[u];
        }
        out
    }

    /// Gather a full grid field onto the unknowns.
    pub fn gather(&self, field: &[f64]) -> Vec<f64> {
        self.nodes.iter().map(|&k| field[k]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{shapes, Grid};

    #[test]
    fn operator_is_symmetric() {
        let g = Grid::square(-1.5, 1.5, 40).unwrap();
        let d = shapes::random_blob(g, [0.0, 0.0], 1.0, 0.3, 3).unwrap();
        let a = DirichletLaplacian::assemble(&d);
        for u in 0..a.len() {
            for &q in &a.nbrs[u] {
                if q != NONE {
                    assert!(a.nbrs[q as usize].contains(&(u as u32)));
                }
            }
            assert!(a.diag[u] >= 4.0 * -a.off - 1e-9);
        }
    }

    #[test]
    fn cut_fraction_limits() {
        assert_eq!(cut_fraction(-1.0, 1.0), 0.5);
        assert_eq!(cut_fraction(-1e-9, 1.0), THETA_MIN);
        assert_eq!(cut_fraction(-1.0, 0.0), 1.0);
    }
}
