use super::{Grid, GridDomain};

/// Boundary samples: one per grid edge whose endpoints straddle the zero
/// level. Weights are half the lengths of the adjacent marching-squares
/// segments, so `Σ w` is the length of the reconstructed contour.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundaryMesh {
    pub points: Vec<[f64; 2]>,
    pub normals: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl BoundaryMesh {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn perimeter(&self) -> f64 {
        self.weights.iter().sum()
    }
}

const NONE: usize = usize::MAX;

struct EdgeTable {
    horizontal: usize,
    nx: usize,
}

impl EdgeTable {
    fn new(g: &Grid) -> Self {
        Self {
            horizontal: (g.nx() - 1) * g.ny(),
            nx: g.nx(),
        }
    }

    fn h(&self, i: usize, j: usize) -> usize {
        j * (self.nx - 1) + i
    }

    fn v(&self, i: usize, j: usize) -> usize {
        self.horizontal + j * self.nx + i
    }
}

pub fn extract_boundary(d: &GridDomain) -> BoundaryMesh {
    let g = d.grid();
    let phi = d.phi();
    let (nx, ny) = (g.nx(), g.ny());
    let edges = EdgeTable::new(g);
    let mut sample_of = vec![NONE; edges.horizontal + nx * (ny - 1)];
    let mut mesh = BoundaryMesh::default();

    let add = |mesh: &mut BoundaryMesh, a: (usize, usize), b: (usize, usize)| -> usize {
        let ia = g.idx(a.0, a.1);
        let ib = g.idx(b.0, b.1);
        let (pa, pb) = (phi[ia], phi[ib]);
        let theta = pa / (pa - pb);
        let xa = g.node(a.0, a.1);
        let xb = g.node(b.0, b.1);
        let p = [xa[0] + theta * (xb[0] - xa[0]), xa[1] + theta * (xb[1] - xa[1])];
        let ga = g.node_gradient(phi, a.0, a.1);
        let gb = g.node_gradient(phi, b.0, b.1);
        let mut n = [(1.0 - theta) * ga[0] + theta * gb[0], (1.0 - theta) * ga[1] + theta * gb[1]];
        let norm = (n[0] * n[0] + n[1] * n[1]).sqrt();
        if norm > 1e-12 {
            n = [n[0] / norm, n[1] / norm];
        } else {
            // degenerate gradient: point from the interior node to the exterior one
            let s = if pa < 0.0 { 1.0 } else { -1.0 };
            let e = [(xb[0] - xa[0]) / g.h(), (xb[1] - xa[1]) / g.h()];
            n = [s * e[0], s * e[1]];
        }
        mesh.points.push(p);
        mesh.normals.push(n);
        mesh.weights.push(0.0);
        mesh.points.len() - 1
    };

    let straddles = |a: usize, b: usize| (phi[a] < 0.0) != (phi[b] < 0.0);

    for j in 0..ny {
        for i in 0..nx - 1 {
            if straddles(g.idx(i, j), g.idx(i + 1, j)) {
                sample_of[edges.h(i, j)] = add(&mut mesh, (i, j), (i + 1, j));
            }
        }
    }
    for j in 0..ny - 1 {
        for i in 0..nx {
            if straddles(g.idx(i, j), g.idx(i, j + 1)) {
                sample_of[edges.v(i, j)] = add(&mut mesh, (i, j), (i, j + 1));
            }
        }
    }

    let link = |mesh: &mut BoundaryMesh, a: usize, b: usize| {
        if a == NONE || b == NONE {
            return;
        }
        let pa = mesh.points[a];
        let pb = mesh.points[b];
        let len = ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt();
        mesh.weights[a] += 0.5 * len;
        mesh.weights[b] += 0.5 * len;
    };

    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let c = [g.idx(i, j), g.idx(i + 1, j), g.idx(i + 1, j + 1), g.idx(i, j + 1)];
            // bottom, right, top, left
            let e = [
                sample_of[edges.h(i, j)],
                sample_of[edges.v(i + 1, j)],
                sample_of[edges.h(i, j + 1)],
                sample_of[edges.v(i, j)],
            ];
            let cut: Vec<usize> = (0..4).filter(|&k| e[k] != NONE).collect();
            match cut.len() {
                2 => link(&mut mesh, e[cut[0]], e[cut[1]]),
                4 => {
                    let center = 0.25 * c.iter().map(|&k| phi[k]).sum::<f64>();
                    if (center < 0.0) == (phi[c[0]] < 0.0) {
                        link(&mut mesh, e[0], e[1]);
                        link(&mut mesh, e[2], e[3]);
                    } else {
                        link(&mut mesh, e[3], e[0]);
                        link(&mut mesh, e[1], e[2]);
                    }
                }
                _ => {}
            }
        }
    }
    mesh
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Grid, GridDomain};
    use std::f64::consts::PI;

    #[test]
    fn disk_perimeter_and_normals() {
        let g = Grid::square(-2.0, 2.0, 128).unwrap();
        let d = GridDomain::from_fn(g, |x, y| (x * x + y * y).sqrt() - 1.0).unwrap();
        let bm = extract_boundary(&d);
        assert!((bm.perimeter() - 2.0 * PI).abs() <= 0.05 * 2.0 * PI, "{}", bm.perimeter());
        for (p, n) in bm.points.iter().zip(&bm.normals) {
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            assert!(((n[0] * n[0] + n[1] * n[1]).sqrt() - 1.0).abs() < 1e-12);
            assert!((n[0] * p[0] + n[1] * p[1]) / r >= 0.99);
        }
    }

    #[test]
    fn flat_boundary_normals() {
        let g = Grid::square(-1.0, 1.0, 32).unwrap();
        let d = GridDomain::from_fn(g, |_, y| y).unwrap();
        let bm = extract_boundary(&d);
        assert_eq!(bm.len(), 32);
        for n in &bm.normals {
            assert!(n[0].abs() < 1e-6 && (n[1] - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn empty_domain_gives_empty_mesh() {
        let g = Grid::square(-1.0, 1.0, 16).unwrap();
        let d = GridDomain::new(g, vec![1.0; g.len()]).unwrap();
        assert!(extract_boundary(&d).is_empty());
    }
}
