//! Envelope (skyline) Cholesky factorization `A = L L^T`.

use super::laplacian::{DirichletLaplacian, NONE};

#[derive(Debug, Clone)]
pub struct SkylineCholesky {
    n: usize,
    /// first stored column of each row
    first: Vec<usize>,
    /// offset of row `i`'s first stored entry in `vals`
    start: Vec<usize>,
    vals: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NotPositiveDefinite {
    pub row: usize,
    pub pivot: f64,
}

impl SkylineCholesky {
    pub fn factor(a: &DirichletLaplacian) -> Result<Self, NotPositiveDefinite> {
        let n = a.len();
        let mut first = vec![0usize; n];
        let mut start = vec![0usize; n + 1];
        for i in 0..n {
            let lo = a.nbrs[i].iter().filter(|&&q| q != NONE).map(|&q| q as usize).filter(|&q| q < i).min();
            first[i] = lo.unwrap_or(i);
            start[i + 1] = start[i] + (i - first[i] + 1);
        }
        let mut vals = vec![0.0; start[n]];
        for i in 0..n {
            vals[start[i] + i - first[i]] = a.diag[i];
            for &q in &a.nbrs[i] {
                if q != NONE && (q as usize) < i {
                    vals[start[i] + q as usize - first[i]] = a.off;
                }
            }
        }
        for i in 0..n {
            let (fi, si) = (first[i], start[i]);
            for j in fi..=i {
                let (fj, sj) = (first[j], start[j]);
                let lo = fi.max(fj);
                let mut s = vals[si + j - fi];
                if lo < j {
                    let ri = &vals[si + lo - fi..si + j - fi];
                    let rj = &vals[sj + lo - fj..sj + j - fj];
                    s -= dot(ri, rj);
                }
                if j == i {
                    if !(s > 0.0) {
                        return Err(NotPositiveDefinite { row: i, pivot: s });
                    }
                    vals[si + i - fi] = s.sqrt();
                } else {
                    vals[si + j - fi] = s / vals[sj + j - fj];
                }
            }
        }
        Ok(Self { n, first, start, vals })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Solves in place for `nrhs` right-hand sides stored interleaved:
    /// entry `(row, c)` at `b[row * nrhs + c]`.
    pub fn solve_many(&self, b: &mut [f64], nrhs: usize) {
        let n = self.n;
        debug_assert_eq!(b.len(), n * nrhs);
        let mut acc = vec![0.0; nrhs];
        for i in 0..n {
            let (fi, si) = (self.first[i], self.start[i]);
            acc.copy_from_slice(&b[i * nrhs..(i + 1) * nrhs]);
            for k in fi..i {
                let l = self.vals[si + k - fi];
                let row = &b[k * nrhs..(k + 1) * nrhs];
                for (a, r) in acc.iter_mut().zip(row) {
                    *a -= l * r;
                }
            }
            let d = self.vals[si + i - fi];
            for (dst, a) in b[i * nrhs..(i + 1) * nrhs].iter_mut().zip(&acc) {
                *dst = a / d;
            }
        }
        for i in (0..n).rev() {
            let (fi, si) = (self.first[i], self.start[i]);
            let d = self.vals[si + i - fi];
            for c in 0..nrhs {
                b[i * nrhs + c] /= d;
            }
            acc.copy_from_slice(&b[i * nrhs..(i + 1) * nrhs]);
            for k in fi..i {
                let l = self.vals[si + k - fi];
                let row = &mut b[k * nrhs..(k + 1) * nrhs];
                for (r, a) in row.iter_mut().zip(&acc) {
                    *r -= l * a;
                }
            }
        }
    }

    pub fn solve(&self, b: &mut [f64]) {
        self.solve_many(b, 1);
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four accumulators keep the loop vectorizable
    let mut s = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for l in 0..4 {
            s[l] += a[4 * c + l] * b[4 * c + l];
        }
    }
    let mut t = (s[0] + s[1]) + (s[2] + s[3]);
    for k in 4 * chunks..a.len() {
        t += a[k] * b[k];
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{shapes, Grid};

    #[test]
    fn solves_against_the_stencil() {
        let g = Grid::square(-1.5, 1.5, 48).unwrap();
        let d = shapes::random_blob(g, [0.1, -0.2], 1.0, 0.3, 5).unwrap();
        let a = DirichletLaplacian::assemble(&d);
        let chol = SkylineCholesky::factor(&a).unwrap();
        let n = a.len();
        let x: Vec<f64> = (0..n).map(|k| ((k * 7919) % 101) as f64 / 50.0 - 1.0).collect();
        let mut b = vec![0.0; n];
        a.apply(&x, &mut b);
        chol.solve(&mut b);
        let err = x.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");

        // multiple right-hand sides agree with single solves
        let mut many = vec![0.0; 2 * n];
        let mut b0 = vec![0.0; n];
        a.apply(&x, &mut b0);
        for k in 0..n {
            many[2 * k] = b0[k];
            many[2 * k + 1] = 1.0;
        }
        chol.solve_many(&mut many, 2);
        let mut ones = vec![1.0; n];
        chol.solve(&mut ones);
        for k in 0..n {
            assert!((many[2 * k] - x[k]).abs() < 1e-9);
            assert!((many[2 * k + 1] - ones[k]).abs() < 1e-12 * ones[k].abs().max(1.0));
        }
    }
}
