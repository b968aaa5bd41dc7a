//! Block Lanczos on `A^{-1}` with full reorthogonalization.
//!
//! The Krylov basis is kept explicitly together with its image under
//! `A^{-1}`, so Rayleigh–Ritz uses the exact projection `V^T A^{-1} V`
//! rather than the block-tridiagonal recurrence. A block of size `b` resolves
//! eigenvalue multiplicities up to `b`.

use super::laplacian::DirichletLaplacian;
use super::skyline::{dot, SkylineCholesky};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct LanczosParams {
    /// eigenpairs that must meet `tol`
    pub want: usize,
    pub block: usize,
    pub tol: f64,
    pub seed: u64,
    pub max_basis: usize,
    pub max_restarts: usize,
    /// optional start vectors over the unknowns; padded with random vectors
    pub start: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    /// Euclidean-normalized eigenvectors over the unknowns
    pub vectors: Vec<Vec<f64>>,
    /// `||A x - lambda x|| / lambda`
    pub residuals: Vec<f64>,
    pub converged: bool,
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// Orthogonalizes `w` against `basis` (two passes) and returns its residual norm.
fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) -> f64 {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, w);
            axpy(w, -c, q);
        }
    }
    norm(w)
}

fn apply_inverse(chol: &SkylineCholesky, block: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = chol.len();
    let b = block.len();
    let mut packed = vec![0.0; n * b];
    for (c, v) in block.iter().enumerate() {
        for (i, x) in v.iter().enumerate() {
            packed[i * b + c] = *x;
        }
    }
    chol.solve_many(&mut packed, b);
    (0..b).map(|c| (0..n).map(|i| packed[i * b + c]).collect()).collect()
}

pub fn lowest_eigenpairs(a: &DirichletLaplacian, chol: &SkylineCholesky, p: &LanczosParams) -> EigenPairs {
    let n = a.len();
    let block = p.block.min(n).max(1);
    let want = p.want.min(block);
    let max_basis = p.max_basis.min(n).max(block);
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let random_vec = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect() };

    let mut start: Vec<Vec<f64>> = p
        .start
        .iter()
        .flatten()
        .filter(|v| v.len() == n && v.iter().all(|x| x.is_finite()))
        .take(block)
        .cloned()
        .collect();
    while start.len() < block {
        start.push(random_vec(&mut rng));
    }
    let mut best = EigenPairs {
        values: vec![],
        vectors: vec![],
        residuals: vec![f64::INFINITY; want],
        converged: false,
    };
    let mut scratch = vec![0.0; n];

    for _restart in 0..=p.max_restarts {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_basis);
        let mut images: Vec<Vec<f64>> = Vec::with_capacity(max_basis);
        let mut next: Vec<Vec<f64>> = std::mem::take(&mut start);
        let mut proj = DMatrix::<f64>::zeros(0, 0);

        while basis.len() < max_basis {
            // orthonormalize the incoming block against the basis and itself
            let mut accepted = Vec::with_capacity(next.len());
            for mut w in next.drain(..) {
                let scale = norm(&w).max(1e-300);
                let mut r = orthogonalize(&mut w, &basis);
                r = r.min(orthogonalize(&mut w, &accepted));
                if r < 1e-10 * scale {
                    // breakdown: replace with a fresh random direction
                    w = random_vec(&mut rng);
                    orthogonalize(&mut w, &basis);
                    r = orthogonalize(&mut w, &accepted);
                }
                w.iter_mut().for_each(|x| *x /= r);
                accepted.push(w);
                if basis.len() + accepted.len() >= max_basis {
                    break;
                }
            }
            let imgs = apply_inverse(chol, &accepted);
            let m0 = basis.len();
            let m1 = m0 + accepted.len();
            let mut grown = DMatrix::<f64>::zeros(m1, m1);
            grown.view_mut((0, 0), (m0, m0)).copy_from(&proj);
            basis.extend(accepted);
            for (c, img) in imgs.iter().enumerate() {
                let col = m0 + c;
                for r in 0..m1 {
                    let v = dot(&basis[r], img);
                    grown[(r, col)] = v;
                    grown[(col, r)] = v;
                }
            }
            images.extend(imgs);
            proj = grown;
            next = images[m0..m1].to_vec();

            if basis.len() < 2 * block && basis.len() < max_basis {
                continue;
            }

            let sym = 0.5 * (&proj + proj.transpose());
            let eig = SymmetricEigen::new(sym);
            let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
            order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));

            let mut values = Vec::with_capacity(block);
            let mut vectors = Vec::with_capacity(block);
            let mut residuals = Vec::with_capacity(block);
            for &col in order.iter().take(block) {
                let mut x = vec![0.0; n];
                for (r, q) in basis.iter().enumerate() {
                    axpy(&mut x, eig.eigenvectors[(r, col)], q);
                }
                let nx = norm(&x);
                x.iter_mut().for_each(|v| *v /= nx);
                a.apply(&x, &mut scratch);
                let lambda = dot(&x, &scratch);
                axpy(&mut scratch, -lambda, &x);
                residuals.push(norm(&scratch) / lambda.abs().max(1e-300));
                values.push(lambda);
                vectors.push(x);
            }
            let done = residuals.iter().take(want).all(|&r| r <= p.tol);
            best = EigenPairs {
                values,
                vectors,
                residuals,
                converged: done,
            };
            if done {
                return sort_pairs(best);
            }
        }
        start = best.vectors.clone();
        if start.len() < block {
            start.extend((start.len()..block).map(|_| random_vec(&mut rng)));
        }
    }
    sort_pairs(best)
}

fn sort_pairs(mut e: EigenPairs) -> EigenPairs {
    let mut idx: Vec<usize> = (0..e.values.len()).collect();
    idx.sort_by(|&a, &b| e.values[a].total_cmp(&e.values[b]));
    e.values = idx.iter().map(|&k| e.values[k]).collect();
    e.residuals = idx.iter().map(|&k| e.residuals[k]).collect();
    let mut vecs = std::mem::take(&mut e.vectors);
    e.vectors = idx.iter().map(|&k| std::mem::take(&mut vecs[k])).collect();
    e
}
