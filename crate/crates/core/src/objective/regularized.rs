use super::{gauss_legendre, ObjectiveError, ObjectiveSpec, Xi0Field};
use crate::spectral::clusters_of;

/// Exponent and quadrature order of the regularized objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizationParams {
    pub p: f64,
    /// Gauss nodes per dimension for the averaging integral
    pub quad_nodes: usize,
}

impl RegularizationParams {
    pub fn new(p: f64) -> Result<Self, ObjectiveError> {
        Self::with_nodes(p, 4)
    }

    pub fn with_nodes(p: f64, quad_nodes: usize) -> Result<Self, ObjectiveError> {
        if !(p.is_finite() && p >= 2.0) {
            return Err(ObjectiveError::BadExponent(p));
        }
        if quad_nodes < 2 {
            return Err(ObjectiveError::BadQuadrature(quad_nodes));
        }
        Ok(Self { p, quad_nodes })
    }
}

/// `(Σ_{l<=k} κ_l^p)^{1/p}` in overflow-safe form; `k` is 1-based.
pub fn tau_kp(kappa: &[f64], k: usize, p: f64) -> f64 {
    let head = &kappa[..k];
    let m = head.iter().copied().fold(0.0f64, f64::max);
    if m <= 0.0 {
        return 0.0;
    }
    let s: f64 = head.iter().map(|&x| (p * (x / m).ln()).exp()).sum();
    m * (s.ln() / p).exp()
}

fn all_taus(kappa: &[f64], p: f64) -> Vec<f64> {
    (1..=kappa.len()).map(|k| tau_kp(kappa, k, p)).collect()
}

/// Visits every tensor quadrature point of `[0, 1/p]^N` with its weight.
fn for_each_cube_point(n: usize, reg: &RegularizationParams, mut f: impl FnMut(&[f64], f64)) {
    let (x, w) = gauss_legendre(reg.quad_nodes);
    let q = reg.quad_nodes;
    let mut digits = vec![0usize; n];
    let mut zeta = vec![0.0; n];
    loop {
        let mut weight = 1.0;
        for (d, &i) in digits.iter().enumerate() {
            zeta[d] = x[i] / reg.p;
            weight *= w[i];
        }
        f(&zeta, weight);
        let mut d = 0;
        while d < n {
            digits[d] += 1;
            if digits[d] < q {
                break;
            }
            digits[d] = 0;
            d += 1;
        }
        if d == n {
            return;
        }
    }
}

/// `G_p(κ)`: mean of `F` over the cube `κ + [0, 1/p]^N`.
pub fn eval_gp(spec: &ObjectiveSpec, kappa: &[f64], reg: &RegularizationParams) -> Result<f64, ObjectiveError> {
    spec.check_kappa(kappa)?;
    Ok(gp_unchecked(spec, kappa, reg))
}

fn gp_unchecked(spec: &ObjectiveSpec, kappa: &[f64], reg: &RegularizationParams) -> f64 {
    let mut shifted = kappa.to_vec();
    let mut total = 0.0;
    for_each_cube_point(kappa.len(), reg, |zeta, w| {
        for (s, (k, z)) in shifted.iter_mut().zip(kappa.iter().zip(zeta)) {
            *s = k + z;
        }
        total += w * spec.value_unchecked(&shifted);
    });
    total
}

/// `∇G_p(κ)`, the same quadrature applied to `∇F`.
pub fn grad_gp(spec: &ObjectiveSpec, kappa: &[f64], reg: &RegularizationParams) -> Result<Vec<f64>, ObjectiveError> {
    spec.check_kappa(kappa)?;
    Ok(grad_gp_unchecked(spec, kappa, reg))
}

fn grad_gp_unchecked(spec: &ObjectiveSpec, kappa: &[f64], reg: &RegularizationParams) -> Vec<f64> {
    let mut shifted = kappa.to_vec();
    let mut total = vec![0.0; kappa.len()];
    for_each_cube_point(kappa.len(), reg, |zeta, w| {
        for (s, (k, z)) in shifted.iter_mut().zip(kappa.iter().zip(zeta)) {
            *s = k + z;
        }
        for (t, g) in total.iter_mut().zip(spec.partials_unchecked(&shifted)) {
            *t += w * g;
        }
    });
    total
}

/// `F_p(κ) = G_p(τ_1, …, τ_N) + (1/p) Σ (N+1-k) κ_k`.
pub fn eval_fp(spec: &ObjectiveSpec, kappa: &[f64], reg: &RegularizationParams) -> Result<f64, ObjectiveError> {
    spec.check_kappa(kappa)?;
    let n = kappa.len();
    let tau = all_taus(kappa, reg.p);
    let linear: f64 = kappa.iter().enumerate().map(|(k, x)| (n - k) as f64 * x).sum();
    Ok(gp_unchecked(spec, &tau, reg) + linear / reg.p)
}

/// `ξ_k = ∂F_p/∂κ_k`, every entry strictly positive.
pub fn grad_fp(spec: &ObjectiveSpec, kappa: &[f64], reg: &RegularizationParams) -> Result<Vec<f64>, ObjectiveError> {
    spec.check_kappa(kappa)?;
    let n = kappa.len();
    let p = reg.p;
    let tau = all_taus(kappa, p);
    let dg = grad_gp_unchecked(spec, &tau, reg);
    Ok((0..n)
        .map(|k| {
            // ∂τ_j/∂κ_k = (κ_k/τ_j)^{p-1} for j >= k
            let chain: f64 = (k..n)
                .map(|j| ((p - 1.0) * (kappa[k] / tau[j]).ln()).exp() * dg[j])
                .sum();
            (n - k) as f64 / p + chain
        })
        .collect())
}

/// Weights of the first variation: one per eigenvalue, plus the volume
/// and penalty weight field.
#[derive(Debug, Clone)]
pub struct WeightVector {
    /// `ξ_k` at the computed eigenvalues
    pub xi: Vec<f64>,
    /// `ξ_k` replaced by its cluster mean
    pub xi_sym: Vec<f64>,
    /// 0-based index groups of numerically coincident eigenvalues
    pub clusters: Vec<Vec<usize>>,
    pub xi0: Xi0Field,
}

impl WeightVector {
    pub fn new(xi: Vec<f64>, kappa: &[f64], rel_gap: f64, xi0: Xi0Field) -> Self {
        let clusters = clusters_of(kappa, rel_gap);
        let mut xi_sym = xi.clone();
        for c in &clusters {
            let mean = c.iter().map(|&k| xi[k]).sum::<f64>() / c.len() as f64;
            for &k in c {
                xi_sym[k] = mean;
            }
        }
        Self { xi, xi_sym, clusters, xi0 }
    }

    pub fn xi0_at(&self, x: [f64; 2]) -> f64 {
        self.xi0.at(x)
    }

    /// 1-based cluster tag of each eigenvalue.
    pub fn cluster_tags(&self) -> Vec<usize> {
        let mut tags = vec![0; self.xi.len()];
        for (c, members) in self.clusters.iter().enumerate() {
            for &k in members {
                tags[k] = c + 1;
            }
        }
        tags
    }
}
