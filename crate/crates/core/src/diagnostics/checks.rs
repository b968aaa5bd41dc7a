use super::DiagnosticsError;
use crate::objective::{eval_f, ObjectiveSpec};
use crate::spectral::{clusters_of, Spectrum};
use serde::Serialize;

/// Shift sizes for the difference quotients, relative to the mean eigenvalue.
pub const SCALING_STEPS: [f64; 3] = [1e-4, 1e-3, 1e-2];

/// Difference quotients of `F` along the all-ones direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub steps: Vec<f64>,
    /// `[F(λ+s·1) − F(λ)]/s`
    pub forward: Vec<f64>,
    /// `[F(λ−s·1) − F(λ)]/(−s)`
    pub backward: Vec<f64>,
    /// smallest forward quotient; must be positive
    pub c: f64,
    /// largest backward quotient; must be finite
    pub cap: f64,
    pub holds: bool,
}

/// Uses the first `spec.n()` eigenvalues of `sp`.
pub fn scaling_check(spec: &ObjectiveSpec, sp: &Spectrum) -> Result<ScalingReport, DiagnosticsError> {
    let n = spec.n();
    if sp.lambdas.len() < n {
        return Err(DiagnosticsError::TooFewModes { need: n, got: sp.lambdas.len() });
    }
    scaling_quotients(spec, &sp.lambdas[..n])
}

pub fn scaling_quotients(spec: &ObjectiveSpec, kappa: &[f64]) -> Result<ScalingReport, DiagnosticsError> {
    let base = eval_f(spec, kappa)?;
    let scale = kappa.iter().sum::<f64>() / kappa.len() as f64;
    let shifted = |s: f64| -> Result<f64, DiagnosticsError> {
        let k: Vec<f64> = kappa.iter().map(|v| v + s).collect();
        Ok(eval_f(spec, &k)?)
    };
    let mut steps = Vec::new();
    let (mut forward, mut backward) = (Vec::new(), Vec::new());
    for rel in SCALING_STEPS {
        let s = rel * scale;
        steps.push(s);
        forward.push((shifted(s)? - base) / s);
        backward.push((shifted(-s)? - base) / -s);
    }
    let c = forward.iter().copied().fold(f64::INFINITY, f64::min);
    let cap = backward.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(ScalingReport {
        steps,
        forward,
        backward,
        c,
        cap,
        holds: c > 0.0 && cap.is_finite(),
    })
}

/// Relative gaps and cluster partition of a spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimplicityReport {
    pub lambdas: Vec<f64>,
    /// `(λ_{k+1} − λ_k)/λ_k`
    pub rel_gaps: Vec<f64>,
    /// 1-based eigenvalue indices
    pub clusters: Vec<Vec<usize>>,
    pub min_gap: f64,
    pub simple: bool,
}

pub fn simplicity_report(sp: &Spectrum, tol: f64) -> SimplicityReport {
    simplicity_of(&sp.lambdas, tol)
}

pub fn simplicity_of(lambdas: &[f64], tol: f64) -> SimplicityReport {
    let rel_gaps: Vec<f64> = lambdas.windows(2).map(|w| (w[1] - w[0]) / w[0]).collect();
    let clusters: Vec<Vec<usize>> = clusters_of(lambdas, tol)
        .into_iter()
        .map(|c| c.into_iter().map(|k| k + 1).collect())
        .collect();
    SimplicityReport {
        lambdas: lambdas.to_vec(),
        min_gap: rel_gaps.iter().copied().fold(f64::INFINITY, f64::min),
        simple: clusters.iter().all(|c| c.len() == 1),
        rel_gaps,
        clusters,
    }
}
