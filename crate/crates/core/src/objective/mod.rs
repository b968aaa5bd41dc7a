//! Spectral objective functions `F(κ_1, …, κ_N)`, their p-regularization
//! and the anchoring penalty.
//!
//! Only closed families are offered, each nondecreasing and Lipschitz in
//! every argument by construction.

mod penalty;
mod quadrature;
mod regularized;

pub use penalty::{DEFAULT_S, chi, chi_prime, eval_penalty_e, penalty_value, xi0_field, PenaltySpec, Reference, Xi0Field};
pub use quadrature::gauss_legendre;
pub use regularized::{eval_fp, eval_gp, grad_fp, grad_gp, tau_kp, RegularizationParams, WeightVector};

use thiserror::Error;

/// Largest number of eigenvalues an objective may consume.
pub const MAX_N: usize = 4;

#[derive(Debug, Error, PartialEq)]
pub enum ObjectiveError {
    #[error("objective must use between 1 and {MAX_N} eigenvalues, got {0}")]
    BadN(usize),
    #[error("linear coefficients must be nonnegative with one strictly positive")]
    BadCoefficients,
    #[error("softmin subset must be nonempty with indices in 1..={n}")]
    BadSubset { n: usize },
    #[error("softmin temperature must be positive, got {0}")]
    BadBeta(f64),
    #[error("expected {expected} eigenvalues, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("eigenvalue argument {index} is not positive: {value}")]
    NonPositive { index: usize, value: f64 },
    #[error("regularization exponent must be finite and >= 1, got {0}")]
    BadExponent(f64),
    #[error("need at least 2 quadrature nodes, got {0}")]
    BadQuadrature(usize),
    #[error("penalty needs a reference domain")]
    MissingReference,
    #[error("penalty strength must be finite and >= 0, got {0}")]
    BadStrength(f64),
    #[error("reference domain lives on a different grid")]
    GridMismatch,
    #[error("unknown objective family `{0}`")]
    UnknownFamily(String),
}

/// The closed families of objectives.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `F = κ_index` (1-based)
    Single { index: usize },
    /// `F = Σ a_k κ_k`, `a_k >= 0`
    Linear { coeffs: Vec<f64> },
    /// `F = -(1/β) ln(mean_{k ∈ S} e^{-β κ_k})`, a smooth lower envelope of
    /// `min_{k ∈ S} κ_k`
    Softmin { subset: Vec<usize>, beta: f64, n: usize },
}

/// Which of the standing assumptions on `F` hold. Every family here
/// satisfies all four; the flags exist so reports can state it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct AssumptionFlags {
    pub continuous: bool,
    pub nondecreasing: bool,
    pub lipschitz: bool,
    pub backward_flat_derivative: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSpec {
    family: Family,
    n: usize,
    flags: AssumptionFlags,
}

impl ObjectiveSpec {
    pub fn new(family: Family) -> Result<Self, ObjectiveError> {
        let n = match &family {
            Family::Single { index } => *index,
            Family::Linear { coeffs } => {
                if coeffs.iter().any(|a| !(a.is_finite() && *a >= 0.0)) || !coeffs.iter().any(|a| *a > 0.0) {
                    return Err(ObjectiveError::BadCoefficients);
                }
                coeffs.len()
            }
            Family::Softmin { subset, beta, n } => {
                if !(beta.is_finite() && *beta > 0.0) {
                    return Err(ObjectiveError::BadBeta(*beta));
                }
                if subset.is_empty() || subset.iter().any(|&k| k == 0 || k > *n) {
                    return Err(ObjectiveError::BadSubset { n: *n });
                }
                *n
            }
        };
        if n == 0 || n > MAX_N {
            return Err(ObjectiveError::BadN(n));
        }
        Ok(Self {
            family,
            n,
            flags: AssumptionFlags {
                continuous: true,
                nondecreasing: true,
                lipschitz: true,
                backward_flat_derivative: true,
            },
        })
    }

    pub fn single(index: usize) -> Result<Self, ObjectiveError> {
        Self::new(Family::Single { index })
    }

    pub fn linear(coeffs: Vec<f64>) -> Result<Self, ObjectiveError> {
        Self::new(Family::Linear { coeffs })
    }

    pub fn softmin(subset: Vec<usize>, beta: f64, n: usize) -> Result<Self, ObjectiveError> {
        Self::new(Family::Softmin { subset, beta, n })
    }

    /// Parses a family name: `lambda<k>`, `single`, `linear`, `softmin`.
    /// The parameters come from the accompanying config keys.
    pub fn from_name(
        name: &str,
        index: Option<usize>,
        coeffs: Option<Vec<f64>>,
        subset: Option<Vec<usize>>,
        beta: Option<f64>,
        n: Option<usize>,
    ) -> Result<Self, ObjectiveError> {
        let lower = name.trim().to_ascii_lowercase();
        if let Some(k) = lower.strip_prefix("lambda").and_then(|s| s.parse::<usize>().ok()) {
            return Self::single(k);
        }
        match lower.as_str() {
            "single" => Self::single(index.unwrap_or(1)),
            "linear" => Self::linear(coeffs.ok_or(ObjectiveError::BadCoefficients)?),
            "softmin" => {
                let subset = subset.unwrap_or_else(|| (1..=n.unwrap_or(2)).collect());
                let n = n.unwrap_or_else(|| subset.iter().copied().max().unwrap_or(1));
                Self::softmin(subset, beta.unwrap_or(1.0), n)
            }
            _ => Err(ObjectiveError::UnknownFamily(name.to_string())),
        }
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn assumptions(&self) -> AssumptionFlags {
        self.flags
    }

    /// Short label for manifests and reports.
    pub fn label(&self) -> String {
        match &self.family {
            Family::Single { index } => format!("lambda{index}"),
            Family::Linear { coeffs } => format!("linear{coeffs:?}"),
            Family::Softmin { subset, beta, .. } => format!("softmin{subset:?}@{beta}"),
        }
    }

    pub fn check_kappa(&self, kappa: &[f64]) -> Result<(), ObjectiveError> {
        if kappa.len() != self.n {
            return Err(ObjectiveError::Arity {
                expected: self.n,
                got: kappa.len(),
            });
        }
        if let Some((i, &v)) = kappa.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(ObjectiveError::NonPositive { index: i + 1, value: v });
        }
        Ok(())
    }

    /// `F(κ)` without argument checks; callers validate.
    pub(crate) fn value_unchecked(&self, kappa: &[f64]) -> f64 {
        match &self.family {
            Family::Single { index } => kappa[index - 1],
            Family::Linear { coeffs } => coeffs.iter().zip(kappa).map(|(a, k)| a * k).sum(),
            Family::Softmin { subset, beta, .. } => {
                let m = subset.iter().map(|&k| kappa[k - 1]).fold(f64::INFINITY, f64::min);
                let mean = subset.iter().map(|&k| (-beta * (kappa[k - 1] - m)).exp()).sum::<f64>() / subset.len() as f64;
                m - mean.ln() / beta
            }
        }
    }

    /// `∂F/∂κ_j` for every j.
    pub(crate) fn partials_unchecked(&self, kappa: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.n];
        match &self.family {
            Family::Single { index } => g[index - 1] = 1.0,
            Family::Linear { coeffs } => g.copy_from_slice(coeffs),
            Family::Softmin { subset, beta, .. } => {
                let m = subset.iter().map(|&k| kappa[k - 1]).fold(f64::INFINITY, f64::min);
                let w: Vec<f64> = subset.iter().map(|&k| (-beta * (kappa[k - 1] - m)).exp()).collect();
                let total: f64 = w.iter().sum();
                for (&k, wk) in subset.iter().zip(&w) {
                    g[k - 1] += wk / total;
                }
            }
        }
        g
    }

    /// Lipschitz constant of `F` with respect to the Euclidean norm.
    pub fn lipschitz(&self) -> f64 {
        match &self.family {
            Family::Single { .. } | Family::Softmin { .. } => 1.0,
            Family::Linear { coeffs } => coeffs.iter().map(|a| a * a).sum::<f64>().sqrt(),
        }
    }
}

/// `F(κ)`.
pub fn eval_f(spec: &ObjectiveSpec, kappa: &[f64]) -> Result<f64, ObjectiveError> {
    spec.check_kappa(kappa)?;
    Ok(spec.value_unchecked(kappa))
}
