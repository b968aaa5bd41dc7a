//! Free-boundary measurements on a computed `(domain, spectrum, weights)`
//! triple. Classification thresholds and the torsion constant are
//! heuristics tuned at grid scale.

mod boundary;
mod checks;
mod torsion;
mod weiss;

pub use boundary::{
    classify_boundary, default_radii, el_residual, label_from_densities, quantile, BoundaryLabel, ElResidual, Label,
    CUSP_DENSITY, REDUCED_DENSITY, REDUCED_SPREAD,
};
pub use checks::{scaling_check, scaling_quotients, simplicity_of, simplicity_report, ScalingReport, SimplicityReport, SCALING_STEPS};
pub use torsion::{
    calibrate_c0, nondegeneracy, optimal_ball_radius, probe_radii, torsion_probe, Nondegeneracy, ProbeFlag, TorsionProbe,
    C0_SAFETY, INNER_TOL_REL, MIN_PROBE_CELLS, PROBE_MAX_RADIUS,
};
pub use weiss::{weiss_csv, weiss_energy, weiss_profile, WeissField, WeissProbe, MIN_RADIUS_CELLS};

use crate::domain::{extract_boundary, DomainError, GridDomain};
use crate::objective::{ObjectiveError, ObjectiveSpec, WeightVector};
use crate::spectral::{solve_torsion, SpectralError, Spectrum, CLUSTER_REL_GAP};
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("radius {r} is below the resolvable minimum {min}")]
    RadiusTooSmall { r: f64, min: f64 },
    #[error("radii must be strictly ascending")]
    RadiiNotAscending,
    #[error("no boundary sample has a reliable normal derivative")]
    AllUnreliable,
    #[error("need {need} modes, spectrum has {got}")]
    TooFewModes { need: usize, got: usize },
    #[error("spectrum was computed on a different grid")]
    GridMismatch,
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
}

#[derive(Debug, Clone)]
pub struct DiagnoseOptions {
    /// classification radii; `None` picks [`default_radii`]
    pub radii: Option<Vec<f64>>,
    pub radius_count: usize,
    /// at most this many evenly spaced boundary samples get Weiss profiles
    pub weiss_points: usize,
    pub torsion: bool,
    /// `None` calibrates on the optimal ball at the domain's spacing
    pub c0: Option<f64>,
    pub rel_gap: f64,
}

impl Default for DiagnoseOptions {
    fn default() -> Self {
        Self {
            radii: None,
            radius_count: 5,
            weiss_points: 48,
            torsion: true,
            c0: None,
            rel_gap: CLUSTER_REL_GAP,
        }
    }
}

/// One boundary sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointRecord {
    pub x: f64,
    pub y: f64,
    pub residual: Option<f64>,
    pub residual_raw: Option<f64>,
    pub label: Label,
    pub density: f64,
    pub trend: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelCounts {
    pub reduced: usize,
    pub singular_candidate: usize,
    pub cusp_candidate: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeissSummary {
    pub probes: usize,
    pub max_c_hat: f64,
    /// `W(x, r_min)` over `π/2`: median, min, max
    pub small_radius_ratio: [f64; 3],
    /// largest `|W(x, r_min)/π − density(x, r_min)|`
    pub density_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TorsionSummary {
    pub c0: f64,
    pub witness: Nondegeneracy,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub objective: String,
    pub points: usize,
    pub lambdas: Vec<f64>,
    pub xi: Vec<f64>,
    pub xi_sym: Vec<f64>,
    pub radii: Vec<f64>,
    pub el_median_abs: Option<f64>,
    pub el_median_signed: Option<f64>,
    pub el_p90_abs: Option<f64>,
    pub el_median_abs_raw: Option<f64>,
    pub el_reliable: usize,
    /// largest `Σ ξ_k (u_k)_ν²` against `4·max ξ_0`
    pub gradient_term_max: Option<f64>,
    pub gradient_bound_holds: Option<bool>,
    pub labels: LabelCounts,
    /// smallest density over samples and radii up to [`PROBE_MAX_RADIUS`]
    /// (or the smallest radius, if larger)
    pub density_floor: Option<f64>,
    pub weiss: Option<WeissSummary>,
    pub weiss_profiles: Vec<WeissProbe>,
    pub torsion: Option<TorsionSummary>,
    pub scaling: ScalingReport,
    pub simplicity: SimplicityReport,
    pub records: Vec<PointRecord>,
}

impl DiagnosticsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Full report. An empty boundary yields zero point records and no
/// boundary aggregates.
pub fn diagnose(
    d: &GridDomain,
    sp: &Spectrum,
    w: &WeightVector,
    spec: &ObjectiveSpec,
    opts: &DiagnoseOptions,
) -> Result<DiagnosticsReport, DiagnosticsError> {
    if sp.grid != *d.grid() {
        return Err(DiagnosticsError::GridMismatch);
    }
    let h = d.grid().h();
    let bm = extract_boundary(d);
    let radii = match &opts.radii {
        Some(r) => r.clone(),
        None => default_radii(d, &bm, opts.radius_count),
    };
    let labels = classify_boundary(d, &bm, &radii)?;
    let el = match el_residual(d, sp, w, &bm) {
        Ok(e) => Some(e),
        Err(DiagnosticsError::AllUnreliable) => None,
        Err(e) => return Err(e),
    };

    let mut counts = LabelCounts {
        reduced: 0,
        singular_candidate: 0,
        cusp_candidate: 0,
    };
    for l in &labels {
        match l.label {
            Label::Reduced => counts.reduced += 1,
            Label::SingularCandidate => counts.singular_candidate += 1,
            Label::CuspCandidate => counts.cusp_candidate += 1,
        }
    }
    // the smallest radius always counts, even when 4h exceeds the window
    let r_cap = radii.first().map_or(PROBE_MAX_RADIUS, |&r| r.max(PROBE_MAX_RADIUS));
    let density_floor = labels
        .iter()
        .flat_map(|l| l.densities.iter().zip(&radii).filter(|(_, &r)| r <= r_cap).map(|(d, _)| *d))
        .reduce(f64::min);

    let xi0_max = bm.points.iter().map(|&p| w.xi0_at(p)).fold(1.0f64, f64::max);

    let mut weiss_profiles = Vec::new();
    let mut weiss = None;
    if !bm.is_empty() && opts.weiss_points > 0 && !radii.is_empty() {
        let field = WeissField::from_spectrum(d, sp, w);
        let stride = bm.len().div_ceil(opts.weiss_points).max(1);
        let mut gap = 0.0f64;
        let mut ratios = Vec::new();
        for (i, &x) in bm.points.iter().enumerate().step_by(stride) {
            let probe = field.profile(x, &radii)?;
            let w0 = probe.values[0];
            ratios.push(w0 / (0.5 * PI));
            gap = gap.max((w0 / PI - labels[i].density).abs());
            weiss_profiles.push(probe);
        }
        weiss = Some(WeissSummary {
            probes: weiss_profiles.len(),
            max_c_hat: weiss_profiles.iter().map(|p| p.c_hat).fold(0.0, f64::max),
            small_radius_ratio: [
                quantile(&ratios, 0.5),
                ratios.iter().copied().fold(f64::INFINITY, f64::min),
                ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            ],
            density_gap: gap,
        });
    }

    let torsion = if opts.torsion && !bm.is_empty() {
        let tf = solve_torsion(d)?;
        let c0 = match opts.c0 {
            Some(c) => c,
            None => calibrate_c0(h)?,
        };
        Some(TorsionSummary {
            c0,
            witness: nondegeneracy(&tf, &bm, &probe_radii(h), c0)?,
        })
    } else {
        None
    };

    let records = labels
        .iter()
        .enumerate()
        .map(|(i, l)| PointRecord {
            x: l.point[0],
            y: l.point[1],
            residual: el.as_ref().and_then(|e| e.residual[i]),
            residual_raw: el.as_ref().and_then(|e| e.residual_raw[i]),
            label: l.label,
            density: l.density,
            trend: l.trend,
        })
        .collect();

    Ok(DiagnosticsReport {
        objective: spec.label(),
        points: bm.len(),
        lambdas: sp.lambdas.clone(),
        xi: w.xi.clone(),
        xi_sym: w.xi_sym.clone(),
        radii,
        el_median_abs: el.as_ref().map(|e| e.median_abs),
        el_median_signed: el.as_ref().map(|e| e.median_signed),
        el_p90_abs: el.as_ref().map(|e| e.p90_abs),
        el_median_abs_raw: el.as_ref().map(|e| e.median_abs_raw),
        el_reliable: el.as_ref().map_or(0, |e| e.reliable),
        gradient_term_max: el.as_ref().map(|e| e.max_gradient_term),
        gradient_bound_holds: el.as_ref().map(|e| e.max_gradient_term <= 4.0 * xi0_max),
        labels: counts,
        density_floor,
        weiss,
        weiss_profiles,
        torsion,
        scaling: scaling_check(spec, sp)?,
        simplicity: simplicity_report(sp, opts.rel_gap),
        records,
    })
}
