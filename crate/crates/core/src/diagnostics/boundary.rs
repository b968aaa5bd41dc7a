use super::DiagnosticsError;
use crate::domain::{density_ratio, BoundaryMesh, GridDomain};
use crate::objective::WeightVector;
use crate::spectral::{normal_derivative, Spectrum};
use serde::Serialize;

/// Reduced-boundary density window at the smallest radius.
pub const REDUCED_DENSITY: [f64; 2] = [0.35, 0.65];
/// Largest density spread across radii still called stable.
pub const REDUCED_SPREAD: f64 = 0.15;
/// Density at the smallest radius from which a rising trend is a cusp.
pub const CUSP_DENSITY: f64 = 0.9;

/// `Σ ξ_k (u_k)_ν² − ξ_0` at every boundary sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElResidual {
    /// with cluster-symmetrized weights; `None` where unreliable
    pub residual: Vec<Option<f64>>,
    /// with the raw weights
    pub residual_raw: Vec<Option<f64>>,
    pub reliable: usize,
    pub median_abs: f64,
    pub median_signed: f64,
    pub p90_abs: f64,
    pub median_abs_raw: f64,
    /// largest `Σ ξ_k (u_k)_ν²` over reliable samples
    pub max_gradient_term: f64,
}

/// Linear-interpolated quantile of unsorted data, `q` in `[0, 1]`.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

/// Uses the first `w.xi.len()` modes. Fails only when no sample is reliable.
pub fn el_residual(d: &GridDomain, sp: &Spectrum, w: &WeightVector, bm: &BoundaryMesh) -> Result<ElResidual, DiagnosticsError> {
    let n = w.xi.len();
    if sp.modes.len() < n {
        return Err(DiagnosticsError::TooFewModes { need: n, got: sp.modes.len() });
    }
    let derivs: Vec<Vec<Option<f64>>> = sp.modes[..n].iter().map(|m| normal_derivative(m, bm, d)).collect();
    let mut residual = Vec::with_capacity(bm.len());
    let mut residual_raw = Vec::with_capacity(bm.len());
    let mut max_gradient_term = 0.0f64;
    for i in 0..bm.len() {
        let sq: Option<Vec<f64>> = derivs.iter().map(|dk| dk[i].map(|g| g * g)).collect();
        match sq {
            Some(sq) => {
                let xi0 = w.xi0_at(bm.points[i]);
                let sym: f64 = sq.iter().zip(&w.xi_sym).map(|(a, b)| a * b).sum();
                let raw: f64 = sq.iter().zip(&w.xi).map(|(a, b)| a * b).sum();
                max_gradient_term = max_gradient_term.max(sym);
                residual.push(Some(sym - xi0));
                residual_raw.push(Some(raw - xi0));
            }
            None => {
                residual.push(None);
                residual_raw.push(None);
            }
        }
    }
    let signed: Vec<f64> = residual.iter().flatten().copied().collect();
    if signed.is_empty() {
        return Err(DiagnosticsError::AllUnreliable);
    }
    let abs: Vec<f64> = signed.iter().map(|r| r.abs()).collect();
    let abs_raw: Vec<f64> = residual_raw.iter().flatten().map(|r| r.abs()).collect();
    Ok(ElResidual {
        reliable: signed.len(),
        median_abs: quantile(&abs, 0.5),
        median_signed: quantile(&signed, 0.5),
        p90_abs: quantile(&abs, 0.9),
        median_abs_raw: quantile(&abs_raw, 0.5),
        max_gradient_term,
        residual,
        residual_raw,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Label {
    Reduced,
    SingularCandidate,
    CuspCandidate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryLabel {
    pub point: [f64; 2],
    pub label: Label,
    /// density at the smallest radius
    pub density: f64,
    /// densities at every radius, ascending radii
    pub densities: Vec<f64>,
    /// density at the smallest radius minus density at the largest
    pub trend: f64,
}

/// Heuristic label from densities over an ascending radius window.
pub fn label_from_densities(densities: &[f64]) -> Label {
    let first = densities[0];
    let last = densities[densities.len() - 1];
    let lo = densities.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = densities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if (REDUCED_DENSITY[0]..=REDUCED_DENSITY[1]).contains(&first) && hi - lo <= REDUCED_SPREAD {
        Label::Reduced
    } else if first >= CUSP_DENSITY && first > last {
        Label::CuspCandidate
    } else {
        Label::SingularCandidate
    }
}

/// `n` radii geometrically spaced over `[4h, 0.2·diam]`, where `diam` is the
/// diagonal of the boundary's bounding box. Empty for an empty boundary.
pub fn default_radii(d: &GridDomain, bm: &BoundaryMesh, n: usize) -> Vec<f64> {
    if bm.is_empty() || n == 0 {
        return Vec::new();
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &bm.points {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let diam = (hi[0] - lo[0]).hypot(hi[1] - lo[1]);
    let r0 = 4.0 * d.grid().h();
    let r1 = (0.2 * diam).max(r0);
    if n == 1 || r1 <= r0 {
        return vec![r0];
    }
    (0..n).map(|k| r0 * (r1 / r0).powf(k as f64 / (n - 1) as f64)).collect()
}

pub fn classify_boundary(d: &GridDomain, bm: &BoundaryMesh, radii: &[f64]) -> Result<Vec<BoundaryLabel>, DiagnosticsError> {
    if radii.is_empty() {
        return Ok(Vec::new());
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(DiagnosticsError::RadiiNotAscending);
    }
    bm.points
        .iter()
        .map(|&x| {
            let densities = radii.iter().map(|&r| density_ratio(d, x, r)).collect::<Result<Vec<_>, _>>()?;
            Ok(BoundaryLabel {
                point: x,
                label: label_from_densities(&densities),
                density: densities[0],
                trend: densities[0] - densities[densities.len() - 1],
                densities,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{extract_boundary, shapes, Grid};
    use crate::objective::Xi0Field;
    use crate::spectral::{solve_spectrum, SpectrumOptions};

    const J01: f64 = 2.404_825_557_695_773;

    #[test]
    fn quantiles() {
        assert_eq!(quantile(&[3.0, 1.0, 2.0], 0.5), 2.0);
        assert_eq!(quantile(&[1.0, 2.0], 0.5), 1.5);
        assert!((quantile(&(0..11).map(f64::from).collect::<Vec<_>>(), 0.9) - 9.0).abs() < 1e-12);
    }

    /// Disk of radius `r` with `F = λ₁`, `ξ₁ = 1`.
    fn disk_residual(r: f64, n: usize) -> ElResidual {
        let g = Grid::square(-2.0, 2.0, n).unwrap();
        let d = shapes::disk(g, [0.0, 0.0], r).unwrap();
        let sp = solve_spectrum(&d, &SpectrumOptions::new(1)).unwrap();
        let bm = extract_boundary(&d);
        let w = WeightVector::new(vec![1.0], &sp.lambdas, 1e-3, Xi0Field::constant());
        el_residual(&d, &sp, &w, &bm).unwrap()
    }

    #[test]
    fn optimal_ball_satisfies_el() {
        // u_ν² = j01² / (π R⁴) = 1 at R⁴ = j01²/π
        let r_star = (J01 * J01 / std::f64::consts::PI).powf(0.25);
        let res = disk_residual(r_star, 160);
        assert!(res.median_abs <= 0.1, "{}", res.median_abs);
    }

    #[test]
    fn oversized_ball_has_negative_residual() {
        let r = 1.3 * (J01 * J01 / std::f64::consts::PI).powf(0.25);
        let res = disk_residual(r, 160);
        // radial oracle: 1/1.3⁴ − 1 ≈ −0.65
        assert!(res.median_signed < -0.2, "{}", res.median_signed);
        assert!((res.median_signed - (1.3f64.powi(-4) - 1.0)).abs() < 0.1);
    }

    #[test]
    fn residual_ignores_mode_signs() {
        let g = Grid::square(-1.6, 1.6, 64).unwrap();
        let d = shapes::rectangle(g, [-1.2, 1.0, -0.7, 0.9]).unwrap();
        let mut sp = solve_spectrum(&d, &SpectrumOptions::new(2)).unwrap();
        let bm = extract_boundary(&d);
        let w = WeightVector::new(vec![0.3, 0.8], &sp.lambdas, 1e-3, Xi0Field::constant());
        let a = el_residual(&d, &sp, &w, &bm).unwrap();
        for v in sp.modes[1].iter_mut() {
            *v = -*v;
        }
        let b = el_residual(&d, &sp, &w, &bm).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn disk_boundary_is_reduced() {
        let g = Grid::square(-1.5, 1.5, 128).unwrap();
        let d = shapes::disk(g, [0.0, 0.0], 1.0).unwrap();
        let bm = extract_boundary(&d);
        let labels = classify_boundary(&d, &bm, &default_radii(&d, &bm, 5)).unwrap();
        let reduced = labels.iter().filter(|l| l.label == Label::Reduced).count();
        assert!(reduced as f64 >= 0.99 * labels.len() as f64, "{reduced}/{}", labels.len());
    }

    #[test]
    fn slit_is_not_reduced() {
        let g = Grid::square(-1.5, 1.5, 128).unwrap();
        let h = g.h();
        // off the node rows so the slit is cut by grid edges
        let y = 0.3 * h;
        let d = shapes::slit_rectangle(g, [-1.0, 1.0, -1.0, 1.0], [-0.5, y], [0.5, y]).unwrap();
        let radii: Vec<f64> = [4.0, 6.0, 9.0, 13.0].iter().map(|c| c * h).collect();
        let bm = extract_boundary(&d);
        let slit: Vec<[f64; 2]> = bm
            .points
            .iter()
            .copied()
            .filter(|p| p[0].abs() < 0.3 && (p[1] - y).abs() < 2.0 * h)
            .collect();
        assert!(!slit.is_empty());
        let mesh = BoundaryMesh {
            normals: vec![[0.0, 1.0]; slit.len()],
            weights: vec![h; slit.len()],
            points: slit,
        };
        for l in classify_boundary(&d, &mesh, &radii).unwrap() {
            assert_ne!(l.label, Label::Reduced, "{l:?}");
            assert!(l.density > 0.75, "{l:?}");
        }
    }

    #[test]
    fn reentrant_corner_is_singular() {
        let g = Grid::square(-1.5, 1.5, 128).unwrap();
        let d = shapes::l_shape(g, [-1.0, -1.0], 2.0).unwrap();
        let h = g.h();
        let radii: Vec<f64> = [4.0, 8.0, 16.0].iter().map(|c| c * h).collect();
        let mesh = BoundaryMesh {
            points: vec![[0.0, 0.0]],
            normals: vec![[0.0, 0.0]],
            weights: vec![h],
        };
        let l = &classify_boundary(&d, &mesh, &radii).unwrap()[0];
        assert!((l.density - 0.75).abs() < 0.03, "{l:?}");
        assert_eq!(l.label, Label::SingularCandidate);
    }

    #[test]
    fn labels_are_exhaustive() {
        assert_eq!(label_from_densities(&[0.5, 0.45, 0.4]), Label::Reduced);
        assert_eq!(label_from_densities(&[0.5, 0.2]), Label::SingularCandidate);
        assert_eq!(label_from_densities(&[0.95, 0.8]), Label::CuspCandidate);
        assert_eq!(label_from_densities(&[0.95, 0.97]), Label::SingularCandidate);
        assert_eq!(label_from_densities(&[0.75]), Label::SingularCandidate);
    }
}
