use super::DiagnosticsError;
use crate::domain::{extract_boundary, shapes, BoundaryMesh, Grid};
use crate::spectral::{solve_torsion, TorsionField};
use serde::Serialize;

/// Smallest admissible probe radius, in cells.
pub const MIN_PROBE_CELLS: f64 = 4.0;
/// Largest radius of the nondegeneracy window.
pub const PROBE_MAX_RADIUS: f64 = 0.1;
/// `v` on the inner ball counts as nonzero above this fraction of `max v`.
pub const INNER_TOL_REL: f64 = 1e-6;
/// Safety factor applied to the calibrated ratio.
pub const C0_SAFETY: f64 = 0.5;

const J01: f64 = 2.404_825_557_695_773;

/// Radius of the disk minimizing `λ₁ + |Ω|`.
pub fn optimal_ball_radius() -> f64 {
    (J01 * J01 / std::f64::consts::PI).powf(0.25)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ProbeFlag {
    Ok,
    Violation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TorsionProbe {
    pub center: [f64; 2],
    pub r: f64,
    /// mean of `v` over `B_r`
    pub mean: f64,
    /// largest `v` over `B_{r/4}`
    pub inner_max: f64,
    pub flag: ProbeFlag,
}

/// Flags `VIOLATION` when the mean over `B_r(x)` is at most `c0·r` while `v`
/// is still nonzero on `B_{r/4}(x)`.
pub fn torsion_probe(tf: &TorsionField, x: [f64; 2], r: f64, c0: f64) -> Result<TorsionProbe, DiagnosticsError> {
    let g = &tf.grid;
    let min = MIN_PROBE_CELLS * g.h();
    if !(r >= min * (1.0 - 1e-12)) {
        return Err(DiagnosticsError::RadiusTooSmall { r, min });
    }
    let (mut acc, mut area, mut inner_max) = (0.0, 0.0, 0.0f64);
    let inner2 = (0.25 * r).powi(2);
    for (p, w) in g.ball_quadrature(x, r) {
        let v = if g.in_node_hull(p) { g.interpolate(&tf.v, p) } else { 0.0 };
        acc += w * v;
        area += w;
        if (p[0] - x[0]).powi(2) + (p[1] - x[1]).powi(2) <= inner2 {
            inner_max = inner_max.max(v);
        }
    }
    let mean = acc / area;
    let tol = INNER_TOL_REL * tf.max();
    let flag = if mean <= c0 * r && inner_max > tol {
        ProbeFlag::Violation
    } else {
        ProbeFlag::Ok
    };
    Ok(TorsionProbe {
        center: x,
        r,
        mean,
        inner_max,
        flag,
    })
}

/// Radii `4h·1.5^k` up to [`PROBE_MAX_RADIUS`], always at least `4h`.
pub fn probe_radii(h: f64) -> Vec<f64> {
    let mut out = vec![MIN_PROBE_CELLS * h];
    loop {
        let next = out[out.len() - 1] * 1.5;
        if next > PROBE_MAX_RADIUS {
            break;
        }
        out.push(next);
    }
    out
}

/// Smallest `m(x,r)/r` over boundary samples and radii, with the number of
/// flagged probes at the given `c0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Nondegeneracy {
    pub c: f64,
    pub probes: usize,
    pub violations: usize,
}

pub fn nondegeneracy(tf: &TorsionField, bm: &BoundaryMesh, radii: &[f64], c0: f64) -> Result<Nondegeneracy, DiagnosticsError> {
    let mut c = f64::INFINITY;
    let (mut probes, mut violations) = (0, 0);
    for &x in &bm.points {
        for &r in radii {
            let p = torsion_probe(tf, x, r, c0)?;
            c = c.min(p.mean / r);
            probes += 1;
            violations += usize::from(p.flag == ProbeFlag::Violation);
        }
    }
    Ok(Nondegeneracy { c, probes, violations })
}

/// `C₀ = C0_SAFETY · min m(x,r)/r` over the boundary of the optimal ball
/// discretized with spacing `h`.
pub fn calibrate_c0(h: f64) -> Result<f64, DiagnosticsError> {
    let r_star = optimal_ball_radius();
    let half = r_star + 0.25;
    let n = ((2.0 * half / h).round() as usize).max(8);
    let g = Grid::square(-half, half, n)?;
    let d = shapes::disk(g, [0.0, 0.0], r_star)?;
    let tf = solve_torsion(&d)?;
    let bm = extract_boundary(&d);
    let nd = nondegeneracy(&tf, &bm, &probe_radii(g.h()), 0.0)?;
    Ok(C0_SAFETY * nd.c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::GridDomain;

    fn unit_disk_torsion(n: usize) -> TorsionField {
        let g = Grid::square(-1.5, 1.5, n).unwrap();
        solve_torsion(&shapes::disk(g, [0.0, 0.0], 1.0).unwrap()).unwrap()
    }

    #[test]
    fn interior_mean_matches_radial_oracle() {
        let tf = unit_disk_torsion(128);
        let (x, r) = ([0.3, -0.2], 0.2);
        let p = torsion_probe(&tf, x, r, 1.0).unwrap();
        // mean of (1 − |y|²)/4 over B_r(x) is (1 − |x|² − r²/2)/4
        let oracle = (1.0 - (x[0] * x[0] + x[1] * x[1]) - 0.5 * r * r) / 4.0;
        assert!((p.mean / oracle - 1.0).abs() < 0.02, "{} vs {oracle}", p.mean);
        assert_eq!(p.flag, ProbeFlag::Ok);
    }

    #[test]
    fn far_outside_is_vacuously_ok() {
        let tf = unit_disk_torsion(64);
        let p = torsion_probe(&tf, [1.4, 1.4], 0.2, 10.0).unwrap();
        assert_eq!(p.mean, 0.0);
        assert_eq!(p.flag, ProbeFlag::Ok);
    }

    #[test]
    fn rejects_small_radius() {
        let tf = unit_disk_torsion(64);
        assert!(matches!(torsion_probe(&tf, [0.0, 0.0], tf.grid.h(), 0.1), Err(DiagnosticsError::RadiusTooSmall { .. })));
    }

    #[test]
    fn calibrated_ball_is_everywhere_ok() {
        let h = 3.0 / 96.0;
        let c0 = calibrate_c0(h).unwrap();
        assert!(c0 > 0.0);
        let r_star = optimal_ball_radius();
        let g = Grid::square(-r_star - 0.25, r_star + 0.25, 96).unwrap();
        let d = shapes::disk(g, [0.0, 0.0], r_star).unwrap();
        let tf = solve_torsion(&d).unwrap();
        let nd = nondegeneracy(&tf, &extract_boundary(&d), &probe_radii(g.h()), c0).unwrap();
        assert_eq!(nd.violations, 0);
        assert!(nd.c >= c0);
    }

    #[test]
    fn thin_neck_is_flagged() {
        // two disks joined by a corridor two cells wide: v is tiny but nonzero there
        let g = Grid::square(-2.0, 2.0, 128).unwrap();
        let h = g.h();
        let d = GridDomain::from_fn(g, |x, y| {
            let a = shapes::disk_sdf(x, y, [-1.2, 0.0], 0.7);
            let b = shapes::disk_sdf(x, y, [1.2, 0.0], 0.7);
            let neck = shapes::rectangle_sdf(x, y, [-1.2, 1.2, -h, h]);
            a.min(b).min(neck)
        })
        .unwrap();
        let tf = solve_torsion(&d).unwrap();
        let c0 = calibrate_c0(h).unwrap();
        let p = torsion_probe(&tf, [0.0, 0.0], 5.0 * h, c0).unwrap();
        assert_eq!(p.flag, ProbeFlag::Violation, "{p:?} c0={c0}");
    }
}
