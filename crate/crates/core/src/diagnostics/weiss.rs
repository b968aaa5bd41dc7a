use super::DiagnosticsError;
use crate::domain::GridDomain;
use crate::objective::{WeightVector, Xi0Field};
use crate::spectral::{extend_across_boundary, Spectrum};
use serde::Serialize;
use std::f64::consts::PI;
use std::fmt::Write as _;

/// Smallest admissible Weiss radius, in cells.
pub const MIN_RADIUS_CELLS: f64 = 4.0;

/// Weighted fields prepared for repeated Weiss evaluations on one domain.
#[derive(Debug, Clone)]
pub struct WeissField<'a> {
    d: &'a GridDomain,
    /// fields extended one layer across the boundary
    ext: Vec<Vec<f64>>,
    xi: Vec<f64>,
    xi0: Xi0Field,
}

impl<'a> WeissField<'a> {
    /// Arbitrary fields vanishing outside `d`, with weights `xi` and `xi0`.
    pub fn new(d: &'a GridDomain, fields: &[Vec<f64>], xi: &[f64], xi0: Xi0Field) -> Self {
        Self {
            d,
            ext: fields.iter().map(|f| extend_across_boundary(d, f)).collect(),
            xi: xi.to_vec(),
            xi0,
        }
    }

    /// The first `w.xi.len()` modes with the cluster-symmetrized weights.
    pub fn from_spectrum(d: &'a GridDomain, sp: &Spectrum, w: &WeightVector) -> Self {
        let n = w.xi_sym.len().min(sp.modes.len());
        Self::new(d, &sp.modes[..n], &w.xi_sym[..n], w.xi0.clone())
    }

    /// `W(x,r) = r⁻² ∫_{B_r∩Ω} (Σ ξ_k |∇u_k|² + ξ_0) − r⁻³ ∫_{∂B_r} Σ ξ_k u_k²`.
    pub fn energy(&self, x: [f64; 2], r: f64) -> Result<f64, DiagnosticsError> {
        let g = self.d.grid();
        let h = g.h();
        let min = MIN_RADIUS_CELLS * h;
        if !(r >= min * (1.0 - 1e-12)) {
            return Err(DiagnosticsError::RadiusTooSmall { r, min });
        }
        let mut bulk = 0.0;
        for (p, w) in g.ball_quadrature(x, r) {
            if !self.d.contains(p) {
                continue;
            }
            let mut e = self.xi0.at(p);
            for (f, xi) in self.ext.iter().zip(&self.xi) {
                let (_, gr) = g.interpolate_grad(f, p);
                e += xi * (gr[0] * gr[0] + gr[1] * gr[1]);
            }
            bulk += w * e;
        }
        let m = ((2.0 * PI * r / (0.25 * h)).ceil() as usize).max(64);
        let ds = 2.0 * PI * r / m as f64;
        let mut shell = 0.0;
        for s in 0..m {
            let a = 2.0 * PI * (s as f64 + 0.5) / m as f64;
            let p = [x[0] + r * a.cos(), x[1] + r * a.sin()];
            if !self.d.contains(p) {
                continue;
            }
            for (f, xi) in self.ext.iter().zip(&self.xi) {
                let u = g.interpolate(f, p);
                shell += xi * u * u * ds;
            }
        }
        Ok(bulk / (r * r) - shell / (r * r * r))
    }

    pub fn profile(&self, x: [f64; 2], radii: &[f64]) -> Result<WeissProbe, DiagnosticsError> {
        if radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(DiagnosticsError::RadiiNotAscending);
        }
        let values = radii.iter().map(|&r| self.energy(x, r)).collect::<Result<Vec<_>, _>>()?;
        let c_hat = radii
            .windows(2)
            .zip(values.windows(2))
            .map(|(r, w)| (w[0] - w[1]) / (r[1] - r[0]))
            .fold(0.0f64, f64::max);
        Ok(WeissProbe {
            center: x,
            radii: radii.to_vec(),
            values,
            c_hat,
        })
    }
}

/// Weiss energies at one center over ascending radii.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeissProbe {
    pub center: [f64; 2],
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// smallest `C >= 0` making `r ↦ W(x,r) + C r` nondecreasing over the samples
    pub c_hat: f64,
}

impl WeissProbe {
    /// Rows of `x,y,r,W` without header.
    pub fn csv_rows(&self, out: &mut String) {
        for (r, w) in self.radii.iter().zip(&self.values) {
            let _ = writeln!(out, "{},{},{},{}", self.center[0], self.center[1], r, w);
        }
    }
}

/// `x,y,r,W` for a set of probes.
pub fn weiss_csv(probes: &[WeissProbe]) -> String {
    let mut s = String::from("x,y,r,W\n");
    for p in probes {
        p.csv_rows(&mut s);
    }
    s
}

pub fn weiss_energy(d: &GridDomain, sp: &Spectrum, w: &WeightVector, x: [f64; 2], r: f64) -> Result<f64, DiagnosticsError> {
    WeissField::from_spectrum(d, sp, w).energy(x, r)
}

pub fn weiss_profile(
    d: &GridDomain,
    sp: &Spectrum,
    w: &WeightVector,
    x: [f64; 2],
    radii: &[f64],
) -> Result<WeissProbe, DiagnosticsError> {
    WeissField::from_spectrum(d, sp, w).profile(x, radii)
}
