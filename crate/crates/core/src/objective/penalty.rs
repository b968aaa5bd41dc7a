use super::ObjectiveError;
use crate::domain::{volume, Grid, GridDomain};
use std::sync::Arc;

/// Default penalty strength.
pub const DEFAULT_S: f64 = 0.02;

/// `χ(t) = ½(√(1+t²) − 1)`: even, zero only at 0, slope bounded by ½.
pub fn chi(t: f64) -> f64 {
    0.5 * ((1.0 + t * t).sqrt() - 1.0)
}

pub fn chi_prime(t: f64) -> f64 {
    0.5 * t / (1.0 + t * t).sqrt()
}

/// A reference domain with its capped distance fields, all on one grid.
#[derive(Debug, Clone)]
pub struct Reference {
    grid: Grid,
    volume: f64,
    /// distance to the reference, zero on its nodes
    dist_out: Vec<f64>,
    /// distance to the reference's complement, zero off its nodes
    dist_in: Vec<f64>,
    inside: Vec<bool>,
}

impl Reference {
    pub fn new(d: &GridDomain) -> Self {
        let g = *d.grid();
        let inside: Vec<bool> = (0..g.len()).map(|k| d.is_inside(k)).collect();
        let outside: Vec<bool> = inside.iter().map(|b| !b).collect();
        let h = g.h();
        let dist_out = edt(g.nx(), g.ny(), &inside).into_iter().map(|s| s.sqrt() * h).collect();
        let dist_in = edt(g.nx(), g.ny(), &outside).into_iter().map(|s| s.sqrt() * h).collect();
        Self {
            grid: g,
            volume: volume(d),
            dist_out,
            dist_in,
            inside,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// `min(d(x, Ω*), 1)`, bilinear between nodes.
    pub fn capped_dist_out(&self, x: [f64; 2]) -> f64 {
        self.grid.interpolate(&self.dist_out, x).min(1.0)
    }

    /// `min(d(x, Ω*^c), 1)`, bilinear between nodes.
    pub fn capped_dist_in(&self, x: [f64; 2]) -> f64 {
        self.grid.interpolate(&self.dist_in, x).min(1.0)
    }
}

/// Squared Euclidean distance (in cells) from every node to the nearest
/// seed node; separable lower-envelope transform.
fn edt(nx: usize, ny: usize, seed: &[bool]) -> Vec<f64> {
    const FAR: f64 = 1e20;
    let mut f: Vec<f64> = seed.iter().map(|&s| if s { 0.0 } else { FAR }).collect();
    let mut line = Vec::new();
    let mut out = Vec::new();
    for i in 0..nx {
        line.clear();
        line.extend((0..ny).map(|j| f[j * nx + i]));
        edt_1d(&line, &mut out);
        for j in 0..ny {
            f[j * nx + i] = out[j];
        }
    }
    for j in 0..ny {
        line.clear();
        line.extend_from_slice(&f[j * nx..(j + 1) * nx]);
        edt_1d(&line, &mut out);
        f[j * nx..(j + 1) * nx].copy_from_slice(&out);
    }
    f
}

fn edt_1d(f: &[f64], out: &mut Vec<f64>) {
    let n = f.len();
    out.clear();
    out.resize(n, 0.0);
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    let inter = |q: usize, p: usize| -> f64 {
        let (qf, pf) = (q as f64, p as f64);
        ((f[q] + qf * qf) - (f[p] + pf * pf)) / (2.0 * (qf - pf))
    };
    for q in 1..n {
        let mut s = inter(q, v[k]);
        while s <= z[k] {
            k -= 1;
            s = inter(q, v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Strength and reference of the anchoring penalty `E`.
#[derive(Debug, Clone)]
pub struct PenaltySpec {
    pub s: f64,
    pub reference: Option<Arc<Reference>>,
}

impl Default for PenaltySpec {
    fn default() -> Self {
        Self {
            s: DEFAULT_S,
            reference: None,
        }
    }
}

impl PenaltySpec {
    pub fn new(s: f64) -> Result<Self, ObjectiveError> {
        if !(s.is_finite() && s >= 0.0) {
            return Err(ObjectiveError::BadStrength(s));
        }
        Ok(Self { s, reference: None })
    }

    pub fn with_reference(mut self, d: &GridDomain) -> Self {
        self.reference = Some(Arc::new(Reference::new(d)));
        self
    }

    /// Active when a reference is set and `s > 0`.
    pub fn is_active(&self) -> bool {
        self.s > 0.0 && self.reference.is_some()
    }
}

/// `E(Ω) = s ∫_Ω min(d(·,Ω*),1) + s ∫_{box∖Ω} min(d(·,Ω*^c),1) + s χ(|Ω*| − |Ω|)`.
pub fn eval_penalty_e(d: &GridDomain, pen: &PenaltySpec) -> Result<f64, ObjectiveError> {
    let r = pen.reference.as_ref().ok_or(ObjectiveError::MissingReference)?;
    if r.grid != *d.grid() {
        return Err(ObjectiveError::GridMismatch);
    }
    if pen.s == 0.0 {
        return Ok(0.0);
    }
    let mut acc = 0.0;
    for k in 0..r.inside.len() {
        acc += if d.is_inside(k) {
            r.dist_out[k].min(1.0)
        } else {
            r.dist_in[k].min(1.0)
        };
    }
    Ok(pen.s * (acc * r.grid.cell_area() + chi(r.volume - volume(d))))
}

/// `E(Ω)`, or 0 when the penalty is inactive.
pub fn penalty_value(d: &GridDomain, pen: &PenaltySpec) -> Result<f64, ObjectiveError> {
    if pen.is_active() {
        eval_penalty_e(d, pen)
    } else {
        Ok(0.0)
    }
}

/// Evaluator for the volume-and-penalty weight `ξ_0(x)` at a fixed domain.
#[derive(Debug, Clone)]
pub struct Xi0Field {
    s: f64,
    shift: f64,
    reference: Option<Arc<Reference>>,
}

impl Xi0Field {
    /// `ξ_0 ≡ 1`.
    pub fn constant() -> Self {
        Self {
            s: 0.0,
            shift: 0.0,
            reference: None,
        }
    }

    pub fn at(&self, x: [f64; 2]) -> f64 {
        match &self.reference {
            Some(r) if self.s > 0.0 => 1.0 + self.shift + self.s * (r.capped_dist_out(x) - r.capped_dist_in(x)),
            _ => 1.0,
        }
    }
}

/// `ξ_0(x) = 1 + s min(d(x,Ω*),1) − s min(d(x,Ω*^c),1) + s χ'(|Ω| − |Ω*|)`,
/// the shape gradient density of `|Ω| + E(Ω)`.
pub fn xi0_field(d: &GridDomain, pen: &PenaltySpec) -> Result<Xi0Field, ObjectiveError> {
    match &pen.reference {
        Some(r) if pen.s > 0.0 => {
            if r.grid != *d.grid() {
                return Err(ObjectiveError::GridMismatch);
            }
            Ok(Xi0Field {
                s: pen.s,
                shift: pen.s * chi_prime(volume(d) - r.volume),
                reference: Some(Arc::clone(r)),
            })
        }
        _ => Ok(Xi0Field::constant()),
    }
}
