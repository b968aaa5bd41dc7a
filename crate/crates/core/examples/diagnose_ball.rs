//! Full diagnostics report on the exact λ₁ + |Ω| minimizer, a disk of
//! radius (j01²/π)^¼, where every boundary point should look regular.
//!
//! cargo run --release --example diagnose_ball -- [n]

use shapeopt::diagnostics::{diagnose, optimal_ball_radius, DiagnoseOptions};
use shapeopt::domain::{shapes, Grid};
use shapeopt::objective::{grad_fp, ObjectiveSpec, RegularizationParams, WeightVector, Xi0Field};
use shapeopt::spectral::{solve_spectrum, SpectrumOptions, CLUSTER_REL_GAP};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(160);
    let r = optimal_ball_radius();
    let grid = Grid::square(-2.0, 2.0, n)?;
    let d = shapes::disk(grid, [0.0, 0.0], r)?;
    let sp = solve_spectrum(&d, &SpectrumOptions::new(2))?;

    let spec = ObjectiveSpec::single(1)?;
    let xi = grad_fp(&spec, &sp.lambdas[..1], &RegularizationParams::new(64.0)?)?;
    let w = WeightVector::new(xi, &sp.lambdas[..1], CLUSTER_REL_GAP, Xi0Field::constant());
    let rep = diagnose(&d, &sp, &w, &spec, &DiagnoseOptions::default())?;

    println!("boundary samples     {}", rep.points);
    println!("EL residual median   {:.4}  p90 {:.4}", rep.el_median_abs.unwrap_or(f64::NAN), rep.el_p90_abs.unwrap_or(f64::NAN));
    println!("labels               {:?}", rep.labels);
    println!("density floor        {:?}", rep.density_floor);
    if let Some(ws) = &rep.weiss {
        println!("W(x,4h)/(pi/2)       median {:.4} range [{:.4}, {:.4}]", ws.small_radius_ratio[0], ws.small_radius_ratio[1], ws.small_radius_ratio[2]);
        println!("max C-hat            {:.4}", ws.max_c_hat);
    }
    if let Some(t) = &rep.torsion {
        println!("torsion c0 {:.4}, witness min m/r {:.4}, violations {}", t.c0, t.witness.c, t.witness.violations);
    }
    println!("scaling quotients    c {:.4} C {:.4}", rep.scaling.c, rep.scaling.cap);
    Ok(())
}
