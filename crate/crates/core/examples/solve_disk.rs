//! Dirichlet eigenvalues and torsion function of the unit disk against
//! their closed forms.
//!
//! cargo run --release --example solve_disk -- [n]

use shapeopt::domain::{shapes, volume, Grid};
use shapeopt::spectral::{solve_spectrum, solve_torsion, SpectrumOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(128);
    let grid = Grid::square(-1.25, 1.25, n)?;
    let d = shapes::disk(grid, [0.0, 0.0], 1.0)?;

    let sp = solve_spectrum(&d, &SpectrumOptions::new(4))?;
    // squares of the Bessel zeros j01, j11, j11, j21
    let exact = [5.783186, 14.681971, 14.681971, 26.374616];
    println!("k   lambda_h      exact      rel.err    resid");
    for (k, (l, e)) in sp.lambdas.iter().zip(exact).enumerate() {
        println!("{}  {:>10.6}  {:>10.6}  {:>9.2e}  {:.1e}", k + 1, l, e, (l - e).abs() / e, sp.resid[k]);
    }
    println!("clusters {:?}", sp.clusters(1e-3));

    let tf = solve_torsion(&d)?;
    // v = (1 - |x|^2)/4, T = -pi/16
    println!("max v {:.6} (0.25), T {:.6} ({:.6})", tf.max(), tf.energy, -std::f64::consts::PI / 16.0);
    println!("|Omega| {:.6} (pi)", volume(&d));
    Ok(())
}
