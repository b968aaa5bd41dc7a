//! Weiss energy W(x, r) for half-plane data, where it is constant π/2, and
//! on a disk boundary with its first eigenfunction. Prints `x,y,r,W` rows.
//! At a few cells the ball profile still carries O(h) quadrature noise, so
//! its C-hat is dominated by the first radius step.
//!
//! cargo run --release --example weiss_profile

use shapeopt::diagnostics::{optimal_ball_radius, weiss_csv, WeissField};
use shapeopt::domain::{shapes, Grid, GridDomain};
use shapeopt::objective::Xi0Field;
use shapeopt::spectral::{solve_spectrum, SpectrumOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::square(-1.0, 1.0, 128)?;
    let h = grid.h();
    let half = GridDomain::from_fn(grid, |x, y| 0.8 * x + 0.6 * y)?;
    let u: Vec<f64> = half.phi().iter().map(|p| (-p).max(0.0)).collect();
    let radii: Vec<f64> = (0..8).map(|k| 4.0 * h * 1.4f64.powi(k)).collect();
    let flat = WeissField::new(&half, &[u], &[1.0], Xi0Field::constant()).profile([0.0, 0.0], &radii)?;

    let big = Grid::square(-2.0, 2.0, 160)?;
    let r = optimal_ball_radius();
    let disk = shapes::disk(big, [0.0, 0.0], r)?;
    let sp = solve_spectrum(&disk, &SpectrumOptions::new(1))?;
    let radii: Vec<f64> = (0..8).map(|k| 4.0 * big.h() * 1.3f64.powi(k)).collect();
    let ball = WeissField::new(&disk, &sp.modes, &[1.0], Xi0Field::constant()).profile([r, 0.0], &radii)?;

    print!("{}", weiss_csv(&[flat.clone(), ball.clone()]));
    println!("# half-plane C-hat {:.4}, ball C-hat {:.4}, pi/2 = {:.6}", flat.c_hat, ball.c_hat, std::f64::consts::FRAC_PI_2);
    Ok(())
}
