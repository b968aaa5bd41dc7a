//! The anchoring penalty E(Ω) against a reference disk and the weight ξ₀
//! it induces on the boundary velocity.
//!
//! cargo run --release --example anchoring_penalty

use shapeopt::domain::{dilate, shapes, Grid};
use shapeopt::objective::{eval_penalty_e, xi0_field, PenaltySpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = Grid::square(-2.5, 2.5, 128)?;
    let star = shapes::disk(g, [0.0, 0.0], 1.0)?;
    let pen = PenaltySpec::new(0.1)?.with_reference(&star);
    println!("   t      E(t Omega*)   xi0 on boundary");
    for t in [0.8, 0.9, 1.0, 1.1, 1.25] {
        let d = dilate(&star, t)?;
        let xi0 = xi0_field(&d, &pen)?;
        println!("  {t:.2}   {:>10.6}   {:.5}", eval_penalty_e(&d, &pen)?, xi0.at([t, 0.0]));
    }
    Ok(())
}
