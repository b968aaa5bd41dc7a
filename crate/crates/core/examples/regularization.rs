//! The regularized family F_p: its gap to F and the weights ξ_k as p grows.
//!
//! cargo run --release --example regularization

use shapeopt::objective::{eval_f, eval_fp, grad_fp, ObjectiveSpec, RegularizationParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let specs = [
        ObjectiveSpec::single(2)?,
        ObjectiveSpec::linear(vec![1.0, 0.5, 0.25])?,
        ObjectiveSpec::softmin(vec![1, 2], 2.0, 2)?,
    ];
    let tuples: [&[f64]; 3] = [&[1.0, 2.0], &[2.0, 3.0, 5.0], &[3.0, 3.0]];
    for (spec, kappa) in specs.iter().zip(tuples) {
        println!("{} at kappa = {kappa:?}, F = {:.6}", spec.label(), eval_f(spec, kappa)?);
        println!("    p      F_p - F      xi");
        for p in [4.0, 8.0, 16.0, 32.0, 64.0, 128.0] {
            let reg = RegularizationParams::new(p)?;
            let gap = eval_fp(spec, kappa, &reg)? - eval_f(spec, kappa)?;
            let xi = grad_fp(spec, kappa, &reg)?;
            let xi: Vec<String> = xi.iter().map(|x| format!("{x:.4}")).collect();
            println!("  {p:>4}  {gap:>10.3e}  [{}]", xi.join(", "));
        }
    }
    Ok(())
}
