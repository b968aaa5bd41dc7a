//! Minimizes λ₁(Ω) + |Ω| from a random blob; the optimum is a disk.
//!
//! cargo run --release --example faber_krahn -- [n] [seed]

use shapeopt::domain::{extract_boundary, shapes, Grid};
use shapeopt::objective::ObjectiveSpec;
use shapeopt::optimizer::{Optimizer, OptimizerConfig, StepOutcome};
use std::time::Instant;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(128);
    let seed: u64 = args.get(2).map(|s| s.parse()).transpose()?.unwrap_or(7);

    let grid = Grid::square(-2.0, 2.0, n)?;
    let init = shapes::random_blob(grid, [0.1, -0.05], 0.9, 0.35, seed)?;
    let mut cfg = OptimizerConfig::new(ObjectiveSpec::single(1)?, 32.0)?;
    cfg.seed = seed;

    let t0 = Instant::now();
    let mut opt = Optimizer::new(cfg.clone(), init)?;
    let mut small = 0;
    for _ in 0..cfg.max_steps {
        let outcome = opt.step()?;
        let s = opt.state();
        println!(
            "{:4} {:>10.6} vol {:.4} lambda {:.5} {:?} t={:.1}s",
            opt.records().len() - 1,
            s.objective,
            s.volume,
            s.spectrum.lambdas[0],
            outcome,
            t0.elapsed().as_secs_f64()
        );
        match outcome {
            StepOutcome::Accepted { decrease, .. } if decrease >= cfg.conv_tol * s.objective => small = 0,
            StepOutcome::Accepted { .. } if small + 1 < cfg.patience => small += 1,
            _ => break,
        }
    }
    let s = opt.state();
    let bm = extract_boundary(&s.domain);
    let roundness = 4.0 * std::f64::consts::PI * s.volume / bm.perimeter().powi(2);
    println!(
        "lambda1 + |Omega| = {:.6} (disk optimum 8.524885), roundness {:.4}",
        s.plain_objective(&cfg.spec)?,
        roundness
    );
    Ok(())
}
