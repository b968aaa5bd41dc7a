//! Continuation in p for λ₂ + |Ω| from two blobs: each stage starts from the
//! previous minimizer, and the weight file tracks how ξ settles.
//!
//! cargo run --release --example p_continuation -- [n] [seed]

use shapeopt::domain::{shapes, Grid};
use shapeopt::objective::ObjectiveSpec;
use shapeopt::optimizer::{p_continuation, OptimizerConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(128);
    let seed: u64 = args.get(2).map(|s| s.parse()).transpose()?.unwrap_or(3);

    let grid = Grid::square(-2.75, 2.75, n)?;
    let init = shapes::two_blobs(grid, [[-1.3, 0.1], [1.25, -0.1]], [0.75, 0.9], 0.25, seed)?;
    let mut cfg = OptimizerConfig::new(ObjectiveSpec::single(2)?, 8.0)?;
    cfg.seed = seed;

    let run = p_continuation(&cfg, init, &[8.0, 16.0, 32.0, 64.0]);
    for t in &run.stages {
        let s = &t.state;
        println!(
            "p {:>3}: {:?} after {:>3} steps, lambda {:?}, lambda2 + |Omega| = {:.5}, components {}",
            t.p,
            t.stop,
            t.records.len() - 1,
            s.spectrum.lambdas.iter().map(|l| (l * 1e4).round() / 1e4).collect::<Vec<_>>(),
            s.plain_objective(&cfg.spec)?,
            s.domain.component_count()
        );
    }
    if let Some(e) = &run.error {
        println!("stopped early: {e}");
    }
    print!("{}", run.xi_csv());
    Ok(())
}
