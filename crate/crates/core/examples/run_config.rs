//! Drives the command layer from code: parse a config, run `solve` into a
//! temporary directory and read back the manifest.
//!
//! cargo run --release --example run_config

use shapeopt::cli::{execute, Command, Config};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = Config::parse("[domain]\nshape=disk r=1 n=96\n[spectrum]\nM=3\n")?;
    let out = std::env::temp_dir().join(format!("shapeopt-run-config-{}", std::process::id()));
    let manifest = execute(Command::Solve, &cfg, "disk", &out, Some(1))?;
    println!("wrote {} artifacts to {}", manifest.artifacts.len(), out.display());
    println!("lambdas {}", manifest.summary["lambdas"]);
    print!("{}", std::fs::read_to_string(out.join("spectrum.csv"))?);
    std::fs::remove_dir_all(&out)?;
    Ok(())
}
