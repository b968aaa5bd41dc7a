//! Density-based boundary labels on shapes with known local geometry: a
//! smooth disk, an L-shape with a reentrant corner, and a slit square.
//!
//! cargo run --release --example classify_shapes

use shapeopt::diagnostics::{classify_boundary, default_radii, Label};
use shapeopt::domain::{extract_boundary, shapes, Grid, GridDomain};

fn report(name: &str, d: &GridDomain) -> Result<(), Box<dyn std::error::Error>> {
    let bm = extract_boundary(d);
    let labels = classify_boundary(d, &bm, &default_radii(d, &bm, 5))?;
    let count = |l: Label| labels.iter().filter(|b| b.label == l).count();
    println!(
        "{name:<10} samples {:>4}  reduced {:>4}  singular {:>3}  cusp {:>3}",
        labels.len(),
        count(Label::Reduced),
        count(Label::SingularCandidate),
        count(Label::CuspCandidate)
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = Grid::square(-1.5, 1.5, 128)?;
    report("disk", &shapes::disk(g, [0.0, 0.0], 1.0)?)?;
    report("l_shape", &shapes::l_shape(g, [-1.0, -1.0], 2.0)?)?;
    let y = 0.3 * g.h();
    report("slit", &shapes::slit_rectangle(g, [-1.0, 1.0, -1.0, 1.0], [-0.5, y], [0.5, y])?)?;
    Ok(())
}
