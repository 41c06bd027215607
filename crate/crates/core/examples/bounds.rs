//! Classifies the pairs of the autonomous-driving model and brackets its
//! covering array number.

use ctmax::sut::parse_model;
use ctmax::tuples::{build_catalog, compute_bounds};

fn main() -> Result<(), ctmax::Error> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/autonomous.sut");
    let model = parse_model(&std::fs::read_to_string(path)?)?;
    let catalog = build_catalog(&model, 2)?;
    println!("{} pairs, {} allowed", catalog.len(), catalog.allowed_ids().len());
    for &id in catalog.forbidden_ids() {
        println!("  forbidden: {}", model.tuple_label(catalog.tuple(id)));
    }
    let b = compute_bounds(&model, &catalog, 0)?;
    println!("CAN is in {}..={} (greedy found {} tests)", b.lb + 1, b.ub, b.ub_witness.len());
    Ok(())
}
