//! Builds a suite a few tests at a time with each step kind and compares
//! coverage after every test.

use ctmax::opt::{incremental_its, Budget, ItsOptions, ItsStep};
use ctmax::sut::parse_model;
use ctmax::tuples::build_catalog;
use ctmax::verify::verify_suite;

fn main() -> Result<(), ctmax::Error> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/storage2.sut");
    let model = parse_model(&std::fs::read_to_string(path)?)?;
    let catalog = build_catalog(&model, 2)?;
    for (step, ni) in [(ItsStep::Heuristic, 1), (ItsStep::MaxSat, 1), (ItsStep::MaxSat, 3), (ItsStep::Sat, 1)] {
        let suite = incremental_its(&model, &catalog, &ItsOptions::new(40, ni, step), &Budget::unlimited())?;
        let prefix: Vec<usize> =
            (1..=suite.len()).map(|k| verify_suite(&model, &catalog, &suite[..k]).covered.len()).collect();
        println!("{step:>9} Ni={ni}: {} tests, first six {:?}", suite.len(), &prefix[..6.min(prefix.len())]);
    }
    Ok(())
}
