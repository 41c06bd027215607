//! Checks a hand-written suite, then shows what dropping its last tests
//! leaves uncovered.

use std::fs::File;

use ctmax::sut::parse_model;
use ctmax::tuples::build_catalog;
use ctmax::verify::{read_suite_csv, verify_suite};

fn main() -> Result<(), ctmax::Error> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let model = parse_model(&std::fs::read_to_string(format!("{dir}/autonomous.sut"))?)?;
    let catalog = build_catalog(&model, 2)?;
    let suite = read_suite_csv(&model, File::open(format!("{dir}/reference_suite.csv"))?)?;
    let full = verify_suite(&model, &catalog, &suite);
    println!("{} tests cover {}/{}", full.suite_size, full.covered.len(), full.allowed);

    let short = verify_suite(&model, &catalog, &suite[..suite.len() - 3]);
    println!("without the last 3: {}/{}", short.covered.len(), short.allowed);
    for &id in &short.missing {
        println!("  missing {}", model.tuple_label(catalog.tuple(id)));
    }
    Ok(())
}
