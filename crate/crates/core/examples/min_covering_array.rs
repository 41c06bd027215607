//! Minimum covering array of the storage model with each algorithm.

use ctmax::opt::{solve_can_pipeline, CanAlgo, CanOptions};
use ctmax::sut::parse_model;

fn main() -> Result<(), ctmax::Error> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/storage2.sut");
    let model = parse_model(&std::fs::read_to_string(path)?)?;
    for algo in CanAlgo::ALL {
        let r = solve_can_pipeline(&model, 2, &CanOptions::new(algo))?;
        println!("{algo:>6}: {} tests (lb {}, greedy {}), certified={}", r.best, r.lb + 1, r.ub, r.certified);
    }
    let r = solve_can_pipeline(&model, 2, &CanOptions::new(CanAlgo::Calot))?;
    for t in r.suite.iter().take(3) {
        println!("  {}", model.test_labels(t).join(" "));
    }
    println!("  ...");
    Ok(())
}
