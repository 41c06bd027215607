//! How many pairs the best N tests can cover, for N up to the covering
//! array number.

use ctmax::opt::{tn_sweep, MaxSatAlgo, TnOptions};
use ctmax::sut::parse_model;

fn main() -> Result<(), ctmax::Error> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/autonomous.sut");
    let model = parse_model(&std::fs::read_to_string(path)?)?;
    let mut prev = 0;
    for r in tn_sweep(&model, 2, 1..=8, &TnOptions::new(MaxSatAlgo::Linear))? {
        println!("N={} covered={:>2}/{} ({:5.1}%) +{}", r.n, r.covered, r.allowed, 100.0 * r.ratio(), r.covered - prev);
        prev = r.covered;
    }
    Ok(())
}
