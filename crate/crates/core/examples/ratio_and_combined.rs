//! The two side problems: fewest tests reaching a coverage ratio, and
//! most coverage first with fewest tests second.

use ctmax::encode::{build_combined_wcnf, build_mcac, build_ratio, decode_tests, EncodingVariant, WeightScheme};
use ctmax::opt::{linear_maxsat, Budget};
use ctmax::sut::SutModel;
use ctmax::tuples::{build_catalog, lower_bound};

fn main() -> Result<(), ctmax::Error> {
    let model = SutModel::from_profile(&[2, 2, 2, 2]);
    let catalog = build_catalog(&model, 2)?;
    for rt in [0.25, 0.5, 0.75, 0.9, 1.0] {
        let mut ctx = build_mcac(&model, &catalog, 6, EncodingVariant::CcxA0)?;
        let r = linear_maxsat(&build_ratio(&mut ctx, rt)?, &Budget::unlimited(), 0)?;
        let suite = decode_tests(&ctx, r.model.as_ref().unwrap())?;
        println!("ratio {rt:.2}: {} tests", suite.len());
    }

    let mut ctx = build_mcac(&model, &catalog, 8, EncodingVariant::CcxA0)?;
    ctx.set_lb(lower_bound(&catalog).lb);
    let r = linear_maxsat(&build_combined_wcnf(&mut ctx, WeightScheme::Unit)?, &Budget::unlimited(), 0)?;
    let suite = decode_tests(&ctx, r.model.as_ref().unwrap())?;
    println!("combined with 8 slots: {} tests, cost {}", suite.len(), r.cost);
    Ok(())
}
