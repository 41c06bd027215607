//! Writes the covering-array MaxSAT instance and its variable map, so an
//! external solver can be run on it.

use std::fs::File;
use std::io::BufWriter;

use ctmax::cnf::dimacs::write_wcnf;
use ctmax::encode::{apply_symmetry, build_can_wcnf, build_mcac, write_var_map, EncodingVariant, WeightScheme};
use ctmax::sut::SutModel;
use ctmax::tuples::{build_catalog, compute_bounds};

fn main() -> Result<(), ctmax::Error> {
    let model = SutModel::from_profile(&[3, 3, 2, 2]);
    let catalog = build_catalog(&model, 2)?;
    let b = compute_bounds(&model, &catalog, 0)?;
    let mut ctx = build_mcac(&model, &catalog, b.ub + 1, EncodingVariant::CcxA2)?;
    ctx.set_lb(b.lb);
    apply_symmetry(&mut ctx, &catalog, &b.lb_witness.witness)?;
    let wcnf = build_can_wcnf(&mut ctx, WeightScheme::Linear, None)?;

    let dir = std::env::temp_dir();
    let (out, map) = (dir.join("ctmax-3x3x2x2.wcnf"), dir.join("ctmax-3x3x2x2.wcnf.map"));
    write_wcnf(&wcnf, BufWriter::new(File::create(&out)?))?;
    write_var_map(&ctx, &model, &catalog, BufWriter::new(File::create(&map)?))?;
    println!("{} vars, {} hard, {} soft", wcnf.num_vars, wcnf.hard.len(), wcnf.soft.len());
    println!("wrote {} and {}", out.display(), map.display());
    Ok(())
}
