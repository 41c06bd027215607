//! CALOT: incremental SAT descent over the CCX encoding. Starting from
//! N = ub tests, each satisfiable step demands coverage by one test fewer
//! (units c^{i-1}_τ) and freezes the now unneeded test i to its last values.

use crate::encode::{apply_symmetry, build_mcac, decode_tests, EncodingVariant};
use crate::sat::{Engine, SolveOutcome};
use crate::sut::SutModel;
use crate::tuples::{Bounds, TupleCatalog};
use crate::Error;

use super::{timed_out, Budget, Clock, OptimizerResult, Verdict};

/// Runs CALOT from `bounds.ub` tests down to `bounds.lb + 1`. The witness
/// suite in `bounds` is the incumbent until the solver improves on it.
pub fn calot(
    model: &SutModel,
    catalog: &TupleCatalog,
    bounds: &Bounds,
    variant: EncodingVariant,
    budget: &Budget,
    seed: u64,
) -> Result<OptimizerResult, Error> {
    let clock = Clock::start();
    let (lb, n) = (bounds.lb, bounds.ub);
    let mut result = OptimizerResult {
        best: bounds.ub_witness.len(),
        suite: bounds.ub_witness.clone(),
        certified: false,
        iterations: 0,
        log: Vec::new(),
        lb,
        ub: n,
        cost: None,
    };
    if !variant.is_ccx() {
        return Err(Error::Encoding("calot needs a ccx encoding".into()));
    }
    if n <= lb + 1 {
        result.certified = bounds.ub_witness.len() == lb + 1;
        return Ok(result);
    }

    let mut ctx = build_mcac(model, catalog, n, variant)?;
    apply_symmetry(&mut ctx, catalog, &bounds.lb_witness.witness)?;
    let mut engine = Engine::with_seed(seed);
    let cnf = ctx.sat_cnf();
    engine.ensure_vars(cnf.num_vars);
    engine.add_clauses(&cnf.clauses);

    for i in (lb + 1..=n).rev() {
        if budget.exhausted() {
            return Ok(result);
        }
        result.iterations += 1;
        budget.arm(&mut engine);
        match engine.solve(&[]).map_err(Error::from) {
            Ok(SolveOutcome::Sat(m)) => {
                result.log.push(clock.entry(i as u64, Verdict::Sat));
                let mut suite = decode_tests(&ctx, &m)?;
                suite.truncate(i);
                if suite.len() <= result.suite.len() {
                    result.best = suite.len();
                    result.suite = suite;
                }
                for &c in ctx.c_layer(i - 1) {
                    engine.add_clause(&[c]);
                }
                for row in ctx.test_vars(i) {
                    for &x in row {
                        engine.add_clause(&[if m.lit_value(x) { x } else { !x }]);
                    }
                }
            }
            Ok(SolveOutcome::Unsat(_)) => {
                result.log.push(clock.entry(i as u64 + 1, Verdict::Unsat));
                if i == n {
                    return Err(Error::Encoding(format!("no covering array with the upper bound of {n} tests")));
                }
                result.certified = true;
                return Ok(result);
            }
            Err(e) if timed_out(&e) => {
                result.log.push(clock.entry(result.best as u64, Verdict::Timeout));
                return Ok(result);
            }
            Err(e) => return Err(e),
        }
    }
    result.certified = true;
    Ok(result)
}
