//! Incremental test-suite construction: repeatedly append the tests that
//! cover the most still-uncovered tuples, until everything is covered or
//! N tests are in place.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use crate::encode::{build_mcac_over, build_tn_wcnf, decode_tests, EncodingVariant};
use crate::sat::{Engine, SolveOutcome};
use crate::sut::{SutModel, Test};
use crate::tuples::{GreedyBuilder, TupleCatalog};
use crate::Error;

use super::{linear_maxsat, Budget};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ItsStep {
    /// Tuple-number MaxSAT over the remaining tuples for the next Ni tests.
    MaxSat,
    /// One SAT query for a test covering at least one remaining tuple.
    Sat,
    /// The greedy one-test builder.
    Heuristic,
}

impl fmt::Display for ItsStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ItsStep::MaxSat => "maxsat",
            ItsStep::Sat => "sat",
            ItsStep::Heuristic => "heuristic",
        })
    }
}

impl FromStr for ItsStep {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "maxsat" => Ok(ItsStep::MaxSat),
            "sat" => Ok(ItsStep::Sat),
            "heuristic" | "greedy" => Ok(ItsStep::Heuristic),
            _ => Err(Error::Invalid(format!("unknown step '{s}' (maxsat, sat, heuristic)"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ItsOptions {
    pub n: usize,
    pub ni: usize,
    pub step: ItsStep,
    pub seed: u64,
    /// Limit for each maxsat step.
    pub per_iteration: Option<Duration>,
}

impl ItsOptions {
    pub fn new(n: usize, ni: usize, step: ItsStep) -> Self {
        ItsOptions { n, ni, step, seed: 0, per_iteration: Some(Duration::from_secs(100)) }
    }
}

pub fn incremental_its(
    model: &SutModel,
    catalog: &TupleCatalog,
    opts: &ItsOptions,
    budget: &Budget,
) -> Result<Vec<Test>, Error> {
    if opts.n < 1 || opts.ni < 1 {
        return Err(Error::Invalid("N and Ni must be at least 1".into()));
    }
    let mut uncovered: Vec<bool> = (0..catalog.len()).map(|i| catalog.is_allowed(i)).collect();
    let mut greedy = GreedyBuilder::new(model, catalog, opts.seed);
    let mut suite: Vec<Test> = Vec::new();
    let mut round = 0u64;

    while uncovered.iter().any(|&u| u) && suite.len() < opts.n {
        let n_now = opts.ni.min(opts.n - suite.len());
        let remaining: Vec<usize> = (0..catalog.len()).filter(|&i| uncovered[i]).collect();
        let seed = opts.seed.wrapping_add(round);
        round += 1;
        let mut fresh = match opts.step {
            ItsStep::MaxSat => {
                let tests = maxsat_step(model, catalog, &remaining, n_now, seed, opts, budget)?;
                if gain(catalog, &uncovered, &tests) == 0 {
                    vec![sat_step(model, catalog, &remaining, seed)?]
                } else {
                    tests
                }
            }
            ItsStep::Sat => vec![sat_step(model, catalog, &remaining, seed)?],
            ItsStep::Heuristic => {
                let mut out = Vec::new();
                let mut local = uncovered.clone();
                for _ in 0..n_now {
                    let Some(t) = greedy.next_test(&local)? else { break };
                    mark(catalog, &mut local, &t);
                    out.push(t);
                }
                out
            }
        };
        fresh.truncate(opts.n - suite.len());
        for t in &fresh {
            mark(catalog, &mut uncovered, t);
        }
        suite.extend(fresh);
    }
    Ok(suite)
}

fn mark(catalog: &TupleCatalog, uncovered: &mut [bool], t: &Test) {
    for id in catalog.tuples_of_test(t) {
        uncovered[id] = false;
    }
}

fn gain(catalog: &TupleCatalog, uncovered: &[bool], tests: &[Test]) -> usize {
    let mut local = uncovered.to_vec();
    let before = local.iter().filter(|&&u| u).count();
    for t in tests {
        mark(catalog, &mut local, t);
    }
    before - local.iter().filter(|&&u| u).count()
}

fn maxsat_step(
    model: &SutModel,
    catalog: &TupleCatalog,
    remaining: &[usize],
    n: usize,
    seed: u64,
    opts: &ItsOptions,
    budget: &Budget,
) -> Result<Vec<Test>, Error> {
    let mut ctx = build_mcac_over(model, catalog, n, EncodingVariant::CcxA2, remaining)?;
    let wcnf = build_tn_wcnf(&mut ctx)?;
    let r = linear_maxsat(&wcnf, &budget.with_per_call(opts.per_iteration), seed)?;
    match r.model {
        Some(m) => decode_tests(&ctx, &m),
        None => Ok(Vec::new()),
    }
}

/// A valid test covering at least one tuple of `remaining`.
fn sat_step(model: &SutModel, catalog: &TupleCatalog, remaining: &[usize], seed: u64) -> Result<Test, Error> {
    let ctx = build_mcac_over(model, catalog, 1, EncodingVariant::Cx, remaining)?;
    let mut engine = Engine::with_seed(seed);
    engine.ensure_vars(ctx.num_vars());
    engine.add_clauses(ctx.hard_clauses());
    let any: Vec<_> = (0..remaining.len()).map(|k| ctx.c(1, k)).collect();
    engine.add_clause(&any);
    match engine.solve(&[])? {
        SolveOutcome::Sat(m) => Ok(decode_tests(&ctx, &m)?.remove(0)),
        SolveOutcome::Unsat(_) => Err(Error::Encoding("no valid test covers a remaining tuple".into())),
    }
}
