//! End-to-end runs: classify tuples, bound, encode, solve, decode, verify.

use std::time::Duration;

use crate::cnf::Wcnf;
use crate::encode::{
    apply_symmetry, build_can_wcnf, build_mcac, build_mcac_scoped, build_tn_wcnf, decode_tests, EncodingVariant,
    TupleScope, WeightScheme,
};
use crate::sut::{SutModel, Test};
use crate::tuples::{build_catalog, compute_bounds, dummy_test, Bounds, TupleCatalog};
use crate::verify::verify_suite;
use crate::Error;

use super::{calot, linear_maxsat, wpm1_stratified, Budget, Clock, MaxSatResult, OptimizerResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CanAlgo {
    Calot,
    Linear,
    Wpm1,
}

impl CanAlgo {
    pub const ALL: [CanAlgo; 3] = [CanAlgo::Calot, CanAlgo::Linear, CanAlgo::Wpm1];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxSatAlgo {
    Linear,
    Wpm1,
}

pub fn solve_wcnf(wcnf: &Wcnf, algo: MaxSatAlgo, budget: &Budget, seed: u64) -> Result<MaxSatResult, Error> {
    match algo {
        MaxSatAlgo::Linear => linear_maxsat(wcnf, budget, seed),
        MaxSatAlgo::Wpm1 => wpm1_stratified(wcnf, budget, seed),
    }
}

#[derive(Debug, Clone)]
pub struct CanOptions {
    pub algo: CanAlgo,
    pub variant: EncodingVariant,
    pub weights: WeightScheme,
    pub nux: bool,
    pub symmetry: bool,
    pub seed: u64,
    pub per_call: Option<Duration>,
    pub global: Option<Duration>,
    /// Encode this many tests instead of the greedy upper bound (if larger).
    pub initial_ub: Option<usize>,
}

impl CanOptions {
    pub fn new(algo: CanAlgo) -> Self {
        CanOptions {
            algo,
            variant: EncodingVariant::CcxA0,
            weights: WeightScheme::Unit,
            nux: false,
            symmetry: true,
            seed: 0,
            per_call: Some(Duration::from_secs(60)),
            global: Some(Duration::from_secs(600)),
            initial_ub: None,
        }
    }
}

/// Minimum covering array. The returned suite always verifies as a
/// covering array; `certified` says whether its size is proven minimal.
pub fn solve_can_pipeline(model: &SutModel, t: usize, opts: &CanOptions) -> Result<OptimizerResult, Error> {
    let budget = Budget::new(opts.per_call, opts.global);
    let catalog = build_catalog(model, t)?;
    let bounds = compute_bounds(model, &catalog, opts.seed)?;
    let result = solve_can_with(model, &catalog, &bounds, opts, &budget)?;
    let report = verify_suite(model, &catalog, &result.suite);
    if !report.is_covering_array() || report.suite_size != result.best {
        return Err(Error::Encoding(format!(
            "decoded suite of {} tests fails verification ({} of {} tuples)",
            result.suite.len(),
            report.covered.len(),
            report.allowed
        )));
    }
    Ok(result)
}

fn solve_can_with(
    model: &SutModel,
    catalog: &TupleCatalog,
    bounds: &Bounds,
    opts: &CanOptions,
    budget: &Budget,
) -> Result<OptimizerResult, Error> {
    let (lb, ub) = (bounds.lb, bounds.ub);
    let n = opts.initial_ub.map_or(ub, |u| u.max(ub));
    let mut result = OptimizerResult {
        best: ub,
        suite: bounds.ub_witness.clone(),
        certified: ub == lb + 1,
        iterations: 0,
        log: Vec::new(),
        lb,
        ub,
        cost: None,
    };
    if result.certified {
        return Ok(result);
    }
    let witness: &[usize] = if opts.symmetry { &bounds.lb_witness.witness } else { &[] };

    if opts.algo == CanAlgo::Calot {
        let mut b = bounds.clone();
        b.ub = n;
        if !opts.symmetry {
            b.lb_witness.witness.clear();
        }
        let mut r = calot(model, catalog, &b, opts.variant, budget, opts.seed)?;
        r.ub = ub;
        return Ok(r);
    }

    let mut ctx = build_mcac(model, catalog, n, opts.variant)?;
    ctx.set_lb(lb);
    apply_symmetry(&mut ctx, catalog, witness)?;
    let dummy = if opts.nux { Some(dummy_test(model, opts.seed)?) } else { None };
    let wcnf = build_can_wcnf(&mut ctx, opts.weights, dummy.as_ref())?;
    let algo = if opts.algo == CanAlgo::Linear { MaxSatAlgo::Linear } else { MaxSatAlgo::Wpm1 };
    let r = solve_wcnf(&wcnf, algo, budget, opts.seed)?;
    if r.is_infeasible() {
        return Err(Error::Encoding(format!("no covering array with {n} tests, although greedy found {ub}")));
    }
    result.iterations = r.iterations;
    result.log = r.log;
    result.cost = r.model.as_ref().map(|_| r.cost);
    if let Some(m) = &r.model {
        let suite = decode_tests(&ctx, m)?;
        if suite.len() <= result.suite.len() {
            result.best = suite.len();
            result.suite = suite;
        }
        result.certified = r.certified;
    }
    Ok(result)
}

#[derive(Debug, Clone)]
pub struct TnOptions {
    pub algo: MaxSatAlgo,
    pub variant: EncodingVariant,
    pub scope: TupleScope,
    pub seed: u64,
    pub per_call: Option<Duration>,
    pub global: Option<Duration>,
}

impl TnOptions {
    pub fn new(algo: MaxSatAlgo) -> Self {
        TnOptions {
            algo,
            variant: EncodingVariant::CcxA2,
            scope: TupleScope::Allowed,
            seed: 0,
            per_call: Some(Duration::from_secs(60)),
            global: Some(Duration::from_secs(600)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TnResult {
    pub n: usize,
    /// Allowed tuples covered, recounted by the verifier.
    pub covered: usize,
    pub allowed: usize,
    /// Cost the solver reported; equals the uncovered count for CCX-a2.
    pub reported_cost: Option<u64>,
    pub certified: bool,
    pub suite: Vec<Test>,
    pub time_s: f64,
}

impl TnResult {
    pub fn ratio(&self) -> f64 {
        if self.allowed == 0 {
            1.0
        } else {
            self.covered as f64 / self.allowed as f64
        }
    }
}

/// Most tuples `n` tests can cover.
pub fn solve_tn_pipeline(model: &SutModel, t: usize, n: usize, opts: &TnOptions) -> Result<TnResult, Error> {
    let budget = Budget::new(opts.per_call, opts.global);
    let catalog = build_catalog(model, t)?;
    tn_with(model, &catalog, n, opts, &budget)
}

/// Tuple numbers for every N in `range`, sharing one catalog and one global
/// budget.
pub fn tn_sweep(
    model: &SutModel,
    t: usize,
    range: std::ops::RangeInclusive<usize>,
    opts: &TnOptions,
) -> Result<Vec<TnResult>, Error> {
    let budget = Budget::new(opts.per_call, opts.global);
    let catalog = build_catalog(model, t)?;
    range.map(|n| tn_with(model, &catalog, n, opts, &budget)).collect()
}

fn tn_with(
    model: &SutModel,
    catalog: &TupleCatalog,
    n: usize,
    opts: &TnOptions,
    budget: &Budget,
) -> Result<TnResult, Error> {
    let clock = Clock::start();
    let mut ctx = build_mcac_scoped(model, catalog, n, opts.variant, opts.scope)?;
    let wcnf = build_tn_wcnf(&mut ctx)?;
    let r = solve_wcnf(&wcnf, opts.algo, budget, opts.seed)?;
    let suite = match &r.model {
        Some(m) => decode_tests(&ctx, m)?,
        None => Vec::new(),
    };
    let report = verify_suite(model, catalog, &suite);
    if !report.all_valid() {
        return Err(Error::Encoding("decoded tuple-number suite violates the constraints".into()));
    }
    Ok(TnResult {
        n,
        covered: report.covered.len(),
        allowed: report.allowed,
        reported_cost: r.model.as_ref().map(|_| r.cost),
        certified: r.certified && r.model.is_some(),
        suite,
        time_s: clock.secs(),
    })
}
