//! Solving algorithms: CALOT over the SAT encoding, the Linear and
//! stratified WPM1 MaxSAT algorithms, incremental test-suite construction,
//! and the end-to-end pipelines that compose them.

mod calot;
mod its;
mod linear;
mod pipeline;
mod wpm1;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

pub use calot::calot;
pub use its::{incremental_its, ItsOptions, ItsStep};
pub use linear::{linear_maxsat, Linear};
pub use pipeline::{
    solve_can_pipeline, solve_tn_pipeline, solve_wcnf, tn_sweep, CanAlgo, CanOptions, MaxSatAlgo, TnOptions,
    TnResult,
};
pub use wpm1::wpm1_stratified;

use crate::cnf::Assignment;
use crate::sat::{Engine, EngineError};
use crate::sut::Test;
use crate::Error;

/// Wall-clock limits: one per solver call, one for the whole run.
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    per_call: Option<Duration>,
    deadline: Option<Instant>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget { per_call: None, deadline: None }
    }

    /// The global clock starts now.
    pub fn new(per_call: Option<Duration>, global: Option<Duration>) -> Self {
        Budget { per_call, deadline: global.map(|g| Instant::now() + g) }
    }

    pub fn call_deadline(&self) -> Option<Instant> {
        let call = self.per_call.map(|d| Instant::now() + d);
        match (call, self.deadline) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    pub fn exhausted(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    /// The same global deadline with a different per-call limit.
    pub fn with_per_call(&self, per_call: Option<Duration>) -> Self {
        Budget { per_call, deadline: self.deadline }
    }

    pub(crate) fn arm(&self, engine: &mut Engine) {
        engine.set_deadline(self.call_deadline());
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Verdict {
    Sat,
    Unsat,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct LogEntry {
    /// Upper bound after this step (cost for MaxSAT, suite size for CALOT).
    pub bound: u64,
    pub verdict: Verdict,
    pub elapsed_s: f64,
}

/// Outcome of a MaxSAT run. `cost` is the hard-unsat sentinel `top` when
/// no model exists.
#[derive(Debug, Clone)]
pub struct MaxSatResult {
    pub cost: u64,
    pub model: Option<Assignment>,
    pub certified: bool,
    pub iterations: usize,
    pub log: Vec<LogEntry>,
}

impl MaxSatResult {
    pub fn is_infeasible(&self) -> bool {
        self.certified && self.model.is_none()
    }
}

/// Covering-array run outcome. `best` is a suite size for CAN problems.
#[derive(Debug, Clone)]
pub struct OptimizerResult {
    pub best: usize,
    pub suite: Vec<Test>,
    pub certified: bool,
    pub iterations: usize,
    pub log: Vec<LogEntry>,
    pub lb: usize,
    pub ub: usize,
    /// Final MaxSAT cost, when a MaxSAT algorithm ran.
    pub cost: Option<u64>,
}

pub(crate) fn timed_out(e: &Error) -> bool {
    matches!(e, Error::Engine(EngineError::BudgetExceeded { .. }))
}

pub(crate) struct Clock(Instant);

impl Clock {
    pub fn start() -> Self {
        Clock(Instant::now())
    }

    pub fn entry(&self, bound: u64, verdict: Verdict) -> LogEntry {
        LogEntry { bound, verdict, elapsed_s: self.0.elapsed().as_secs_f64() }
    }

    pub fn secs(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

impl fmt::Display for CanAlgo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CanAlgo::Calot => "calot",
            CanAlgo::Linear => "linear",
            CanAlgo::Wpm1 => "wpm1",
        })
    }
}

impl FromStr for CanAlgo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "calot" => Ok(CanAlgo::Calot),
            "linear" => Ok(CanAlgo::Linear),
            "wpm1" => Ok(CanAlgo::Wpm1),
            _ => Err(Error::Invalid(format!("unknown algorithm '{s}' (calot, linear, wpm1)"))),
        }
    }
}

impl fmt::Display for MaxSatAlgo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MaxSatAlgo::Linear => "linear",
            MaxSatAlgo::Wpm1 => "wpm1",
        })
    }
}

impl FromStr for MaxSatAlgo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(MaxSatAlgo::Linear),
            "wpm1" => Ok(MaxSatAlgo::Wpm1),
            _ => Err(Error::Invalid(format!("unknown MaxSAT algorithm '{s}' (linear, wpm1)"))),
        }
    }
}
