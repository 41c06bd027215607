//! Linear SAT-UNSAT search: every model tightens a pseudo-Boolean bound on
//! the violated soft weight until the formula becomes unsatisfiable.

use crate::cnf::pb::{encode_pb_leq, IncrementalPb};
use crate::cnf::{Clause, Lit, NewVar, Wcnf};
use crate::sat::{Engine, SolveOutcome};
use crate::Error;

use super::{timed_out, Budget, Clock, MaxSatResult, Verdict};

pub struct Linear {
    engine: Engine,
    soft: Vec<(Clause, u64)>,
    /// (w_i, b_i): b_i true means soft clause i may be violated.
    terms: Vec<(u64, Lit)>,
    pb: Option<IncrementalPb>,
    top: u64,
}

impl Linear {
    /// Loads the hard clauses and the reified softs. A unit soft `(l)` uses
    /// `¬l` as its own indicator.
    pub fn new(wcnf: &Wcnf, seed: u64) -> Self {
        let mut engine = Engine::with_seed(seed);
        engine.ensure_vars(wcnf.num_vars);
        for c in &wcnf.hard {
            engine.add_clause(c);
        }
        let mut terms = Vec::with_capacity(wcnf.soft.len());
        for (c, w) in &wcnf.soft {
            let b = if c.len() == 1 {
                !c[0]
            } else {
                let b = engine.new_lit();
                let mut cl = c.clone();
                cl.push(b);
                engine.add_clause(&cl);
                b
            };
            engine.set_polarity(b.var(), Some(b.is_neg()));
            terms.push((*w, b));
        }
        Linear { engine, soft: wcnf.soft.clone(), terms, pb: None, top: wcnf.top() }
    }

    pub fn engine_mut(&mut self) -> &mut Engine {
        &mut self.engine
    }

    pub fn indicators(&self) -> &[(u64, Lit)] {
        &self.terms
    }

    /// Current PB bound, once one has been set.
    pub fn bound(&self) -> Option<u64> {
        self.pb.as_ref().map(IncrementalPb::bound)
    }

    /// Asserts `Σ w_i·b_i ≤ k`. The PB structure is built on first use and
    /// only tightened afterwards; a looser `k` is ignored.
    pub fn set_bound(&mut self, k: u64) -> Result<(), Error> {
        let clauses = match &mut self.pb {
            None => {
                let (pb, clauses) = encode_pb_leq(&self.terms, k, &mut self.engine)?;
                self.pb = Some(pb);
                clauses
            }
            Some(pb) if k < pb.bound() => pb.update(k)?,
            Some(_) => return Ok(()),
        };
        for c in &clauses {
            self.engine.add_clause(c);
        }
        Ok(())
    }

    fn cost_of(&self, model: &crate::cnf::Assignment) -> u64 {
        self.soft.iter().filter(|(c, _)| !model.satisfies(c)).map(|(_, w)| *w).sum()
    }

    pub fn solve(&mut self, budget: &Budget) -> Result<MaxSatResult, Error> {
        let clock = Clock::start();
        let mut best: Option<(u64, crate::cnf::Assignment)> = None;
        let mut log = Vec::new();
        let mut iterations = 0;
        let finish = |best: Option<(u64, crate::cnf::Assignment)>, certified, iterations, log, top| {
            let (cost, model) = match best {
                Some((c, m)) => (c, Some(m)),
                None => (top, None),
            };
            MaxSatResult { cost, model, certified, iterations, log }
        };
        loop {
            if budget.exhausted() {
                return Ok(finish(best, false, iterations, log, self.top));
            }
            iterations += 1;
            budget.arm(&mut self.engine);
            let outcome = self.engine.solve(&[]).map_err(Error::from);
            match outcome {
                Ok(SolveOutcome::Sat(model)) => {
                    let cost = self.cost_of(&model);
                    log.push(clock.entry(cost, Verdict::Sat));
                    best = Some((cost, model));
                    if cost == 0 {
                        return Ok(finish(best, true, iterations, log, self.top));
                    }
                    self.set_bound(cost - 1)?;
                }
                Ok(SolveOutcome::Unsat(_)) => {
                    let bound = best.as_ref().map_or(self.top, |b| b.0);
                    log.push(clock.entry(bound, Verdict::Unsat));
                    return Ok(finish(best, true, iterations, log, self.top));
                }
                Err(e) if timed_out(&e) => {
                    let bound = best.as_ref().map_or(self.top, |b| b.0);
                    log.push(clock.entry(bound, Verdict::Timeout));
                    return Ok(finish(best, false, iterations, log, self.top));
                }
                Err(e) => return Err(e),
            }
        }
    }
}

pub fn linear_maxsat(wcnf: &Wcnf, budget: &Budget, seed: u64) -> Result<MaxSatResult, Error> {
    Linear::new(wcnf, seed).solve(budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::Var;

    fn lit(v: i64) -> Lit {
        Lit::from_dimacs(v)
    }

    #[test]
    fn single_soft_costs_nothing() {
        let mut w = Wcnf::new();
        w.add_soft(vec![lit(-1)], 1);
        let r = linear_maxsat(&w, &Budget::unlimited(), 0).unwrap();
        assert_eq!((r.cost, r.certified), (0, true));
    }

    #[test]
    fn hard_conflict_gives_sentinel() {
        let mut w = Wcnf::new();
        w.add_hard(vec![lit(1)]);
        w.add_hard(vec![lit(-1)]);
        w.add_soft(vec![lit(2)], 3);
        let r = linear_maxsat(&w, &Budget::unlimited(), 0).unwrap();
        assert_eq!(r.cost, 4);
        assert!(r.is_infeasible());
    }

    #[test]
    fn weighted_choice() {
        // Exactly one of a, b; keeping a is worth 5, b is worth 2.
        let mut w = Wcnf::new();
        w.add_hard(vec![lit(1), lit(2)]);
        w.add_hard(vec![lit(-1), lit(-2)]);
        w.add_soft(vec![lit(1)], 5);
        w.add_soft(vec![lit(2)], 2);
        w.add_soft(vec![lit(-3), lit(1)], 1);
        let r = linear_maxsat(&w, &Budget::unlimited(), 0).unwrap();
        assert_eq!(r.cost, 2);
        assert!(r.model.unwrap().var_value(Var::new(1)));
    }

    #[test]
    fn bounds_decrease_strictly() {
        let mut w = Wcnf::new();
        for v in 1..=6 {
            w.add_soft(vec![lit(v)], v as u64);
        }
        w.add_hard((1..=6).map(|v| lit(-v)).collect());
        w.add_hard(vec![lit(-1), lit(-2)]);
        let r = linear_maxsat(&w, &Budget::unlimited(), 3).unwrap();
        assert_eq!(r.cost, 1);
        let sat: Vec<u64> = r.log.iter().filter(|e| e.verdict == Verdict::Sat).map(|e| e.bound).collect();
        assert!(sat.windows(2).all(|p| p[1] < p[0]));
    }
}
