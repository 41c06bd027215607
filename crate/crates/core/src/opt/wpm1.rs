//! Core-guided WPM1 with weight stratification. Soft clauses enter the
//! engine as retractable clauses, heaviest stratum first; every core is
//! split at its minimum weight and relaxed with fresh variables under an
//! exactly-one constraint.

use std::collections::HashMap;

use crate::cnf::card::encode_eo;
use crate::cnf::{Assignment, Clause, Lit, NewVar, Wcnf};
use crate::sat::{Engine, SolveOutcome};
use crate::Error;

use super::{timed_out, Budget, Clock, MaxSatResult, Verdict};

struct Soft {
    clause: Clause,
    weight: u64,
}

pub fn wpm1_stratified(wcnf: &Wcnf, budget: &Budget, seed: u64) -> Result<MaxSatResult, Error> {
    let clock = Clock::start();
    let mut engine = Engine::with_seed(seed);
    engine.ensure_vars(wcnf.num_vars);
    for c in &wcnf.hard {
        engine.add_clause(c);
    }
    let mut pending: Vec<Soft> = wcnf.soft.iter().map(|(c, w)| Soft { clause: c.clone(), weight: *w }).collect();
    let mut active: HashMap<Lit, Soft> = HashMap::new();
    let mut threshold = pending.iter().map(|s| s.weight).max().unwrap_or(0);
    let mut lower = 0u64;
    let mut best: Option<(u64, Assignment)> = None;
    let mut log = Vec::new();
    let mut iterations = 0;

    let done = |best: Option<(u64, Assignment)>, certified, iterations, log| {
        let (cost, model) = match best {
            Some((c, m)) => (c, Some(m)),
            None => (wcnf.top(), None),
        };
        Ok(MaxSatResult { cost, model, certified, iterations, log })
    };

    loop {
        // Activate the current stratum, keeping a stable order.
        let (now, later): (Vec<Soft>, Vec<Soft>) = pending.into_iter().partition(|s| s.weight >= threshold);
        pending = later;
        for s in now {
            let sel = engine.add_retractable(&s.clause);
            active.insert(sel, s);
        }
        if budget.exhausted() {
            return done(best, false, iterations, log);
        }
        iterations += 1;
        budget.arm(&mut engine);
        match engine.solve(&[]).map_err(Error::from) {
            Ok(SolveOutcome::Sat(model)) => {
                let cost = wcnf.soft_cost(&model);
                log.push(clock.entry(cost, Verdict::Sat));
                if best.as_ref().is_none_or(|b| cost < b.0) {
                    best = Some((cost, model));
                }
                match pending.iter().map(|s| s.weight).max() {
                    Some(w) => threshold = w,
                    None => {
                        debug_assert_eq!(best.as_ref().map(|b| b.0), Some(lower));
                        return done(best, true, iterations, log);
                    }
                }
            }
            Ok(SolveOutcome::Unsat(core)) => {
                let in_core: Vec<Lit> = core.iter().copied().filter(|l| active.contains_key(l)).collect();
                if in_core.is_empty() {
                    log.push(clock.entry(wcnf.top(), Verdict::Unsat));
                    return done(None, true, iterations, log);
                }
                let wmin = in_core.iter().map(|l| active[l].weight).min().unwrap();
                let mut relax = Vec::with_capacity(in_core.len());
                for sel in in_core {
                    let s = active.remove(&sel).unwrap();
                    engine.retract_selector(sel)?;
                    let b = engine.new_lit();
                    let mut relaxed = s.clause.clone();
                    relaxed.push(b);
                    let nsel = engine.add_retractable(&relaxed);
                    active.insert(nsel, Soft { clause: relaxed, weight: wmin });
                    if s.weight > wmin {
                        pending.push(Soft { clause: s.clause, weight: s.weight - wmin });
                    }
                    relax.push(b);
                }
                for c in encode_eo(&relax, &mut engine)? {
                    engine.add_clause(&c);
                }
                lower += wmin;
                log.push(clock.entry(lower, Verdict::Unsat));
            }
            Err(e) if timed_out(&e) => {
                log.push(clock.entry(best.as_ref().map_or(wcnf.top(), |b| b.0), Verdict::Timeout));
                return done(best, false, iterations, log);
            }
            Err(e) => return Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(v: i64) -> Lit {
        Lit::from_dimacs(v)
    }

    #[test]
    fn one_of_two_violated() {
        let mut w = Wcnf::new();
        w.add_hard(vec![lit(1), lit(2)]);
        w.add_soft(vec![lit(-1)], 1);
        w.add_soft(vec![lit(-2)], 1);
        let r = wpm1_stratified(&w, &Budget::unlimited(), 0).unwrap();
        assert_eq!((r.cost, r.certified), (1, true));
    }

    #[test]
    fn contradictory_units() {
        let mut w = Wcnf::new();
        w.add_soft(vec![lit(1)], 1);
        w.add_soft(vec![lit(-1)], 1);
        let r = wpm1_stratified(&w, &Budget::unlimited(), 0).unwrap();
        assert_eq!(r.cost, 1);
    }

    #[test]
    fn hard_unsat_is_infinite() {
        let mut w = Wcnf::new();
        w.add_hard(vec![lit(1)]);
        w.add_hard(vec![lit(-1)]);
        w.add_soft(vec![lit(2)], 2);
        let r = wpm1_stratified(&w, &Budget::unlimited(), 0).unwrap();
        assert!(r.is_infeasible());
        assert_eq!(r.cost, 3);
    }

    #[test]
    fn split_weights_match_linear() {
        // Pairwise conflicts among weighted units: the optimum keeps the
        // heaviest independent set.
        let mut w = Wcnf::new();
        let weights = [4u64, 3, 3, 2, 5];
        for (i, &wt) in weights.iter().enumerate() {
            w.add_soft(vec![lit(i as i64 + 1)], wt);
        }
        for (a, b) in [(1, 2), (2, 3), (3, 4), (4, 5), (1, 5)] {
            w.add_hard(vec![lit(-a), lit(-b)]);
        }
        let r = wpm1_stratified(&w, &Budget::unlimited(), 0).unwrap();
        let l = super::super::linear_maxsat(&w, &Budget::unlimited(), 0).unwrap();
        assert_eq!(r.cost, l.cost);
        assert_eq!(r.cost, 17 - 8);
    }
}
