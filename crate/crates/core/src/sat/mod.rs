//! Incremental CDCL SAT engine.
//!
//! MiniSat-style core: two watched literals with blockers, VSIDS branching,
//! first-UIP learning with recursive minimization, Luby restarts (unit 64),
//! phase saving and activity-based learnt clause deletion. Assumptions are
//! decided first, one per decision level, and a failed assumption yields a
//! core drawn from the assumption set.
//!
//! Retractable clauses carry an activation literal `a`: the stored clause is
//! `c ∨ ¬a` and `a` is assumed on every solve until the clause is retracted,
//! at which point the unit `¬a` is added permanently.

mod heap;

use std::collections::HashMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cnf::{Assignment, Clause, Lit, NewVar, Var};
use heap::VarHeap;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("solver budget exhausted after {conflicts} conflicts")]
    BudgetExceeded { conflicts: u64 },
    #[error("retracting a clause that was never added as retractable: {0:?}")]
    NotRetractable(Clause),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Sat(Assignment),
    /// Subset of the assumptions (including active activation literals)
    /// that is unsatisfiable together with the permanent clauses.
    Unsat(Vec<Lit>),
}

impl SolveOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveOutcome::Sat(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Propagation {
    /// Every literal true at the fixpoint, in trail order.
    Fixpoint(Vec<Lit>),
    Conflict,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Stats {
    pub solves: u64,
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub restarts: u64,
}

const TRUE: i8 = 1;
const FALSE: i8 = -1;
const UNDEF: i8 = 0;
const NO_REASON: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct ClauseData {
    lits: Vec<Lit>,
    learnt: bool,
    deleted: bool,
    activity: f64,
}

#[derive(Debug, Clone, Copy)]
struct Watcher {
    cref: u32,
    blocker: Lit,
}

enum Search {
    Sat,
    Unsat,
    Restart,
}

pub struct Engine {
    num_vars: usize,
    clauses: Vec<ClauseData>,
    free: Vec<u32>,
    learnts: Vec<u32>,
    watches: Vec<Vec<Watcher>>,
    vals: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<u32>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,

    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    order: VarHeap,
    phase: Vec<bool>,
    polarity: Vec<Option<bool>>,

    seen: Vec<u8>,
    analyze_stack: Vec<Lit>,
    analyze_clear: Vec<Lit>,

    ok: bool,
    assumptions: Vec<Lit>,
    retractable: HashMap<Clause, Vec<Lit>>,
    selectors: Vec<Lit>,

    model: Assignment,
    core: Vec<Lit>,

    conflict_limit: Option<u64>,
    deadline: Option<Instant>,
    max_learnts: f64,
    adjust_confl: f64,
    adjust_cnt: u64,

    rng: ChaCha8Rng,
    stats: Stats,
}

impl Default for Engine {
    fn default() -> Self {
        Self::new()
    }
}

const VAR_DECAY: f64 = 0.95;
const CLA_DECAY: f64 = 0.999;
const RESTART_UNIT: f64 = 64.0;

fn luby(y: f64, mut x: u64) -> f64 {
    let (mut size, mut seq) = (1u64, 0i32);
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    y.powi(seq)
}

impl Engine {
    pub fn new() -> Self {
        Self::with_seed(0)
    }

    /// The seed perturbs initial variable activities, which changes branching
    /// order and therefore which model is found first.
    pub fn with_seed(seed: u64) -> Self {
        Engine {
            num_vars: 0,
            clauses: Vec::new(),
            free: Vec::new(),
            learnts: Vec::new(),
            watches: vec![Vec::new(), Vec::new()],
            vals: vec![UNDEF, UNDEF],
            level: vec![0],
            reason: vec![NO_REASON],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: vec![0.0],
            var_inc: 1.0,
            cla_inc: 1.0,
            order: VarHeap::default(),
            phase: vec![false],
            polarity: vec![None],
            seen: vec![0],
            analyze_stack: Vec::new(),
            analyze_clear: Vec::new(),
            ok: true,
            assumptions: Vec::new(),
            retractable: HashMap::new(),
            selectors: Vec::new(),
            model: Assignment::default(),
            core: Vec::new(),
            conflict_limit: None,
            deadline: None,
            max_learnts: 0.0,
            adjust_confl: 100.0,
            adjust_cnt: 100,
            rng: ChaCha8Rng::seed_from_u64(seed),
            stats: Stats::default(),
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars as u32
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    /// Grows the variable range so that ids `1..=n` exist.
    pub fn ensure_vars(&mut self, n: u32) {
        while self.num_vars < n as usize {
            self.push_var();
        }
    }

    fn push_var(&mut self) -> Var {
        self.num_vars += 1;
        let v = self.num_vars;
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.vals.push(UNDEF);
        self.vals.push(UNDEF);
        self.level.push(0);
        self.reason.push(NO_REASON);
        self.activity.push(self.rng.gen::<f64>() * 1e-5);
        self.phase.push(false);
        self.polarity.push(None);
        self.seen.push(0);
        self.order.insert(v as u32, &self.activity);
        Var::new(v as u32)
    }

    /// Fixes the preferred branching value of `v`; `None` restores phase saving.
    pub fn set_polarity(&mut self, v: Var, value: Option<bool>) {
        self.ensure_vars(v.id());
        self.polarity[v.index()] = value;
    }

    pub fn set_conflict_limit(&mut self, limit: Option<u64>) {
        self.conflict_limit = limit;
    }

    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.deadline = deadline;
    }

    pub fn model(&self) -> &Assignment {
        &self.model
    }

    pub fn core(&self) -> &[Lit] {
        &self.core
    }

    /// False once the permanent clauses are known to be unsatisfiable.
    pub fn is_ok(&self) -> bool {
        self.ok
    }

    #[inline]
    fn value(&self, l: Lit) -> i8 {
        self.vals[l.code()]
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn touch(&mut self, lits: &[Lit]) {
        if let Some(m) = lits.iter().map(|l| l.var().id()).max() {
            self.ensure_vars(m);
        }
    }

    /// Adds a permanent clause. Returns false if the database became
    /// unsatisfiable at the root.
    pub fn add_clause(&mut self, clause: &[Lit]) -> bool {
        self.touch(clause);
        if !self.ok {
            return false;
        }
        debug_assert_eq!(self.decision_level(), 0);
        let mut c: Vec<Lit> = clause.to_vec();
        c.sort_unstable();
        c.dedup();
        let mut out = Vec::with_capacity(c.len());
        for (i, &l) in c.iter().enumerate() {
            if self.value(l) == TRUE || (i + 1 < c.len() && c[i + 1] == !l) {
                return true;
            }
            if self.value(l) != FALSE {
                out.push(l);
            }
        }
        match out.len() {
            0 => {
                self.ok = false;
                false
            }
            1 => {
                self.assign(out[0], NO_REASON);
                if self.propagate().is_some() {
                    self.ok = false;
                }
                self.ok
            }
            _ => {
                let cref = self.alloc_clause(out, false);
                self.attach(cref);
                true
            }
        }
    }

    pub fn add_clauses<'a, I: IntoIterator<Item = &'a Clause>>(&mut self, clauses: I) -> bool {
        let mut ok = true;
        for c in clauses {
            ok &= self.add_clause(c);
        }
        ok
    }

    /// Adds `clause` guarded by a fresh activation literal, which is returned.
    pub fn add_retractable(&mut self, clause: &[Lit]) -> Lit {
        self.touch(clause);
        let a = self.new_lit();
        let mut guarded = clause.to_vec();
        guarded.push(!a);
        self.add_clause(&guarded);
        self.retractable.entry(canonical(clause)).or_default().push(a);
        self.selectors.push(a);
        a
    }

    /// Permanently disables one registered copy of `clause`.
    pub fn retract_clause(&mut self, clause: &[Lit]) -> Result<(), EngineError> {
        let key = canonical(clause);
        let a = match self.retractable.get_mut(&key).and_then(|v| v.pop()) {
            Some(a) => a,
            None => return Err(EngineError::NotRetractable(clause.to_vec())),
        };
        if self.retractable.get(&key).is_some_and(|v| v.is_empty()) {
            self.retractable.remove(&key);
        }
        self.disable_selector(a);
        Ok(())
    }

    /// Retracts the clause registered under activation literal `a`.
    pub fn retract_selector(&mut self, a: Lit) -> Result<(), EngineError> {
        let key = self
            .retractable
            .iter()
            .find(|(_, v)| v.contains(&a))
            .map(|(k, _)| k.clone())
            .ok_or_else(|| EngineError::NotRetractable(vec![a]))?;
        let v = self.retractable.get_mut(&key).unwrap();
        v.retain(|&x| x != a);
        if v.is_empty() {
            self.retractable.remove(&key);
        }
        self.disable_selector(a);
        Ok(())
    }

    fn disable_selector(&mut self, a: Lit) {
        self.selectors.retain(|&x| x != a);
        self.add_clause(&[!a]);
    }

    pub fn active_selectors(&self) -> &[Lit] {
        &self.selectors
    }

    fn alloc_clause(&mut self, lits: Vec<Lit>, learnt: bool) -> u32 {
        let data = ClauseData { lits, learnt, deleted: false, activity: 0.0 };
        if let Some(cref) = self.free.pop() {
            self.clauses[cref as usize] = data;
            cref
        } else {
            self.clauses.push(data);
            (self.clauses.len() - 1) as u32
        }
    }

    fn attach(&mut self, cref: u32) {
        let c = &self.clauses[cref as usize].lits;
        let (l0, l1) = (c[0], c[1]);
        self.watches[l0.code()].push(Watcher { cref, blocker: l1 });
        self.watches[l1.code()].push(Watcher { cref, blocker: l0 });
    }

    #[inline]
    fn assign(&mut self, l: Lit, reason: u32) {
        let v = l.var().index();
        self.vals[l.code()] = TRUE;
        self.vals[(!l).code()] = FALSE;
        self.level[v] = self.decision_level() as u32;
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Unit propagation; returns a conflicting clause if one is found.
    fn propagate(&mut self) -> Option<u32> {
        let mut conflict = None;
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let (mut i, mut j) = (0, 0);
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.vals[w.blocker.code()] == TRUE {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let lits = &mut self.clauses[w.cref as usize].lits;
                if lits[0] == false_lit {
                    lits.swap(0, 1);
                }
                let first = lits[0];
                let nw = Watcher { cref: w.cref, blocker: first };
                if first != w.blocker && self.vals[first.code()] == TRUE {
                    ws[j] = nw;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..lits.len() {
                    if self.vals[lits[k].code()] != FALSE {
                        lits.swap(1, k);
                        self.watches[lits[1].code()].push(nw);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = nw;
                j += 1;
                if self.vals[first.code()] == FALSE {
                    conflict = Some(w.cref);
                    self.qhead = self.trail.len();
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.assign(first, w.cref);
                }
            }
            ws.truncate(j);
            self.watches[false_lit.code()] = ws;
            if conflict.is_some() {
                break;
            }
        }
        conflict
    }

    fn cancel_until(&mut self, lvl: usize) {
        if self.decision_level() <= lvl {
            return;
        }
        let start = self.trail_lim[lvl];
        for idx in (start..self.trail.len()).rev() {
            let l = self.trail[idx];
            let v = l.var().index();
            self.vals[l.code()] = UNDEF;
            self.vals[(!l).code()] = UNDEF;
            self.reason[v] = NO_REASON;
            self.phase[v] = l.is_pos();
            self.order.insert(v as u32, &self.activity);
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(lvl);
        self.qhead = start;
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.bumped(v as u32, &self.activity);
    }

    fn bump_clause(&mut self, cref: u32) {
        let c = &mut self.clauses[cref as usize];
        if !c.learnt {
            return;
        }
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for &r in &self.learnts {
                self.clauses[r as usize].activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    fn abstract_level(&self, v: usize) -> u32 {
        1 << (self.level[v] & 31)
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first, highest remaining level second) and the backjump level.
    fn analyze(&mut self, mut confl: u32) -> (Vec<Lit>, usize) {
        let mut learnt = vec![Lit::from_code(0)];
        let mut path = 0usize;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        let dl = self.decision_level() as u32;
        loop {
            self.bump_clause(confl);
            let skip = usize::from(p.is_some());
            for k in skip..self.clauses[confl as usize].lits.len() {
                let q = self.clauses[confl as usize].lits[k];
                let v = q.var().index();
                if self.seen[v] == 0 && self.level[v] > 0 {
                    self.bump_var(v);
                    self.seen[v] = 1;
                    if self.level[v] >= dl {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var().index()] != 0 {
                    break;
                }
            }
            let pl = self.trail[idx];
            p = Some(pl);
            confl = self.reason[pl.var().index()];
            self.seen[pl.var().index()] = 0;
            path -= 1;
            if path == 0 {
                break;
            }
        }
        learnt[0] = !p.unwrap();

        // Recursive minimization.
        self.analyze_clear.clear();
        self.analyze_clear.extend_from_slice(&learnt);
        let abs = learnt[1..].iter().fold(0u32, |a, l| a | self.abstract_level(l.var().index()));
        let mut keep = 1;
        for i in 1..learnt.len() {
            let l = learnt[i];
            if self.reason[l.var().index()] == NO_REASON || !self.lit_redundant(l, abs) {
                learnt[keep] = l;
                keep += 1;
            }
        }
        learnt.truncate(keep);

        let bt = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var().index()] > self.level[learnt[max_i].var().index()] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            self.level[learnt[1].var().index()] as usize
        };
        for l in std::mem::take(&mut self.analyze_clear) {
            self.seen[l.var().index()] = 0;
        }
        (learnt, bt)
    }

    fn lit_redundant(&mut self, p: Lit, abs: u32) -> bool {
        self.analyze_stack.clear();
        self.analyze_stack.push(p);
        let top = self.analyze_clear.len();
        while let Some(q) = self.analyze_stack.pop() {
            let r = self.reason[q.var().index()];
            let n = self.clauses[r as usize].lits.len();
            for k in 1..n {
                let l = self.clauses[r as usize].lits[k];
                let v = l.var().index();
                if self.seen[v] == 0 && self.level[v] > 0 {
                    if self.reason[v] != NO_REASON && (self.abstract_level(v) & abs) != 0 {
                        self.seen[v] = 1;
                        self.analyze_stack.push(l);
                        self.analyze_clear.push(l);
                    } else {
                        for l in self.analyze_clear.drain(top..) {
                            self.seen[l.var().index()] = 0;
                        }
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Collects the assumptions responsible for `failed` being false.
    fn analyze_final(&mut self, failed: Lit) {
        self.core.clear();
        self.core.push(failed);
        if self.decision_level() == 0 {
            return;
        }
        self.seen[failed.var().index()] = 1;
        for i in (self.trail_lim[0]..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var().index();
            if self.seen[v] == 0 {
                continue;
            }
            let r = self.reason[v];
            if r == NO_REASON {
                if l != failed {
                    self.core.push(l);
                }
            } else {
                for k in 1..self.clauses[r as usize].lits.len() {
                    let q = self.clauses[r as usize].lits[k];
                    if self.level[q.var().index()] > 0 {
                        self.seen[q.var().index()] = 1;
                    }
                }
            }
            self.seen[v] = 0;
        }
        self.seen[failed.var().index()] = 0;
    }

    fn locked(&self, cref: u32) -> bool {
        let l0 = self.clauses[cref as usize].lits[0];
        self.value(l0) == TRUE && self.reason[l0.var().index()] == cref
    }

    fn reduce_db(&mut self) {
        let mut ls = std::mem::take(&mut self.learnts);
        ls.sort_by(|&a, &b| {
            let (ca, cb) = (&self.clauses[a as usize], &self.clauses[b as usize]);
            (ca.lits.len() > 2)
                .cmp(&(cb.lits.len() > 2))
                .reverse()
                .then(ca.activity.partial_cmp(&cb.activity).unwrap())
        });
        let extra_lim = self.cla_inc / ls.len().max(1) as f64;
        let half = ls.len() / 2;
        let mut kept = Vec::with_capacity(ls.len());
        let mut removed = false;
        for (i, &cref) in ls.iter().enumerate() {
            let c = &self.clauses[cref as usize];
            if c.lits.len() > 2 && !self.locked(cref) && (i < half || c.activity < extra_lim) {
                self.clauses[cref as usize].deleted = true;
                removed = true;
            } else {
                kept.push(cref);
            }
        }
        self.learnts = kept;
        if removed {
            let clauses = &self.clauses;
            for ws in self.watches.iter_mut() {
                ws.retain(|w| !clauses[w.cref as usize].deleted);
            }
            for (i, c) in self.clauses.iter_mut().enumerate() {
                if c.deleted && !c.lits.is_empty() {
                    c.lits = Vec::new();
                    self.free.push(i as u32);
                }
            }
        }
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.order.pop(&self.activity) {
            let var = Var::new(v);
            if self.vals[var.pos().code()] == UNDEF {
                let pol = self.polarity[v as usize].unwrap_or(self.phase[v as usize]);
                return Some(var.lit(pol));
            }
        }
        None
    }

    fn budget_hit(&self, start: u64) -> bool {
        if let Some(lim) = self.conflict_limit {
            if self.stats.conflicts - start >= lim {
                return true;
            }
        }
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn search(&mut self, nof_conflicts: u64, start: u64) -> Result<Search, EngineError> {
        let mut conflicts = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    self.core.clear();
                    return Ok(Search::Unsat);
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.assign(learnt[0], NO_REASON);
                } else {
                    let l0 = learnt[0];
                    let cref = self.alloc_clause(learnt, true);
                    self.attach(cref);
                    self.learnts.push(cref);
                    self.bump_clause(cref);
                    self.assign(l0, cref);
                }
                self.var_inc /= VAR_DECAY;
                self.cla_inc /= CLA_DECAY;
                self.adjust_cnt -= 1;
                if self.adjust_cnt == 0 {
                    self.adjust_confl *= 1.5;
                    self.adjust_cnt = self.adjust_confl as u64;
                    self.max_learnts *= 1.1;
                }
                if (conflicts & 63 == 0 || self.conflict_limit.is_some()) && self.budget_hit(start) {
                    return Err(EngineError::BudgetExceeded { conflicts: self.stats.conflicts - start });
                }
            } else {
                if conflicts >= nof_conflicts {
                    self.cancel_until(0);
                    return Ok(Search::Restart);
                }
                if self.learnts.len() as f64 - self.trail.len() as f64 >= self.max_learnts {
                    self.reduce_db();
                }
                let mut next = None;
                while self.decision_level() < self.assumptions.len() {
                    let a = self.assumptions[self.decision_level()];
                    match self.value(a) {
                        TRUE => self.trail_lim.push(self.trail.len()),
                        FALSE => {
                            self.analyze_final(a);
                            return Ok(Search::Unsat);
                        }
                        _ => {
                            next = Some(a);
                            break;
                        }
                    }
                }
                let next = match next {
                    Some(a) => a,
                    None => {
                        self.stats.decisions += 1;
                        if self.stats.decisions & 1023 == 0 && self.budget_hit(start) {
                            return Err(EngineError::BudgetExceeded {
                                conflicts: self.stats.conflicts - start,
                            });
                        }
                        match self.pick_branch() {
                            Some(l) => l,
                            None => return Ok(Search::Sat),
                        }
                    }
                };
                self.trail_lim.push(self.trail.len());
                self.assign(next, NO_REASON);
            }
        }
    }

    /// Solves under the given assumptions plus every active retractable
    /// clause's activation literal.
    pub fn solve(&mut self, assumptions: &[Lit]) -> Result<SolveOutcome, EngineError> {
        self.touch(assumptions);
        self.stats.solves += 1;
        self.core.clear();
        if !self.ok {
            return Ok(SolveOutcome::Unsat(Vec::new()));
        }
        self.assumptions = self.selectors.clone();
        self.assumptions.extend_from_slice(assumptions);
        if self.max_learnts == 0.0 {
            self.max_learnts = (self.clauses.len() as f64 / 3.0).max(2000.0);
        }
        let start = self.stats.conflicts;
        let mut restarts = 0;
        let result = loop {
            let budget = (luby(2.0, restarts) * RESTART_UNIT) as u64;
            match self.search(budget, start) {
                Ok(Search::Restart) => {
                    restarts += 1;
                    self.stats.restarts += 1;
                }
                Ok(Search::Sat) => {
                    let mut values = vec![false; self.num_vars + 1];
                    for (v, slot) in values.iter_mut().enumerate().skip(1) {
                        *slot = self.vals[2 * v] == TRUE;
                    }
                    self.model = Assignment::new(values);
                    break Ok(SolveOutcome::Sat(self.model.clone()));
                }
                Ok(Search::Unsat) => break Ok(SolveOutcome::Unsat(self.core.clone())),
                Err(e) => break Err(e),
            }
        };
        self.cancel_until(0);
        self.assumptions.clear();
        result
    }

    /// Unit propagation from the root under `assumptions` (and the active
    /// activation literals), without any decisions.
    pub fn propagate_only(&mut self, assumptions: &[Lit]) -> Propagation {
        self.touch(assumptions);
        if !self.ok {
            return Propagation::Conflict;
        }
        let all: Vec<Lit> = self.selectors.iter().chain(assumptions).copied().collect();
        let mut result = None;
        for a in all {
            match self.value(a) {
                TRUE => continue,
                FALSE => {
                    result = Some(Propagation::Conflict);
                    break;
                }
                _ => {
                    self.trail_lim.push(self.trail.len());
                    self.assign(a, NO_REASON);
                    if self.propagate().is_some() {
                        result = Some(Propagation::Conflict);
                        break;
                    }
                }
            }
        }
        let result = result.unwrap_or_else(|| Propagation::Fixpoint(self.trail.clone()));
        self.cancel_until(0);
        result
    }

    /// Value of `l` implied at the root level, if any.
    pub fn root_value(&self, l: Lit) -> Option<bool> {
        if l.var().index() > self.num_vars {
            return None;
        }
        match self.value(l) {
            UNDEF => None,
            v => Some(v == TRUE),
        }
    }
}

fn canonical(clause: &[Lit]) -> Clause {
    let mut c = clause.to_vec();
    c.sort_unstable();
    c.dedup();
    c
}

impl NewVar for Engine {
    fn new_var(&mut self) -> Var {
        self.push_var()
    }
}

#[cfg(test)]
mod tests {
    use rand::Rng;

    use super::*;
    use crate::cnf::card::{encode_amo, encode_eo};

    fn lit(v: i64) -> Lit {
        Lit::from_dimacs(v)
    }

    fn brute_sat(clauses: &[Clause], n: u32) -> bool {
        (0u32..(1 << n)).any(|bits| {
            clauses.iter().all(|c| c.iter().any(|l| ((bits >> (l.var().id() - 1)) & 1 == 1) == l.is_pos()))
        })
    }

    fn check_model(clauses: &[Clause], m: &Assignment) {
        for c in clauses {
            assert!(m.satisfies(c), "model violates {c:?}");
        }
    }

    #[test]
    fn unit_conflict() {
        let mut e = Engine::new();
        e.add_clause(&[lit(1)]);
        e.add_clause(&[lit(-1)]);
        assert!(!e.solve(&[]).unwrap().is_sat());
    }

    #[test]
    fn retraction_removes_conflict() {
        let mut e = Engine::new();
        e.add_retractable(&[lit(1)]);
        e.retract_clause(&[lit(1)]).unwrap();
        e.add_clause(&[lit(-1)]);
        assert!(e.solve(&[]).unwrap().is_sat());
        assert!(matches!(e.retract_clause(&[lit(1)]), Err(EngineError::NotRetractable(_))));
    }

    #[test]
    fn retractable_core_names_selector() {
        let mut e = Engine::new();
        e.add_clause(&[lit(1), lit(2)]);
        let a = e.add_retractable(&[lit(-1)]);
        let b = e.add_retractable(&[lit(-2)]);
        let _c = e.add_retractable(&[lit(3)]);
        match e.solve(&[]).unwrap() {
            SolveOutcome::Unsat(core) => {
                let mut core = core;
                core.sort();
                let mut want = vec![a, b];
                want.sort();
                assert_eq!(core, want);
            }
            _ => panic!("expected unsat"),
        }
    }

    #[test]
    fn assumption_core() {
        let mut e = Engine::new();
        e.add_clause(&[lit(1), lit(2)]);
        match e.solve(&[lit(-1), lit(-2)]).unwrap() {
            SolveOutcome::Unsat(core) => {
                assert!(core.iter().all(|l| [lit(-1), lit(-2)].contains(l)));
                assert!(!e.solve(&core).unwrap().is_sat());
            }
            _ => panic!("expected unsat"),
        }
        assert!(e.solve(&[lit(-1)]).unwrap().is_sat());
        assert!(e.model().lit_value(lit(2)));
    }

    #[test]
    fn empty_database_is_sat() {
        let mut e = Engine::new();
        assert!(e.solve(&[]).unwrap().is_sat());
    }

    fn pigeonhole(pigeons: usize, holes: usize) -> (Vec<Clause>, u32) {
        let mut alloc = crate::cnf::VarAllocator::new();
        let x: Vec<Vec<Lit>> = (0..pigeons).map(|_| (0..holes).map(|_| alloc.new_lit()).collect()).collect();
        let mut out = Vec::new();
        for row in &x {
            out.extend(encode_eo(row, &mut alloc).unwrap());
        }
        for h in 0..holes {
            let col: Vec<Lit> = x.iter().map(|r| r[h]).collect();
            out.extend(encode_amo(&col, &mut alloc));
        }
        (out, alloc.num_vars())
    }

    #[test]
    fn pigeonhole_three_into_two() {
        let (clauses, n) = pigeonhole(3, 2);
        assert!(!brute_sat(&clauses, n));
        let mut e = Engine::new();
        e.add_clauses(&clauses);
        assert!(!e.solve(&[]).unwrap().is_sat());
    }

    #[test]
    fn pigeonhole_larger() {
        let (clauses, _) = pigeonhole(7, 6);
        let mut e = Engine::new();
        e.add_clauses(&clauses);
        assert!(!e.solve(&[]).unwrap().is_sat());
        let (clauses, _) = pigeonhole(6, 6);
        let mut e = Engine::new();
        e.add_clauses(&clauses);
        match e.solve(&[]).unwrap() {
            SolveOutcome::Sat(m) => check_model(&clauses, &m),
            _ => panic!("expected sat"),
        }
    }

    fn random_3cnf(rng: &mut ChaCha8Rng, n: u32, m: usize) -> Vec<Clause> {
        (0..m)
            .map(|_| {
                (0..3)
                    .map(|_| {
                        let v = rng.gen_range(1..=n) as i64;
                        lit(if rng.gen_bool(0.5) { v } else { -v })
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn random_3cnf_agrees_with_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (mut sat, mut unsat) = (0, 0);
        for i in 0..600 {
            let n = rng.gen_range(3..=12);
            let m = (n as f64 * rng.gen_range(3.0..5.5)) as usize;
            let clauses = random_3cnf(&mut rng, n, m);
            let mut e = Engine::with_seed(i);
            e.add_clauses(&clauses);
            let want = brute_sat(&clauses, n);
            match e.solve(&[]).unwrap() {
                SolveOutcome::Sat(mdl) => {
                    assert!(want);
                    check_model(&clauses, &mdl);
                    sat += 1;
                }
                SolveOutcome::Unsat(_) => {
                    assert!(!want);
                    unsat += 1;
                }
            }
        }
        assert!(sat > 50 && unsat > 50, "{sat} {unsat}");
    }

    #[test]
    fn incremental_matches_from_scratch() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for round in 0..60 {
            let n = rng.gen_range(4..=10);
            let mut e = Engine::with_seed(round);
            let mut acc: Vec<Clause> = Vec::new();
            for _ in 0..6 {
                let m = rng.gen_range(2..12);
                let batch = random_3cnf(&mut rng, n, m);
                e.add_clauses(&batch);
                acc.extend(batch);
                let assume: Vec<Lit> = (0..rng.gen_range(0..3))
                    .map(|_| {
                        let v = rng.gen_range(1..=n) as i64;
                        lit(if rng.gen_bool(0.5) { v } else { -v })
                    })
                    .collect();
                let mut with_assume = acc.clone();
                with_assume.extend(assume.iter().map(|&l| vec![l]));
                let want = brute_sat(&with_assume, n);
                match e.solve(&assume).unwrap() {
                    SolveOutcome::Sat(m) => {
                        assert!(want);
                        check_model(&with_assume, &m);
                    }
                    SolveOutcome::Unsat(core) => {
                        assert!(!want);
                        assert!(core.iter().all(|l| assume.contains(l)));
                        assert!(!e.solve(&core).unwrap().is_sat(), "core must stay unsat");
                    }
                }
            }
        }
    }

    #[test]
    fn propagate_only_fixpoints() {
        let mut e = Engine::new();
        e.add_clause(&[lit(-1), lit(2)]);
        e.add_clause(&[lit(1)]);
        match e.propagate_only(&[]) {
            Propagation::Fixpoint(t) => {
                assert!(t.contains(&lit(1)) && t.contains(&lit(2)));
            }
            _ => panic!(),
        }
        let mut e = Engine::new();
        e.add_clause(&[lit(1), lit(2)]);
        assert_eq!(e.propagate_only(&[]), Propagation::Fixpoint(vec![]));
        assert_eq!(e.propagate_only(&[lit(-1), lit(-2)]), Propagation::Conflict);
    }

    #[test]
    fn conflict_budget_is_reported() {
        let (clauses, _) = pigeonhole(9, 8);
        let mut e = Engine::new();
        e.add_clauses(&clauses);
        e.set_conflict_limit(Some(10));
        assert!(matches!(e.solve(&[]), Err(EngineError::BudgetExceeded { .. })));
        e.set_conflict_limit(None);
        e.set_deadline(Some(Instant::now()));
        assert!(matches!(e.solve(&[]), Err(EngineError::BudgetExceeded { .. })));
    }

    #[test]
    fn polarity_steers_first_model() {
        let mut e = Engine::new();
        e.ensure_vars(3);
        for v in 1..=3 {
            e.set_polarity(Var::new(v), Some(true));
        }
        e.solve(&[]).unwrap();
        assert!((1..=3).all(|v| e.model().var_value(Var::new(v))));
    }

    #[test]
    fn luby_sequence() {
        let s: Vec<f64> = (0..15).map(|i| luby(2.0, i)).collect();
        assert_eq!(s, vec![1., 1., 2., 1., 1., 2., 4., 1., 1., 2., 1., 1., 2., 4., 8.]);
    }
}
