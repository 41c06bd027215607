//! Propositional building blocks: variables, literals, clauses, weighted
//! formulas, and the encoders that produce them.

pub mod card;
pub mod dimacs;
pub mod pb;
pub mod tseitin;

use std::fmt;
use std::ops::Not;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CnfError {
    #[error("cardinality constraint over an empty literal list")]
    EmptyLiterals,
    #[error("pseudo-Boolean term with zero weight")]
    ZeroWeight,
    #[error("bound update must tighten: new bound {new} is not below current bound {current}")]
    NonTighteningUpdate { current: u64, new: u64 },
    #[error("weight overflow: {0}")]
    WeightOverflow(String),
    #[error("malformed DIMACS input at line {line}: {msg}")]
    Dimacs { line: usize, msg: String },
    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CnfError {
    fn from(e: std::io::Error) -> Self {
        CnfError::Io(e.to_string())
    }
}

/// Propositional variable. Ids start at 1, matching DIMACS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    pub fn new(id: u32) -> Self {
        assert!(id >= 1, "variable ids start at 1");
        Var(id)
    }

    pub fn id(self) -> u32 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn pos(self) -> Lit {
        Lit(self.0 << 1)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Lit {
        Lit((self.0 << 1) | 1)
    }

    pub fn lit(self, positive: bool) -> Lit {
        if positive {
            self.pos()
        } else {
            self.neg()
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A literal packed as `2 * var + negated`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub fn is_neg(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn is_pos(self) -> bool {
        !self.is_neg()
    }

    /// Dense index usable for per-literal arrays.
    pub fn code(self) -> usize {
        self.0 as usize
    }

    pub fn from_code(code: usize) -> Self {
        Lit(code as u32)
    }

    pub fn from_dimacs(v: i64) -> Self {
        assert!(v != 0, "0 is not a literal");
        let var = Var::new(v.unsigned_abs() as u32);
        var.lit(v > 0)
    }

    pub fn to_dimacs(self) -> i64 {
        let v = self.var().id() as i64;
        if self.is_neg() {
            -v
        } else {
            v
        }
    }
}

impl Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

pub type Clause = Vec<Lit>;

/// Anything that can hand out fresh variables.
pub trait NewVar {
    fn new_var(&mut self) -> Var;

    fn new_lit(&mut self) -> Lit {
        self.new_var().pos()
    }
}

/// Issues fresh variable ids; optionally records a name for each.
#[derive(Debug, Clone, Default)]
pub struct VarAllocator {
    next: u32,
    names: Vec<(Var, String)>,
}

impl VarAllocator {
    pub fn new() -> Self {
        VarAllocator { next: 1, names: Vec::new() }
    }

    /// Continue numbering after `n` already-used variables.
    pub fn starting_after(n: u32) -> Self {
        VarAllocator { next: n + 1, names: Vec::new() }
    }

    pub fn named(&mut self, name: impl Into<String>) -> Var {
        let v = self.new_var();
        self.names.push((v, name.into()));
        v
    }

    pub fn num_vars(&self) -> u32 {
        self.next - 1
    }

    pub fn names(&self) -> &[(Var, String)] {
        &self.names
    }
}

impl NewVar for VarAllocator {
    fn new_var(&mut self) -> Var {
        if self.next == 0 {
            self.next = 1;
        }
        let v = Var(self.next);
        self.next += 1;
        v
    }
}

/// Plain CNF formula.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Cnf {
    pub num_vars: u32,
    pub clauses: Vec<Clause>,
}

impl Cnf {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, clause: Clause) {
        for l in &clause {
            self.num_vars = self.num_vars.max(l.var().id());
        }
        self.clauses.push(clause);
    }

    pub fn extend<I: IntoIterator<Item = Clause>>(&mut self, clauses: I) {
        for c in clauses {
            self.add(c);
        }
    }
}

/// Weighted partial MaxSAT formula. Hard clauses have implicit weight `top`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wcnf {
    pub num_vars: u32,
    pub hard: Vec<Clause>,
    pub soft: Vec<(Clause, u64)>,
    top: Option<u64>,
}

impl Default for Wcnf {
    fn default() -> Self {
        Self::new()
    }
}

impl Wcnf {
    pub fn new() -> Self {
        Wcnf { num_vars: 0, hard: Vec::new(), soft: Vec::new(), top: None }
    }

    fn touch(&mut self, clause: &[Lit]) {
        for l in clause {
            self.num_vars = self.num_vars.max(l.var().id());
        }
    }

    pub fn add_hard(&mut self, clause: Clause) {
        self.touch(&clause);
        self.hard.push(clause);
    }

    pub fn add_soft(&mut self, clause: Clause, weight: u64) {
        assert!(weight > 0, "soft clauses need a positive weight");
        self.touch(&clause);
        self.soft.push((clause, weight));
    }

    pub fn soft_weight_sum(&self) -> u64 {
        self.soft.iter().map(|(_, w)| *w).sum()
    }

    /// Weight marking hard clauses. Defaults to the soft weight sum plus one.
    pub fn top(&self) -> u64 {
        let min = self.soft_weight_sum() + 1;
        self.top.map_or(min, |t| t.max(min))
    }

    /// Fix an explicit top weight; it is raised if it would not exceed the
    /// soft weight sum.
    pub fn set_top(&mut self, top: u64) {
        self.top = Some(top);
    }

    /// Cost of an assignment: sum of weights of falsified soft clauses, or
    /// `None` when a hard clause is falsified.
    pub fn cost(&self, assignment: &Assignment) -> Option<u64> {
        if self.hard.iter().any(|c| !assignment.satisfies(c)) {
            return None;
        }
        Some(self.soft_cost(assignment))
    }

    pub fn soft_cost(&self, assignment: &Assignment) -> u64 {
        self.soft
            .iter()
            .filter(|(c, _)| !assignment.satisfies(c))
            .map(|(_, w)| *w)
            .sum()
    }
}

/// Total truth assignment indexed by variable id (slot 0 unused).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Assignment {
    values: Vec<bool>,
}

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Assignment { values }
    }

    pub fn from_lits(num_vars: u32, lits: &[Lit]) -> Self {
        let mut values = vec![false; num_vars as usize + 1];
        for l in lits {
            let i = l.var().index();
            if i >= values.len() {
                values.resize(i + 1, false);
            }
            values[i] = l.is_pos();
        }
        Assignment { values }
    }

    pub fn num_vars(&self) -> u32 {
        self.values.len().saturating_sub(1) as u32
    }

    /// Unknown variables read as false.
    pub fn var_value(&self, v: Var) -> bool {
        self.values.get(v.index()).copied().unwrap_or(false)
    }

    pub fn lit_value(&self, l: Lit) -> bool {
        self.var_value(l.var()) ^ l.is_neg()
    }

    pub fn satisfies(&self, clause: &[Lit]) -> bool {
        clause.iter().any(|&l| self.lit_value(l))
    }

    pub fn set(&mut self, v: Var, value: bool) {
        if v.index() >= self.values.len() {
            self.values.resize(v.index() + 1, false);
        }
        self.values[v.index()] = value;
    }
}
