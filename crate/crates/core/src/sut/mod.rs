//! System-under-test models: parameters with finite domains plus
//! propositional constraints over `parameter = value` atoms.

mod parse;

use std::fmt;

use num_bigint::BigUint;
use thiserror::Error;

pub use parse::{parse_expr, parse_model, render_expr, render_model};

pub type ParamId = usize;
pub type ValueId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SutError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unknown parameter `{name}` at {line}:{col}")]
    UnknownParameter { name: String, line: usize, col: usize },
    #[error("unknown value `{value}` for parameter `{param}` at {line}:{col}")]
    UnknownValue { param: String, value: String, line: usize, col: usize },
    #[error("duplicate declaration of `{0}`")]
    Duplicate(String),
    #[error("parameter `{0}` has an empty domain")]
    EmptyDomain(String),
    #[error("the constraints admit no valid test")]
    Unsatisfiable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parameter {
    pub name: String,
    pub values: Vec<String>,
}

impl Parameter {
    pub fn new(name: impl Into<String>, values: Vec<String>) -> Self {
        Parameter { name: name.into(), values }
    }

    pub fn size(&self) -> usize {
        self.values.len()
    }

    pub fn value_index(&self, label: &str) -> Option<ValueId> {
        self.values.iter().position(|v| v == label)
    }
}

/// Constraint expression over `(parameter, value)` atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    /// `param = value` when `equal`, `param != value` otherwise.
    Atom { param: ParamId, value: ValueId, equal: bool },
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    Iff(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, test: &Test) -> bool {
        match self {
            Expr::Atom { param, value, equal } => (test.values[*param] == *value) == *equal,
            Expr::Not(a) => !a.eval(test),
            Expr::And(a, b) => a.eval(test) && b.eval(test),
            Expr::Or(a, b) => a.eval(test) || b.eval(test),
            Expr::Implies(a, b) => !a.eval(test) || b.eval(test),
            Expr::Iff(a, b) => a.eval(test) == b.eval(test),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Atom { .. } => 1,
            Expr::Not(a) => 1 + a.node_count(),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Implies(a, b) | Expr::Iff(a, b) => {
                1 + a.node_count() + b.node_count()
            }
        }
    }

    pub fn for_each_atom(&self, f: &mut impl FnMut(ParamId, ValueId)) {
        match self {
            Expr::Atom { param, value, .. } => f(*param, *value),
            Expr::Not(a) => a.for_each_atom(f),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Implies(a, b) | Expr::Iff(a, b) => {
                a.for_each_atom(f);
                b.for_each_atom(f);
            }
        }
    }
}

/// A full assignment: `values[p]` is the value index of parameter `p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Test {
    pub values: Vec<ValueId>,
}

impl Test {
    pub fn new(values: Vec<ValueId>) -> Self {
        Test { values }
    }

    pub fn covers(&self, tuple: &ValueTuple) -> bool {
        tuple.pairs.iter().all(|&(p, v)| self.values[p] == v)
    }
}

/// Partial assignment over distinct parameters, sorted by parameter index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ValueTuple {
    pub pairs: Vec<(ParamId, ValueId)>,
}

impl ValueTuple {
    pub fn new(mut pairs: Vec<(ParamId, ValueId)>) -> Self {
        pairs.sort_unstable();
        debug_assert!(pairs.windows(2).all(|w| w[0].0 != w[1].0), "repeated parameter");
        ValueTuple { pairs }
    }

    pub fn arity(&self) -> usize {
        self.pairs.len()
    }

    pub fn params(&self) -> impl Iterator<Item = ParamId> + '_ {
        self.pairs.iter().map(|&(p, _)| p)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SutModel {
    params: Vec<Parameter>,
    constraints: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelStats {
    pub parameter_count: usize,
    /// Domain sizes in declaration order.
    pub domain_profile: Vec<usize>,
    pub full_assignment_count: BigUint,
}

impl ModelStats {
    /// Exponential notation grouped by ascending domain size, e.g. `2^3 3 5^2`.
    pub fn profile_string(&self) -> String {
        let mut sizes = self.domain_profile.clone();
        sizes.sort_unstable();
        let mut parts = Vec::new();
        let mut i = 0;
        while i < sizes.len() {
            let j = sizes[i..].iter().take_while(|&&s| s == sizes[i]).count();
            parts.push(if j == 1 { sizes[i].to_string() } else { format!("{}^{}", sizes[i], j) });
            i += j;
        }
        parts.join(" ")
    }
}

impl SutModel {
    /// Validates names, domains, and atom references.
    pub fn new(params: Vec<Parameter>, constraints: Vec<Expr>) -> Result<Self, SutError> {
        for (i, p) in params.iter().enumerate() {
            if p.values.is_empty() {
                return Err(SutError::EmptyDomain(p.name.clone()));
            }
            if params[..i].iter().any(|q| q.name == p.name) {
                return Err(SutError::Duplicate(p.name.clone()));
            }
            for (j, v) in p.values.iter().enumerate() {
                if p.values[..j].contains(v) {
                    return Err(SutError::Duplicate(format!("{}.{}", p.name, v)));
                }
            }
        }
        for c in &constraints {
            let mut bad = None;
            c.for_each_atom(&mut |p, v| {
                if p >= params.len() || v >= params[p].size() {
                    bad.get_or_insert((p, v));
                }
            });
            if let Some((p, v)) = bad {
                return Err(match params.get(p) {
                    None => SutError::UnknownParameter { name: format!("#{p}"), line: 0, col: 0 },
                    Some(q) => SutError::UnknownValue {
                        param: q.name.clone(),
                        value: format!("#{v}"),
                        line: 0,
                        col: 0,
                    },
                });
            }
        }
        Ok(SutModel { params, constraints })
    }

    /// Unconstrained model from domain sizes; parameters are `p0, p1, ...`
    /// and values `0, 1, ...`.
    pub fn from_profile(sizes: &[usize]) -> Self {
        let params = sizes
            .iter()
            .enumerate()
            .map(|(i, &g)| Parameter::new(format!("p{i}"), (0..g).map(|v| v.to_string()).collect()))
            .collect();
        SutModel::new(params, Vec::new()).expect("profile sizes must be positive")
    }

    pub fn params(&self) -> &[Parameter] {
        &self.params
    }

    pub fn constraints(&self) -> &[Expr] {
        &self.constraints
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn domain_size(&self, p: ParamId) -> usize {
        self.params[p].size()
    }

    pub fn param_index(&self, name: &str) -> Option<ParamId> {
        self.params.iter().position(|p| p.name == name)
    }

    pub fn entails(&self, test: &Test) -> bool {
        debug_assert_eq!(test.values.len(), self.params.len());
        self.constraints.iter().all(|c| c.eval(test))
    }

    pub fn stats(&self) -> ModelStats {
        let profile: Vec<usize> = self.params.iter().map(|p| p.size()).collect();
        let count = profile.iter().fold(BigUint::from(1u32), |acc, &g| acc * BigUint::from(g));
        ModelStats { parameter_count: profile.len(), domain_profile: profile, full_assignment_count: count }
    }

    /// Builds a test from `(parameter name, value label)` pairs.
    pub fn test_from_labels(&self, labels: &[(&str, &str)]) -> Result<Test, SutError> {
        let mut values = vec![usize::MAX; self.params.len()];
        for &(name, value) in labels {
            let p = self.param_index(name).ok_or_else(|| SutError::UnknownParameter {
                name: name.to_string(),
                line: 0,
                col: 0,
            })?;
            values[p] = self.params[p].value_index(value).ok_or_else(|| SutError::UnknownValue {
                param: name.to_string(),
                value: value.to_string(),
                line: 0,
                col: 0,
            })?;
        }
        if let Some(p) = values.iter().position(|&v| v == usize::MAX) {
            return Err(SutError::Syntax {
                line: 0,
                col: 0,
                msg: format!("parameter `{}` left unassigned", self.params[p].name),
            });
        }
        Ok(Test::new(values))
    }

    /// Every test satisfying the constraints, in lexicographic order.
    /// Exponential in the number of parameters; meant for small models.
    pub fn valid_tests(&self) -> Vec<Test> {
        let mut out = Vec::new();
        let mut cur = vec![0; self.params.len()];
        loop {
            let t = Test::new(cur.clone());
            if self.entails(&t) {
                out.push(t);
            }
            let mut i = self.params.len();
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                cur[i] += 1;
                if cur[i] < self.params[i].size() {
                    break;
                }
                cur[i] = 0;
            }
        }
    }

    pub fn tuple_label(&self, tuple: &ValueTuple) -> String {
        tuple
            .pairs
            .iter()
            .map(|&(p, v)| format!("{}={}", self.params[p].name, self.params[p].values[v]))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn test_labels(&self, test: &Test) -> Vec<&str> {
        test.values.iter().enumerate().map(|(p, &v)| self.params[p].values[v].as_str()).collect()
    }
}

impl fmt::Display for SutModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_model(self))
    }
}
