//! SAT and MaxSAT encodings of covering-array problems over one shared
//! variable map.
//!
//! Tests are numbered 1..=N. `x(i,p,v)` is true iff test `i` assigns value
//! `v` to parameter `p`. With the CX base, `c(i,τ)` means test `i` covers τ.
//! With the CCX base there is an extra layer 0 and `c(i,τ)` means τ is
//! covered by some test in 1..=i. `u(i)` (only for i ≥ lb+2) means test `i`
//! is part of the suite.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::cnf::card::encode_eo;
use crate::cnf::pb::encode_pb_leq;
use crate::cnf::tseitin::tseitin;
use crate::cnf::{Assignment, Clause, Cnf, Lit, NewVar, VarAllocator, Wcnf};
use crate::sut::{SutModel, Test};
use crate::tuples::TupleCatalog;
use crate::Error;

/// X ∧ SUTX for a single test: one literal per (parameter, value), exactly
/// one value per parameter, and the SUT constraints over those literals.
pub fn encode_test_block<A: NewVar + ?Sized>(model: &SutModel, alloc: &mut A) -> (Vec<Vec<Lit>>, Vec<Clause>) {
    let x: Vec<Vec<Lit>> = model
        .params()
        .iter()
        .map(|p| (0..p.size()).map(|_| alloc.new_lit()).collect())
        .collect();
    let mut clauses = Vec::new();
    for row in &x {
        clauses.extend(encode_eo(row, alloc).expect("domains are non-empty"));
    }
    for e in model.constraints() {
        clauses.extend(tseitin(e, alloc, &mut |p, v| x[p][v]));
    }
    (x, clauses)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EncodingVariant {
    Cx,
    /// c^i → c^{i-1} ∨ x for each pair of τ.
    CcxA0,
    /// A0 plus c^{i-1} → c^i.
    CcxA1,
    /// c^i ↔ c^{i-1} ∨ (test i covers τ).
    CcxA2,
}

impl EncodingVariant {
    pub const ALL: [EncodingVariant; 4] =
        [EncodingVariant::Cx, EncodingVariant::CcxA0, EncodingVariant::CcxA1, EncodingVariant::CcxA2];

    pub fn is_ccx(self) -> bool {
        self != EncodingVariant::Cx
    }
}

impl fmt::Display for EncodingVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EncodingVariant::Cx => "cx",
            EncodingVariant::CcxA0 => "ccx-a0",
            EncodingVariant::CcxA1 => "ccx-a1",
            EncodingVariant::CcxA2 => "ccx-a2",
        })
    }
}

impl FromStr for EncodingVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "cx" => Ok(EncodingVariant::Cx),
            "ccx" | "ccx-a0" | "a0" => Ok(EncodingVariant::CcxA0),
            "ccx-a1" | "a1" => Ok(EncodingVariant::CcxA1),
            "ccx-a2" | "a2" => Ok(EncodingVariant::CcxA2),
            _ => Err(Error::Invalid(format!("unknown encoding variant '{s}' (cx, ccx-a0, ccx-a1, ccx-a2)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightScheme {
    Unit,
    /// w_i = i-(lb+2)+1
    Linear,
    /// w_i = 2^(i-(lb+2))
    Exponential,
}

impl WeightScheme {
    pub const ALL: [WeightScheme; 3] = [WeightScheme::Unit, WeightScheme::Linear, WeightScheme::Exponential];

    /// Weight of the soft clause ¬u_i.
    pub fn weight(self, i: usize, lb: usize) -> Result<u64, Error> {
        let k = (i - (lb + 2)) as u64;
        match self {
            WeightScheme::Unit => Ok(1),
            WeightScheme::Linear => Ok(k + 1),
            WeightScheme::Exponential if k >= 63 => Err(Error::Cnf(crate::cnf::CnfError::WeightOverflow(format!(
                "2^{k} does not fit in 64 bits; use linear weights"
            )))),
            WeightScheme::Exponential => Ok(1 << k),
        }
    }

    /// Optimal cost of the CAN encoding when `n` tests beyond lb+1 are needed.
    pub fn expected_cost(self, n: u64) -> u64 {
        match self {
            WeightScheme::Unit => n,
            WeightScheme::Linear => n * (n + 1) / 2,
            WeightScheme::Exponential => (1u64 << n) - 1,
        }
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightScheme::Unit => "unit",
            WeightScheme::Linear => "linear",
            WeightScheme::Exponential => "exp",
        })
    }
}

impl FromStr for WeightScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "unit" | "pmsat" => Ok(WeightScheme::Unit),
            "linear" | "lin" => Ok(WeightScheme::Linear),
            "exp" | "exponential" => Ok(WeightScheme::Exponential),
            _ => Err(Error::Invalid(format!("unknown weight scheme '{s}' (unit, linear, exp)"))),
        }
    }
}

/// Which tuples an encoding has to cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TupleScope {
    Allowed,
    /// Every tuple, forbidden ones included. Only sound for tuple-number
    /// problems, where each forbidden tuple adds exactly one to the cost.
    All,
}

#[derive(Debug, Clone)]
pub struct EncodingContext {
    n: usize,
    t: usize,
    lb: usize,
    variant: EncodingVariant,
    alloc: VarAllocator,
    x: Vec<Vec<Vec<Lit>>>,
    tuple_ids: Vec<usize>,
    /// CX: c[i-1][k]. CCX: c[i][k] for layers 0..=N.
    c: Vec<Vec<Lit>>,
    c_top: Vec<Lit>,
    u: Vec<Option<Lit>>,
    u_from: usize,
    hard: Vec<Clause>,
    /// C (CX) or the c^N units (CCX). Kept apart because
    /// the optimization problems replace them.
    cover: Vec<Clause>,
    symmetry: bool,
}

pub fn build_mcac(
    model: &SutModel,
    catalog: &TupleCatalog,
    n: usize,
    variant: EncodingVariant,
) -> Result<EncodingContext, Error> {
    build_mcac_over(model, catalog, n, variant, catalog.allowed_ids())
}

pub fn build_mcac_scoped(
    model: &SutModel,
    catalog: &TupleCatalog,
    n: usize,
    variant: EncodingVariant,
    scope: TupleScope,
) -> Result<EncodingContext, Error> {
    match scope {
        TupleScope::Allowed => build_mcac(model, catalog, n, variant),
        TupleScope::All => {
            let all: Vec<usize> = (0..catalog.len()).collect();
            build_mcac_over(model, catalog, n, variant, &all)
        }
    }
}

/// Covering encoding for `n` tests restricted to the tuple ids in `ids`.
pub fn build_mcac_over(
    model: &SutModel,
    catalog: &TupleCatalog,
    n: usize,
    variant: EncodingVariant,
    ids: &[usize],
) -> Result<EncodingContext, Error> {
    if n < 1 {
        return Err(Error::Encoding("a suite needs at least one test".into()));
    }
    let mut alloc = VarAllocator::new();
    let mut hard = Vec::new();
    let mut x = Vec::with_capacity(n);
    for _ in 0..n {
        let (row, clauses) = encode_test_block(model, &mut alloc);
        x.push(row);
        hard.extend(clauses);
    }
    let layers = if variant.is_ccx() { n + 1 } else { n };
    let c: Vec<Vec<Lit>> = (0..layers).map(|_| ids.iter().map(|_| alloc.new_lit()).collect()).collect();
    let mut cover = Vec::with_capacity(ids.len());

    for (k, &id) in ids.iter().enumerate() {
        let pairs = &catalog.tuple(id).pairs;
        if variant == EncodingVariant::Cx {
            for i in 0..n {
                for &(p, v) in pairs {
                    hard.push(vec![!c[i][k], x[i][p][v]]);
                }
            }
            cover.push((0..n).map(|i| c[i][k]).collect());
            continue;
        }
        for i in 1..=n {
            let (now, before) = (c[i][k], c[i - 1][k]);
            for &(p, v) in pairs {
                hard.push(vec![!now, before, x[i - 1][p][v]]);
            }
            if variant != EncodingVariant::CcxA0 {
                hard.push(vec![!before, now]);
            }
            if variant == EncodingVariant::CcxA2 {
                let mut cl: Clause = pairs.iter().map(|&(p, v)| !x[i - 1][p][v]).collect();
                cl.push(now);
                hard.push(cl);
            }
        }
        hard.push(vec![!c[n][k], !c[0][k]]);
        cover.push(vec![c[n][k]]);
    }

    Ok(EncodingContext {
        n,
        t: catalog.t(),
        lb: 0,
        variant,
        alloc,
        x,
        tuple_ids: ids.to_vec(),
        c,
        c_top: Vec::new(),
        u: vec![None; n],
        u_from: n + 1,
        hard,
        cover,
        symmetry: false,
    })
}

impl EncodingContext {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn lb(&self) -> usize {
        self.lb
    }

    pub fn set_lb(&mut self, lb: usize) {
        self.lb = lb;
    }

    pub fn variant(&self) -> EncodingVariant {
        self.variant
    }

    pub fn num_vars(&self) -> u32 {
        self.alloc.num_vars()
    }

    pub fn alloc_mut(&mut self) -> &mut VarAllocator {
        &mut self.alloc
    }

    /// Tuple ids in encoding order; `k` in [`Self::c`] indexes this slice.
    pub fn tuple_ids(&self) -> &[usize] {
        &self.tuple_ids
    }

    pub fn x(&self, i: usize, p: usize, v: usize) -> Lit {
        self.x[i - 1][p][v]
    }

    pub fn test_vars(&self, i: usize) -> &[Vec<Lit>] {
        &self.x[i - 1]
    }

    /// c^i for the k-th encoded tuple. For CX `i` is in 1..=N, for CCX in 0..=N.
    pub fn c(&self, i: usize, k: usize) -> Lit {
        if self.variant.is_ccx() {
            self.c[i][k]
        } else {
            self.c[i - 1][k]
        }
    }

    pub fn c_layer(&self, i: usize) -> &[Lit] {
        if self.variant.is_ccx() {
            &self.c[i]
        } else {
            &self.c[i - 1]
        }
    }

    /// The literal standing for "τ is covered" once a problem builder has
    /// defined it: c_τ for CX, c^N_τ for CCX.
    pub fn covered(&self, k: usize) -> Option<Lit> {
        if self.variant.is_ccx() {
            Some(self.c[self.n][k])
        } else {
            self.c_top.get(k).copied()
        }
    }

    pub fn u(&self, i: usize) -> Option<Lit> {
        self.u.get(i.checked_sub(1)?).copied().flatten()
    }

    /// Test indices carrying a u variable.
    pub fn u_range(&self) -> std::ops::RangeInclusive<usize> {
        self.u_from..=self.n
    }

    pub fn num_x_vars(&self) -> usize {
        self.x.iter().flatten().map(Vec::len).sum()
    }

    pub fn num_c_vars(&self) -> usize {
        self.c.iter().map(Vec::len).sum()
    }

    pub fn num_u_vars(&self) -> usize {
        self.u.iter().flatten().count()
    }

    pub fn symmetry_applied(&self) -> bool {
        self.symmetry
    }

    pub fn hard_clauses(&self) -> &[Clause] {
        &self.hard
    }

    pub fn cover_clauses(&self) -> &[Clause] {
        &self.cover
    }

    /// The pure SAT formula: satisfiable iff the encoded tuples fit in N tests.
    pub fn sat_cnf(&self) -> Cnf {
        let mut cnf = Cnf::new();
        cnf.extend(self.hard.iter().cloned());
        cnf.extend(self.cover.iter().cloned());
        cnf.num_vars = self.num_vars();
        cnf
    }

    fn ensure_u(&mut self, lb: usize) -> Result<(), Error> {
        let from = lb + 2;
        if self.num_u_vars() > 0 {
            if self.u_from != from {
                return Err(Error::Encoding(format!(
                    "u variables already exist from test {}, requested from {from}",
                    self.u_from
                )));
            }
            return Ok(());
        }
        self.u_from = from;
        for i in from..=self.n {
            self.u[i - 1] = Some(self.alloc.new_lit());
        }
        Ok(())
    }

    fn ensure_c_top(&mut self) {
        if self.variant.is_ccx() || !self.c_top.is_empty() {
            return;
        }
        self.c_top = self.tuple_ids.iter().map(|_| self.alloc.new_lit()).collect();
    }

    /// RC: c_τ ↔ ∨_i c^i_τ (CX only).
    fn reify_covers(&self) -> Vec<Clause> {
        let mut out = Vec::new();
        for (k, &top) in self.c_top.iter().enumerate() {
            let mut long = vec![!top];
            for i in 0..self.n {
                long.push(self.c[i][k]);
                out.push(vec![!self.c[i][k], top]);
            }
            out.push(long);
        }
        out
    }

    /// BSU plus CU or CCU for the current u layer.
    fn usage_links(&self) -> Vec<Clause> {
        let mut out = Vec::new();
        for i in self.u_range() {
            let ui = self.u(i).expect("u allocated");
            if let Some(next) = self.u(i + 1) {
                out.push(vec![!next, ui]);
            }
            for k in 0..self.tuple_ids.len() {
                if self.variant.is_ccx() {
                    out.push(vec![self.c[i - 1][k], ui]);
                } else {
                    out.push(vec![!self.c[i - 1][k], ui]);
                }
            }
        }
        out
    }

    fn u_softs(&self, weights: WeightScheme) -> Result<Vec<(Clause, u64)>, Error> {
        self.u_range()
            .map(|i| Ok((vec![!self.u(i).expect("u allocated")], weights.weight(i, self.u_from - 2)?)))
            .collect()
    }

    fn wcnf_with(&self, extra_hard: Vec<Clause>, soft: Vec<(Clause, u64)>) -> Wcnf {
        let mut w = Wcnf::new();
        for c in self.hard.iter().cloned().chain(extra_hard) {
            w.add_hard(c);
        }
        for (c, wt) in soft {
            w.add_soft(c, wt);
        }
        w.num_vars = w.num_vars.max(self.num_vars());
        w
    }
}

/// Fixed-tuple symmetry breaking: the r witness tuples (pairwise
/// incompatible) go to tests 1..=r, one each.
pub fn apply_symmetry(ctx: &mut EncodingContext, catalog: &TupleCatalog, witness: &[usize]) -> Result<(), Error> {
    if witness.len() > ctx.n {
        return Err(Error::Encoding(format!("{} witness tuples do not fit in {} tests", witness.len(), ctx.n)));
    }
    for (j, &id) in witness.iter().enumerate() {
        for &(p, v) in &catalog.tuple(id).pairs {
            ctx.hard.push(vec![ctx.x[j][p][v]]);
        }
    }
    ctx.symmetry = !witness.is_empty();
    Ok(())
}

/// Minimum covering array as weighted partial MaxSAT. Optimal cost is
/// `weights.expected_cost(CAN-(lb+1))`.
pub fn build_can_wcnf(ctx: &mut EncodingContext, weights: WeightScheme, nux: Option<&Test>) -> Result<Wcnf, Error> {
    let lb = ctx.lb;
    ctx.ensure_u(lb)?;
    let soft = ctx.u_softs(weights)?;
    let mut extra = ctx.cover.clone();
    extra.extend(ctx.usage_links());
    if let Some(dummy) = nux {
        for i in ctx.u_range() {
            let ui = ctx.u(i).expect("u allocated");
            for (p, &v) in dummy.values.iter().enumerate() {
                extra.push(vec![ui, ctx.x(i, p, v)]);
            }
        }
    }
    checked_top(&soft)?;
    Ok(ctx.wcnf_with(extra, soft))
}

/// Tuple number: maximize covered tuples with N tests. Optimal cost is the
/// number of encoded tuples left uncovered.
pub fn build_tn_wcnf(ctx: &mut EncodingContext) -> Result<Wcnf, Error> {
    if ctx.symmetry {
        return Err(Error::Encoding("symmetry breaking is unsound for the tuple number".into()));
    }
    ctx.ensure_c_top();
    let extra = ctx.reify_covers();
    let soft = (0..ctx.tuple_ids.len()).map(|k| (vec![ctx.covered(k).unwrap()], 1)).collect();
    Ok(ctx.wcnf_with(extra, soft))
}

/// Covers as many tuples as possible, then uses as few tests as possible.
/// Each tuple outweighs all u softs together.
pub fn build_combined_wcnf(ctx: &mut EncodingContext, weights: WeightScheme) -> Result<Wcnf, Error> {
    if ctx.symmetry {
        return Err(Error::Encoding("symmetry breaking is unsound for the combined problem".into()));
    }
    let lb = ctx.lb;
    ctx.ensure_u(lb)?;
    ctx.ensure_c_top();
    let mut soft = ctx.u_softs(weights)?;
    let heavy = soft
        .iter()
        .try_fold(1u64, |acc, (_, w)| acc.checked_add(*w))
        .ok_or_else(|| overflow("tuple weight"))?;
    let mut extra = ctx.reify_covers();
    extra.extend(ctx.usage_links());
    for k in 0..ctx.tuple_ids.len() {
        soft.push((vec![ctx.covered(k).unwrap()], heavy));
    }
    checked_top(&soft)?;
    Ok(ctx.wcnf_with(extra, soft))
}

/// Fewest tests covering at least `ceil(|T|·rt)` of the encoded tuples.
/// Optimal cost is that number of tests minus one.
///
/// CCX-a1/a2 are rejected: they tie c^0 to c^N, so an uncovered tuple would
/// force every u true through CCU.
pub fn build_ratio(ctx: &mut EncodingContext, rt: f64) -> Result<Wcnf, Error> {
    if !(rt > 0.0 && rt <= 1.0) {
        return Err(Error::Invalid(format!("coverage ratio {rt} outside (0,1]")));
    }
    if matches!(ctx.variant, EncodingVariant::CcxA1 | EncodingVariant::CcxA2) {
        return Err(Error::Encoding(format!("ratio encoding needs cx or ccx-a0, got {}", ctx.variant)));
    }
    if ctx.symmetry {
        return Err(Error::Encoding("symmetry breaking is unsound for the ratio problem".into()));
    }
    ctx.ensure_u(0)?;
    ctx.ensure_c_top();
    let total = ctx.tuple_ids.len();
    let need = required_tuples(total, rt);
    let mut extra = ctx.reify_covers();
    extra.extend(ctx.usage_links());
    let terms: Vec<(u64, Lit)> = (0..total).map(|k| (1, !ctx.covered(k).unwrap())).collect();
    let (_, card) = encode_pb_leq(&terms, (total - need) as u64, &mut ctx.alloc)?;
    extra.extend(card);
    let soft = ctx.u_softs(WeightScheme::Unit)?;
    Ok(ctx.wcnf_with(extra, soft))
}

/// `ceil(total·rt)`, at least 1, robust to float noise in `rt`.
pub fn required_tuples(total: usize, rt: f64) -> usize {
    let raw = total as f64 * rt;
    let need = if (raw - raw.round()).abs() < 1e-9 { raw.round() } else { raw.ceil() };
    (need as usize).clamp(1.min(total), total)
}

fn overflow(what: &str) -> Error {
    Error::Cnf(crate::cnf::CnfError::WeightOverflow(what.into()))
}

fn checked_top(soft: &[(Clause, u64)]) -> Result<(), Error> {
    soft.iter()
        .try_fold(1u64, |acc, (_, w)| acc.checked_add(*w))
        .map(|_| ())
        .ok_or_else(|| overflow("soft weight sum"))
}

/// Reads the suite off a model. Tests with a false u are dropped; the u
/// values must form a prefix.
pub fn decode_tests(ctx: &EncodingContext, model: &Assignment) -> Result<Vec<Test>, Error> {
    let mut suite = Vec::new();
    let mut dropped = false;
    for i in 1..=ctx.n {
        let used = ctx.u(i).is_none_or(|u| model.lit_value(u));
        if !used {
            dropped = true;
            continue;
        }
        if dropped {
            return Err(Error::Encoding(format!("test {i} is used after an unused test")));
        }
        let mut values = Vec::with_capacity(ctx.x[i - 1].len());
        for (p, row) in ctx.x[i - 1].iter().enumerate() {
            let on: Vec<usize> = (0..row.len()).filter(|&v| model.lit_value(row[v])).collect();
            if on.len() != 1 {
                return Err(Error::Encoding(format!("test {i} parameter {p} has {} values set", on.len())));
            }
            values.push(on[0]);
        }
        suite.push(Test::new(values));
    }
    Ok(suite)
}

/// Sidecar for decoding external solutions: one `name -> var` line per
/// mapped variable.
pub fn write_var_map<W: Write>(
    ctx: &EncodingContext,
    model: &SutModel,
    catalog: &TupleCatalog,
    mut sink: W,
) -> Result<(), Error> {
    for i in 1..=ctx.n {
        for (p, param) in model.params().iter().enumerate() {
            for (v, label) in param.values.iter().enumerate() {
                writeln!(sink, "x {i} {} {label} -> {}", param.name, ctx.x(i, p, v).var())?;
            }
        }
    }
    for i in ctx.u_range() {
        if let Some(u) = ctx.u(i) {
            writeln!(sink, "u {i} -> {}", u.var())?;
        }
    }
    let first = if ctx.variant.is_ccx() { 0 } else { 1 };
    for i in first..=ctx.n {
        for (k, &id) in ctx.tuple_ids.iter().enumerate() {
            writeln!(sink, "c {i} {} -> {}", model.tuple_label(catalog.tuple(id)), ctx.c(i, k).var())?;
        }
    }
    for (k, &id) in ctx.tuple_ids.iter().enumerate() {
        if let Some(top) = ctx.c_top.get(k) {
            writeln!(sink, "c top {} -> {}", model.tuple_label(catalog.tuple(id)), top.var())?;
        }
    }
    Ok(())
}
