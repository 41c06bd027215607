//! Incrementally tightenable `Σ w_i·b_i ≤ k`.
//!
//! Built as a generalized totalizer: every tree node carries one output
//! literal per reachable partial sum, with sums above the initial bound
//! collapsed into a single `k+1` output. With unit weights this is exactly
//! the classic totalizer (outputs mean "at least j inputs true").
//!
//! Only upward implications are emitted (inputs force outputs), so the bound
//! is a set of negative units on root outputs. Tightening adds more such
//! units and never touches existing clauses.

use std::collections::BTreeMap;

use super::{Clause, CnfError, Lit, NewVar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PbKind {
    /// All weights are 1.
    Totalizer,
    Generalized,
}

#[derive(Debug, Clone)]
pub struct IncrementalPb {
    terms: Vec<(u64, Lit)>,
    bound: u64,
    kind: PbKind,
    /// Root outputs: partial sum -> literal. Sums are capped at initial k+1.
    root: BTreeMap<u64, Lit>,
}

/// Encodes `Σ w_i·b_i ≤ k`. Returns the constraint object and its clauses.
pub fn encode_pb_leq<A: NewVar + ?Sized>(
    terms: &[(u64, Lit)],
    k: u64,
    alloc: &mut A,
) -> Result<(IncrementalPb, Vec<Clause>), CnfError> {
    if terms.iter().any(|&(w, _)| w == 0) {
        return Err(CnfError::ZeroWeight);
    }
    let mut sum: u64 = 0;
    for &(w, _) in terms {
        sum = sum
            .checked_add(w)
            .ok_or_else(|| CnfError::WeightOverflow("sum of pseudo-Boolean weights".into()))?;
    }
    let kind = if terms.iter().all(|&(w, _)| w == 1) { PbKind::Totalizer } else { PbKind::Generalized };
    let mut out = Vec::new();
    // The tree is built even when the bound is slack so later updates can
    // tighten it; sums never exceed `sum`, so the cap only matters below it.
    let root = if terms.is_empty() {
        BTreeMap::new()
    } else {
        build(terms, k.min(sum) + 1, alloc, &mut out)
    };
    let mut pb = IncrementalPb { terms: terms.to_vec(), bound: k, kind, root };
    out.extend(pb.bound_units(k));
    pb.bound = k;
    Ok((pb, out))
}

fn build<A: NewVar + ?Sized>(
    terms: &[(u64, Lit)],
    cap: u64,
    alloc: &mut A,
    out: &mut Vec<Clause>,
) -> BTreeMap<u64, Lit> {
    if terms.len() == 1 {
        let (w, b) = terms[0];
        return BTreeMap::from([(w.min(cap), b)]);
    }
    let mid = terms.len() / 2;
    let left = build(&terms[..mid], cap, alloc, out);
    let right = build(&terms[mid..], cap, alloc, out);
    let mut node: BTreeMap<u64, Lit> = BTreeMap::new();
    let mut sums = Vec::new();
    for &a in left.keys() {
        sums.push(a);
        for &b in right.keys() {
            sums.push((a + b).min(cap));
        }
    }
    sums.extend(right.keys().copied());
    sums.sort_unstable();
    sums.dedup();
    for s in sums {
        node.insert(s, alloc.new_lit());
    }
    for (&a, &la) in &left {
        out.push(vec![!la, node[&a]]);
        for (&b, &lb) in &right {
            out.push(vec![!la, !lb, node[&(a + b).min(cap)]]);
        }
    }
    for (&b, &lb) in &right {
        out.push(vec![!lb, node[&b]]);
    }
    node
}

impl IncrementalPb {
    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn kind(&self) -> PbKind {
        self.kind
    }

    pub fn terms(&self) -> &[(u64, Lit)] {
        &self.terms
    }

    fn bound_units(&self, k: u64) -> Vec<Clause> {
        self.root.range(k + 1..).map(|(_, &l)| vec![!l]).collect()
    }

    /// Tightens the bound to `k_new < bound()`; returns only new clauses.
    pub fn update(&mut self, k_new: u64) -> Result<Vec<Clause>, CnfError> {
        if k_new >= self.bound {
            return Err(CnfError::NonTighteningUpdate { current: self.bound, new: k_new });
        }
        let out = self.root.range(k_new + 1..=self.bound).map(|(_, &l)| vec![!l]).collect();
        self.bound = k_new;
        Ok(out)
    }
}
