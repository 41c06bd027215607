//! Value t-tuples: enumeration, allowed/forbidden classification, and the
//! lower and upper bounds on the covering array number.
//!
//! Tuple ids are dense. Parameter subsets come in lexicographic order and,
//! inside a subset, value combinations in mixed-radix order with the last
//! parameter varying fastest, so `id = offset + Σ v_j·stride_j`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cnf::{Lit, VarAllocator};
use crate::encode::encode_test_block;
use crate::sat::{Engine, SolveOutcome};
use crate::sut::{ParamId, SutModel, Test, ValueId, ValueTuple};
use crate::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subset {
    pub params: Vec<ParamId>,
    pub offset: usize,
    pub strides: Vec<usize>,
    pub count: usize,
}

#[derive(Debug, Clone)]
pub struct TupleCatalog {
    t: usize,
    subsets: Vec<Subset>,
    tuples: Vec<ValueTuple>,
    subset_of: Vec<u32>,
    allowed: Vec<bool>,
    allowed_ids: Vec<usize>,
    forbidden_ids: Vec<usize>,
    allowed_pos: Vec<Option<usize>>,
    /// Subsets containing each parameter.
    by_param: Vec<Vec<usize>>,
}

fn combinations(n: usize, t: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..t).collect();
    if t > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = t;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - t + i {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..t {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// All value t-tuples of `model`, every one provisionally allowed.
pub fn enumerate_tuples(model: &SutModel, t: usize) -> Result<TupleCatalog, Error> {
    let n = model.num_params();
    if t == 0 || t > n {
        return Err(Error::Strength { t, params: n });
    }
    let mut subsets = Vec::new();
    let mut tuples = Vec::new();
    let mut subset_of = Vec::new();
    let mut by_param = vec![Vec::new(); n];
    for params in combinations(n, t) {
        let sizes: Vec<usize> = params.iter().map(|&p| model.domain_size(p)).collect();
        let mut strides = vec![1; t];
        for j in (0..t.saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * sizes[j + 1];
        }
        let count = strides[0] * sizes[0];
        let idx = subsets.len();
        for &p in &params {
            by_param[p].push(idx);
        }
        for k in 0..count {
            let pairs = params.iter().enumerate().map(|(j, &p)| (p, k / strides[j] % sizes[j])).collect();
            tuples.push(ValueTuple::new(pairs));
            subset_of.push(idx as u32);
        }
        subsets.push(Subset { params, offset: tuples.len() - count, strides, count });
    }
    let total = tuples.len();
    Ok(TupleCatalog {
        t,
        subsets,
        tuples,
        subset_of,
        allowed: vec![true; total],
        allowed_ids: (0..total).collect(),
        forbidden_ids: Vec::new(),
        allowed_pos: (0..total).map(Some).collect(),
        by_param,
    })
}

impl TupleCatalog {
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn tuple(&self, id: usize) -> &ValueTuple {
        &self.tuples[id]
    }

    pub fn tuples(&self) -> &[ValueTuple] {
        &self.tuples
    }

    pub fn subsets(&self) -> &[Subset] {
        &self.subsets
    }

    pub fn subset_of(&self, id: usize) -> usize {
        self.subset_of[id] as usize
    }

    pub fn is_allowed(&self, id: usize) -> bool {
        self.allowed[id]
    }

    pub fn allowed_ids(&self) -> &[usize] {
        &self.allowed_ids
    }

    pub fn forbidden_ids(&self) -> &[usize] {
        &self.forbidden_ids
    }

    /// Position of a tuple id among the allowed ids.
    pub fn allowed_index(&self, id: usize) -> Option<usize> {
        self.allowed_pos[id]
    }

    pub fn subsets_with(&self, p: ParamId) -> &[usize] {
        &self.by_param[p]
    }

    /// Id of the tuple of subset `s` read off a (possibly partial) assignment;
    /// `None` if one of its parameters is unset.
    pub fn id_in_subset(&self, s: usize, values: &[Option<ValueId>]) -> Option<usize> {
        let sub = &self.subsets[s];
        let mut id = sub.offset;
        for (j, &p) in sub.params.iter().enumerate() {
            id += values[p]? * sub.strides[j];
        }
        Some(id)
    }

    pub fn id_of(&self, tuple: &ValueTuple) -> Option<usize> {
        let params: Vec<ParamId> = tuple.params().collect();
        let s = self.subsets.iter().position(|s| s.params == params)?;
        let sub = &self.subsets[s];
        Some(sub.offset + tuple.pairs.iter().zip(&sub.strides).map(|(&(_, v), st)| v * st).sum::<usize>())
    }

    /// The tuple ids a test covers, one per parameter subset.
    pub fn tuples_of_test(&self, test: &Test) -> Vec<usize> {
        (0..self.subsets.len())
            .map(|s| {
                let sub = &self.subsets[s];
                sub.offset + sub.params.iter().zip(&sub.strides).map(|(&p, st)| test.values[p] * st).sum::<usize>()
            })
            .collect()
    }

    pub fn set_forbidden(&mut self, forbidden: &[usize]) {
        for a in self.allowed.iter_mut() {
            *a = true;
        }
        for &id in forbidden {
            self.allowed[id] = false;
        }
        self.allowed_ids = (0..self.len()).filter(|&i| self.allowed[i]).collect();
        self.forbidden_ids = (0..self.len()).filter(|&i| !self.allowed[i]).collect();
        self.allowed_pos = vec![None; self.len()];
        for (k, &id) in self.allowed_ids.iter().enumerate() {
            self.allowed_pos[id] = Some(k);
        }
    }

    /// Allowed tuple count per subset.
    pub fn allowed_per_subset(&self) -> Vec<usize> {
        self.subsets
            .iter()
            .map(|s| (s.offset..s.offset + s.count).filter(|&i| self.allowed[i]).count())
            .collect()
    }
}

/// Single-test SAT oracle over X ∧ SUTX: answers whether a partial
/// assignment extends to a valid test. Constraint-free models skip the solver.
pub struct Consistency {
    engine: Engine,
    x: Vec<Vec<Lit>>,
    free: bool,
}

impl Consistency {
    pub fn new(model: &SutModel, seed: u64) -> Self {
        let mut alloc = VarAllocator::new();
        let (x, clauses) = encode_test_block(model, &mut alloc);
        let mut engine = Engine::with_seed(seed);
        engine.ensure_vars(alloc.num_vars());
        engine.add_clauses(&clauses);
        // Prefer each parameter's first value; unconstrained models then
        // yield the all-first-values test.
        for row in &x {
            for (v, l) in row.iter().enumerate() {
                engine.set_polarity(l.var(), Some(v == 0));
            }
        }
        Consistency { engine, x, free: model.constraints().is_empty() }
    }

    pub fn x(&self) -> &[Vec<Lit>] {
        &self.x
    }

    pub fn is_consistent(&mut self, pairs: &[(ParamId, ValueId)]) -> Result<bool, Error> {
        if self.free {
            let mut seen: Vec<(ParamId, ValueId)> = pairs.to_vec();
            seen.sort_unstable();
            seen.dedup();
            return Ok(seen.windows(2).all(|w| w[0].0 != w[1].0));
        }
        let assumptions: Vec<Lit> = pairs.iter().map(|&(p, v)| self.x[p][v]).collect();
        Ok(self.engine.solve(&assumptions)?.is_sat())
    }

    /// A valid test extending `pairs`, if one exists.
    pub fn complete(&mut self, pairs: &[(ParamId, ValueId)]) -> Result<Option<Test>, Error> {
        let assumptions: Vec<Lit> = pairs.iter().map(|&(p, v)| self.x[p][v]).collect();
        match self.engine.solve(&assumptions)? {
            SolveOutcome::Sat(m) => {
                let values = self
                    .x
                    .iter()
                    .map(|row| row.iter().position(|&l| m.lit_value(l)).expect("exactly-one per parameter"))
                    .collect();
                Ok(Some(Test::new(values)))
            }
            SolveOutcome::Unsat(_) => Ok(None),
        }
    }
}

/// Classifies every tuple with one assumption query on a shared engine.
pub fn detect_forbidden(model: &SutModel, catalog: &mut TupleCatalog) -> Result<(), Error> {
    let mut oracle = Consistency::new(model, 0);
    if !oracle.is_consistent(&[])? {
        return Err(Error::Sut(crate::sut::SutError::Unsatisfiable));
    }
    let mut forbidden = Vec::new();
    if !model.constraints().is_empty() {
        for id in 0..catalog.len() {
            if !oracle.is_consistent(&catalog.tuple(id).pairs)? {
                forbidden.push(id);
            }
        }
    }
    catalog.set_forbidden(&forbidden);
    Ok(())
}

/// Enumerates and classifies in one step.
pub fn build_catalog(model: &SutModel, t: usize) -> Result<TupleCatalog, Error> {
    let mut c = enumerate_tuples(model, t)?;
    detect_forbidden(model, &mut c)?;
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LowerBound {
    pub lb: usize,
    /// Index of the parameter subset with the most allowed tuples.
    pub subset: usize,
    /// Its allowed tuple ids; no test can cover two of them.
    pub witness: Vec<usize>,
}

/// `lb = r - 1` where `r` is the largest allowed-tuple count of any subset.
pub fn lower_bound(catalog: &TupleCatalog) -> LowerBound {
    let counts = catalog.allowed_per_subset();
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    let s = &catalog.subsets()[best];
    let witness: Vec<usize> = (s.offset..s.offset + s.count).filter(|&i| catalog.is_allowed(i)).collect();
    LowerBound { lb: witness.len().saturating_sub(1), subset: best, witness }
}

/// One-test-at-a-time greedy construction. Each test starts from an
/// uncovered tuple of the subset with the most uncovered tuples, then fixes
/// the remaining parameters one by one, always the parameter/value pair that
/// covers the most new tuples among those whose parameters are all fixed.
pub struct GreedyBuilder<'a> {
    model: &'a SutModel,
    catalog: &'a TupleCatalog,
    oracle: Consistency,
    rng: ChaCha8Rng,
}

impl<'a> GreedyBuilder<'a> {
    pub fn new(model: &'a SutModel, catalog: &'a TupleCatalog, seed: u64) -> Self {
        GreedyBuilder { model, catalog, oracle: Consistency::new(model, seed), rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Builds one valid test. `uncovered[id]` marks tuples still wanted.
    /// Returns `None` when nothing is left to cover.
    pub fn next_test(&mut self, uncovered: &[bool]) -> Result<Option<Test>, Error> {
        let cat = self.catalog;
        let n = self.model.num_params();
        let mut best: Option<(usize, usize)> = None;
        for (s, sub) in cat.subsets().iter().enumerate() {
            let c = (sub.offset..sub.offset + sub.count).filter(|&i| uncovered[i]).count();
            if c > 0 && best.is_none_or(|(_, bc)| c > bc) {
                best = Some((s, c));
            }
        }
        let Some((s, _)) = best else { return Ok(None) };
        let sub = &cat.subsets()[s];
        let open: Vec<usize> = (sub.offset..sub.offset + sub.count).filter(|&i| uncovered[i]).collect();
        let seed_id = *open.choose(&mut self.rng).unwrap();

        let mut fixed: Vec<Option<ValueId>> = vec![None; n];
        for &(p, v) in &cat.tuple(seed_id).pairs {
            fixed[p] = Some(v);
        }
        if !self.oracle.is_consistent(&pairs_of(&fixed))? {
            return Err(Error::Encoding(format!("seed tuple {seed_id} is not allowed")));
        }

        while fixed.iter().any(|v| v.is_none()) {
            // Gains per unfixed parameter and value.
            let mut choice: Option<(ParamId, Vec<(usize, ValueId)>)> = None;
            let mut choice_gain = 0;
            let open_params: Vec<ParamId> = (0..n).filter(|&p| fixed[p].is_none()).collect();
            for p in open_params {
                let mut gains: Vec<(usize, ValueId)> = (0..self.model.domain_size(p))
                    .map(|v| {
                        fixed[p] = Some(v);
                        let g = cat
                            .subsets_with(p)
                            .iter()
                            .filter_map(|&s| cat.id_in_subset(s, &fixed))
                            .filter(|&id| uncovered[id])
                            .count();
                        (g, v)
                    })
                    .collect();
                fixed[p] = None;
                gains.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
                if choice.is_none() || gains[0].0 > choice_gain {
                    choice_gain = gains[0].0;
                    choice = Some((p, gains));
                }
            }
            let (p, gains) = choice.unwrap();
            let mut placed = false;
            for (_, v) in gains {
                fixed[p] = Some(v);
                if self.oracle.is_consistent(&pairs_of(&fixed))? {
                    placed = true;
                    break;
                }
            }
            if !placed {
                return Err(Error::Encoding("greedy builder reached an inconsistent partial test".into()));
            }
        }
        Ok(Some(Test::new(fixed.into_iter().map(|v| v.unwrap()).collect())))
    }
}

fn pairs_of(fixed: &[Option<ValueId>]) -> Vec<(ParamId, ValueId)> {
    fixed.iter().enumerate().filter_map(|(p, v)| v.map(|v| (p, v))).collect()
}

/// Greedy covering array: returns the suite; its length is the upper bound.
pub fn greedy_upper_bound(model: &SutModel, catalog: &TupleCatalog, seed: u64) -> Result<Vec<Test>, Error> {
    let mut uncovered: Vec<bool> = (0..catalog.len()).map(|i| catalog.is_allowed(i)).collect();
    let mut builder = GreedyBuilder::new(model, catalog, seed);
    let mut suite = Vec::new();
    while let Some(test) = builder.next_test(&uncovered)? {
        for id in catalog.tuples_of_test(&test) {
            uncovered[id] = false;
        }
        suite.push(test);
    }
    Ok(suite)
}

/// Any valid test: the first model of the single-test encoding.
pub fn dummy_test(model: &SutModel, seed: u64) -> Result<Test, Error> {
    Consistency::new(model, seed)
        .complete(&[])?
        .ok_or(Error::Sut(crate::sut::SutError::Unsatisfiable))
}

#[derive(Debug, Clone)]
pub struct Bounds {
    /// Strict: CAN > lb.
    pub lb: usize,
    pub ub: usize,
    pub lb_witness: LowerBound,
    pub ub_witness: Vec<Test>,
}

pub fn compute_bounds(model: &SutModel, catalog: &TupleCatalog, seed: u64) -> Result<Bounds, Error> {
    let low = lower_bound(catalog);
    let suite = greedy_upper_bound(model, catalog, seed)?;
    Ok(Bounds { lb: low.lb, ub: suite.len(), lb_witness: low, ub_witness: suite })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sut::parse_model;

    pub const AUTONOMOUS: &str = "\
[PARAMETERS]
L: dy, ni;
E: hw, ur, co;
M: cb, el;
S: ca, ra, li;
[CONSTRAINTS]
(L = ni && E = co) -> S != ca;
(E = hw || E = co) -> S != li;
M = el -> E = ur;
";

    fn covers_all(model: &SutModel, cat: &TupleCatalog, suite: &[Test]) -> bool {
        suite.iter().all(|t| model.entails(t))
            && cat.allowed_ids().iter().all(|&id| suite.iter().any(|t| t.covers(cat.tuple(id))))
    }

    #[test]
    fn tuple_counts() {
        let m = parse_model(AUTONOMOUS).unwrap();
        assert_eq!(enumerate_tuples(&m, 2).unwrap().len(), 37);
        assert_eq!(enumerate_tuples(&m, 1).unwrap().len(), 10);
        assert!(enumerate_tuples(&m, 5).is_err());
        assert!(enumerate_tuples(&m, 0).is_err());
        let ins = SutModel::from_profile(&[2, 2, 2, 2, 2, 2, 3, 5, 6, 6, 11, 13, 17, 31]);
        assert_eq!(enumerate_tuples(&ins, 2).unwrap().len(), 4573);
    }

    #[test]
    fn ids_are_positional() {
        let m = SutModel::from_profile(&[2, 3, 2]);
        let cat = enumerate_tuples(&m, 2).unwrap();
        for id in 0..cat.len() {
            assert_eq!(cat.id_of(cat.tuple(id)), Some(id));
        }
        // (p0,p1) first, then (p0,p2), then (p1,p2).
        assert_eq!(cat.tuple(0).pairs, vec![(0, 0), (1, 0)]);
        assert_eq!(cat.tuple(1).pairs, vec![(0, 0), (1, 1)]);
        assert_eq!(cat.tuple(6).pairs, vec![(0, 0), (2, 0)]);
        let t = Test::new(vec![1, 2, 0]);
        let ids = cat.tuples_of_test(&t);
        assert!(ids.iter().all(|&id| t.covers(cat.tuple(id))));
    }

    #[test]
    fn autonomous_forbidden_tuples() {
        let m = parse_model(AUTONOMOUS).unwrap();
        let cat = build_catalog(&m, 2).unwrap();
        assert_eq!(cat.allowed_ids().len(), 33);
        let mut labels: Vec<String> = cat.forbidden_ids().iter().map(|&id| m.tuple_label(cat.tuple(id))).collect();
        labels.sort();
        let mut want = vec!["E=co,M=el", "E=hw,S=li", "E=hw,M=el", "E=co,S=li"];
        want.sort();
        assert_eq!(labels, want);
        let low = lower_bound(&cat);
        assert_eq!(low.lb, 6);
        assert_eq!(cat.subsets()[low.subset].params, vec![1, 3]);
    }

    #[test]
    fn forced_forbidden_pair() {
        let m = parse_model("[PARAMETERS]\np1: 0, 1;\np2: 0, 1;\n[CONSTRAINTS]\np1 = 0 -> p2 = 0;\n").unwrap();
        let cat = build_catalog(&m, 2).unwrap();
        let f: Vec<String> = cat.forbidden_ids().iter().map(|&id| m.tuple_label(cat.tuple(id))).collect();
        assert_eq!(f, vec!["p1=0,p2=1"]);
    }

    #[test]
    fn forbidden_matches_exhaustive_check() {
        let m = parse_model(AUTONOMOUS).unwrap();
        let cat = build_catalog(&m, 2).unwrap();
        let valid = m.valid_tests();
        for id in 0..cat.len() {
            let ext = valid.iter().any(|t| t.covers(cat.tuple(id)));
            assert_eq!(cat.is_allowed(id), ext);
        }
    }

    #[test]
    fn binary_lower_bound_and_greedy() {
        let m = SutModel::from_profile(&[2, 2, 2]);
        let cat = build_catalog(&m, 2).unwrap();
        assert_eq!(lower_bound(&cat).lb, 3);
        for seed in 0..5 {
            let suite = greedy_upper_bound(&m, &cat, seed).unwrap();
            assert!((4..=8).contains(&suite.len()));
            assert!(covers_all(&m, &cat, &suite));
        }
    }

    #[test]
    fn greedy_on_autonomous_is_complete() {
        let m = parse_model(AUTONOMOUS).unwrap();
        let cat = build_catalog(&m, 2).unwrap();
        for seed in 0..5 {
            let suite = greedy_upper_bound(&m, &cat, seed).unwrap();
            assert!(suite.len() <= 36);
            assert!(covers_all(&m, &cat, &suite));
        }
    }

    #[test]
    fn single_parameter_unary() {
        let m = SutModel::from_profile(&[5]);
        let cat = build_catalog(&m, 1).unwrap();
        assert_eq!(greedy_upper_bound(&m, &cat, 0).unwrap().len(), 5);
    }

    #[test]
    fn dummy_tests() {
        let m = parse_model(AUTONOMOUS).unwrap();
        assert!(m.entails(&dummy_test(&m, 0).unwrap()));
        let bad = parse_model("[PARAMETERS]\na: 0, 1;\n[CONSTRAINTS]\na = 0;\na = 1;\n").unwrap();
        assert!(dummy_test(&bad, 0).is_err());
        assert!(build_catalog(&bad, 1).is_err());
        let free = SutModel::from_profile(&[2, 2, 2]);
        assert_eq!(dummy_test(&free, 0).unwrap(), Test::new(vec![0, 0, 0]));
    }
}
