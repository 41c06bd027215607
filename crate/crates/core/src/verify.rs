//! Independent suite checking and brute-force oracles.
//!
//! Nothing here touches the encoders or the SAT engine: coverage is counted
//! by scanning tests against tuples, and the oracles enumerate valid tests
//! directly from the constraint expressions.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::Serialize;

use crate::sut::{SutModel, Test};
use crate::tuples::TupleCatalog;
use crate::Error;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub suite_size: usize,
    /// Constraint verdict per test, in suite order.
    pub valid: Vec<bool>,
    pub covered: Vec<usize>,
    pub missing: Vec<usize>,
    pub allowed: usize,
    pub ratio: f64,
}

impl CoverageReport {
    pub fn all_valid(&self) -> bool {
        self.valid.iter().all(|&v| v)
    }

    /// Every test valid and every allowed tuple covered.
    pub fn is_covering_array(&self) -> bool {
        self.all_valid() && self.missing.is_empty()
    }
}

/// Checks every test against the constraints and counts covered allowed tuples.
/// Invalid tests still count toward coverage; they are flagged, not dropped.
pub fn verify_suite(model: &SutModel, catalog: &TupleCatalog, suite: &[Test]) -> CoverageReport {
    let valid: Vec<bool> = suite.iter().map(|t| model.entails(t)).collect();
    let (mut covered, mut missing) = (Vec::new(), Vec::new());
    for &id in catalog.allowed_ids() {
        let tuple = catalog.tuple(id);
        let hit = suite.iter().any(|test| tuple.pairs.iter().all(|&(p, v)| test.values[p] == v));
        if hit {
            covered.push(id);
        } else {
            missing.push(id);
        }
    }
    let allowed = catalog.allowed_ids().len();
    let ratio = if allowed == 0 { 1.0 } else { covered.len() as f64 / allowed as f64 };
    CoverageReport { suite_size: suite.len(), valid, covered, missing, allowed, ratio }
}

/// Writes a suite as CSV: a header of parameter names, one row of value
/// labels per test.
pub fn write_suite_csv<W: Write>(model: &SutModel, suite: &[Test], sink: W) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(model.params().iter().map(|p| p.name.as_str()))?;
    for t in suite {
        w.write_record(model.test_labels(t))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a suite CSV. Columns may come in any order but must name every
/// parameter exactly once.
pub fn read_suite_csv<R: Read>(model: &SutModel, source: R) -> Result<Vec<Test>, Error> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let mut column = vec![None; model.num_params()];
    for (j, name) in header.iter().enumerate() {
        let p = model
            .param_index(name)
            .ok_or_else(|| Error::Invalid(format!("suite column '{name}' is not a parameter")))?;
        if column[p].replace(j).is_some() {
            return Err(Error::Invalid(format!("suite column '{name}' appears twice")));
        }
    }
    if let Some(p) = column.iter().position(Option::is_none) {
        return Err(Error::Invalid(format!("suite lacks a column for '{}'", model.params()[p].name)));
    }
    let mut suite = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        let mut values = Vec::with_capacity(model.num_params());
        for (p, param) in model.params().iter().enumerate() {
            let label = rec.get(column[p].unwrap()).unwrap_or("");
            let v = param.value_index(label).ok_or_else(|| {
                Error::Invalid(format!("row {}: '{label}' is not a value of {}", row + 1, param.name))
            })?;
            values.push(v);
        }
        suite.push(Test::new(values));
    }
    Ok(suite)
}

pub const CAN_ORACLE_MAX_TESTS: usize = 64;
pub const CAN_ORACLE_MAX_N: usize = 6;
pub const TN_ORACLE_MAX_TESTS: usize = 32;
pub const TN_ORACLE_MAX_N: usize = 3;
/// Full assignments enumerated before filtering by the constraints.
const ORACLE_MAX_ASSIGNMENTS: u64 = 1 << 16;

/// Valid tests and, per test, the bitset of allowed tuples it covers.
/// Allowed tuples are exactly those some valid test covers.
struct OracleSpace {
    tests: Vec<Test>,
    masks: Vec<u128>,
    allowed: usize,
}

fn oracle_space(model: &SutModel, t: usize, max_tests: usize) -> Result<OracleSpace, Error> {
    let n = model.num_params();
    if t == 0 || t > n {
        return Err(Error::Strength { t, params: n });
    }
    let total = model.params().iter().try_fold(1u64, |acc, p| acc.checked_mul(p.size() as u64));
    if total.is_none_or(|c| c > ORACLE_MAX_ASSIGNMENTS) {
        return Err(Error::Oracle("too many full assignments to enumerate".into()));
    }
    let tests = model.valid_tests();
    if tests.len() > max_tests {
        return Err(Error::Oracle(format!("{} valid tests exceed the limit of {max_tests}", tests.len())));
    }
    let subsets = subsets_of(n, t);
    let mut index: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
    let mut masks = Vec::with_capacity(tests.len());
    for test in &tests {
        let mut m = 0u128;
        for (s, sub) in subsets.iter().enumerate() {
            let key = (s, sub.iter().map(|&p| test.values[p]).collect());
            let next = index.len();
            let bit = *index.entry(key).or_insert(next);
            if bit >= 128 {
                return Err(Error::Oracle("more than 128 allowed tuples".into()));
            }
            m |= 1 << bit;
        }
        masks.push(m);
    }
    Ok(OracleSpace { tests, masks, allowed: index.len() })
}

fn subsets_of(n: usize, t: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, t: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == t {
            out.push(cur.clone());
            return;
        }
        for p in start..n {
            cur.push(p);
            rec(p + 1, n, t, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, t, &mut Vec::new(), &mut out);
    out
}

/// Allowed t-tuple count derived from valid tests alone.
pub fn brute_force_allowed(model: &SutModel, t: usize) -> Result<usize, Error> {
    Ok(oracle_space(model, t, CAN_ORACLE_MAX_TESTS)?.allowed)
}

/// Exact covering array number by iterative deepening: `Ok(None)` means it
/// exceeds `n_max`. Each level branches on the valid tests covering the
/// lowest uncovered tuple.
pub fn brute_force_can(model: &SutModel, t: usize, n_max: usize) -> Result<Option<usize>, Error> {
    brute_force_can_suite(model, t, n_max).map(|s| s.map(|s| s.len()))
}

/// Like [`brute_force_can`] but returns one minimum suite.
pub fn brute_force_can_suite(model: &SutModel, t: usize, n_max: usize) -> Result<Option<Vec<Test>>, Error> {
    if n_max > CAN_ORACLE_MAX_N {
        return Err(Error::Oracle(format!("n_max {n_max} exceeds {CAN_ORACLE_MAX_N}")));
    }
    let space = oracle_space(model, t, CAN_ORACLE_MAX_TESTS)?;
    let full: u128 = if space.allowed == 128 { u128::MAX } else { (1u128 << space.allowed) - 1 };
    let best_cover = space.masks.iter().map(|m| m.count_ones()).max().unwrap_or(0);

    fn search(space: &OracleSpace, full: u128, best: u32, covered: u128, left: usize, picked: &mut Vec<usize>) -> bool {
        if covered == full {
            return true;
        }
        if left == 0 || ((full & !covered).count_ones() as usize) > left * best as usize {
            return false;
        }
        let target = (full & !covered).trailing_zeros();
        for (i, &m) in space.masks.iter().enumerate() {
            if m >> target & 1 == 1 {
                picked.push(i);
                if search(space, full, best, covered | m, left - 1, picked) {
                    return true;
                }
                picked.pop();
            }
        }
        false
    }

    for k in 0..=n_max {
        let mut picked = Vec::new();
        if search(&space, full, best_cover, 0, k, &mut picked) {
            return Ok(Some(picked.into_iter().map(|i| space.tests[i].clone()).collect()));
        }
    }
    Ok(None)
}

/// Tuple number: the most allowed tuples any `n` valid tests cover.
pub fn brute_force_tn(model: &SutModel, t: usize, n: usize) -> Result<usize, Error> {
    if n > TN_ORACLE_MAX_N {
        return Err(Error::Oracle(format!("N={n} exceeds {TN_ORACLE_MAX_N}")));
    }
    let space = oracle_space(model, t, TN_ORACLE_MAX_TESTS)?;

    fn best(masks: &[u128], from: usize, left: usize, covered: u128) -> u32 {
        if left == 0 {
            return covered.count_ones();
        }
        let mut top = covered.count_ones();
        for i in from..masks.len() {
            top = top.max(best(masks, i, left - 1, covered | masks[i]));
        }
        top
    }
    Ok(best(&space.masks, 0, n, 0) as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sut::parse_model;
    use crate::tuples::build_catalog;

    const AUTONOMOUS: &str = "\
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

    const REFERENCE_SUITE: &str = "L,E,S,M
dy,hw,ca,cb
ni,hw,ra,cb
ni,ur,ca,el
dy,ur,ra,cb
dy,ur,li,cb
dy,co,ca,cb
ni,co,ra,cb
dy,ur,ra,el
ni,ur,li,cb
ni,ur,li,el
";

    #[test]
    fn reference_suite_is_a_covering_array() {
        let m = parse_model(AUTONOMOUS).unwrap();
        let cat = build_catalog(&m, 2).unwrap();
        let suite = read_suite_csv(&m, REFERENCE_SUITE.as_bytes()).unwrap();
        let r = verify_suite(&m, &cat, &suite);
        assert_eq!(r.suite_size, 10);
        assert!(r.all_valid());
        assert_eq!((r.covered.len(), r.allowed), (33, 33));
        assert_eq!(r.ratio, 1.0);

        let short = verify_suite(&m, &cat, &suite[..9]);
        assert!(short.covered.len() < 33);
        // Only row t10 covers (L=ni, M=el) together with (S=li, M=el).
        let labels: Vec<String> = short.missing.iter().map(|&id| m.tuple_label(cat.tuple(id))).collect();
        assert!(labels.contains(&"S=li,M=el".to_string()) || labels.contains(&"M=el,S=li".to_string()));
    }

    #[test]
    fn empty_suite_and_invalid_tests() {
        let m = parse_model(AUTONOMOUS).unwrap();
        let cat = build_catalog(&m, 2).unwrap();
        let r = verify_suite(&m, &cat, &[]);
        assert_eq!((r.covered.len(), r.missing.len()), (0, 33));
        let bad = m.test_from_labels(&[("L", "ni"), ("E", "co"), ("S", "ca"), ("M", "cb")]).unwrap();
        let r = verify_suite(&m, &cat, &[bad]);
        assert_eq!(r.valid, vec![false]);
        assert!(!r.is_covering_array());
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let m = parse_model(AUTONOMOUS).unwrap();
        let suite = read_suite_csv(&m, REFERENCE_SUITE.as_bytes()).unwrap();
        let mut out = Vec::new();
        write_suite_csv(&m, &suite, &mut out).unwrap();
        assert!(String::from_utf8(out.clone()).unwrap().starts_with("L,E,M,S\ndy,hw,cb,ca\n"));
        assert_eq!(read_suite_csv(&m, out.as_slice()).unwrap(), suite);
        assert!(read_suite_csv(&m, "L,E,S\ndy,hw,ca\n".as_bytes()).is_err());
        assert!(read_suite_csv(&m, "L,E,S,M\ndz,hw,ca,cb\n".as_bytes()).is_err());
        assert!(read_suite_csv(&m, "L,E,S,M,X\n".as_bytes()).is_err());
    }

    #[test]
    fn can_oracle_known_values() {
        assert_eq!(brute_force_can(&SutModel::from_profile(&[2, 2, 2]), 2, 6).unwrap(), Some(4));
        assert_eq!(brute_force_can(&SutModel::from_profile(&[2, 2, 2, 2]), 2, 6).unwrap(), Some(5));
        assert_eq!(brute_force_can(&SutModel::from_profile(&[2, 3]), 2, 6).unwrap(), Some(6));
        assert_eq!(brute_force_can(&SutModel::from_profile(&[3, 3]), 2, 6).unwrap(), None);
        assert!(brute_force_can(&SutModel::from_profile(&[2, 2]), 2, 7).is_err());
        assert!(brute_force_can(&SutModel::from_profile(&[3, 3, 3, 3]), 2, 6).is_err());
    }

    #[test]
    fn can_oracle_suite_is_minimal_and_orthogonal() {
        let m = SutModel::from_profile(&[2, 2, 2]);
        let cat = build_catalog(&m, 2).unwrap();
        let s = brute_force_can_suite(&m, 2, 6).unwrap().unwrap();
        assert!(verify_suite(&m, &cat, &s).is_covering_array());
        // Four tests of 2^3 at strength 2 form an orthogonal array: each pair
        // of columns shows each value pair exactly once.
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            let mut seen: Vec<(usize, usize)> = s.iter().map(|t| (t.values[a], t.values[b])).collect();
            seen.sort();
            seen.dedup();
            assert_eq!(seen.len(), 4);
        }
    }

    #[test]
    fn tn_oracle_values() {
        let m = SutModel::from_profile(&[2, 2, 2]);
        assert_eq!(brute_force_tn(&m, 2, 1).unwrap(), 3);
        assert_eq!(brute_force_tn(&m, 2, 2).unwrap(), 6);
        assert_eq!(brute_force_tn(&m, 2, 3).unwrap(), 9);
        assert!(brute_force_tn(&m, 2, 4).is_err());
        assert_eq!(brute_force_allowed(&m, 2).unwrap(), 12);
    }

    #[test]
    fn oracle_allowed_matches_catalog_on_autonomous() {
        let m = parse_model(AUTONOMOUS).unwrap();
        assert_eq!(brute_force_allowed(&m, 2).unwrap(), 33);
        assert_eq!(brute_force_tn(&m, 2, 1).unwrap(), 6);
    }
}
