//! At-most-one / at-least-one / exactly-one encodings.
//!
//! AMO uses the sequential (ladder) encoding: auxiliary `s_i` means "some
//! literal among the first `i` is true". Lists of at most four literals use
//! the pairwise encoding instead, which is smaller at that size.

use super::{Clause, CnfError, Lit, NewVar};

const PAIRWISE_LIMIT: usize = 4;

pub fn encode_alo(lits: &[Lit]) -> Result<Vec<Clause>, CnfError> {
    if lits.is_empty() {
        return Err(CnfError::EmptyLiterals);
    }
    Ok(vec![lits.to_vec()])
}

pub fn encode_amo<A: NewVar + ?Sized>(lits: &[Lit], alloc: &mut A) -> Vec<Clause> {
    let n = lits.len();
    if n <= 1 {
        return Vec::new();
    }
    if n <= PAIRWISE_LIMIT {
        let mut out = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                out.push(vec![!lits[i], !lits[j]]);
            }
        }
        return out;
    }
    // s[i] for i in 0..n-1
    let s: Vec<Lit> = (0..n - 1).map(|_| alloc.new_lit()).collect();
    let mut out = Vec::with_capacity(3 * n);
    out.push(vec![!lits[0], s[0]]);
    for i in 1..n - 1 {
        out.push(vec![!lits[i], s[i]]);
        out.push(vec![!s[i - 1], s[i]]);
        out.push(vec![!lits[i], !s[i - 1]]);
    }
    out.push(vec![!lits[n - 1], !s[n - 2]]);
    out
}

pub fn encode_eo<A: NewVar + ?Sized>(lits: &[Lit], alloc: &mut A) -> Result<Vec<Clause>, CnfError> {
    let mut out = encode_alo(lits)?;
    out.extend(encode_amo(lits, alloc));
    Ok(out)
}
