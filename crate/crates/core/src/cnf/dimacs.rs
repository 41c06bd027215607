//! DIMACS CNF and WCNF reading and writing.

use std::fmt::Write as _;
use std::io::Write;

use super::{Clause, Cnf, CnfError, Lit, Wcnf};

fn push_clause(out: &mut String, prefix: Option<u64>, clause: &[Lit]) {
    if let Some(w) = prefix {
        let _ = write!(out, "{w} ");
    }
    for l in clause {
        let _ = write!(out, "{} ", l.to_dimacs());
    }
    out.push_str("0\n");
}

pub fn cnf_to_string(cnf: &Cnf) -> String {
    let mut out = format!("p cnf {} {}\n", cnf.num_vars, cnf.clauses.len());
    for c in &cnf.clauses {
        push_clause(&mut out, None, c);
    }
    out
}

/// Hard clauses first (weight = top), then soft clauses in insertion order.
pub fn wcnf_to_string(w: &Wcnf) -> String {
    let top = w.top();
    let mut out = format!("p wcnf {} {} {}\n", w.num_vars, w.hard.len() + w.soft.len(), top);
    for c in &w.hard {
        push_clause(&mut out, Some(top), c);
    }
    for (c, wt) in &w.soft {
        push_clause(&mut out, Some(*wt), c);
    }
    out
}

pub fn write_dimacs<W: Write>(cnf: &Cnf, mut sink: W) -> Result<(), CnfError> {
    sink.write_all(cnf_to_string(cnf).as_bytes())?;
    Ok(())
}

pub fn write_wcnf<W: Write>(w: &Wcnf, mut sink: W) -> Result<(), CnfError> {
    sink.write_all(wcnf_to_string(w).as_bytes())?;
    Ok(())
}

fn err(line: usize, msg: impl Into<String>) -> CnfError {
    CnfError::Dimacs { line, msg: msg.into() }
}

fn parse_ints(line: usize, s: &str) -> Result<Vec<i64>, CnfError> {
    s.split_whitespace()
        .map(|t| t.parse::<i64>().map_err(|_| err(line, format!("bad integer {t:?}"))))
        .collect()
}

fn to_clause(line: usize, ints: &[i64]) -> Result<Clause, CnfError> {
    match ints.split_last() {
        Some((0, body)) => {
            if body.contains(&0) {
                return Err(err(line, "0 inside clause"));
            }
            Ok(body.iter().map(|&v| Lit::from_dimacs(v)).collect())
        }
        _ => Err(err(line, "clause not terminated by 0")),
    }
}

pub fn parse_dimacs(text: &str) -> Result<Cnf, CnfError> {
    let mut cnf = Cnf::new();
    let mut header = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('c') {
            continue;
        }
        if let Some(rest) = s.strip_prefix("p cnf") {
            let h = parse_ints(line, rest)?;
            if h.len() != 2 || h.iter().any(|&x| x < 0) {
                return Err(err(line, "expected `p cnf V C`"));
            }
            header = Some((h[0] as u32, h[1] as usize));
            continue;
        }
        if header.is_none() {
            return Err(err(line, "clause before header"));
        }
        cnf.add(to_clause(line, &parse_ints(line, s)?)?);
    }
    let (v, c) = header.ok_or_else(|| err(0, "missing header"))?;
    if c != cnf.clauses.len() {
        return Err(err(0, format!("header declares {c} clauses, found {}", cnf.clauses.len())));
    }
    cnf.num_vars = cnf.num_vars.max(v);
    Ok(cnf)
}

pub fn parse_wcnf(text: &str) -> Result<Wcnf, CnfError> {
    let mut w = Wcnf::new();
    let mut header = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('c') {
            continue;
        }
        if let Some(rest) = s.strip_prefix("p wcnf") {
            let h = parse_ints(line, rest)?;
            if h.len() != 3 || h.iter().any(|&x| x < 0) {
                return Err(err(line, "expected `p wcnf V C top`"));
            }
            header = Some((h[0] as u32, h[1] as usize, h[2] as u64));
            continue;
        }
        let Some((_, _, top)) = header else {
            return Err(err(line, "clause before header"));
        };
        let ints = parse_ints(line, s)?;
        let (&wt, rest) = ints.split_first().ok_or_else(|| err(line, "empty clause line"))?;
        if wt <= 0 {
            return Err(err(line, "weight must be positive"));
        }
        let clause = to_clause(line, rest)?;
        if wt as u64 >= top {
            w.add_hard(clause);
        } else {
            w.add_soft(clause, wt as u64);
        }
    }
    let (v, c, top) = header.ok_or_else(|| err(0, "missing header"))?;
    if c != w.hard.len() + w.soft.len() {
        return Err(err(0, "clause count does not match header"));
    }
    w.num_vars = w.num_vars.max(v);
    w.set_top(top);
    Ok(w)
}
