//! Definitional CNF translation of constraint expressions.
//!
//! Sub-formulas that are already a disjunction of literals (after pushing
//! negations inward) become a single clause. Everything else gets a fresh
//! definition variable with full equivalence clauses, so any model projects
//! onto the truth value of the original expression.

use super::{Clause, Lit, NewVar};
use crate::sut::{Expr, ParamId, ValueId};

/// Clauses asserting `expr`. `atom` maps `(parameter, value)` to the literal
/// standing for "parameter takes value".
pub fn tseitin<A, F>(expr: &Expr, alloc: &mut A, atom: &mut F) -> Vec<Clause>
where
    A: NewVar + ?Sized,
    F: FnMut(ParamId, ValueId) -> Lit,
{
    let mut out = Vec::new();
    assert_expr(expr, alloc, atom, &mut out);
    out
}

fn assert_expr<A, F>(expr: &Expr, alloc: &mut A, atom: &mut F, out: &mut Vec<Clause>)
where
    A: NewVar + ?Sized,
    F: FnMut(ParamId, ValueId) -> Lit,
{
    if let Expr::And(a, b) = expr {
        assert_expr(a, alloc, atom, out);
        assert_expr(b, alloc, atom, out);
        return;
    }
    let mut clause = Vec::new();
    if collect_clause(expr, true, atom, &mut clause) {
        clause.sort();
        clause.dedup();
        if !clause.windows(2).any(|w| w[0] == !w[1]) {
            out.push(clause);
        }
        return;
    }
    let l = define(expr, alloc, atom, out);
    out.push(vec![l]);
}

/// Collects the literals of `expr` (under `positive` polarity) if it is a
/// plain disjunction; returns false otherwise.
fn collect_clause<F>(expr: &Expr, positive: bool, atom: &mut F, out: &mut Vec<Lit>) -> bool
where
    F: FnMut(ParamId, ValueId) -> Lit,
{
    match expr {
        Expr::Atom { param, value, equal } => {
            let l = atom(*param, *value);
            out.push(if *equal == positive { l } else { !l });
            true
        }
        Expr::Not(e) => collect_clause(e, !positive, atom, out),
        Expr::Or(a, b) if positive => {
            collect_clause(a, true, atom, out) && collect_clause(b, true, atom, out)
        }
        Expr::And(a, b) if !positive => {
            collect_clause(a, false, atom, out) && collect_clause(b, false, atom, out)
        }
        Expr::Implies(a, b) if positive => {
            collect_clause(a, false, atom, out) && collect_clause(b, true, atom, out)
        }
        _ => false,
    }
}

/// Returns a literal equivalent to `expr`, emitting its definition clauses.
pub fn define<A, F>(expr: &Expr, alloc: &mut A, atom: &mut F, out: &mut Vec<Clause>) -> Lit
where
    A: NewVar + ?Sized,
    F: FnMut(ParamId, ValueId) -> Lit,
{
    match expr {
        Expr::Atom { param, value, equal } => {
            let l = atom(*param, *value);
            if *equal {
                l
            } else {
                !l
            }
        }
        Expr::Not(e) => !define(e, alloc, atom, out),
        Expr::And(a, b) => {
            let la = define(a, alloc, atom, out);
            let lb = define(b, alloc, atom, out);
            let v = alloc.new_lit();
            out.push(vec![!v, la]);
            out.push(vec![!v, lb]);
            out.push(vec![v, !la, !lb]);
            v
        }
        Expr::Or(a, b) => {
            let la = define(a, alloc, atom, out);
            let lb = define(b, alloc, atom, out);
            or_gate(la, lb, alloc, out)
        }
        Expr::Implies(a, b) => {
            let la = define(a, alloc, atom, out);
            let lb = define(b, alloc, atom, out);
            or_gate(!la, lb, alloc, out)
        }
        Expr::Iff(a, b) => {
            let la = define(a, alloc, atom, out);
            let lb = define(b, alloc, atom, out);
            let v = alloc.new_lit();
            out.push(vec![!v, !la, lb]);
            out.push(vec![!v, la, !lb]);
            out.push(vec![v, la, lb]);
            out.push(vec![v, !la, !lb]);
            v
        }
    }
}

fn or_gate<A: NewVar + ?Sized>(la: Lit, lb: Lit, alloc: &mut A, out: &mut Vec<Clause>) -> Lit {
    let v = alloc.new_lit();
    out.push(vec![!v, la, lb]);
    out.push(vec![v, !la]);
    out.push(vec![v, !lb]);
    v
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use proptest::prelude::*;

    use super::*;
    use crate::cnf::tests_support::projected_models;
    use crate::cnf::{Var, VarAllocator};

    fn atom(p: usize, equal: bool) -> Expr {
        Expr::Atom { param: p, value: 0, equal }
    }

    fn eval(e: &Expr, bits: &[bool]) -> bool {
        match e {
            Expr::Atom { param, equal, .. } => bits[*param] == *equal,
            Expr::Not(a) => !eval(a, bits),
            Expr::And(a, b) => eval(a, bits) && eval(b, bits),
            Expr::Or(a, b) => eval(a, bits) || eval(b, bits),
            Expr::Implies(a, b) => !eval(a, bits) || eval(b, bits),
            Expr::Iff(a, b) => eval(a, bits) == eval(b, bits),
        }
    }

    /// Atoms over parameter `p` map to variable `p + 1`.
    fn check_equisat(e: &Expr, n_atoms: usize) {
        let mut alloc = VarAllocator::starting_after(n_atoms as u32);
        let mut map = |p: ParamId, _v: ValueId| Var::new(p as u32 + 1).pos();
        let cls = tseitin(e, &mut alloc, &mut map);
        let proj: Vec<Lit> = (0..n_atoms).map(|p| Var::new(p as u32 + 1).pos()).collect();
        let got = projected_models(&cls, alloc.num_vars(), &proj);
        let want: BTreeSet<Vec<bool>> = (0u32..(1 << n_atoms))
            .map(|bits| (0..n_atoms).map(|i| bits >> i & 1 == 1).collect::<Vec<bool>>())
            .filter(|row| eval(e, row))
            .collect();
        assert_eq!(got, want, "expr {e:?}");
    }

    #[test]
    fn atom_becomes_unit() {
        let mut alloc = VarAllocator::starting_after(1);
        let mut map = |_p: ParamId, _v: ValueId| Var::new(1).pos();
        let cls = tseitin(&atom(0, true), &mut alloc, &mut map);
        assert_eq!(cls, vec![vec![Var::new(1).pos()]]);
    }

    #[test]
    fn implication_has_seven_models() {
        // (a && b) -> !c
        let e = Expr::Implies(
            Box::new(Expr::And(Box::new(atom(0, true)), Box::new(atom(1, true)))),
            Box::new(Expr::Not(Box::new(atom(2, true)))),
        );
        check_equisat(&e, 3);
        let mut alloc = VarAllocator::starting_after(3);
        let mut map = |p: ParamId, _v: ValueId| Var::new(p as u32 + 1).pos();
        let cls = tseitin(&e, &mut alloc, &mut map);
        let proj: Vec<Lit> = (1..=3).map(|i| Var::new(i).pos()).collect();
        assert_eq!(projected_models(&cls, alloc.num_vars(), &proj).len(), 7);
    }

    #[test]
    fn iff_truth_table() {
        let e = Expr::Iff(Box::new(atom(0, true)), Box::new(atom(1, true)));
        check_equisat(&e, 2);
        let e = Expr::Not(Box::new(e));
        check_equisat(&e, 2);
    }

    fn arb_expr(n_atoms: usize) -> impl Strategy<Value = Expr> {
        let leaf = (0..n_atoms, any::<bool>()).prop_map(|(p, eq)| atom(p, eq));
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| Expr::Not(Box::new(a))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::And(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Or(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Implies(Box::new(a), Box::new(b))),
                (inner.clone(), inner).prop_map(|(a, b)| Expr::Iff(Box::new(a), Box::new(b))),
            ]
        })
    }

    proptest! {
        #[test]
        fn equisatisfiable_on_random_expressions(e in arb_expr(6)) {
            check_equisat(&e, 6);
        }

        #[test]
        fn size_linear_in_nodes(e in arb_expr(6)) {
            let mut alloc = VarAllocator::starting_after(6);
            let mut map = |p: ParamId, _v: ValueId| Var::new(p as u32 + 1).pos();
            let cls = tseitin(&e, &mut alloc, &mut map);
            let lits: usize = cls.iter().map(|c| c.len()).sum();
            prop_assert!(lits <= 12 * e.node_count());
        }
    }
}
