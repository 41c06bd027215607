mod common;

use ctmax::encode::{
    apply_symmetry, build_can_wcnf, build_combined_wcnf, build_mcac, build_mcac_scoped, build_ratio, build_tn_wcnf,
    decode_tests, EncodingVariant, TupleScope, WeightScheme,
};
use ctmax::opt::{linear_maxsat, wpm1_stratified, Budget};
use ctmax::sat::Engine;
use ctmax::sut::SutModel;
use ctmax::tuples::{build_catalog, dummy_test, lower_bound};
use ctmax::verify::verify_suite;

fn solve(w: &ctmax::cnf::Wcnf) -> ctmax::opt::MaxSatResult {
    linear_maxsat(w, &Budget::unlimited(), 0).unwrap()
}

fn sat(cnf: &ctmax::cnf::Cnf) -> bool {
    let mut e = Engine::new();
    e.ensure_vars(cnf.num_vars);
    e.add_clauses(&cnf.clauses) && e.solve(&[]).unwrap().is_sat()
}

#[test]
fn variants_agree_on_satisfiability_near_the_bound() {
    for cm in common::corpus(12) {
        let cat = build_catalog(&cm.model, 2).unwrap();
        let lb = lower_bound(&cat).lb;
        for n in lb.max(1)..=lb + 3 {
            for variant in EncodingVariant::ALL {
                let ctx = build_mcac(&cm.model, &cat, n, variant).unwrap();
                assert_eq!(sat(&ctx.sat_cnf()), n >= cm.can, "{} N={n} {variant}", cm.name);
            }
        }
    }
}

#[test]
fn symmetry_keeps_satisfiability() {
    for cm in common::corpus(12) {
        let cat = build_catalog(&cm.model, 2).unwrap();
        let low = lower_bound(&cat);
        for n in [cm.can - 1, cm.can] {
            if n < low.witness.len() {
                continue;
            }
            let mut ctx = build_mcac(&cm.model, &cat, n, EncodingVariant::CcxA0).unwrap();
            apply_symmetry(&mut ctx, &cat, &low.witness).unwrap();
            assert_eq!(sat(&ctx.sat_cnf()), n >= cm.can, "{} N={n}", cm.name);
        }
    }
}

#[test]
fn tuple_number_over_all_tuples_pays_for_every_forbidden_one() {
    let m = common::autonomous();
    let cat = build_catalog(&m, 2).unwrap();
    let forbidden = cat.forbidden_ids().len() as u64;
    for n in 1..=3 {
        let mut a = build_mcac_scoped(&m, &cat, n, EncodingVariant::CcxA2, TupleScope::Allowed).unwrap();
        let mut b = build_mcac_scoped(&m, &cat, n, EncodingVariant::CcxA2, TupleScope::All).unwrap();
        let ca = solve(&build_tn_wcnf(&mut a).unwrap()).cost;
        let cb = solve(&build_tn_wcnf(&mut b).unwrap()).cost;
        assert_eq!(cb, ca + forbidden, "N={n}");
    }
}

#[test]
fn dummy_test_does_not_change_the_optimum() {
    for cm in common::corpus(10) {
        let cat = build_catalog(&cm.model, 2).unwrap();
        let low = lower_bound(&cat);
        let dummy = dummy_test(&cm.model, 0).unwrap();
        let mut costs = Vec::new();
        for nux in [None, Some(&dummy)] {
            let mut ctx = build_mcac(&cm.model, &cat, cm.can + 2, EncodingVariant::CcxA1).unwrap();
            ctx.set_lb(low.lb);
            let r = solve(&build_can_wcnf(&mut ctx, WeightScheme::Linear, nux).unwrap());
            assert_eq!(decode_tests(&ctx, r.model.as_ref().unwrap()).unwrap().len(), cm.can);
            costs.push(r.cost);
        }
        assert_eq!(costs[0], costs[1], "{}", cm.name);
    }
}

#[test]
fn combined_problem_prefers_coverage_then_size() {
    for (sizes, n, cost) in [(&[2, 2, 2][..], 6, 0), (&[2, 2, 2, 2][..], 8, 1)] {
        let m = SutModel::from_profile(sizes);
        let cat = build_catalog(&m, 2).unwrap();
        let mut ctx = build_mcac(&m, &cat, n, EncodingVariant::CcxA0).unwrap();
        ctx.set_lb(lower_bound(&cat).lb);
        let w = build_combined_wcnf(&mut ctx, WeightScheme::Unit).unwrap();
        let r = solve(&w);
        assert_eq!(r.cost, cost, "{sizes:?}");
        let suite = decode_tests(&ctx, r.model.as_ref().unwrap()).unwrap();
        assert!(verify_suite(&m, &cat, &suite).is_covering_array());
    }
}

#[test]
fn ratio_problem_takes_the_fewest_tests_meeting_the_ratio() {
    let m = SutModel::from_profile(&[2, 2, 2]);
    let cat = build_catalog(&m, 2).unwrap();
    for (rt, want) in [(0.5, 2), (1.0, 4), (0.01, 1)] {
        for variant in [EncodingVariant::Cx, EncodingVariant::CcxA0] {
            let mut ctx = build_mcac(&m, &cat, 6, variant).unwrap();
            let w = build_ratio(&mut ctx, rt).unwrap();
            let r = wpm1_stratified(&w, &Budget::unlimited(), 0).unwrap();
            let suite = decode_tests(&ctx, r.model.as_ref().unwrap()).unwrap();
            assert_eq!(suite.len(), want, "rt={rt} {variant}");
            assert_eq!(r.cost, want as u64 - 1);
            let rep = verify_suite(&m, &cat, &suite);
            assert!(rep.covered.len() as f64 >= 12.0 * rt);
        }
    }
}

#[test]
fn every_can_model_decodes_to_a_covering_array() {
    let m = common::load("storage2.sut");
    let cat = build_catalog(&m, 2).unwrap();
    let low = lower_bound(&cat);
    for variant in EncodingVariant::ALL {
        let mut ctx = build_mcac(&m, &cat, 20, variant).unwrap();
        ctx.set_lb(low.lb);
        apply_symmetry(&mut ctx, &cat, &low.witness).unwrap();
        let w = build_can_wcnf(&mut ctx, WeightScheme::Exponential, None).unwrap();
        let r = solve(&w);
        assert_eq!(r.cost, 0, "{variant}");
        let suite = decode_tests(&ctx, r.model.as_ref().unwrap()).unwrap();
        assert_eq!(suite.len(), 18);
        assert!(verify_suite(&m, &cat, &suite).is_covering_array());
    }
}
