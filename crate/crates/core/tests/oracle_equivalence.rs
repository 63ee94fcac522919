mod common;

use common::{decorate, random_problem, rng};
use ordinal_core::criteria::{e_admissible_set, gamma_maximin};
use ordinal_core::dominance::maximal_set;
use ordinal_core::evaluation::{oracle_admissible, OracleRecommendation};
use ordinal_core::pipeline::{run_pipeline, Recommendation};

fn pipeline_kind(rec: &Recommendation) -> OracleRecommendation {
    match rec {
        Recommendation::Act { action, .. } => OracleRecommendation::Act { action: *action },
        Recommendation::PresentSet { actions, .. } => OracleRecommendation::PresentSet { actions: actions.clone() },
        Recommendation::Infeasible => OracleRecommendation::Infeasible,
        Recommendation::RequestInfo { .. } => panic!("no information actions in these instances"),
    }
}

#[test]
fn engine_matches_brute_force_on_random_instances() {
    let mut r = rng(20_240_601);
    let (mut pruned, mut acted, mut sets, mut infeasible) = (0, 0, 0, 0);
    for case in 0..1500 {
        let base = random_problem(&mut r, 8, 4);
        let p = decorate(&mut r, base);
        let o = oracle_admissible(&p).unwrap();
        let all = p.all_actions();
        assert_eq!(maximal_set(&p).survivors, o.maximal, "case {case}");
        assert_eq!(e_admissible_set(&all, &p).unwrap(), o.e_admissible, "case {case}");
        assert_eq!(gamma_maximin(&all, &p).unwrap().actions, o.gamma_maximin, "case {case}");
        let out = run_pipeline(&p);
        assert_eq!(out.feasible_set(), o.feasible, "case {case}");
        assert_eq!(out.safe_set(), o.safe, "case {case}");
        assert_eq!(out.undominated_set(), o.undominated, "case {case}");
        assert_eq!(Some(pipeline_kind(&out.recommendation)), o.recommendation, "case {case}");
        pruned += usize::from(o.maximal.len() < all.len());
        match o.recommendation {
            Some(OracleRecommendation::Act { .. }) => acted += 1,
            Some(OracleRecommendation::PresentSet { .. }) => sets += 1,
            _ => infeasible += 1,
        }
        for a in &o.e_admissible {
            assert!(o.maximal.contains(a), "case {case}: E-admissible action {a} not maximal");
        }
    }
    // The generator must exercise every branch, not just trivial instances.
    assert!(pruned > 300 && acted > 100 && sets > 100 && infeasible > 5, "{pruned} {acted} {sets} {infeasible}");
}
