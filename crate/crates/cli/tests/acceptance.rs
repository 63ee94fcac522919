//! Acceptance suite. Each criterion runs independently and prints one
//! `PASS` or `FAIL` line; the target exits nonzero if any criterion fails.
//! Runs without the libtest harness so the lines are never captured.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use ordinal_core::criteria::{additive_scores, e_admissible_set, gamma_maximin, score_first_choice};
use ordinal_core::dominance::{epsilon_dominates, maximal_set, robust_dominates, verdict, Relation};
use ordinal_core::evaluation::{
    decision_curve, flip_rate, oracle_admissible, ClassifiedCohort, OracleRecommendation, PerturbationFamily,
    PerturbationKind,
};
use ordinal_core::heuristics::{
    fft_decide, fft_decide_interval, fft_from_sprt, sprt_truncated, ttb_decide, ttb_matches_llr, AbstainPolicy,
    CueProfile, CueValue, Direction, ExitSide, FrugalNode, FrugalTree, LlrModel, SprtVerdict, TtbChoice,
};
use ordinal_core::pipeline::{decision_margin_flip_probability, run_pipeline, Recommendation, Stage};
use ordinal_core::scenario::{read_cohort, ScenarioFile};
use ordinal_core::{expected_utility, Constraint, DecisionProblem, EuMatrix, SafetyGrade, SafetyGrading};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:?}, limit {limit:?}"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn simplex<R: Rng>(r: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -(1.0 - r.random::<f64>()).ln()).collect();
    let sum: f64 = raw.iter().sum();
    raw.iter().map(|x| x / sum).collect()
}

/// Up to 5 actions, 4 states, `max_v` vertices and `max_m` members, with
/// continuous utilities.
fn instance<R: Rng>(r: &mut R, max_v: usize, max_m: usize) -> DecisionProblem {
    let (n_a, n_x) = (r.random_range(1..=5), r.random_range(1..=4));
    let (n_v, n_m) = (r.random_range(1..=max_v), r.random_range(1..=max_m));
    let members =
        (0..n_m).map(|_| (0..n_a).map(|_| (0..n_x).map(|_| r.random_range(0.0..10.0)).collect()).collect()).collect();
    let vertices = (0..n_v).map(|_| simplex(r, n_x)).collect();
    DecisionProblem::from_tables(members, vertices)
}

fn decorated<R: Rng>(r: &mut R) -> DecisionProblem {
    let mut p = instance(r, 8, 4);
    let n_a = p.actions.len();
    for k in 0..r.random_range(0..=2) {
        p.constraints
            .push(Constraint { name: format!("c{k}"), passes: (0..n_a).map(|_| r.random_bool(0.8)).collect() });
    }
    if r.random_bool(0.5) {
        p.safety = Some(SafetyGrading {
            scale: vec!["low".into(), "moderate".into(), "high".into()],
            grades: (0..n_a).map(|_| Some(SafetyGrade(r.random_range(0..3)))).collect(),
        });
    }
    p.epsilon = if r.random_bool(0.5) { 0.0 } else { r.random_range(0.0..1.5) };
    p
}

fn oracle_kind(rec: &Recommendation) -> Option<OracleRecommendation> {
    match rec {
        Recommendation::Act { action, .. } => Some(OracleRecommendation::Act { action: *action }),
        Recommendation::PresentSet { actions, .. } => {
            Some(OracleRecommendation::PresentSet { actions: actions.clone() })
        }
        Recommendation::Infeasible => Some(OracleRecommendation::Infeasible),
        Recommendation::RequestInfo { .. } => None,
    }
}

fn random_tree<R: Rng>(r: &mut R) -> (FrugalTree, usize) {
    let depth = r.random_range(1..=5);
    let n = depth + r.random_range(1..=6);
    let levels = (0..depth)
        .map(|_| FrugalNode {
            cue: r.random_range(0..n),
            direction: if r.random_bool(0.5) { Direction::Above } else { Direction::Below },
            threshold: r.random_range(0.0..1.0),
            exit_side: if r.random_bool(0.5) { ExitSide::Positive } else { ExitSide::Negative },
            exit_decision: r.random_bool(0.5),
        })
        .collect();
    (FrugalTree { cue_names: vec![], levels, final_other: r.random_bool(0.5) }, n)
}

fn c1_vignette() -> Check {
    let start = Instant::now();
    let s = ScenarioFile::vignette();
    let p = s.to_problem().map_err(|e| e.to_string())?;
    let out = run_pipeline(&p);
    let idx = |id: &str| p.actions.index_of(id).unwrap();
    ensure(out.elimination_stage(idx("biologic")) == Some(Stage::Feasibility), || {
        "Biologic not removed at feasibility".into()
    })?;
    ensure(out.elimination_stage(idx("mtx")) == Some(Stage::Safety), || "MTX not removed at safety".into())?;
    let allowed = ["csa", "acitretin", "apremilast"].map(idx);
    let recommended = match &out.recommendation {
        Recommendation::Act { action, .. } => vec![*action],
        Recommendation::PresentSet { actions, .. } => actions.clone(),
        other => return Err(format!("unexpected recommendation {other:?}")),
    };
    ensure(recommended.iter().all(|a| allowed.contains(a)), || format!("recommended {recommended:?}"))?;
    let weights = &s.score_first.as_ref().ok_or("no score-first weights")?.weights;
    let choice = score_first_choice(&p.actions, weights).map_err(|e| e.to_string())?;
    let scores = additive_scores(&p.actions, weights).map_err(|e| e.to_string())?;
    ensure(choice == idx("biologic"), || format!("score-first picked {}", p.actions.id(choice)))?;
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("present {:?}; score-first picks biologic ({:.4})", p.actions.ids(&recommended), scores[choice]))
}

fn c2_oracle() -> Check {
    let start = Instant::now();
    let mut r = rng(2);
    let n = 1000;
    for case in 0..n {
        let p = decorated(&mut r);
        let o = oracle_admissible(&p).map_err(|e| e.to_string())?;
        let all = p.all_actions();
        let fail = |what: &str| format!("case {case}: {what} differs");
        ensure(maximal_set(&p).survivors == o.maximal, || fail("maximal set"))?;
        ensure(e_admissible_set(&all, &p).map_err(|e| e.to_string())? == o.e_admissible, || fail("E-admissible set"))?;
        ensure(gamma_maximin(&all, &p).map_err(|e| e.to_string())?.actions == o.gamma_maximin, || fail("Γ-maximin"))?;
        let out = run_pipeline(&p);
        ensure(out.feasible_set() == o.feasible, || fail("feasible stage"))?;
        ensure(out.safe_set() == o.safe, || fail("safety stage"))?;
        ensure(out.undominated_set() == o.undominated, || fail("dominance stage"))?;
        ensure(oracle_kind(&out.recommendation) == o.recommendation, || fail("recommendation"))?;
    }
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!("{n} instances match"))
}

fn c3_reductions() -> Check {
    let mut r = rng(3);
    let n = 500;
    for case in 0..n {
        let p = decorated(&mut r);
        for a in 0..p.actions.len() {
            for b in 0..p.actions.len() {
                let robust = robust_dominates(a, b, &p).relation == Relation::Dominates;
                ensure(epsilon_dominates(a, b, &p, 0.0) == robust, || {
                    format!("case {case}: ε=0 differs for ({a}, {b})")
                })?;
            }
        }
    }
    for case in 0..n {
        let p = instance(&mut r, 1, 1);
        let eu: Vec<f64> = (0..p.actions.len())
            .map(|a| expected_utility(a, &p.credal.vertices[0], &p.preferences.members[0]))
            .collect();
        let best = eu.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let argmax: Vec<usize> = (0..eu.len()).filter(|&a| eu[a] >= best - 1e-9).collect();
        let all = p.all_actions();
        let fail = |what: &str| format!("singleton case {case}: {what} is not argmax EU");
        ensure(gamma_maximin(&all, &p).map_err(|e| e.to_string())?.actions == argmax, || fail("Γ-maximin"))?;
        ensure(e_admissible_set(&all, &p).map_err(|e| e.to_string())? == argmax, || fail("E-admissible set"))?;
        let piped = match run_pipeline(&p).recommendation {
            Recommendation::Act { action, .. } => vec![action],
            Recommendation::PresentSet { actions, .. } => actions,
            _ => vec![],
        };
        ensure(piped == argmax, || fail("pipeline"))?;
    }
    for case in 0..n {
        let (tree, m) = random_tree(&mut r);
        let values: Vec<f64> = (0..m).map(|_| r.random_range(0.0..1.0)).collect();
        let point = fft_decide(&tree, &CueProfile::from_reals(&values)).map_err(|e| e.to_string())?;
        let degenerate = CueProfile(values.iter().map(|&v| CueValue::Interval { lo: v, hi: v }).collect());
        let interval = fft_decide_interval(&tree, &degenerate, AbstainPolicy::Abstain).map_err(|e| e.to_string())?;
        ensure(interval.decision == Some(point.decision) && interval.exit_level == point.exit_level, || {
            format!("tree case {case}: degenerate interval differs")
        })?;
    }
    Ok(format!("{n} instances per identity, no mismatches"))
}

fn c4_flip_probability() -> Check {
    let start = Instant::now();
    let p_star = 0.4;
    let pairs = [
        (0.0, 0.05),
        (0.0, 0.3),
        (0.01, 0.05),
        (0.02, 0.1),
        (0.05, 0.05),
        (0.05, 0.2),
        (0.1, 0.08),
        (0.1, 0.3),
        (0.15, 0.1),
        (0.2, 0.25),
        (0.3, 0.15),
    ];
    let mut worst: f64 = 0.0;
    for (k, &(delta, sigma)) in pairs.iter().enumerate() {
        let policy = move |obs: &[Option<f64>]| obs[0].is_some_and(|v| v > p_star);
        let family = PerturbationFamily {
            kind: PerturbationKind::GaussianNoise { sigma: vec![sigma] },
            draws: 10_000,
            seed: 40 + k as u64,
        };
        let est = flip_rate(policy, &[vec![Some(p_star + delta)]], &family).map_err(|e| e.to_string())?;
        let exact = decision_margin_flip_probability(delta, sigma).map_err(|e| e.to_string())?;
        if delta == 0.0 {
            ensure((exact - 0.5).abs() < 1e-12, || format!("Φ(0) = {exact}"))?;
        }
        let z = (est.rate - exact).abs() / est.standard_error;
        worst = worst.max(z);
        ensure(z <= 3.0, || format!("Δ={delta}, σ={sigma}: {:.4} vs {exact:.4} ({z:.2} SE)", est.rate))?;
    }
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!("{} pairs, worst deviation {worst:.2} SE", pairs.len()))
}

fn c5_net_benefit() -> Check {
    let load = |name: &str| -> Result<ClassifiedCohort, String> {
        let text = std::fs::read_to_string(fixture(name)).map_err(|e| e.to_string())?;
        read_cohort(&text).map_err(|e| e.to_string())
    };
    let grid: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
    for name in ["cohort.csv", "perfect_cohort.csv"] {
        let cohort = load(name)?;
        for row in decision_curve(&cohort, &grid).map_err(|e| e.to_string())? {
            ensure(row.treat_none == 0.0, || format!("{name}: treat-none {} at {}", row.treat_none, row.p_star))?;
        }
        let prev = cohort.prevalence();
        let at_prev = decision_curve(&cohort, &[prev]).map_err(|e| e.to_string())?;
        ensure(at_prev[0].treat_all.abs() < 1e-12, || {
            format!("{name}: treat-all {} at prevalence", at_prev[0].treat_all)
        })?;
    }
    let perfect = load("perfect_cohort.csv")?;
    let lowest_positive = perfect
        .probabilities
        .iter()
        .zip(&perfect.labels)
        .filter(|(_, &y)| y)
        .map(|(&p, _)| p)
        .fold(f64::INFINITY, f64::min);
    let below: Vec<f64> = grid.iter().copied().filter(|&t| t < lowest_positive).collect();
    for row in decision_curve(&perfect, &below).map_err(|e| e.to_string())? {
        ensure((row.model - perfect.prevalence()).abs() < 1e-12, || {
            format!("perfect NB {} at {}", row.model, row.p_star)
        })?;
    }
    Ok("treat-none, perfect classifier and treat-all identities exact to 1e-12".into())
}

fn c6_non_compensation() -> Check {
    let mut r = rng(6);
    let n = 10_000;
    for case in 0..n {
        let (tree, m) = random_tree(&mut r);
        let values: Vec<f64> = (0..m).map(|_| r.random_range(0.0..1.0)).collect();
        let profile = CueProfile::from_reals(&values);
        let out = fft_decide(&tree, &profile).map_err(|e| e.to_string())?;
        let read: Vec<usize> = tree.levels[..out.exit_level].iter().map(|l| l.cue).collect();
        let mut mutated = profile.clone();
        for j in (0..m).filter(|j| !read.contains(j)) {
            mutated.0[j] = CueValue::Real(r.random_range(-5.0..5.0));
        }
        ensure(fft_decide(&tree, &mutated).map_err(|e| e.to_string())? == out, || format!("tree case {case} changed"))?;

        let k = r.random_range(1..=10);
        let mut order: Vec<usize> = (0..k).collect();
        order.shuffle(&mut r);
        let a: Vec<bool> = (0..k).map(|_| r.random_bool(0.5)).collect();
        let b: Vec<bool> = (0..k).map(|_| r.random_bool(0.5)).collect();
        let (pa, pb) = (CueProfile::from_bits(&a), CueProfile::from_bits(&b));
        let ttb = ttb_decide(&pa, &pb, &order).map_err(|e| e.to_string())?;
        if ttb.choice != TtbChoice::NoDecision {
            let stop = ttb.stop.unwrap_or(k);
            let (mut qa, mut qb) = (pa.clone(), pb.clone());
            for &j in &order[stop..] {
                qa.0[j] = CueValue::Binary(r.random_bool(0.5));
                qb.0[j] = CueValue::Binary(r.random_bool(0.5));
            }
            ensure(ttb_decide(&qa, &qb, &order).map_err(|e| e.to_string())? == ttb, || {
                format!("TTB case {case} changed")
            })?;
        }
    }
    Ok(format!("{n} triples each for trees and Take-The-Best"))
}

fn c7_lexicographic_linear() -> Check {
    let start = Instant::now();
    let mut r = rng(7);
    let mut models = 0;
    for m in 1..=10 {
        for _ in 0..4 {
            let mut mags = vec![0.0; m];
            let mut tail = 0.0;
            for k in (0..m).rev() {
                mags[k] = tail + r.random_range(0.01..2.0);
                tail += mags[k];
            }
            let mut llr: Vec<[f64; 2]> = mags
                .iter()
                .map(|&w| {
                    let w = if r.random_bool(0.5) { w } else { -w };
                    let base = r.random_range(-1.0..1.0);
                    [base, base + w]
                })
                .collect();
            llr.shuffle(&mut r);
            let model = LlrModel::new(llr, 0.0, 0.0).map_err(|e| e.to_string())?;
            let out = ttb_matches_llr(&model, &model.validity_order()).map_err(|e| e.to_string())?;
            ensure(out.matches, || format!("{m}-cue dominant model mismatched: {:?}", out.counterexample))?;
            models += 1;
        }
    }
    let compensatory = LlrModel::new(vec![[0.0, 1.0], [0.0, 0.7], [0.0, 0.6]], 0.0, 0.0).map_err(|e| e.to_string())?;
    let out = ttb_matches_llr(&compensatory, &compensatory.validity_order()).map_err(|e| e.to_string())?;
    ensure(!out.matches && out.counterexample.is_some(), || "compensatory model matched".into())?;
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!("{models} dominant models match; compensatory model yields a counterexample"))
}

fn c8_sprt() -> Check {
    let mut r = rng(8);
    let mut sequences = 0u64;
    for depth in 1..=6 {
        for _ in 0..100 {
            let upper = r.random_range(0.5..3.0);
            let lower = -r.random_range(0.5..3.0);
            let mut s = 0.0;
            let mut contrib = Vec::with_capacity(depth);
            for k in 0..depth {
                let cont = r.random_range((lower - s) * 0.95..(upper - s) * 0.95);
                let exit = if r.random_bool(0.5) {
                    upper - s + r.random_range(0.0..2.0)
                } else {
                    lower - s - r.random_range(0.0..2.0)
                };
                let pair = if k + 1 == depth {
                    [r.random_range(-3.0..3.0), r.random_range(-3.0..3.0)]
                } else if r.random_bool(0.5) {
                    [cont, exit]
                } else {
                    [exit, cont]
                };
                s += cont;
                contrib.push(pair);
            }
            let tree = fft_from_sprt(&contrib, upper, lower).map_err(|e| e.to_string())?;
            for code in 0..(1u32 << depth) {
                let bits: Vec<bool> = (0..depth).map(|j| code >> j & 1 == 1).collect();
                let seq: Vec<f64> = bits.iter().enumerate().map(|(j, &b)| contrib[j][b as usize]).collect();
                let sprt = sprt_truncated(&seq, upper, lower, depth).map_err(|e| e.to_string())?;
                let fft = fft_decide(&tree, &CueProfile::from_bits(&bits)).map_err(|e| e.to_string())?;
                ensure(fft.decision == (sprt.verdict == SprtVerdict::H1) && Some(fft.exit_level) == sprt.stop, || {
                    format!("depth {depth}: sequence {bits:?} disagrees")
                })?;
                sequences += 1;
            }
        }
    }
    Ok(format!("{sequences} binary sequences across depths 1 to 6 agree"))
}

fn c9_monotonicity() -> Check {
    let deltas: Vec<f64> = (0..40).map(|i| i as f64 * 0.025).collect();
    let sigmas: Vec<f64> = (1..40).map(|i| i as f64 * 0.025).collect();
    let f = |d: f64, s: f64| decision_margin_flip_probability(d, s).map_err(|e| e.to_string());
    for &s in &sigmas {
        for w in deltas.windows(2) {
            ensure(f(w[1], s)? <= f(w[0], s)?, || format!("not decreasing in Δ at σ={s}"))?;
        }
    }
    for &d in &deltas {
        for w in sigmas.windows(2) {
            ensure(f(d, w[1])? >= f(d, w[0])?, || format!("not increasing in σ at Δ={d}"))?;
        }
    }
    let mut r = rng(9);
    let n = 500;
    for case in 0..n {
        let p = decorated(&mut r);
        let q = p.rescaled(r.random_range(0.1..20.0), r.random_range(-50.0..50.0));
        let (ep, eq) = (EuMatrix::new(&p), EuMatrix::new(&q));
        for a in 0..p.actions.len() {
            for b in 0..p.actions.len() {
                ensure(verdict(&ep, a, b, p.epsilon).relation == verdict(&eq, a, b, q.epsilon).relation, || {
                    format!("case {case}: verdict ({a}, {b}) changed under rescaling")
                })?;
            }
        }
        ensure(run_pipeline(&p).recommendation == run_pipeline(&q).recommendation, || {
            format!("case {case}: recommendation changed under rescaling")
        })?;
        let o = oracle_admissible(&p).map_err(|e| e.to_string())?;
        ensure(o.e_admissible.iter().all(|a| o.maximal.contains(a)), || {
            format!("case {case}: E-admissible ⊄ maximal")
        })?;
    }
    Ok(format!("flip probability monotone on a grid; {n} instances invariant and E-admissible ⊆ maximal"))
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_ordinal")).args(args).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn without_timestamp(report: &[u8]) -> String {
    String::from_utf8_lossy(report)
        .lines()
        .filter(|l| !l.trim_start().starts_with("\"generated_at\""))
        .collect::<Vec<_>>()
        .join("\n")
}

fn c10_determinism() -> Check {
    let dir = std::env::temp_dir().join(format!("ordinal-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let tree = dir.join("tree.json");
    let tree = tree.to_str().unwrap();
    let f = |name: &str| fixture(name).to_str().unwrap().to_string();
    let vignette = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/scenarios/psoriasis.toml");
    let vignette = vignette.to_str().unwrap();
    let one = f("one_member.toml");
    let (sep, profiles, cohort) = (f("separable.csv"), f("profiles.csv"), f("cohort.csv"));
    let runs: Vec<Vec<&str>> = vec![
        vec!["validate", "--input", vignette],
        vec!["decide", "--input", vignette],
        vec!["decide", "--input", vignette, "--rule", "maximality", "--epsilon", "0"],
        vec!["decide", "--input", vignette, "--rule", "e-admissible"],
        vec!["decide", "--input", vignette, "--rule", "gamma-maximin"],
        vec!["decide", "--input", &one, "--rule", "minimax-regret"],
        vec!["learn-fft", "--input", &sep, "--tree-out", tree],
        vec!["decide-fft", "--tree", tree, "--input", &profiles],
        vec!["evaluate", "--input", &cohort, "--seed", "17", "--draws", "500"],
        vec!["evaluate", "--input", &cohort, "--perturbation", "missingness", "--seed", "3", "--draws", "200"],
        vec!["evaluate", "--input", &cohort, "--perturbation", "flip", "--seed", "3", "--draws", "200"],
        vec!["vignette"],
    ];
    for args in &runs {
        let mut full = vec!["--format", "structured"];
        full.extend_from_slice(args);
        let first = without_timestamp(&run_cli(&full)?);
        let second = without_timestamp(&run_cli(&full)?);
        ensure(first == second, || format!("{} reports differ between runs", args[0]))?;
    }
    std::fs::remove_dir_all(&dir).map_err(|e| e.to_string())?;
    Ok(format!("{} invocations across all six subcommands reproduce byte for byte", runs.len()))
}

fn main() -> std::process::ExitCode {
    let criteria: [Criterion; 10] = [
        ("vignette reproduction", c1_vignette),
        ("oracle equivalence", c2_oracle),
        ("reduction identities", c3_reductions),
        ("flip-probability closed form", c4_flip_probability),
        ("net benefit identities", c5_net_benefit),
        ("non-compensation invariance", c6_non_compensation),
        ("lexicographic equals linear", c7_lexicographic_linear),
        ("SPRT and tree agreement", c8_sprt),
        ("monotonicity and invariance", c9_monotonicity),
        ("determinism", c10_determinism),
    ];
    let mut failed = Vec::new();
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS criterion {:>2} {name}: {detail}", k + 1),
            Err(why) => {
                println!("FAIL criterion {:>2} {name}: {why}", k + 1);
                failed.push(k + 1);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
        std::process::ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::ExitCode::FAILURE
    }
}
