use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ordinal_core::criteria::{
    additive_scores, e_admissible_over, gamma_maximin_over, minimax_regret_elicited, score_first_choice,
};
use ordinal_core::dominance::{undominated, Reason};
use ordinal_core::evaluation::{
    decision_curve, flip_rate, DecisionCurveRow, FlipRate, PerturbationFamily, PerturbationKind,
};
use ordinal_core::heuristics::{
    fft_decide_interval, fft_learn, AbstainPolicy, CueProfile, FrugalTree, LearnConfig, LearnedTree, Ordering,
};
use ordinal_core::pipeline::{
    apply_constraints, decision_gap, decision_margin_flip_probability, run_pipeline, DecisionGap, DecisionOutcome,
    Recommendation, Stage, VoiDecision,
};
use ordinal_core::scenario::{read_cohort, read_dataset, read_profiles, ScenarioFile, VIGNETTE_TOML};
use ordinal_core::{validate_problem, DecisionProblem, Violation};
use serde::Serialize;

use crate::report::{digest, RunReport};
use crate::{CliError, OrderingArg, Output, PerturbationArg, Rule, StraddlePolicy};

struct Input {
    text: String,
    name: String,
    digest: String,
}

fn read(path: &Path) -> Result<Input, CliError> {
    let bytes = std::fs::read(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    let digest = digest(&bytes);
    let text = String::from_utf8(bytes).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    let name = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
    Ok(Input { text, name, digest })
}

fn inputs(list: &[&Input]) -> BTreeMap<String, String> {
    list.iter().map(|i| (i.name.clone(), i.digest.clone())).collect()
}

fn finish<P: Serialize>(command: &str, ins: &[&Input], seed: Option<u64>, payload: P, text: String) -> Output {
    Output { text, json: RunReport::new(command, inputs(ins), seed, payload).to_json(), failed: false }
}

fn label(p: &DecisionProblem, a: usize) -> &str {
    &p.actions.actions[a].label
}

fn labels(p: &DecisionProblem, actions: &[usize]) -> String {
    actions.iter().map(|&a| label(p, a)).collect::<Vec<_>>().join(", ")
}

fn load_problem(input: &Input) -> Result<DecisionProblem, CliError> {
    Ok(ScenarioFile::parse(&input.text)?.to_problem()?)
}

fn ensure_valid(problem: &DecisionProblem) -> Result<(), CliError> {
    let report = validate_problem(problem);
    if report.passed() {
        return Ok(());
    }
    let lines: Vec<String> = report.violations.iter().map(|v| format!("  {}", v.message)).collect();
    Err(CliError::Invalid(format!("scenario is invalid:\n{}", lines.join("\n"))))
}

#[derive(Serialize)]
struct ValidatePayload {
    scenario: String,
    passed: bool,
    violations: Vec<Violation>,
}

pub fn validate(path: &Path) -> Result<Output, CliError> {
    let input = read(path)?;
    let problem = load_problem(&input)?;
    let report = validate_problem(&problem);
    let mut text = String::new();
    if report.passed() {
        let _ = writeln!(
            text,
            "ok: {} ({} states, {} actions, {} credal vertices, {} preference members)",
            problem.name,
            problem.states.len(),
            problem.actions.len(),
            problem.credal.len(),
            problem.preferences.len()
        );
    } else {
        let _ = writeln!(text, "invalid: {} violation(s)", report.violations.len());
        for v in &report.violations {
            let _ = writeln!(text, "  {}", v.message);
        }
    }
    let passed = report.passed();
    let payload = ValidatePayload { scenario: problem.name.clone(), passed, violations: report.violations };
    let mut out = finish("validate", &[&input], None, payload, text);
    out.failed = !passed;
    Ok(out)
}

fn render_reason(p: &DecisionProblem, reason: &Reason) -> String {
    match reason {
        Reason::Constraint { violated } => format!("fails {}", violated.join(", ")),
        Reason::SafetyGrade { grade, dominating_grade, by } => {
            let scale = p.safety.as_ref().expect("safety stage ran");
            format!("safety grade {} while {} is {}", scale.name(*grade), label(p, *by), scale.name(*dominating_grade))
        }
        Reason::Dominated { by, witness, epsilon } => format!(
            "dominated by {} (margin >= {epsilon} under belief '{}', preference '{}')",
            label(p, *by),
            p.credal.vertices[witness.vertex].id,
            p.preferences.members[witness.member].id
        ),
    }
}

fn render_outcome(p: &DecisionProblem, out: &DecisionOutcome, text: &mut String) {
    let _ = writeln!(text, "scenario: {} (epsilon {})", p.name, p.epsilon);
    for (stage, trace) in [("feasibility", &out.feasibility), ("safety", &out.safety), ("dominance", &out.dominance)] {
        if trace.eliminated.is_empty() {
            let _ = writeln!(text, "{stage}: no eliminations");
        }
        for e in &trace.eliminated {
            let _ = writeln!(text, "{stage}: removed {} ({})", label(p, e.action), render_reason(p, &e.reason));
        }
    }
    if !out.classes.classes.is_empty() {
        let classes: Vec<String> = out.classes.classes.iter().map(|c| format!("{{{}}}", labels(p, c))).collect();
        let _ = writeln!(text, "epsilon classes: {}", classes.join(" "));
    }
    if let Some(voi) = &out.voi {
        for c in &voi.candidates {
            let _ = writeln!(
                text,
                "information: {} expected reduction {:.3}, cost {}, impact {:.3}",
                c.id, c.expected_reduction, c.cost, c.impact
            );
        }
        if voi.decision == VoiDecision::Finalize && !voi.candidates.is_empty() {
            let _ = writeln!(text, "information: no test is worth its cost");
        }
    }
    match &out.recommendation {
        Recommendation::Act { action, basis } => {
            let _ = writeln!(text, "recommendation: act on {} ({basis:?})", label(p, *action));
        }
        Recommendation::RequestInfo { info_action, expected_impact } => {
            let _ = writeln!(
                text,
                "recommendation: request {} first (expected impact {expected_impact:.3})",
                p.info_actions[*info_action].id
            );
        }
        Recommendation::PresentSet { actions, note } => {
            let _ = writeln!(text, "recommendation: present {{{}}}", labels(p, actions));
            let _ = writeln!(text, "  {}", note.summary);
            for m in &note.by_member {
                let _ = writeln!(text, "  {} could prefer: {}", m.member, labels(p, &m.favoured));
            }
        }
        Recommendation::Infeasible => {
            let _ = writeln!(text, "recommendation: no feasible action");
        }
    }
}

#[derive(Serialize)]
struct RuleChoice {
    actions: Vec<String>,
    indices: Vec<usize>,
    value: Option<f64>,
}

#[derive(Serialize)]
struct DecidePayload {
    scenario: String,
    rule: String,
    epsilon: f64,
    action_ids: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    outcome: Option<DecisionOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gap: Option<DecisionGap>,
    #[serde(skip_serializing_if = "Option::is_none")]
    choice: Option<RuleChoice>,
}

fn rule_name(rule: Rule) -> &'static str {
    match rule {
        Rule::Pipeline => "pipeline",
        Rule::Maximality => "maximality",
        Rule::EAdmissible => "e-admissible",
        Rule::GammaMaximin => "gamma-maximin",
        Rule::MinimaxRegret => "minimax-regret",
    }
}

pub fn decide(path: &Path, rule: Rule, epsilon: Option<f64>) -> Result<Output, CliError> {
    let input = read(path)?;
    let mut problem = load_problem(&input)?;
    if let Some(e) = epsilon {
        problem.epsilon = e;
    }
    ensure_valid(&problem)?;

    let mut payload = DecidePayload {
        scenario: problem.name.clone(),
        rule: rule_name(rule).into(),
        epsilon: problem.epsilon,
        action_ids: problem.actions.ids(&problem.all_actions()),
        outcome: None,
        gap: None,
        choice: None,
    };
    let mut text = String::new();

    if rule == Rule::Pipeline {
        let out = run_pipeline(&problem);
        render_outcome(&problem, &out, &mut text);
        let gap = decision_gap(&problem, 0, 0)?;
        if gap.nominal_best.is_some() {
            let _ = writeln!(
                text,
                "decision gap: [{:.3}, {:.3}]{}",
                gap.lower,
                gap.upper,
                if gap.fragile { " (fragile: the nominal choice can be overturned)" } else { "" }
            );
        }
        payload.outcome = Some(out);
        payload.gap = Some(gap);
    } else {
        let feasible = apply_constraints(&problem).survivors;
        let eu = ordinal_core::EuMatrix::new(&problem);
        let (indices, value) = if feasible.is_empty() {
            (Vec::new(), None)
        } else {
            match rule {
                Rule::Maximality => (undominated(&eu, &feasible, problem.epsilon).survivors, None),
                Rule::EAdmissible => (e_admissible_over(&eu, &feasible)?, None),
                Rule::GammaMaximin => {
                    let c = gamma_maximin_over(&eu, &feasible)?;
                    (c.actions, Some(c.value))
                }
                Rule::MinimaxRegret => {
                    let c = minimax_regret_elicited(&feasible, &problem)?;
                    (c.actions, Some(c.value))
                }
                Rule::Pipeline => unreachable!(),
            }
        };
        let _ = writeln!(text, "scenario: {} (epsilon {})", problem.name, problem.epsilon);
        let _ = writeln!(text, "rule: {} over feasible actions {{{}}}", rule_name(rule), labels(&problem, &feasible));
        if indices.is_empty() {
            let _ = writeln!(text, "result: no feasible action");
        } else {
            let _ = writeln!(text, "result: {{{}}}", labels(&problem, &indices));
        }
        if let Some(v) = value {
            let _ = writeln!(text, "criterion value: {v:.6}");
        }
        payload.choice = Some(RuleChoice { actions: problem.actions.ids(&indices), indices, value });
    }
    Ok(finish("decide", &[&input], None, payload, text))
}

#[derive(Serialize)]
struct FftRow {
    line: usize,
    decision: Option<u8>,
    exit_level: usize,
    label: Option<u8>,
}

#[derive(Serialize)]
struct DecideFftPayload {
    rows: Vec<FftRow>,
    positive: usize,
    negative: usize,
    abstained: usize,
    /// Accuracy over decided rows, when labels are present.
    accuracy: Option<f64>,
}

/// Reorders table columns to the tree's cue order by name.
fn align(tree: &FrugalTree, names: &[String], profile: CueProfile) -> Result<CueProfile, CliError> {
    if tree.cue_names.is_empty() {
        return Ok(profile);
    }
    tree.cue_names
        .iter()
        .map(|n| {
            names
                .iter()
                .position(|c| c == n)
                .map(|j| profile.0[j])
                .ok_or_else(|| CliError::Parse(format!("cue table has no column '{n}'")))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(CueProfile)
}

pub fn decide_fft(tree_path: &Path, path: &Path, straddle: StraddlePolicy) -> Result<Output, CliError> {
    let tree_input = read(tree_path)?;
    let input = read(path)?;
    let tree: FrugalTree =
        serde_json::from_str(&tree_input.text).map_err(|e| CliError::Parse(format!("{}: {e}", tree_path.display())))?;
    tree.validate()?;
    let table = read_profiles(&input.text)?;
    let policy = match straddle {
        StraddlePolicy::Abstain => AbstainPolicy::Abstain,
        StraddlePolicy::Positive => AbstainPolicy::Fallback(true),
        StraddlePolicy::Negative => AbstainPolicy::Fallback(false),
    };

    let mut rows = Vec::with_capacity(table.profiles.len());
    let mut text = String::from("line  decision  exit\n");
    for (i, profile) in table.profiles.into_iter().enumerate() {
        let line = i + 2;
        let profile = align(&tree, &table.names, profile)?;
        let out =
            fft_decide_interval(&tree, &profile, policy).map_err(|e| CliError::Invalid(format!("line {line}: {e}")))?;
        let shown = out.decision.map_or("abstain".to_string(), |d| u8::from(d).to_string());
        let _ = writeln!(text, "{line:>4}  {shown:>8}  {:>4}", out.exit_level);
        rows.push(FftRow {
            line,
            decision: out.decision.map(u8::from),
            exit_level: out.exit_level,
            label: table.labels.as_ref().map(|l| u8::from(l[i])),
        });
    }
    let positive = rows.iter().filter(|r| r.decision == Some(1)).count();
    let negative = rows.iter().filter(|r| r.decision == Some(0)).count();
    let abstained = rows.len() - positive - negative;
    let accuracy = table.labels.as_ref().map(|_| {
        let decided: Vec<&FftRow> = rows.iter().filter(|r| r.decision.is_some()).collect();
        let correct = decided.iter().filter(|r| r.decision == r.label).count();
        correct as f64 / decided.len().max(1) as f64
    });
    let _ = writeln!(text, "positive {positive}, negative {negative}, abstained {abstained}");
    if let Some(a) = accuracy {
        let _ = writeln!(text, "accuracy on decided rows: {a:.4}");
    }
    let payload = DecideFftPayload { rows, positive, negative, abstained, accuracy };
    Ok(finish("decide-fft", &[&tree_input, &input], None, payload, text))
}

#[derive(Serialize)]
struct LearnPayload {
    learned: LearnedTree,
    accuracy: f64,
    tree_file: Option<String>,
}

pub fn learn_fft(
    path: &Path,
    depth: usize,
    ordering: OrderingArg,
    conditional: bool,
    tree_out: Option<&Path>,
) -> Result<Output, CliError> {
    let input = read(path)?;
    let data = read_dataset(&input.text)?;
    let ordering = match ordering {
        OrderingArg::Validity => Ordering::Validity,
        OrderingArg::Accuracy => Ordering::Accuracy,
    };
    let learned = fft_learn(&data, LearnConfig { max_depth: depth, ordering, conditional })?;
    let mut text = learned.tree.describe();
    let c = learned.confusion;
    let accuracy = c.accuracy();
    let _ = writeln!(text, "training: tp {} fp {} tn {} fn {}  accuracy {accuracy:.4}", c.tp, c.fp, c.tn, c.fn_);
    if learned.degenerate {
        eprintln!("warning: the dataset has a single class; the tree is degenerate");
        let _ = writeln!(text, "warning: single-class dataset, degenerate tree");
    }
    let tree_file = match tree_out {
        Some(out) => {
            let json = serde_json::to_string_pretty(&learned.tree).expect("trees serialize") + "\n";
            std::fs::write(out, json).map_err(|source| CliError::Io { path: PathBuf::from(out), source })?;
            let _ = writeln!(text, "tree written to {}", out.display());
            Some(out.file_name().map_or_else(|| out.display().to_string(), |n| n.to_string_lossy().into_owned()))
        }
        None => None,
    };
    Ok(finish("learn-fft", &[&input], None, LearnPayload { learned, accuracy, tree_file }, text))
}

#[derive(Serialize)]
struct FlipRow {
    p_star: f64,
    #[serde(flatten)]
    estimate: FlipRate,
    /// Mean of `Φ(-|p - p*| / σ)` over the cohort, for gaussian noise.
    closed_form: Option<f64>,
}

#[derive(Serialize)]
struct EvaluatePayload {
    cases: usize,
    prevalence: f64,
    perturbation: PerturbationKind,
    draws: usize,
    curve: Vec<DecisionCurveRow>,
    flip_rates: Vec<FlipRow>,
}

pub fn evaluate(
    path: &Path,
    thresholds: &[f64],
    perturbation: PerturbationArg,
    sigma: f64,
    p: f64,
    draws: usize,
    seed: u64,
) -> Result<Output, CliError> {
    let input = read(path)?;
    let cohort = read_cohort(&input.text)?;
    let curve = decision_curve(&cohort, thresholds)?;
    let kind = match perturbation {
        PerturbationArg::Gaussian => PerturbationKind::GaussianNoise { sigma: vec![sigma] },
        PerturbationArg::Missingness => PerturbationKind::Missingness { p },
        PerturbationArg::Flip => PerturbationKind::CueFlip { p },
    };
    let family = PerturbationFamily { kind: kind.clone(), draws, seed };
    let cases: Vec<Vec<Option<f64>>> = cohort.probabilities.iter().map(|&p| vec![Some(p)]).collect();

    let mut flip_rates = Vec::with_capacity(thresholds.len());
    for (k, &p_star) in thresholds.iter().enumerate() {
        let policy = |obs: &[Option<f64>]| obs[0].is_some_and(|v| v > p_star);
        // Distinct stream family per threshold.
        let fam = PerturbationFamily { seed: seed.wrapping_add(k as u64), ..family.clone() };
        let estimate = flip_rate(policy, &cases, &fam)?;
        let closed_form = match perturbation {
            PerturbationArg::Gaussian if sigma > 0.0 => {
                let total: f64 = cohort
                    .probabilities
                    .iter()
                    .map(|&q| decision_margin_flip_probability((q - p_star).abs(), sigma))
                    .sum::<Result<f64, _>>()?;
                Some(total / cohort.len() as f64)
            }
            PerturbationArg::Gaussian => Some(0.0),
            _ => None,
        };
        flip_rates.push(FlipRow { p_star, estimate, closed_form });
    }

    let mut text = format!("cases {}, prevalence {:.4}\n", cohort.len(), cohort.prevalence());
    text.push_str("p_star   model      treat_all  treat_none  flip_rate (se)\n");
    for (row, flip) in curve.iter().zip(&flip_rates) {
        let _ = writeln!(
            text,
            "{:<7.3}  {:>9.5}  {:>9.5}  {:>10.5}  {:.4} ({:.4})",
            row.p_star, row.model, row.treat_all, row.treat_none, flip.estimate.rate, flip.estimate.standard_error
        );
    }
    let payload = EvaluatePayload {
        cases: cohort.len(),
        prevalence: cohort.prevalence(),
        perturbation: kind,
        draws,
        curve,
        flip_rates,
    };
    Ok(finish("evaluate", &[&input], Some(seed), payload, text))
}

#[derive(Serialize)]
struct VignettePayload {
    outcome: DecisionOutcome,
    stages: BTreeMap<String, Option<Stage>>,
    survivors: Vec<String>,
    score_first: ScoreFirstSummary,
}

#[derive(Serialize)]
struct ScoreFirstSummary {
    scores: BTreeMap<String, f64>,
    choice: String,
    /// Probability that noise reverses the MTX vs CSA score gap.
    mtx_csa_flip_probability: Option<f64>,
}

pub fn vignette() -> Result<Output, CliError> {
    let input = Input {
        text: VIGNETTE_TOML.to_string(),
        name: "psoriasis.toml".into(),
        digest: digest(VIGNETTE_TOML.as_bytes()),
    };
    let scenario = ScenarioFile::parse(&input.text)?;
    let problem = scenario.to_problem()?;
    ensure_valid(&problem)?;
    let out = run_pipeline(&problem);

    let mut text = String::new();
    render_outcome(&problem, &out, &mut text);

    let sf =
        scenario.score_first.as_ref().ok_or_else(|| CliError::Parse("vignette lacks score-first weights".into()))?;
    let scores = additive_scores(&problem.actions, &sf.weights)?;
    let choice = score_first_choice(&problem.actions, &sf.weights)?;
    let (mtx, csa) = (problem.actions.index_of("mtx"), problem.actions.index_of("csa"));
    let flip = match (mtx, csa, sf.noise_sigma) {
        (Some(m), Some(c), Some(sigma)) => {
            Some(decision_margin_flip_probability((scores[m] - scores[c]).abs(), sigma)?)
        }
        _ => None,
    };
    let _ = writeln!(text, "score-first baseline picks {} (score {:.4})", label(&problem, choice), scores[choice]);
    if let Some(f) = flip {
        let _ = writeln!(text, "score-first MTX vs CSA ordering flips with probability {f:.4} under score noise");
    }

    let stages =
        problem.actions.actions.iter().enumerate().map(|(a, act)| (act.id.clone(), out.elimination_stage(a))).collect();
    let payload = VignettePayload {
        survivors: problem.actions.ids(out.undominated_set()),
        stages,
        score_first: ScoreFirstSummary {
            scores: problem.actions.actions.iter().map(|a| a.id.clone()).zip(scores.iter().copied()).collect(),
            choice: problem.actions.id(choice).to_string(),
            mtx_csa_flip_probability: flip,
        },
        outcome: out,
    };
    Ok(finish("vignette", &[&input], None, payload, text))
}
