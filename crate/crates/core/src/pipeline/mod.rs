//! The staged decision layer: hard constraints, safety-lexicographic
//! screening, robust ε-dominance, ε-indifference classes and selective
//! refinement (information requests, controlled tie-breaking, or a
//! set-valued answer).
//!
//! Each stage only removes actions. Once an action is eliminated nothing
//! consumed by a later stage can bring it back.

mod fragility;
mod voi;

pub use fragility::{
    decision_gap, decision_margin_flip_probability, flip_probability_general_cdf, threshold_interval_overlap,
    DecisionGap, ErrorCdf, ProbInterval, ThresholdVerdict,
};
pub use voi::{voi_gate, FindingImpact, VoiAssessment, VoiCandidate, VoiDecision};

use serde::{Deserialize, Serialize};

use crate::criteria::{e_admissible_over, gamma_maximin_over, minimax_regret};
use crate::dominance::{epsilon_classes_over, undominated, Elimination, EpsilonClasses, FilterTrace, Reason};
use crate::error::{DecisionError, Result};
use crate::model::{DecisionProblem, EuMatrix, SafetyGrade, TieBreak};

/// Removes actions failing any hard constraint. An empty survivor set is a
/// legitimate (infeasible) outcome, not a fault.
pub fn apply_constraints(problem: &DecisionProblem) -> FilterTrace {
    let mut trace = FilterTrace::default();
    for a in 0..problem.actions.len() {
        let violated: Vec<String> = problem
            .constraints
            .iter()
            .filter(|c| !c.passes.get(a).copied().unwrap_or(false))
            .map(|c| c.name.clone())
            .collect();
        if violated.is_empty() {
            trace.survivors.push(a);
        } else {
            trace.eliminated.push(Elimination { action: a, reason: Reason::Constraint { violated } });
        }
    }
    trace
}

/// Keeps only the actions in the safest grade present among `actions`;
/// `grades` is indexed by action. Convenience never compensates for a
/// worse safety class.
pub fn safety_lexicographic_filter(actions: &[usize], grades: &[Option<SafetyGrade>]) -> Result<FilterTrace> {
    let mut graded = Vec::with_capacity(actions.len());
    for &a in actions {
        match grades.get(a).copied().flatten() {
            Some(g) => graded.push((a, g)),
            None => return Err(DecisionError::InvalidInput(format!("action #{a} has no safety grade"))),
        }
    }
    let Some(&(best_action, best)) = graded.iter().min_by_key(|(_, g)| *g) else {
        return Ok(FilterTrace::default());
    };
    let mut trace = FilterTrace::default();
    for (a, g) in graded {
        if g == best {
            trace.survivors.push(a);
        } else {
            trace.eliminated.push(Elimination {
                action: a,
                reason: Reason::SafetyGrade { grade: g, dominating_grade: best, by: best_action },
            });
        }
    }
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActBasis {
    /// Exactly one action survived dominance filtering.
    SoleSurvivor,
    /// One ε-class survived and the designated tie-break picked a unique member.
    TieBreak(TieBreak),
}

/// Which survivors each preference member could rank first, so a
/// set-valued answer can say which value dimension separates them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberFavour {
    pub member: String,
    pub favoured: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferenceNote {
    pub summary: String,
    pub by_member: Vec<MemberFavour>,
    /// True when members disagree about which survivors could be best.
    pub preference_sensitive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Recommendation {
    Act { action: usize, basis: ActBasis },
    RequestInfo { info_action: usize, expected_impact: f64 },
    PresentSet { actions: Vec<usize>, note: PreferenceNote },
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionOutcome {
    pub feasibility: FilterTrace,
    pub safety: FilterTrace,
    pub dominance: FilterTrace,
    pub classes: EpsilonClasses,
    pub voi: Option<VoiAssessment>,
    pub recommendation: Recommendation,
}

impl DecisionOutcome {
    /// 𝒜₀: actions passing every hard constraint.
    pub fn feasible_set(&self) -> &[usize] {
        &self.feasibility.survivors
    }

    /// Feasible actions in the safest grade present.
    pub fn safe_set(&self) -> &[usize] {
        &self.safety.survivors
    }

    /// 𝒜₁: safe actions not ε-dominated by another safe action.
    pub fn undominated_set(&self) -> &[usize] {
        &self.dominance.survivors
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self.recommendation, Recommendation::Infeasible)
    }

    /// The stage at which `action` was removed, if any.
    pub fn elimination_stage(&self, action: usize) -> Option<Stage> {
        [(Stage::Feasibility, &self.feasibility), (Stage::Safety, &self.safety), (Stage::Dominance, &self.dominance)]
            .into_iter()
            .find(|(_, t)| t.is_eliminated(action))
            .map(|(s, _)| s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Feasibility,
    Safety,
    Dominance,
}

/// For every preference member, the survivors that are expected-utility
/// optimal under at least one credal vertex.
pub fn preference_note(
    problem: &DecisionProblem,
    eu: &EuMatrix,
    survivors: &[usize],
    summary: String,
) -> PreferenceNote {
    let by_member: Vec<MemberFavour> = problem
        .preferences
        .members
        .iter()
        .enumerate()
        .map(|(m, model)| {
            let mut favoured = vec![false; problem.actions.len()];
            for (s, scen) in eu.scenarios().iter().enumerate() {
                if scen.member != m || survivors.is_empty() {
                    continue;
                }
                let best = survivors.iter().map(|&a| eu.eu(s, a)).fold(f64::NEG_INFINITY, f64::max);
                for &a in survivors {
                    if eu.eu(s, a) >= best - crate::model::TOLERANCE {
                        favoured[a] = true;
                    }
                }
            }
            MemberFavour {
                member: if model.id.is_empty() { format!("#{m}") } else { model.id.clone() },
                favoured: survivors.iter().copied().filter(|&a| favoured[a]).collect(),
            }
        })
        .collect();
    let preference_sensitive = by_member.windows(2).any(|w| w[0].favoured != w[1].favoured);
    PreferenceNote { summary, by_member, preference_sensitive }
}

fn tie_break(problem: &DecisionProblem, eu: &EuMatrix, class: &[usize]) -> (Option<usize>, String) {
    match problem.tie_break {
        TieBreak::None => (None, "indistinguishable within epsilon".into()),
        TieBreak::GammaMaximin => match gamma_maximin_over(eu, class) {
            Ok(c) if c.actions.len() == 1 => (Some(c.actions[0]), String::new()),
            _ => (None, "indistinguishable within epsilon; gamma-maximin tie".into()),
        },
        TieBreak::MinimaxRegret if problem.preferences.len() != 1 => (
            None,
            "indistinguishable within epsilon; minimax-regret tie-break needs a single elicited preference member"
                .into(),
        ),
        TieBreak::MinimaxRegret => match minimax_regret(class, problem, 0) {
            Ok(c) if c.actions.len() == 1 => (Some(c.actions[0]), String::new()),
            _ => (None, "indistinguishable within epsilon; minimax-regret tie".into()),
        },
    }
}

/// Runs every stage on a validated problem.
pub fn run_pipeline(problem: &DecisionProblem) -> DecisionOutcome {
    let eu = EuMatrix::new(problem);
    let feasibility = apply_constraints(problem);
    if feasibility.survivors.is_empty() {
        return DecisionOutcome {
            feasibility,
            safety: FilterTrace::default(),
            dominance: FilterTrace::default(),
            classes: EpsilonClasses::default(),
            voi: None,
            recommendation: Recommendation::Infeasible,
        };
    }

    let safety = match &problem.safety {
        Some(grading) => safety_lexicographic_filter(&feasibility.survivors, &grading.grades)
            .expect("validated problem grades every action"),
        None => FilterTrace::identity(&feasibility.survivors),
    };
    let dominance = undominated(&eu, &safety.survivors, problem.epsilon);
    let survivors = dominance.survivors.clone();
    let classes = epsilon_classes_over(&eu, &survivors, problem.epsilon);

    let mut voi = None;
    let recommendation = if survivors.len() == 1 {
        Recommendation::Act { action: survivors[0], basis: ActBasis::SoleSurvivor }
    } else if classes.classes.len() == 1 {
        match tie_break(problem, &eu, &survivors) {
            (Some(action), _) => Recommendation::Act { action, basis: ActBasis::TieBreak(problem.tie_break) },
            (None, summary) => Recommendation::PresentSet {
                note: preference_note(problem, &eu, &survivors, summary),
                actions: survivors.clone(),
            },
        }
    } else {
        let assessment = voi_gate(problem, &survivors, &problem.info_actions);
        let rec = match assessment.decision {
            VoiDecision::Request { info_action } => {
                Recommendation::RequestInfo { info_action, expected_impact: assessment.candidates[info_action].impact }
            }
            VoiDecision::Finalize => {
                let note = preference_note(problem, &eu, &survivors, String::new());
                let summary = if note.preference_sensitive {
                    "admissible set; preference members disagree on which action is best".into()
                } else {
                    "admissible set; remaining ambiguity is in beliefs, not preferences".into()
                };
                Recommendation::PresentSet { actions: survivors.clone(), note: PreferenceNote { summary, ..note } }
            }
        };
        voi = Some(assessment);
        rec
    };

    DecisionOutcome { feasibility, safety, dominance, classes, voi, recommendation }
}

/// The E-admissible subset of the pipeline survivors, for reporting.
pub fn admissible_survivors(problem: &DecisionProblem, outcome: &DecisionOutcome) -> Vec<usize> {
    if outcome.undominated_set().is_empty() {
        return Vec::new();
    }
    e_admissible_over(&EuMatrix::new(problem), outcome.undominated_set()).unwrap_or_default()
}
