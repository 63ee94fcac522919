//! Single-step value-of-information gate.
//!
//! Impact of an information action is the expected number of survivors it
//! removes, credited at `impact_weight` utiles per action, minus its cost.
//! Each finding restricts the credal set to its retained vertices and the
//! dominance stage is re-run on the current survivors. Finding
//! probabilities are the mean of the vertex-conditional likelihoods.

use serde::{Deserialize, Serialize};

use crate::dominance::undominated;
use crate::model::{DecisionProblem, EuMatrix, InformationAction, TOLERANCE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FindingImpact {
    pub label: String,
    pub probability: f64,
    pub survivors_after: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoiCandidate {
    pub id: String,
    pub cost: f64,
    pub expected_reduction: f64,
    /// `impact_weight * expected_reduction - cost`.
    pub impact: f64,
    pub findings: Vec<FindingImpact>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "decision", rename_all = "snake_case")]
pub enum VoiDecision {
    Request { info_action: usize },
    Finalize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoiAssessment {
    pub candidates: Vec<VoiCandidate>,
    pub decision: VoiDecision,
}

fn assess(problem: &DecisionProblem, survivors: &[usize], u: &InformationAction) -> VoiCandidate {
    let n_vertices = problem.credal.len().max(1) as f64;
    let mut expected_reduction = 0.0;
    let findings = u
        .findings
        .iter()
        .map(|f| {
            let probability = f.likelihood.iter().sum::<f64>() / n_vertices;
            let restricted = EuMatrix::over_vertices(problem, &f.retained_vertices);
            let after = undominated(&restricted, survivors, problem.epsilon).survivors;
            expected_reduction += probability * (survivors.len() - after.len()) as f64;
            FindingImpact { label: f.label.clone(), probability, survivors_after: after }
        })
        .collect();
    VoiCandidate {
        id: u.id.clone(),
        cost: u.cost,
        expected_reduction,
        impact: problem.impact_weight * expected_reduction - u.cost,
        findings,
    }
}

/// Requests the information action with the largest positive impact (the
/// first one on ties), or finalizes when none has positive impact.
pub fn voi_gate(problem: &DecisionProblem, survivors: &[usize], info_actions: &[InformationAction]) -> VoiAssessment {
    if survivors.len() <= 1 {
        return VoiAssessment { candidates: Vec::new(), decision: VoiDecision::Finalize };
    }
    let candidates: Vec<VoiCandidate> = info_actions.iter().map(|u| assess(problem, survivors, u)).collect();
    let best = candidates.iter().enumerate().fold(None, |best: Option<(usize, f64)>, (i, c)| match best {
        Some((_, b)) if b >= c.impact => best,
        _ => Some((i, c.impact)),
    });
    let decision = match best {
        Some((info_action, impact)) if impact > TOLERANCE => VoiDecision::Request { info_action },
        _ => VoiDecision::Finalize,
    };
    VoiAssessment { candidates, decision }
}
