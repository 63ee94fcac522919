//! Exhaustive reference for the decision layer on small instances.
//!
//! Everything here is recomputed from the raw tables with its own loops:
//! no expected-utility matrix, argmax helper or filter from the engine is
//! reused, so agreement is evidence rather than tautology.

use serde::{Deserialize, Serialize};

use crate::error::{DecisionError, Result};
use crate::model::{DecisionProblem, TieBreak};

const TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleBounds {
    pub actions: usize,
    pub states: usize,
    pub vertices: usize,
    pub members: usize,
}

impl Default for OracleBounds {
    fn default() -> Self {
        Self { actions: 5, states: 4, vertices: 8, members: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleRecommendation {
    Act { action: usize },
    PresentSet { actions: Vec<usize> },
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    /// Maximal set over all actions (ε = 0).
    pub maximal: Vec<usize>,
    pub e_admissible: Vec<usize>,
    pub gamma_maximin: Vec<usize>,
    pub feasible: Vec<usize>,
    pub safe: Vec<usize>,
    /// Safe actions not ε-dominated at the problem's ε.
    pub undominated: Vec<usize>,
    /// Only for problems without information actions or tie-break.
    pub recommendation: Option<OracleRecommendation>,
}

/// table[v][m][a]
fn all_eu(p: &DecisionProblem) -> Vec<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    for b in &p.credal.vertices {
        let mut per_member = Vec::new();
        for m in &p.preferences.members {
            let mut row = Vec::new();
            for a in 0..p.actions.len() {
                let mut s = 0.0;
                for x in 0..p.states.len() {
                    s += b.probabilities[x] * m.table[a][x];
                }
                row.push(s);
            }
            per_member.push(row);
        }
        out.push(per_member);
    }
    out
}

fn dominates(eu: &[Vec<Vec<f64>>], a: usize, b: usize, eps: f64) -> bool {
    let mut never_worse = true;
    let mut max_gap = f64::NEG_INFINITY;
    for per_member in eu {
        for row in per_member {
            let g = row[a] - row[b];
            if g < -TOL {
                never_worse = false;
            }
            if g > max_gap {
                max_gap = g;
            }
        }
    }
    never_worse && max_gap > TOL && max_gap >= eps - TOL
}

fn undominated_among(eu: &[Vec<Vec<f64>>], pool: &[usize], eps: f64) -> Vec<usize> {
    let mut keep = Vec::new();
    for &b in pool {
        let mut beaten = false;
        for &a in pool {
            if a != b && dominates(eu, a, b, eps) {
                beaten = true;
            }
        }
        if !beaten {
            keep.push(b);
        }
    }
    keep
}

pub fn oracle_admissible(problem: &DecisionProblem) -> Result<OracleReport> {
    oracle_admissible_within(problem, OracleBounds::default())
}

pub fn oracle_admissible_within(problem: &DecisionProblem, bounds: OracleBounds) -> Result<OracleReport> {
    let n_a = problem.actions.len();
    let sizes = [
        ("actions", n_a, bounds.actions),
        ("states", problem.states.len(), bounds.states),
        ("vertices", problem.credal.len(), bounds.vertices),
        ("members", problem.preferences.len(), bounds.members),
    ];
    for (what, got, max) in sizes {
        if got > max {
            return Err(DecisionError::Refused(format!("oracle handles at most {max} {what}, got {got}")));
        }
        if got == 0 {
            return Err(DecisionError::InvalidInput(format!("problem has no {what}")));
        }
    }
    let eu = all_eu(problem);
    let everyone: Vec<usize> = (0..n_a).collect();

    let maximal = undominated_among(&eu, &everyone, 0.0);

    let mut e_admissible = Vec::new();
    for a in 0..n_a {
        let mut optimal_somewhere = false;
        for per_member in &eu {
            for row in per_member {
                let best = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if row[a] >= best - TOL {
                    optimal_somewhere = true;
                }
            }
        }
        if optimal_somewhere {
            e_admissible.push(a);
        }
    }

    let worst: Vec<f64> =
        (0..n_a).map(|a| eu.iter().flatten().map(|row| row[a]).fold(f64::INFINITY, f64::min)).collect();
    let top = worst.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let gamma_maximin = (0..n_a).filter(|&a| worst[a] >= top - TOL).collect();

    let feasible: Vec<usize> =
        (0..n_a).filter(|&a| problem.constraints.iter().all(|c| c.passes.get(a) == Some(&true))).collect();
    let safe: Vec<usize> = match &problem.safety {
        None => feasible.clone(),
        Some(s) => {
            let grade = |a: usize| s.grades[a].map(|g| g.0).unwrap_or(usize::MAX);
            match feasible.iter().map(|&a| grade(a)).min() {
                Some(g0) => feasible.iter().copied().filter(|&a| grade(a) == g0).collect(),
                None => Vec::new(),
            }
        }
    };
    let undominated = undominated_among(&eu, &safe, problem.epsilon);

    let recommendation = if !problem.info_actions.is_empty() || problem.tie_break != TieBreak::None {
        None
    } else if feasible.is_empty() {
        Some(OracleRecommendation::Infeasible)
    } else if undominated.len() == 1 {
        Some(OracleRecommendation::Act { action: undominated[0] })
    } else {
        Some(OracleRecommendation::PresentSet { actions: undominated.clone() })
    };

    Ok(OracleReport { maximal, e_admissible, gamma_maximin, feasible, safe, undominated, recommendation })
}
