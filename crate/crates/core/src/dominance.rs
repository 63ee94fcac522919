//! Pareto dominance, robust dominance over `credal × preference` scenarios,
//! ε-dominance, maximality and ε-indifference classes.

use serde::{Deserialize, Serialize};

use crate::error::{DecisionError, Result};
use crate::model::{DecisionProblem, EuMatrix, SafetyGrade, Scenario, TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Minimize,
    Maximize,
}

fn check_lengths(y: &[f64], y_prime: &[f64], sense: &[Sense]) -> Result<()> {
    for len in [y_prime.len(), sense.len()] {
        if len != y.len() {
            return Err(DecisionError::LengthMismatch { expected: y.len(), actual: len });
        }
    }
    Ok(())
}

/// `y` Pareto-dominates `y_prime`: weakly better on every objective and
/// strictly better on at least one.
pub fn pareto_dominates(y: &[f64], y_prime: &[f64], sense: &[Sense]) -> Result<bool> {
    let zeros = vec![0.0; y.len()];
    pareto_dominates_by(y, y_prime, sense, &zeros)
}

/// Pareto dominance with a per-objective margin: weakly better everywhere
/// and better by at least `margin[j]` (and strictly) on some objective `j`.
/// A zero margin reduces to [`pareto_dominates`].
pub fn pareto_dominates_by(y: &[f64], y_prime: &[f64], sense: &[Sense], margin: &[f64]) -> Result<bool> {
    check_lengths(y, y_prime, sense)?;
    if margin.len() != y.len() {
        return Err(DecisionError::LengthMismatch { expected: y.len(), actual: margin.len() });
    }
    if margin.iter().any(|m| !(*m >= 0.0)) {
        return Err(DecisionError::InvalidInput("margins must be >= 0".into()));
    }
    let mut strict = false;
    for j in 0..y.len() {
        let advantage = match sense[j] {
            Sense::Minimize => y_prime[j] - y[j],
            Sense::Maximize => y[j] - y_prime[j],
        };
        if advantage < 0.0 {
            return Ok(false);
        }
        if advantage > 0.0 && advantage >= margin[j] {
            strict = true;
        }
    }
    Ok(strict)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Dominates,
    DominatedBy,
    Incomparable,
    EpsilonIndifferent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominanceVerdict {
    pub relation: Relation,
    /// Scenario with the largest strict gap, present iff the relation is
    /// `Dominates` or `DominatedBy`.
    pub witness: Option<Scenario>,
}

/// Why an action was removed at some stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum Reason {
    Constraint { violated: Vec<String> },
    SafetyGrade { grade: SafetyGrade, dominating_grade: SafetyGrade, by: usize },
    Dominated { by: usize, witness: Scenario, epsilon: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Elimination {
    pub action: usize,
    pub reason: Reason,
}

/// Result of one set-reduction stage: `eliminated ∪ survivors` is the input
/// set and the two are disjoint.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FilterTrace {
    pub eliminated: Vec<Elimination>,
    pub survivors: Vec<usize>,
}

impl FilterTrace {
    pub fn identity(actions: &[usize]) -> Self {
        Self { eliminated: Vec::new(), survivors: actions.to_vec() }
    }

    pub fn is_eliminated(&self, action: usize) -> bool {
        self.eliminated.iter().any(|e| e.action == action)
    }
}

/// `Some(witness)` iff `a` ε-dominates `b` over the matrix: no scenario
/// favours `b` beyond tolerance and some scenario favours `a` by at least
/// `epsilon` (and strictly).
pub fn epsilon_dominance_witness(eu: &EuMatrix, a: usize, b: usize, epsilon: f64) -> Option<Scenario> {
    let mut best: Option<(usize, f64)> = None;
    for (s, gap) in eu.gaps(a, b).enumerate() {
        if gap < -TOLERANCE {
            return None;
        }
        if best.is_none_or(|(_, g)| gap > g) {
            best = Some((s, gap));
        }
    }
    let (s, gap) = best?;
    (gap > TOLERANCE && gap >= epsilon - TOLERANCE).then(|| eu.scenarios()[s])
}

/// ε-aware pairwise verdict. `EpsilonIndifferent` is reported only for
/// `epsilon > 0` when every gap is within `epsilon` and neither side
/// ε-dominates.
pub fn verdict(eu: &EuMatrix, a: usize, b: usize, epsilon: f64) -> DominanceVerdict {
    if let Some(w) = epsilon_dominance_witness(eu, a, b, epsilon) {
        return DominanceVerdict { relation: Relation::Dominates, witness: Some(w) };
    }
    if let Some(w) = epsilon_dominance_witness(eu, b, a, epsilon) {
        return DominanceVerdict { relation: Relation::DominatedBy, witness: Some(w) };
    }
    let relation = if epsilon > 0.0 && eu.gaps(a, b).all(|g| g.abs() <= epsilon + TOLERANCE) {
        Relation::EpsilonIndifferent
    } else {
        Relation::Incomparable
    };
    DominanceVerdict { relation, witness: None }
}

/// Robust dominance of `a` over `a_prime` across every (vertex, member) pair.
pub fn robust_dominates(a: usize, a_prime: usize, problem: &DecisionProblem) -> DominanceVerdict {
    verdict(&EuMatrix::new(problem), a, a_prime, 0.0)
}

pub fn epsilon_dominates(a: usize, a_prime: usize, problem: &DecisionProblem, epsilon: f64) -> bool {
    epsilon_dominance_witness(&EuMatrix::new(problem), a, a_prime, epsilon).is_some()
}

/// Removes every action in `actions` that is ε-dominated by another member
/// of `actions`. All pairwise verdicts are taken on the full input set, so
/// the result does not depend on elimination order. The first dominator in
/// input order is recorded.
pub fn undominated(eu: &EuMatrix, actions: &[usize], epsilon: f64) -> FilterTrace {
    let mut trace = FilterTrace::default();
    for &b in actions {
        let dominator = actions
            .iter()
            .filter(|&&a| a != b)
            .find_map(|&a| epsilon_dominance_witness(eu, a, b, epsilon).map(|w| (a, w)));
        match dominator {
            Some((by, witness)) => {
                trace.eliminated.push(Elimination { action: b, reason: Reason::Dominated { by, witness, epsilon } })
            }
            None => trace.survivors.push(b),
        }
    }
    trace
}

/// Actions of the problem not robustly dominated by any other action.
pub fn maximal_set(problem: &DecisionProblem) -> FilterTrace {
    undominated(&EuMatrix::new(problem), &problem.all_actions(), 0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairGap {
    pub a: usize,
    pub b: usize,
    /// `max |EU(a) - EU(b)|` over all scenarios.
    pub max_abs_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EpsilonClasses {
    pub classes: Vec<Vec<usize>>,
    pub gaps: Vec<PairGap>,
}

/// Partitions `actions` into connected components of the relation
/// "`|EU(a) - EU(b)| <= epsilon` under every scenario". Classes are ordered
/// by their first member in input order.
pub fn epsilon_classes_over(eu: &EuMatrix, actions: &[usize], epsilon: f64) -> EpsilonClasses {
    let n = actions.len();
    let mut gaps = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    let mut adjacent = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let max_abs_gap = eu.gaps(actions[i], actions[j]).map(f64::abs).fold(0.0, f64::max);
            gaps.push(PairGap { a: actions[i], b: actions[j], max_abs_gap });
            let linked = max_abs_gap <= epsilon + TOLERANCE;
            adjacent[i][j] = linked;
            adjacent[j][i] = linked;
        }
    }

    let mut component = vec![usize::MAX; n];
    let mut classes = Vec::new();
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        let id = classes.len();
        let mut members = vec![start];
        component[start] = id;
        let mut frontier = vec![start];
        while let Some(i) = frontier.pop() {
            for j in 0..n {
                if adjacent[i][j] && component[j] == usize::MAX {
                    component[j] = id;
                    members.push(j);
                    frontier.push(j);
                }
            }
        }
        members.sort_unstable();
        classes.push(members.into_iter().map(|i| actions[i]).collect());
    }
    EpsilonClasses { classes, gaps }
}

pub fn epsilon_classes(actions: &[usize], problem: &DecisionProblem, epsilon: f64) -> EpsilonClasses {
    epsilon_classes_over(&EuMatrix::new(problem), actions, epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Sense::*;

    #[test]
    fn pareto_examples() {
        assert!(pareto_dominates(&[1.0, 2.0], &[2.0, 3.0], &[Minimize, Minimize]).unwrap());
        assert!(!pareto_dominates(&[1.0, 2.0], &[1.0, 2.0], &[Minimize, Minimize]).unwrap());
        assert!(!pareto_dominates(&[1.0, 3.0], &[2.0, 2.0], &[Minimize, Minimize]).unwrap());
        assert!(!pareto_dominates(&[2.0, 3.0], &[1.0, 3.0], &[Minimize, Minimize]).unwrap());
        assert!(pareto_dominates(&[2.0, 3.0], &[1.0, 3.0], &[Maximize, Maximize]).unwrap());
    }

    #[test]
    fn pareto_length_mismatch_is_a_fault() {
        assert!(matches!(
            pareto_dominates(&[1.0], &[1.0, 2.0], &[Minimize]),
            Err(DecisionError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn pareto_margin() {
        let s = [Minimize, Minimize];
        assert!(!pareto_dominates_by(&[1.0, 2.0], &[1.05, 2.0], &s, &[0.1, 0.1]).unwrap());
        assert!(pareto_dominates_by(&[1.0, 2.0], &[1.2, 2.0], &s, &[0.1, 0.1]).unwrap());
    }

    #[test]
    fn pointwise_dominance_implies_robust_dominance() {
        let p = DecisionProblem::from_tables(
            vec![vec![vec![2.0, 3.0], vec![1.0, 2.0]], vec![vec![5.0, 0.5], vec![4.0, 0.0]]],
            vec![vec![0.9, 0.1], vec![0.2, 0.8], vec![0.5, 0.5]],
        );
        assert_eq!(robust_dominates(0, 1, &p).relation, Relation::Dominates);
        assert_eq!(robust_dominates(1, 0, &p).relation, Relation::DominatedBy);
    }

    #[test]
    fn identical_rows_are_incomparable() {
        let p = DecisionProblem::from_tables(vec![vec![vec![1.0, 2.0], vec![1.0, 2.0]]], vec![vec![0.3, 0.7]]);
        let v = robust_dominates(0, 1, &p);
        assert_eq!(v.relation, Relation::Incomparable);
        assert!(v.witness.is_none());
    }

    #[test]
    fn witness_is_the_strict_vertex() {
        // Vertex 0 gives EU (0.6, 0.5); vertex 1 gives (0.5, 0.5).
        let p = DecisionProblem::from_tables(
            vec![vec![vec![0.7, 0.5], vec![0.5, 0.5]]],
            vec![vec![0.5, 0.5], vec![0.0, 1.0]],
        );
        let v = robust_dominates(0, 1, &p);
        assert_eq!(v.relation, Relation::Dominates);
        assert_eq!(v.witness, Some(Scenario { vertex: 0, member: 0 }));
    }

    #[test]
    fn epsilon_dominance_examples() {
        // Gaps over the two vertices: 0.05 and 0.0.
        let p = DecisionProblem::from_tables(
            vec![vec![vec![0.55, 0.5], vec![0.5, 0.5]]],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        );
        assert!(!epsilon_dominates(0, 1, &p, 0.1));
        assert!(epsilon_dominates(0, 1, &p, 0.05));
        assert_eq!(epsilon_dominates(0, 1, &p, 0.0), robust_dominates(0, 1, &p).relation == Relation::Dominates);

        let uniform = DecisionProblem::from_tables(
            vec![vec![vec![1.0, 1.0], vec![0.8, 0.8]]],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        );
        assert!(epsilon_dominates(0, 1, &uniform, 0.2));
    }

    #[test]
    fn maximal_set_examples() {
        let total = DecisionProblem::from_tables(
            vec![vec![vec![5.0, 5.0], vec![1.0, 4.0], vec![4.0, 1.0]]],
            vec![vec![0.5, 0.5], vec![0.1, 0.9]],
        );
        let t = maximal_set(&total);
        assert_eq!(t.survivors, vec![0]);
        assert!(t.eliminated.iter().all(|e| matches!(e.reason, Reason::Dominated { by: 0, .. })));

        let flat = DecisionProblem::from_tables(vec![vec![vec![1.0, 1.0]; 3]], vec![vec![0.5, 0.5]]);
        assert_eq!(maximal_set(&flat).survivors, vec![0, 1, 2]);

        // a0 and a1 trade off across vertices; a2 is worse than a0 everywhere.
        let crafted = DecisionProblem::from_tables(
            vec![vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.8, -0.1]]],
            vec![vec![0.9, 0.1], vec![0.2, 0.8]],
        );
        let t = maximal_set(&crafted);
        assert_eq!(t.survivors, vec![0, 1]);
        assert_eq!(t.eliminated.len(), 1);
        assert_eq!(t.eliminated[0].action, 2);
    }

    #[test]
    fn epsilon_indifferent_verdict() {
        let p = DecisionProblem::from_tables(
            vec![vec![vec![1.0, 0.0], vec![0.98, 0.03]]],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        );
        let eu = EuMatrix::new(&p);
        assert_eq!(verdict(&eu, 0, 1, 0.05).relation, Relation::EpsilonIndifferent);
        assert_eq!(verdict(&eu, 0, 1, 0.0).relation, Relation::Incomparable);
    }

    #[test]
    fn epsilon_class_examples() {
        // EU values under a single point belief: a=0.0, b=0.05, c=0.10.
        let p = DecisionProblem::from_tables(vec![vec![vec![0.0], vec![0.05], vec![0.10]]], vec![vec![1.0]]);
        let all = p.all_actions();
        assert_eq!(epsilon_classes(&all, &p, 0.06).classes, vec![vec![0, 1, 2]]);
        assert_eq!(epsilon_classes(&all, &p, 1.0).classes, vec![vec![0, 1, 2]]);
        assert_eq!(epsilon_classes(&all, &p, 0.0).classes, vec![vec![0], vec![1], vec![2]]);
        let gaps = epsilon_classes(&all, &p, 0.06).gaps;
        assert_eq!(gaps.len(), 3);
        assert!((gaps[1].max_abs_gap - 0.10).abs() < 1e-12);
    }
}
