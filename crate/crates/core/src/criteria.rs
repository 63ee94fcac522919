//! Point-selection criteria applied after dominance filtering: Γ-maximin,
//! Γ-maximax, E-admissibility and minimax regret. Every criterion returns
//! all tied optima; tie-breaking is left to the caller.
//!
//! Also hosts the compensatory weighted-sum scorer used as the score-first
//! baseline.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{DecisionError, Result};
use crate::model::{argmax_set, ActionSet, DecisionProblem, EuMatrix, TOLERANCE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Choice {
    pub actions: Vec<usize>,
    pub value: f64,
}

fn non_empty(actions: &[usize]) -> Result<()> {
    if actions.is_empty() {
        return Err(DecisionError::InvalidInput("action subset is empty".into()));
    }
    Ok(())
}

pub fn gamma_maximin_over(eu: &EuMatrix, actions: &[usize]) -> Result<Choice> {
    non_empty(actions)?;
    let (actions, value) = argmax_set(actions, |a| eu.worst_case(a));
    Ok(Choice { actions, value })
}

pub fn gamma_maximax_over(eu: &EuMatrix, actions: &[usize]) -> Result<Choice> {
    non_empty(actions)?;
    let (actions, value) = argmax_set(actions, |a| eu.best_case(a));
    Ok(Choice { actions, value })
}

/// Maximizes worst-case expected utility over every (vertex, member) pair.
pub fn gamma_maximin(actions: &[usize], problem: &DecisionProblem) -> Result<Choice> {
    gamma_maximin_over(&EuMatrix::new(problem), actions)
}

/// Maximizes best-case expected utility over every (vertex, member) pair.
pub fn gamma_maximax(actions: &[usize], problem: &DecisionProblem) -> Result<Choice> {
    gamma_maximax_over(&EuMatrix::new(problem), actions)
}

/// Actions that maximize expected utility for at least one scenario,
/// returned in input order.
pub fn e_admissible_over(eu: &EuMatrix, actions: &[usize]) -> Result<Vec<usize>> {
    non_empty(actions)?;
    let mut admitted = vec![false; eu.n_actions()];
    for s in 0..eu.scenarios().len() {
        let (winners, _) = argmax_set(actions, |a| eu.eu(s, a));
        for a in winners {
            admitted[a] = true;
        }
    }
    Ok(actions.iter().copied().filter(|&a| admitted[a]).collect())
}

pub fn e_admissible_set(actions: &[usize], problem: &DecisionProblem) -> Result<Vec<usize>> {
    e_admissible_over(&EuMatrix::new(problem), actions)
}

/// State-wise regret `R(a, x) = max_a' U(a', x) - U(a, x)` for one
/// preference member, restricted to the given actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretTable {
    pub actions: Vec<usize>,
    /// `regrets[i][x]` for `actions[i]`.
    pub regrets: Vec<Vec<f64>>,
    /// Actions attaining the state-wise best utility, per state.
    pub best_per_state: Vec<Vec<usize>>,
}

impl RegretTable {
    pub fn max_regret(&self, row: usize) -> f64 {
        self.regrets[row].iter().copied().fold(0.0, f64::max)
    }
}

pub fn regret_table(actions: &[usize], problem: &DecisionProblem, member: usize) -> Result<RegretTable> {
    non_empty(actions)?;
    let model = problem
        .preferences
        .members
        .get(member)
        .ok_or_else(|| DecisionError::InvalidInput(format!("no preference member #{member}")))?;
    let n_states = problem.states.len();
    let mut best_per_state = Vec::with_capacity(n_states);
    let mut best_value = Vec::with_capacity(n_states);
    for x in 0..n_states {
        let (winners, best) = argmax_set(actions, |a| model.utility(a, x));
        best_per_state.push(winners);
        best_value.push(best);
    }
    let regrets = actions
        .iter()
        .map(|&a| (0..n_states).map(|x| (best_value[x] - model.utility(a, x)).max(0.0)).collect())
        .collect();
    Ok(RegretTable { actions: actions.to_vec(), regrets, best_per_state })
}

/// `argmin_a max_x R(a, x)` for one preference member.
pub fn minimax_regret(actions: &[usize], problem: &DecisionProblem, member: usize) -> Result<Choice> {
    let table = regret_table(actions, problem, member)?;
    let worst: Vec<f64> = (0..table.actions.len()).map(|i| table.max_regret(i)).collect();
    let best = worst.iter().copied().fold(f64::INFINITY, f64::min);
    let chosen = table.actions.iter().zip(&worst).filter(|(_, &w)| w <= best + TOLERANCE).map(|(&a, _)| a).collect();
    Ok(Choice { actions: chosen, value: best })
}

/// Minimax regret on a problem whose preference set has been narrowed to a
/// single member. Regret differences need interval-meaningful utilities, so
/// several candidate parameterizations are refused.
pub fn minimax_regret_elicited(actions: &[usize], problem: &DecisionProblem) -> Result<Choice> {
    if problem.preferences.len() != 1 {
        return Err(DecisionError::Refused(format!(
            "minimax regret needs a single elicited preference member (got {}); regret uses utility differences, which are only meaningful once utilities are measured on an interval scale",
            problem.preferences.len()
        )));
    }
    minimax_regret(actions, problem, 0)
}

/// Weighted-sum score `S(a) = Σ_k w_k f_k(a)` over named action attributes.
/// Every weighted attribute must be present on every action.
pub fn additive_scores(actions: &ActionSet, weights: &BTreeMap<String, f64>) -> Result<Vec<f64>> {
    actions
        .actions
        .iter()
        .map(|a| {
            weights
                .iter()
                .map(|(k, w)| {
                    a.attributes
                        .get(k)
                        .map(|f| w * f)
                        .ok_or_else(|| DecisionError::InvalidInput(format!("action '{}' lacks attribute '{k}'", a.id)))
                })
                .sum()
        })
        .collect()
}

/// Argmax of the additive score; ties go to the first action.
pub fn score_first_choice(actions: &ActionSet, weights: &BTreeMap<String, f64>) -> Result<usize> {
    let scores = additive_scores(actions, weights)?;
    scores
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, &s)| match best {
            Some((_, b)) if b >= s => best,
            _ => Some((i, s)),
        })
        .map(|(i, _)| i)
        .ok_or_else(|| DecisionError::InvalidInput("no actions to score".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Action;

    /// Two vertices; EU table a0:(0.6, 0.4), a1:(0.5, 0.5).
    fn two_by_two_table() -> DecisionProblem {
        DecisionProblem::from_tables(vec![vec![vec![0.6, 0.4], vec![0.5, 0.5]]], vec![vec![1.0, 0.0], vec![0.0, 1.0]])
    }

    #[test]
    fn gamma_criteria_on_two_by_two() {
        let p = two_by_two_table();
        let all = p.all_actions();
        let mm = gamma_maximin(&all, &p).unwrap();
        assert_eq!(mm.actions, vec![1]);
        assert!((mm.value - 0.5).abs() < 1e-12);
        let mx = gamma_maximax(&all, &p).unwrap();
        assert_eq!(mx.actions, vec![0]);
        assert!((mx.value - 0.6).abs() < 1e-12);
    }

    #[test]
    fn singleton_sets_collapse_to_argmax() {
        let p = DecisionProblem::from_tables(vec![vec![vec![1.0, 0.0], vec![0.2, 0.9]]], vec![vec![0.3, 0.7]]);
        let all = p.all_actions();
        assert_eq!(gamma_maximin(&all, &p).unwrap().actions, vec![1]);
        assert_eq!(gamma_maximax(&all, &p).unwrap().actions, vec![1]);
        assert_eq!(e_admissible_set(&all, &p).unwrap(), vec![1]);
    }

    #[test]
    fn constant_utilities_tie_everything() {
        let p = DecisionProblem::from_tables(vec![vec![vec![2.0, 2.0]; 3]], vec![vec![0.1, 0.9], vec![0.5, 0.5]]);
        let all = p.all_actions();
        assert_eq!(gamma_maximin(&all, &p).unwrap().actions, all);
        assert_eq!(gamma_maximax(&all, &p).unwrap().actions, all);
        assert_eq!(e_admissible_set(&all, &p).unwrap(), all);
    }

    #[test]
    fn e_admissibility_examples() {
        // Each vertex makes a different action uniquely optimal; a2 is never optimal.
        let p = DecisionProblem::from_tables(
            vec![vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.45, 0.45]]],
            vec![vec![0.9, 0.1], vec![0.1, 0.9]],
        );
        assert_eq!(e_admissible_set(&p.all_actions(), &p).unwrap(), vec![0, 1]);
    }

    #[test]
    fn regret_examples() {
        let p = DecisionProblem::from_tables(vec![vec![vec![10.0, 0.0], vec![7.0, 7.0]]], vec![vec![0.5, 0.5]]);
        let t = regret_table(&[0, 1], &p, 0).unwrap();
        assert_eq!(t.regrets, vec![vec![0.0, 7.0], vec![3.0, 0.0]]);
        assert_eq!(t.best_per_state, vec![vec![0], vec![1]]);
        let mr = minimax_regret(&[0, 1], &p, 0).unwrap();
        assert_eq!(mr.actions, vec![1]);
        assert_eq!(mr.value, 3.0);

        let one = regret_table(&[0], &p, 0).unwrap();
        assert_eq!(one.regrets, vec![vec![0.0, 0.0]]);
        let mr = minimax_regret(&[0], &p, 0).unwrap();
        assert_eq!((mr.actions, mr.value), (vec![0], 0.0));
    }

    #[test]
    fn duplicate_actions_share_regret_rows() {
        let p = DecisionProblem::from_tables(
            vec![vec![vec![3.0, 1.0], vec![3.0, 1.0], vec![0.0, 4.0]]],
            vec![vec![0.5, 0.5]],
        );
        let t = regret_table(&[0, 1, 2], &p, 0).unwrap();
        assert_eq!(t.regrets[0], t.regrets[1]);
        assert_eq!(minimax_regret(&[0, 1], &p, 0).unwrap().actions, vec![0, 1]);
    }

    #[test]
    fn minimax_regret_refuses_several_members() {
        let p = DecisionProblem::from_tables(vec![vec![vec![1.0]], vec![vec![2.0]]], vec![vec![1.0]]);
        assert!(matches!(minimax_regret_elicited(&[0], &p), Err(DecisionError::Refused(_))));
    }

    #[test]
    fn empty_action_subset_is_a_fault() {
        let p = two_by_two_table();
        assert!(gamma_maximin(&[], &p).is_err());
        assert!(e_admissible_set(&[], &p).is_err());
    }

    #[test]
    fn additive_scorer() {
        let mk = |id: &str, e: f64, c: f64| Action {
            id: id.into(),
            label: id.into(),
            attributes: [("e".to_string(), e), ("c".to_string(), c)].into_iter().collect(),
        };
        let set = ActionSet { actions: vec![mk("x", 0.9, 0.0), mk("y", 0.5, 0.6)] };
        let w: BTreeMap<String, f64> = [("e".to_string(), 0.8), ("c".to_string(), 0.2)].into_iter().collect();
        let s = additive_scores(&set, &w).unwrap();
        assert!((s[0] - 0.72).abs() < 1e-12 && (s[1] - 0.52).abs() < 1e-12);
        assert_eq!(score_first_choice(&set, &w).unwrap(), 0);
        let missing: BTreeMap<String, f64> = [("z".to_string(), 1.0)].into_iter().collect();
        assert!(additive_scores(&set, &missing).is_err());
    }
}
