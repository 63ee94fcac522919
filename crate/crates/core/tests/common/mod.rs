#![allow(dead_code)]

use ordinal_core::{Constraint, DecisionProblem, SafetyGrade, SafetyGrading};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn simplex_point<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let sum: f64 = raw.iter().sum();
    raw.iter().map(|x| x / sum).collect()
}

/// Continuous utilities so exact expected-utility ties have probability 0.
pub fn random_problem<R: Rng>(rng: &mut R, max_vertices: usize, max_members: usize) -> DecisionProblem {
    let n_a = rng.random_range(1..=5);
    let n_x = rng.random_range(1..=4);
    let n_v = rng.random_range(1..=max_vertices);
    let n_m = rng.random_range(1..=max_members);
    let members =
        (0..n_m).map(|_| (0..n_a).map(|_| (0..n_x).map(|_| rng.random_range(0.0..10.0)).collect()).collect()).collect();
    let vertices = (0..n_v).map(|_| simplex_point(rng, n_x)).collect();
    DecisionProblem::from_tables(members, vertices)
}

/// Adds random constraints, safety grades and a random ε.
pub fn decorate<R: Rng>(rng: &mut R, mut p: DecisionProblem) -> DecisionProblem {
    let n_a = p.actions.len();
    for k in 0..rng.random_range(0..=2) {
        p.constraints
            .push(Constraint { name: format!("c{k}"), passes: (0..n_a).map(|_| rng.random_bool(0.8)).collect() });
    }
    if rng.random_bool(0.5) {
        p.safety = Some(SafetyGrading {
            scale: vec!["low".into(), "moderate".into(), "high".into()],
            grades: (0..n_a).map(|_| Some(SafetyGrade(rng.random_range(0..3)))).collect(),
        });
    }
    p.epsilon = if rng.random_bool(0.5) { 0.0 } else { rng.random_range(0.0..1.5) };
    p
}
