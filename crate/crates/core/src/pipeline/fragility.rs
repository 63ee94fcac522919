//! Decision fragility: the gap to the runner-up, margin flip probabilities
//! and threshold-interval overlap.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use super::apply_constraints;
use crate::error::{invalid, Result};
use crate::model::{expected_utility, DecisionProblem, EuMatrix, TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionGap {
    pub lower: f64,
    pub upper: f64,
    /// `lower <= epsilon`.
    pub fragile: bool,
    /// Nominal optimum `a*`, when at least two feasible actions exist.
    pub nominal_best: Option<usize>,
}

/// Range of `EU(a*) - max_{a != a*} EU(a)` over every (vertex, member)
/// pair, with `a*` fixed at the optimum under the nominal pair. Only
/// feasible actions compete. With fewer than two feasible actions the gap
/// is undefined and reported as an infinite, non-fragile interval.
pub fn decision_gap(problem: &DecisionProblem, nominal_vertex: usize, nominal_member: usize) -> Result<DecisionGap> {
    let belief = problem
        .credal
        .vertices
        .get(nominal_vertex)
        .ok_or_else(|| invalid(format!("no credal vertex #{nominal_vertex}")))?;
    let model = problem
        .preferences
        .members
        .get(nominal_member)
        .ok_or_else(|| invalid(format!("no preference member #{nominal_member}")))?;
    let feasible = apply_constraints(problem).survivors;
    if feasible.len() < 2 {
        return Ok(DecisionGap { lower: f64::INFINITY, upper: f64::INFINITY, fragile: false, nominal_best: None });
    }
    let best = feasible
        .iter()
        .copied()
        .fold(None, |acc: Option<(usize, f64)>, a| {
            let eu = expected_utility(a, belief, model);
            match acc {
                Some((_, b)) if b >= eu => acc,
                _ => Some((a, eu)),
            }
        })
        .map(|(a, _)| a)
        .expect("at least two feasible actions");

    let eu = EuMatrix::new(problem);
    let mut lower = f64::INFINITY;
    let mut upper = f64::NEG_INFINITY;
    for s in 0..eu.scenarios().len() {
        let runner_up = feasible.iter().filter(|&&a| a != best).map(|&a| eu.eu(s, a)).fold(f64::NEG_INFINITY, f64::max);
        let gap = eu.eu(s, best) - runner_up;
        lower = lower.min(gap);
        upper = upper.max(gap);
    }
    Ok(DecisionGap { lower, upper, fragile: lower <= problem.epsilon, nominal_best: Some(best) })
}

/// `Φ(-Δ/σ)`: probability that Gaussian estimation error of scale `sigma`
/// reverses a true expected-utility margin `delta`.
pub fn decision_margin_flip_probability(delta: f64, sigma: f64) -> Result<f64> {
    flip_probability_general_cdf(delta, &ErrorCdf::Gaussian { sigma })
}

/// Symmetric error distributions for [`flip_probability_general_cdf`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ErrorCdf {
    Gaussian {
        sigma: f64,
    },
    StudentT {
        nu: f64,
        scale: f64,
    },
    /// Observed error sample. It is symmetrized (each value is paired with
    /// its negation) so the CDF is symmetric about 0 by construction.
    Empirical {
        sample: Vec<f64>,
    },
}

impl ErrorCdf {
    pub fn cdf(&self, x: f64) -> Result<f64> {
        match self {
            ErrorCdf::Gaussian { sigma } => {
                if !(*sigma > 0.0 && sigma.is_finite()) {
                    return Err(invalid(format!("gaussian sigma must be > 0, got {sigma}")));
                }
                Ok(Normal::new(0.0, *sigma).map_err(|e| invalid(e.to_string()))?.cdf(x))
            }
            ErrorCdf::StudentT { nu, scale } => {
                if !(*nu > 0.0 && *scale > 0.0 && nu.is_finite() && scale.is_finite()) {
                    return Err(invalid(format!("student-t needs nu > 0 and scale > 0, got nu={nu} scale={scale}")));
                }
                Ok(StudentsT::new(0.0, *scale, *nu).map_err(|e| invalid(e.to_string()))?.cdf(x))
            }
            ErrorCdf::Empirical { sample } => {
                if sample.is_empty() || sample.iter().any(|v| !v.is_finite()) {
                    return Err(invalid("empirical error sample must be non-empty and finite"));
                }
                // Over the symmetrized sample {s} ∪ {-s}, with half weight at ties.
                let mut below = 0.0;
                for &s in sample {
                    for v in [s, -s] {
                        if (v - x).abs() <= TOLERANCE * x.abs().max(1.0) {
                            below += 0.5;
                        } else if v < x {
                            below += 1.0;
                        }
                    }
                }
                Ok(below / (2 * sample.len()) as f64)
            }
        }
    }
}

/// `F(-Δ)` for a symmetric error CDF `F`.
pub fn flip_probability_general_cdf(delta: f64, cdf: &ErrorCdf) -> Result<f64> {
    if !delta.is_finite() {
        return Err(invalid(format!("margin must be finite, got {delta}")));
    }
    cdf.cdf(-delta)
}

/// Closed interval inside `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbInterval {
    pub lo: f64,
    pub hi: f64,
}

impl ProbInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return Err(invalid(format!("malformed probability interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn point(p: f64) -> Result<Self> {
        Self::new(p, p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdVerdict {
    RobustTreat,
    RobustWithhold,
    Fragile,
}

/// Treat-vs-withhold when both the risk `p` and the threshold `p*` are only
/// known up to intervals. Degenerate intervals reduce to "treat iff p > p*",
/// with an exact tie reported as fragile.
pub fn threshold_interval_overlap(p: ProbInterval, p_star: ProbInterval) -> Result<ThresholdVerdict> {
    ProbInterval::new(p.lo, p.hi)?;
    ProbInterval::new(p_star.lo, p_star.hi)?;
    Ok(if p.lo > p_star.hi {
        ThresholdVerdict::RobustTreat
    } else if p.hi < p_star.lo {
        ThresholdVerdict::RobustWithhold
    } else {
        ThresholdVerdict::Fragile
    })
}
