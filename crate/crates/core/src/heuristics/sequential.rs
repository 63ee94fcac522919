//! Naive-Bayes log-likelihood sums, Wald's sequential test, and the two
//! bridges to the frugal rules: Take-The-Best as a greedy reading of the
//! LLR sum, and a frugal tree built from SPRT boundaries.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fft::{Direction, ExitSide, FrugalNode, FrugalTree};
use super::{check_permutation, CueProfile};
use crate::error::{DecisionError, Result};

const MAX_TTB_CUES: usize = 20;

/// Per-cue log-likelihood ratios `llr[j] = [l_j(0), l_j(1)]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlrModel {
    pub llr: Vec<[f64; 2]>,
    #[serde(default)]
    pub prior_log_odds: f64,
    #[serde(default)]
    pub threshold: f64,
}

impl LlrModel {
    pub fn new(llr: Vec<[f64; 2]>, prior_log_odds: f64, threshold: f64) -> Result<Self> {
        let m = Self { llr, prior_log_odds, threshold };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.llr.iter().flatten().all(|v| v.is_finite());
        if !finite || !self.prior_log_odds.is_finite() || !self.threshold.is_finite() {
            return Err(DecisionError::InvalidInput("LLR model has non-finite values".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.llr.len()
    }

    pub fn is_empty(&self) -> bool {
        self.llr.is_empty()
    }

    /// `w_j = l_j(1) - l_j(0)`: what switching cue `j` on adds to the sum.
    pub fn cue_weights(&self) -> Vec<f64> {
        self.llr.iter().map(|[l0, l1]| l1 - l0).collect()
    }

    /// Cues by decreasing `|w_j|`, lowest index first on ties.
    pub fn validity_order(&self) -> Vec<usize> {
        let w = self.cue_weights();
        let mut order: Vec<usize> = (0..w.len()).collect();
        order.sort_by(|&a, &b| w[b].abs().total_cmp(&w[a].abs()));
        order
    }

    /// Each weight in validity order strictly exceeds the sum of all
    /// weaker ones, in magnitude.
    pub fn has_dominant_weights(&self) -> bool {
        let w = self.cue_weights();
        let mut tail = 0.0;
        for &j in self.validity_order().iter().rev() {
            if w[j].abs() <= tail {
                return false;
            }
            tail += w[j].abs();
        }
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LlrDecision {
    pub log_odds: f64,
    /// `true` selects H1.
    pub h1: bool,
}

/// Prior log-odds plus every cue's contribution, compared to the threshold
/// (H1 iff strictly above).
pub fn llr_sum(model: &LlrModel, profile: &CueProfile) -> Result<LlrDecision> {
    if profile.len() != model.len() {
        return Err(DecisionError::LengthMismatch { expected: model.len(), actual: profile.len() });
    }
    let mut log_odds = model.prior_log_odds;
    for (j, pair) in model.llr.iter().enumerate() {
        log_odds += pair[profile.0[j].bit(j)? as usize];
    }
    Ok(LlrDecision { log_odds, h1: log_odds > model.threshold })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SprtVerdict {
    H1,
    H0,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SprtOutcome {
    pub verdict: SprtVerdict,
    /// 1-based index of the observation that ended the test.
    pub stop: Option<usize>,
    /// Cumulative sum at the stop, or after the last observation.
    pub statistic: f64,
}

fn check_boundaries(upper: f64, lower: f64) -> Result<()> {
    if !(upper > lower) {
        return Err(DecisionError::InvalidInput(format!("upper boundary {upper} must exceed lower boundary {lower}")));
    }
    if !(upper > 0.0 && lower < 0.0) {
        return Err(DecisionError::InvalidInput(format!(
            "boundaries must straddle zero, got upper {upper} and lower {lower}"
        )));
    }
    Ok(())
}

/// Accumulates the sequence and stops at the first `S_k >= upper` (H1) or
/// `S_k <= lower` (H0).
pub fn sprt_run(sequence: &[f64], upper: f64, lower: f64) -> Result<SprtOutcome> {
    check_boundaries(upper, lower)?;
    let mut s = 0.0;
    for (k, &x) in sequence.iter().enumerate() {
        s += x;
        if s >= upper {
            return Ok(SprtOutcome { verdict: SprtVerdict::H1, stop: Some(k + 1), statistic: s });
        }
        if s <= lower {
            return Ok(SprtOutcome { verdict: SprtVerdict::H0, stop: Some(k + 1), statistic: s });
        }
    }
    Ok(SprtOutcome { verdict: SprtVerdict::Undecided, stop: None, statistic: s })
}

/// SPRT limited to `depth` observations. If neither boundary is crossed by
/// then, the decision is forced by the side of the midpoint `(A + B) / 2`
/// on which `S_depth` lies, with H0 at the midpoint itself.
pub fn sprt_truncated(sequence: &[f64], upper: f64, lower: f64, depth: usize) -> Result<SprtOutcome> {
    if depth == 0 || sequence.len() < depth {
        return Err(DecisionError::InvalidInput(format!(
            "truncation depth {depth} needs 1..={} observations",
            sequence.len()
        )));
    }
    let out = sprt_run(&sequence[..depth], upper, lower)?;
    if out.verdict != SprtVerdict::Undecided {
        return Ok(out);
    }
    let verdict = if out.statistic > 0.5 * (upper + lower) { SprtVerdict::H1 } else { SprtVerdict::H0 };
    Ok(SprtOutcome { verdict, stop: Some(depth), statistic: out.statistic })
}

fn crossing(s: f64, upper: f64, lower: f64) -> Option<bool> {
    if s >= upper {
        Some(true)
    } else if s <= lower {
        Some(false)
    } else {
        None
    }
}

/// Builds the frugal tree equivalent to an SPRT truncated at
/// `contributions.len()` levels, where level `k` reads binary cue `k` and
/// adds `contributions[k][c_k]`.
///
/// This works when, along the path that has not yet crossed, at most one
/// cue value keeps the test running at every level but the last. Otherwise
/// the test needs more than one live branch, which no frugal tree can
/// express, and the request is refused.
pub fn fft_from_sprt(contributions: &[[f64; 2]], upper: f64, lower: f64) -> Result<FrugalTree> {
    check_boundaries(upper, lower)?;
    if contributions.is_empty() {
        return Err(DecisionError::InvalidInput("SPRT needs at least one observation".into()));
    }
    if contributions.iter().flatten().any(|v| !v.is_finite()) {
        return Err(DecisionError::InvalidInput("non-finite contribution".into()));
    }
    let depth = contributions.len();
    let midpoint = 0.5 * (upper + lower);
    let mut s = 0.0;
    let mut levels = Vec::new();
    for (k, pair) in contributions.iter().enumerate() {
        let last = k + 1 == depth;
        let next = [s + pair[0], s + pair[1]];
        let mut outcome = [crossing(next[0], upper, lower), crossing(next[1], upper, lower)];
        if last {
            for v in 0..2 {
                outcome[v] = outcome[v].or(Some(next[v] > midpoint));
            }
        }
        let node = |exit_side, exit_decision| FrugalNode {
            cue: k,
            direction: Direction::Above,
            threshold: 0.5,
            exit_side,
            exit_decision,
        };
        match outcome {
            [Some(d0), Some(d1)] => {
                levels.push(node(ExitSide::Positive, d1));
                let tree = FrugalTree { cue_names: Vec::new(), levels, final_other: d0 };
                return Ok(tree);
            }
            [None, Some(d1)] => {
                levels.push(node(ExitSide::Positive, d1));
                s = next[0];
            }
            [Some(d0), None] => {
                levels.push(node(ExitSide::Negative, d0));
                s = next[1];
            }
            [None, None] => {
                return Err(DecisionError::Refused(format!(
                    "both values of cue {k} keep the test running; no frugal tree reproduces it"
                )))
            }
        }
    }
    unreachable!("the last level always exits both ways")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlrAgreement {
    pub matches: bool,
    /// Profiles `(a, b)` on which Take-The-Best and the LLR sum disagree.
    pub counterexample: Option<(Vec<bool>, Vec<bool>)>,
    /// Distinct cue-difference patterns examined; each stands for every
    /// profile pair sharing it, `4^m` pairs in total.
    pub patterns_checked: u64,
}

/// Compares Take-The-Best with the sign of the LLR difference over every
/// pair of binary profiles.
///
/// Cues are oriented so that value 1 carries the larger log-likelihood.
/// Take-The-Best decides at the first cue in `validity_order` where the
/// profiles differ; it matches when the LLR difference has the same strict
/// sign. Pairs on which Take-The-Best has no decision are not counted.
/// The difference depends only on the per-cue pattern `a_j - b_j`, so the
/// `3^m` patterns cover all `4^m` pairs.
pub fn ttb_matches_llr(model: &LlrModel, validity_order: &[usize]) -> Result<LlrAgreement> {
    model.validate()?;
    let m = model.len();
    if m > MAX_TTB_CUES {
        return Err(DecisionError::Refused(format!("{m} cues exceeds the enumeration bound of {MAX_TTB_CUES}")));
    }
    check_permutation(validity_order, m)?;
    let w = model.cue_weights();
    // High value of cue j: the raw value with the larger l_j.
    let high: Vec<bool> = w.iter().map(|&x| x >= 0.0).collect();
    let mag: Vec<f64> = w.iter().map(|x| x.abs()).collect();
    let total = 3u64.pow(m as u32);

    let digits = |mut code: u64| {
        let mut d = vec![0i8; m];
        for slot in d.iter_mut() {
            *slot = (code % 3) as i8 - 1;
            code /= 3;
        }
        d
    };
    let disagrees = |code: u64| {
        let d = digits(code);
        let Some(&first) = validity_order.iter().find(|&&j| d[j] != 0) else {
            return false;
        };
        let diff: f64 = (0..m).map(|j| d[j] as f64 * mag[j]).sum();
        if d[first] > 0 {
            !(diff > 0.0)
        } else {
            !(diff < 0.0)
        }
    };

    let found = (0..total).into_par_iter().find_first(|&c| disagrees(c));
    let counterexample = found.map(|code| {
        let d = digits(code);
        let a = (0..m)
            .map(|j| {
                if d[j] > 0 {
                    high[j]
                } else if d[j] < 0 {
                    !high[j]
                } else {
                    false
                }
            })
            .collect();
        let b = (0..m)
            .map(|j| {
                if d[j] > 0 {
                    !high[j]
                } else if d[j] < 0 {
                    high[j]
                } else {
                    false
                }
            })
            .collect();
        (a, b)
    });
    Ok(LlrAgreement { matches: counterexample.is_none(), counterexample, patterns_checked: total })
}
