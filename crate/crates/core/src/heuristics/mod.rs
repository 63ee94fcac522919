//! Ordinal non-compensatory rules: screens, lexicographic comparison,
//! elimination-by-aspects, Take-The-Best, fast-and-frugal trees, and their
//! sequential-test counterparts (naive-Bayes LLR sums and SPRT).
//!
//! Every sequential rule here reads cues lazily in its inspection order and
//! stops at the first decisive one, so values after the stop are never
//! read: changing them cannot change the output.

mod fft;
mod screens;
mod sequential;

pub use fft::{
    fft_decide, fft_decide_interval, fft_learn, AbstainPolicy, Confusion, CueDataset, CueScore, Direction, ExitSide,
    FftOutcome, FrugalNode, FrugalTree, IntervalOutcome, LearnConfig, LearnedTree, Ordering,
};
pub use screens::{
    conjunctive_screen, disjunctive_screen, eba_choose, lexicographic_compare, ttb_decide, EbaOutcome, LexOutcome,
    LexVerdict, TtbChoice, TtbOutcome,
};
pub use sequential::{
    fft_from_sprt, llr_sum, sprt_run, sprt_truncated, ttb_matches_llr, LlrAgreement, LlrDecision, LlrModel,
    SprtOutcome, SprtVerdict,
};

use serde::{Deserialize, Serialize};

use crate::error::{DecisionError, Result};

/// One cue reading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CueValue {
    Binary(bool),
    Real(f64),
    /// Uncertainty-aware reading with `lo <= hi`.
    Interval {
        lo: f64,
        hi: f64,
    },
    Missing,
}

impl CueValue {
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) {
            return Err(DecisionError::InvalidInput(format!("interval cue with lo {lo} > hi {hi}")));
        }
        Ok(CueValue::Interval { lo, hi })
    }

    /// Point value; binary cues read as 0/1 and degenerate intervals as
    /// their single value.
    pub fn point(&self, cue: usize) -> Result<f64> {
        match *self {
            CueValue::Binary(b) => Ok(if b { 1.0 } else { 0.0 }),
            CueValue::Real(v) => Ok(v),
            CueValue::Interval { lo, hi } if lo == hi => Ok(lo),
            CueValue::Interval { lo, hi } => Err(DecisionError::InvalidInput(format!(
                "cue {cue} is the interval [{lo}, {hi}] where a point value is required"
            ))),
            CueValue::Missing => Err(DecisionError::MissingCue { cue }),
        }
    }

    /// `(lo, hi)` bounds; point readings are degenerate intervals.
    pub fn bounds(&self, cue: usize) -> Result<(f64, f64)> {
        match *self {
            CueValue::Interval { lo, hi } if lo <= hi => Ok((lo, hi)),
            CueValue::Interval { lo, hi } => {
                Err(DecisionError::InvalidInput(format!("cue {cue} interval has lo {lo} > hi {hi}")))
            }
            _ => self.point(cue).map(|v| (v, v)),
        }
    }

    /// 0/1 reading for cues that must be binary.
    pub fn bit(&self, cue: usize) -> Result<bool> {
        let v = self.point(cue)?;
        if v == 0.0 || v == 1.0 {
            Ok(v == 1.0)
        } else {
            Err(DecisionError::InvalidInput(format!("cue {cue} must be binary, got {v}")))
        }
    }
}

/// Ordered cue readings `(c_1, …, c_m)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CueProfile(pub Vec<CueValue>);

impl CueProfile {
    pub fn from_bits(bits: &[bool]) -> Self {
        Self(bits.iter().map(|&b| CueValue::Binary(b)).collect())
    }

    pub fn from_reals(values: &[f64]) -> Self {
        Self(values.iter().map(|&v| CueValue::Real(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, cue: usize) -> Result<&CueValue> {
        self.0.get(cue).ok_or(DecisionError::MissingCue { cue })
    }
}

pub(crate) fn check_permutation(order: &[usize], len: usize) -> Result<()> {
    let mut seen = vec![false; len];
    if order.len() != len {
        return Err(DecisionError::InvalidPermutation { len });
    }
    for &i in order {
        if i >= len || std::mem::replace(&mut seen[i], true) {
            return Err(DecisionError::InvalidPermutation { len });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cue_value_readings() {
        assert_eq!(CueValue::Binary(true).point(0).unwrap(), 1.0);
        assert_eq!(CueValue::Interval { lo: 2.0, hi: 2.0 }.point(0).unwrap(), 2.0);
        assert!(CueValue::Interval { lo: 1.0, hi: 2.0 }.point(0).is_err());
        assert_eq!(CueValue::Missing.point(4), Err(DecisionError::MissingCue { cue: 4 }));
        assert!(CueValue::interval(2.0, 1.0).is_err());
        assert!(CueValue::Real(0.5).bit(0).is_err());
        assert_eq!(CueValue::Real(3.0).bounds(0).unwrap(), (3.0, 3.0));
    }

    #[test]
    fn permutation_check() {
        assert!(check_permutation(&[2, 0, 1], 3).is_ok());
        assert!(check_permutation(&[0, 0, 1], 3).is_err());
        assert!(check_permutation(&[0, 1], 3).is_err());
        assert!(check_permutation(&[0, 1, 3], 3).is_err());
    }
}
