use serde::{Deserialize, Serialize};

use super::{check_permutation, CueProfile};
use crate::error::{DecisionError, Result};

fn aligned(profile: &CueProfile, thresholds: &[f64]) -> Result<()> {
    if profile.len() != thresholds.len() {
        return Err(DecisionError::LengthMismatch { expected: thresholds.len(), actual: profile.len() });
    }
    Ok(())
}

/// Accept iff every cue meets its minimum (`x_j >= t_j`). Vacuously true
/// for no thresholds.
pub fn conjunctive_screen(profile: &CueProfile, thresholds: &[f64]) -> Result<bool> {
    aligned(profile, thresholds)?;
    for (j, &t) in thresholds.iter().enumerate() {
        if profile.0[j].point(j)? < t {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Accept iff some cue meets its threshold. Vacuously false for no
/// thresholds.
pub fn disjunctive_screen(profile: &CueProfile, thresholds: &[f64]) -> Result<bool> {
    aligned(profile, thresholds)?;
    for (j, &t) in thresholds.iter().enumerate() {
        if profile.0[j].point(j)? >= t {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LexVerdict {
    APreferred,
    BPreferred,
    Tie,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexOutcome {
    pub verdict: LexVerdict,
    /// Attribute that decided, if any.
    pub deciding_attribute: Option<usize>,
}

/// Larger value wins on the first attribute, in priority order, where the
/// two profiles differ.
pub fn lexicographic_compare(a: &CueProfile, b: &CueProfile, priority: &[usize]) -> Result<LexOutcome> {
    if a.len() != b.len() {
        return Err(DecisionError::LengthMismatch { expected: a.len(), actual: b.len() });
    }
    check_permutation(priority, a.len())?;
    for &j in priority {
        let (x, y) = (a.0[j].point(j)?, b.0[j].point(j)?);
        if x != y {
            let verdict = if x > y { LexVerdict::APreferred } else { LexVerdict::BPreferred };
            return Ok(LexOutcome { verdict, deciding_attribute: Some(j) });
        }
    }
    Ok(LexOutcome { verdict: LexVerdict::Tie, deciding_attribute: None })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EbaOutcome {
    pub survivors: Vec<usize>,
    /// Aspects that would have eliminated every remaining alternative.
    pub skipped: Vec<usize>,
    /// Aspects actually examined before one alternative remained.
    pub examined: usize,
}

/// Elimination-by-aspects with a fixed aspect order. An alternative has an
/// aspect when its reading is positive; a missing reading lacks it.
pub fn eba_choose(alternatives: &[CueProfile], aspect_order: &[usize]) -> Result<EbaOutcome> {
    if alternatives.is_empty() {
        return Err(DecisionError::InvalidInput("no alternatives to choose from".into()));
    }
    let has = |alt: &CueProfile, j: usize| -> Result<bool> {
        match alt.0.get(j) {
            None => Err(DecisionError::InvalidInput(format!("aspect {j} is out of range"))),
            Some(super::CueValue::Missing) => Ok(false),
            Some(v) => Ok(v.point(j)? > 0.0),
        }
    };
    let mut survivors: Vec<usize> = (0..alternatives.len()).collect();
    let mut skipped = Vec::new();
    let mut examined = 0;
    for &j in aspect_order {
        if survivors.len() == 1 {
            break;
        }
        examined += 1;
        let mut keep = Vec::with_capacity(survivors.len());
        for &i in &survivors {
            if has(&alternatives[i], j)? {
                keep.push(i);
            }
        }
        if keep.is_empty() {
            skipped.push(j);
        } else {
            survivors = keep;
        }
    }
    Ok(EbaOutcome { survivors, skipped, examined })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TtbChoice {
    A,
    B,
    NoDecision,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TtbOutcome {
    pub choice: TtbChoice,
    /// 1-based position in the validity order where search stopped.
    pub stop: Option<usize>,
    pub cue: Option<usize>,
}

/// Take-The-Best on binary cues: the first cue in validity order on which
/// the options differ decides, in favour of the option whose value is 1.
pub fn ttb_decide(a: &CueProfile, b: &CueProfile, validity_order: &[usize]) -> Result<TtbOutcome> {
    if a.len() != b.len() {
        return Err(DecisionError::LengthMismatch { expected: a.len(), actual: b.len() });
    }
    check_permutation(validity_order, a.len())?;
    for (pos, &j) in validity_order.iter().enumerate() {
        let (x, y) = (a.0[j].bit(j)?, b.0[j].bit(j)?);
        if x != y {
            let choice = if x { TtbChoice::A } else { TtbChoice::B };
            return Ok(TtbOutcome { choice, stop: Some(pos + 1), cue: Some(j) });
        }
    }
    Ok(TtbOutcome { choice: TtbChoice::NoDecision, stop: None, cue: None })
}
