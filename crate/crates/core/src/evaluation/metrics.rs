use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Predicted probabilities paired with observed binary outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedCohort {
    pub probabilities: Vec<f64>,
    pub labels: Vec<bool>,
}

impl ClassifiedCohort {
    pub fn new(probabilities: Vec<f64>, labels: Vec<bool>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(invalid("cohort is empty"));
        }
        if probabilities.len() != labels.len() {
            return Err(invalid(format!("{} probabilities for {} labels", probabilities.len(), labels.len())));
        }
        if let Some((i, p)) = probabilities.iter().enumerate().find(|(_, p)| !(0.0..=1.0).contains(*p)) {
            return Err(invalid(format!("case {i}: probability {p} outside [0, 1]")));
        }
        Ok(Self { probabilities, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn prevalence(&self) -> f64 {
        self.labels.iter().filter(|&&y| y).count() as f64 / self.len() as f64
    }

    /// `(TP, FP)` for the rule "treat iff p > p_star".
    pub fn treated_counts(&self, p_star: f64) -> (usize, usize) {
        self.probabilities.iter().zip(&self.labels).filter(|(&p, _)| p > p_star).fold((0, 0), |(tp, fp), (_, &y)| {
            if y {
                (tp + 1, fp)
            } else {
                (tp, fp + 1)
            }
        })
    }
}

fn check_threshold(p_star: f64) -> Result<()> {
    if !(p_star > 0.0 && p_star < 1.0) {
        return Err(invalid(format!("threshold probability {p_star} must lie strictly inside (0, 1)")));
    }
    Ok(())
}

/// `TP/N - FP/N * p*/(1 - p*)`.
pub fn net_benefit_from_counts(tp: usize, fp: usize, n: usize, p_star: f64) -> Result<f64> {
    check_threshold(p_star)?;
    if n == 0 {
        return Err(invalid("cohort size must be >= 1"));
    }
    let n = n as f64;
    Ok(tp as f64 / n - fp as f64 / n * (p_star / (1.0 - p_star)))
}

/// Net benefit of treating exactly the cases with predicted probability
/// strictly above `p_star`.
pub fn net_benefit(cohort: &ClassifiedCohort, p_star: f64) -> Result<f64> {
    check_threshold(p_star)?;
    let (tp, fp) = cohort.treated_counts(p_star);
    net_benefit_from_counts(tp, fp, cohort.len(), p_star)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionCurveRow {
    pub p_star: f64,
    pub model: f64,
    pub treat_all: f64,
    pub treat_none: f64,
}

pub fn decision_curve(cohort: &ClassifiedCohort, grid: &[f64]) -> Result<Vec<DecisionCurveRow>> {
    let positives = cohort.labels.iter().filter(|&&y| y).count();
    let negatives = cohort.len() - positives;
    grid.iter()
        .map(|&p_star| {
            Ok(DecisionCurveRow {
                p_star,
                model: net_benefit(cohort, p_star)?,
                treat_all: net_benefit_from_counts(positives, negatives, cohort.len(), p_star)?,
                treat_none: 0.0,
            })
        })
        .collect()
}

/// One set-valued output with the reference action for that case.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetValuedRecord {
    pub output: Vec<usize>,
    pub reference: usize,
    #[serde(default)]
    pub abstained: bool,
}

impl SetValuedRecord {
    pub fn new(output: Vec<usize>, reference: usize) -> Result<Self> {
        if output.is_empty() {
            return Err(invalid("empty output set; record an abstention explicitly"));
        }
        Ok(Self { output, reference, abstained: false })
    }

    pub fn abstention(reference: usize) -> Self {
        Self { output: Vec::new(), reference, abstained: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetMetrics {
    /// Fraction of all records whose output contains the reference action.
    pub coverage: f64,
    /// Mean output cardinality over all records; abstentions count as 0.
    pub mean_set_size: f64,
    pub abstention_rate: f64,
    pub records: usize,
}

/// Abstentions stay in every denominator: they neither cover the
/// reference nor add to set size.
pub fn set_metrics(records: &[SetValuedRecord]) -> Result<SetMetrics> {
    if records.is_empty() {
        return Err(invalid("no records"));
    }
    if records.iter().any(|r| r.output.is_empty() && !r.abstained) {
        return Err(invalid("empty output set without a recorded abstention"));
    }
    let n = records.len() as f64;
    let covered = records.iter().filter(|r| !r.abstained && r.output.contains(&r.reference)).count();
    let size: usize = records.iter().filter(|r| !r.abstained).map(|r| r.output.len()).sum();
    let abstained = records.iter().filter(|r| r.abstained).count();
    Ok(SetMetrics {
        coverage: covered as f64 / n,
        mean_set_size: size as f64 / n,
        abstention_rate: abstained as f64 / n,
        records: records.len(),
    })
}
