//! Fast-and-frugal trees: one cue per level, an exit at every level, and
//! both exits on the final level.

use serde::{Deserialize, Serialize};

use super::{CueProfile, CueValue};
use crate::error::{DecisionError, Result};

/// How a cue reading is tested against its level threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Positive iff `value > threshold`.
    Above,
    /// Positive iff `value < threshold`.
    Below,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitSide {
    Positive,
    Negative,
}

impl ExitSide {
    fn matches(self, positive: bool) -> bool {
        (self == ExitSide::Positive) == positive
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrugalNode {
    pub cue: usize,
    pub direction: Direction,
    pub threshold: f64,
    pub exit_side: ExitSide,
    pub exit_decision: bool,
}

impl FrugalNode {
    fn is_positive(&self, v: f64) -> bool {
        match self.direction {
            Direction::Above => v > self.threshold,
            Direction::Below => v < self.threshold,
        }
    }

    /// `Some(test result)` if the whole interval falls on one side of the
    /// threshold, `None` if it straddles.
    fn interval_side(&self, lo: f64, hi: f64) -> Option<bool> {
        match (self.is_positive(lo), self.is_positive(hi)) {
            (a, b) if a == b => Some(a),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrugalTree {
    #[serde(default)]
    pub cue_names: Vec<String>,
    pub levels: Vec<FrugalNode>,
    /// Decision on the non-exit side of the final level.
    pub final_other: bool,
}

impl FrugalTree {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(DecisionError::InvalidInput("frugal tree needs at least one level".into()));
        }
        if let Some(n) = self.levels.iter().find(|n| !n.threshold.is_finite()) {
            return Err(DecisionError::InvalidInput(format!("non-finite threshold on cue {}", n.cue)));
        }
        if !self.cue_names.is_empty() {
            if let Some(n) = self.levels.iter().find(|n| n.cue >= self.cue_names.len()) {
                return Err(DecisionError::InvalidInput(format!("level references unknown cue {}", n.cue)));
            }
        }
        Ok(())
    }

    fn cue_name(&self, cue: usize) -> String {
        self.cue_names.get(cue).cloned().unwrap_or_else(|| format!("cue{cue}"))
    }

    /// Human-readable rendering, one line per level.
    pub fn describe(&self) -> String {
        let mut out = String::new();
        let last = self.levels.len().saturating_sub(1);
        for (i, n) in self.levels.iter().enumerate() {
            let op = match n.direction {
                Direction::Above => ">",
                Direction::Below => "<",
            };
            let (if_pos, if_neg) = match (n.exit_side, i == last) {
                (ExitSide::Positive, true) => (label(n.exit_decision), label(self.final_other)),
                (ExitSide::Negative, true) => (label(self.final_other), label(n.exit_decision)),
                (ExitSide::Positive, false) => (label(n.exit_decision), "continue".into()),
                (ExitSide::Negative, false) => ("continue".into(), label(n.exit_decision)),
            };
            out.push_str(&format!(
                "level {}: {} {op} {}  yes -> {if_pos}, no -> {if_neg}\n",
                i + 1,
                self.cue_name(n.cue),
                n.threshold
            ));
        }
        out
    }
}

fn label(decision: bool) -> String {
    if decision { "positive (1)" } else { "negative (0)" }.into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FftOutcome {
    pub decision: bool,
    /// 1-based level whose exit fired.
    pub exit_level: usize,
}

/// Walks the levels in order and returns the first exit taken. Cues below
/// the exit level are never read.
pub fn fft_decide(tree: &FrugalTree, profile: &CueProfile) -> Result<FftOutcome> {
    tree.validate()?;
    let last = tree.levels.len() - 1;
    for (i, node) in tree.levels.iter().enumerate() {
        let v = profile.get(node.cue)?.point(node.cue)?;
        let positive = node.is_positive(v);
        if node.exit_side.matches(positive) {
            return Ok(FftOutcome { decision: node.exit_decision, exit_level: i + 1 });
        }
        if i == last {
            return Ok(FftOutcome { decision: tree.final_other, exit_level: i + 1 });
        }
    }
    unreachable!("final level always exits")
}

/// What to return when the final level's interval straddles its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbstainPolicy {
    #[default]
    Abstain,
    Fallback(bool),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalOutcome {
    /// `None` means abstention.
    pub decision: Option<bool>,
    pub exit_level: usize,
}

/// Interval-aware walk: an exit fires only when the whole interval lies on
/// the exit side of its threshold. Straddling intervals pass to the next
/// level; a straddle at the final level follows `policy`.
pub fn fft_decide_interval(tree: &FrugalTree, profile: &CueProfile, policy: AbstainPolicy) -> Result<IntervalOutcome> {
    tree.validate()?;
    let last = tree.levels.len() - 1;
    for (i, node) in tree.levels.iter().enumerate() {
        let (lo, hi) = profile.get(node.cue)?.bounds(node.cue)?;
        let side = node.interval_side(lo, hi);
        if let Some(positive) = side {
            if node.exit_side.matches(positive) {
                return Ok(IntervalOutcome { decision: Some(node.exit_decision), exit_level: i + 1 });
            }
        }
        if i == last {
            let decision = match (side, policy) {
                (Some(_), _) => Some(tree.final_other),
                (None, AbstainPolicy::Abstain) => None,
                (None, AbstainPolicy::Fallback(d)) => Some(d),
            };
            return Ok(IntervalOutcome { decision, exit_level: i + 1 });
        }
    }
    unreachable!("final level always exits")
}

/// Training rows of cue readings with binary labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CueDataset {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<bool>,
}

impl CueDataset {
    pub fn new(names: Vec<String>, rows: Vec<Vec<f64>>, labels: Vec<bool>) -> Result<Self> {
        if rows.is_empty() {
            return Err(DecisionError::InvalidInput("dataset has no rows".into()));
        }
        if names.is_empty() {
            return Err(DecisionError::InvalidInput("dataset has no cue columns".into()));
        }
        if rows.len() != labels.len() {
            return Err(DecisionError::LengthMismatch { expected: rows.len(), actual: labels.len() });
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != names.len()) {
            return Err(DecisionError::InvalidInput(format!(
                "row {i} has {} values for {} columns",
                r.len(),
                names.len()
            )));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(DecisionError::InvalidInput("dataset contains non-finite values".into()));
        }
        Ok(Self { names, rows, labels })
    }

    pub fn profile(&self, row: usize) -> CueProfile {
        CueProfile(self.rows[row].iter().map(|&v| CueValue::Real(v)).collect())
    }

    fn is_binary_column(&self, j: usize) -> bool {
        self.rows.iter().all(|r| r[j] == 0.0 || r[j] == 1.0)
    }

    /// 0.5 for binary columns, the median otherwise.
    fn split_threshold(&self, j: usize) -> f64 {
        if self.is_binary_column(j) {
            return 0.5;
        }
        let mut col: Vec<f64> = self.rows.iter().map(|r| r[j]).collect();
        col.sort_by(f64::total_cmp);
        let n = col.len();
        if n % 2 == 1 {
            col[n / 2]
        } else {
            0.5 * (col[n / 2 - 1] + col[n / 2])
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    /// Purity of the better side: `max(PPV, NPV)`.
    #[default]
    Validity,
    /// Accuracy of the cue used alone as a classifier.
    Accuracy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearnConfig {
    pub max_depth: usize,
    pub ordering: Ordering,
    /// Re-rank remaining cues on the rows still reaching each level instead
    /// of ranking once on the full dataset.
    pub conditional: bool,
}

impl LearnConfig {
    pub fn new(max_depth: usize, ordering: Ordering) -> Self {
        Self { max_depth, ordering, conditional: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total().max(1) as f64
    }

    fn record(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, false) => self.tn += 1,
            (false, true) => self.fn_ += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CueScore {
    pub cue: usize,
    pub direction: Direction,
    pub threshold: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnedTree {
    pub tree: FrugalTree,
    pub confusion: Confusion,
    /// Only one class in the training labels.
    pub degenerate: bool,
    /// Marginal cue ranking on the full dataset.
    pub ranking: Vec<CueScore>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Majority label, `default` on ties and on empty input.
fn majority(labels: impl Iterator<Item = bool>, default: bool) -> (bool, usize, usize) {
    let (mut pos, mut neg) = (0, 0);
    for l in labels {
        if l {
            pos += 1
        } else {
            neg += 1
        }
    }
    let m = if pos > neg {
        true
    } else if neg > pos {
        false
    } else {
        default
    };
    (m, pos, neg)
}

struct Learner<'a> {
    data: &'a CueDataset,
    thresholds: Vec<f64>,
}

impl Learner<'_> {
    fn positive(&self, row: usize, cue: usize, direction: Direction) -> bool {
        let v = self.data.rows[row][cue];
        match direction {
            Direction::Above => v > self.thresholds[cue],
            Direction::Below => v < self.thresholds[cue],
        }
    }

    fn counts(&self, rows: &[usize], cue: usize, direction: Direction) -> Confusion {
        let mut c = Confusion::default();
        for &r in rows {
            c.record(self.positive(r, cue, direction), self.data.labels[r]);
        }
        c
    }

    /// Oriented so a positive test goes with label 1, then scored.
    fn score(&self, rows: &[usize], cue: usize, ordering: Ordering) -> CueScore {
        let above = self.counts(rows, cue, Direction::Above);
        // P(y=1 | positive) >= P(y=1 | negative), cross-multiplied.
        let keep = above.tp * (above.tn + above.fn_) >= above.fn_ * (above.tp + above.fp);
        let direction = if keep { Direction::Above } else { Direction::Below };
        let c = if direction == Direction::Above { above } else { self.counts(rows, cue, direction) };
        let score = match ordering {
            Ordering::Validity => ratio(c.tp, c.tp + c.fp).max(ratio(c.tn, c.tn + c.fn_)),
            Ordering::Accuracy => c.accuracy(),
        };
        CueScore { cue, direction, threshold: self.thresholds[cue], score }
    }

    fn rank(&self, rows: &[usize], cues: &[usize], ordering: Ordering) -> Vec<CueScore> {
        let mut scored: Vec<CueScore> = cues.iter().map(|&c| self.score(rows, c, ordering)).collect();
        // Stable: equal scores keep column order.
        scored.sort_by(|a, b| b.score.total_cmp(&a.score));
        scored
    }
}

/// Learns a fast-and-frugal tree. Cues are ranked by the chosen criterion,
/// each non-final level exits on the purer side with that side's majority
/// label, and growth stops early once the rows still in play are pure.
pub fn fft_learn(data: &CueDataset, config: LearnConfig) -> Result<LearnedTree> {
    if config.max_depth == 0 {
        return Err(DecisionError::InvalidInput("max_depth must be >= 1".into()));
    }
    let n_cues = data.names.len();
    let learner = Learner { data, thresholds: (0..n_cues).map(|j| data.split_threshold(j)).collect() };
    let all_rows: Vec<usize> = (0..data.rows.len()).collect();
    let all_cues: Vec<usize> = (0..n_cues).collect();
    let ranking = learner.rank(&all_rows, &all_cues, config.ordering);

    let (_, pos, neg) = majority(data.labels.iter().copied(), true);
    let degenerate = pos == 0 || neg == 0;
    let mut levels = Vec::new();
    let mut final_other = false;

    if degenerate {
        let class = pos > 0;
        let top = &ranking[0];
        levels.push(FrugalNode {
            cue: top.cue,
            direction: top.direction,
            threshold: top.threshold,
            exit_side: ExitSide::Positive,
            exit_decision: class,
        });
        final_other = class;
    } else {
        let depth = config.max_depth.min(n_cues);
        let mut rows = all_rows;
        let mut unused = all_cues;
        for level in 0..depth {
            let pick = if config.conditional {
                learner.rank(&rows, &unused, config.ordering).remove(0)
            } else {
                ranking.iter().find(|s| unused.contains(&s.cue)).cloned().expect("unused cue remains")
            };
            unused.retain(|&c| c != pick.cue);
            let (pos_rows, neg_rows): (Vec<usize>, Vec<usize>) =
                rows.iter().partition(|&&r| learner.positive(r, pick.cue, pick.direction));
            let labels_of = |rs: &[usize]| rs.iter().map(|&r| data.labels[r]).collect::<Vec<_>>();
            let (pos_major, pp, pn) = majority(labels_of(&pos_rows).into_iter(), true);
            let (neg_major, np, nn) = majority(labels_of(&neg_rows).into_iter(), false);

            if level + 1 == depth {
                levels.push(FrugalNode {
                    cue: pick.cue,
                    direction: pick.direction,
                    threshold: pick.threshold,
                    exit_side: ExitSide::Positive,
                    exit_decision: pos_major,
                });
                final_other = neg_major;
                break;
            }

            let purity = |a: usize, b: usize| ratio(a.max(b), a + b);
            let exit_positive = purity(pp, pn) >= purity(np, nn);
            let (exit_decision, remaining, other_default) =
                if exit_positive { (pos_major, neg_rows, neg_major) } else { (neg_major, pos_rows, pos_major) };
            levels.push(FrugalNode {
                cue: pick.cue,
                direction: pick.direction,
                threshold: pick.threshold,
                exit_side: if exit_positive { ExitSide::Positive } else { ExitSide::Negative },
                exit_decision,
            });
            let (rest_major, rp, rn) = majority(labels_of(&remaining).into_iter(), other_default);
            if rp == 0 || rn == 0 || unused.is_empty() {
                final_other = rest_major;
                break;
            }
            rows = remaining;
        }
    }

    let tree = FrugalTree { cue_names: data.names.clone(), levels, final_other };
    let mut confusion = Confusion::default();
    for r in 0..data.rows.len() {
        confusion.record(fft_decide(&tree, &data.profile(r))?.decision, data.labels[r]);
    }
    Ok(LearnedTree { tree, confusion, degenerate, ranking })
}
