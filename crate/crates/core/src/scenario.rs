//! Scenario documents (TOML) and header-rowed CSV tables for cue datasets,
//! cue profiles and classified cohorts.
//!
//! A scenario refers to everything by identifier: utilities, constraint
//! results and safety grades are keyed by action id, and information-action
//! findings name the credal vertices they retain. Structural problems that
//! [`validate_problem`](crate::model::validate_problem) can describe (an
//! action missing from a utility table, an unnormalized belief) are carried
//! through to the problem so validation reports them; references to unknown
//! identifiers are parse errors.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{DecisionError, Result};
use crate::evaluation::ClassifiedCohort;
use crate::heuristics::{CueDataset, CueProfile, CueValue};
use crate::model::{
    Action, ActionSet, Belief, Constraint, CredalSet, DecisionProblem, Finding, InformationAction, PreferenceSet,
    SafetyGrade, SafetyGrading, State, StateSpace, TieBreak, UtilityModel,
};

/// The shipped psoriasis vignette.
pub const VIGNETTE_TOML: &str = include_str!("../scenarios/psoriasis.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateEntry {
    pub id: String,
    #[serde(default)]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionEntry {
    pub id: String,
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub attributes: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexEntry {
    pub id: String,
    pub probabilities: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreferenceEntry {
    pub id: String,
    #[serde(default)]
    pub description: Option<String>,
    /// Action id to per-state utilities, in state order.
    pub utilities: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintEntry {
    pub name: String,
    /// Action id to pass (true) or fail.
    pub passes: BTreeMap<String, bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SafetyEntry {
    /// Grade names, safest first.
    pub scale: Vec<String>,
    /// Action id to grade name.
    pub grades: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FindingEntry {
    pub label: String,
    /// Ids of the credal vertices still plausible after this finding.
    pub retained: Vec<String>,
    /// `P(finding | vertex)`, in credal vertex order.
    pub likelihood: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfoActionEntry {
    pub id: String,
    #[serde(default)]
    pub cost: f64,
    pub findings: Vec<FindingEntry>,
}

/// Weighted-sum baseline over action attributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreFirstEntry {
    pub weights: BTreeMap<String, f64>,
    /// Noise scale for the score-gap flip probability.
    #[serde(default)]
    pub noise_sigma: Option<f64>,
}

fn default_impact_weight() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub tie_break: TieBreak,
    #[serde(default = "default_impact_weight")]
    pub impact_weight: f64,
    pub states: Vec<StateEntry>,
    pub actions: Vec<ActionEntry>,
    pub credal: Vec<VertexEntry>,
    pub preferences: Vec<PreferenceEntry>,
    #[serde(default)]
    pub constraints: Vec<ConstraintEntry>,
    #[serde(default)]
    pub safety: Option<SafetyEntry>,
    #[serde(default)]
    pub info_actions: Vec<InfoActionEntry>,
    #[serde(default)]
    pub score_first: Option<ScoreFirstEntry>,
}

fn unknown(what: &str, id: &str, context: &str) -> DecisionError {
    DecisionError::Parse(format!("{context}: unknown {what} '{id}'"))
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| DecisionError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| DecisionError::Parse(e.to_string()))
    }

    pub fn vignette() -> Self {
        Self::parse(VIGNETTE_TOML).expect("shipped vignette parses")
    }

    fn action_index(&self, id: &str, context: &str) -> Result<usize> {
        self.actions.iter().position(|a| a.id == id).ok_or_else(|| unknown("action", id, context))
    }

    /// Resolves identifiers into an index-based [`DecisionProblem`].
    pub fn to_problem(&self) -> Result<DecisionProblem> {
        let n_actions = self.actions.len();
        let states = StateSpace {
            states: self
                .states
                .iter()
                .map(|s| State { id: s.id.clone(), label: s.label.clone().unwrap_or_else(|| s.id.clone()) })
                .collect(),
        };
        let actions = ActionSet {
            actions: self
                .actions
                .iter()
                .map(|a| Action {
                    id: a.id.clone(),
                    label: a.label.clone().unwrap_or_else(|| a.id.clone()),
                    attributes: a.attributes.clone(),
                })
                .collect(),
        };
        let credal =
            CredalSet::new(self.credal.iter().map(|v| Belief::named(v.id.clone(), v.probabilities.clone())).collect());

        let mut members = Vec::with_capacity(self.preferences.len());
        for p in &self.preferences {
            let context = format!("preference '{}'", p.id);
            for id in p.utilities.keys() {
                self.action_index(id, &context)?;
            }
            // Absent actions leave an empty row for validation to report.
            let table = self.actions.iter().map(|a| p.utilities.get(&a.id).cloned().unwrap_or_default()).collect();
            members.push(UtilityModel::named(p.id.clone(), table));
        }

        let mut constraints = Vec::with_capacity(self.constraints.len());
        for c in &self.constraints {
            let context = format!("constraint '{}'", c.name);
            let mut passes = vec![false; n_actions];
            for (id, &ok) in &c.passes {
                passes[self.action_index(id, &context)?] = ok;
            }
            for a in &self.actions {
                if !c.passes.contains_key(&a.id) {
                    return Err(DecisionError::Parse(format!("{context}: no result for action '{}'", a.id)));
                }
            }
            constraints.push(Constraint { name: c.name.clone(), passes });
        }

        let safety = match &self.safety {
            None => None,
            Some(s) => {
                let mut grades = vec![None; n_actions];
                for (id, name) in &s.grades {
                    let a = self.action_index(id, "safety grades")?;
                    let rank = s
                        .scale
                        .iter()
                        .position(|g| g == name)
                        .ok_or_else(|| unknown("safety grade", name, "safety grades"))?;
                    grades[a] = Some(SafetyGrade(rank));
                }
                Some(SafetyGrading { scale: s.scale.clone(), grades })
            }
        };

        let mut info_actions = Vec::with_capacity(self.info_actions.len());
        for u in &self.info_actions {
            let context = format!("info action '{}'", u.id);
            let mut findings = Vec::with_capacity(u.findings.len());
            for f in &u.findings {
                let retained_vertices = f
                    .retained
                    .iter()
                    .map(|id| {
                        self.credal.iter().position(|v| &v.id == id).ok_or_else(|| unknown("vertex", id, &context))
                    })
                    .collect::<Result<Vec<_>>>()?;
                findings.push(Finding { label: f.label.clone(), retained_vertices, likelihood: f.likelihood.clone() });
            }
            info_actions.push(InformationAction { id: u.id.clone(), cost: u.cost, findings });
        }

        Ok(DecisionProblem {
            name: self.name.clone(),
            states,
            actions,
            credal,
            preferences: PreferenceSet::new(members),
            constraints,
            epsilon: self.epsilon,
            info_actions,
            safety,
            tie_break: self.tie_break,
            impact_weight: self.impact_weight,
        })
    }
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes())
}

fn line_of(record: &csv::StringRecord, fallback: usize) -> u64 {
    record.position().map_or(fallback as u64, |p| p.line())
}

/// Header plus `(line number, cells)` per data row.
type Rows = (Vec<String>, Vec<(u64, Vec<String>)>);

fn read_rows(text: &str) -> Result<Rows> {
    let mut reader = csv_reader(text);
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| DecisionError::Parse(format!("header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| DecisionError::Parse(format!("row {}: {e}", i + 2)))?;
        rows.push((line_of(&rec, i + 2), rec.iter().map(str::to_string).collect()));
    }
    if rows.is_empty() {
        return Err(DecisionError::Parse("table has no data rows".into()));
    }
    Ok((headers, rows))
}

fn parse_label(cell: &str, line: u64) -> Result<bool> {
    match cell {
        "1" | "true" => Ok(true),
        "0" | "false" => Ok(false),
        other => Err(DecisionError::Parse(format!("line {line}: label must be 0 or 1, got '{other}'"))),
    }
}

fn parse_number(cell: &str, line: u64, column: &str) -> Result<f64> {
    cell.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| DecisionError::Parse(format!("line {line}, column '{column}': expected a number, got '{cell}'")))
}

/// Cue dataset with a `label` column (0/1); every other column is a cue.
pub fn read_dataset(text: &str) -> Result<CueDataset> {
    let (headers, rows) = read_rows(text)?;
    let label_col = headers
        .iter()
        .position(|h| h == "label")
        .ok_or_else(|| DecisionError::Parse("dataset needs a 'label' column".into()))?;
    let names: Vec<String> =
        headers.iter().enumerate().filter(|(j, _)| *j != label_col).map(|(_, h)| h.clone()).collect();
    let mut values = Vec::with_capacity(rows.len());
    let mut labels = Vec::with_capacity(rows.len());
    for (line, cells) in rows {
        let mut row = Vec::with_capacity(names.len());
        for (j, cell) in cells.iter().enumerate() {
            if j == label_col {
                labels.push(parse_label(cell, line)?);
            } else {
                row.push(parse_number(cell, line, &headers[j])?);
            }
        }
        values.push(row);
    }
    CueDataset::new(names, values, labels)
}

/// One cue reading: a number, `lo..hi` for an interval, and empty or `NA`
/// for missing.
pub fn parse_cue_cell(cell: &str, line: u64, column: &str) -> Result<CueValue> {
    if cell.is_empty() || cell.eq_ignore_ascii_case("na") {
        return Ok(CueValue::Missing);
    }
    if let Some((lo, hi)) = cell.split_once("..") {
        let (lo, hi) = (parse_number(lo.trim(), line, column)?, parse_number(hi.trim(), line, column)?);
        return CueValue::interval(lo, hi)
            .map_err(|e| DecisionError::Parse(format!("line {line}, column '{column}': {e}")));
    }
    parse_number(cell, line, column).map(CueValue::Real)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTable {
    pub names: Vec<String>,
    pub profiles: Vec<CueProfile>,
    /// Present when the table has a `label` column.
    pub labels: Option<Vec<bool>>,
}

/// Cue profiles, one per row. A `label` column, if present, is returned
/// separately and excluded from the profile.
pub fn read_profiles(text: &str) -> Result<ProfileTable> {
    let (headers, rows) = read_rows(text)?;
    let label_col = headers.iter().position(|h| h == "label");
    let names = headers.iter().enumerate().filter(|(j, _)| Some(*j) != label_col).map(|(_, h)| h.clone()).collect();
    let mut profiles = Vec::with_capacity(rows.len());
    let mut labels = label_col.map(|_| Vec::with_capacity(rows.len()));
    for (line, cells) in rows {
        let mut values = Vec::with_capacity(cells.len());
        for (j, cell) in cells.iter().enumerate() {
            if Some(j) == label_col {
                labels.as_mut().expect("label column").push(parse_label(cell, line)?);
            } else {
                values.push(parse_cue_cell(cell, line, &headers[j])?);
            }
        }
        profiles.push(CueProfile(values));
    }
    Ok(ProfileTable { names, profiles, labels })
}

/// Cohort with `probability` and `label` columns.
pub fn read_cohort(text: &str) -> Result<ClassifiedCohort> {
    let (headers, rows) = read_rows(text)?;
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DecisionError::Parse(format!("cohort needs a '{name}' column")))
    };
    let (pc, lc) = (col("probability")?, col("label")?);
    let mut probabilities = Vec::with_capacity(rows.len());
    let mut labels = Vec::with_capacity(rows.len());
    for (line, cells) in rows {
        let p = parse_number(&cells[pc], line, "probability")?;
        if !(0.0..=1.0).contains(&p) {
            return Err(DecisionError::Parse(format!("line {line}: probability {p} outside [0, 1]")));
        }
        probabilities.push(p);
        labels.push(parse_label(&cells[lc], line)?);
    }
    ClassifiedCohort::new(probabilities, labels)
}
