//! Domain types for a decision problem under imprecise beliefs and partial
//! preferences, plus the expected-utility primitives everything else is
//! built on.
//!
//! A problem carries a finite credal set (belief vertices over states) and a
//! finite preference set (complete utility tables). Expected utility is
//! linear in the belief, so worst and best cases over the convex hull of the
//! credal set are attained at its vertices; every "for all beliefs" check in
//! this crate is therefore an enumeration over `vertices × members`.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

/// Absolute tolerance for utility equality and probability sums.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub id: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StateSpace {
    pub states: Vec<State>,
}

impl StateSpace {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.states.iter().position(|s| s.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub id: String,
    pub label: String,
    /// Named real-valued outcome dimensions, used for Pareto filtering and
    /// for additive score baselines.
    #[serde(default)]
    pub attributes: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ActionSet {
    pub actions: Vec<Action>,
}

impl ActionSet {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.actions.iter().position(|a| a.id == id)
    }

    pub fn id(&self, idx: usize) -> &str {
        &self.actions[idx].id
    }

    pub fn ids(&self, indices: &[usize]) -> Vec<String> {
        indices.iter().map(|&i| self.actions[i].id.clone()).collect()
    }

    /// Attribute vector of an action over the given dimension names, or
    /// `None` if any dimension is absent.
    pub fn attribute_vector(&self, idx: usize, dims: &[String]) -> Option<Vec<f64>> {
        let attrs = &self.actions[idx].attributes;
        dims.iter().map(|d| attrs.get(d).copied()).collect()
    }
}

/// A probability distribution over the states of a problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Belief {
    #[serde(default)]
    pub id: String,
    pub probabilities: Vec<f64>,
}

impl Belief {
    pub fn new(probabilities: Vec<f64>) -> Self {
        Self { id: String::new(), probabilities }
    }

    pub fn named(id: impl Into<String>, probabilities: Vec<f64>) -> Self {
        Self { id: id.into(), probabilities }
    }

    pub fn is_normalized(&self) -> bool {
        self.probabilities.iter().all(|p| p.is_finite() && *p >= 0.0)
            && (self.probabilities.iter().sum::<f64>() - 1.0).abs() <= TOLERANCE
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CredalSet {
    pub vertices: Vec<Belief>,
}

impl CredalSet {
    pub fn new(vertices: Vec<Belief>) -> Self {
        Self { vertices }
    }

    pub fn singleton(belief: Belief) -> Self {
        Self { vertices: vec![belief] }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// One complete preference parameterization: `table[action][state]` in
/// utiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityModel {
    #[serde(default)]
    pub id: String,
    pub table: Vec<Vec<f64>>,
}

impl UtilityModel {
    pub fn new(table: Vec<Vec<f64>>) -> Self {
        Self { id: String::new(), table }
    }

    pub fn named(id: impl Into<String>, table: Vec<Vec<f64>>) -> Self {
        Self { id: id.into(), table }
    }

    pub fn utility(&self, action: usize, state: usize) -> f64 {
        self.table[action][state]
    }

    /// Applies `u -> scale * u + shift` to every entry.
    pub fn affine(&self, scale: f64, shift: f64) -> Self {
        Self {
            id: self.id.clone(),
            table: self.table.iter().map(|row| row.iter().map(|u| scale * u + shift).collect()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PreferenceSet {
    pub members: Vec<UtilityModel>,
}

impl PreferenceSet {
    pub fn new(members: Vec<UtilityModel>) -> Self {
        Self { members }
    }

    pub fn singleton(model: UtilityModel) -> Self {
        Self { members: vec![model] }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// A named hard constraint with its pass/fail result for every action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub passes: Vec<bool>,
}

/// Ordinal safety-risk class. Lower ranks are safer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SafetyGrade(pub usize);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafetyGrading {
    /// Grade names from safest to most hazardous, e.g. Low < Moderate < High.
    pub scale: Vec<String>,
    pub grades: Vec<Option<SafetyGrade>>,
}

impl SafetyGrading {
    pub fn name(&self, grade: SafetyGrade) -> &str {
        self.scale.get(grade.0).map(String::as_str).unwrap_or("?")
    }
}

/// One possible result of an [`InformationAction`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub label: String,
    /// Credal vertices still plausible after observing this finding.
    pub retained_vertices: Vec<usize>,
    /// `P(finding | vertex)` for every vertex of the credal set.
    pub likelihood: Vec<f64>,
}

/// A test, question or measurement that narrows the credal set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InformationAction {
    pub id: String,
    pub cost: f64,
    pub findings: Vec<Finding>,
}

/// Tie-break applied when a single ε-class with several members survives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    #[default]
    None,
    MinimaxRegret,
    GammaMaximin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionProblem {
    pub name: String,
    pub states: StateSpace,
    pub actions: ActionSet,
    pub credal: CredalSet,
    pub preferences: PreferenceSet,
    pub constraints: Vec<Constraint>,
    /// Clinical indifference margin, utiles.
    pub epsilon: f64,
    pub info_actions: Vec<InformationAction>,
    pub safety: Option<SafetyGrading>,
    pub tie_break: TieBreak,
    /// Utiles credited per action removed from the survivor set by an
    /// information action.
    pub impact_weight: f64,
}

impl DecisionProblem {
    /// Builds a problem from raw tables with generated identifiers
    /// (`a0, a1, …` for actions, `x0, …` for states). `members[m][a][x]`.
    pub fn from_tables(members: Vec<Vec<Vec<f64>>>, vertices: Vec<Vec<f64>>) -> Self {
        let n_actions = members.first().map_or(0, Vec::len);
        let n_states = vertices
            .first()
            .map(Vec::len)
            .or_else(|| members.first().and_then(|m| m.first()).map(Vec::len))
            .unwrap_or(0);
        let states = (0..n_states).map(|i| State { id: format!("x{i}"), label: format!("x{i}") }).collect();
        let actions = (0..n_actions)
            .map(|i| Action { id: format!("a{i}"), label: format!("a{i}"), attributes: BTreeMap::new() })
            .collect();
        Self {
            name: String::new(),
            states: StateSpace { states },
            actions: ActionSet { actions },
            credal: CredalSet::new(
                vertices.into_iter().enumerate().map(|(i, p)| Belief::named(format!("b{i}"), p)).collect(),
            ),
            preferences: PreferenceSet::new(
                members.into_iter().enumerate().map(|(i, t)| UtilityModel::named(format!("pi{i}"), t)).collect(),
            ),
            constraints: Vec::new(),
            epsilon: 0.0,
            info_actions: Vec::new(),
            safety: None,
            tie_break: TieBreak::None,
            impact_weight: 1.0,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn all_actions(&self) -> Vec<usize> {
        (0..self.actions.len()).collect()
    }

    /// Same problem with every utility mapped through `u -> scale * u + shift`
    /// and ε scaled by `scale`.
    pub fn rescaled(&self, scale: f64, shift: f64) -> Self {
        let mut out = self.clone();
        out.preferences.members = self.preferences.members.iter().map(|m| m.affine(scale, shift)).collect();
        out.epsilon = self.epsilon * scale;
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    EmptyStates,
    EmptyActions,
    DuplicateIdentifier,
    EmptyCredalSet,
    BeliefDimension,
    BeliefNotNormalized,
    EmptyPreferenceSet,
    IncompleteUtilityTable,
    NonFiniteUtility,
    NegativeEpsilon,
    ConstraintCoverage,
    SafetyGrading,
    InformationAction,
    ImpactWeight,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, kind: ViolationKind, message: String) {
        self.violations.push(Violation { kind, message });
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

fn duplicates<'a>(ids: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut dups = Vec::new();
    for id in ids {
        if !seen.insert(id) && !dups.iter().any(|d: &String| d == id) {
            dups.push(id.to_string());
        }
    }
    dups
}

/// Checks every structural invariant of a problem. Violations are returned
/// as data; an empty report means the problem is safe to hand to the
/// dominance, criteria and pipeline modules.
pub fn validate_problem(problem: &DecisionProblem) -> ValidationReport {
    use ViolationKind::*;
    let mut report = ValidationReport::default();
    let n_states = problem.states.len();
    let n_actions = problem.actions.len();

    if n_states == 0 {
        report.push(EmptyStates, "state space is empty".into());
    }
    if n_actions == 0 {
        report.push(EmptyActions, "action set is empty".into());
    }
    for d in duplicates(problem.states.states.iter().map(|s| s.id.as_str())) {
        report.push(DuplicateIdentifier, format!("duplicate state identifier '{d}'"));
    }
    for d in duplicates(problem.actions.actions.iter().map(|a| a.id.as_str())) {
        report.push(DuplicateIdentifier, format!("duplicate action identifier '{d}'"));
    }

    if problem.credal.is_empty() {
        report.push(EmptyCredalSet, "credal set has no vertices".into());
    }
    for (v, belief) in problem.credal.vertices.iter().enumerate() {
        let name = vertex_name(v, belief);
        if belief.probabilities.len() != n_states {
            report.push(
                BeliefDimension,
                format!("vertex {name}: {} probabilities for {n_states} states", belief.probabilities.len()),
            );
        } else if !belief.is_normalized() {
            let sum: f64 = belief.probabilities.iter().sum();
            report.push(
                BeliefNotNormalized,
                format!("vertex {name}: belief not normalized (sum {sum}, entries must be >= 0)"),
            );
        }
    }

    if problem.preferences.is_empty() {
        report.push(EmptyPreferenceSet, "preference set has no members".into());
    }
    for (m, member) in problem.preferences.members.iter().enumerate() {
        let name = if member.id.is_empty() { format!("#{m}") } else { format!("'{}'", member.id) };
        let complete = member.table.len() == n_actions && member.table.iter().all(|row| row.len() == n_states);
        if !complete {
            report.push(IncompleteUtilityTable, format!("member {name}: incomplete utility table"));
        } else if member.table.iter().flatten().any(|u| !u.is_finite()) {
            report.push(NonFiniteUtility, format!("member {name}: non-finite utility value"));
        }
    }

    if !(problem.epsilon >= 0.0 && problem.epsilon.is_finite()) {
        report.push(NegativeEpsilon, format!("epsilon must be finite and >= 0, got {}", problem.epsilon));
    }
    for d in duplicates(problem.constraints.iter().map(|c| c.name.as_str())) {
        report.push(DuplicateIdentifier, format!("duplicate constraint name '{d}'"));
    }
    for c in &problem.constraints {
        if c.passes.len() != n_actions {
            report.push(
                ConstraintCoverage,
                format!("constraint '{}' covers {} of {n_actions} actions", c.name, c.passes.len()),
            );
        }
    }

    if let Some(safety) = &problem.safety {
        if safety.grades.len() != n_actions {
            report.push(SafetyGrading, format!("safety grades cover {} of {n_actions} actions", safety.grades.len()));
        }
        for (a, g) in safety.grades.iter().enumerate() {
            match g {
                None => report.push(SafetyGrading, format!("action #{a} has no safety grade")),
                Some(g) if g.0 >= safety.scale.len() => {
                    report.push(SafetyGrading, format!("action #{a} grade {} outside scale", g.0))
                }
                _ => {}
            }
        }
    }

    let n_vertices = problem.credal.len();
    for u in &problem.info_actions {
        if !(u.cost >= 0.0 && u.cost.is_finite()) {
            report.push(InformationAction, format!("info action '{}': cost must be >= 0", u.id));
        }
        if u.findings.is_empty() {
            report.push(InformationAction, format!("info action '{}': no findings", u.id));
        }
        for f in &u.findings {
            if f.likelihood.len() != n_vertices {
                report.push(
                    InformationAction,
                    format!(
                        "info action '{}' finding '{}': likelihood length {} != {n_vertices} vertices",
                        u.id,
                        f.label,
                        f.likelihood.len()
                    ),
                );
            }
            if f.likelihood.iter().any(|p| !(0.0..=1.0).contains(p)) {
                report.push(
                    InformationAction,
                    format!("info action '{}' finding '{}': likelihood outside [0,1]", u.id, f.label),
                );
            }
            if f.retained_vertices.is_empty() || f.retained_vertices.iter().any(|&v| v >= n_vertices) {
                report.push(
                    InformationAction,
                    format!("info action '{}' finding '{}': invalid retained vertex set", u.id, f.label),
                );
            }
        }
        if u.findings.iter().all(|f| f.likelihood.len() == n_vertices) {
            for v in 0..n_vertices {
                let sum: f64 = u.findings.iter().map(|f| f.likelihood[v]).sum();
                if (sum - 1.0).abs() > TOLERANCE {
                    report.push(
                        InformationAction,
                        format!("info action '{}': finding probabilities under vertex #{v} sum to {sum}", u.id),
                    );
                }
            }
        }
    }
    if !(problem.impact_weight >= 0.0 && problem.impact_weight.is_finite()) {
        report.push(ImpactWeight, "impact weight must be finite and >= 0".into());
    }
    report
}

fn vertex_name(idx: usize, belief: &Belief) -> String {
    if belief.id.is_empty() {
        format!("#{idx}")
    } else {
        format!("'{}'", belief.id)
    }
}

/// `Σ_x b(x) · U(a, x)`.
pub fn expected_utility(action: usize, belief: &Belief, utility: &UtilityModel) -> f64 {
    belief.probabilities.iter().zip(&utility.table[action]).map(|(p, u)| p * u).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EuInterval {
    pub min: f64,
    pub max: f64,
}

/// Range of expected utility of `action` over all (vertex, member) pairs.
pub fn eu_bounds(action: usize, credal: &CredalSet, prefs: &PreferenceSet) -> EuInterval {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for b in &credal.vertices {
        for m in &prefs.members {
            let eu = expected_utility(action, b, m);
            min = min.min(eu);
            max = max.max(eu);
        }
    }
    EuInterval { min, max }
}

/// A (credal vertex, preference member) index pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scenario {
    pub vertex: usize,
    pub member: usize,
}

/// Expected utility of every action under every (vertex, member) pair.
#[derive(Debug, Clone)]
pub struct EuMatrix {
    scenarios: Vec<Scenario>,
    n_actions: usize,
    values: Vec<f64>,
}

impl EuMatrix {
    pub fn new(problem: &DecisionProblem) -> Self {
        let vertices: Vec<usize> = (0..problem.credal.len()).collect();
        Self::over_vertices(problem, &vertices)
    }

    /// Restricts the credal set to the given vertex indices.
    pub fn over_vertices(problem: &DecisionProblem, vertices: &[usize]) -> Self {
        let n_actions = problem.actions.len();
        let mut scenarios = Vec::with_capacity(vertices.len() * problem.preferences.len());
        let mut values = Vec::with_capacity(scenarios.capacity() * n_actions);
        for &vertex in vertices {
            let belief = &problem.credal.vertices[vertex];
            for (member, model) in problem.preferences.members.iter().enumerate() {
                scenarios.push(Scenario { vertex, member });
                values.extend((0..n_actions).map(|a| expected_utility(a, belief, model)));
            }
        }
        Self { scenarios, n_actions, values }
    }

    pub fn scenarios(&self) -> &[Scenario] {
        &self.scenarios
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn eu(&self, scenario: usize, action: usize) -> f64 {
        self.values[scenario * self.n_actions + action]
    }

    /// `EU(a) - EU(b)` under every scenario.
    pub fn gaps(&self, a: usize, b: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.scenarios.len()).map(move |s| self.eu(s, a) - self.eu(s, b))
    }

    pub fn worst_case(&self, action: usize) -> f64 {
        (0..self.scenarios.len()).map(|s| self.eu(s, action)).fold(f64::INFINITY, f64::min)
    }

    pub fn best_case(&self, action: usize) -> f64 {
        (0..self.scenarios.len()).map(|s| self.eu(s, action)).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Indices among `actions` whose score is within [`TOLERANCE`] of the best.
pub(crate) fn argmax_set(actions: &[usize], score: impl Fn(usize) -> f64) -> (Vec<usize>, f64) {
    let best = actions.iter().map(|&a| score(a)).fold(f64::NEG_INFINITY, f64::max);
    let winners = actions.iter().copied().filter(|&a| score(a) >= best - TOLERANCE).collect();
    (winners, best)
}
