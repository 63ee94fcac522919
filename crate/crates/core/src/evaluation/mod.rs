//! Decision-centric evaluation: net benefit and decision curves,
//! perturbation flip rates, coverage and size of set-valued outputs, and a
//! brute-force reference implementation of the decision layer for small
//! instances.

mod metrics;
mod oracle;
mod perturb;

pub use metrics::{
    decision_curve, net_benefit, net_benefit_from_counts, set_metrics, ClassifiedCohort, DecisionCurveRow, SetMetrics,
    SetValuedRecord,
};
pub use oracle::{oracle_admissible, oracle_admissible_within, OracleBounds, OracleRecommendation, OracleReport};
pub use perturb::{flip_rate, perturb, FlipRate, PerturbationFamily, PerturbationKind};
