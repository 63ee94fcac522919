//! Robust ordinal decision layer.
//!
//! Actions are filtered through hard constraints, an ordinal safety screen
//! and ε-dominance evaluated across a finite credal set of beliefs and a
//! finite set of plausible utility models. What survives is either a single
//! defensible action, a request for information worth its cost, or an
//! explicitly set-valued answer. Alongside sit the non-compensatory
//! heuristics (screens, Take-The-Best, fast-and-frugal trees, SPRT) and
//! decision-centric evaluation metrics.

// Negated float comparisons are used deliberately so NaN fails checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod criteria;
pub mod dominance;
pub mod error;
pub mod evaluation;
pub mod heuristics;
pub mod model;
pub mod pipeline;
pub mod scenario;

pub use error::{DecisionError, Result};
pub use model::*;
