//! Quantified goal models: parsing, validation, contribution propagation,
//! stakeholder valuation, Monte-Carlo uncertainty, duplicate detection and
//! layered drawing.

pub mod canonical;
pub mod fixtures;
pub mod interp;
pub mod layout;
pub mod model;
pub mod propagation;
pub mod reuse;
pub mod uncertainty;
pub mod valuation;

pub use canonical::to_canonical_string;
pub use model::{parse_model, serialize_model, validate, GoalGraph};
pub use propagation::{propagate, PropagationResult, Scenario};
