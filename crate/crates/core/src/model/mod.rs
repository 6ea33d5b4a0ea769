//! Domain types, the on-disk model document, and validation.

mod document;
mod types;
mod validate;

pub use document::{parse_document, parse_model, serialize_model, ModelError, FORMAT};
pub use types::*;
pub use validate::{rules, validate, Finding, Severity, ValidationReport};
