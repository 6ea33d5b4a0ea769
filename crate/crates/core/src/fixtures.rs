//! The digital-signage example model and two variants, bundled for tests,
//! demos and the `--example` CLI flag.

use crate::model::{parse_model, GoalGraph};

/// Four nodes (T1, G1, G2, G4), three links, profiles Normal and Promo.
pub const SIGNAGE: &str = include_str!("../fixtures/signage.json");

/// T1 replaced by `T1nfr`, a task with a level on [0, 50] that sets G1 one to one.
pub const SIGNAGE_NFR: &str = include_str!("../fixtures/signage-nfr.json");

/// T1's To-Be delta on G1 as a three-point estimate (-22, -18, -14).
pub const SIGNAGE_TRIANGULAR: &str = include_str!("../fixtures/signage-triangular.json");

pub fn signage() -> GoalGraph {
    parse_model(SIGNAGE).expect("bundled fixture parses")
}

pub fn signage_nfr() -> GoalGraph {
    parse_model(SIGNAGE_NFR).expect("bundled fixture parses")
}

pub fn signage_triangular() -> GoalGraph {
    parse_model(SIGNAGE_TRIANGULAR).expect("bundled fixture parses")
}
