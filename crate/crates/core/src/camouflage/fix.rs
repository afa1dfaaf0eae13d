//! Pairwise fix table for the function-preserving and appearance-mimicking
//! phases.

use serde::{Deserialize, Serialize};

use crate::aig::EdgeState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    #[serde(rename = "functional")]
    Functional,
    #[serde(rename = "appearance")]
    Appearance,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FixAction {
    #[serde(rename = "N/A")]
    Na,
    #[serde(rename = "CONNECT")]
    Connect,
    #[serde(rename = "INSERT_INV")]
    InsertInv,
    #[serde(rename = "FI")]
    Fi,
    #[serde(rename = "FB")]
    Fb,
    #[serde(rename = "UT_A")]
    UtA,
    #[serde(rename = "UT_B")]
    UtB,
}

/// Parses a two-bit `conn inv` code; `01` means no connection.
pub fn state_from_code(code: &str) -> Option<EdgeState> {
    match code {
        "00" | "01" => Some(EdgeState::None),
        "10" => Some(EdgeState::Plain),
        "11" => Some(EdgeState::Inverted),
        _ => None,
    }
}

/// Action for a node pair given the state in the decoded graph (or the
/// function-preserved graph in the appearance phase) and the target state.
pub fn fix_lookup(phase: Phase, current: EdgeState, target: EdgeState) -> FixAction {
    use EdgeState::{Inverted as I, None as N, Plain as P};
    use FixAction::*;
    match phase {
        Phase::Functional => match (current, target) {
            (N, P) => Connect,
            (N, I) => InsertInv,
            (P, N) => Fb,
            (P, I) => UtB,
            (I, N) => Fi,
            (I, P) => UtA,
            _ => Na,
        },
        Phase::Appearance => match (current, target) {
            (N, P) => Fb,
            (N, I) => Fi,
            (P, I) => UtA,
            (I, P) => UtB,
            _ => Na,
        },
    }
}
