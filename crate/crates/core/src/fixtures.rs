//! The nine-state handover example: entry states 0–2 (weak/medium/strong
//! signal), ongoing handover with back-off in 3–5, and an established link
//! with fluctuating signal in 6–8.

use crate::model::{closed_component, Arm, SemiMarkovChain};
use crate::numerics::Matrix;

pub const HANDOVER_P: [[f64; 9]; 9] = [
    [0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
    [0.1, 0.05, 0.0, 0.0, 0.0, 0.0, 0.05, 0.55, 0.25],
    [0.05, 0.1, 0.05, 0.0, 0.0, 0.0, 0.2, 0.45, 0.15],
    [0.0, 0.05, 0.1, 0.0, 0.0, 0.0, 0.65, 0.15, 0.05],
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.55, 0.45, 0.0],
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.55, 0.25, 0.2],
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.6, 0.4],
];
pub const HANDOVER_BETA: [f64; 9] = [1.0, 1.0, 1.0, 0.99, 0.9, 0.8, 0.9, 0.95, 0.99];
pub const HANDOVER_R: [f64; 9] = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.1, 1.0, 10.0];
pub const HANDOVER_D: [f64; 9] = [0.1, 0.1, 0.1, 1.0, 1.0, 1.0, 5.0, 1.0, 2.5];

/// Link states of the handover chain.
pub const LINK_STATES: [usize; 3] = [6, 7, 8];

pub fn handover_chain() -> SemiMarkovChain {
    SemiMarkovChain::new(
        Matrix::from_rows(&HANDOVER_P).expect("static matrix"),
        HANDOVER_BETA.to_vec(),
        HANDOVER_R.to_vec(),
        HANDOVER_D.to_vec(),
    )
    .and_then(|c| c.with_labels((0..9).map(|i| i.to_string()).collect()))
    .expect("static chain")
}

/// Closed link component `{6, 7, 8}` of [`handover_chain`].
pub fn link_chain() -> SemiMarkovChain {
    closed_component(&handover_chain(), &LINK_STATES).expect("link block is closed")
}

/// Two restful arms: the full handover chain and the retained link.
pub fn handover_arms() -> Vec<Arm> {
    vec![
        Arm::restful(handover_chain()).expect("valid").named("full"),
        Arm::restful(link_chain()).expect("valid").named("link"),
    ]
}
