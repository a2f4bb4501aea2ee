//! Index tables for one arm of a model file.

use ratiobandit::gittins::{elimination_indices, restart_indices, IndexMethod};
use ratiobandit::model::Arm;

use crate::csv;
use crate::error::CliResult;

#[derive(Debug, Clone, PartialEq)]
pub struct IndexRow {
    pub state: usize,
    pub label: String,
    pub index: f64,
}

pub fn compute(arm: &Arm, method: IndexMethod) -> CliResult<Vec<IndexRow>> {
    let g = match method {
        IndexMethod::Elimination => elimination_indices(arm.active())?,
        IndexMethod::Restart => restart_indices(arm.active())?,
    };
    let src = arm.active_source();
    Ok(g
        .into_iter()
        .enumerate()
        .map(|(state, index)| IndexRow {
            state,
            label: src.label(state),
            index,
        })
        .collect())
}

/// CSV with header `state,label,index`, indices at fixed `precision`.
pub fn render(rows: &[IndexRow], precision: usize) -> String {
    let mut out = String::new();
    csv::push_row(&mut out, &["state", "label", "index"]);
    for r in rows {
        csv::push_row(&mut out, &[r.state.to_string(), r.label.clone(), format!("{:.*}", precision, r.index)]);
    }
    out
}

/// Largest disagreement between the two methods over all states.
pub fn max_method_gap(arm: &Arm) -> CliResult<f64> {
    let a = elimination_indices(arm.active())?;
    let b = restart_indices(arm.active())?;
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ratiobandit::fixtures;

    #[test]
    fn link_table() {
        let arm = &fixtures::handover_arms()[1];
        let text = render(&compute(arm, IndexMethod::Elimination).unwrap(), 2);
        assert_eq!(text, "state,label,index\n0,6,0.48\n1,7,2.32\n2,8,4.00\n");
    }

    #[test]
    fn methods_agree_on_full_chain() {
        let arm = &fixtures::handover_arms()[0];
        assert!(max_method_gap(arm).unwrap() < 1e-9);
        let rows = compute(arm, IndexMethod::Restart).unwrap();
        assert_eq!(format!("{:.8}", rows[3].index), "2.18635297");
    }
}
