//! Monte Carlo check of a policy's exact ratio.

use ratiobandit::bandit::{assemble, evaluate_on_product, index_policy_on_product, product_alpha, solve_restless_optimum, BanditModel};
use ratiobandit::gittins::index_table;
use ratiobandit::sim::mc_ratio;

use crate::error::CliResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyChoice {
    Index,
    Optimal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationReport {
    pub exact: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub z: f64,
    pub runs: usize,
}

/// Differences below this relative size count as exact agreement.
const AGREEMENT_RTOL: f64 = 1e-12;

pub fn z_score(estimate: f64, exact: f64, std_error: f64) -> f64 {
    let diff = estimate - exact;
    if diff.abs() <= AGREEMENT_RTOL * exact.abs().max(1.0) {
        0.0
    } else {
        diff / std_error
    }
}

pub fn run(model: &BanditModel, policy: PolicyChoice, runs: usize, seed: u64, cap: usize) -> CliResult<SimulationReport> {
    let product = assemble(model, cap)?;
    let alpha = product_alpha(&product, model.initial())?;
    let pi = match policy {
        PolicyChoice::Index => index_policy_on_product(&product, &index_table(model.arms())?),
        PolicyChoice::Optimal => solve_restless_optimum(&product, &alpha)?.pi,
    };
    let exact = evaluate_on_product(&product, &pi, &alpha)?.ratio;
    let est = mc_ratio(&product, &pi, &alpha, seed, runs)?;
    Ok(SimulationReport {
        exact,
        estimate: est.estimate,
        std_error: est.std_error,
        z: z_score(est.estimate, exact, est.std_error),
        runs,
    })
}

pub fn render(r: &SimulationReport) -> String {
    format!(
        "runs: {}\nexact: {}\nestimate: {}\nstd error: {}\nz: {}\n",
        r.runs, r.exact, r.estimate, r.std_error, r.z
    )
}
