//! Monte Carlo rollouts of a stationary policy on a product bandit.
//!
//! Each step accrues the joint `R` and `D` of the chosen action (sojourns are
//! their expected values, switching delay included), then every arm draws
//! its own survival and successor from its substochastic row: the active
//! chain for the chosen arm, the passive chain for the rest. The process ends
//! as soon as any arm terminates, which is exactly the joint row mass
//! missing from the Kronecker product.
//!
//! The ratio estimate is `mean(ΣR) / mean(ΣD)` (ratio of means); its
//! standard error comes from the delta method.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bandit::ProductMdp;
use crate::error::{Error, Result};
use crate::model::{DiscountedChain, InitialDistribution};
use crate::rng::{derive_rng, DOMAIN_ROLLOUT};

/// Rollouts still running after this many steps are abandoned.
pub const MAX_STEPS: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RolloutResult {
    pub total_reward: f64,
    pub total_time: f64,
    pub terminated: bool,
    pub steps: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    /// Infinite for a single run.
    pub std_error: f64,
    pub runs: usize,
}

/// Index sampled from the (possibly substochastic) weights; `None` is the
/// leftover mass.
fn sample(weights: &[f64], rng: &mut impl Rng) -> Option<usize> {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (k, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return Some(k);
        }
    }
    None
}

fn check_policy(product: &ProductMdp, policy: &[usize], alpha: &InitialDistribution) -> Result<()> {
    let n = product.n();
    if policy.len() != n || alpha.n() != n {
        return Err(Error::Shape(format!(
            "policy has {} entries and alpha {} for {n} joint states",
            policy.len(),
            alpha.n()
        )));
    }
    if let Some(s) = policy.iter().position(|&j| j >= product.a()) {
        return Err(Error::InvalidArgument(format!("policy picks arm {} in state {s}", policy[s])));
    }
    Ok(())
}

/// One rollout driven by `rng`.
pub fn rollout_with(
    product: &ProductMdp,
    policy: &[usize],
    alpha: &InitialDistribution,
    rng: &mut impl Rng,
) -> Result<RolloutResult> {
    check_policy(product, policy, alpha)?;
    let codec = product.codec();
    let arms = product.arms();
    // Falling past the end only happens through rounding in alpha.
    let start = sample(alpha.as_slice(), rng)
        .or_else(|| alpha.as_slice().iter().rposition(|&a| a > 0.0))
        .expect("alpha has positive mass");
    let (mut locals, _) = codec.decode(start);
    let mut state = start;
    let mut out = RolloutResult {
        total_reward: 0.0,
        total_time: 0.0,
        terminated: false,
        steps: 0,
    };
    while out.steps < MAX_STEPS {
        let j = policy[state];
        let alt = &product.alternatives()[j];
        out.total_reward += alt.r()[state];
        out.total_time += alt.d()[state];
        out.steps += 1;
        let mut alive = true;
        for (i, arm) in arms.iter().enumerate() {
            let chain: &DiscountedChain = if i == j { arm.active() } else { arm.passive() };
            match sample(chain.p().row(locals[i]), rng) {
                Some(next) => locals[i] = next,
                None => alive = false,
            }
        }
        if !alive {
            out.terminated = true;
            return Ok(out);
        }
        state = codec.encode(&locals, j);
    }
    Err(Error::HorizonExceeded(MAX_STEPS))
}

/// One rollout seeded by `seed`.
pub fn rollout(product: &ProductMdp, policy: &[usize], alpha: &InitialDistribution, seed: u64) -> Result<RolloutResult> {
    rollout_with(product, policy, alpha, &mut run_rng(seed, 0))
}

fn run_rng(seed: u64, run: u64) -> ChaCha8Rng {
    derive_rng(seed, DOMAIN_ROLLOUT, run)
}

/// Ratio-of-means estimate over `n_runs` rollouts. Run `k` uses its own
/// stream, so the result does not depend on thread scheduling.
pub fn mc_ratio(
    product: &ProductMdp,
    policy: &[usize],
    alpha: &InitialDistribution,
    seed: u64,
    n_runs: usize,
) -> Result<McEstimate> {
    if n_runs == 0 {
        return Err(Error::InvalidArgument("at least one run is required".into()));
    }
    check_policy(product, policy, alpha)?;
    let runs = (0..n_runs as u64)
        .into_par_iter()
        .map(|k| rollout_with(product, policy, alpha, &mut run_rng(seed, k)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ratio_of_means(&runs))
}

/// Ratio-of-means estimate with delta-method standard error.
pub fn ratio_of_means(runs: &[RolloutResult]) -> McEstimate {
    let n = runs.len() as f64;
    let mean_r = runs.iter().map(|r| r.total_reward).sum::<f64>() / n;
    let mean_d = runs.iter().map(|r| r.total_time).sum::<f64>() / n;
    let estimate = mean_r / mean_d;
    let std_error = if runs.len() < 2 {
        f64::INFINITY
    } else {
        let ss: f64 = runs
            .iter()
            .map(|r| (r.total_reward - estimate * r.total_time).powi(2))
            .sum();
        (ss / (n * (n - 1.0))).sqrt() / mean_d
    };
    McEstimate {
        estimate,
        std_error,
        runs: runs.len(),
    }
}
