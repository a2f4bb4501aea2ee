//! Seeded random handover-like bandit models.
//!
//! Each arm has `h` handover states followed by `n − h` link states.
//! Handover states carry no payload, have short sojourns and never loop on
//! themselves; every handover row reaches the link block with probability
//! `U(0.6, 0.95)` and backs off to other handover states with the rest. The
//! link block is closed, with self-loops allowed. Transition weights are
//! uniform draws multiplied by a random structural mask and normalized.
//!
//! Termination `1 − beta` is drawn from `U(mean − w, mean + w)`, using the
//! failure mean on handover states and the loss mean on link states. Link
//! payloads are log-uniform on `[0.1, 10]`; sojourns are log-uniform on
//! `[0.1, 1]` (handover) and `[0.5, 5]` (link). Passive chains are frozen.
//!
//! Every model starts with arm 0 in its first link state, all other arms
//! in state 0, and arm 0 regarded as active.
//!
//! Draws come from [`derive_rng`](crate::rng::derive_rng) with the model
//! index as the stream, so a model depends only on `(seed, index)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bandit::{BanditModel, InitialState};
use crate::error::{Error, Result};
use crate::model::{Arm, SemiMarkovChain};
use crate::numerics::Matrix;
use crate::rng::{derive_rng, DOMAIN_MODELGEN};

/// Upper end of the switching-cost range, as a fraction of the mean
/// handover sojourn.
pub const MAX_SWITCH_COST: f64 = 4.0 / 3.0;

const HANDOVER_KEEP: f64 = 0.7;
const LINK_KEEP: f64 = 0.8;
const LINK_MASS: (f64, f64) = (0.6, 0.95);
const LINK_REWARD: (f64, f64) = (0.1, 10.0);
const HANDOVER_SOJOURN: (f64, f64) = (0.1, 1.0);
const LINK_SOJOURN: (f64, f64) = (0.5, 5.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub seed: u64,
    pub count: usize,
    pub n_states: usize,
    pub n_arms: usize,
    #[serde(default = "default_prob_mean")]
    pub failure_prob_mean: f64,
    #[serde(default = "default_prob_mean")]
    pub loss_prob_mean: f64,
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    #[serde(default = "default_switch_cost_grid")]
    pub switch_cost_grid: Vec<f64>,
    #[serde(default = "default_handover_fraction")]
    pub handover_fraction: f64,
}

fn default_prob_mean() -> f64 {
    0.05
}

fn default_half_width() -> f64 {
    0.03
}

fn default_handover_fraction() -> f64 {
    0.5
}

/// Nine evenly spaced points from 0 to 4/3.
pub fn default_switch_cost_grid() -> Vec<f64> {
    (0..9).map(|k| MAX_SWITCH_COST * k as f64 / 8.0).collect()
}

impl EnsembleSpec {
    pub fn new(seed: u64, count: usize, n_states: usize, n_arms: usize) -> Self {
        Self {
            seed,
            count,
            n_states,
            n_arms,
            failure_prob_mean: default_prob_mean(),
            loss_prob_mean: default_prob_mean(),
            half_width: default_half_width(),
            switch_cost_grid: default_switch_cost_grid(),
            handover_fraction: default_handover_fraction(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.n_states < 2 {
            return bad(format!("n_states = {}; handover and link blocks need at least 2", self.n_states));
        }
        if self.n_arms < 1 {
            return bad("n_arms must be at least 1".into());
        }
        for (name, mean) in [("failure_prob_mean", self.failure_prob_mean), ("loss_prob_mean", self.loss_prob_mean)] {
            let (lo, hi) = (mean - self.half_width, mean + self.half_width);
            if !(lo > 0.0 && hi < 1.0) {
                return bad(format!("{name} {mean} with half width {} leaves (0, 1)", self.half_width));
            }
        }
        if !(self.half_width >= 0.0) {
            return bad(format!("half_width {} is negative", self.half_width));
        }
        if !(self.handover_fraction > 0.0 && self.handover_fraction < 1.0) {
            return bad(format!("handover_fraction {} outside (0, 1)", self.handover_fraction));
        }
        if let Some(k) = self.switch_cost_grid.iter().find(|k| !(0.0..=MAX_SWITCH_COST).contains(*k)) {
            return bad(format!("switch cost {k} outside [0, 4/3]"));
        }
        Ok(())
    }

    /// Number of handover states per arm.
    pub fn handover_states(&self) -> usize {
        let h = (self.n_states as f64 * self.handover_fraction).round() as usize;
        h.clamp(1, self.n_states - 1)
    }
}

fn log_uniform(rng: &mut impl Rng, (lo, hi): (f64, f64)) -> f64 {
    rng.gen_range(lo.ln()..=hi.ln()).exp()
}

/// Masked uniform weights over `targets`; at least one weight is positive.
fn masked_weights(rng: &mut impl Rng, targets: usize, keep: f64) -> Vec<f64> {
    let mut w: Vec<f64> = (0..targets)
        .map(|_| {
            let v: f64 = rng.gen_range(0.01..1.0);
            if rng.gen_bool(keep) {
                v
            } else {
                0.0
            }
        })
        .collect();
    if targets > 0 && w.iter().all(|&v| v == 0.0) {
        let k = rng.gen_range(0..targets);
        w[k] = rng.gen_range(0.01..1.0);
    }
    w
}

fn scaled(w: &[f64], mass: f64) -> impl Iterator<Item = f64> + '_ {
    let total: f64 = w.iter().sum();
    w.iter().map(move |v| v * mass / total)
}

fn termination(rng: &mut impl Rng, mean: f64, half_width: f64) -> f64 {
    if half_width == 0.0 {
        mean
    } else {
        rng.gen_range(mean - half_width..=mean + half_width)
    }
}

/// One arm's active chain.
pub fn random_handover_chain(rng: &mut impl Rng, spec: &EnsembleSpec) -> SemiMarkovChain {
    let n = spec.n_states;
    let h = spec.handover_states();
    let l = n - h;
    let mut p = Matrix::zeros(n, n);
    let mut beta = Vec::with_capacity(n);
    let mut r = Vec::with_capacity(n);
    let mut d = Vec::with_capacity(n);

    for i in 0..h {
        let back = masked_weights(rng, h - 1, HANDOVER_KEEP);
        let link = masked_weights(rng, l, HANDOVER_KEEP);
        let link_mass = if back.iter().any(|&v| v > 0.0) {
            rng.gen_range(LINK_MASS.0..LINK_MASS.1)
        } else {
            1.0
        };
        let row = p.row_mut(i);
        // Back-off targets skip the state itself.
        let others = (0..h).filter(|&k| k != i);
        for (k, v) in others.zip(scaled(&back, 1.0 - link_mass)) {
            row[k] = v;
        }
        for (k, v) in scaled(&link, link_mass).enumerate() {
            row[h + k] = v;
        }
        beta.push(1.0 - termination(rng, spec.failure_prob_mean, spec.half_width));
        r.push(0.0);
        d.push(log_uniform(rng, HANDOVER_SOJOURN));
    }
    for i in h..n {
        let w = masked_weights(rng, l, LINK_KEEP);
        let row = p.row_mut(i);
        for (k, v) in scaled(&w, 1.0).enumerate() {
            row[h + k] = v;
        }
        beta.push(1.0 - termination(rng, spec.loss_prob_mean, spec.half_width));
        r.push(log_uniform(rng, LINK_REWARD));
        d.push(log_uniform(rng, LINK_SOJOURN));
    }
    SemiMarkovChain::new(p, beta, r, d).expect("shapes agree by construction")
}

/// Model `model_index` of the ensemble, with zero switching delay.
pub fn generate_model(spec: &EnsembleSpec, model_index: usize) -> Result<BanditModel> {
    spec.validate()?;
    let mut rng = derive_rng(spec.seed, DOMAIN_MODELGEN, model_index as u64);
    let arms = (0..spec.n_arms)
        .map(|_| Arm::restful(random_handover_chain(&mut rng, spec)))
        .collect::<Result<Vec<_>>>()?;
    let mut states = vec![0; spec.n_arms];
    states[0] = spec.handover_states();
    BanditModel::new(arms, 0.0, InitialState::ArmStates { states, active: 0 })
}

pub fn generate_ensemble(spec: &EnsembleSpec) -> Result<Vec<BanditModel>> {
    (0..spec.count).map(|k| generate_model(spec, k)).collect()
}

/// Mean active sojourn over the zero-payload (handover) states of all arms.
pub fn handover_mean_sojourn(model: &BanditModel) -> Option<f64> {
    let (sum, count) = model
        .arms()
        .iter()
        .flat_map(|arm| {
            let src = arm.active_source();
            src.r().iter().zip(src.d()).filter(|(r, _)| **r == 0.0).map(|(_, d)| *d).collect::<Vec<_>>()
        })
        .fold((0.0, 0usize), |(s, c), d| (s + d, c + 1));
    (count > 0).then(|| sum / count as f64)
}

/// Switching delay for cost fraction `kappa`.
pub fn switch_delay_for(model: &BanditModel, kappa: f64) -> Result<f64> {
    handover_mean_sojourn(model)
        .map(|m| kappa * m)
        .ok_or_else(|| Error::InvalidArgument("model has no zero-payload handover states".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed_and_index() {
        let spec = EnsembleSpec::new(11, 4, 6, 2);
        assert_eq!(generate_model(&spec, 3).unwrap(), generate_model(&spec, 3).unwrap());
        assert_ne!(generate_model(&spec, 2).unwrap(), generate_model(&spec, 3).unwrap());
        assert_eq!(generate_ensemble(&spec).unwrap()[3], generate_model(&spec, 3).unwrap());
    }

    #[test]
    fn shapes_and_structure() {
        let spec = EnsembleSpec::new(5, 100, 6, 2);
        let models = generate_ensemble(&spec).unwrap();
        assert_eq!(models.len(), 100);
        for model in &models {
            assert_eq!(model.num_arms(), 2);
            assert!(model.is_restful());
            for arm in model.arms() {
                let c = arm.active_source();
                assert_eq!(c.n(), 6);
                assert!(c.validate().is_ok(), "{}", c.validate());
                for i in 0..3 {
                    assert_eq!(c.r()[i], 0.0);
                    assert_eq!(c.p()[(i, i)], 0.0);
                    assert!((3..6).any(|j| c.p()[(i, j)] > 0.0));
                }
                for i in 3..6 {
                    assert!(c.r()[i] > 0.0);
                    assert!((0..3).all(|j| c.p()[(i, j)] == 0.0));
                }
            }
            assert_eq!(model.initial(), &InitialState::ArmStates { states: vec![3, 0], active: 0 });
        }
    }

    #[test]
    fn mean_handover_failure_matches_target() {
        let spec = EnsembleSpec::new(2024, 1000, 6, 2);
        let models = generate_ensemble(&spec).unwrap();
        let failures: Vec<f64> = models
            .iter()
            .flat_map(|m| m.arms().iter().flat_map(|a| a.active_source().beta()[..3].iter().map(|b| 1.0 - b)).collect::<Vec<_>>())
            .collect();
        let mean = failures.iter().sum::<f64>() / failures.len() as f64;
        assert!((mean - 0.05).abs() <= 0.01, "{mean}");
    }

    #[test]
    fn seeds_differ() {
        let a = generate_ensemble(&EnsembleSpec::new(1, 3, 4, 3)).unwrap();
        let b = generate_ensemble(&EnsembleSpec::new(2, 3, 4, 3)).unwrap();
        assert_ne!(a, b);
        assert!(generate_ensemble(&EnsembleSpec::new(1, 0, 4, 3)).unwrap().is_empty());
    }

    #[test]
    fn handover_counts() {
        assert_eq!(EnsembleSpec::new(0, 1, 6, 2).handover_states(), 3);
        assert_eq!(EnsembleSpec::new(0, 1, 4, 3).handover_states(), 2);
        assert_eq!(EnsembleSpec::new(0, 1, 2, 1).handover_states(), 1);
    }

    #[test]
    fn spec_checks() {
        let mut spec = EnsembleSpec::new(0, 1, 6, 2);
        spec.switch_cost_grid = vec![0.0, 1.5];
        assert!(spec.validate().is_err());
        let mut spec = EnsembleSpec::new(0, 1, 6, 2);
        spec.failure_prob_mean = 0.01;
        assert!(spec.validate().is_err());
        assert!(EnsembleSpec::new(0, 1, 1, 2).validate().is_err());
        assert_eq!(default_switch_cost_grid().last().copied(), Some(MAX_SWITCH_COST));
    }

    #[test]
    fn delay_scales_with_handover_sojourn() {
        let model = generate_model(&EnsembleSpec::new(9, 1, 6, 2), 0).unwrap();
        let mean = handover_mean_sojourn(&model).unwrap();
        assert!((0.1..=1.0).contains(&mean));
        assert_eq!(switch_delay_for(&model, 0.5).unwrap(), 0.5 * mean);
    }

    #[test]
    fn spec_json_defaults() {
        let spec: EnsembleSpec = serde_json::from_str(r#"{"seed": 1, "count": 2, "n_states": 4, "n_arms": 3}"#).unwrap();
        assert_eq!(spec, EnsembleSpec::new(1, 2, 4, 3));
    }
}
