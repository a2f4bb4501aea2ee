//! Seeded inputs shared by the benchmarks.

use ratiobandit::bandit::{assemble, product_alpha, ProductMdp, DEFAULT_STATE_CAP};
use ratiobandit::model::{DiscountedChain, InitialDistribution};
use ratiobandit::modelgen::{generate_model, switch_delay_for, EnsembleSpec};
use ratiobandit::ratiomdp::RatioMdp;
use ratiobandit::testkit::{random_discounted, random_mdp, seeded};

pub fn chain(n: usize) -> DiscountedChain {
    random_discounted(&mut seeded(n as u64), n)
}

pub fn mdp(n: usize, a: usize) -> RatioMdp {
    random_mdp(&mut seeded((n * 31 + a) as u64), n, a)
}

/// Product of ensemble model 0 with switching cost `kappa`, and its start.
pub fn bandit(n_states: usize, n_arms: usize, kappa: f64) -> (ProductMdp, InitialDistribution) {
    let spec = EnsembleSpec::new(1, 1, n_states, n_arms);
    let model = generate_model(&spec, 0).expect("valid spec");
    let model = model
        .with_switch_delay(switch_delay_for(&model, kappa).expect("delay"))
        .expect("valid delay");
    let product = assemble(&model, DEFAULT_STATE_CAP).expect("under cap");
    let alpha = product_alpha(&product, model.initial()).expect("valid start");
    (product, alpha)
}
