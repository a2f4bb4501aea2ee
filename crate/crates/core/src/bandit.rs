//! Multiarmed bandits as a product ratio MDP.
//!
//! With `m` arms the joint state is the tuple of local states (arm 0 is the
//! most significant digit). Action `j` activates arm `j`: its active chain
//! moves while every other arm follows its passive chain, so
//! `P̂⁽ʲ⁾ = ⊗ᵢ Pbarᵢ` with `Pbarᵢ` active for `i = j` and passive otherwise.
//! Rewards and sojourns add up across arms, each lifted to the joint space
//! by all-ones Kronecker factors; passive arms therefore contribute their
//! own (unit, by default) sojourn.
//!
//! A switching delay is modelled by appending the previously active arm as
//! the least significant digit: action `j` from a state whose previous arm
//! differs pays the delay on top of the sojourn and records `j`.

use crate::error::{Error, Result};
use crate::gittins::{self, IndexTable};
use crate::model::{Arm, DiscountedChain, InitialDistribution};
use crate::numerics::{kron_vec, Matrix};
use crate::ratiomdp::{self, PolicyValue, RatioMdp, RatioSolution, TIE_RTOL};

/// Default limit on the number of joint states.
pub const DEFAULT_STATE_CAP: usize = 10_000;
/// Deviations smaller than this in magnitude are reported as zero.
pub const DEVIATION_CLAMP: f64 = 1e-12;

/// Where the bandit starts. `active` is the arm regarded as previously
/// active, which only matters under a switching delay.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    ArmStates { states: Vec<usize>, active: usize },
    /// Distribution over the joint local states (no previous-arm digit).
    Joint { alpha: Vec<f64>, active: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BanditModel {
    arms: Vec<Arm>,
    switch_delay: f64,
    initial: InitialState,
}

impl BanditModel {
    pub fn new(arms: Vec<Arm>, switch_delay: f64, initial: InitialState) -> Result<Self> {
        if arms.is_empty() {
            return Err(Error::InvalidArgument("a bandit needs at least one arm".into()));
        }
        if !(switch_delay >= 0.0 && switch_delay.is_finite()) {
            return Err(Error::InvalidArgument(format!("switch delay {switch_delay} is not a finite non-negative time")));
        }
        let m = arms.len();
        let active = match &initial {
            InitialState::ArmStates { states, active } => {
                if states.len() != m {
                    return Err(Error::Shape(format!("{} initial arm states for {m} arms", states.len())));
                }
                if let Some(k) = (0..m).find(|&k| states[k] >= arms[k].n()) {
                    return Err(Error::InvalidArgument(format!(
                        "initial state {} of arm {k} out of range for {} states",
                        states[k],
                        arms[k].n()
                    )));
                }
                *active
            }
            InitialState::Joint { alpha, active } => {
                let n: usize = arms.iter().map(Arm::n).product();
                if alpha.len() != n {
                    return Err(Error::Shape(format!("joint alpha has {} entries for {n} joint states", alpha.len())));
                }
                InitialDistribution::new(alpha.clone())?;
                *active
            }
        };
        if active >= m {
            return Err(Error::InvalidArgument(format!("initial active arm {active} out of range for {m} arms")));
        }
        Ok(Self { arms, switch_delay, initial })
    }

    /// All arms start in local state 0 with arm 0 active.
    pub fn at_origin(arms: Vec<Arm>, switch_delay: f64) -> Result<Self> {
        let states = vec![0; arms.len()];
        Self::new(arms, switch_delay, InitialState::ArmStates { states, active: 0 })
    }

    pub fn arms(&self) -> &[Arm] {
        &self.arms
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn switch_delay(&self) -> f64 {
        self.switch_delay
    }

    pub fn initial(&self) -> &InitialState {
        &self.initial
    }

    pub fn with_switch_delay(&self, switch_delay: f64) -> Result<Self> {
        Self::new(self.arms.clone(), switch_delay, self.initial.clone())
    }

    pub fn with_initial(&self, initial: InitialState) -> Result<Self> {
        Self::new(self.arms.clone(), self.switch_delay, initial)
    }

    pub fn is_restful(&self) -> bool {
        self.arms.iter().all(Arm::has_identity_passive)
    }
}

/// Bijection between joint state numbers and (local states, previous arm).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateCodec {
    sizes: Vec<usize>,
    switching: bool,
}

impl StateCodec {
    pub fn new(sizes: Vec<usize>, switching: bool) -> Self {
        Self { sizes, switching }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn num_arms(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_switching(&self) -> bool {
        self.switching
    }

    /// Number of joint local-state tuples, `∏ nᵢ`.
    pub fn num_local(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn len(&self) -> usize {
        self.num_local() * if self.switching { self.num_arms() } else { 1 }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn local_index(&self, locals: &[usize]) -> usize {
        debug_assert_eq!(locals.len(), self.sizes.len());
        locals
            .iter()
            .zip(&self.sizes)
            .fold(0, |acc, (&x, &n)| acc * n + x)
    }

    /// `prev` is ignored without switching.
    pub fn encode(&self, locals: &[usize], prev: usize) -> usize {
        let x = self.local_index(locals);
        if self.switching {
            x * self.num_arms() + prev
        } else {
            x
        }
    }

    pub fn decode(&self, index: usize) -> (Vec<usize>, Option<usize>) {
        let (mut x, prev) = if self.switching {
            (index / self.num_arms(), Some(index % self.num_arms()))
        } else {
            (index, None)
        };
        let mut locals = vec![0; self.sizes.len()];
        for (k, &n) in self.sizes.iter().enumerate().rev() {
            locals[k] = x % n;
            x /= n;
        }
        (locals, prev)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductMdp {
    alternatives: Vec<DiscountedChain>,
    codec: StateCodec,
    arms: Vec<Arm>,
    switch_delay: f64,
}

impl ProductMdp {
    pub fn alternatives(&self) -> &[DiscountedChain] {
        &self.alternatives
    }

    pub fn codec(&self) -> &StateCodec {
        &self.codec
    }

    pub fn arms(&self) -> &[Arm] {
        &self.arms
    }

    /// Delay charged on switching; zero unless the product is augmented.
    pub fn switch_delay(&self) -> f64 {
        self.switch_delay
    }

    pub fn n(&self) -> usize {
        self.codec.len()
    }

    pub fn a(&self) -> usize {
        self.alternatives.len()
    }

    pub fn ratio_mdp(&self, alpha: InitialDistribution) -> Result<RatioMdp> {
        RatioMdp::new(self.alternatives.clone(), alpha)
    }
}

fn check_cap(states: Option<usize>, cap: usize) -> Result<usize> {
    match states {
        Some(n) if n <= cap => Ok(n),
        Some(n) => Err(Error::StateSpaceCap { states: n, cap }),
        None => Err(Error::StateSpaceCap { states: usize::MAX, cap }),
    }
}

/// `1 ⊗ … ⊗ v ⊗ … ⊗ 1` with `v` in position `k`.
fn lift(sizes: &[usize], k: usize, v: &[f64]) -> Vec<f64> {
    let before: usize = sizes[..k].iter().product();
    let after: usize = sizes[k + 1..].iter().product();
    kron_vec(&kron_vec(&vec![1.0; before], v), &vec![1.0; after])
}

/// Unaugmented product over the arms' local states, capped at
/// [`DEFAULT_STATE_CAP`] joint states.
pub fn build_product(model: &BanditModel) -> Result<ProductMdp> {
    build_product_capped(model, DEFAULT_STATE_CAP)
}

pub fn build_product_capped(model: &BanditModel, cap: usize) -> Result<ProductMdp> {
    let arms = model.arms();
    let sizes: Vec<usize> = arms.iter().map(Arm::n).collect();
    let n = check_cap(
        sizes.iter().try_fold(1usize, |acc, &k| acc.checked_mul(k)),
        cap,
    )?;
    let m = arms.len();
    let alternatives = (0..m)
        .map(|j| {
            let pick = |i: usize| if i == j { arms[i].active() } else { arms[i].passive() };
            let mut p = pick(0).p().clone();
            for i in 1..m {
                p = p.kron(pick(i).p());
            }
            let mut r = vec![0.0; n];
            let mut d = vec![0.0; n];
            for i in 0..m {
                for (acc, v) in r.iter_mut().zip(lift(&sizes, i, pick(i).r())) {
                    *acc += v;
                }
                for (acc, v) in d.iter_mut().zip(lift(&sizes, i, pick(i).d())) {
                    *acc += v;
                }
            }
            DiscountedChain::from_valid_parts(p, r, d)
        })
        .collect();
    Ok(ProductMdp {
        alternatives,
        codec: StateCodec::new(sizes, false),
        arms: arms.to_vec(),
        switch_delay: 0.0,
    })
}

/// Appends the previously active arm to the joint state and charges the
/// model's switching delay. Always augments, even for a zero delay.
pub fn augment_switching(product: &ProductMdp, model: &BanditModel) -> Result<ProductMdp> {
    augment_switching_capped(product, model.switch_delay(), DEFAULT_STATE_CAP)
}

pub fn augment_switching_capped(product: &ProductMdp, switch_delay: f64, cap: usize) -> Result<ProductMdp> {
    if product.codec.is_switching() {
        return Err(Error::InvalidArgument("product is already augmented".into()));
    }
    if !(switch_delay >= 0.0 && switch_delay.is_finite()) {
        return Err(Error::InvalidArgument(format!("switch delay {switch_delay} is not a finite non-negative time")));
    }
    let m = product.a();
    let base = product.n();
    let n = check_cap(base.checked_mul(m), cap)?;
    let alternatives = product
        .alternatives
        .iter()
        .enumerate()
        .map(|(j, alt)| {
            let mut p = Matrix::zeros(n, n);
            let mut r = Vec::with_capacity(n);
            let mut d = Vec::with_capacity(n);
            for x in 0..base {
                let src = alt.p().row(x);
                for prev in 0..m {
                    let row = p.row_mut(x * m + prev);
                    for (y, &v) in src.iter().enumerate() {
                        row[y * m + j] = v;
                    }
                    r.push(alt.r()[x]);
                    d.push(alt.d()[x] + if prev == j { 0.0 } else { switch_delay });
                }
            }
            DiscountedChain::from_valid_parts(p, r, d)
        })
        .collect();
    Ok(ProductMdp {
        alternatives,
        codec: StateCodec::new(product.codec.sizes.clone(), true),
        arms: product.arms.clone(),
        switch_delay,
    })
}

/// Product for `model`, augmented only when its switching delay is positive.
pub fn assemble(model: &BanditModel, cap: usize) -> Result<ProductMdp> {
    let product = build_product_capped(model, cap)?;
    if model.switch_delay() > 0.0 {
        augment_switching_capped(&product, model.switch_delay(), cap)
    } else {
        Ok(product)
    }
}

/// The model's initial distribution expressed over `product`'s states.
pub fn product_alpha(product: &ProductMdp, initial: &InitialState) -> Result<InitialDistribution> {
    let codec = &product.codec;
    let n = codec.len();
    match initial {
        InitialState::ArmStates { states, active } => {
            if states.len() != codec.num_arms() || states.iter().zip(codec.sizes()).any(|(&x, &k)| x >= k) {
                return Err(Error::Shape(format!("initial arm states {states:?} do not fit sizes {:?}", codec.sizes())));
            }
            InitialDistribution::delta(n, codec.encode(states, *active))
        }
        InitialState::Joint { alpha, active } => {
            if alpha.len() != codec.num_local() {
                return Err(Error::Shape(format!(
                    "joint alpha has {} entries for {} joint states",
                    alpha.len(),
                    codec.num_local()
                )));
            }
            if !codec.is_switching() {
                return InitialDistribution::new(alpha.clone());
            }
            let m = codec.num_arms();
            let mut out = vec![0.0; n];
            for (x, &a) in alpha.iter().enumerate() {
                out[x * m + active] = a;
            }
            InitialDistribution::new(out)
        }
    }
}

/// Best stationary joint policy and its ratio from `alpha`.
pub fn solve_restless_optimum(product: &ProductMdp, alpha: &InitialDistribution) -> Result<RatioSolution> {
    ratiomdp::solve(&product.ratio_mdp(alpha.clone())?)
}

/// Activates, in every joint state, the arm whose local state has the
/// highest index. Ties keep the previously active arm when it is among
/// them, otherwise go to the lowest arm number.
pub fn index_policy_on_product(product: &ProductMdp, table: &IndexTable) -> Vec<usize> {
    let codec = &product.codec;
    let m = codec.num_arms();
    assert_eq!(table.num_arms(), m, "index table does not cover every arm");
    let mut g = vec![0.0; m];
    (0..codec.len())
        .map(|s| {
            let (locals, prev) = codec.decode(s);
            for k in 0..m {
                g[k] = table.index(k, locals[k]);
            }
            let best = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let tied = |k: usize| g[k] >= best - TIE_RTOL * (1.0 + best.abs());
            match prev {
                Some(p) if tied(p) => p,
                _ => (0..m).find(|&k| tied(k)).expect("some arm attains the maximum"),
            }
        })
        .collect()
}

/// Exact expected totals of the stationary `policy` on `product`.
pub fn evaluate_on_product(product: &ProductMdp, policy: &[usize], alpha: &InitialDistribution) -> Result<PolicyValue> {
    let mdp = product.ratio_mdp(alpha.clone())?;
    ratiomdp::evaluate_policy(&mdp.policy_chain(policy)?, alpha)
}

/// Relative shortfall `(r_opt − r_index) / r_opt`.
pub fn deviation(r_opt: f64, r_index: f64) -> Result<f64> {
    if !(r_opt > 0.0) {
        return Err(Error::NonPositiveOptimum(r_opt));
    }
    let dev = (r_opt - r_index) / r_opt;
    Ok(if dev.abs() < DEVIATION_CLAMP { 0.0 } else { dev })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationRecord {
    pub model_id: usize,
    pub kappa: f64,
    pub r_opt: f64,
    pub r_index: f64,
    pub deviation: f64,
}

/// Optimum versus index policy for one model, from its own initial state.
pub fn compare_policies(model: &BanditModel, model_id: usize, kappa: f64, cap: usize) -> Result<DeviationRecord> {
    let product = assemble(model, cap)?;
    let alpha = product_alpha(&product, model.initial())?;
    let opt = solve_restless_optimum(&product, &alpha)?;
    let table = gittins::index_table(model.arms())?;
    let pi = index_policy_on_product(&product, &table);
    let r_index = evaluate_on_product(&product, &pi, &alpha)?.ratio;
    Ok(DeviationRecord {
        model_id,
        kappa,
        r_opt: opt.g,
        r_index,
        deviation: deviation(opt.g, r_index)?,
    })
}
