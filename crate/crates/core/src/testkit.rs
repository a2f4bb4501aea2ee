//! Seeded random instances and brute-force oracles for tests.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::model::{DiscountedChain, InitialDistribution, SemiMarkovChain};
use crate::numerics::Matrix;
use crate::ratiomdp::{evaluate_policy, RatioMdp};
use crate::rng::derive_rng;

const DOMAIN_TESTKIT: u64 = 0x7465_7374_6b69_7421;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    derive_rng(seed, DOMAIN_TESTKIT, 0)
}

/// Random stochastic row; each entry survives with probability `density`,
/// and `forced` (if any) always gets positive weight.
fn random_row(rng: &mut impl Rng, n: usize, density: f64, forced: Option<usize>) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n)
        .map(|_| if rng.gen_bool(density) { rng.gen_range(0.05..1.0) } else { 0.0 })
        .collect();
    if let Some(k) = forced {
        w[k] += rng.gen_range(0.05..1.0);
    }
    if w.iter().all(|&v| v == 0.0) {
        w[rng.gen_range(0..n)] = 1.0;
    }
    let total: f64 = w.iter().sum();
    w.iter().map(|v| v / total).collect()
}

fn chain_from_rows(rng: &mut impl Rng, rows: Vec<Vec<f64>>) -> SemiMarkovChain {
    let n = rows.len();
    let beta = (0..n).map(|_| rng.gen_range(0.5..0.99)).collect();
    let r = (0..n).map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..10.0) }).collect();
    let d = (0..n).map(|_| rng.gen_range(0.1..5.0)).collect();
    SemiMarkovChain::new(Matrix::from_rows(&rows).expect("square"), beta, r, d).expect("shapes")
}

/// Valid chain with random sparsity; `beta < 1` everywhere.
pub fn random_chain(rng: &mut impl Rng, n: usize) -> SemiMarkovChain {
    let density = rng.gen_range(0.2..1.0);
    let rows = (0..n).map(|_| random_row(rng, n, density, None)).collect();
    chain_from_rows(rng, rows)
}

/// Like [`random_chain`], with the cycle `0 → 1 → … → 0` forced into the
/// support so the chain is irreducible.
pub fn random_irreducible_chain(rng: &mut impl Rng, n: usize) -> SemiMarkovChain {
    let density = rng.gen_range(0.1..1.0);
    let rows = (0..n).map(|i| random_row(rng, n, density, Some((i + 1) % n))).collect();
    chain_from_rows(rng, rows)
}

pub fn random_discounted(rng: &mut impl Rng, n: usize) -> DiscountedChain {
    random_chain(rng, n).discount().expect("valid by construction")
}

/// Either a point mass or a random full-support distribution.
pub fn random_alpha(rng: &mut impl Rng, n: usize) -> InitialDistribution {
    if rng.gen_bool(0.5) {
        InitialDistribution::delta(n, rng.gen_range(0..n)).expect("in range")
    } else {
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = w.iter().sum();
        let mut a: Vec<f64> = w.iter().map(|v| v / total).collect();
        // Put the rounding residue on the largest entry.
        let resid = 1.0 - a.iter().sum::<f64>();
        let k = (0..n).fold(0, |b, i| if a[i] > a[b] { i } else { b });
        a[k] += resid;
        InitialDistribution::new(a).expect("normalized")
    }
}

pub fn random_mdp(rng: &mut impl Rng, n: usize, a: usize) -> RatioMdp {
    let alts = (0..a).map(|_| random_discounted(rng, n)).collect();
    RatioMdp::new(alts, random_alpha(rng, n)).expect("shapes agree")
}

/// Every alternative contains the cycle `0 → 1 → … → 0`, so every policy
/// chain is irreducible.
pub fn random_irreducible_mdp(rng: &mut impl Rng, n: usize, a: usize) -> RatioMdp {
    let alts = (0..a)
        .map(|_| random_irreducible_chain(rng, n).discount().expect("valid"))
        .collect();
    RatioMdp::new(alts, random_alpha(rng, n)).expect("shapes agree")
}

/// Best ratio over all `aⁿ` stationary deterministic policies, with the
/// first policy (in lexicographic order) attaining it.
pub fn brute_force_optimum(mdp: &RatioMdp) -> (Vec<usize>, f64) {
    let (n, a) = (mdp.n(), mdp.a());
    let mut pi = vec![0usize; n];
    let mut best: Option<(Vec<usize>, f64)> = None;
    loop {
        let chain = mdp.policy_chain(&pi).expect("valid policy");
        if let Ok(v) = evaluate_policy(&chain, mdp.alpha()) {
            if best.as_ref().map_or(true, |(_, g)| v.ratio > *g) {
                best = Some((pi.clone(), v.ratio));
            }
        }
        // Odometer increment, last state fastest.
        let mut k = n;
        loop {
            if k == 0 {
                return best.expect("some policy terminates");
            }
            k -= 1;
            pi[k] += 1;
            if pi[k] < a {
                break;
            }
            pi[k] = 0;
        }
    }
}
