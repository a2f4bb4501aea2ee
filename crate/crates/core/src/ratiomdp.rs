//! Discounted Markov ratio decision problems.
//!
//! Given `a` alternatives `{Pbar⁽ⁱ⁾, R⁽ⁱ⁾, D⁽ⁱ⁾}` over a shared state space and
//! an initial distribution `alpha`, find the stationary policy maximizing
//! expected total reward over expected total time until termination.
//!
//! Two routes are provided: policy iteration (improvement by per-state
//! ratio `t⁽ⁱ⁾ = (R⁽ⁱ⁾ − (I − Pbar⁽ⁱ⁾)s) / D⁽ⁱ⁾`, then a bordered value
//! determination solve), and the Charnes–Cooper linear program over
//! state-action occupation measures. [`solve`] tries the former and falls back
//! to the latter.

use crate::error::{Error, Result};
use crate::model::{DiscountedChain, InitialDistribution};
use crate::numerics::{simplex_lp, LinearFractionalProgram, LuFactors, Matrix, Sense};

/// Policy iteration gives up after this many improvement sweeps.
pub const MAX_POLICY_ITERATIONS: usize = 1000;
/// Relative tolerance under which two alternatives count as tied.
pub const TIE_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct RatioMdp {
    alternatives: Vec<DiscountedChain>,
    alpha: InitialDistribution,
}

impl RatioMdp {
    pub fn new(alternatives: Vec<DiscountedChain>, alpha: InitialDistribution) -> Result<Self> {
        let Some(first) = alternatives.first() else {
            return Err(Error::InvalidArgument("an MDP needs at least one alternative".into()));
        };
        let n = first.n();
        if let Some(i) = alternatives.iter().position(|c| c.n() != n) {
            return Err(Error::Shape(format!(
                "alternative {i} has {} states, alternative 0 has {n}",
                alternatives[i].n()
            )));
        }
        if alpha.n() != n {
            return Err(Error::Shape(format!("alpha has {} entries for {n} states", alpha.n())));
        }
        Ok(Self { alternatives, alpha })
    }

    pub fn n(&self) -> usize {
        self.alpha.n()
    }

    /// Number of alternatives.
    pub fn a(&self) -> usize {
        self.alternatives.len()
    }

    pub fn alternatives(&self) -> &[DiscountedChain] {
        &self.alternatives
    }

    pub fn alpha(&self) -> &InitialDistribution {
        &self.alpha
    }

    pub fn with_alpha(&self, alpha: InitialDistribution) -> Result<Self> {
        Self::new(self.alternatives.clone(), alpha)
    }

    /// The chain `{Pbar_π, R_π, D_π}` obtained by following `pi`.
    pub fn policy_chain(&self, pi: &[usize]) -> Result<DiscountedChain> {
        let n = self.n();
        if pi.len() != n {
            return Err(Error::Shape(format!("policy has {} entries for {n} states", pi.len())));
        }
        if let Some(j) = pi.iter().position(|&i| i >= self.a()) {
            return Err(Error::InvalidArgument(format!(
                "policy picks alternative {} in state {j}, only {} exist",
                pi[j],
                self.a()
            )));
        }
        let mut p = Matrix::zeros(n, n);
        let mut r = Vec::with_capacity(n);
        let mut d = Vec::with_capacity(n);
        for (j, &i) in pi.iter().enumerate() {
            let alt = &self.alternatives[i];
            p.row_mut(j).copy_from_slice(alt.p().row(j));
            r.push(alt.r()[j]);
            d.push(alt.d()[j]);
        }
        Ok(DiscountedChain::from_valid_parts(p, r, d))
    }
}

/// Expected totals under a fixed policy.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyValue {
    pub vr: Vec<f64>,
    pub vd: Vec<f64>,
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    PolicyIteration,
    LinearProgram,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioSolution {
    pub pi: Vec<usize>,
    /// Ratio gain `(alpha·VR) / (alpha·VD)`.
    pub g: f64,
    /// Bias vector, normalized so that `alpha·s = 0`.
    pub s: Vec<f64>,
    pub vr: Vec<f64>,
    pub vd: Vec<f64>,
    pub method: SolveMethod,
}

/// `VR = (I − Pbar)⁻¹R`, `VD = (I − Pbar)⁻¹D` and their `alpha`-weighted ratio.
pub fn evaluate_policy(chain: &DiscountedChain, alpha: &InitialDistribution) -> Result<PolicyValue> {
    if alpha.n() != chain.n() {
        return Err(Error::Shape(format!(
            "alpha has {} entries for {} states",
            alpha.n(),
            chain.n()
        )));
    }
    let lu = match LuFactors::factor(&chain.p().identity_minus()) {
        Ok(lu) => lu,
        Err(Error::Singular { .. }) => return Err(Error::NonTerminating),
        Err(e) => return Err(e),
    };
    let vr = lu.solve_vec(chain.r());
    let vd = lu.solve_vec(chain.d());
    if vd.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::NonTerminating);
    }
    let ratio = alpha.dot(&vr) / alpha.dot(&vd);
    Ok(PolicyValue { vr, vd, ratio })
}

/// Picks, per state, the alternative maximizing
/// `t⁽ⁱ⁾(j) = (R⁽ⁱ⁾(j) − ((I − Pbar⁽ⁱ⁾)s)(j)) / D⁽ⁱ⁾(j)`; ties go to the
/// lowest alternative index.
pub fn policy_improve(s: &[f64], mdp: &RatioMdp) -> Vec<usize> {
    let n = mdp.n();
    assert_eq!(s.len(), n, "bias vector length");
    let mut t = vec![0.0; mdp.a()];
    (0..n)
        .map(|j| {
            for (i, alt) in mdp.alternatives.iter().enumerate() {
                let ps: f64 = alt.p().row(j).iter().zip(s).map(|(p, v)| p * v).sum();
                t[i] = (alt.r()[j] - s[j] + ps) / alt.d()[j];
            }
            argmax_lowest(&t)
        })
        .collect()
}

pub(crate) fn argmax_lowest(values: &[f64]) -> usize {
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = TIE_RTOL * (1.0 + best.abs());
    values
        .iter()
        .position(|&v| v >= best - tol)
        .expect("non-empty and finite")
}

/// Solves `[[I − Pbar_π, D_π], [alpha, 0]]·[s; g] = [R_π; 0]`.
pub fn value_determine(pi: &[usize], mdp: &RatioMdp) -> Result<(Vec<f64>, f64)> {
    let chain = mdp.policy_chain(pi)?;
    let n = mdp.n();
    let mut m = Matrix::zeros(n + 1, n + 1);
    for j in 0..n {
        let row = chain.p().row(j);
        let dst = m.row_mut(j);
        for k in 0..n {
            dst[k] = -row[k];
        }
        dst[j] += 1.0;
        dst[n] = chain.d()[j];
    }
    m.row_mut(n)[..n].copy_from_slice(mdp.alpha.as_slice());
    let mut rhs = chain.r().to_vec();
    rhs.push(0.0);
    let mut x = LuFactors::factor(&m)?.solve_vec(&rhs);
    let g = x.pop().expect("n + 1 unknowns");
    Ok((x, g))
}

/// Policy iteration from `s = 0` until the improved policy repeats.
pub fn policy_iterate(mdp: &RatioMdp) -> Result<RatioSolution> {
    let mut pi = policy_improve(&vec![0.0; mdp.n()], mdp);
    for _ in 0..MAX_POLICY_ITERATIONS {
        let (s, _) = value_determine(&pi, mdp)?;
        let next = policy_improve(&s, mdp);
        if next == pi {
            let value = evaluate_policy(&mdp.policy_chain(&pi)?, &mdp.alpha)?;
            return Ok(RatioSolution {
                pi,
                g: value.ratio,
                s,
                vr: value.vr,
                vd: value.vd,
                method: SolveMethod::PolicyIteration,
            });
        }
        pi = next;
    }
    Err(Error::IterationLimit(MAX_POLICY_ITERATIONS))
}

/// The occupation-measure fractional program for `mdp`: maximize
/// `R̄·x / D̄·x` subject to `[I − Pbar⁽¹⁾ᵀ, …, I − Pbar⁽ᵃ⁾ᵀ]·x = alpha`.
/// Variables are ordered alternative-major: `x[i·n + j]` is `x_i(j)`.
pub fn occupation_program(mdp: &RatioMdp) -> LinearFractionalProgram {
    let (n, a) = (mdp.n(), mdp.a());
    let mut constraints = Matrix::zeros(n, a * n);
    let mut numerator = Vec::with_capacity(a * n);
    let mut denominator = Vec::with_capacity(a * n);
    for (i, alt) in mdp.alternatives.iter().enumerate() {
        for k in 0..n {
            let col = i * n + k;
            for j in 0..n {
                constraints[(j, col)] = -alt.p()[(k, j)];
            }
            constraints[(k, col)] += 1.0;
        }
        numerator.extend_from_slice(alt.r());
        denominator.extend_from_slice(alt.d());
    }
    LinearFractionalProgram {
        numerator,
        eta: 0.0,
        denominator,
        theta: 0.0,
        constraints,
        rhs: mdp.alpha.as_slice().to_vec(),
    }
}

/// Solves the fractional program through its Charnes–Cooper LP and reads
/// the policy off the occupation measures.
pub fn solve_ratio_lp(mdp: &RatioMdp) -> Result<RatioSolution> {
    let (n, a) = (mdp.n(), mdp.a());
    let lfp = occupation_program(mdp);
    let sol = simplex_lp(&lfp.charnes_cooper(), Sense::Maximize)?;
    let (y, _gamma) = LinearFractionalProgram::split(&sol.z);

    // x = y/γ has the same per-state argmax as y.
    let mut pi = vec![0; n];
    let mut unvisited = Vec::new();
    let mut occ = vec![0.0; a];
    for j in 0..n {
        for i in 0..a {
            occ[i] = y[i * n + j];
        }
        if occ.iter().all(|&v| v <= 0.0) {
            unvisited.push(j);
        } else {
            pi[j] = argmax_lowest(&occ);
        }
    }

    let value = evaluate_policy(&mdp.policy_chain(&pi)?, &mdp.alpha)?;
    let mut solution = RatioSolution {
        s: bias(&value, value.ratio),
        pi,
        g: value.ratio,
        vr: value.vr,
        vd: value.vd,
        method: SolveMethod::LinearProgram,
    };

    // States the optimal occupation never visits do not affect the ratio;
    // give them their improvement choice under the bias of the LP policy.
    if !unvisited.is_empty() {
        let improved = policy_improve(&solution.s, mdp);
        let mut pi = solution.pi.clone();
        for &j in &unvisited {
            pi[j] = improved[j];
        }
        if let Ok(value) = evaluate_policy(&mdp.policy_chain(&pi)?, &mdp.alpha) {
            solution = RatioSolution {
                s: bias(&value, value.ratio),
                pi,
                g: value.ratio,
                vr: value.vr,
                vd: value.vd,
                method: SolveMethod::LinearProgram,
            };
        }
    }
    Ok(solution)
}

/// `s = VR − g·VD`, which satisfies `alpha·s = 0` when `g` is the policy's ratio.
fn bias(value: &PolicyValue, g: f64) -> Vec<f64> {
    value.vr.iter().zip(&value.vd).map(|(r, d)| r - g * d).collect()
}

/// Policy iteration, falling back to the linear program when iteration
/// cycles or meets a singular system.
pub fn solve(mdp: &RatioMdp) -> Result<RatioSolution> {
    match policy_iterate(mdp) {
        Ok(sol) => Ok(sol),
        Err(Error::IterationLimit(_) | Error::Singular { .. } | Error::NonTerminating) => {
            solve_ratio_lp(mdp)
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn chain(p: &[&[f64]], r: &[f64], d: &[f64]) -> DiscountedChain {
        DiscountedChain::new(Matrix::from_rows(p).unwrap(), r.to_vec(), d.to_vec()).unwrap()
    }

    fn single_state() -> DiscountedChain {
        chain(&[&[0.5]], &[2.0], &[1.0])
    }

    #[test]
    fn geometric_single_state() {
        let v = evaluate_policy(&single_state(), &InitialDistribution::delta(1, 0).unwrap()).unwrap();
        assert_eq!(v.vr, vec![4.0]);
        assert_eq!(v.vd, vec![2.0]);
        assert_eq!(v.ratio, 2.0);
    }

    #[test]
    fn proportional_rewards_give_constant_ratio() {
        let c = chain(
            &[&[0.2, 0.5, 0.1], &[0.0, 0.3, 0.6], &[0.4, 0.4, 0.0]],
            &[1.5, 0.5, 3.0],
            &[0.75, 0.25, 1.5],
        );
        let alpha = InitialDistribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        let v = evaluate_policy(&c, &alpha).unwrap();
        assert!((v.ratio - 2.0).abs() < 1e-14);

        let mdp = RatioMdp::new(vec![c], alpha).unwrap();
        let (_, g) = value_determine(&[0, 0, 0], &mdp).unwrap();
        assert!((g - 2.0).abs() < 1e-13);
    }

    #[test]
    fn never_terminating_policy_rejected() {
        let c = chain(&[&[0.0, 1.0], &[1.0, 0.0]], &[1.0, 1.0], &[1.0, 1.0]);
        assert_eq!(
            evaluate_policy(&c, &InitialDistribution::delta(2, 0).unwrap()),
            Err(Error::NonTerminating)
        );
    }

    #[test]
    fn evaluation_matches_fixed_point_iteration() {
        let link = fixtures::link_chain().discount().unwrap();
        let alpha = InitialDistribution::delta(3, 2).unwrap();
        let v = evaluate_policy(&link, &alpha).unwrap();
        // v <- x + Pbar v converges geometrically (row sums <= 0.99).
        let iterate = |x: &[f64]| {
            let mut val = vec![0.0; 3];
            for _ in 0..5000 {
                let pv = link.p().mul_vec(&val);
                val = x.iter().zip(pv).map(|(a, b)| a + b).collect();
            }
            val
        };
        let (vr, vd) = (iterate(link.r()), iterate(link.d()));
        for k in 0..3 {
            assert!((v.vr[k] - vr[k]).abs() < 1e-9 * vr[k].max(1.0));
            assert!((v.vd[k] - vd[k]).abs() < 1e-9 * vd[k].max(1.0));
        }
        assert!((v.ratio - vr[2] / vd[2]).abs() < 1e-10);
    }

    #[test]
    fn single_alternative_improvement_is_trivial() {
        let mdp = RatioMdp::new(vec![single_state()], InitialDistribution::delta(1, 0).unwrap()).unwrap();
        assert_eq!(policy_improve(&[123.0], &mdp), vec![0]);
        let (s, g) = value_determine(&[0], &mdp).unwrap();
        assert_eq!(s, vec![0.0]);
        assert_eq!(g, 2.0);
    }

    #[test]
    fn dominating_numerator_selected_everywhere() {
        let base = chain(&[&[0.3, 0.4], &[0.5, 0.2]], &[1.0, 0.0], &[1.0, 2.0]);
        let better = chain(&[&[0.3, 0.4], &[0.5, 0.2]], &[2.0, 1.0], &[1.0, 2.0]);
        let mdp = RatioMdp::new(vec![base, better], InitialDistribution::delta(2, 0).unwrap()).unwrap();
        for s in [[0.0, 0.0], [5.0, -3.0], [-10.0, 10.0]] {
            assert_eq!(policy_improve(&s, &mdp), vec![1, 1]);
        }
    }

    #[test]
    fn value_determination_matches_evaluation() {
        let link = fixtures::link_chain().discount().unwrap();
        let alpha = InitialDistribution::delta(3, 0).unwrap();
        let mdp = RatioMdp::new(vec![link.clone()], alpha.clone()).unwrap();
        let (s, g) = value_determine(&[0, 0, 0], &mdp).unwrap();
        let v = evaluate_policy(&link, &alpha).unwrap();
        assert!((g - v.ratio).abs() < 1e-9);
        assert!(alpha.dot(&s).abs() < 1e-12);
    }

    #[test]
    fn single_alternative_iteration_is_evaluation() {
        let link = fixtures::link_chain().discount().unwrap();
        let alpha = InitialDistribution::delta(3, 1).unwrap();
        let mdp = RatioMdp::new(vec![link.clone()], alpha.clone()).unwrap();
        let sol = policy_iterate(&mdp).unwrap();
        let v = evaluate_policy(&link, &alpha).unwrap();
        assert_eq!(sol.pi, vec![0, 0, 0]);
        assert_eq!(sol.g, v.ratio);
        let lp = solve_ratio_lp(&mdp).unwrap();
        assert_eq!(lp.pi, vec![0, 0, 0]);
        assert!((lp.g - v.ratio).abs() < 1e-12);
    }

    #[test]
    fn optimal_policy_depends_on_alpha() {
        // From state 1 the long, slightly richer alternative wins; after the
        // payload burst of state 0 it pays to finish quickly instead.
        let quick = chain(&[&[0.0, 1.0], &[0.0, 0.01]], &[100.0, 0.9], &[1.0, 1.0]);
        let long = chain(&[&[0.0, 1.0], &[0.0, 0.9]], &[100.0, 1.0], &[1.0, 1.0]);
        let from1 = RatioMdp::new(vec![quick.clone(), long.clone()], InitialDistribution::delta(2, 1).unwrap()).unwrap();
        let from0 = from1.with_alpha(InitialDistribution::delta(2, 0).unwrap()).unwrap();
        let a = policy_iterate(&from1).unwrap();
        let b = policy_iterate(&from0).unwrap();
        assert_eq!(a.pi[1], 1);
        assert_eq!(b.pi[1], 0);
    }

    #[test]
    fn shape_checks() {
        assert!(RatioMdp::new(vec![], InitialDistribution::delta(1, 0).unwrap()).is_err());
        assert!(RatioMdp::new(vec![single_state()], InitialDistribution::delta(2, 0).unwrap()).is_err());
        let mdp = RatioMdp::new(vec![single_state()], InitialDistribution::delta(1, 0).unwrap()).unwrap();
        assert!(mdp.policy_chain(&[1]).is_err());
    }
}
