//! Fractional Gittins indices.
//!
//! The index of a state is the best ratio of expected payload to expected
//! time obtainable from that state when one may stop at any decision epoch.
//! Two independent routes compute it:
//!
//! * **restart-in-state**: a two-alternative ratio MDP where every state may
//!   either continue or jump back as if it were the target state; the optimal
//!   ratio from the target is its index. One state per solve.
//! * **state elimination**: the state with the highest immediate ratio `R/D`
//!   has that ratio as its index; it is then folded into its predecessors
//!   (`P ← P_cc + U·N·T` with `N = (1 − P_ss)⁻¹`) and the procedure repeats
//!   on the reduced chain, yielding all indices from highest to lowest.

use crate::error::{Error, Result};
use crate::model::{Arm, DiscountedChain, InitialDistribution};
use crate::numerics::Matrix;
use crate::ratiomdp::{self, RatioMdp, RatioSolution};

/// Elimination fails when the selected state keeps more than `1 − 1e-13`
/// of its mass on itself.
pub const ELIMINATION_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IndexMethod {
    Restart,
    #[default]
    Elimination,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexTable {
    indices: Vec<Vec<f64>>,
    method: IndexMethod,
}

impl IndexTable {
    pub fn new(indices: Vec<Vec<f64>>, method: IndexMethod) -> Result<Self> {
        if indices.iter().flatten().any(|g| !g.is_finite()) {
            return Err(Error::InvalidArgument("index table has non-finite entries".into()));
        }
        Ok(Self { indices, method })
    }

    pub fn num_arms(&self) -> usize {
        self.indices.len()
    }

    pub fn arm(&self, arm: usize) -> &[f64] {
        &self.indices[arm]
    }

    pub fn index(&self, arm: usize, state: usize) -> f64 {
        self.indices[arm][state]
    }

    pub fn method(&self) -> IndexMethod {
        self.method
    }

    pub fn into_inner(self) -> Vec<Vec<f64>> {
        self.indices
    }
}

/// Continue-or-restart MDP for target state `target`, started in `target`.
pub fn restart_mdp(chain: &DiscountedChain, target: usize) -> Result<RatioMdp> {
    let n = chain.n();
    if target >= n {
        return Err(Error::InvalidArgument(format!("state {target} out of range for {n} states")));
    }
    let mut p = Matrix::zeros(n, n);
    for j in 0..n {
        p.row_mut(j).copy_from_slice(chain.p().row(target));
    }
    let restart = DiscountedChain::from_valid_parts(
        p,
        vec![chain.r()[target]; n],
        vec![chain.d()[target]; n],
    );
    RatioMdp::new(vec![chain.clone(), restart], InitialDistribution::delta(n, target)?)
}

/// Optimal solution of the restart MDP. Irreducible chains go through policy
/// iteration (with the LP as fallback); all others straight to the LP.
pub fn restart_solution(chain: &DiscountedChain, target: usize) -> Result<RatioSolution> {
    let mdp = restart_mdp(chain, target)?;
    if chain.is_irreducible() {
        ratiomdp::solve(&mdp)
    } else {
        ratiomdp::solve_ratio_lp(&mdp)
    }
}

pub fn restart_index(chain: &DiscountedChain, target: usize) -> Result<f64> {
    Ok(restart_solution(chain, target)?.g)
}

/// All indices of `chain`, one restart solve per state.
pub fn restart_indices(chain: &DiscountedChain) -> Result<Vec<f64>> {
    (0..chain.n()).map(|s| restart_index(chain, s)).collect()
}

/// Reduced chain during elimination; `survivors` maps reduced positions back
/// to original states and stays in ascending order.
#[derive(Debug, Clone)]
pub struct EliminationState {
    p: Matrix,
    r: Vec<f64>,
    d: Vec<f64>,
    survivors: Vec<usize>,
    /// Immediate ratios `R/D` of the reduced chain at the last step.
    q: Vec<f64>,
}

impl EliminationState {
    pub fn new(chain: &DiscountedChain) -> Self {
        Self {
            p: chain.p().clone(),
            r: chain.r().to_vec(),
            d: chain.d().to_vec(),
            survivors: (0..chain.n()).collect(),
            q: Vec::new(),
        }
    }

    pub fn survivors(&self) -> &[usize] {
        &self.survivors
    }

    pub fn reduced_chain(&self) -> (&Matrix, &[f64], &[f64]) {
        (&self.p, &self.r, &self.d)
    }

    pub fn last_ratios(&self) -> &[f64] {
        &self.q
    }

    pub fn is_done(&self) -> bool {
        self.survivors.is_empty()
    }

    /// Emits the next `(original state, index)` and folds that state away.
    pub fn step(&mut self) -> Result<Option<(usize, f64)>> {
        if self.survivors.is_empty() {
            return Ok(None);
        }
        self.q = self.r.iter().zip(&self.d).map(|(r, d)| r / d).collect();
        // First maximum, i.e. the lowest original index among ties.
        let mut s = 0;
        for (k, &v) in self.q.iter().enumerate() {
            if v > self.q[s] {
                s = k;
            }
        }
        let state = self.survivors[s];
        let index = self.q[s];
        let m = self.survivors.len();
        if m > 1 {
            let stay = 1.0 - self.p[(s, s)];
            if stay < ELIMINATION_TOL {
                return Err(Error::SingularElimination { state });
            }
            let keep: Vec<usize> = (0..m).filter(|&k| k != s).collect();
            let mut p = self.p.select(&keep, &keep);
            let mut r = Vec::with_capacity(m - 1);
            let mut d = Vec::with_capacity(m - 1);
            for (a, &x) in keep.iter().enumerate() {
                // U·N for row x; T is row s restricted to the survivors.
                let un = self.p[(x, s)] / stay;
                if un != 0.0 {
                    for (b, &y) in keep.iter().enumerate() {
                        p[(a, b)] += un * self.p[(s, y)];
                    }
                }
                r.push(self.r[x] + un * self.r[s]);
                d.push(self.d[x] + un * self.d[s]);
            }
            self.p = p;
            self.r = r;
            self.d = d;
        }
        self.survivors.remove(s);
        Ok(Some((state, index)))
    }
}

/// `(state, index)` pairs in elimination order, highest index first.
pub fn elimination_order(chain: &DiscountedChain) -> Result<Vec<(usize, f64)>> {
    let mut state = EliminationState::new(chain);
    let mut out = Vec::with_capacity(chain.n());
    while let Some(item) = state.step()? {
        out.push(item);
    }
    Ok(out)
}

/// Indices of every state of `chain`, indexed by state.
pub fn elimination_indices(chain: &DiscountedChain) -> Result<Vec<f64>> {
    let mut g = vec![0.0; chain.n()];
    for (state, index) in elimination_order(chain)? {
        g[state] = index;
    }
    Ok(g)
}

pub fn index_table(arms: &[Arm]) -> Result<IndexTable> {
    index_table_with(arms, IndexMethod::Elimination)
}

/// Indices of each arm's active chain.
pub fn index_table_with(arms: &[Arm], method: IndexMethod) -> Result<IndexTable> {
    let indices = arms
        .iter()
        .map(|arm| match method {
            IndexMethod::Elimination => elimination_indices(arm.active()),
            IndexMethod::Restart => restart_indices(arm.active()),
        })
        .collect::<Result<Vec<_>>>()?;
    IndexTable::new(indices, method)
}
