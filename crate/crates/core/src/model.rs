//! Semi-Markov reward chains and their discounted (substochastic) form.
//!
//! A chain carries an embedded transition matrix `P`, a per-state survival
//! probability `beta` (so `1 - beta(i)` is the chance the whole process ends
//! on leaving `i`), the expected payload `R` and the expected sojourn time `D`
//! of each visit. Termination is never stored as a state: in the discounted
//! form it is the mass missing from each row.

use std::fmt;

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Row-sum tolerance applied to human-authored transition matrices.
pub const ROW_SUM_TOL: f64 = 1e-9;
/// Slack allowed on substochastic rows after discounting.
pub const SUBSTOCHASTIC_TOL: f64 = 1e-12;
/// Tolerance on `sum(alpha) = 1`.
pub const ALPHA_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Empty,
    EntryOutOfRange { row: usize, col: usize, value: f64 },
    RowSum { row: usize, sum: f64 },
    Beta { state: usize, value: f64 },
    NegativeReward { state: usize, value: f64 },
    NonPositiveSojourn { state: usize, value: f64 },
    NonFinite { what: &'static str, index: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "chain has no states"),
            Violation::EntryOutOfRange { row, col, value } => {
                write!(f, "P({row},{col}) = {value} outside [0,1]")
            }
            Violation::RowSum { row, sum } => write!(f, "row {row} sums to {sum}"),
            Violation::Beta { state, value } => write!(f, "beta({state}) = {value} outside (0,1]"),
            Violation::NegativeReward { state, value } => write!(f, "R({state}) = {value} negative"),
            Violation::NonPositiveSojourn { state, value } => {
                write!(f, "D({state}) not positive ({value})")
            }
            Violation::NonFinite { what, index } => write!(f, "{what}({index}) is not finite"),
        }
    }
}

/// Outcome of [`SemiMarkovChain::validate`]; empty means valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemiMarkovChain {
    p: Matrix,
    beta: Vec<f64>,
    r: Vec<f64>,
    d: Vec<f64>,
    labels: Option<Vec<String>>,
}

impl SemiMarkovChain {
    /// Checks only that the shapes agree; numeric invariants are reported by
    /// [`validate`](Self::validate).
    pub fn new(p: Matrix, beta: Vec<f64>, r: Vec<f64>, d: Vec<f64>) -> Result<Self> {
        let n = p.rows();
        if !p.is_square() {
            return Err(Error::Shape(format!("P is {}x{}, not square", p.rows(), p.cols())));
        }
        for (name, len) in [("beta", beta.len()), ("R", r.len()), ("D", d.len())] {
            if len != n {
                return Err(Error::Shape(format!("{name} has {len} entries, P has {n} states")));
            }
        }
        Ok(Self {
            p,
            beta,
            r,
            d,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(Error::Shape(format!(
                "{} labels for {} states",
                labels.len(),
                self.n()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Frozen chain: `P = I`, `beta = 1`, zero reward, unit sojourn.
    pub fn identity(n: usize) -> Self {
        Self {
            p: Matrix::identity(n),
            beta: vec![1.0; n],
            r: vec![0.0; n],
            d: vec![1.0; n],
            labels: None,
        }
    }

    pub fn n(&self) -> usize {
        self.beta.len()
    }

    pub fn p(&self) -> &Matrix {
        &self.p
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, i: usize) -> String {
        self.labels
            .as_ref()
            .map_or_else(|| i.to_string(), |l| l[i].clone())
    }

    pub fn validate(&self) -> ValidationReport {
        validate_chain(self)
    }

    pub fn discount(&self) -> Result<DiscountedChain> {
        discount(self)
    }

    /// Copy with `R(state)` and `D(state)` replaced.
    pub fn with_state_values(&self, state: usize, r: f64, d: f64) -> Result<Self> {
        if state >= self.n() {
            return Err(Error::InvalidArgument(format!(
                "state {state} out of range for {} states",
                self.n()
            )));
        }
        let mut out = self.clone();
        out.r[state] = r;
        out.d[state] = d;
        Ok(out)
    }
}

/// Checks every chain invariant and lists each violation found.
pub fn validate_chain(chain: &SemiMarkovChain) -> ValidationReport {
    let mut violations = Vec::new();
    let n = chain.n();
    if n == 0 {
        violations.push(Violation::Empty);
    }
    for i in 0..n {
        let row = chain.p.row(i);
        for (j, &v) in row.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                violations.push(Violation::EntryOutOfRange { row: i, col: j, value: v });
            }
        }
        let sum: f64 = row.iter().sum();
        if !((sum - 1.0).abs() <= ROW_SUM_TOL) {
            violations.push(Violation::RowSum { row: i, sum });
        }
    }
    for (i, &b) in chain.beta.iter().enumerate() {
        if !(b > 0.0 && b <= 1.0) {
            violations.push(Violation::Beta { state: i, value: b });
        }
    }
    for (i, &r) in chain.r.iter().enumerate() {
        if !r.is_finite() {
            violations.push(Violation::NonFinite { what: "R", index: i });
        } else if r < 0.0 {
            violations.push(Violation::NegativeReward { state: i, value: r });
        }
    }
    for (i, &d) in chain.d.iter().enumerate() {
        if !d.is_finite() {
            violations.push(Violation::NonFinite { what: "D", index: i });
        } else if d <= 0.0 {
            violations.push(Violation::NonPositiveSojourn { state: i, value: d });
        }
    }
    ValidationReport { violations }
}

/// `Pbar = diag(beta)·P`; rewards and sojourns pass through unchanged.
pub fn discount(chain: &SemiMarkovChain) -> Result<DiscountedChain> {
    let report = chain.validate();
    if !report.is_ok() {
        return Err(Error::InvalidChain(report));
    }
    let n = chain.n();
    let mut p = chain.p.clone();
    for i in 0..n {
        let b = chain.beta[i];
        for v in p.row_mut(i) {
            *v *= b;
        }
    }
    Ok(DiscountedChain {
        p,
        r: chain.r.clone(),
        d: chain.d.clone(),
    })
}

/// Restriction of `chain` to `states`, re-indexed in the order given.
pub fn closed_component(chain: &SemiMarkovChain, states: &[usize]) -> Result<SemiMarkovChain> {
    let n = chain.n();
    let mut seen = vec![false; n];
    for &s in states {
        if s >= n || seen[s] {
            return Err(Error::InvalidArgument(format!(
                "state {s} is out of range or repeated"
            )));
        }
        seen[s] = true;
    }
    if states.is_empty() {
        return Err(Error::InvalidArgument("empty state set".into()));
    }
    for &s in states {
        let mass: f64 = states.iter().map(|&t| chain.p[(s, t)]).sum();
        if (mass - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::NotClosed { row: s, mass });
        }
    }
    let pick = |v: &[f64]| states.iter().map(|&s| v[s]).collect::<Vec<_>>();
    Ok(SemiMarkovChain {
        p: chain.p.select(states, states),
        beta: pick(&chain.beta),
        r: pick(&chain.r),
        d: pick(&chain.d),
        labels: chain
            .labels
            .as_ref()
            .map(|l| states.iter().map(|&s| l[s].clone()).collect()),
    })
}

/// Substochastic chain `{Pbar, R, D}`; the missing row mass is termination.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscountedChain {
    p: Matrix,
    r: Vec<f64>,
    d: Vec<f64>,
}

impl DiscountedChain {
    pub fn new(p: Matrix, r: Vec<f64>, d: Vec<f64>) -> Result<Self> {
        let n = p.rows();
        if !p.is_square() || r.len() != n || d.len() != n {
            return Err(Error::Shape(format!(
                "Pbar {}x{}, R {}, D {}",
                p.rows(),
                p.cols(),
                r.len(),
                d.len()
            )));
        }
        let mut violations = Vec::new();
        for i in 0..n {
            let row = p.row(i);
            for (j, &v) in row.iter().enumerate() {
                if !(0.0..=1.0 + SUBSTOCHASTIC_TOL).contains(&v) {
                    violations.push(Violation::EntryOutOfRange { row: i, col: j, value: v });
                }
            }
            let sum: f64 = row.iter().sum();
            if sum > 1.0 + SUBSTOCHASTIC_TOL {
                violations.push(Violation::RowSum { row: i, sum });
            }
            if !r[i].is_finite() {
                violations.push(Violation::NonFinite { what: "R", index: i });
            }
            if !(d[i] > 0.0 && d[i].is_finite()) {
                violations.push(Violation::NonPositiveSojourn { state: i, value: d[i] });
            }
        }
        if !violations.is_empty() {
            return Err(Error::InvalidChain(ValidationReport { violations }));
        }
        Ok(Self { p, r, d })
    }

    /// Skips validation; callers assemble rows from already-valid chains.
    pub(crate) fn from_valid_parts(p: Matrix, r: Vec<f64>, d: Vec<f64>) -> Self {
        debug_assert!(p.is_square() && r.len() == p.rows() && d.len() == p.rows());
        Self { p, r, d }
    }

    pub fn n(&self) -> usize {
        self.r.len()
    }

    pub fn p(&self) -> &Matrix {
        &self.p
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    /// Per-state probability of terminating on leaving the state.
    pub fn termination(&self) -> Vec<f64> {
        self.p.row_sums().into_iter().map(|s| (1.0 - s).max(0.0)).collect()
    }

    /// Scales all rewards by `k`.
    pub fn scale_rewards(&self, k: f64) -> Self {
        Self {
            p: self.p.clone(),
            r: self.r.iter().map(|v| v * k).collect(),
            d: self.d.clone(),
        }
    }

    /// Scales all sojourn times by `k`.
    pub fn scale_sojourns(&self, k: f64) -> Self {
        Self {
            p: self.p.clone(),
            r: self.r.clone(),
            d: self.d.iter().map(|v| v * k).collect(),
        }
    }

    /// Same chain with states renumbered so that new state `k` is old `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            p: self.p.select(perm, perm),
            r: perm.iter().map(|&i| self.r[i]).collect(),
            d: perm.iter().map(|&i| self.d[i]).collect(),
        }
    }

    /// True when the support graph of `Pbar` is strongly connected.
    pub fn is_irreducible(&self) -> bool {
        let n = self.n();
        let reach = |forward: bool| {
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(u) = stack.pop() {
                for v in 0..n {
                    let w = if forward { self.p[(u, v)] } else { self.p[(v, u)] };
                    if w > 0.0 && !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        n > 0 && reach(true) && reach(false)
    }
}

/// Active/passive chain pair of one bandit arm, over the same state space.
#[derive(Debug, Clone, PartialEq)]
pub struct Arm {
    name: Option<String>,
    active_source: SemiMarkovChain,
    passive_source: SemiMarkovChain,
    active: DiscountedChain,
    passive: DiscountedChain,
}

impl Arm {
    pub fn new(active: SemiMarkovChain, passive: SemiMarkovChain) -> Result<Self> {
        if active.n() != passive.n() {
            return Err(Error::Shape(format!(
                "active chain has {} states, passive has {}",
                active.n(),
                passive.n()
            )));
        }
        Ok(Self {
            name: None,
            active: active.discount()?,
            passive: passive.discount()?,
            active_source: active,
            passive_source: passive,
        })
    }

    /// Arm whose passive chain is frozen (identity, no reward, unit sojourn).
    pub fn restful(active: SemiMarkovChain) -> Result<Self> {
        let n = active.n();
        Self::new(active, SemiMarkovChain::identity(n))
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn n(&self) -> usize {
        self.active.n()
    }

    pub fn active(&self) -> &DiscountedChain {
        &self.active
    }

    pub fn passive(&self) -> &DiscountedChain {
        &self.passive
    }

    pub fn active_source(&self) -> &SemiMarkovChain {
        &self.active_source
    }

    pub fn passive_source(&self) -> &SemiMarkovChain {
        &self.passive_source
    }

    /// Whether the passive chain is exactly the frozen identity chain.
    pub fn has_identity_passive(&self) -> bool {
        self.passive_source == SemiMarkovChain::identity(self.n())
    }
}

/// Initial state distribution `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialDistribution(Vec<f64>);

impl InitialDistribution {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::InvalidArgument("empty initial distribution".into()));
        }
        if let Some(i) = alpha.iter().position(|&a| !(a >= 0.0 && a.is_finite())) {
            return Err(Error::InvalidArgument(format!("alpha({i}) = {} is not a probability", alpha[i])));
        }
        let sum: f64 = alpha.iter().sum();
        if (sum - 1.0).abs() > ALPHA_SUM_TOL {
            return Err(Error::InvalidArgument(format!("alpha sums to {sum}, not 1")));
        }
        Ok(Self(alpha))
    }

    /// Point mass on `state`.
    pub fn delta(n: usize, state: usize) -> Result<Self> {
        if state >= n {
            return Err(Error::InvalidArgument(format!("state {state} out of range for {n} states")));
        }
        let mut a = vec![0.0; n];
        a[state] = 1.0;
        Ok(Self(a))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("empty initial distribution".into()));
        }
        Ok(Self(vec![1.0 / n as f64; n]))
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, v: &[f64]) -> f64 {
        self.0.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    /// The single state carrying all mass, if the distribution is 1-sparse.
    pub fn point_mass(&self) -> Option<usize> {
        let mut it = self.0.iter().enumerate().filter(|(_, &a)| a != 0.0);
        match (it.next(), it.next()) {
            (Some((i, &a)), None) if a == 1.0 => Some(i),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn handover_chain_is_valid() {
        let report = fixtures::handover_chain().validate();
        assert!(report.is_ok(), "{report}");
    }

    #[test]
    fn short_row_reported() {
        let chain = SemiMarkovChain::new(
            Matrix::from_rows(&[[0.5, 0.4], [0.0, 1.0]]).unwrap(),
            vec![1.0, 1.0],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
        )
        .unwrap();
        let report = chain.validate();
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].to_string(), "row 0 sums to 0.9");
    }

    #[test]
    fn zero_sojourn_reported() {
        let chain = SemiMarkovChain::new(Matrix::identity(3), vec![0.5; 3], vec![1.0; 3], vec![1.0, 1.0, 0.0]).unwrap();
        let report = chain.validate();
        assert_eq!(report.violations.len(), 1);
        assert!(report.violations[0].to_string().starts_with("D(2) not positive"));
    }

    #[test]
    fn beta_bounds_and_negative_reward() {
        let chain = SemiMarkovChain::new(Matrix::identity(3), vec![0.0, 1.5, 1.0], vec![0.0, -1.0, 0.0], vec![1.0; 3]).unwrap();
        let v = chain.validate().violations;
        assert_eq!(v.len(), 3);
        assert!(matches!(v[0], Violation::Beta { state: 0, .. }));
        assert!(matches!(v[1], Violation::Beta { state: 1, .. }));
        assert!(matches!(v[2], Violation::NegativeReward { state: 1, .. }));
    }

    #[test]
    fn discount_identity_beta() {
        let chain = SemiMarkovChain::new(
            Matrix::from_rows(&[[0.25, 0.75], [0.5, 0.5]]).unwrap(),
            vec![1.0, 1.0],
            vec![1.0, 2.0],
            vec![1.0, 1.0],
        )
        .unwrap();
        let bar = discount(&chain).unwrap();
        assert_eq!(bar.p(), chain.p());
        assert_eq!(bar.r(), chain.r());
        assert_eq!(bar.d(), chain.d());
    }

    #[test]
    fn discount_handover_entries() {
        let bar = fixtures::handover_chain().discount().unwrap();
        assert_eq!(bar.p()[(3, 7)], 0.99 * 0.55);
        assert!((bar.p()[(3, 7)] - 0.5445).abs() < 1e-15);
        let sums = bar.p().row_sums();
        assert!((sums[5] - 0.8).abs() < 1e-15);
        assert!((bar.termination()[5] - 0.2).abs() < 1e-15);
        assert_eq!((bar.p().rows(), bar.p().cols()), (9, 9));
    }

    #[test]
    fn discount_rejects_invalid() {
        let chain = SemiMarkovChain::new(Matrix::identity(1), vec![1.0], vec![0.0], vec![0.0]).unwrap();
        assert!(matches!(discount(&chain), Err(Error::InvalidChain(_))));
    }

    #[test]
    fn link_component_of_handover_chain() {
        let full = fixtures::handover_chain();
        let link = closed_component(&full, &[6, 7, 8]).unwrap();
        assert_eq!(
            link.p().to_rows(),
            vec![vec![0.55, 0.45, 0.0], vec![0.55, 0.25, 0.2], vec![0.0, 0.6, 0.4]]
        );
        assert_eq!(link.beta(), &[0.9, 0.95, 0.99]);
        assert_eq!(link.r(), &[0.1, 1.0, 10.0]);
        assert_eq!(link.d(), &[5.0, 1.0, 2.5]);
        assert_eq!(link.label(0), "6");
        // Re-embedding reproduces the original entries bit for bit.
        let idx = [6, 7, 8];
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(link.p()[(a, b)].to_bits(), full.p()[(idx[a], idx[b])].to_bits());
            }
        }
    }

    #[test]
    fn full_component_is_identity() {
        let full = fixtures::handover_chain();
        let all: Vec<usize> = (0..9).collect();
        assert_eq!(closed_component(&full, &all).unwrap(), full);
    }

    #[test]
    fn entry_states_not_closed() {
        let full = fixtures::handover_chain();
        assert!(matches!(
            closed_component(&full, &[0, 1, 2]),
            Err(Error::NotClosed { row: 0, .. })
        ));
    }

    #[test]
    fn irreducibility() {
        let full = fixtures::handover_chain().discount().unwrap();
        assert!(!full.is_irreducible());
        let link = fixtures::link_chain().discount().unwrap();
        assert!(link.is_irreducible());
    }

    #[test]
    fn initial_distribution_checks() {
        assert!(InitialDistribution::new(vec![0.5, 0.5]).is_ok());
        assert!(InitialDistribution::new(vec![0.5, 0.4]).is_err());
        assert!(InitialDistribution::new(vec![1.5, -0.5]).is_err());
        let d = InitialDistribution::delta(4, 2).unwrap();
        assert_eq!(d.point_mass(), Some(2));
        assert_eq!(InitialDistribution::uniform(2).unwrap().point_mass(), None);
    }

    #[test]
    fn arm_shapes_must_agree() {
        let err = Arm::new(SemiMarkovChain::identity(2), SemiMarkovChain::identity(3));
        assert!(matches!(err, Err(Error::Shape(_))));
        let arm = Arm::restful(fixtures::link_chain()).unwrap();
        assert!(arm.has_identity_passive());
        assert_eq!(arm.passive().p(), &Matrix::identity(3));
    }
}
