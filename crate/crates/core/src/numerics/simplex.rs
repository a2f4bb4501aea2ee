//! Dense two-phase tableau simplex with Bland's anti-cycling rule.
//!
//! Solves `opt cᵀz` subject to `G·z ≤ h`, `E·z = f`, `z ≥ 0`.

use super::Matrix;
use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;
const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub c: Vec<f64>,
    pub g_ub: Matrix,
    pub h_ub: Vec<f64>,
    pub e_eq: Matrix,
    pub f_eq: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub z: Vec<f64>,
    pub objective: f64,
}

impl LinearProgram {
    /// An LP over `c.len()` non-negative variables with no constraints yet.
    pub fn new(c: Vec<f64>) -> Self {
        let k = c.len();
        Self {
            c,
            g_ub: Matrix::zeros(0, k),
            h_ub: Vec::new(),
            e_eq: Matrix::zeros(0, k),
            f_eq: Vec::new(),
        }
    }

    pub fn with_inequalities(mut self, g: Matrix, h: Vec<f64>) -> Self {
        self.g_ub = g;
        self.h_ub = h;
        self
    }

    pub fn with_equalities(mut self, e: Matrix, f: Vec<f64>) -> Self {
        self.e_eq = e;
        self.f_eq = f;
        self
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    fn check(&self) -> Result<()> {
        let k = self.c.len();
        if self.g_ub.cols() != k || self.g_ub.rows() != self.h_ub.len() {
            return Err(Error::Shape(format!(
                "inequality block is {}x{} with {} bounds, LP has {k} variables",
                self.g_ub.rows(),
                self.g_ub.cols(),
                self.h_ub.len()
            )));
        }
        if self.e_eq.cols() != k || self.e_eq.rows() != self.f_eq.len() {
            return Err(Error::Shape(format!(
                "equality block is {}x{} with {} right-hand sides, LP has {k} variables",
                self.e_eq.rows(),
                self.e_eq.cols(),
                self.f_eq.len()
            )));
        }
        if self.g_ub.rows() + self.e_eq.rows() == 0 {
            return Err(Error::Shape("LP has no constraint rows".into()));
        }
        Ok(())
    }
}

struct Tableau {
    /// Constraint rows; the last column holds the right-hand side.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.width]
    }

    fn pivot(&mut self, r: usize, e: usize, obj: &mut [f64]) {
        let p = self.rows[r][e];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[e];
            if f != 0.0 {
                for (v, q) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * q;
                }
                row[e] = 0.0;
            }
        }
        let f = obj[e];
        if f != 0.0 {
            for (v, q) in obj.iter_mut().zip(&pivot_row) {
                *v -= f * q;
            }
            obj[e] = 0.0;
        }
        // Keep round-off from pushing basic values below zero.
        for row in self.rows.iter_mut() {
            let last = row.len() - 1;
            if row[last] < 0.0 && row[last] > -1e-12 {
                row[last] = 0.0;
            }
        }
        self.basis[r] = e;
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        d.push(0.0);
        for (i, row) in self.rows.iter().enumerate() {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (v, a) in d.iter_mut().zip(row) {
                    *v -= cb * a;
                }
            }
        }
        d
    }

    /// Maximizes `cost` over the current basis; `allowed` masks entering columns.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool], pivots: &mut usize) -> Result<()> {
        let scale = 1.0 + cost.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        let eps = PIVOT_TOL * scale;
        let mut obj = self.reduced_costs(cost);
        loop {
            // Bland: lowest-index improving column enters.
            let Some(e) = (0..self.width).find(|&j| allowed[j] && obj[j] > eps) else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][e];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((b, best)) => {
                        let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                        if (!tie && ratio < best) || (tie && self.basis[i] < self.basis[b]) {
                            Some((i, ratio))
                        } else {
                            Some((b, best))
                        }
                    }
                };
            }
            let Some((r, _)) = leave else {
                return Err(Error::Unbounded);
            };
            self.pivot(r, e, &mut obj);
            *pivots += 1;
            if *pivots > MAX_PIVOTS {
                return Err(Error::IterationLimit(MAX_PIVOTS));
            }
        }
    }
}

/// Optimal basic feasible solution of `lp`.
pub fn simplex_lp(lp: &LinearProgram, sense: Sense) -> Result<LpSolution> {
    lp.check()?;
    let k = lp.num_vars();
    let p = lp.g_ub.rows();
    let q = lp.e_eq.rows();
    let m = p + q;

    let needs_artificial: Vec<bool> = (0..m)
        .map(|i| if i < p { lp.h_ub[i] < 0.0 } else { true })
        .collect();
    let n_art = needs_artificial.iter().filter(|&&a| a).count();
    let width = k + p + n_art;

    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut art = k + p;
    for i in 0..m {
        let mut row = vec![0.0; width + 1];
        let (coeffs, rhs) = if i < p {
            row[k + i] = 1.0;
            (lp.g_ub.row(i), lp.h_ub[i])
        } else {
            (lp.e_eq.row(i - p), lp.f_eq[i - p])
        };
        row[..k].copy_from_slice(coeffs);
        row[width] = rhs;
        if rhs < 0.0 {
            for v in row.iter_mut() {
                *v = -*v;
            }
        }
        if needs_artificial[i] {
            row[art] = 1.0;
            basis.push(art);
            art += 1;
        } else {
            basis.push(k + i);
        }
        rows.push(row);
    }
    let mut tab = Tableau { rows, basis, width };
    let is_artificial = |j: usize| j >= k + p;
    let mut pivots = 0;

    if n_art > 0 {
        let cost: Vec<f64> = (0..width).map(|j| if is_artificial(j) { -1.0 } else { 0.0 }).collect();
        tab.optimize(&cost, &vec![true; width], &mut pivots)?;
        let rhs_scale = 1.0 + lp.h_ub.iter().chain(&lp.f_eq).fold(0.0_f64, |a, v| a.max(v.abs()));
        let infeasibility: f64 = (0..m)
            .filter(|&i| is_artificial(tab.basis[i]))
            .map(|i| tab.rhs(i))
            .sum();
        if infeasibility > 1e-9 * rhs_scale {
            return Err(Error::Infeasible);
        }
        // Drive zero-level artificials out of the basis; drop redundant rows.
        let mut i = 0;
        while i < tab.rows.len() {
            if is_artificial(tab.basis[i]) {
                let entering = (0..k + p).find(|&j| tab.rows[i][j].abs() > 1e-9);
                match entering {
                    Some(e) => {
                        let mut dummy = vec![0.0; width + 1];
                        tab.pivot(i, e, &mut dummy);
                    }
                    None => {
                        tab.rows.remove(i);
                        tab.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    let sign = match sense {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };
    let cost: Vec<f64> = (0..width)
        .map(|j| if j < k { sign * lp.c[j] } else { 0.0 })
        .collect();
    let allowed: Vec<bool> = (0..width).map(|j| !is_artificial(j)).collect();
    tab.optimize(&cost, &allowed, &mut pivots)?;

    let mut z = vec![0.0; k];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < k {
            z[b] = tab.rhs(i).max(0.0);
        }
    }
    let objective = lp.c.iter().zip(&z).map(|(c, v)| c * v).sum();
    Ok(LpSolution { z, objective })
}
