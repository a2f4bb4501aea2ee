//! Linear-fractional programs and their Charnes–Cooper linearization.

use super::{LinearProgram, Matrix};

/// `opt (c·x + eta) / (d·x + theta)` subject to `A·x = b`, `x ≥ 0`.
#[derive(Debug, Clone)]
pub struct LinearFractionalProgram {
    pub numerator: Vec<f64>,
    pub eta: f64,
    pub denominator: Vec<f64>,
    pub theta: f64,
    pub constraints: Matrix,
    pub rhs: Vec<f64>,
}

impl LinearFractionalProgram {
    /// Substitutes `y = γ·x`, `γ = 1 / (d·x + theta)`. The LP variables are
    /// `[y; γ]`, constrained by `A·y − b·γ = 0` and `[d, theta]·[y; γ] = 1`,
    /// with objective `[c, eta]·[y; γ]`.
    pub fn charnes_cooper(&self) -> LinearProgram {
        let k = self.numerator.len();
        let m = self.constraints.rows();
        let mut e = Matrix::zeros(m + 1, k + 1);
        for i in 0..m {
            e.row_mut(i)[..k].copy_from_slice(self.constraints.row(i));
            e[(i, k)] = -self.rhs[i];
        }
        e.row_mut(m)[..k].copy_from_slice(&self.denominator);
        e[(m, k)] = self.theta;
        let mut f = vec![0.0; m + 1];
        f[m] = 1.0;

        let mut c = self.numerator.clone();
        c.push(self.eta);
        LinearProgram::new(c).with_equalities(e, f)
    }

    /// Splits an LP solution `[y; γ]` into `(y, γ)`; `x = y / γ` when `γ > 0`.
    pub fn split(z: &[f64]) -> (&[f64], f64) {
        let (y, g) = z.split_at(z.len() - 1);
        (y, g[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{simplex_lp, Sense};

    #[test]
    fn ratio_of_two_variables() {
        // max (3x1 + x2) / (x1 + x2) with x1 + x2 = 1: best is x1 = 1, ratio 3.
        let lfp = LinearFractionalProgram {
            numerator: vec![3.0, 1.0],
            eta: 0.0,
            denominator: vec![1.0, 1.0],
            theta: 0.0,
            constraints: Matrix::from_rows(&[[1.0, 1.0]]).unwrap(),
            rhs: vec![1.0],
        };
        let sol = simplex_lp(&lfp.charnes_cooper(), Sense::Maximize).unwrap();
        assert!((sol.objective - 3.0).abs() < 1e-12);
        let (y, gamma) = LinearFractionalProgram::split(&sol.z);
        assert!((y[0] / gamma - 1.0).abs() < 1e-12);
    }

    #[test]
    fn offsets_enter_objective_and_normalization() {
        // min (x + 1) / (x + 2) with x = 1 fixed: 2/3.
        let lfp = LinearFractionalProgram {
            numerator: vec![1.0],
            eta: 1.0,
            denominator: vec![1.0],
            theta: 2.0,
            constraints: Matrix::from_rows(&[[1.0]]).unwrap(),
            rhs: vec![1.0],
        };
        let sol = simplex_lp(&lfp.charnes_cooper(), Sense::Minimize).unwrap();
        assert!((sol.objective - 2.0 / 3.0).abs() < 1e-12);
    }
}
