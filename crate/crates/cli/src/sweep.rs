//! Sweep of one state's payload and sojourn, tracking the ratio between
//! the index of a reference state and the index of the swept state.
//!
//! With the handover example (swept state 7, reference state 1), a ratio
//! above 1 means initiating a handover beats keeping the current link.

use ratiobandit::gittins::elimination_indices;
use ratiobandit::model::SemiMarkovChain;

use crate::csv;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// State whose `R` and `D` are replaced.
    pub state: usize,
    /// State whose index forms the numerator of the ratio.
    pub against: usize,
    pub r_values: Vec<f64>,
    pub d_values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub r: f64,
    pub d: f64,
    pub index_against: f64,
    pub index_state: f64,
    pub ratio: f64,
}

/// Grid points in row-major order: `R` outer, `D` inner.
pub fn run(chain: &SemiMarkovChain, spec: &SweepSpec) -> CliResult<Vec<SweepPoint>> {
    let n = chain.n();
    for (what, s) in [("state", spec.state), ("against", spec.against)] {
        if s >= n {
            return Err(CliError::Usage(format!("--{what} {s} out of range for {n} states")));
        }
    }
    if let Some(v) = spec.r_values.iter().chain(&spec.d_values).find(|v| !(**v > 0.0)) {
        return Err(CliError::Usage(format!("grid value {v} is not positive")));
    }
    let mut out = Vec::with_capacity(spec.r_values.len() * spec.d_values.len());
    for &r in &spec.r_values {
        for &d in &spec.d_values {
            let g = elimination_indices(&chain.with_state_values(spec.state, r, d)?.discount()?)?;
            out.push(SweepPoint {
                r,
                d,
                index_against: g[spec.against],
                index_state: g[spec.state],
                ratio: g[spec.against] / g[spec.state],
            });
        }
    }
    Ok(out)
}

pub fn render(points: &[SweepPoint], spec: &SweepSpec) -> String {
    let (s, a) = (spec.state, spec.against);
    let mut out = String::new();
    csv::push_row(&mut out, &[format!("R{s}"), format!("D{s}"), format!("index{a}"), format!("index{s}"), "ratio".into()]);
    for p in points {
        csv::push_row(&mut out, &[csv::num(p.r), csv::num(p.d), csv::num(p.index_against), csv::num(p.index_state), csv::num(p.ratio)]);
    }
    out
}

/// Cells with ratio above 1 and the number of 4-connected regions they form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    pub cells: usize,
    pub components: usize,
}

pub fn handover_region(points: &[SweepPoint], rows: usize, cols: usize) -> Region {
    assert_eq!(points.len(), rows * cols);
    let above: Vec<bool> = points.iter().map(|p| p.ratio > 1.0).collect();
    let mut seen = vec![false; above.len()];
    let mut components = 0;
    for start in 0..above.len() {
        if !above[start] || seen[start] {
            continue;
        }
        components += 1;
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(k) = stack.pop() {
            let (i, j) = (k / cols, k % cols);
            let mut near = Vec::with_capacity(4);
            if i > 0 {
                near.push(k - cols);
            }
            if i + 1 < rows {
                near.push(k + cols);
            }
            if j > 0 {
                near.push(k - 1);
            }
            if j + 1 < cols {
                near.push(k + 1);
            }
            for m in near {
                if above[m] && !seen[m] {
                    seen[m] = true;
                    stack.push(m);
                }
            }
        }
    }
    Region {
        cells: above.iter().filter(|&&a| a).count(),
        components,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ratiobandit::fixtures;

    fn spec(r: Vec<f64>, d: Vec<f64>) -> SweepSpec {
        SweepSpec { state: 7, against: 1, r_values: r, d_values: d }
    }

    #[test]
    fn nominal_point_keeps_link() {
        let s = spec(vec![1.0], vec![1.0]);
        let pts = run(&fixtures::handover_chain(), &s).unwrap();
        assert_eq!(pts.len(), 1);
        assert!((pts[0].ratio - 1.85497518 / 2.32066728).abs() < 1e-7);
        assert!(pts[0].ratio < 1.0);
        assert_eq!(render(&pts, &s).lines().count(), 2);
        assert!(render(&pts, &s).starts_with("R7,D7,index1,index7,ratio\n"));
    }

    #[test]
    fn long_sojourn_triggers_handover() {
        let s = spec(vec![1.0], vec![1.0, 10.0, 100.0]);
        let pts = run(&fixtures::handover_chain(), &s).unwrap();
        assert!(pts[0].ratio < 1.0);
        assert!(pts[2].ratio > 1.0);
        assert!(pts.windows(2).all(|w| w[1].index_state <= w[0].index_state));
    }

    #[test]
    fn region_counting() {
        let mk = |ratio| SweepPoint { r: 1.0, d: 1.0, index_against: 0.0, index_state: 0.0, ratio };
        let pts: Vec<_> = [2.0, 0.0, 2.0, 2.0, 0.0, 0.0].into_iter().map(mk).collect();
        assert_eq!(handover_region(&pts, 2, 3), Region { cells: 3, components: 2 });
        assert_eq!(handover_region(&pts, 3, 2), Region { cells: 3, components: 1 });
    }
}
