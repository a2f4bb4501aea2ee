//! `start:stop:count` grids.

use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(format!("grid '{s}' is not of the form start:stop:count"));
        };
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("grid '{s}': '{t}' is not a finite number"))
        };
        let count: usize = n
            .trim()
            .parse()
            .map_err(|_| format!("grid '{s}': '{n}' is not a point count"))?;
        if count == 0 {
            return Err(format!("grid '{s}' has no points"));
        }
        Ok(Grid {
            start: num(a)?,
            stop: num(b)?,
            count,
        })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.count)
    }
}

impl Grid {
    /// Evenly spaced points; a single point sits at `start`.
    pub fn linear(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|k| match k {
                0 => self.start,
                k if k + 1 == self.count => self.stop,
                k => self.start + step * k as f64,
            })
            .collect()
    }

    /// Geometrically spaced points; both ends must be positive.
    pub fn log(&self) -> Result<Vec<f64>, String> {
        if !(self.start > 0.0 && self.stop > 0.0) {
            return Err(format!("log grid {self} needs positive ends"));
        }
        if self.count == 1 {
            return Ok(vec![self.start]);
        }
        let (a, b) = (self.start.ln(), self.stop.ln());
        let step = (b - a) / (self.count - 1) as f64;
        Ok((0..self.count)
            .map(|k| match k {
                0 => self.start,
                k if k + 1 == self.count => self.stop,
                k => (a + step * k as f64).exp(),
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_expand() {
        let g: Grid = "0:1.333:9".parse().unwrap();
        let v = g.linear();
        assert_eq!(v.len(), 9);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[8], 1.333);
        let g: Grid = "0.1:10:3".parse().unwrap();
        let v = g.log().unwrap();
        assert!((v[1] - 1.0).abs() < 1e-15);
        assert_eq!((v[0], v[2]), (0.1, 10.0));
    }

    #[test]
    fn single_point() {
        let g: Grid = "2:5:1".parse().unwrap();
        assert_eq!(g.linear(), vec![2.0]);
        assert_eq!(g.log().unwrap(), vec![2.0]);
    }

    #[test]
    fn rejects_bad_grids() {
        for s in ["1:2", "a:2:3", "1:2:0", "1:2:x", "1:inf:3"] {
            assert!(s.parse::<Grid>().is_err(), "{s}");
        }
        assert!("0:1:3".parse::<Grid>().unwrap().log().is_err());
    }
}
