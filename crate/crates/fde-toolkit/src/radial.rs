//! Radial grids and fields: the carrier of simulator solutions and of the
//! entropy-functional quadrature.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Samples of a radial function on a strictly increasing grid starting at
/// `r = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialField {
    pub d: u32,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl RadialField {
    pub fn new(d: u32, grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::Domain(format!(
                "grid has {} nodes but values has {}",
                grid.len(),
                values.len()
            )));
        }
        if grid.len() < 16 {
            return Err(Error::Domain("radial grid needs at least 16 nodes".into()));
        }
        if !grid.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::Domain("radial grid must be strictly increasing".into()));
        }
        if grid[0] < 0.0 {
            return Err(Error::Domain("radial grid must start at r >= 0".into()));
        }
        Ok(RadialField { d, grid, values })
    }

    /// Samples `f(r)` on the given grid.
    pub fn from_fn(d: u32, grid: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.iter().map(|&r| f(r)).collect();
        Self::new(d, grid, values)
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    /// `ω_d ∫ f(r) r^{d-1} dr` by composite trapezoid on the stored grid.
    pub fn integrate(&self) -> f64 {
        integrate_weighted(self.d, &self.grid, |i, _| self.values[i])
    }

    /// `ω_d ∫ g(i, r) r^{d-1} dr` for a pointwise integrand built from the
    /// node index and radius.
    pub fn integrate_with(&self, g: impl Fn(usize, f64) -> f64) -> f64 {
        integrate_weighted(self.d, &self.grid, g)
    }

    /// Centered finite differences of the node values (one-sided at the two
    /// endpoints); second-order on smooth grids.
    pub fn derivative(&self) -> Vec<f64> {
        derivative_on_grid(&self.grid, &self.values)
    }

    /// Writes `r,value` CSV.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "r,value")?;
        for (r, v) in self.grid.iter().zip(&self.values) {
            writeln!(w, "{r},{v}")?;
        }
        Ok(())
    }

    /// Reads `r,value` CSV produced by [`write_csv`](Self::write_csv).
    pub fn read_csv<R: BufRead>(d: u32, r: R) -> Result<Self> {
        let mut grid = Vec::new();
        let mut values = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if i == 0 && line.starts_with('r') {
                continue;
            }
            let mut parts = line.split(',');
            let (a, b) = (parts.next(), parts.next());
            match (a, b) {
                (Some(a), Some(b)) => {
                    let rv: f64 = a.trim().parse().map_err(|_| {
                        Error::Domain(format!("bad radius on line {}", i + 1))
                    })?;
                    let vv: f64 = b.trim().parse().map_err(|_| {
                        Error::Domain(format!("bad value on line {}", i + 1))
                    })?;
                    grid.push(rv);
                    values.push(vv);
                }
                _ => return Err(Error::Domain(format!("malformed CSV line {}", i + 1))),
            }
        }
        Self::new(d, grid, values)
    }
}

/// Composite trapezoid of `ω_d g(i, r_i) r^{d-1}` over the grid.
pub fn integrate_weighted(d: u32, grid: &[f64], g: impl Fn(usize, f64) -> f64) -> f64 {
    let w = crate::params::omega_d(d);
    let p = d as i32 - 1;
    let mut acc = 0.0;
    let mut prev = g(0, grid[0]) * grid[0].powi(p.max(0));
    // r^{d-1} at r = 0 for d = 1 is 1 (the weight is constant).
    if d == 1 {
        prev = g(0, grid[0]);
    }
    for i in 1..grid.len() {
        let cur = if d == 1 {
            g(i, grid[i])
        } else {
            g(i, grid[i]) * grid[i].powi(p)
        };
        acc += 0.5 * (prev + cur) * (grid[i] - grid[i - 1]);
        prev = cur;
    }
    w * acc
}

/// Centered differences on a (possibly non-uniform) grid, one-sided at the
/// endpoints.
pub fn derivative_on_grid(grid: &[f64], values: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let mut out = vec![0.0; n];
    out[0] = (values[1] - values[0]) / (grid[1] - grid[0]);
    out[n - 1] = (values[n - 1] - values[n - 2]) / (grid[n - 1] - grid[n - 2]);
    for i in 1..n - 1 {
        let hl = grid[i] - grid[i - 1];
        let hr = grid[i + 1] - grid[i];
        // Three-point formula exact on quadratics for non-uniform spacing.
        out[i] = (values[i + 1] * hl * hl - values[i - 1] * hr * hr
            + values[i] * (hr * hr - hl * hl))
            / (hl * hr * (hl + hr));
    }
    out
}

/// Uniform grid on `[0, r_max]` with `n` nodes.
pub fn uniform_grid(r_max: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| r_max * i as f64 / (n - 1) as f64).collect()
}

/// Geometrically stretched grid: uniform with spacing `h0` up to `r_lin`,
/// then spacing growing by factor `ratio` until `r_max` is covered.
pub fn stretched_grid(r_lin: f64, h0: f64, ratio: f64, r_max: f64) -> Vec<f64> {
    let mut grid = vec![0.0];
    let mut r = 0.0;
    let mut h = h0;
    while r < r_max {
        r += h;
        grid.push(r.min(r_max));
        if r >= r_lin {
            h *= ratio;
        }
        if r >= r_max {
            break;
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_sanity() {
        // d = 3: integral of 1 over the unit ball is omega_3/3 = 4 pi / 3.
        let grid = uniform_grid(1.0, 2001);
        let f = RadialField::from_fn(3, grid, |_| 1.0).unwrap();
        let v = f.integrate();
        assert!((v - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-6);
        // d = 1: integral of exp(-r) over the line (both sides) is 2.
        let grid = uniform_grid(40.0, 40001);
        let f = RadialField::from_fn(1, grid, |r| (-r).exp()).unwrap();
        assert!((f.integrate() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn derivative_exact_on_quadratics() {
        let grid = stretched_grid(1.0, 0.01, 1.05, 5.0);
        let f = RadialField::from_fn(2, grid.clone(), |r| 3.0 * r * r - 2.0 * r + 1.0)
            .unwrap();
        let dv = f.derivative();
        for (i, &r) in grid.iter().enumerate().skip(1).take(grid.len() - 2) {
            assert!((dv[i] - (6.0 * r - 2.0)).abs() < 1e-9, "at r = {r}");
        }
    }

    #[test]
    fn csv_round_trip() {
        let grid = uniform_grid(2.0, 32);
        let f = RadialField::from_fn(2, grid, |r| (1.0 + r * r).recip()).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let back = RadialField::read_csv(2, &buf[..]).unwrap();
        assert_eq!(f, back);
    }
}
