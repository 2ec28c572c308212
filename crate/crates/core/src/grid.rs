//! Uniform grids with Dirichlet ends and functions sampled on them.

use serde::{Deserialize, Serialize};

use crate::error::{GsipError, Result};

/// Minimum number of interior nodes; the five-point derivative stencils
/// need at least this many.
pub const MIN_NODES: usize = 5;

/// `n` interior nodes on `[x_lo, x_hi]`, spacing `h = (x_hi - x_lo)/(n + 1)`.
/// The end points carry implied zero (Dirichlet) values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    x_lo: f64,
    x_hi: f64,
    n: usize,
}

impl Grid {
    pub fn new(x_lo: f64, x_hi: f64, n: usize) -> Result<Self> {
        if !(x_lo.is_finite() && x_hi.is_finite()) || x_hi <= x_lo {
            return Err(GsipError::Grid(format!(
                "grid bounds must be finite with x_lo < x_hi, got [{x_lo}, {x_hi}]"
            )));
        }
        if n < MIN_NODES {
            return Err(GsipError::Grid(format!(
                "need at least {MIN_NODES} interior nodes, got {n}"
            )));
        }
        Ok(Grid { x_lo, x_hi, n })
    }

    pub fn x_lo(&self) -> f64 {
        self.x_lo
    }

    pub fn x_hi(&self) -> f64 {
        self.x_hi
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spacing(&self) -> f64 {
        (self.x_hi - self.x_lo) / (self.n + 1) as f64
    }

    /// Interior node `i` (0-based).
    pub fn node(&self, i: usize) -> f64 {
        self.x_lo + (i + 1) as f64 * self.spacing()
    }

    /// Half node between nodes `i - 1` and `i`; `i` runs over `0..=n`, with
    /// `half_node(0)` between the left wall and the first interior node.
    pub fn half_node(&self, i: usize) -> f64 {
        self.x_lo + (i as f64 + 0.5) * self.spacing()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.node(i))
    }

    /// The grid with spacing halved: `2n + 1` interior nodes on the same box.
    pub fn refined(&self) -> Grid {
        Grid {
            n: 2 * self.n + 1,
            ..*self
        }
    }
}

/// Values on the interior nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(GsipError::Grid(format!(
                "grid function has {} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        GridFunction {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn<F: FnMut(f64) -> f64>(grid: Grid, mut f: F) -> Self {
        let values = grid.nodes().map(&mut f).collect();
        GridFunction { grid, values }
    }

    pub fn try_from_fn<F: FnMut(f64) -> Result<f64>>(grid: Grid, mut f: F) -> Result<Self> {
        let values = grid.nodes().map(&mut f).collect::<Result<Vec<_>>>()?;
        Ok(GridFunction { grid, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Trapezoidal inner product; the Dirichlet ends contribute nothing.
    pub fn dot(&self, other: &GridFunction) -> f64 {
        debug_assert_eq!(self.values.len(), other.values.len());
        self.grid.spacing()
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Scales to unit norm and makes the first significant component
    /// positive. A zero function is returned unchanged.
    pub fn normalized(mut self) -> Self {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return self;
        }
        let peak = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let sign = self
            .values
            .iter()
            .find(|v| v.abs() > 1e-6 * peak)
            .map_or(1.0, |v| v.signum());
        for v in &mut self.values {
            *v *= sign / norm;
        }
        self
    }

    /// `|<self, other>|` after normalizing both.
    pub fn overlap(&self, other: &GridFunction) -> f64 {
        let na = self.norm();
        let nb = other.norm();
        if na == 0.0 || nb == 0.0 {
            return 0.0;
        }
        (self.dot(other) / (na * nb)).abs()
    }

    /// Number of sign changes, ignoring components below `1e-8` of the peak
    /// so round-off in the tails does not register as nodes.
    pub fn sign_changes(&self) -> usize {
        let peak = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut last = 0.0f64;
        let mut count = 0;
        for &v in &self.values {
            if v.abs() <= 1e-8 * peak {
                continue;
            }
            if last != 0.0 && v.signum() != last.signum() {
                count += 1;
            }
            last = v;
        }
        count
    }
}
