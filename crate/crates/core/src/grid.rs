//! Uniform cell-centered Cartesian grids on the box `[-L, L]^n`.

use crate::error::{invalid, FracError, Result};

/// `N` points per axis, spacing `h = 2L/N`, node `k` of an axis at `-L + h(k + 1/2)`.
///
/// Nodes are stored row-major: the first axis varies slowest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    extent: f64,
    points: usize,
}

impl Grid {
    pub fn new(n: usize, extent: f64, points: usize) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(invalid("n", format!("dimension must be 1, 2 or 3, got {n}")));
        }
        if !extent.is_finite() || extent <= 0.0 {
            return Err(invalid("L", format!("half-width must be positive, got {extent}")));
        }
        if points < 4 || !points.is_multiple_of(2) {
            return Err(invalid("N", format!("points per axis must be even and >= 4, got {points}")));
        }
        Ok(Self { n, extent, points })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Half-width `L` of the box.
    pub fn extent(&self) -> f64 {
        self.extent
    }

    /// Points per axis `N`.
    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / self.points as f64
    }

    /// `hⁿ`, the volume of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.n as i32)
    }

    pub fn num_nodes(&self) -> usize {
        self.points.pow(self.n as u32)
    }

    pub fn axis_coord(&self, k: usize) -> f64 {
        -self.extent + self.spacing() * (k as f64 + 0.5)
    }

    /// Per-axis indices of a node; unused trailing entries are zero.
    pub fn multi_index(&self, node: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        let mut rem = node;
        for d in (0..self.n).rev() {
            idx[d] = rem % self.points;
            rem /= self.points;
        }
        idx
    }

    pub fn node_index(&self, idx: &[usize]) -> usize {
        idx[..self.n]
            .iter()
            .fold(0, |acc, &k| acc * self.points + k)
    }

    /// Coordinates of a node; unused trailing entries are zero.
    pub fn coords(&self, node: usize) -> [f64; 3] {
        let idx = self.multi_index(node);
        let mut x = [0.0; 3];
        for d in 0..self.n {
            x[d] = self.axis_coord(idx[d]);
        }
        x
    }

    /// Node in the outermost layer of cells (within one cell of the box boundary).
    pub fn is_boundary(&self, node: usize) -> bool {
        let idx = self.multi_index(node);
        idx[..self.n].iter().any(|&k| k == 0 || k + 1 == self.points)
    }

    /// Node with `|x|_∞ <= L/2`.
    pub fn in_inner_half(&self, node: usize) -> bool {
        let x = self.coords(node);
        x[..self.n].iter().all(|v| v.abs() <= 0.5 * self.extent)
    }

    pub fn same_as(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(FracError::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

/// Partition of the grid nodes into `Ω` (inside) and `Ω^c`.
#[derive(Debug, Clone)]
pub struct RegionMask {
    grid: Grid,
    inside: Vec<bool>,
}

impl RegionMask {
    pub fn new(grid: Grid, inside: Vec<bool>) -> Result<Self> {
        if inside.len() != grid.num_nodes() {
            return Err(FracError::GridMismatch(format!(
                "mask has {} entries, grid has {} nodes",
                inside.len(),
                grid.num_nodes()
            )));
        }
        if !inside.iter().any(|&b| b) || inside.iter().all(|&b| b) {
            return Err(invalid(
                "omega",
                "region must contain at least one node inside and one outside",
            ));
        }
        Ok(Self { grid, inside })
    }

    /// Centered ball of the given radius, membership decided at cell centers.
    pub fn ball(grid: Grid, radius: f64) -> Result<Self> {
        let inside = (0..grid.num_nodes())
            .map(|i| {
                let x = grid.coords(i);
                x[..grid.n()].iter().map(|v| v * v).sum::<f64>().sqrt() < radius
            })
            .collect();
        Self::new(grid, inside)
    }

    /// Centered cube `|x|_∞ < half_width`.
    pub fn cube(grid: Grid, half_width: f64) -> Result<Self> {
        let inside = (0..grid.num_nodes())
            .map(|i| grid.coords(i)[..grid.n()].iter().all(|v| v.abs() < half_width))
            .collect();
        Self::new(grid, inside)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn inside(&self, node: usize) -> bool {
        self.inside[node]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.inside
    }

    pub fn count_inside(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }
}
