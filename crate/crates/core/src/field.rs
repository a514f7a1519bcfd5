//! Sampled scalar, vector and matrix fields on a [`Grid`].
//!
//! Values are stored node-major with components innermost: vector component
//! `i` of node `k` lives at `k·n + i`, matrix entry `(i, j)` at `k·n² + i·n + j`.
//!
//! Every constructor checks that the samples are finite. Compact support
//! (all boundary-layer nodes equal to zero) is a property checked by
//! [`Field::check_compact`]; the fractional operators require it of their
//! inputs, while their outputs are in general not compactly supported.

use crate::error::{FracError, Result};
use crate::grid::Grid;

/// Shared behaviour of the three field containers.
pub trait Field: Sized + Clone {
    /// Number of components per node for a given dimension.
    fn comps_for(n: usize) -> usize;

    fn grid(&self) -> &Grid;
    fn values(&self) -> &[f64];
    fn values_mut(&mut self) -> &mut [f64];
    fn into_values(self) -> Vec<f64>;

    #[doc(hidden)]
    fn from_parts_unchecked(grid: Grid, values: Vec<f64>) -> Self;

    fn comps(&self) -> usize {
        Self::comps_for(self.grid().n())
    }

    fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        let expected = grid.num_nodes() * Self::comps_for(grid.n());
        if values.len() != expected {
            return Err(FracError::GridMismatch(format!(
                "expected {expected} samples, got {}",
                values.len()
            )));
        }
        let c = Self::comps_for(grid.n());
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(FracError::NonFinite { node: pos / c });
        }
        Ok(Self::from_parts_unchecked(grid, values))
    }

    fn zeros(grid: Grid) -> Self {
        let len = grid.num_nodes() * Self::comps_for(grid.n());
        Self::from_parts_unchecked(grid, vec![0.0; len])
    }

    /// Node values of component block `node`.
    fn at(&self, node: usize) -> &[f64] {
        let c = self.comps();
        &self.values()[node * c..(node + 1) * c]
    }

    /// Reject fields with a nonzero sample in the boundary layer.
    fn check_compact(&self) -> Result<()> {
        let c = self.comps();
        let g = *self.grid();
        for node in 0..g.num_nodes() {
            if g.is_boundary(node) && self.values()[node * c..(node + 1) * c].iter().any(|&v| v != 0.0) {
                return Err(FracError::SupportViolation { node });
            }
        }
        Ok(())
    }

    fn is_compact(&self) -> bool {
        self.check_compact().is_ok()
    }

    /// Nodes carrying a nonzero sample.
    fn support_mask(&self) -> Vec<bool> {
        self.values()
            .chunks(self.comps())
            .map(|blk| blk.iter().any(|&v| v != 0.0))
            .collect()
    }

    fn scale(&self, alpha: f64) -> Self {
        let v = self.values().iter().map(|x| alpha * x).collect();
        Self::from_parts_unchecked(*self.grid(), v)
    }

    /// `α·self + β·other`.
    fn axpby(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        self.grid().same_as(other.grid())?;
        let v = self
            .values()
            .iter()
            .zip(other.values())
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        Ok(Self::from_parts_unchecked(*self.grid(), v))
    }

    /// Pointwise product with a scalar weight.
    fn weighted(&self, weight: &ScalarField) -> Result<Self> {
        self.grid().same_as(weight.grid())?;
        let c = self.comps();
        let v = self
            .values()
            .iter()
            .enumerate()
            .map(|(k, a)| a * weight.values[k / c])
            .collect();
        Ok(Self::from_parts_unchecked(*self.grid(), v))
    }

    fn sup_norm(&self) -> f64 {
        crate::reduce::max_abs(self.values())
    }
}

macro_rules! field_type {
    ($(#[$meta:meta])* $name:ident, $comps:expr) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name {
            grid: Grid,
            values: Vec<f64>,
        }

        impl Field for $name {
            fn comps_for(n: usize) -> usize {
                let f: fn(usize) -> usize = $comps;
                f(n)
            }
            fn grid(&self) -> &Grid {
                &self.grid
            }
            fn values(&self) -> &[f64] {
                &self.values
            }
            fn values_mut(&mut self) -> &mut [f64] {
                &mut self.values
            }
            fn into_values(self) -> Vec<f64> {
                self.values
            }
            fn from_parts_unchecked(grid: Grid, values: Vec<f64>) -> Self {
                Self { grid, values }
            }
        }
    };
}

field_type!(
    /// One real sample per node.
    ScalarField,
    |_| 1
);
field_type!(
    /// An `n`-vector per node.
    VectorField,
    |n| n
);
field_type!(
    /// An `n×n` matrix per node, row-major.
    MatrixField,
    |n| n * n
);

impl ScalarField {
    /// Sample `f` at the node coordinates.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let v = (0..grid.num_nodes())
            .map(|i| f(&grid.coords(i)[..grid.n()]))
            .collect();
        Self::from_values(grid, v)
    }

    pub fn get(&self, node: usize) -> f64 {
        self.values[node]
    }

    pub fn mul(&self, other: &ScalarField) -> Result<ScalarField> {
        self.weighted(other)
    }
}

impl VectorField {
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        let n = grid.n();
        let mut v = Vec::with_capacity(grid.num_nodes() * n);
        for i in 0..grid.num_nodes() {
            let val = f(&grid.coords(i)[..n]);
            if val.len() != n {
                return Err(FracError::GridMismatch(format!(
                    "vector sample has {} components, expected {n}",
                    val.len()
                )));
            }
            v.extend(val);
        }
        Self::from_values(grid, v)
    }

    pub fn from_components(components: &[ScalarField]) -> Result<Self> {
        let grid = *components
            .first()
            .ok_or_else(|| FracError::GridMismatch("no components".into()))?
            .grid();
        let n = grid.n();
        if components.len() != n {
            return Err(FracError::GridMismatch(format!(
                "{} components for dimension {n}",
                components.len()
            )));
        }
        for c in components {
            grid.same_as(c.grid())?;
        }
        let mut v = vec![0.0; grid.num_nodes() * n];
        for (i, c) in components.iter().enumerate() {
            for (node, &x) in c.values().iter().enumerate() {
                v[node * n + i] = x;
            }
        }
        Ok(Self { grid, values: v })
    }

    pub fn component(&self, i: usize) -> ScalarField {
        let n = self.grid.n();
        let v = self.values.iter().skip(i).step_by(n).copied().collect();
        ScalarField::from_parts_unchecked(self.grid, v)
    }

    pub fn components(&self) -> Vec<ScalarField> {
        (0..self.grid.n()).map(|i| self.component(i)).collect()
    }

    /// Pointwise dot product.
    pub fn dot(&self, other: &VectorField) -> Result<ScalarField> {
        self.grid.same_as(other.grid())?;
        let n = self.grid.n();
        let v = self
            .values
            .chunks(n)
            .zip(other.values.chunks(n))
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y).sum())
            .collect();
        Ok(ScalarField::from_parts_unchecked(self.grid, v))
    }
}

impl MatrixField {
    /// Matrix field whose row `i` is the vector field `rows[i]`.
    pub fn from_rows(rows: &[VectorField]) -> Result<Self> {
        let grid = *rows
            .first()
            .ok_or_else(|| FracError::GridMismatch("no rows".into()))?
            .grid();
        let n = grid.n();
        if rows.len() != n {
            return Err(FracError::GridMismatch(format!("{} rows for dimension {n}", rows.len())));
        }
        let mut v = vec![0.0; grid.num_nodes() * n * n];
        for (i, r) in rows.iter().enumerate() {
            grid.same_as(r.grid())?;
            for node in 0..grid.num_nodes() {
                for j in 0..n {
                    v[node * n * n + i * n + j] = r.values()[node * n + j];
                }
            }
        }
        Ok(Self { grid, values: v })
    }

    /// Constant multiple of the identity weighted by a scalar field: `g·I`.
    pub fn scalar_identity(g: &ScalarField) -> Self {
        let n = g.grid().n();
        let mut v = vec![0.0; g.grid().num_nodes() * n * n];
        for (node, &x) in g.values().iter().enumerate() {
            for i in 0..n {
                v[node * n * n + i * n + i] = x;
            }
        }
        Self {
            grid: *g.grid(),
            values: v,
        }
    }

    pub fn row(&self, i: usize) -> VectorField {
        let n = self.grid.n();
        let mut v = Vec::with_capacity(self.grid.num_nodes() * n);
        for blk in self.values.chunks(n * n) {
            v.extend_from_slice(&blk[i * n..(i + 1) * n]);
        }
        VectorField::from_parts_unchecked(self.grid, v)
    }

    pub fn rows(&self) -> Vec<VectorField> {
        (0..self.grid.n()).map(|i| self.row(i)).collect()
    }

    pub fn entry(&self, i: usize, j: usize) -> ScalarField {
        let n = self.grid.n();
        let v = self.values.chunks(n * n).map(|blk| blk[i * n + j]).collect();
        ScalarField::from_parts_unchecked(self.grid, v)
    }

    /// Transpose at every node.
    pub fn transpose(&self) -> MatrixField {
        let n = self.grid.n();
        let mut v = self.values.clone();
        for (dst, src) in v.chunks_mut(n * n).zip(self.values.chunks(n * n)) {
            for i in 0..n {
                for j in 0..n {
                    dst[j * n + i] = src[i * n + j];
                }
            }
        }
        Self {
            grid: self.grid,
            values: v,
        }
    }
}

/// Smooth step: 1 for `r <= inner`, 0 for `r >= outer`, `C^∞` in between.
pub fn smooth_cutoff(r: f64, inner: f64, outer: f64) -> f64 {
    if r <= inner {
        return 1.0;
    }
    if r >= outer {
        return 0.0;
    }
    let t = (outer - r) / (outer - inner);
    let f = |x: f64| if x <= 0.0 { 0.0 } else { (-1.0 / x).exp() };
    f(t) / (f(t) + f(1.0 - t))
}

/// Standard bump `exp(1 - 1/(1 - (r/radius)²))`, equal to 1 at the center.
pub fn bump(r: f64, radius: f64) -> f64 {
    let t = r / radius;
    if t >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(2, 2.0, 8).unwrap()
    }

    #[test]
    fn rejects_non_finite_and_bad_length() {
        let g = grid();
        let mut v = vec![0.0; 64];
        v[10] = f64::NAN;
        assert!(matches!(
            ScalarField::from_values(g, v),
            Err(FracError::NonFinite { node: 10 })
        ));
        assert!(VectorField::from_values(g, vec![0.0; 64]).is_err());
        assert!(VectorField::from_values(g, vec![0.0; 128]).is_ok());
    }

    #[test]
    fn compact_support_check() {
        let g = grid();
        let inner = ScalarField::from_fn(g, |x| bump(norm(x), 1.0)).unwrap();
        assert!(inner.is_compact());
        let wide = ScalarField::from_fn(g, |_| 1.0).unwrap();
        assert!(matches!(wide.check_compact(), Err(FracError::SupportViolation { .. })));
        // arithmetic keeps compact support
        let combo = inner.axpby(2.0, &inner.scale(-0.5), 3.0).unwrap();
        assert!(combo.is_compact());
    }

    #[test]
    fn component_and_row_access() {
        let g = grid();
        let v = VectorField::from_fn(g, |x| vec![x[0], 2.0 * x[1]]).unwrap();
        let c1 = v.component(1);
        assert_eq!(c1.get(5), v.at(5)[1]);
        let back = VectorField::from_components(&v.components()).unwrap();
        assert_eq!(back, v);
        let m = MatrixField::from_rows(&[v.clone(), v.scale(3.0)]).unwrap();
        assert_eq!(m.row(1), v.scale(3.0));
        assert_eq!(m.transpose().transpose(), m);
        assert_eq!(m.entry(1, 0).get(9), 3.0 * v.at(9)[0]);
    }

    #[test]
    fn cutoff_is_smooth_step() {
        assert_eq!(smooth_cutoff(0.5, 1.0, 2.0), 1.0);
        assert_eq!(smooth_cutoff(2.5, 1.0, 2.0), 0.0);
        assert!((smooth_cutoff(1.5, 1.0, 2.0) - 0.5).abs() < 1e-15);
    }
}
