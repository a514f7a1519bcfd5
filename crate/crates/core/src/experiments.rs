//! Refinement scans shared by the command line tool and the test suites.
//!
//! Each scan evaluates one quantity on a sequence of grids and reports the
//! observed order `log(r₁/r₂) / log(h₁/h₂)` between consecutive levels.
//! Scans of identities whose error is dominated by box truncation grow the
//! box with the resolution, `L = L₀ √(N/N₀)`.

use std::f64::consts::PI;

use crate::csv::{Cell, Table};
use crate::error::{invalid, Result};
use crate::field::{bump, norm, smooth_cutoff, Field, ScalarField, VectorField};
use crate::grid::Grid;
use crate::membership::{build_example, ExampleMap};
use crate::minors::MinorSpec;
use crate::ops::{ibp_residual, product_rule_residuals, Backend, FracOperator};
use crate::params::FracParams;
use crate::piola::{det_ibp_residual, det_riesz_identity_residual, piola_residual};

/// Quantities checked by `verify`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Piola,
    Ibp,
    Product,
    DetIbp,
    DetRiesz,
    CrossBackend,
}

impl Check {
    pub fn name(&self) -> &'static str {
        match self {
            Check::Piola => "piola",
            Check::Ibp => "ibp",
            Check::Product => "product",
            Check::DetIbp => "det-ibp",
            Check::DetRiesz => "det-riesz",
            Check::CrossBackend => "cross-backend",
        }
    }

    /// Names of the reported metrics; the order is computed on the one at
    /// [`Self::primary`].
    pub fn metrics(&self) -> &'static [&'static str] {
        match self {
            Check::Piola => &["sup", "l2"],
            Check::Ibp => &["defect"],
            Check::Product => &["gradient", "divergence"],
            Check::DetIbp | Check::DetRiesz => &["lhs", "rhs", "defect"],
            Check::CrossBackend => &["sup_diff"],
        }
    }

    pub fn primary(&self) -> usize {
        match self {
            Check::DetIbp | Check::DetRiesz => 2,
            _ => 0,
        }
    }

    /// Whether the box grows with the resolution.
    pub fn scales_extent(&self) -> bool {
        matches!(self, Check::Piola | Check::DetIbp | Check::DetRiesz)
    }
}

impl std::str::FromStr for Check {
    type Err = crate::error::FracError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "piola" => Check::Piola,
            "ibp" => Check::Ibp,
            "product" => Check::Product,
            "det-ibp" => Check::DetIbp,
            "det-riesz" => Check::DetRiesz,
            "cross-backend" => Check::CrossBackend,
            _ => return Err(invalid("check", format!("unknown check `{s}`"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub s: f64,
    pub points: usize,
    pub extent: f64,
    pub spacing: f64,
    pub metrics: Vec<f64>,
    /// Observed order against the previous row of the same `s`.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scan {
    pub check: Check,
    pub n: usize,
    pub backend: Backend,
    pub rows: Vec<ScanRow>,
}

impl Scan {
    pub fn primary(&self, row: &ScanRow) -> f64 {
        row.metrics[self.check.primary()]
    }

    /// Rows grouped by `s`, in scan order.
    pub fn lines(&self) -> Vec<Vec<&ScanRow>> {
        let mut out: Vec<Vec<&ScanRow>> = Vec::new();
        for r in &self.rows {
            match out.last_mut() {
                Some(line) if line[0].s == r.s => line.push(r),
                _ => out.push(vec![r]),
            }
        }
        out
    }

    /// Smallest observed order over all lines.
    pub fn min_order(&self) -> Option<f64> {
        self.rows.iter().filter_map(|r| r.order).reduce(f64::min)
    }

    pub fn to_table(&self) -> Table {
        let mut cols = vec!["check", "backend", "n", "s", "N", "L", "h"];
        cols.extend_from_slice(self.check.metrics());
        cols.push("order");
        let mut t = Table::new(cols);
        for r in &self.rows {
            let mut row: Vec<Cell> = vec![
                self.check.name().into(),
                self.backend.name().into(),
                self.n.into(),
                r.s.into(),
                r.points.into(),
                r.extent.into(),
                r.spacing.into(),
            ];
            row.extend(r.metrics.iter().map(|&m| Cell::from(m)));
            row.push(r.order.into());
            t.push(row);
        }
        t
    }
}

pub fn observed_order(h1: f64, h2: f64, r1: f64, r2: f64) -> f64 {
    (r1 / r2).ln() / (h1 / h2).ln()
}

/// `e^{-π|x|²}` with a smooth cutoff between `L/2` and `3L/4`.
pub fn cut_gaussian(grid: Grid) -> Result<ScalarField> {
    let l = grid.extent();
    ScalarField::from_fn(grid, |x| {
        let r = norm(x);
        (-PI * r * r).exp() * smooth_cutoff(r, 0.5 * l, 0.75 * l)
    })
}

/// Test function `φ(x) = ψ(|x - (0.2, -0.1, 0)|)` with a bump `ψ` of radius 1.2.
pub fn shifted_bump(grid: Grid) -> Result<ScalarField> {
    ScalarField::from_fn(grid, |x| {
        let c = [0.2, -0.1, 0.0];
        let d: Vec<f64> = x.iter().zip(c).map(|(a, b)| a - b).collect();
        bump(norm(&d), 1.2)
    })
}

/// Vector test field `φ_i = ψ(|x|) (x_i + 0.3 i)` with a bump of radius 1.5.
pub fn bump_vector(grid: Grid) -> Result<VectorField> {
    let n = grid.n();
    VectorField::from_fn(grid, |x| {
        let w = bump(norm(x), 1.5);
        (0..n).map(|i| w * (x[i] + 0.3 * i as f64)).collect()
    })
}

/// Settings of a refinement scan.
#[derive(Debug, Clone)]
pub struct ScanSpec {
    pub check: Check,
    pub n: usize,
    pub s_list: Vec<f64>,
    pub points: Vec<usize>,
    /// Box half-width at the first resolution.
    pub extent: f64,
    pub backend: Backend,
}

impl ScanSpec {
    fn validate(&self) -> Result<()> {
        if self.points.is_empty() || self.s_list.is_empty() {
            return Err(invalid("N", "scan lists must be non-empty"));
        }
        if self.points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("N", "resolutions must increase"));
        }
        let dims: &[usize] = match self.check {
            Check::Piola | Check::DetIbp | Check::DetRiesz => &[2, 3],
            Check::Product | Check::CrossBackend => &[1],
            Check::Ibp => &[1, 2, 3],
        };
        if !dims.contains(&self.n) {
            return Err(invalid(
                "n",
                format!("{} is defined for n in {dims:?}, got {}", self.check.name(), self.n),
            ));
        }
        Ok(())
    }

    pub fn extent_at(&self, points: usize) -> f64 {
        if self.check.scales_extent() {
            self.extent * (points as f64 / self.points[0] as f64).sqrt()
        } else {
            self.extent
        }
    }
}

fn metrics(spec: &ScanSpec, params: FracParams, grid: Grid) -> Result<Vec<f64>> {
    let op = || FracOperator::new(params, grid, spec.backend);
    Ok(match spec.check {
        Check::Piola => {
            let u = build_example(&ExampleMap::SmoothVectorBump { radius: 1.0 }, grid)?;
            let r = piola_residual(&op()?, &u, &MinorSpec::full(spec.n)?)?;
            vec![r.sup, r.l2]
        }
        Check::Ibp => vec![ibp_residual(&op()?, &cut_gaussian(grid)?, &bump_vector(grid)?)?],
        Check::Product => {
            let phi = ScalarField::from_fn(grid, |x| bump((x[0] - 0.3).abs(), 1.5))?;
            let g = cut_gaussian(grid)?;
            let v = VectorField::from_components(std::slice::from_ref(&g))?;
            let r = product_rule_residuals(&op()?, &phi, &g, &v)?;
            vec![r.gradient, r.divergence]
        }
        Check::DetIbp | Check::DetRiesz => {
            let u = build_example(&ExampleMap::SmoothVectorBump { radius: 1.0 }, grid)?;
            let phi = shifted_bump(grid)?;
            let o = op()?;
            let r = if spec.check == Check::DetIbp {
                det_ibp_residual(&o, &u, &phi, &MinorSpec::full(spec.n)?)?
            } else {
                det_riesz_identity_residual(&o, &u, &phi)?
            };
            vec![r.lhs, r.rhs, r.defect]
        }
        Check::CrossBackend => {
            let u = cut_gaussian(grid)?;
            let q = FracOperator::new(params, grid, Backend::Quadrature)?.ds_grad(&u)?;
            let s = FracOperator::new(params, grid, Backend::Spectral)?.ds_grad(&u)?;
            vec![q.axpby(1.0, &s, -1.0)?.sup_norm()]
        }
    })
}

pub fn run_scan(spec: &ScanSpec) -> Result<Scan> {
    spec.validate()?;
    let mut rows = Vec::new();
    for &s in &spec.s_list {
        let params = FracParams::new(spec.n, s, 2.0)?;
        let mut prev: Option<(f64, f64)> = None;
        for &pts in &spec.points {
            let grid = Grid::new(spec.n, spec.extent_at(pts), pts)?;
            let m = metrics(spec, params, grid)?;
            let h = grid.spacing();
            let r = m[spec.check.primary()];
            let order = prev.map(|(h0, r0)| observed_order(h0, h, r0, r));
            prev = Some((h, r));
            rows.push(ScanRow {
                s,
                points: pts,
                extent: grid.extent(),
                spacing: h,
                metrics: m,
                order,
            });
        }
    }
    Ok(Scan {
        check: spec.check,
        n: spec.n,
        backend: spec.backend,
        rows,
    })
}
