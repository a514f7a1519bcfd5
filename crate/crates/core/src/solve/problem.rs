//! Variational problems and their configuration files.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use toml::{Table, Value};

use crate::error::{FracError, Result};
use crate::field::{smooth_cutoff, Field, VectorField};
use crate::grid::{Grid, RegionMask};
use crate::ops::{Backend, FracOperator};
use crate::params::FracParams;

use super::density::{Datum, Dirichlet, EnergyDensity, Polyconvex, Quadratic};

/// Minimize `∫ W(x, u, D^s u)` over `u` with `u = g` on `Ω^c`.
#[derive(Clone)]
pub struct Problem {
    op: FracOperator,
    omega: RegionMask,
    g: VectorField,
    density: Arc<dyn EnergyDensity>,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("params", self.op.params())
            .field("grid", self.op.grid())
            .field("backend", &self.op.backend())
            .field("density", &self.density.name())
            .finish()
    }
}

impl Problem {
    pub fn new(
        params: FracParams,
        omega: RegionMask,
        g: VectorField,
        density: Arc<dyn EnergyDensity>,
        backend: Backend,
    ) -> Result<Self> {
        let grid = *omega.grid();
        grid.same_as(g.grid())?;
        if params.n() != grid.n() {
            return Err(crate::error::invalid("n", "parameter and grid dimensions differ"));
        }
        g.check_compact()?;
        let op = FracOperator::new(params, grid, backend)?;
        Ok(Self { op, omega, g, density })
    }

    /// The same problem discretized with another backend.
    pub fn with_backend(&self, backend: Backend) -> Result<Self> {
        Ok(Self {
            op: FracOperator::new(*self.op.params(), *self.op.grid(), backend)?,
            ..self.clone()
        })
    }

    pub fn operator(&self) -> &FracOperator {
        &self.op
    }

    pub fn grid(&self) -> &Grid {
        self.op.grid()
    }

    pub fn omega(&self) -> &RegionMask {
        &self.omega
    }

    pub fn complement(&self) -> &VectorField {
        &self.g
    }

    pub fn density(&self) -> &dyn EnergyDensity {
        self.density.as_ref()
    }

    /// `u` with every `Ω^c` node overwritten by `g`.
    pub fn project(&self, u: &VectorField) -> Result<VectorField> {
        self.grid().same_as(u.grid())?;
        let n = self.grid().n();
        let mut vals = u.values().to_vec();
        for node in 0..self.grid().num_nodes() {
            if !self.omega.inside(node) {
                vals[node * n..(node + 1) * n].copy_from_slice(self.g.at(node));
            }
        }
        VectorField::from_values(*self.grid(), vals)
    }

    /// Rejects `u` unless it equals `g` on every `Ω^c` node.
    pub fn check_admissible(&self, u: &VectorField) -> Result<()> {
        self.grid().same_as(u.grid())?;
        for node in 0..self.grid().num_nodes() {
            if !self.omega.inside(node) && u.at(node) != self.g.at(node) {
                return Err(crate::error::invalid(
                    "u",
                    format!("field differs from the complement datum at node {node}"),
                ));
            }
        }
        Ok(())
    }
}

/// Problem plus solver settings, as read from a configuration file.
#[derive(Debug, Clone)]
pub struct ProblemConfig {
    pub problem: Problem,
    pub tol_g: Option<f64>,
    pub max_iters: usize,
}

/// Gaussian datum `a·exp(-π|x|²/w²)` in every component.
pub fn gaussian_datum(n: usize, amplitude: f64, width: f64) -> Datum {
    Arc::new(move |x: &[f64]| {
        let r2: f64 = x[..n].iter().map(|v| v * v).sum();
        vec![amplitude * (-PI * r2 / (width * width)).exp(); n]
    })
}

/// `g(x) = λ x χ(|x|)` with `χ` a smooth cutoff from `0.6L` to `0.9L`.
pub fn dilation_complement(grid: Grid, stretch: f64) -> Result<VectorField> {
    let l = grid.extent();
    VectorField::from_fn(grid, |x| {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let c = stretch * smooth_cutoff(r, 0.6 * l, 0.9 * l);
        x.iter().map(|v| c * v).collect()
    })
}

fn config_err(key: &str, reason: impl Into<String>) -> FracError {
    FracError::Config {
        key: key.to_string(),
        reason: reason.into(),
    }
}

struct Section<'a> {
    name: &'a str,
    table: Option<&'a Table>,
}

impl<'a> Section<'a> {
    fn get(root: &'a Table, name: &'a str, required: bool) -> Result<Self> {
        match root.get(name) {
            Some(Value::Table(t)) => Ok(Self { name, table: Some(t) }),
            Some(_) => Err(config_err(name, "expected a section")),
            None if required => Err(config_err(name, "missing section")),
            None => Ok(Self { name, table: None }),
        }
    }

    fn key(&self, k: &str) -> String {
        format!("{}.{}", self.name, k)
    }

    fn raw(&self, k: &str) -> Option<&'a Value> {
        self.table.and_then(|t| t.get(k))
    }

    fn float(&self, k: &str, default: Option<f64>) -> Result<f64> {
        match self.raw(k) {
            Some(Value::Float(v)) => Ok(*v),
            Some(Value::Integer(v)) => Ok(*v as f64),
            Some(_) => Err(config_err(&self.key(k), "expected a number")),
            None => default.ok_or_else(|| config_err(&self.key(k), "missing key")),
        }
    }

    fn opt_float(&self, k: &str) -> Result<Option<f64>> {
        match self.raw(k) {
            None => Ok(None),
            Some(_) => self.float(k, None).map(Some),
        }
    }

    fn uint(&self, k: &str, default: Option<usize>) -> Result<usize> {
        match self.raw(k) {
            Some(Value::Integer(v)) if *v >= 0 => Ok(*v as usize),
            Some(_) => Err(config_err(&self.key(k), "expected a non-negative integer")),
            None => default.ok_or_else(|| config_err(&self.key(k), "missing key")),
        }
    }

    fn string(&self, k: &str, default: Option<&str>) -> Result<String> {
        match self.raw(k) {
            Some(Value::String(v)) => Ok(v.clone()),
            Some(_) => Err(config_err(&self.key(k), "expected a string")),
            None => default
                .map(str::to_string)
                .ok_or_else(|| config_err(&self.key(k), "missing key")),
        }
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        if let Some(t) = self.table {
            for k in t.keys() {
                if !allowed.contains(&k.as_str()) {
                    return Err(config_err(&self.key(k), "unknown key"));
                }
            }
        }
        Ok(())
    }
}

/// Remaps a parameter error onto the configuration key that produced it.
fn at_key<T>(key: String, r: Result<T>) -> Result<T> {
    r.map_err(|e| config_err(&key, e.to_string()))
}

impl ProblemConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Parses a TOML problem description:
    ///
    /// ```toml
    /// backend = "quad"
    /// [frac]
    /// n = 1
    /// s = 0.5
    /// p = 2
    /// [grid]
    /// N = 64
    /// L = 8
    /// [omega]
    /// shape = "ball"
    /// radius = 4
    /// [density]
    /// name = "quadratic"
    /// amplitude = 1
    /// width = 1
    /// [complement]
    /// kind = "zero"
    /// [solver]
    /// max_iters = 2000
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let root: Table = text.parse().map_err(|e: toml::de::Error| {
            config_err("<file>", e.message().to_string())
        })?;
        for k in root.keys() {
            if !["backend", "frac", "grid", "omega", "density", "complement", "solver"].contains(&k.as_str()) {
                return Err(config_err(k, "unknown key"));
            }
        }
        let backend = match root.get("backend") {
            None => Backend::Quadrature,
            Some(Value::String(s)) => s.parse().map_err(|_| config_err("backend", "expected `quad` or `spec`"))?,
            Some(_) => return Err(config_err("backend", "expected a string")),
        };

        let frac = Section::get(&root, "frac", true)?;
        frac.check_keys(&["n", "s", "p"])?;
        let n = frac.uint("n", None)?;
        let s = frac.float("s", None)?;
        let p = frac.float("p", Some(2.0))?;
        let params = FracParams::new(n, s, p).map_err(|e| match e {
            FracError::InvalidParameter { name, reason } => config_err(&frac.key(name), reason),
            other => other,
        })?;

        let grid_s = Section::get(&root, "grid", true)?;
        grid_s.check_keys(&["N", "L"])?;
        let points = grid_s.uint("N", None)?;
        let extent = grid_s.float("L", None)?;
        let grid = Grid::new(n, extent, points).map_err(|e| match e {
            FracError::InvalidParameter { name, reason } => config_err(&grid_s.key(name), reason),
            other => other,
        })?;

        let omega_s = Section::get(&root, "omega", false)?;
        omega_s.check_keys(&["shape", "radius"])?;
        let radius = omega_s.float("radius", Some(extent / 2.0))?;
        if !(radius > 0.0 && radius < extent) {
            return Err(config_err(&omega_s.key("radius"), "must lie in (0, L)"));
        }
        let omega = match omega_s.string("shape", Some("ball"))?.as_str() {
            "ball" => at_key(omega_s.key("radius"), RegionMask::ball(grid, radius))?,
            "cube" => at_key(omega_s.key("radius"), RegionMask::cube(grid, radius))?,
            other => return Err(config_err(&omega_s.key("shape"), format!("unknown shape `{other}`"))),
        };

        let dens = Section::get(&root, "density", true)?;
        let density: Arc<dyn EnergyDensity> = match dens.string("name", None)?.as_str() {
            "quadratic" => {
                dens.check_keys(&["name", "amplitude", "width"])?;
                let amplitude = dens.float("amplitude", Some(1.0))?;
                let width = dens.float("width", Some(1.0))?;
                if !(width > 0.0) || !amplitude.is_finite() {
                    return Err(config_err(&dens.key("width"), "must be positive"));
                }
                Arc::new(Quadratic {
                    datum: gaussian_datum(n, amplitude, width),
                })
            }
            "dirichlet" => {
                dens.check_keys(&["name"])?;
                Arc::new(Dirichlet)
            }
            "polyconvex" => {
                dens.check_keys(&["name"])?;
                Arc::new(Polyconvex { n })
            }
            other => return Err(config_err(&dens.key("name"), format!("unknown density `{other}`"))),
        };

        let comp = Section::get(&root, "complement", false)?;
        comp.check_keys(&["kind", "stretch"])?;
        let g = match comp.string("kind", Some("zero"))?.as_str() {
            "zero" => VectorField::zeros(grid),
            "dilation" => {
                let stretch = comp.float("stretch", None)?;
                at_key(comp.key("stretch"), dilation_complement(grid, stretch))?
            }
            other => return Err(config_err(&comp.key("kind"), format!("unknown complement `{other}`"))),
        };

        let solver = Section::get(&root, "solver", false)?;
        solver.check_keys(&["tol_g", "max_iters"])?;
        let tol_g = solver.opt_float("tol_g")?;
        if let Some(t) = tol_g {
            if !(t > 0.0) {
                return Err(config_err(&solver.key("tol_g"), "must be positive"));
            }
        }
        let max_iters = solver.uint("max_iters", Some(2000))?;

        let problem = Problem::new(params, omega, g, density, backend)?;
        Ok(Self {
            problem,
            tol_g,
            max_iters,
        })
    }
}
