//! Energy densities `W(x, u, F)` and their partial derivatives.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::minors::{cof, det};

/// Lower bound `W ≥ a + c|F|^p` (plus the optional cofactor and determinant terms).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coercivity {
    pub a: f64,
    pub c: f64,
    pub p: f64,
    /// Exponent of a `|cof F|^q` term, if present.
    pub q: Option<f64>,
    /// The superlinear determinant weight `h`, if present.
    pub det_weight: Option<&'static str>,
}

/// A density `W(x, u, F)` with `u ∈ ℝⁿ`, `F ∈ ℝ^{n×n}` row-major.
pub trait EnergyDensity: Send + Sync {
    fn name(&self) -> &str;
    fn evaluate(&self, x: &[f64], u: &[f64], f: &[f64]) -> f64;
    /// `∂W/∂u` into `out` (length `n`).
    fn d_du(&self, x: &[f64], u: &[f64], f: &[f64], out: &mut [f64]);
    /// `∂W/∂F` into `out` (length `n²`).
    fn d_df(&self, x: &[f64], u: &[f64], f: &[f64], out: &mut [f64]);
    fn coercivity(&self) -> Coercivity;
}

/// A vector datum `f(x)`.
pub type Datum = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// `|F|² + |u - f(x)|²`.
#[derive(Clone)]
pub struct Quadratic {
    pub datum: Datum,
}

impl fmt::Debug for Quadratic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Quadratic")
    }
}

impl EnergyDensity for Quadratic {
    fn name(&self) -> &str {
        "quadratic"
    }

    fn evaluate(&self, x: &[f64], u: &[f64], f: &[f64]) -> f64 {
        let d = (self.datum)(x);
        f.iter().map(|v| v * v).sum::<f64>() + u.iter().zip(&d).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
    }

    fn d_du(&self, x: &[f64], u: &[f64], _f: &[f64], out: &mut [f64]) {
        let d = (self.datum)(x);
        for ((o, a), b) in out.iter_mut().zip(u).zip(&d) {
            *o = 2.0 * (a - b);
        }
    }

    fn d_df(&self, _x: &[f64], _u: &[f64], f: &[f64], out: &mut [f64]) {
        for (o, v) in out.iter_mut().zip(f) {
            *o = 2.0 * v;
        }
    }

    fn coercivity(&self) -> Coercivity {
        Coercivity {
            a: 0.0,
            c: 1.0,
            p: 2.0,
            q: None,
            det_weight: None,
        }
    }
}

/// `|F|²`.
#[derive(Debug, Clone, Copy)]
pub struct Dirichlet;

impl EnergyDensity for Dirichlet {
    fn name(&self) -> &str {
        "dirichlet"
    }

    fn evaluate(&self, _x: &[f64], _u: &[f64], f: &[f64]) -> f64 {
        f.iter().map(|v| v * v).sum()
    }

    fn d_du(&self, _x: &[f64], _u: &[f64], _f: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }

    fn d_df(&self, _x: &[f64], _u: &[f64], f: &[f64], out: &mut [f64]) {
        for (o, v) in out.iter_mut().zip(f) {
            *o = 2.0 * v;
        }
    }

    fn coercivity(&self) -> Coercivity {
        Coercivity {
            a: 0.0,
            c: 1.0,
            p: 2.0,
            q: None,
            det_weight: None,
        }
    }
}

/// `|F|⁴ + (det F - 1)²`.
#[derive(Debug, Clone, Copy)]
pub struct Polyconvex {
    pub n: usize,
}

impl EnergyDensity for Polyconvex {
    fn name(&self) -> &str {
        "polyconvex"
    }

    fn evaluate(&self, _x: &[f64], _u: &[f64], f: &[f64]) -> f64 {
        let f2: f64 = f.iter().map(|v| v * v).sum();
        let d = det(self.n, f).expect("n checked at construction") - 1.0;
        f2 * f2 + d * d
    }

    fn d_du(&self, _x: &[f64], _u: &[f64], _f: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }

    fn d_df(&self, _x: &[f64], _u: &[f64], f: &[f64], out: &mut [f64]) {
        let f2: f64 = f.iter().map(|v| v * v).sum();
        let d = det(self.n, f).expect("n checked at construction") - 1.0;
        let c = cof(self.n, f).expect("n checked at construction");
        for ((o, v), cv) in out.iter_mut().zip(f).zip(&c) {
            *o = 4.0 * f2 * v + 2.0 * d * cv;
        }
    }

    fn coercivity(&self) -> Coercivity {
        Coercivity {
            a: 0.0,
            c: 1.0,
            p: 4.0,
            q: None,
            det_weight: Some("(t - 1)^2"),
        }
    }
}
