//! Discrete fractional energies `I(u) = ∫ W(x, u, D^s u)`, their exact
//! gradients, and complement-value minimization.
//!
//! The gradient is taken of the discrete energy itself: the discrete `D^s`
//! is antisymmetric, so its adjoint is `-Div^s` on the box and
//! `∇I(u) = ∂_u W - Div^s(∂_F W)` holds to round-off.

pub mod density;
pub mod problem;

use std::collections::VecDeque;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{FracError, Result};
use crate::field::{Field, MatrixField, ScalarField, VectorField};
use crate::reduce::{max_abs, tree_sum_by};

pub use density::{Coercivity, Datum, Dirichlet, EnergyDensity, Polyconvex, Quadratic};
pub use problem::{dilation_complement, gaussian_datum, Problem, ProblemConfig};

/// Why [`minimize`] stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIterations,
    LineSearchFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub energy_trace: Vec<f64>,
    /// Sup norm of the projected gradient at each iterate.
    pub gradient_trace: Vec<f64>,
    pub tol_g: f64,
    pub el_residual: f64,
    pub wall_time_s: f64,
    pub termination: Termination,
}

impl SolveReport {
    pub fn final_energy(&self) -> f64 {
        *self.energy_trace.last().expect("trace holds the initial energy")
    }

    pub fn final_gradient(&self) -> f64 {
        *self.gradient_trace.last().expect("trace holds the initial gradient")
    }

    pub fn is_monotone(&self) -> bool {
        self.energy_trace.windows(2).all(|w| w[1] <= w[0])
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Defaults to `1e-8 (1 + |I(u0)|)`.
    pub tol_g: Option<f64>,
    pub max_iters: usize,
    /// Number of stored L-BFGS pairs.
    pub memory: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol_g: None,
            max_iters: 2000,
            memory: 10,
        }
    }
}

fn density_at<T>(
    prob: &Problem,
    u: &VectorField,
    grad: &MatrixField,
    node: usize,
    f: impl Fn(&[f64], &[f64], &[f64]) -> T,
) -> T {
    let x = prob.grid().coords(node);
    f(&x[..prob.grid().n()], u.at(node), grad.at(node))
}

fn nodal_energy(prob: &Problem, u: &VectorField) -> Result<(MatrixField, Vec<f64>)> {
    prob.check_admissible(u)?;
    let grad = prob.operator().ds_grad_vec(u)?;
    let w: Vec<f64> = (0..prob.grid().num_nodes())
        .into_par_iter()
        .map(|node| density_at(prob, u, &grad, node, |x, uu, f| prob.density().evaluate(x, uu, f)))
        .collect();
    if let Some(node) = w.iter().position(|v| !v.is_finite()) {
        let x = prob.grid().coords(node);
        return Err(FracError::NonFiniteEnergy {
            node,
            coords: x[..prob.grid().n()].to_vec(),
        });
    }
    Ok((grad, w))
}

/// Midpoint rule `hⁿ Σ W(x, u, D^s u)` over all box nodes.
pub fn energy(prob: &Problem, u: &VectorField) -> Result<f64> {
    let (_, w) = nodal_energy(prob, u)?;
    Ok(tree_sum_by(w.len(), |i| w[i]) * prob.grid().cell_volume())
}

/// Nodal derivatives `∂_u W` and `∂_F W`.
fn partials(prob: &Problem, u: &VectorField, grad: &MatrixField) -> Result<(VectorField, MatrixField)> {
    let n = prob.grid().n();
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..prob.grid().num_nodes())
        .into_par_iter()
        .map(|node| {
            density_at(prob, u, grad, node, |x, uu, f| {
                let mut du = vec![0.0; n];
                let mut df = vec![0.0; n * n];
                prob.density().d_du(x, uu, f, &mut du);
                prob.density().d_df(x, uu, f, &mut df);
                (du, df)
            })
        })
        .collect();
    let (du, df): (Vec<Vec<f64>>, Vec<Vec<f64>>) = pairs.into_iter().unzip();
    Ok((
        VectorField::from_values(*prob.grid(), du.concat())?,
        MatrixField::from_values(*prob.grid(), df.concat())?,
    ))
}

/// Energy and its `L²` gradient `∂_u W - Div^s(∂_F W)`, zero on `Ω^c`.
pub fn energy_and_gradient(prob: &Problem, u: &VectorField) -> Result<(f64, VectorField)> {
    let (grad, w) = nodal_energy(prob, u)?;
    let e = tree_sum_by(w.len(), |i| w[i]) * prob.grid().cell_volume();
    let (du, df) = partials(prob, u, &grad)?;
    let div = prob.operator().ds_div_matrix_truncated(&df)?;
    let n = prob.grid().n();
    let mut g = du.axpby(1.0, &div, -1.0)?;
    for (node, blk) in g.values_mut().chunks_mut(n).enumerate() {
        if !prob.omega().inside(node) {
            blk.fill(0.0);
        }
    }
    Ok((e, g))
}

pub fn energy_gradient(prob: &Problem, u: &VectorField) -> Result<VectorField> {
    energy_and_gradient(prob, u).map(|(_, g)| g)
}

/// `max |∫ ∂_F W : D^s v + ∂_u W · v| / ∫ v` over nodal hat functions
/// `v = e_c δ_y` at every `Ω` node `y` and direction `c`.
///
/// The pairings use the forward operator on each test field, not the adjoint
/// used by [`energy_gradient`].
pub fn el_residual(prob: &Problem, u: &VectorField) -> Result<f64> {
    let (grad, _) = nodal_energy(prob, u)?;
    let (du, df) = partials(prob, u, &grad)?;
    let grid = *prob.grid();
    let n = grid.n();
    let nodes: Vec<usize> = (0..grid.num_nodes()).filter(|&i| prob.omega().inside(i)).collect();
    let worst = nodes
        .par_iter()
        .map(|&y| -> Result<f64> {
            let mut hat = ScalarField::zeros(grid);
            hat.values_mut()[y] = 1.0;
            let dv = prob.operator().ds_grad(&hat)?;
            let mut m = 0f64;
            for c in 0..n {
                let pair = tree_sum_by(grid.num_nodes(), |x| {
                    let a = &df.at(x)[c * n..(c + 1) * n];
                    a.iter().zip(dv.at(x)).map(|(p, q)| p * q).sum::<f64>()
                });
                m = m.max((pair + du.at(y)[c]).abs());
            }
            Ok(m)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(worst.into_iter().fold(0.0, f64::max))
}

/// Largest relative gap between `⟨∇I(u), d⟩` and the central difference
/// `(I(u + εd) - I(u - εd)) / 2ε` over `count` random directions, each
/// perturbing three `Ω` nodes.
pub fn gradient_check(prob: &Problem, u: &VectorField, count: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = energy_gradient(prob, u)?;
    let grid = *prob.grid();
    let n = grid.n();
    let free: Vec<usize> = (0..grid.num_nodes()).filter(|&i| prob.omega().inside(i)).collect();
    let mut worst = 0f64;
    for _ in 0..count {
        let mut dir = vec![0.0; grid.num_nodes() * n];
        for _ in 0..3 {
            let node = free[rng.gen_range(0..free.len())];
            dir[node * n + rng.gen_range(0..n)] = rng.gen_range(-1.0..1.0);
        }
        let at = |t: f64| -> Result<f64> {
            let v: Vec<f64> = u.values().iter().zip(&dir).map(|(a, b)| a + t * b).collect();
            energy(prob, &VectorField::from_values(grid, v)?)
        };
        let eps = 1e-4;
        let fd = (at(eps)? - at(-eps)?) / (2.0 * eps);
        let an = dot(grid.cell_volume(), g.values(), &dir);
        worst = worst.max((fd - an).abs() / fd.abs().max(an.abs()).max(1e-8));
    }
    Ok(worst)
}

/// `u` equal to `g` plus uniform noise of size `amplitude` on `Ω`.
pub fn random_admissible(prob: &Problem, amplitude: f64, seed: u64) -> Result<VectorField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = *prob.grid();
    let noise: Vec<f64> = (0..grid.num_nodes() * grid.n())
        .map(|_| amplitude * rng.gen_range(-1.0..1.0))
        .collect();
    let u = VectorField::from_values(grid, noise)?.axpby(1.0, prob.complement(), 1.0)?;
    prob.project(&u)
}

/// `L²` inner product restricted to the free nodes; gradients vanish elsewhere.
fn dot(h: f64, a: &[f64], b: &[f64]) -> f64 {
    tree_sum_by(a.len(), |i| a[i] * b[i]) * h
}

/// L-BFGS on the `Ω` nodes with a backtracking line search.
///
/// A step is accepted when the energy does not increase and either the
/// Armijo condition or, once energy differences reach round-off, the
/// approximate Armijo slope condition `φ'(α) ≤ (1 - 2c)|φ'(0)|` holds.
pub fn minimize(prob: &Problem, u0: &VectorField, opts: SolverOptions) -> Result<(VectorField, SolveReport)> {
    const C1: f64 = 1e-4;
    const MAX_BACKTRACK: usize = 60;
    let start = Instant::now();
    let h = prob.grid().cell_volume();
    let mut u = prob.project(u0)?;
    let (mut e, mut g) = energy_and_gradient(prob, &u)?;
    let tol_g = opts.tol_g.unwrap_or(1e-8 * (1.0 + e.abs()));
    let mut energy_trace = vec![e];
    let mut gradient_trace = vec![max_abs(g.values())];
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;

    while iterations < opts.max_iters {
        if max_abs(g.values()) <= tol_g {
            termination = Termination::Converged;
            break;
        }
        let d = lbfgs_direction(h, g.values(), &history);
        let mut slope = dot(h, g.values(), &d);
        let d = if slope < 0.0 {
            d
        } else {
            history.clear();
            slope = -dot(h, g.values(), g.values());
            g.values().iter().map(|v| -v).collect()
        };
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACK {
            let trial_vals: Vec<f64> = u.values().iter().zip(&d).map(|(a, b)| a + alpha * b).collect();
            let trial = VectorField::from_values(*prob.grid(), trial_vals)?;
            match energy_and_gradient(prob, &trial) {
                Ok((et, gt)) if et <= e => {
                    let armijo = et <= e + C1 * alpha * slope;
                    let flat = e - et <= 1e-11 * (1.0 + e.abs());
                    let approx = flat && dot(h, gt.values(), &d) <= (1.0 - 2.0 * C1) * slope.abs();
                    if armijo || approx {
                        accepted = Some((trial, et, gt));
                        break;
                    }
                }
                Ok(_) | Err(FracError::NonFiniteEnergy { .. }) => {}
                Err(other) => return Err(other),
            }
            alpha *= 0.5;
        }
        let Some((un, en, gn)) = accepted else {
            termination = Termination::LineSearchFailure;
            break;
        };
        let s: Vec<f64> = un.values().iter().zip(u.values()).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.values().iter().zip(g.values()).map(|(a, b)| a - b).collect();
        let sy = dot(h, &s, &y);
        if sy > 1e-300 {
            if history.len() == opts.memory.max(1) {
                history.pop_front();
            }
            history.push_back((s, y, sy));
        }
        u = un;
        e = en;
        g = gn;
        iterations += 1;
        energy_trace.push(e);
        gradient_trace.push(max_abs(g.values()));
    }
    if termination == Termination::MaxIterations && max_abs(g.values()) <= tol_g {
        termination = Termination::Converged;
    }
    let el = el_residual(prob, &u)?;
    let report = SolveReport {
        iterations,
        energy_trace,
        gradient_trace,
        tol_g,
        el_residual: el,
        wall_time_s: start.elapsed().as_secs_f64(),
        termination,
    };
    Ok((u, report))
}

/// Two-loop recursion for `-H g`.
fn lbfgs_direction(h: f64, g: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, sy) in history.iter().rev() {
        let a = dot(h, s, &q) / sy;
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((_, y, sy)) = history.back() {
        let gamma = sy / dot(h, y, y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, y, sy), a) in history.iter().zip(alphas.iter().rev()) {
        let b = dot(h, y, &q) / sy;
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}
