use std::sync::Arc;

use fracvar::solve::{
    dilation_complement, el_residual, gaussian_datum, minimize, Polyconvex, Problem, Quadratic, SolverOptions,
    Termination,
};
use fracvar::{Backend, Field, FracParams, Grid, RegionMask, VectorField};
use rustfft::{num_complex::Complex64, FftPlanner};

/// Solution of `((2π|ξ|)^{2s} + 1) û = f̂` for `f = e^{-πx²}`, sampled on a
/// periodic grid of `big` nodes with spacing `h` centered like the solver grid.
fn spectral_solution(s: f64, h: f64, big: usize) -> Vec<f64> {
    let mut buf: Vec<Complex64> = (0..big)
        .map(|k| {
            let x = h * (k as f64 - big as f64 / 2.0 + 0.5);
            Complex64::new((-std::f64::consts::PI * x * x).exp(), 0.0)
        })
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(big).process(&mut buf);
    for (k, v) in buf.iter_mut().enumerate() {
        let kk = if k <= big / 2 { k as f64 } else { k as f64 - big as f64 };
        let xi = kk / (big as f64 * h);
        *v /= (2.0 * std::f64::consts::PI * xi.abs()).powf(2.0 * s) + 1.0;
    }
    planner.plan_fft_inverse(big).process(&mut buf);
    buf.iter().map(|c| c.re / big as f64).collect()
}

fn quadratic_problem(points: usize, extent: f64, s: f64, backend: Backend) -> Problem {
    let grid = Grid::new(1, extent, points).unwrap();
    Problem::new(
        FracParams::new(1, s, 2.0).unwrap(),
        RegionMask::ball(grid, extent / 2.0).unwrap(),
        VectorField::zeros(grid),
        Arc::new(Quadratic {
            datum: gaussian_datum(1, 1.0, 1.0),
        }),
        backend,
    )
    .unwrap()
}

/// Relative `L²` distance to the spectral solution on `|x| ≤ L/4`.
fn quadratic_error(u: &VectorField, s: f64) -> f64 {
    let grid = *u.grid();
    let points = grid.points();
    let big = 64 * points;
    let o = spectral_solution(s, grid.spacing(), big);
    let off = big / 2 - points / 2;
    let (mut num, mut den) = (0.0, 0.0);
    for k in 0..points {
        if grid.axis_coord(k).abs() <= grid.extent() / 4.0 {
            num += (u.values()[k] - o[off + k]).powi(2);
            den += o[off + k].powi(2);
        }
    }
    (num / den).sqrt()
}

#[test]
fn quadratic_minimizer_matches_spectral_solution() {
    for s in [0.3, 0.5, 0.75] {
        for (backend, tol) in [(Backend::Quadrature, 5e-2), (Backend::Spectral, 1e-2)] {
            let prob = quadratic_problem(64, 8.0, s, backend);
            let (u, rep) = minimize(&prob, &VectorField::zeros(*prob.grid()), SolverOptions::default()).unwrap();
            assert_eq!(rep.termination, Termination::Converged);
            assert!(rep.is_monotone());
            assert!(rep.el_residual <= 10.0 * rep.tol_g);
            let err = quadratic_error(&u, s);
            assert!(err <= tol, "s={s} {backend:?}: {err}");
        }
    }
}

#[test]
fn residual_separates_minimizer_from_other_fields() {
    let prob = quadratic_problem(64, 8.0, 0.5, Backend::Quadrature);
    let (u, rep) = minimize(&prob, &VectorField::zeros(*prob.grid()), SolverOptions::default()).unwrap();
    let other = prob.project(&u.axpby(1.0, &VectorField::from_fn(*prob.grid(), |x| vec![0.1 * (-x[0] * x[0]).exp()]).unwrap(), 1.0).unwrap()).unwrap();
    assert!(el_residual(&prob, &other).unwrap() >= 10.0 * rep.el_residual);
}

#[test]
fn polyconvex_plane_run() {
    let grid = Grid::new(2, 4.0, 48).unwrap();
    let prob = Problem::new(
        FracParams::new(2, 0.5, 4.0).unwrap(),
        RegionMask::ball(grid, 2.0).unwrap(),
        dilation_complement(grid, 0.5).unwrap(),
        Arc::new(Polyconvex { n: 2 }),
        Backend::Quadrature,
    )
    .unwrap();
    let (u, rep) = minimize(&prob, prob.complement(), SolverOptions::default()).unwrap();
    assert_eq!(rep.termination, Termination::Converged);
    assert!(rep.iterations <= 2000);
    assert!(rep.is_monotone());
    assert!(rep.final_gradient() <= rep.tol_g);
    assert!(rep.final_energy() < rep.energy_trace[0]);
    for node in 0..grid.num_nodes() {
        if !prob.omega().inside(node) {
            assert_eq!(u.at(node), prob.complement().at(node));
        }
    }
}
