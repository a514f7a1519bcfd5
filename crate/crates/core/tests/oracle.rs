mod common;

use common::{gauss_ds_1d, GAUSS_1D, GAUSS_2D};
use fracvar::experiments::{cut_gaussian, observed_order};
use fracvar::{Backend, Field, FracOperator, FracParams, Grid};

#[test]
fn series_matches_frozen_values() {
    for (s, x, v) in GAUSS_1D {
        assert!((gauss_ds_1d(s, x) - v).abs() < 1e-13, "s={s} x={x}");
        assert!((gauss_ds_1d(s, -x) + v).abs() < 1e-13);
    }
}

fn sup_error_1d(s: f64, points: usize, backend: Backend) -> f64 {
    let grid = Grid::new(1, 6.0, points).unwrap();
    let op = FracOperator::new(FracParams::new(1, s, 2.0).unwrap(), grid, backend).unwrap();
    let d = op.ds_grad(&cut_gaussian(grid).unwrap()).unwrap();
    (0..points)
        .filter(|&k| grid.in_inner_half(k))
        .map(|k| (d.values()[k] - gauss_ds_1d(s, grid.axis_coord(k))).abs())
        .fold(0.0, f64::max)
}

#[test]
fn quadrature_converges_to_closed_form() {
    for s in [0.25, 0.5, 0.75] {
        let e: Vec<f64> = [64, 128, 256].iter().map(|&p| sup_error_1d(s, p, Backend::Quadrature)).collect();
        for w in e.windows(2) {
            let order = observed_order(2.0, 1.0, w[0], w[1]);
            assert!(order > 2.0 - s, "s={s} errors {e:?}");
        }
        assert!(e[2] < 5e-3, "s={s} {e:?}");
    }
}

#[test]
fn spectral_matches_closed_form_up_to_image_floor() {
    for s in [0.25, 0.5, 0.75] {
        let e = sup_error_1d(s, 256, Backend::Spectral);
        assert!(e < 1e-2, "s={s} {e}");
    }
}

/// Grid with a node at `(3h/2, 21h/2)`, a point of radius `r`.
fn node_at_radius(r: f64, points: usize) -> (Grid, usize) {
    let h = 2.0 * r / (3.0 * 50f64.sqrt());
    let grid = Grid::new(2, h * points as f64 / 2.0, points).unwrap();
    let mid = points / 2;
    let node = grid.node_index(&[mid + 1, mid + 10]);
    let x = grid.coords(node);
    assert!((x[0].hypot(x[1]) - r).abs() < 1e-12);
    (grid, node)
}

#[test]
fn two_dimensional_frozen_values() {
    for (s, r, rho) in GAUSS_2D {
        let (grid, node) = node_at_radius(r, 128);
        let x = grid.coords(node);
        for backend in [Backend::Quadrature, Backend::Spectral] {
            let op = FracOperator::new(FracParams::new(2, s, 2.0).unwrap(), grid, backend).unwrap();
            let d = op.ds_grad(&cut_gaussian(grid).unwrap()).unwrap();
            for (i, (&xi, &got)) in x.iter().zip(d.at(node)).enumerate() {
                let want = xi / r * rho;
                assert!((got - want).abs() < 2e-2 * rho.abs(), "{backend:?} s={s} r={r} i={i}: {got} vs {want}");
            }
        }
    }
}
