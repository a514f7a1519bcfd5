use super::*;
use crate::field::{bump, norm, smooth_cutoff};
use crate::norms::integrate;

fn gaussian(g: Grid) -> ScalarField {
    let l = g.extent();
    ScalarField::from_fn(g, |x| {
        let r = norm(x);
        (-PI * r * r).exp() * smooth_cutoff(r, 0.5 * l, 0.75 * l)
    })
    .unwrap()
}

fn op(n: usize, s: f64, l: f64, pts: usize, b: Backend) -> FracOperator {
    FracOperator::new(FracParams::new(n, s, 2.0).unwrap(), Grid::new(n, l, pts).unwrap(), b).unwrap()
}

#[test]
fn zero_in_zero_out() {
    for b in [Backend::Quadrature, Backend::Spectral] {
        let o = op(2, 0.4, 2.0, 16, b);
        let z = ScalarField::zeros(*o.grid());
        assert_eq!(o.ds_grad(&z).unwrap().sup_norm(), 0.0);
        assert_eq!(o.ds_div(&VectorField::zeros(*o.grid())).unwrap().sup_norm(), 0.0);
        assert_eq!(riesz_convolve(o.params(), &z).unwrap().sup_norm(), 0.0);
    }
}

#[test]
fn convolution_matches_direct_sum() {
    for n in 1..=2 {
        let o = op(n, 0.35, 2.0, 16, Backend::Quadrature);
        let g = *o.grid();
        let u = ScalarField::from_fn(g, |x| bump(norm(x), 1.3) * (1.0 + x[0])).unwrap();
        let fast = o.ds_grad(&u).unwrap();
        let slow = o.ds_grad_direct(&u).unwrap();
        let diff = fast.axpby(1.0, &slow, -1.0).unwrap().sup_norm();
        assert!(diff < 1e-12 * (1.0 + slow.sup_norm()), "n={n} diff={diff:e}");
    }
}

#[test]
fn rejects_support_on_boundary_and_mismatched_grid() {
    let o = op(1, 0.5, 1.0, 8, Backend::Spectral);
    let wide = ScalarField::from_fn(*o.grid(), |_| 1.0).unwrap();
    assert!(matches!(o.ds_grad(&wide), Err(FracError::SupportViolation { .. })));
    assert!(o.ds_grad_truncated(&wide).is_ok());
    let other = ScalarField::zeros(Grid::new(1, 1.0, 10).unwrap());
    assert!(o.ds_grad(&other).is_err());
    assert!(FracOperator::new(
        FracParams::new(2, 0.5, 2.0).unwrap(),
        Grid::new(1, 1.0, 8).unwrap(),
        Backend::Quadrature
    )
    .is_err());
}

#[test]
fn discrete_adjointness_both_backends() {
    for b in [Backend::Quadrature, Backend::Spectral] {
        for n in 1..=2 {
            let o = op(n, 0.6, 4.0, 32, b);
            let g = *o.grid();
            let u = gaussian(g);
            let phi = VectorField::from_fn(g, |x| {
                let w = bump(norm(x), 1.5);
                (0..n).map(|i| w * (x[i] + 0.3 * i as f64)).collect()
            })
            .unwrap();
            let r = ibp_residual(&o, &u, &phi).unwrap();
            assert!(r < 1e-13, "{b:?} n={n} defect {r:e}");
        }
    }
}

#[test]
fn gradient_parity_for_odd_input() {
    // odd in x_0 => component 0 even in x_0, component 1 odd in x_0
    for b in [Backend::Quadrature, Backend::Spectral] {
        let o = op(2, 0.5, 2.0, 16, b);
        let g = *o.grid();
        let u = ScalarField::from_fn(g, |x| x[0] * bump(norm(x), 1.2) * (1.0 + 0.5 * x[1])).unwrap();
        let d = o.ds_grad(&u).unwrap();
        let big = g.points();
        for node in 0..g.num_nodes() {
            let idx = g.multi_index(node);
            let mirror = g.node_index(&[big - 1 - idx[0], idx[1]]);
            assert!((d.at(node)[0] - d.at(mirror)[0]).abs() < 1e-12);
            assert!((d.at(node)[1] + d.at(mirror)[1]).abs() < 1e-12);
        }
    }
}

#[test]
fn translation_equivariance() {
    for b in [Backend::Quadrature, Backend::Spectral] {
        let o = op(2, 0.45, 3.0, 24, b);
        let g = *o.grid();
        let h = g.spacing();
        let f = |x: &[f64]| bump(norm(x), 1.0) * (2.0 + x[0] - x[1]);
        let u = ScalarField::from_fn(g, f).unwrap();
        let shifted = ScalarField::from_fn(g, |x| f(&[x[0] - 3.0 * h, x[1] + 2.0 * h])).unwrap();
        let (a, c) = (o.ds_grad(&u).unwrap(), o.ds_grad(&shifted).unwrap());
        for node in 0..g.num_nodes() {
            if !g.in_inner_half(node) {
                continue;
            }
            let idx = g.multi_index(node);
            let src = g.node_index(&[idx[0] - 3, idx[1] + 2]);
            for i in 0..2 {
                // the spectral torus differs by images only, which are translation invariant too
                assert!((c.at(node)[i] - a.at(src)[i]).abs() < 1e-6, "{b:?}");
            }
        }
    }
}

#[test]
fn rotation_equivariance() {
    // u_rot(x0, x1) = u(x1, -x0) => (D u_rot)(x) = R (D u)(x1, -x0) with R(a, b) = (-b, a)
    for b in [Backend::Quadrature, Backend::Spectral] {
        let o = op(2, 0.55, 2.0, 20, b);
        let g = *o.grid();
        let f = |x: &[f64]| bump(norm(x), 1.4) * (1.0 + x[0] + 0.4 * x[1] * x[1]);
        let u = ScalarField::from_fn(g, f).unwrap();
        let ur = ScalarField::from_fn(g, |x| f(&[x[1], -x[0]])).unwrap();
        let (d, dr) = (o.ds_grad(&u).unwrap(), o.ds_grad(&ur).unwrap());
        let big = g.points();
        for node in 0..g.num_nodes() {
            let idx = g.multi_index(node);
            let src = g.node_index(&[idx[1], big - 1 - idx[0]]);
            let a = d.at(src);
            assert!((dr.at(node)[0] + a[1]).abs() < 1e-12, "{b:?}");
            assert!((dr.at(node)[1] - a[0]).abs() < 1e-12, "{b:?}");
        }
    }
}

#[test]
fn div_of_single_direction_is_gradient_component() {
    for b in [Backend::Quadrature, Backend::Spectral] {
        let o = op(2, 0.3, 2.0, 16, b);
        let g = *o.grid();
        let f = ScalarField::from_fn(g, |x| bump(norm(x), 1.2) * (x[1] + 0.2)).unwrap();
        let e1 = VectorField::from_components(&[ScalarField::zeros(g), f.clone()]).unwrap();
        let div = o.ds_div(&e1).unwrap();
        let grad = o.ds_grad(&f).unwrap().component(1);
        assert!(div.axpby(1.0, &grad, -1.0).unwrap().sup_norm() < 1e-13);
    }
}

#[test]
fn grad_vec_rows_and_equal_components() {
    let o = op(2, 0.5, 2.0, 16, Backend::Quadrature);
    let g = *o.grid();
    let f = ScalarField::from_fn(g, |x| bump(norm(x), 1.0)).unwrap();
    let u = VectorField::from_components(&[f.clone(), f.clone()]).unwrap();
    let m = o.ds_grad_vec(&u).unwrap();
    assert_eq!(m.row(0), m.row(1));
    assert_eq!(m.row(0), o.ds_grad(&f).unwrap());
    let d = o.ds_div_matrix(&MatrixField::from_rows(&[u.clone(), VectorField::zeros(g)]).unwrap()).unwrap();
    assert_eq!(d.component(1).sup_norm(), 0.0);
    assert_eq!(d.component(0), o.ds_div(&u).unwrap());
}

#[test]
fn k_phi_linear_and_zero() {
    for b in [Backend::Quadrature, Backend::Spectral] {
        let o = op(2, 0.5, 2.0, 16, b);
        let g = *o.grid();
        let phi = ScalarField::from_fn(g, |x| bump(norm(x), 1.5)).unwrap();
        let mk = |a: f64| {
            MatrixField::from_values(g, (0..g.num_nodes() * 4).map(|k| ((k as f64) * a).sin()).collect()).unwrap()
        };
        let (u, v) = (mk(0.37), mk(1.1));
        assert_eq!(o.k_phi(&phi, &MatrixField::zeros(g)).unwrap().sup_norm(), 0.0);
        let lhs = o.k_phi(&phi, &u.axpby(2.0, &v, -0.5).unwrap()).unwrap();
        let rhs = o
            .k_phi(&phi, &u)
            .unwrap()
            .axpby(2.0, &o.k_phi(&phi, &v).unwrap(), -0.5)
            .unwrap();
        assert!(lhs.axpby(1.0, &rhs, -1.0).unwrap().sup_norm() < 1e-12);
    }
}

#[test]
fn product_rules_small_and_shrinking() {
    let mut prev = f64::INFINITY;
    for pts in [64, 128, 256] {
        let o = op(1, 0.5, 4.0, pts, Backend::Quadrature);
        let g = *o.grid();
        let phi = ScalarField::from_fn(g, |x| bump((x[0] - 0.3).abs(), 1.5)).unwrap();
        let u = gaussian(g);
        let v = VectorField::from_components(std::slice::from_ref(&u)).unwrap();
        let r = product_rule_residuals(&o, &phi, &u, &v).unwrap();
        assert!(r.gradient < prev);
        assert!((r.gradient - r.divergence).abs() < 1e-12);
        prev = r.gradient;
    }
    assert!(prev < 1e-3);
    let o = op(1, 0.5, 4.0, 64, Backend::Spectral);
    let g = *o.grid();
    let zero = ScalarField::zeros(g);
    let u = gaussian(g);
    let r = product_rule_residuals(&o, &zero, &u, &VectorField::from_components(std::slice::from_ref(&u)).unwrap()).unwrap();
    assert_eq!((r.gradient, r.divergence), (0.0, 0.0));
}

#[test]
fn riesz_gradient_matches_fractional_gradient() {
    let mut prev = f64::INFINITY;
    for pts in [32, 64, 128] {
        let o = op(1, 0.5, 4.0, pts, Backend::Spectral);
        let u = gaussian(*o.grid());
        let ru = riesz_convolve(o.params(), &u).unwrap();
        let diff = central_gradient(&ru).axpby(1.0, &o.ds_grad(&u).unwrap(), -1.0).unwrap();
        let g = *o.grid();
        let err = (0..g.num_nodes())
            .filter(|&i| g.in_inner_half(i))
            .fold(0f64, |m, i| m.max(diff.at(i)[0].abs()));
        assert!(err < prev, "{pts} {err:e}");
        prev = err;
        let doubled = riesz_convolve(o.params(), &u.scale(2.0)).unwrap();
        assert!(doubled.axpby(1.0, &ru, -2.0).unwrap().sup_norm() < 1e-14);
    }
    assert!(prev < 1e-2);
}

#[test]
fn composition_is_fractional_laplacian() {
    // div^s D^s u has multiplier -(2π|ξ|)^{2s}; its integral against u is -‖D^s u‖².
    let o = op(1, 0.5, 6.0, 128, Backend::Spectral);
    let u = gaussian(*o.grid());
    let lap = o.ds_div_truncated(&o.ds_grad(&u).unwrap()).unwrap();
    let pairing = integrate(&lap.mul(&u).unwrap());
    // ∫ (2π|ξ|) e^{-2π ξ²} dξ = 1 for s = 1/2
    assert!((pairing + 1.0).abs() < 5e-3, "{pairing}");
}

#[test]
fn approaches_classical_gradient_as_s_to_one() {
    let g = Grid::new(1, 4.0, 128).unwrap();
    let u = gaussian(g);
    let classical = central_gradient(&u);
    let mut prev = f64::INFINITY;
    for s in [0.9, 0.95, 0.99] {
        let o = FracOperator::new(FracParams::new(1, s, 2.0).unwrap(), g, Backend::Quadrature).unwrap();
        let gap = o.ds_grad(&u).unwrap().axpby(1.0, &classical, -1.0).unwrap().sup_norm();
        assert!(gap < prev, "s={s} gap={gap}");
        prev = gap;
    }
    assert!(prev < 0.1);
}
