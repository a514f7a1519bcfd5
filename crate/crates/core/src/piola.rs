//! Checks of the fractional Piola identity and the determinant identities.
//!
//! Fields such as `D^s u` are not compactly supported, so their fractional
//! divergence computed on the box carries a truncation error concentrated near
//! the box boundary. Residual fields are therefore measured on the inner
//! half-box `|x|_∞ ≤ L/2`.

use serde::Serialize;

use crate::error::{FracError, Result};
use crate::field::{Field, MatrixField, ScalarField, VectorField};
use crate::minors::{det_minor, embedded_cofactor, project_ntilde, MinorSpec};
use crate::norms::integrate;
use crate::ops::{central_gradient, riesz_convolve, FracOperator};
use crate::reduce::tree_sum_by;

/// Normalized residual of `Div^s(M̄(cof M(D^s u)))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PiolaResidual {
    pub sup: f64,
    pub l2: f64,
}

/// Both sides of an integral identity and their normalized gap `|lhs - rhs| / (1 + |lhs|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub defect: f64,
}

impl IdentityCheck {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            defect: (lhs - rhs).abs() / (1.0 + lhs.abs()),
        }
    }
}

fn check_spec(op: &FracOperator, spec: &MinorSpec) -> Result<()> {
    if spec.n() != op.grid().n() {
        return Err(FracError::InvalidMinor(format!(
            "spec is for n = {}, operator has n = {}",
            spec.n(),
            op.grid().n()
        )));
    }
    Ok(())
}

/// `M̄(cof M(G))` at every node, split into its far-field constant value
/// `M̄(cof M(0))` and the decaying remainder.
fn embedded_cofactor_field(spec: &MinorSpec, g: &MatrixField) -> Result<(MatrixField, Vec<f64>)> {
    let n = spec.n();
    let far = embedded_cofactor(spec, &vec![0.0; n * n])?;
    let mut vals = Vec::with_capacity(g.values().len());
    for blk in g.values().chunks(n * n) {
        let p = embedded_cofactor(spec, blk)?;
        vals.extend(p.iter().zip(&far).map(|(a, b)| a - b));
    }
    Ok((MatrixField::from_values(*g.grid(), vals)?, far))
}

fn inner_norms(r: &VectorField) -> (f64, f64) {
    let g = *r.grid();
    let n = g.n();
    let v = r.values();
    let mag2 = |i: usize| v[i * n..(i + 1) * n].iter().map(|x| x * x).sum::<f64>();
    let sup = (0..g.num_nodes())
        .filter(|&i| g.in_inner_half(i))
        .fold(0f64, |m, i| m.max(mag2(i).sqrt()));
    let l2 = tree_sum_by(g.num_nodes(), |i| if g.in_inner_half(i) { mag2(i) } else { 0.0 });
    (sup, (l2 * g.cell_volume()).sqrt())
}

/// `Div^s(M̄(cof M(D^s u)))` on the inner half-box, sup and `L²` norms
/// divided by `1 + sup|M̄(cof M(D^s u))|`.
///
/// The difference form of `Div^s` annihilates constants, so the far-field
/// value `M̄(cof M(0))` (nonzero only for `k = 1`) is removed before the
/// divergence is taken.
pub fn piola_residual(op: &FracOperator, u: &VectorField, spec: &MinorSpec) -> Result<PiolaResidual> {
    check_spec(op, spec)?;
    let g = op.ds_grad_vec(u)?;
    let (p, far) = embedded_cofactor_field(spec, &g)?;
    let scale = 1.0 + p.sup_norm().max(far.iter().fold(0f64, |m, v| m.max(v.abs())));
    let r = op.ds_div_matrix_truncated(&p)?;
    let (sup, l2) = inner_norms(&r);
    Ok(PiolaResidual {
        sup: sup / scale,
        l2: l2 / scale,
    })
}

/// `∫ det M(D^s u) φ` against `-(1/k) ∫ Ñ(u)·K_φ(M̄(cof M(D^s u)))`.
pub fn det_ibp_residual(
    op: &FracOperator,
    u: &VectorField,
    phi: &ScalarField,
    spec: &MinorSpec,
) -> Result<IdentityCheck> {
    check_spec(op, spec)?;
    let n = spec.n();
    let g = op.ds_grad_vec(u)?;
    let lhs = det_pairing(spec, &g, phi)?;
    let (p, far) = embedded_cofactor_field(spec, &g)?;
    // K_φ of a constant matrix C is C·D^s φ.
    let mut k = op.k_phi(phi, &p)?;
    let dphi = op.ds_grad(phi)?;
    for (kv, dv) in k.values_mut().chunks_mut(n).zip(dphi.values().chunks(n)) {
        for i in 0..n {
            kv[i] += (0..n).map(|j| far[i * n + j] * dv[j]).sum::<f64>();
        }
    }
    let proj: Vec<f64> = u
        .values()
        .chunks(n)
        .map(|blk| project_ntilde(spec, blk))
        .collect::<Result<Vec<_>>>()?
        .concat();
    let proj = VectorField::from_values(*u.grid(), proj)?;
    let rhs = -integrate(&proj.dot(&k)?) / spec.k() as f64;
    Ok(IdentityCheck::new(lhs, rhs))
}

fn det_pairing(spec: &MinorSpec, g: &MatrixField, phi: &ScalarField) -> Result<f64> {
    let n = spec.n();
    let dets: Vec<f64> = g
        .values()
        .chunks(n * n)
        .map(|blk| det_minor(spec, blk))
        .collect::<Result<_>>()?;
    Ok(integrate(&ScalarField::from_values(*g.grid(), dets)?.mul(phi)?))
}

/// `∫ det D^s u φ` against `-(1/n) ∫ (I_{1-s} * u)·(cof D^s u ∇φ)`, with the
/// Riesz potential from [`riesz_convolve`] and `∇φ` by central differences.
pub fn det_riesz_identity_residual(op: &FracOperator, u: &VectorField, phi: &ScalarField) -> Result<IdentityCheck> {
    let n = op.grid().n();
    if !(2..=3).contains(&n) {
        return Err(FracError::UnsupportedDimension(n));
    }
    phi.check_compact()?;
    let full = MinorSpec::full(n)?;
    let g = op.ds_grad_vec(u)?;
    let lhs = det_pairing(&full, &g, phi)?;
    let riesz: Vec<ScalarField> = u
        .components()
        .iter()
        .map(|c| riesz_convolve(op.params(), c))
        .collect::<Result<_>>()?;
    let iu = VectorField::from_components(&riesz)?;
    let dphi = central_gradient(phi);
    let mut w = vec![0.0; g.grid().num_nodes() * n];
    for (node, out) in w.chunks_mut(n).enumerate() {
        let c = crate::minors::cof(n, &g.values()[node * n * n..(node + 1) * n * n])?;
        let d = dphi.at(node);
        for i in 0..n {
            out[i] = (0..n).map(|j| c[i * n + j] * d[j]).sum();
        }
    }
    let w = VectorField::from_values(*g.grid(), w)?;
    let rhs = -integrate(&iu.dot(&w)?) / n as f64;
    Ok(IdentityCheck::new(lhs, rhs))
}

/// One row of the weak-continuity probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeRow {
    pub j: usize,
    pub order: usize,
    /// `max` over minors of that order of `|∫ μ(D^s u_j) φ - ∫ μ(D^s u) φ|`.
    pub gap: f64,
}

/// Pairings of the minors of `D^s u_j`, `u_j = u + sin(j x₁) ψ / j`, against a
/// fixed `φ`, compared with those of `D^s u`.
pub fn weak_continuity_probe(
    op: &FracOperator,
    u: &VectorField,
    envelope: &ScalarField,
    phi: &ScalarField,
    js: &[usize],
) -> Result<Vec<ProbeRow>> {
    let grid = *op.grid();
    let n = grid.n();
    envelope.check_compact()?;
    let specs = MinorSpec::all(n);
    let base_g = op.ds_grad_vec(u)?;
    let base: Vec<f64> = specs.iter().map(|s| det_pairing(s, &base_g, phi)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &j in js {
        if j == 0 {
            return Err(crate::error::invalid("j", "sequence indices must be positive"));
        }
        let jf = j as f64;
        let osc = ScalarField::from_fn(grid, |x| (jf * x[0]).sin() / jf)?.mul(envelope)?;
        let bump_vec = VectorField::from_components(&vec![osc; n])?;
        let uj = u.axpby(1.0, &bump_vec, 1.0)?;
        let gj = op.ds_grad_vec(&uj)?;
        for order in 1..=n {
            let mut gap = 0f64;
            for (s, b) in specs.iter().zip(&base) {
                if s.k() == order {
                    gap = gap.max((det_pairing(s, &gj, phi)? - b).abs());
                }
            }
            rows.push(ProbeRow { j, order, gap });
        }
    }
    Ok(rows)
}
