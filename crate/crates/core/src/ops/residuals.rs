use super::FracOperator;
use crate::error::Result;
use crate::field::{Field, MatrixField, ScalarField, VectorField};
use crate::norms::integrate;

/// `|∫ D^s u·φ + ∫ u div^s φ| / (1 + |∫ D^s u·φ|)`.
pub fn ibp_residual(op: &FracOperator, u: &ScalarField, phi: &VectorField) -> Result<f64> {
    let lhs = integrate(&op.ds_grad(u)?.dot(phi)?);
    let rhs = integrate(&u.mul(&op.ds_div(phi)?)?);
    Ok((lhs + rhs).abs() / (1.0 + lhs.abs()))
}

/// Normalized sup residuals of the two product rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductRuleResiduals {
    /// `D^s(φg) - φ D^s g - K_φ(gI)`.
    pub gradient: f64,
    /// `div^s(φv) - φ div^s v - K_φ(vᵀ)`.
    pub divergence: f64,
}

/// Sup-norm residuals of both product rules, each divided by `1 + sup|left side|`.
pub fn product_rule_residuals(
    op: &FracOperator,
    phi: &ScalarField,
    g: &ScalarField,
    v: &VectorField,
) -> Result<ProductRuleResiduals> {
    let lhs = op.ds_grad(&g.mul(phi)?)?;
    let rhs = op
        .ds_grad(g)?
        .weighted(phi)?
        .axpby(1.0, &op.k_phi(phi, &MatrixField::scalar_identity(g))?, 1.0)?;
    let gradient = lhs.axpby(1.0, &rhs, -1.0)?.sup_norm() / (1.0 + lhs.sup_norm());

    let lhs = op.ds_div(&v.weighted(phi)?)?;
    let rhs = op
        .ds_div(v)?
        .mul(phi)?
        .axpby(1.0, &op.k_phi_vec(phi, v)?, 1.0)?;
    let divergence = lhs.axpby(1.0, &rhs, -1.0)?.sup_norm() / (1.0 + lhs.sup_norm());
    Ok(ProductRuleResiduals { gradient, divergence })
}
