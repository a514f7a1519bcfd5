//! Fractional parameters, the normalizing constant `c_{n,s}`, the Riesz
//! potential kernel and the Fourier multiplier of the fractional gradient.
//!
//! Fourier convention, used everywhere in this crate:
//! `û(ξ) = ∫ u(x) e^{-2πi x·ξ} dx`.
//!
//! Orientation: the operators are normalized so that `D^s u → ∇u` as `s → 1`,
//! i.e. `D^s u(x) = κ pv ∫ (u(x) - u(y)) (x - y) / |x - y|^{n+s+1} dy` with
//! `κ = -c_{n,s} = |c_{n,s}| > 0`. With this orientation the multiplier of
//! `D^s` is `(2πiξ)(2π|ξ|)^{s-1}`.

use num_complex::Complex64;
use statrs::function::gamma::{gamma, gamma_ur};
use std::f64::consts::PI;

use crate::error::{invalid, Result};

/// Distance from 0 and 1 below which `s` is rejected.
pub const S_MARGIN: f64 = 1e-6;

/// Dimension `n`, fractional order `s` and integrability exponent `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracParams {
    n: usize,
    s: f64,
    p: f64,
    cns: f64,
    lattice_zeta: f64,
}

impl FracParams {
    pub fn new(n: usize, s: f64, p: f64) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(invalid("n", format!("dimension must be 1, 2 or 3, got {n}")));
        }
        if !s.is_finite() || s <= S_MARGIN || s >= 1.0 - S_MARGIN {
            return Err(invalid(
                "s",
                format!("order must lie in ({S_MARGIN}, {}), got {s}", 1.0 - S_MARGIN),
            ));
        }
        if !p.is_finite() || p <= 1.0 {
            return Err(invalid("p", format!("exponent must exceed 1, got {p}")));
        }
        Ok(Self {
            n,
            s,
            p,
            cns: cns_formula(n, s),
            lattice_zeta: epstein_zeta(n, n as f64 + s - 1.0),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// The constant `c_{n,s}` (strictly negative).
    pub fn cns(&self) -> f64 {
        self.cns
    }

    /// Kernel constant `κ = -c_{n,s} > 0` multiplying every singular integral.
    pub fn kappa(&self) -> f64 {
        -self.cns
    }

    /// Epstein zeta `Z_n(n+s-1) = Σ'_{m∈ℤⁿ} |m|^{-(n+s-1)}` (analytic continuation).
    ///
    /// This is the lattice-sum defect of the even part `z⊗z / |z|^{n+s+1}` of the
    /// linearized integrand, used by the quadrature backend's singular correction.
    pub fn lattice_zeta(&self) -> f64 {
        self.lattice_zeta
    }

    pub fn with_s(&self, s: f64) -> Result<Self> {
        Self::new(self.n, s, self.p)
    }

    pub fn with_p(&self, p: f64) -> Result<Self> {
        Self::new(self.n, self.s, p)
    }
}

/// `c_{n,s} = -(n+s-1) Γ((n+s-1)/2) / (π^{n/2} 2^{1-s} Γ((1-s)/2))`.
pub fn cns(params: &FracParams) -> f64 {
    params.cns
}

fn cns_formula(n: usize, s: f64) -> f64 {
    let nf = n as f64;
    let a = nf + s - 1.0;
    -a * gamma(a / 2.0) / (PI.powf(nf / 2.0) * 2f64.powf(1.0 - s) * gamma((1.0 - s) / 2.0))
}

/// `Σ'_{m∈ℤⁿ} |m|^{-a}` for `0 < a < n`, continued analytically via the
/// theta-function splitting at `t = 1`:
///
/// `π^{-a/2} Γ(a/2) Z(a) = -2/a - 2/(n-a) + Σ' [G(a/2, π|m|²) + G((n-a)/2, π|m|²)]`
/// with `G(ν, x) = Γ(ν, x) x^{-ν}`.
pub fn epstein_zeta(n: usize, a: f64) -> f64 {
    let nf = n as f64;
    debug_assert!(a > 0.0 && a < nf);
    const M: i64 = 6;
    let upper = |nu: f64, x: f64| gamma_ur(nu, x) * gamma(nu) * x.powf(-nu);
    let mut total = 0.0;
    let mut idx = vec![-M; n];
    loop {
        let r2: i64 = idx.iter().map(|k| k * k).sum();
        if r2 != 0 {
            let x = PI * r2 as f64;
            total += upper(a / 2.0, x) + upper((nf - a) / 2.0, x);
        }
        let mut d = 0;
        loop {
            if d == n {
                let lam = -2.0 / a - 2.0 / (nf - a) + total;
                return lam / (PI.powf(-a / 2.0) * gamma(a / 2.0));
            }
            idx[d] += 1;
            if idx[d] <= M {
                break;
            }
            idx[d] = -M;
            d += 1;
        }
    }
}

/// The Riesz potential `I_{1-s}(x) = amplitude · |x|^{-exponent}` linking the
/// fractional and classical gradients, `D^s u = D(I_{1-s} * u)`.
#[derive(Debug, Clone, Copy)]
pub struct RieszPotentialKernel {
    pub params: FracParams,
    pub amplitude: f64,
    pub exponent: f64,
}

impl RieszPotentialKernel {
    pub fn new(params: FracParams) -> Self {
        let n = params.n() as f64;
        let s = params.s();
        Self {
            params,
            amplitude: -params.cns() / (n + s - 1.0),
            exponent: n + s - 1.0,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.amplitude * r.powf(-self.exponent)
    }

    /// Fourier symbol `(2π|ξ|)^{-(1-s)}`, zero at the origin.
    pub fn symbol(&self, xi: &[f64]) -> f64 {
        let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r == 0.0 {
            0.0
        } else {
            (2.0 * PI * r).powf(self.params.s() - 1.0)
        }
    }
}

/// Multiplier vector of `D^s` at frequency `xi`: `(2πiξ)(2π|ξ|)^{s-1}`.
pub fn frac_symbol(params: &FracParams, xi: &[f64]) -> Vec<Complex64> {
    let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r == 0.0 {
        return vec![Complex64::new(0.0, 0.0); xi.len()];
    }
    let radial = (2.0 * PI * r).powf(params.s() - 1.0);
    xi.iter()
        .map(|&k| Complex64::new(0.0, 2.0 * PI * k * radial))
        .collect()
}
