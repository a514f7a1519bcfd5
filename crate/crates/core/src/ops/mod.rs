//! Discrete fractional gradient, divergence and the commutator operator `K_φ`.
//!
//! Both backends realize each component `D^s_i` as a convolution with a real,
//! odd kernel, evaluated exactly on the zero-padded `(2N)ⁿ` grid:
//!
//! * `Quadrature` samples the singular kernel at lattice offsets,
//!   `κ h^{-s} m_i / |m|^{n+s+1}`, and adds a singular-cell correction
//!   `-κ h^{1-s} (Z/n) ∂_i u(x)` with central differences, where `Z` is the
//!   lattice zeta value from [`FracParams::lattice_zeta`]. The correction
//!   cancels the lattice-sum defect of the linear part of the integrand, so the
//!   remaining consistency error is `O(h^{3-s})` for smooth fields.
//! * `Spectral` multiplies by the symbol `(2πiξ)(2π|ξ|)^{s-1}` on the padded
//!   grid, with the Nyquist plane of each odd component set to zero.
//!
//! Because every kernel is odd, `div^s = Σ_i D^s_i` is exactly the negative
//! adjoint of `D^s` with respect to the midpoint inner product, in both backends.
//!
//! Inputs outside the box are taken to be zero. The public operators require
//! the differentiated field to vanish on the boundary layer; the `_truncated`
//! variants accept any field and differentiate its restriction to the box.

mod residuals;

pub use residuals::{ibp_residual, product_rule_residuals, ProductRuleResiduals};

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{FracError, Result};
use crate::fft::PaddedFft;
use crate::field::{Field, MatrixField, ScalarField, VectorField};
use crate::grid::Grid;
use crate::params::{FracParams, RieszPotentialKernel};

/// Discretization of the fractional operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backend {
    Quadrature,
    Spectral,
}

impl Backend {
    pub fn name(&self) -> &'static str {
        match self {
            Backend::Quadrature => "quad",
            Backend::Spectral => "spec",
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = FracError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quad" | "quadrature" => Ok(Backend::Quadrature),
            "spec" | "spectral" => Ok(Backend::Spectral),
            _ => Err(crate::error::invalid(
                "backend",
                format!("expected `quad` or `spec`, got `{s}`"),
            )),
        }
    }
}

/// `D^s`, `div^s`, `Div^s` and `K_φ` for one `(params, grid, backend)` triple.
#[derive(Debug, Clone)]
pub struct FracOperator {
    params: FracParams,
    grid: Grid,
    backend: Backend,
    fft: PaddedFft,
    /// Imaginary part of the multiplier of each component on the padded grid.
    /// For the quadrature backend this is the uncorrected lattice kernel.
    multipliers: Arc<Vec<Vec<f64>>>,
    /// Weight `c` of the correction stencil `c (u(x + h e_i) - u(x - h e_i))`.
    stencil: f64,
}

impl FracOperator {
    pub fn new(params: FracParams, grid: Grid, backend: Backend) -> Result<Self> {
        if params.n() != grid.n() {
            return Err(FracError::GridMismatch(format!(
                "parameters are for n = {}, grid has n = {}",
                params.n(),
                grid.n()
            )));
        }
        if !grid.points().is_multiple_of(2) {
            return Err(FracError::OddGrid(grid.points()));
        }
        let fft = PaddedFft::new(&grid);
        let n = grid.n();
        let h = grid.spacing();
        let s = params.s();
        let kappa = params.kappa();
        let multipliers = match backend {
            Backend::Quadrature => (0..n)
                .map(|i| {
                    // Correlation weights W(m) stored as a convolution kernel K(m) = W(-m).
                    let mut data: Vec<Complex64> = (0..fft.len())
                        .into_par_iter()
                        .map(|pos| {
                            let idx = fft.multi_index(pos);
                            let mut m = [0f64; 3];
                            for d in 0..n {
                                let k = fft.freq_index(idx[d]);
                                if k == -(grid.points() as isize) {
                                    return Complex64::new(0.0, 0.0);
                                }
                                m[d] = k as f64;
                            }
                            let r2: f64 = m[..n].iter().map(|v| v * v).sum();
                            if r2 == 0.0 {
                                return Complex64::new(0.0, 0.0);
                            }
                            let w = kappa * h.powf(-s) * m[i] * r2.powf(-0.5 * (n as f64 + s + 1.0));
                            Complex64::new(-w, 0.0)
                        })
                        .collect();
                    fft.forward(&mut data);
                    data.into_iter().map(|z| z.im).collect()
                })
                .collect(),
            Backend::Spectral => {
                let size = fft.size();
                let dxi = 1.0 / (size as f64 * h);
                (0..n)
                    .map(|i| {
                        (0..fft.len())
                            .into_par_iter()
                            .map(|pos| {
                                let idx = fft.multi_index(pos);
                                let mut xi = [0f64; 3];
                                for d in 0..n {
                                    xi[d] = fft.freq_index(idx[d]) as f64 * dxi;
                                }
                                if idx[i] == size / 2 {
                                    return 0.0;
                                }
                                let r = xi[..n].iter().map(|v| v * v).sum::<f64>().sqrt();
                                if r == 0.0 {
                                    0.0
                                } else {
                                    2.0 * PI * xi[i] * (2.0 * PI * r).powf(s - 1.0)
                                }
                            })
                            .collect()
                    })
                    .collect()
            }
        };
        let stencil = match backend {
            Backend::Quadrature => -kappa * h.powf(-s) * params.lattice_zeta() / (2.0 * n as f64),
            Backend::Spectral => 0.0,
        };
        Ok(Self {
            params,
            grid,
            backend,
            fft,
            multipliers: Arc::new(multipliers),
            stencil,
        })
    }

    pub fn params(&self) -> &FracParams {
        &self.params
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    fn check_grid(&self, g: &Grid) -> Result<()> {
        self.grid.same_as(g)
    }

    /// `Σ_i D^s_i` applied to the given component arrays, `comps[i]` feeding
    /// direction `i`; `None` entries are skipped.
    fn apply_sum(&self, inputs: &[(usize, &[f64])]) -> Vec<f64> {
        let mut acc = vec![Complex64::new(0.0, 0.0); self.fft.len()];
        for &(dir, vals) in inputs {
            let mut data = self.fft.pad(vals, 1, 0);
            self.fft.forward(&mut data);
            let mult = &self.multipliers[dir];
            acc.par_iter_mut()
                .zip(data.par_iter())
                .zip(mult.par_iter())
                .for_each(|((a, z), &m)| *a += Complex64::new(-z.im * m, z.re * m));
        }
        self.fft.inverse(&mut acc);
        let mut out = self.fft.crop(&acc);
        if self.stencil != 0.0 {
            for &(dir, vals) in inputs {
                self.add_stencil(&mut out, dir, vals, None);
            }
        }
        out
    }

    /// All components `D^s_i v`, sharing one forward transform.
    fn apply_grad(&self, vals: &[f64]) -> Vec<Vec<f64>> {
        let mut data = self.fft.pad(vals, 1, 0);
        self.fft.forward(&mut data);
        (0..self.grid.n())
            .map(|dir| {
                let mult = &self.multipliers[dir];
                let mut out: Vec<Complex64> = data
                    .par_iter()
                    .zip(mult.par_iter())
                    .map(|(z, &m)| Complex64::new(-z.im * m, z.re * m))
                    .collect();
                self.fft.inverse(&mut out);
                let mut out = self.fft.crop(&out);
                if self.stencil != 0.0 {
                    self.add_stencil(&mut out, dir, vals, None);
                }
                out
            })
            .collect()
    }

    /// `out += c (v(x + h e_dir) - v(x - h e_dir)) · w(x)`, zero outside the box.
    fn add_stencil(&self, out: &mut [f64], dir: usize, v: &[f64], weight: Option<&[f64]>) {
        let g = self.grid;
        let big = g.points();
        let stride = big.pow((g.n() - 1 - dir) as u32);
        let c = self.stencil;
        out.par_iter_mut().enumerate().for_each(|(node, o)| {
            let k = (node / stride) % big;
            let plus = if k + 1 < big { v[node + stride] } else { 0.0 };
            let minus = if k > 0 { v[node - stride] } else { 0.0 };
            let w = weight.map_or(1.0, |w| w[node]);
            *o += c * (plus - minus) * w;
        });
    }

    /// `D^s u`.
    pub fn ds_grad(&self, u: &ScalarField) -> Result<VectorField> {
        u.check_compact()?;
        self.ds_grad_truncated(u)
    }

    /// `D^s` of `u` restricted to the box.
    pub fn ds_grad_truncated(&self, u: &ScalarField) -> Result<VectorField> {
        self.check_grid(u.grid())?;
        let comps: Vec<ScalarField> = self
            .apply_grad(u.values())
            .into_iter()
            .map(|v| ScalarField::from_values(self.grid, v))
            .collect::<Result<_>>()?;
        VectorField::from_components(&comps)
    }

    /// Row `i` of the result is `D^s u_i`.
    pub fn ds_grad_vec(&self, u: &VectorField) -> Result<MatrixField> {
        u.check_compact()?;
        self.ds_grad_vec_truncated(u)
    }

    pub fn ds_grad_vec_truncated(&self, u: &VectorField) -> Result<MatrixField> {
        self.check_grid(u.grid())?;
        let rows: Vec<VectorField> = u
            .components()
            .iter()
            .map(|c| self.ds_grad_truncated(c))
            .collect::<Result<_>>()?;
        MatrixField::from_rows(&rows)
    }

    /// `div^s φ = Σ_i D^s_i φ_i`.
    pub fn ds_div(&self, phi: &VectorField) -> Result<ScalarField> {
        phi.check_compact()?;
        self.ds_div_truncated(phi)
    }

    pub fn ds_div_truncated(&self, phi: &VectorField) -> Result<ScalarField> {
        self.check_grid(phi.grid())?;
        let comps = phi.components();
        let inputs: Vec<(usize, &[f64])> = comps.iter().enumerate().map(|(i, c)| (i, c.values())).collect();
        ScalarField::from_values(self.grid, self.apply_sum(&inputs))
    }

    /// `Div^s M`: component `i` is `div^s` of row `i`.
    pub fn ds_div_matrix(&self, m: &MatrixField) -> Result<VectorField> {
        m.check_compact()?;
        self.ds_div_matrix_truncated(m)
    }

    pub fn ds_div_matrix_truncated(&self, m: &MatrixField) -> Result<VectorField> {
        self.check_grid(m.grid())?;
        let comps: Vec<ScalarField> = m
            .rows()
            .iter()
            .map(|r| self.ds_div_truncated(r))
            .collect::<Result<_>>()?;
        VectorField::from_components(&comps)
    }

    /// `K_φ(U)(x) = κ ∫ (φ(x) - φ(y)) U(y) (x - y) / |x - y|^{n+s+1} dy`, with
    /// the sign convention of [`crate::params`]. `U` may be any field; it is
    /// truncated to the box.
    pub fn k_phi(&self, phi: &ScalarField, u: &MatrixField) -> Result<VectorField> {
        phi.check_compact()?;
        self.check_grid(phi.grid())?;
        self.check_grid(u.grid())?;
        let comps: Vec<ScalarField> = u
            .rows()
            .iter()
            .map(|row| self.k_phi_row(phi, row))
            .collect::<Result<_>>()?;
        VectorField::from_components(&comps)
    }

    /// `K_φ` of a single row `vᵀ`, a scalar field.
    pub fn k_phi_vec(&self, phi: &ScalarField, v: &VectorField) -> Result<ScalarField> {
        phi.check_compact()?;
        self.check_grid(phi.grid())?;
        self.check_grid(v.grid())?;
        self.k_phi_row(phi, v)
    }

    fn k_phi_row(&self, phi: &ScalarField, row: &VectorField) -> Result<ScalarField> {
        let n = self.grid.n();
        let comps = row.components();
        let weighted: Vec<Vec<f64>> = comps
            .iter()
            .map(|c| c.values().iter().zip(phi.values()).map(|(a, b)| a * b).collect())
            .collect();
        let plain: Vec<(usize, &[f64])> = comps.iter().enumerate().map(|(j, c)| (j, c.values())).collect();
        let prod: Vec<(usize, &[f64])> = weighted.iter().enumerate().map(|(j, c)| (j, c.as_slice())).collect();
        let t_prod = self.apply_sum_raw(&prod);
        let t_plain = self.apply_sum_raw(&plain);
        let mut out: Vec<f64> = t_prod
            .iter()
            .zip(&t_plain)
            .zip(phi.values())
            .map(|((a, b), p)| a - p * b)
            .collect();
        if self.stencil != 0.0 {
            // Gradient replacement of φ on the singular cell.
            for (j, c) in comps.iter().enumerate().take(n) {
                self.add_stencil(&mut out, j, phi.values(), Some(c.values()));
            }
        }
        ScalarField::from_values(self.grid, out)
    }

    /// [`Self::apply_sum`] without the quadrature correction stencil.
    fn apply_sum_raw(&self, inputs: &[(usize, &[f64])]) -> Vec<f64> {
        if self.stencil == 0.0 {
            return self.apply_sum(inputs);
        }
        let plain = Self {
            stencil: 0.0,
            ..self.clone()
        };
        plain.apply_sum(inputs)
    }

    /// Reference evaluation of the quadrature backend by direct summation over
    /// node pairs, `O(N^{2n})`. Used to validate the convolution path.
    pub fn ds_grad_direct(&self, u: &ScalarField) -> Result<VectorField> {
        u.check_compact()?;
        self.check_grid(u.grid())?;
        let g = self.grid;
        let n = g.n();
        let h = g.spacing();
        let s = self.params.s();
        let kappa = self.params.kappa();
        let z = self.params.lattice_zeta();
        let uv = u.values();
        let support: Vec<usize> = (0..g.num_nodes()).filter(|&j| uv[j] != 0.0).collect();
        let mut out = vec![0.0; g.num_nodes() * n];
        out.par_chunks_mut(n).enumerate().for_each(|(x, o)| {
            let xi = g.multi_index(x);
            for &y in &support {
                if y == x {
                    continue;
                }
                let yi = g.multi_index(y);
                let m: Vec<f64> = (0..n).map(|d| yi[d] as f64 - xi[d] as f64).collect();
                let r2: f64 = m.iter().map(|v| v * v).sum();
                let w = kappa * h.powf(-s) * r2.powf(-0.5 * (n as f64 + s + 1.0)) * uv[y];
                for d in 0..n {
                    o[d] += w * m[d];
                }
            }
            // -κ h^{1-s} (Z/n) ∇_h u(x)
            for d in 0..n {
                let stride = g.points().pow((n - 1 - d) as u32);
                let plus = if xi[d] + 1 < g.points() { uv[x + stride] } else { 0.0 };
                let minus = if xi[d] > 0 { uv[x - stride] } else { 0.0 };
                o[d] -= kappa * h.powf(1.0 - s) * z / n as f64 * (plus - minus) / (2.0 * h);
            }
        });
        VectorField::from_values(g, out)
    }
}

/// `I_{1-s} * u` by zero-padded Fourier multiplication with `(2π|ξ|)^{s-1}`
/// (zero at the zero frequency).
pub fn riesz_convolve(params: &FracParams, u: &ScalarField) -> Result<ScalarField> {
    u.check_compact()?;
    let grid = *u.grid();
    if params.n() != grid.n() {
        return Err(FracError::GridMismatch(format!(
            "parameters are for n = {}, field has n = {}",
            params.n(),
            grid.n()
        )));
    }
    let kernel = RieszPotentialKernel::new(*params);
    let fft = PaddedFft::new(&grid);
    let n = grid.n();
    let dxi = 1.0 / (fft.size() as f64 * grid.spacing());
    let mut data = fft.pad(u.values(), 1, 0);
    fft.forward(&mut data);
    data.par_iter_mut().enumerate().for_each(|(pos, z)| {
        let idx = fft.multi_index(pos);
        let xi: Vec<f64> = (0..n).map(|d| fft.freq_index(idx[d]) as f64 * dxi).collect();
        *z *= kernel.symbol(&xi);
    });
    fft.inverse(&mut data);
    ScalarField::from_values(grid, fft.crop(&data))
}

/// Second-order central difference gradient; values outside the box are zero.
pub fn central_gradient(f: &ScalarField) -> VectorField {
    let g = *f.grid();
    let n = g.n();
    let big = g.points();
    let h = g.spacing();
    let v = f.values();
    let mut out = vec![0.0; g.num_nodes() * n];
    for node in 0..g.num_nodes() {
        let idx = g.multi_index(node);
        for d in 0..n {
            let stride = big.pow((n - 1 - d) as u32);
            let plus = if idx[d] + 1 < big { v[node + stride] } else { 0.0 };
            let minus = if idx[d] > 0 { v[node - stride] } else { 0.0 };
            out[node * n + d] = (plus - minus) / (2.0 * h);
        }
    }
    VectorField::from_values(g, out).expect("finite differences of finite samples")
}

#[cfg(test)]
mod tests;
