//! Midpoint quadrature, `L^p` norms and the Gagliardo `W^{s,p}` seminorm.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::field::{Field, ScalarField};
use crate::grid::Grid;
use crate::reduce::{tree_sum, tree_sum_by};

/// `Σ f(x_i) hⁿ`.
pub fn integrate(f: &ScalarField) -> f64 {
    tree_sum(f.values()) * f.grid().cell_volume()
}

/// `(∫ |f|^p)^{1/p}` where `|f|` is the Euclidean (Frobenius) magnitude at each node.
pub fn lp_norm<F: Field>(f: &F, p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(invalid("p", format!("L^p exponent must be >= 1, got {p}")));
    }
    let c = f.comps();
    let v = f.values();
    let total = tree_sum_by(f.grid().num_nodes(), |i| {
        let blk = &v[i * c..(i + 1) * c];
        let mag = if c == 1 {
            blk[0].abs()
        } else {
            blk.iter().map(|x| x * x).sum::<f64>().sqrt()
        };
        if p == 2.0 {
            mag * mag
        } else {
            mag.powf(p)
        }
    });
    Ok((total * f.grid().cell_volume()).powf(1.0 / p))
}

/// Pair-difference histogram of a scalar field.
///
/// Entry `a` (an offset with nonnegative components, in grid node order) holds
/// `Σ |f(x_i) - f(x_j)|^p` over ordered node pairs whose index offsets have
/// absolute values `a`. Reweighting it yields the Gagliardo sum for any `s`.
#[derive(Debug, Clone)]
pub struct PairHistogram {
    grid: Grid,
    p: f64,
    bins: Vec<f64>,
}

impl PairHistogram {
    pub fn new(f: &ScalarField, p: f64) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(invalid("p", format!("seminorm exponent must be >= 1, got {p}")));
        }
        let grid = *f.grid();
        let n = grid.n();
        let big = grid.points() as isize;
        let v = f.values();
        let pow = |d: f64| -> f64 {
            let d = d.abs();
            if d == 0.0 {
                0.0
            } else if p == 2.0 {
                d * d
            } else {
                d.powf(p)
            }
        };
        let bins = (0..grid.num_nodes())
            .into_par_iter()
            .map(|bin| {
                let a = grid.multi_index(bin);
                if a[..n].iter().all(|&k| k == 0) {
                    return 0.0;
                }
                let mut acc = 0.0;
                // Every sign pattern of the offset; zero components have one sign.
                for signs in 0..(1usize << n) {
                    if (0..n).any(|d| a[d] == 0 && signs & (1 << d) != 0) {
                        continue;
                    }
                    let mut off = [0isize; 3];
                    for d in 0..n {
                        off[d] = if signs & (1 << d) != 0 { -(a[d] as isize) } else { a[d] as isize };
                    }
                    let lo: Vec<isize> = (0..n).map(|d| (-off[d]).max(0)).collect();
                    let hi: Vec<isize> = (0..n).map(|d| big - off[d].max(0)).collect();
                    acc += sum_box(&grid, &lo, &hi, &off, |i, j| pow(v[i] - v[j]));
                }
                acc
            })
            .collect();
        Ok(Self { grid, p, bins })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `Σ_{i≠j} |f_i - f_j|^p / |x_i - x_j|^{n+sp} h^{2n}`.
    pub fn gagliardo_sum(&self, s: f64) -> Result<f64> {
        if !(s > 0.0 && s < 1.0) {
            return Err(invalid("s", format!("order must lie in (0, 1), got {s}")));
        }
        let g = self.grid;
        let n = g.n();
        let h = g.spacing();
        let expo = n as f64 + s * self.p;
        let scale = h.powi(2 * n as i32) * h.powf(-expo);
        let bins = &self.bins;
        let total = tree_sum_by(bins.len(), |b| {
            if bins[b] == 0.0 {
                return 0.0;
            }
            let a = g.multi_index(b);
            let r2: f64 = a[..n].iter().map(|&k| (k * k) as f64).sum();
            bins[b] * r2.powf(-0.5 * expo)
        });
        Ok(total * scale)
    }
}

/// Sequential sum of `f(i, i + off)` over nodes `i` with index in `[lo, hi)` per axis.
fn sum_box(
    grid: &Grid,
    lo: &[isize],
    hi: &[isize],
    off: &[isize; 3],
    f: impl Fn(usize, usize) -> f64,
) -> f64 {
    let n = grid.n();
    let big = grid.points() as isize;
    if (0..n).any(|d| lo[d] >= hi[d]) {
        return 0.0;
    }
    let shift: isize = (0..n).fold(0, |acc, d| acc * big + off[d]);
    let mut idx: Vec<isize> = lo.to_vec();
    let mut acc = 0.0;
    loop {
        let i = idx.iter().fold(0isize, |a, &k| a * big + k) as usize;
        let j = (i as isize + shift) as usize;
        acc += f(i, j);
        let mut d = n;
        loop {
            if d == 0 {
                return acc;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < hi[d] {
                break;
            }
            idx[d] = lo[d];
        }
    }
}

/// `(Σ_{i≠j} |f_i - f_j|^p / |x_i - x_j|^{n+sp} h^{2n})^{1/p}`, diagonal excluded.
pub fn gagliardo_seminorm(f: &ScalarField, s: f64, p: f64) -> Result<f64> {
    let hist = PairHistogram::new(f, p)?;
    Ok(hist.gagliardo_sum(s)?.powf(1.0 / p))
}
