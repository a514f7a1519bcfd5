//! Submatrix maps, cofactors, determinants and minor vectors.
//!
//! Matrices are row-major `&[f64]` slices of length `n²`. Indices in a
//! [`MinorSpec`] are zero-based; the textual form (`rows=1,2;cols=2,3`) is
//! one-based.

use std::fmt;
use std::str::FromStr;

use crate::error::{FracError, Result};

/// Row and column index sets of a `k×k` submatrix of an `n×n` matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MinorSpec {
    n: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
}

impl MinorSpec {
    pub fn new(n: usize, rows: Vec<usize>, cols: Vec<usize>) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(FracError::InvalidMinor(format!("dimension {n} outside 1..=3")));
        }
        if rows.is_empty() || rows.len() != cols.len() || rows.len() > n {
            return Err(FracError::InvalidMinor(format!(
                "need 1 <= k <= {n} rows and columns, got {} and {}",
                rows.len(),
                cols.len()
            )));
        }
        for set in [&rows, &cols] {
            if set.iter().any(|&i| i >= n) {
                return Err(FracError::InvalidMinor(format!("index out of range in {set:?} for n = {n}")));
            }
            if set.windows(2).any(|w| w[0] >= w[1]) {
                return Err(FracError::InvalidMinor(format!("indices {set:?} are not strictly increasing")));
            }
        }
        Ok(Self { n, rows, cols })
    }

    /// All rows and all columns.
    pub fn full(n: usize) -> Result<Self> {
        Self::new(n, (0..n).collect(), (0..n).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    /// Every spec of order `k`, ordered lexicographically by `(rows, cols)`.
    pub fn all_of_order(n: usize, k: usize) -> Vec<MinorSpec> {
        let subsets = subsets(n, k);
        let mut out = Vec::with_capacity(subsets.len() * subsets.len());
        for r in &subsets {
            for c in &subsets {
                out.push(MinorSpec {
                    n,
                    rows: r.clone(),
                    cols: c.clone(),
                });
            }
        }
        out
    }

    /// Every spec, by increasing order and then lexicographically.
    pub fn all(n: usize) -> Vec<MinorSpec> {
        (1..=n).flat_map(|k| Self::all_of_order(n, k)).collect()
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

impl fmt::Display for MinorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| v.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",");
        write!(f, "rows={};cols={}", join(&self.rows), join(&self.cols))
    }
}

impl MinorSpec {
    /// Parse the one-based textual form for a given dimension; `full` selects
    /// all rows and columns.
    pub fn parse(n: usize, text: &str) -> Result<Self> {
        if text == "full" {
            return Self::full(n);
        }
        let bad = || FracError::InvalidMinor(format!("expected `rows=..;cols=..` or `full`, got `{text}`"));
        let (r, c) = text.split_once(';').ok_or_else(bad)?;
        let list = |part: &str, key: &str| -> Result<Vec<usize>> {
            let body = part.trim().strip_prefix(key).ok_or_else(bad)?;
            body.split(',')
                .map(|t| match usize::from_str(t.trim()) {
                    Ok(i) if i >= 1 => Ok(i - 1),
                    _ => Err(bad()),
                })
                .collect()
        };
        Self::new(n, list(r, "rows=")?, list(c, "cols=")?)
    }
}

fn check_len(n: usize, m: &[f64]) -> Result<()> {
    if m.len() != n * n {
        return Err(FracError::InvalidMinor(format!(
            "matrix has {} entries, expected {}",
            m.len(),
            n * n
        )));
    }
    Ok(())
}

/// `M`: the `k×k` submatrix on the rows and columns selected by `spec`.
pub fn submatrix_m(spec: &MinorSpec, f: &[f64]) -> Result<Vec<f64>> {
    let n = spec.n;
    check_len(n, f)?;
    let mut out = Vec::with_capacity(spec.k() * spec.k());
    for &i in &spec.rows {
        for &j in &spec.cols {
            out.push(f[i * n + j]);
        }
    }
    Ok(out)
}

/// `M̄`: a zero `n×n` matrix with a `k×k` block placed on the rows and columns selected by `spec`.
pub fn embed_mbar(spec: &MinorSpec, g: &[f64]) -> Result<Vec<f64>> {
    let (n, k) = (spec.n, spec.k());
    check_len(k, g)?;
    let mut out = vec![0.0; n * n];
    for (a, &i) in spec.rows.iter().enumerate() {
        for (b, &j) in spec.cols.iter().enumerate() {
            out[i * n + j] = g[a * k + b];
        }
    }
    Ok(out)
}

fn check_vec(n: usize, v: &[f64]) -> Result<()> {
    if v.len() != n {
        return Err(FracError::InvalidMinor(format!("vector has {} entries, expected {n}", v.len())));
    }
    Ok(())
}

/// `N`: the entries of `v` on the row indices of `spec`.
pub fn subvector_n(spec: &MinorSpec, v: &[f64]) -> Result<Vec<f64>> {
    check_vec(spec.n, v)?;
    Ok(spec.rows.iter().map(|&i| v[i]).collect())
}

/// `N̄`: re-embed a `k`-vector on the row indices of `spec`.
pub fn embed_nbar(spec: &MinorSpec, w: &[f64]) -> Result<Vec<f64>> {
    check_vec(spec.k(), w)?;
    let mut out = vec![0.0; spec.n];
    for (a, &i) in spec.rows.iter().enumerate() {
        out[i] = w[a];
    }
    Ok(out)
}

/// `Ñ = N̄ ∘ N`.
pub fn project_ntilde(spec: &MinorSpec, v: &[f64]) -> Result<Vec<f64>> {
    embed_nbar(spec, &subvector_n(spec, v)?)
}

/// Determinant of a `k×k` matrix, `k ≤ 3`, by explicit expansion.
pub fn det(k: usize, a: &[f64]) -> Result<f64> {
    check_len(k, a)?;
    Ok(match k {
        1 => a[0],
        2 => a[0] * a[3] - a[1] * a[2],
        3 => {
            a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6])
                + a[2] * (a[3] * a[7] - a[4] * a[6])
        }
        _ => return Err(FracError::UnsupportedDimension(k)),
    })
}

/// Cofactor matrix, `cof(A) Aᵀ = det(A) I`. The `1×1` cofactor is `[1]`.
pub fn cof(k: usize, a: &[f64]) -> Result<Vec<f64>> {
    check_len(k, a)?;
    Ok(match k {
        1 => vec![1.0],
        2 => vec![a[3], -a[2], -a[1], a[0]],
        3 => vec![
            a[4] * a[8] - a[5] * a[7],
            a[5] * a[6] - a[3] * a[8],
            a[3] * a[7] - a[4] * a[6],
            a[2] * a[7] - a[1] * a[8],
            a[0] * a[8] - a[2] * a[6],
            a[1] * a[6] - a[0] * a[7],
            a[1] * a[5] - a[2] * a[4],
            a[2] * a[3] - a[0] * a[5],
            a[0] * a[4] - a[1] * a[3],
        ],
        _ => return Err(FracError::UnsupportedDimension(k)),
    })
}

/// `det M(F)`.
pub fn det_minor(spec: &MinorSpec, f: &[f64]) -> Result<f64> {
    det(spec.k(), &submatrix_m(spec, f)?)
}

/// `M̄(cof M(F))`.
pub fn embedded_cofactor(spec: &MinorSpec, f: &[f64]) -> Result<Vec<f64>> {
    embed_mbar(spec, &cof(spec.k(), &submatrix_m(spec, f)?)?)
}

/// Number of minors of an `n×n` matrix, `Σ_k C(n,k)²`.
pub fn tau(n: usize) -> usize {
    (1..=n).map(|k| subsets(n, k).len().pow(2)).sum()
}

/// All minors in the order of [`MinorSpec::all`].
pub fn minor_vector(n: usize, f: &[f64]) -> Result<Vec<f64>> {
    if !(2..=3).contains(&n) {
        return Err(FracError::UnsupportedDimension(n));
    }
    check_len(n, f)?;
    MinorSpec::all(n).iter().map(|s| det_minor(s, f)).collect()
}
