//! Example maps and refinement scans of `W^{s,p}` membership.
//!
//! The scan statistic is the ratio of consecutive increments of the discrete
//! Gagliardo sum `S_N = [u]^p_{W^{s,p}}` under `N → 2N`,
//! `(S_{4N} - S_{2N}) / (S_{2N} - S_N)`. For a map with a jump across a
//! hypersurface the increments scale like `2^{sp-1}`; for a point
//! singularity of cavitation type like `2^{sp-n}`; for smooth maps like
//! `2^{-p(1-s)}`. A ratio above 1 signals a sum that grows without bound.
//! Increments are compared in absolute value, since convergent sums need not
//! be monotone.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::field::{bump, norm, smooth_cutoff, Field, VectorField};
use crate::grid::Grid;
use crate::norms::PairHistogram;

/// Ratio at or above which a scan line is reported as diverging.
pub const DIVERGING_RATIO: f64 = 1.10;
/// Ratio at or below which a scan line is reported as bounded.
pub const BOUNDED_RATIO: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum ExampleMap {
    /// `(χ_Q, ψ, …, ψ)` with `Q = (0, side)ⁿ` and a smooth bump `ψ`.
    CubeFracture { side: f64 },
    /// `x/|x| · φ(|x|)` with `φ(r) = amplitude · exp(1 - 1/(1 - (r/radius)²))`.
    Cavitation { radius: f64, amplitude: f64 },
    /// `e^{-π|x|²/width²}` in every component, smoothly cut off at half the box.
    GaussianBump { width: f64 },
    /// A smooth nonlinear vector field with support in the ball of the given radius.
    SmoothVectorBump { radius: f64 },
}

impl ExampleMap {
    pub fn name(&self) -> &'static str {
        match self {
            ExampleMap::CubeFracture { .. } => "fracture",
            ExampleMap::Cavitation { .. } => "cavitation",
            ExampleMap::GaussianBump { .. } => "gaussian",
            ExampleMap::SmoothVectorBump { .. } => "bump",
        }
    }

    /// Default parameters for a kind name.
    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "fracture" => ExampleMap::CubeFracture { side: 1.0 },
            "cavitation" => ExampleMap::Cavitation {
                radius: 1.0,
                amplitude: 1.0,
            },
            "gaussian" => ExampleMap::GaussianBump { width: 1.0 },
            "bump" => ExampleMap::SmoothVectorBump { radius: 1.0 },
            _ => {
                return Err(invalid(
                    "kind",
                    format!("expected fracture, cavitation, gaussian or bump, got `{name}`"),
                ))
            }
        })
    }

    /// The critical value of `sp` for membership, if any.
    pub fn threshold(&self, n: usize) -> Option<f64> {
        match self {
            ExampleMap::CubeFracture { .. } => Some(1.0),
            ExampleMap::Cavitation { .. } => Some(n as f64),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(name, format!("must be positive, got {v}")))
            }
        };
        match *self {
            ExampleMap::CubeFracture { side } => positive("side", side),
            ExampleMap::Cavitation { radius, amplitude } => {
                positive("radius", radius)?;
                // φ(0) = amplitude
                positive("amplitude", amplitude)
            }
            ExampleMap::GaussianBump { width } => positive("width", width),
            ExampleMap::SmoothVectorBump { radius } => positive("radius", radius),
        }
    }
}

/// Sample an example map on a grid, rejecting maps whose support reaches the
/// boundary layer.
pub fn build_example(kind: &ExampleMap, grid: Grid) -> Result<VectorField> {
    kind.validate()?;
    let n = grid.n();
    let l = grid.extent();
    let field = match *kind {
        ExampleMap::CubeFracture { side } => VectorField::from_fn(grid, |x| {
            let inside = x.iter().all(|&v| v > 0.0 && v < side);
            let psi = bump(norm(x), side);
            let mut out = vec![psi; n];
            out[0] = if inside { 1.0 } else { 0.0 };
            out
        })?,
        ExampleMap::Cavitation { radius, amplitude } => VectorField::from_fn(grid, |x| {
            let r = norm(x);
            let phi = amplitude * bump(r, radius);
            x.iter().map(|v| v / r * phi).collect()
        })?,
        ExampleMap::GaussianBump { width } => VectorField::from_fn(grid, |x| {
            let r = norm(x);
            let g = (-std::f64::consts::PI * r * r / (width * width)).exp() * smooth_cutoff(r, 0.5 * l, 0.75 * l);
            vec![g; n]
        })?,
        ExampleMap::SmoothVectorBump { radius } => VectorField::from_fn(grid, |x| {
            let b = bump(norm(x), radius);
            let y: Vec<f64> = x.iter().map(|v| v / radius).collect();
            let at = |i: usize| y.get(i).copied().unwrap_or(0.0);
            let comps = [
                1.0 + at(0) + 0.5 * at(1) * at(1),
                at(1) - 0.3 * at(0) * at(1) + 0.2,
                0.5 + at(2) + at(0) * at(1),
            ];
            comps[..n].iter().map(|c| b * c).collect()
        })?,
    };
    field.check_compact()?;
    Ok(field)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Bounded,
    Diverging,
    Abstain,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Bounded => "bounded",
            Verdict::Diverging => "diverging",
            Verdict::Abstain => "abstain",
        }
    }

    fn from_ratio(ratio: f64) -> Self {
        if ratio >= DIVERGING_RATIO {
            Verdict::Diverging
        } else if ratio <= BOUNDED_RATIO {
            Verdict::Bounded
        } else {
            Verdict::Abstain
        }
    }
}

/// One `(s, p, N)` cell of a scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MembershipRow {
    pub kind: &'static str,
    pub n: usize,
    pub s: f64,
    pub p: f64,
    pub points: usize,
    /// `[u]_{W^{s,p}}`, components combined as `(Σ_c [u_c]^p)^{1/p}`.
    pub seminorm: f64,
    /// Increment ratio ending at this `N`; absent for the first two levels.
    pub ratio: Option<f64>,
    /// Set on the last row of each `(s, p)` line.
    pub verdict: Option<Verdict>,
}

/// Scan `W^{s,p}` seminorms of an example over `s_list × p_list × n_list`.
///
/// `n_list` must hold at least three increasing resolutions; grids use the
/// same half-width `extent`.
pub fn membership_scan(
    kind: &ExampleMap,
    n: usize,
    extent: f64,
    s_list: &[f64],
    p_list: &[f64],
    n_list: &[usize],
) -> Result<Vec<MembershipRow>> {
    if s_list.is_empty() || p_list.is_empty() {
        return Err(invalid("s/p", "scan lists must be non-empty"));
    }
    if n_list.len() < 3 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("N", "need at least three increasing resolutions"));
    }
    for &s in s_list {
        if !(s > 0.0 && s < 1.0) {
            return Err(invalid("s", format!("order must lie in (0, 1), got {s}")));
        }
    }
    let threshold = kind.threshold(n);
    // sums[p][N][s]
    let mut sums = vec![vec![vec![0.0; s_list.len()]; n_list.len()]; p_list.len()];
    for (ni, &pts) in n_list.iter().enumerate() {
        let grid = Grid::new(n, extent, pts)?;
        let field = build_example(kind, grid)?;
        for (pi, &p) in p_list.iter().enumerate() {
            let hists: Vec<PairHistogram> = field
                .components()
                .iter()
                .map(|c| PairHistogram::new(c, p))
                .collect::<Result<_>>()?;
            for (si, &s) in s_list.iter().enumerate() {
                let mut total = 0.0;
                for h in &hists {
                    total += h.gagliardo_sum(s)?;
                }
                sums[pi][ni][si] = total;
            }
        }
    }
    let mut rows = Vec::new();
    for (si, &s) in s_list.iter().enumerate() {
        for (pi, &p) in p_list.iter().enumerate() {
            let line: Vec<f64> = (0..n_list.len()).map(|ni| sums[pi][ni][si]).collect();
            for (ni, &pts) in n_list.iter().enumerate() {
                let ratio = (ni >= 2).then(|| increment_ratio(line[ni - 2], line[ni - 1], line[ni]));
                let last = ni + 1 == n_list.len();
                let verdict = if !last {
                    None
                } else if threshold.is_some_and(|t| (s * p - t).abs() < 1e-12) {
                    Some(Verdict::Abstain)
                } else {
                    ratio.map(Verdict::from_ratio)
                };
                rows.push(MembershipRow {
                    kind: kind.name(),
                    n,
                    s,
                    p,
                    points: pts,
                    seminorm: line[ni].powf(1.0 / p),
                    ratio,
                    verdict,
                });
            }
        }
    }
    Ok(rows)
}

fn increment_ratio(a: f64, b: f64, c: f64) -> f64 {
    let (d1, d2) = ((b - a).abs(), (c - b).abs());
    if d2 == 0.0 {
        0.0
    } else if d1 == 0.0 {
        f64::INFINITY
    } else {
        d2 / d1
    }
}

/// Expected verdict from the theory, `None` inside the transition band.
pub fn expected_verdict(kind: &ExampleMap, n: usize, s: f64, p: f64, band: f64) -> Option<Verdict> {
    match kind.threshold(n) {
        None => Some(Verdict::Bounded),
        Some(t) if (s * p - t).abs() < band => None,
        Some(t) if s * p < t => Some(Verdict::Bounded),
        Some(_) => Some(Verdict::Diverging),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::FracError;

    #[test]
    fn examples_have_documented_samples() {
        let g = Grid::new(2, 2.0, 16).unwrap();
        let frac = build_example(&ExampleMap::CubeFracture { side: 1.0 }, g).unwrap();
        assert!(frac.values().chunks(2).all(|b| b[0] == 0.0 || b[0] == 1.0));
        let cav = build_example(
            &ExampleMap::Cavitation {
                radius: 1.0,
                amplitude: 2.0,
            },
            g,
        )
        .unwrap();
        for node in 0..g.num_nodes() {
            let x = g.coords(node);
            let want = 2.0 * bump(norm(&x[..2]), 1.0);
            assert!((norm(cav.at(node)) - want).abs() < 1e-14);
        }
        let gauss = build_example(&ExampleMap::GaussianBump { width: 1.0 }, g).unwrap();
        let big = g.points();
        for node in 0..g.num_nodes() {
            let idx = g.multi_index(node);
            let rot = g.node_index(&[idx[1], big - 1 - idx[0]]);
            assert_eq!(gauss.at(node), gauss.at(rot));
        }
    }

    #[test]
    fn rejects_bad_parameters_and_oversized_support() {
        let g = Grid::new(2, 2.0, 16).unwrap();
        assert!(build_example(
            &ExampleMap::Cavitation {
                radius: 1.0,
                amplitude: 0.0
            },
            g
        )
        .is_err());
        assert!(matches!(
            build_example(&ExampleMap::CubeFracture { side: 3.0 }, g),
            Err(FracError::SupportViolation { .. })
        ));
        assert!(ExampleMap::from_name("wobble").is_err());
    }

    #[test]
    fn fracture_scan_sides() {
        let kind = ExampleMap::CubeFracture { side: 1.0 };
        let rows = membership_scan(&kind, 1, 2.0, &[0.4, 0.6], &[2.0], &[32, 64, 128, 256]).unwrap();
        let verdicts: Vec<_> = rows.iter().filter_map(|r| r.verdict).collect();
        assert_eq!(verdicts, vec![Verdict::Bounded, Verdict::Diverging]);
        let last = rows.iter().find(|r| r.s == 0.6 && r.points == 256).unwrap();
        assert!((last.ratio.unwrap() - 2f64.powf(0.2)).abs() < 0.02);
    }

    #[test]
    fn expected_verdicts() {
        let kind = ExampleMap::Cavitation {
            radius: 1.0,
            amplitude: 1.0,
        };
        assert_eq!(expected_verdict(&kind, 2, 0.5, 3.0, 0.1), Some(Verdict::Bounded));
        assert_eq!(expected_verdict(&kind, 2, 0.9, 3.0, 0.1), Some(Verdict::Diverging));
        assert_eq!(expected_verdict(&kind, 2, 0.68, 3.0, 0.1), None);
    }
}
