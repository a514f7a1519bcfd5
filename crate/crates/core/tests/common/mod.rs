#![allow(dead_code, clippy::excessive_precision)]

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

/// `D^s` of `e^{-πx²}` in one dimension, closed form
/// `-2(2π)^s (πx) π^{-(s+2)/2} Γ((s+2)/2) e^{-πx²} ₁F₁((1-s)/2; 3/2; πx²)`.
pub fn gauss_ds_1d(s: f64, x: f64) -> f64 {
    let z = PI * x * x;
    let a = (1.0 - s) / 2.0;
    let b = 1.5;
    let (mut term, mut sum, mut k) = (1.0, 1.0, 0.0);
    while term > 1e-18 * sum {
        term *= (a + k) / (b + k) * z / (k + 1.0);
        sum += term;
        k += 1.0;
    }
    -2.0 * (2.0 * PI).powf(s) * PI * x * PI.powf(-(s + 2.0) / 2.0) * gamma((s + 2.0) / 2.0) * (-z).exp() * sum
}

/// Frozen high-precision values `(s, x, D^s e^{-πx²}(x))`.
pub const GAUSS_1D: [(f64, f64, f64); 12] = [
    (0.25, 0.1, -0.25243338449563063142),
    (0.25, 0.5, -0.73502079352561002969),
    (0.25, 1.0, -0.38735559816166349975),
    (0.25, 2.0, -0.11949568308299428118),
    (0.5, 0.1, -0.33250309829737216168),
    (0.5, 0.5, -0.90384723013388139779),
    (0.5, 1.0, -0.36799514715641565024),
    (0.5, 2.0, -0.076930326633714804534),
    (0.75, 0.1, -0.44626520698677685883),
    (0.75, 0.5, -1.1299156682908646662),
    (0.75, 1.0, -0.33307016736503299545),
    (0.75, 2.0, -0.03729838744680078878),
];

/// Frozen radial profiles `(s, r, ρ)` of `D^s e^{-π|x|²}` in two dimensions:
/// `D^s_i u(x) = (x_i / r) ρ`.
pub const GAUSS_2D: [(f64, f64, f64); 6] = [
    (0.25, 0.3, -0.52098053804611872948),
    (0.25, 1.0, -0.2374340712228088044),
    (0.5, 0.3, -0.71953989126058074869),
    (0.5, 1.0, -0.25621661168500585542),
    (0.75, 0.3, -1.0056113409156664849),
    (0.75, 1.0, -0.26967834603073239656),
];
