//! Continuous Littlewood-Paley family `Id = S_0 + int_0^inf S_k dk` with
//! `S_{<k} = 1 - Phi(log2|xi| - k)`, `Phi` a Gaussian CDF of width
//! [`CONTINUOUS_WIDTH`] in octaves. The density in `k` is analytic, so
//! Gauss-Legendre panels converge spectrally.

use std::f64::consts::PI;

use statrs::function::erf::erf;

use crate::grid::{SampledField, C64};

pub const CONTINUOUS_WIDTH: f64 = 0.35;

fn cdf(t: f64) -> f64 {
    0.5 * (1.0 + erf(t / (CONTINUOUS_WIDTH * std::f64::consts::SQRT_2)))
}

/// Density `d/dk S_{<k}` at frequency magnitude `r`.
pub fn continuous_density(k: f64, r: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let t = r.log2() - k;
    (-t * t / (2.0 * CONTINUOUS_WIDTH * CONTINUOUS_WIDTH)).exp() / (CONTINUOUS_WIDTH * (2.0 * PI).sqrt())
}

/// Multiplier of the continuous `S_0`.
pub fn continuous_low_multiplier(r: f64) -> f64 {
    if r == 0.0 {
        1.0
    } else {
        1.0 - cdf(r.log2())
    }
}

/// `S_k u` of the continuous family (a density in `k`).
pub fn continuous_band(u: &SampledField, k: f64) -> SampledField {
    let xi = u.grid().abs_xi().to_vec();
    u.apply_multiplier(move |p| C64::new(continuous_density(k, xi[p]), 0.0))
}

pub fn continuous_low(u: &SampledField) -> SampledField {
    let xi = u.grid().abs_xi().to_vec();
    u.apply_multiplier(move |p| C64::new(continuous_low_multiplier(xi[p]), 0.0))
}

/// `n`-point Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// `S_0 u + int_0^upper S_k u dk` with composite Gauss-Legendre,
/// `nodes_per_unit` nodes on each unit panel. The multiplier is summed in
/// spectral space so only one transform pair per slice is needed.
pub fn continuous_reconstruct(u: &SampledField, upper: f64, nodes_per_unit: usize) -> SampledField {
    let rule = gauss_legendre(nodes_per_unit);
    let panels = upper.ceil() as usize;
    let xi = u.grid().abs_xi().to_vec();
    let table: Vec<f64> = xi
        .iter()
        .map(|&r| {
            let mut acc = continuous_low_multiplier(r);
            for panel in 0..panels {
                let a = panel as f64;
                let b = (a + 1.0).min(upper);
                let half = 0.5 * (b - a);
                for &(x, w) in &rule {
                    acc += half * w * continuous_density(a + half * (x + 1.0), r);
                }
            }
            acc
        })
        .collect();
    u.apply_table(&table)
}
