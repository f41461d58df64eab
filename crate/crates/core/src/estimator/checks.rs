use serde::{Deserialize, Serialize};

use super::{
    derivative_bound, envelope_delta, x_band, y_band, EstimateId, EstimateParams, EstimateReport, Measured,
    ScalarMap,
};
use crate::cubes::{lp_xs_norm, xj_norm, xs_norm, yj_upper, CubeSum};
use crate::error::{QslError, Result};
use crate::evolve::MetricMap;
use crate::grid::{linf, Grid, SampledField};
use crate::lp::{s_below, s_geq, wedge_multiplier, DyadicBand, WedgeConfig};

fn check_band(grid: &Grid, k: usize) -> Result<()> {
    if k > grid.j_max() {
        return Err(QslError::OutOfRange {
            what: "output band",
            index: k,
            limit: grid.j_max() + 1,
        });
    }
    Ok(())
}

fn require(ok: bool, key: &str, message: String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(QslError::Config {
            key: key.into(),
            message,
        })
    }
}

fn params(u: &SampledField, s: f64, sigma: f64) -> EstimateParams {
    EstimateParams {
        s,
        sigma,
        d: u.grid().dim(),
        n: u.grid().n(),
    }
}

fn l2x(u: &SampledField, s: f64, delta: f64) -> Measured {
    Measured::new(lp_xs_norm(u, CubeSum::Two, s), delta)
}

/// `2^{k sigma}||S_k(uv)||_{l^2_k X_k}` against
/// `(a_k + b_k) ||u||_{l^2 X^sigma} ||v||_{l^2 X^sigma}`.
pub fn check_algebra(u: &SampledField, v: &SampledField, sigma: f64, k: usize) -> Result<EstimateReport> {
    let d = u.grid().dim();
    require(sigma > d as f64 / 2.0, "sigma", format!("needs sigma > d/2, got {sigma}"))?;
    check_band(u.grid(), k)?;
    let delta = envelope_delta(sigma, d);
    let lhs = x_band(&u.product(v), k, sigma);
    let (mu, mv) = (l2x(u, sigma, delta), l2x(v, sigma, delta));
    let rhs = (mu.at(k) + mv.at(k)) * mu.value() * mv.value();
    let mut report = EstimateReport::new(EstimateId::Algebra, params(u, sigma, sigma));
    report.push(0, k, lhs, rhs);
    Ok(report)
}

/// `2^{k sigma}||S_k F(u)||_{l^2_k X_k}` against
/// `a_k ||u|| (1 + ||u||) c(||u||_inf)` in `l^2 X^sigma`.
pub fn check_moser(f: ScalarMap, u: &SampledField, sigma: f64, k: usize) -> Result<EstimateReport> {
    let d = u.grid().dim();
    require(sigma > d as f64 / 2.0, "sigma", format!("needs sigma > d/2, got {sigma}"))?;
    check_band(u.grid(), k)?;
    let lhs = x_band(&u.nonlinear(|z| f.apply(z)), k, sigma);
    let mu = l2x(u, sigma, envelope_delta(sigma, d));
    let c = derivative_bound(|t| f.real(t), linf(u));
    let rhs = mu.at(k) * mu.value() * (1.0 + mu.value()) * c;
    let mut report = EstimateReport::new(EstimateId::Moser, params(u, sigma, sigma));
    report.push(0, k, lhs, rhs);
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrilinearVariant {
    /// `||S_k(uvw)||` with `u in X^{sigma-1}`, `v, w in l^2 X^{s-1}`.
    LowU,
    /// `u in l^2 X^sigma`, `v in l^2 X^{s-2}`, `w in l^2 X^{s-1}`.
    Mixed,
    /// `||S_k(u S_{>=k-4}(vw))||` with `u in l^2 X^{sigma-2}`, `v, w in l^2 X^s`.
    HighPair,
}

impl TrilinearVariant {
    pub fn id(&self) -> EstimateId {
        match self {
            TrilinearVariant::LowU => EstimateId::Trilinear,
            TrilinearVariant::Mixed => EstimateId::TrilinearMixed,
            TrilinearVariant::HighPair => EstimateId::TrilinearHigh,
        }
    }
}

/// Trilinear bound in `l^2 Y^sigma`; see [`TrilinearVariant`] for the norm
/// pattern on the right.
pub fn check_trilinear(
    u: &SampledField,
    v: &SampledField,
    w: &SampledField,
    sigma: f64,
    s: f64,
    k: usize,
    variant: TrilinearVariant,
) -> Result<EstimateReport> {
    let d = u.grid().dim();
    check_band(u.grid(), k)?;
    require(s > (d as f64 + 3.0) / 2.0, "s", format!("needs s > (d+3)/2, got {s}"))?;
    let top = if variant == TrilinearVariant::Mixed { s - 1.0 } else { s };
    require(
        (0.0..=top).contains(&sigma),
        "sigma",
        format!("needs 0 <= sigma <= {top}, got {sigma}"),
    )?;
    let delta = envelope_delta(s, d);
    let (product, mu, mv, mw) = match variant {
        TrilinearVariant::LowU => (
            u.product(&v.product(w)),
            Measured::new(xs_norm(u, sigma - 1.0), delta),
            l2x(v, s - 1.0, delta),
            l2x(w, s - 1.0, delta),
        ),
        TrilinearVariant::Mixed => (
            u.product(&v.product(w)),
            l2x(u, sigma, delta),
            l2x(v, s - 2.0, delta),
            l2x(w, s - 1.0, delta),
        ),
        TrilinearVariant::HighPair => (
            u.product(&s_geq(&v.product(w), k as i64 - 4)),
            l2x(u, sigma - 2.0, delta),
            l2x(v, s, delta),
            l2x(w, s, delta),
        ),
    };
    let lhs = y_band(&product, k, sigma);
    let rhs = (mu.at(k) + mv.at(k) + mw.at(k)) * mu.value() * mv.value() * mw.value();
    let mut report = EstimateReport::new(variant.id(), params(u, s, sigma));
    report.push(0, k, lhs, rhs);
    Ok(report)
}

/// Order-zero multipliers available to the commutator check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymbolMultiplier {
    Identity,
    /// Angular wedge about a coordinate axis (1-based).
    Wedge { axis: usize },
    /// `xi_1 / <xi>`.
    SmoothSign,
}

impl SymbolMultiplier {
    pub fn table(&self, grid: &Grid) -> Result<Vec<f64>> {
        match *self {
            SymbolMultiplier::Identity => Ok(vec![1.0; grid.spatial_len()]),
            SymbolMultiplier::Wedge { axis } => wedge_multiplier(grid, axis, WedgeConfig::default()),
            SymbolMultiplier::SmoothSign => Ok((0..grid.spatial_len())
                .map(|p| {
                    let xi = grid.xi(p);
                    xi[0] / (1.0 + xi[0] * xi[0] + xi[1] * xi[1]).sqrt()
                })
                .collect()),
        }
    }
}

/// `sum_a d_a [S_{<k-4} g, B(D)] d_a v` for `g = (1 + eta(|w|^2)) I`. The
/// identity part commutes with `B`, so only the perturbation enters. The
/// low-pass is clamped to keep at least `S_0`.
pub fn commutator_field(
    metric: MetricMap,
    w: &SampledField,
    b: SymbolMultiplier,
    v: &SampledField,
    k: usize,
) -> Result<SampledField> {
    let g = v.grid();
    let table = b.table(g)?;
    let coeff = s_below(&metric.perturbation(w), (k as i64 - 4).max(1));
    let mut out = SampledField::zeros(g);
    for axis in 0..g.dim() {
        let dv = v.derivative(axis);
        let left = coeff.zip_with(&dv.apply_table(&table), |c, z| c * z);
        let right = coeff.zip_with(&dv, |c, z| c * z).apply_table(&table);
        out = out.add(&left.sub(&right).derivative(axis));
    }
    Ok(out)
}

/// `||commutator||_{Y_k}` against
/// `||w||^2 (1 + ||w||) c(||w||_inf) ||S_k u||_{X_k}` with `||w||` in `l^2 X^s`.
pub fn check_commutator(
    w: &SampledField,
    b: SymbolMultiplier,
    u_band: &DyadicBand,
    s: f64,
    metric: MetricMap,
) -> Result<EstimateReport> {
    let g = w.grid();
    let d = g.dim();
    let k = u_band.j;
    check_band(g, k)?;
    require(s > (d as f64 + 3.0) / 2.0, "s", format!("needs s > (d+3)/2, got {s}"))?;
    let comm = commutator_field(metric, w, b, &u_band.field, k)?;
    let lhs = yj_upper(&comm, k);
    let nw = lp_xs_norm(w, CubeSum::Two, s).value;
    let c = derivative_bound(|t| metric.profile(t), linf(w));
    let rhs = nw * nw * (1.0 + nw) * c * xj_norm(&u_band.field, k);
    let mut report = EstimateReport::new(EstimateId::Commutator, params(w, s, s));
    report.push(0, k, lhs, rhs);
    Ok(report)
}
