use serde::Serialize;

use super::{l_box, CubeSystem};
use crate::grid::{l1_l2, linf_l2, SampledField};
use crate::lp::decompose;
use crate::par;

/// Cube summability exponent of `l^p_j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CubeSum {
    One,
    Two,
    Inf,
}

impl CubeSum {
    pub fn combine(&self, values: &[f64]) -> f64 {
        match self {
            CubeSum::One => values.iter().sum(),
            CubeSum::Two => values.iter().map(|v| v * v).sum::<f64>().sqrt(),
            CubeSum::Inf => values.iter().cloned().fold(0.0, f64::max),
        }
    }

    fn label(&self) -> &'static str {
        match self {
            CubeSum::One => "l1",
            CubeSum::Two => "l2",
            CubeSum::Inf => "linf",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CubeRef {
    pub l: usize,
    pub cube: usize,
}

/// Value of a norm together with the table it was reduced from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormReport {
    pub space: String,
    pub value: f64,
    pub argmax: Option<CubeRef>,
    pub per_band: Option<Vec<f64>>,
    /// `(l, cube, weighted contribution)` rows for the cube-sup norms.
    #[serde(skip)]
    pub contributions: Vec<(usize, usize, f64)>,
}

impl NormReport {
    /// `{space, value, argmax}` where `argmax` is `{l, cube}` for cube norms
    /// and the per-band array for Sobolev-type norms.
    pub fn to_json(&self) -> serde_json::Value {
        let argmax = match (&self.argmax, &self.per_band) {
            (Some(c), _) => serde_json::json!({ "l": c.l, "cube": c.cube }),
            (None, Some(b)) => serde_json::json!(b),
            (None, None) => serde_json::Value::Null,
        };
        serde_json::json!({ "space": self.space, "value": self.value, "argmax": argmax })
    }
}

/// `||u||_{L2 L2([0,1] x Q)}` for every sharp cube of scales `0..=l_box`,
/// indexed `[l][q]`.
pub fn cube_l2_table(u: &SampledField) -> Vec<Vec<f64>> {
    let g = u.grid();
    let systems: Vec<CubeSystem> = (0..=l_box(g)).map(|l| CubeSystem::new(g, l)).collect();
    let per_time: Vec<Vec<Vec<f64>>> = par::map_range(g.nt(), |t| {
        let slice = u.slice(t);
        systems
            .iter()
            .map(|sys| {
                let mut acc = vec![0.0; sys.len()];
                for (z, &q) in slice.iter().zip(sys.cube_of_point()) {
                    acc[q as usize] += z.norm_sqr();
                }
                acc
            })
            .collect()
    });
    let w = g.trapezoid_weights(0, g.nt() - 1);
    let vol = g.cell_volume();
    systems
        .iter()
        .enumerate()
        .map(|(l, sys)| {
            (0..sys.len())
                .map(|q| {
                    let s: f64 = per_time.iter().zip(&w).map(|(pt, wt)| wt * pt[l][q]).sum();
                    (s * vol).sqrt()
                })
                .collect()
        })
        .collect()
}

/// `||u||_X = sup_l sup_Q 2^{-l/2} ||u||_{L2 L2([0,1] x Q)}` over sharp cubes.
pub fn x_norm(u: &SampledField) -> NormReport {
    let table = cube_l2_table(u);
    let mut contributions = Vec::new();
    let mut best = (0.0, CubeRef { l: 0, cube: 0 });
    for (l, row) in table.iter().enumerate() {
        let w = f64::powf(2.0, -0.5 * l as f64);
        for (q, v) in row.iter().enumerate() {
            let c = w * v;
            contributions.push((l, q, c));
            if c > best.0 {
                best = (c, CubeRef { l, cube: q });
            }
        }
    }
    NormReport {
        space: "X".into(),
        value: best.0,
        argmax: Some(best.1),
        per_band: None,
        contributions,
    }
}

pub fn x_value(u: &SampledField) -> f64 {
    x_norm(u).value
}

/// Upper bound for the atomic `Y` norm,
/// `min_l 2^{l/2} sum_{Q in Q_l} ||f||_{L2 L2([0,1] x Q)}`.
pub fn y_upper(f: &SampledField) -> NormReport {
    let table = cube_l2_table(f);
    let mut contributions = Vec::new();
    let mut best = (f64::INFINITY, 0usize);
    for (l, row) in table.iter().enumerate() {
        let w = f64::powf(2.0, 0.5 * l as f64);
        let c = w * row.iter().sum::<f64>();
        contributions.push((l, usize::MAX, c));
        if c < best.0 {
            best = (c, l);
        }
    }
    NormReport {
        space: "Y#".into(),
        value: best.0,
        argmax: Some(CubeRef {
            l: best.1,
            cube: 0,
        }),
        per_band: None,
        contributions,
    }
}

pub fn y_value(f: &SampledField) -> f64 {
    y_upper(f).value
}

/// `||u||_{X_j} = 2^{j/2} ||u||_X + ||u||_{L^inf L2}`.
pub fn xj_norm(u: &SampledField, j: usize) -> f64 {
    f64::powf(2.0, 0.5 * j as f64) * x_value(u) + linf_l2(u)
}

/// `min(||f||_{L1 L2}, 2^{-j/2} Y#(f))`, the two canonical splittings of the
/// `Y_j` infimum.
pub fn yj_upper(f: &SampledField, j: usize) -> f64 {
    l1_l2(f).min(f64::powf(2.0, -0.5 * j as f64) * y_value(f))
}

fn weighted(per_band: Vec<f64>, space: String) -> NormReport {
    let value = per_band.iter().map(|v| v * v).sum::<f64>().sqrt();
    NormReport {
        space,
        value,
        argmax: None,
        per_band: Some(per_band),
        contributions: Vec::new(),
    }
}

fn localized(v: &SampledField, j: usize, q: usize, band_norm: fn(&SampledField, usize) -> f64) -> f64 {
    let sys = CubeSystem::new(v.grid(), j);
    if sys.len() == 1 {
        return band_norm(v, j);
    }
    let chi = sys.cutoff(q);
    let local = v.map_slices(|_, slice| {
        slice.iter_mut().zip(chi).for_each(|(z, c)| *z *= c);
    });
    band_norm(&local, j)
}

/// `||v||_{l^p_j X_j}`: the `X_j` norms of `chi_Q v` over cubes of scale `j`.
pub fn band_lp_x(v: &SampledField, j: usize, p: CubeSum) -> f64 {
    let n = CubeSystem::new(v.grid(), j).len();
    p.combine(&par::map_range(n, |q| localized(v, j, q, xj_norm)))
}

/// `||f||_{l^p_j Y_j}` with the `Y_j` surrogate [`yj_upper`].
pub fn band_lp_y(f: &SampledField, j: usize, p: CubeSum) -> f64 {
    let n = CubeSystem::new(f.grid(), j).len();
    p.combine(&par::map_range(n, |q| localized(f, j, q, yj_upper)))
}

/// Per-band cube-summed norms of `S_j u`, weighted by `2^{js}`.
fn cube_summed(u: &SampledField, p: CubeSum, s: f64, band_norm: fn(&SampledField, usize) -> f64) -> Vec<f64> {
    let g = u.grid();
    let bands = decompose(u);
    let jobs: Vec<(usize, usize)> = (0..bands.len())
        .flat_map(|j| (0..CubeSystem::new(g, j).len()).map(move |q| (j, q)))
        .collect();
    let values = par::map_slice(&jobs, |&(j, q)| localized(&bands[j], j, q, band_norm));
    (0..bands.len())
        .map(|j| {
            let vals: Vec<f64> = jobs
                .iter()
                .zip(&values)
                .filter(|((jj, _), _)| *jj == j)
                .map(|(_, v)| *v)
                .collect();
            f64::powf(2.0, j as f64 * s) * p.combine(&vals)
        })
        .collect()
}

/// `(sum_j 2^{2js} ||S_j u||_{l^p_j X_j}^2)^{1/2}` with smooth cube cutoffs at
/// scale `j`. `per_band` holds the weighted band terms.
pub fn lp_xs_norm(u: &SampledField, p: CubeSum, s: f64) -> NormReport {
    weighted(cube_summed(u, p, s, xj_norm), format!("{}X^{s}", p.label()))
}

/// The `Y` analogue of [`lp_xs_norm`] built from [`yj_upper`].
pub fn lp_ys_upper(f: &SampledField, p: CubeSum, s: f64) -> NormReport {
    weighted(cube_summed(f, p, s, yj_upper), format!("{}Y#^{s}", p.label()))
}

/// `(sum_j 2^{2js} ||S_j u||_{X_j}^2)^{1/2}`, no cube summation.
pub fn xs_norm(u: &SampledField, s: f64) -> NormReport {
    let bands = decompose(u);
    let per = par::map_range(bands.len(), |j| f64::powf(2.0, j as f64 * s) * xj_norm(&bands[j], j));
    weighted(per, format!("X^{s}"))
}

pub fn ys_upper(f: &SampledField, s: f64) -> NormReport {
    let bands = decompose(f);
    let per = par::map_range(bands.len(), |j| f64::powf(2.0, j as f64 * s) * yj_upper(&bands[j], j));
    weighted(per, format!("Y#^{s}"))
}
