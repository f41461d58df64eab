//! The nondivergence form rewritten as a divergence-form system for
//! `(u, d_1 u, ..., d_d u)`.

use super::picard::{stage, Driver, PicardOutcome};
use super::{Form, Nonlinearity, QuasilinearSpec};
use crate::cubes::{lp_xs_norm, CubeSum};
use crate::error::{QslError, Result};
use crate::evolve::{MetricField, MetricMap};
use crate::grid::{linf_l2, Grid, SampledField, C64};

/// `i y_t + d_k(g d_k y) = F(y, z) + (d_k g) z_k` and
/// `i z_a,t + d_k(g d_k z_a) = d_a F - (d_a g) d_k z_k + (d_k g) d_k z_a`,
/// with `g = 1 + eta(|y|^2 + |z|^2)`. On solutions `z = grad y`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedSystem {
    pub metric: MetricMap,
    pub nonlinearity: Nonlinearity,
    /// Regularity of the reduced unknowns, one below the original.
    pub s: f64,
    pub data: Vec<Vec<C64>>,
    pub datum_norm: f64,
}

impl ReducedSystem {
    pub fn components(&self) -> usize {
        self.data.len()
    }

    /// Flat metric: each component solves its own semilinear equation.
    pub fn is_trivial(&self) -> bool {
        self.metric == MetricMap::Identity
    }
}

pub fn reduce_nondivergence(spec: &QuasilinearSpec, grid: &Grid) -> Result<ReducedSystem> {
    if spec.form != Form::Nondivergence {
        return Err(QslError::Unsupported("reduction applies to the nondivergence form".into()));
    }
    spec.validate(grid)?;
    let mut data = vec![spec.datum.clone()];
    for a in 0..grid.dim() {
        data.push(grid.derivative(&spec.datum, a));
    }
    Ok(ReducedSystem {
        metric: spec.metric,
        nonlinearity: spec.nonlinearity,
        s: spec.s - 1.0,
        data,
        datum_norm: spec.datum_norm(grid),
    })
}

#[derive(Clone, Debug)]
pub struct ReducedSolution {
    pub components: Vec<SampledField>,
    pub outcome: PicardOutcome,
    /// `max_a ||d_a y - z_a||_{L^inf L2} / ||z_a||_{L^inf L2}`.
    pub gradient_defect: f64,
}

fn combined(parts: impl Iterator<Item = f64>) -> f64 {
    parts.map(|v| v * v).sum::<f64>().sqrt()
}

fn rhs(sys: &ReducedSystem, state: &[SampledField]) -> (MetricField, Vec<SampledField>) {
    let (y, z) = (&state[0], &state[1..]);
    let map = sys.metric;
    let mut q = y.map_values(|a| C64::new(a.norm_sqr(), 0.0));
    for c in z {
        q = q.zip_with(c, |a, b| a + b.norm_sqr());
    }
    let eta = q.map_values(|v| C64::new(map.eta(v.re), 0.0)).dealiased();
    let metric = MetricField::from_perturbation(&eta);
    let f = sys.nonlinearity.eval_with(y, z);
    let dg: Vec<SampledField> = (0..z.len()).map(|k| eta.derivative(k)).collect();
    let mut f0 = f.clone();
    for (g, c) in dg.iter().zip(z) {
        f0 = f0.add(&g.product(c));
    }
    let mut out = vec![f0];
    let div_z = z
        .iter()
        .enumerate()
        .fold(SampledField::zeros(y.grid()), |acc, (k, c)| acc.add(&c.derivative(k)));
    for (a, za) in z.iter().enumerate() {
        let mut fa = f.derivative(a).sub(&dg[a].product(&div_z));
        for (k, g) in dg.iter().enumerate() {
            fa = fa.add(&g.product(&za.derivative(k)));
        }
        out.push(fa);
    }
    (metric, out)
}

pub fn solve_reduced(sys: &ReducedSystem, grid: &Grid, tol: f64, max_iter: usize) -> Result<ReducedSolution> {
    let s = sys.s;
    let driver = Driver {
        tol,
        max_iter,
        datum_norm: sys.datum_norm,
        norm: &|u| combined(u.iter().map(|c| lp_xs_norm(c, CubeSum::Two, s).value)),
        diff_norm: &|v| combined(v.iter().map(|c| lp_xs_norm(c, CubeSum::Two, s - 1.0).value)),
    };
    let zero = vec![SampledField::zeros(grid); sys.components()];
    let (outcome, components) = driver.run(zero, |prev| {
        let (metric, forcing) = rhs(sys, prev);
        forcing
            .into_iter()
            .zip(&sys.data)
            .map(|(f, d)| stage(metric.clone(), d, f))
            .collect::<Result<Vec<_>>>()
            .map(|u| (u, None))
    })?;
    let gradient_defect = (1..components.len())
        .map(|a| {
            let defect = linf_l2(&components[0].derivative(a - 1).sub(&components[a]));
            let scale = linf_l2(&components[a]);
            if scale > 0.0 {
                defect / scale
            } else {
                defect
            }
        })
        .fold(0.0, f64::max);
    Ok(ReducedSolution {
        components,
        outcome,
        gradient_defect,
    })
}
