use serde::Serialize;

use super::{reduce, Form, QuasilinearSpec};
use crate::cubes::{lp_xs_norm, CubeSum};
use crate::error::{QslError, Result};
use super::split::div_grad;
use crate::evolve::{solve_linear, LinearProblem, Localization, MetricField, MetricMap};
use crate::grid::{Grid, SampledField, C64};

pub const TOL: f64 = 1e-8;
pub const MAX_ITER: usize = 12;

#[derive(Clone, Debug, Serialize)]
pub struct IterationState {
    pub n: usize,
    #[serde(skip)]
    pub u: SampledField,
    /// `||u^(n)||_{l2 X^s}`.
    pub norm: f64,
    /// `||u^(n) - u^(n-1)||_{l2 X^{s-1}}`.
    pub diff: f64,
    /// `diff_n / diff_{n-1}`, when defined.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct PicardOutcome {
    pub u: SampledField,
    pub history: Vec<IterationState>,
    pub converged: bool,
    /// `max_n ||u^(n)||_{l2 X^s} / ||u_0||_{H^s}` (0 for zero data).
    pub bound_constant: f64,
}

/// Solve one Picard stage: the global linear problem with metric and
/// forcing frozen at the previous iterate.
pub(crate) fn stage(metric: MetricField, datum: &[crate::C64], forcing: SampledField) -> Result<SampledField> {
    let p = LinearProblem::new(metric, Localization::Global, datum.to_vec()).with_forcing(forcing);
    solve_linear(&p)
}

/// Runs the iteration from the zero state until the difference norm
/// drops below `tol`. Aborts when the ratio is `>= 1` twice in a row.
/// History entries record component 0; the final state is returned too.
/// `next` may return the increment `u^(n+1) - u^(n)` it computed directly;
/// otherwise the two iterates are subtracted.
pub(crate) struct Driver<'a> {
    pub tol: f64,
    pub max_iter: usize,
    pub datum_norm: f64,
    pub norm: &'a dyn Fn(&[SampledField]) -> f64,
    pub diff_norm: &'a dyn Fn(&[SampledField]) -> f64,
}

impl Driver<'_> {
    pub fn run(
        &self,
        zero: Vec<SampledField>,
        mut next: impl FnMut(&[SampledField]) -> Result<(Vec<SampledField>, Option<Vec<SampledField>>)>,
    ) -> Result<(PicardOutcome, Vec<SampledField>)> {
        let mut prev = zero;
        let mut history: Vec<IterationState> = Vec::new();
        let mut converged = false;
        for n in 1..=self.max_iter {
            let (u, increment) = next(&prev)?;
            if u.iter().any(|c| !c.is_finite()) {
                return Err(QslError::NonFinite { step: n });
            }
            let increment = increment.unwrap_or_else(|| u.iter().zip(&prev).map(|(a, b)| a.sub(b)).collect());
            let diff = (self.diff_norm)(&increment);
            let ratio = history
                .last()
                .and_then(|h| (h.diff > 0.0).then(|| diff / h.diff));
            history.push(IterationState {
                n,
                u: u[0].clone(),
                norm: (self.norm)(&u),
                diff,
                ratio,
            });
            let k = history.len();
            if k >= 3 && history[k - 2..].iter().all(|h| h.ratio.is_some_and(|r| r >= 1.0)) {
                return Err(QslError::Contraction {
                    iterate: n,
                    ratios: history.iter().filter_map(|h| h.ratio).collect(),
                });
            }
            prev = u;
            if diff < self.tol {
                converged = true;
                break;
            }
        }
        let top = history.iter().map(|h| h.norm).fold(0.0, f64::max);
        let outcome = PicardOutcome {
            u: prev[0].clone(),
            history,
            converged,
            bound_constant: if self.datum_norm > 0.0 { top / self.datum_norm } else { 0.0 },
        };
        Ok((outcome, prev))
    }
}

/// Picard iteration `(i d_t + d g(u^(n)) d) u^(n+1) = F(u^(n), grad u^(n))`,
/// `u^(n+1)(0) = u_0`. The nondivergence form is solved through its
/// reduced system and component 0 is returned.
pub fn picard_solve(spec: &QuasilinearSpec, grid: &Grid, tol: f64, max_iter: usize) -> Result<PicardOutcome> {
    spec.validate(grid)?;
    if spec.form == Form::Nondivergence {
        let sys = reduce::reduce_nondivergence(spec, grid)?;
        return reduce::solve_reduced(&sys, grid, tol, max_iter).map(|r| r.outcome);
    }
    let s = spec.s;
    let driver = Driver {
        tol,
        max_iter,
        datum_norm: spec.datum_norm(grid),
        norm: &|u| lp_xs_norm(&u[0], CubeSum::Two, s).value,
        diff_norm: &|v| lp_xs_norm(&v[0], CubeSum::Two, s - 1.0).value,
    };
    // After the first stage the increment v = u^(n+1) - u^(n) is solved for
    // directly, (i d_t + d g(u^(n)) d) v = F(u^(n)) - F(u^(n-1))
    // - d (g(u^(n)) - g(u^(n-1))) d u^(n), v(0) = 0, so that small
    // increments are not lost to cancellation.
    let zero_datum = vec![C64::new(0.0, 0.0); grid.spatial_len()];
    let mut last: Option<(SampledField, SampledField)> = None;
    let (outcome, _) = driver.run(vec![SampledField::zeros(grid)], |prev| {
        let u = &prev[0];
        let metric = MetricField::from_map(spec.metric, u);
        let v = match &last {
            None => stage(metric, &spec.datum, spec.nonlinearity.eval(u))?,
            Some((before, dv)) => {
                let df = spec.nonlinearity.increment(before, dv);
                let deta = metric_increment(spec.metric, before, dv);
                let forcing = df.sub(&div_grad(&deta, u, false)).dealiased();
                stage(metric, &zero_datum, forcing)?
            }
        };
        let next = u.add(&v);
        last = Some((u.clone(), v.clone()));
        Ok((vec![next], Some(vec![v])))
    })?;
    Ok(outcome)
}

/// `eta(|b + v|^2) - eta(|b|^2)`, dealiased like the metric itself.
fn metric_increment(map: MetricMap, b: &SampledField, v: &SampledField) -> SampledField {
    b.zip_with(v, |b, v| {
        let q = b.norm_sqr();
        let dq = 2.0 * (b.conj() * v).re + v.norm_sqr();
        let de = match map {
            MetricMap::Identity => 0.0,
            MetricMap::Quadratic { kappa } => kappa * dq,
            MetricMap::Saturated { kappa } => kappa * dq / ((1.0 + q) * (1.0 + q + dq)),
        };
        C64::new(de, 0.0)
    })
    .dealiased()
}

/// History table `n,norm_u,norm_v,ratio` with 17 significant digits.
pub fn history_csv(history: &[IterationState]) -> String {
    let mut out = String::from("n,norm_u,norm_v,ratio\n");
    for h in history {
        let ratio = h.ratio.map(|r| format!("{r:.16e}")).unwrap_or_default();
        out.push_str(&format!("{},{:.16e},{:.16e},{}\n", h.n, h.norm, h.diff, ratio));
    }
    out
}
