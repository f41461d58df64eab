use serde::Serialize;

use super::picard::{picard_solve, IterationState};
use super::split::div_grad;
use super::{Form, QuasilinearSpec};
use crate::cubes::{lp_xs_norm, CubeSum};
use crate::error::{QslError, Result};
use crate::estimator::envelope_delta;
use crate::evolve::{solve_linear, LinearProblem, Localization, MetricField};
use crate::grid::{l2l2, linf_l2, Grid, SampledField, C64};
use crate::lp::{below_table, envelope_of, geq_table, EnvelopeNorm, FrequencyEnvelope};

#[derive(Clone, Debug, Serialize)]
pub struct ContractionReport {
    /// `(n, r_n)` with `r_n = ||v^(n+1)|| / ||v^(n)||`.
    pub ratios: Vec<(usize, f64)>,
    /// `max_{n >= 2} r_n`.
    pub max_tail: Option<f64>,
    pub contracting: bool,
}

pub fn contraction_report(history: &[IterationState]) -> ContractionReport {
    let ratios: Vec<(usize, f64)> = history
        .iter()
        .filter_map(|h| h.ratio.map(|r| (h.n - 1, r)))
        .collect();
    let max_tail = ratios
        .iter()
        .filter(|(n, _)| *n >= 2)
        .map(|(_, r)| *r)
        .reduce(f64::max);
    ContractionReport {
        contracting: max_tail.is_none_or(|r| r <= 0.5),
        ratios,
        max_tail,
    }
}

/// Threshold above which `sup_j b_j / a_j` is flagged.
pub const ENVELOPE_FLAG: f64 = 10.0;

#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeReport {
    /// Envelope of `u_0` in `H^s`.
    pub a: FrequencyEnvelope,
    /// Envelope of `u` in `l^2 X^s`.
    pub b: FrequencyEnvelope,
    pub max_ratio: f64,
    pub flagged: bool,
}

pub fn envelope_propagation(spec: &QuasilinearSpec, u: &SampledField) -> Result<EnvelopeReport> {
    let g = u.grid();
    let delta = envelope_delta(spec.s, g.dim());
    let datum = SampledField::constant_in_time(g, &spec.datum)?;
    let a = envelope_of(&datum, EnvelopeNorm::Sobolev { s: spec.s }, delta);
    let b = envelope_of(u, EnvelopeNorm::L2X { s: spec.s }, delta);
    let max_ratio = a
        .entries
        .iter()
        .zip(&b.entries)
        .map(|(x, y)| y / x)
        .fold(0.0, f64::max);
    Ok(EnvelopeReport {
        flagged: max_ratio > ENVELOPE_FLAG,
        a,
        b,
        max_ratio,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuityRow {
    pub delta: f64,
    /// `||u_delta - u||_{l2 X^s}`.
    pub total: f64,
    /// Same, frequencies below `2^{N_eps}`.
    pub low: f64,
    /// Same, frequencies at or above `2^{N_eps}`.
    pub high: f64,
    /// `||S_{<N_eps}(delta phi)||_{H^{s-1}}`.
    pub data_low: f64,
    /// `l^2` tails above `N_eps` of the two solution envelopes, times the
    /// datum norm.
    pub tail_bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuityTable {
    pub cut: usize,
    pub rows: Vec<ContinuityRow>,
    /// Set when a solve failed; `rows` then holds the completed part.
    pub error: Option<String>,
}

/// Solves with data `u_0 + delta phi` for each `delta` and splits the
/// distance to the base solution at frequency `2^{cut}`.
pub fn continuity_experiment(
    spec: &QuasilinearSpec,
    grid: &Grid,
    phi: &[C64],
    deltas: &[f64],
    cut: usize,
    tol: f64,
    max_iter: usize,
) -> Result<ContinuityTable> {
    let s = spec.s;
    let base = picard_solve(spec, grid, tol, max_iter)?.u;
    let env_delta = envelope_delta(s, grid.dim());
    let base_tail = envelope_of(&base, EnvelopeNorm::L2X { s }, env_delta).tail(cut.saturating_sub(1));
    let low_table = below_table(grid, cut as i64);
    let high_table = geq_table(grid, cut as i64);
    let mut table = ContinuityTable {
        cut,
        rows: Vec::new(),
        error: None,
    };
    for &delta in deltas {
        let mut pert = spec.clone();
        pert.datum = spec.datum.iter().zip(phi).map(|(a, b)| a + b * delta).collect();
        pert.epsilon = spec.epsilon + delta * grid.sobolev(phi, s);
        let u = match picard_solve(&pert, grid, tol, max_iter) {
            Ok(out) => out.u,
            Err(e) => {
                table.error = Some(e.to_string());
                break;
            }
        };
        let d = u.sub(&base);
        let mut dphi: Vec<C64> = phi.iter().map(|z| z * delta).collect();
        grid.apply_multiplier(&mut dphi, |p| low_table[p].into());
        let tail = envelope_of(&u, EnvelopeNorm::L2X { s }, env_delta).tail(cut.saturating_sub(1));
        table.rows.push(ContinuityRow {
            delta,
            total: lp_xs_norm(&d, CubeSum::Two, s).value,
            low: lp_xs_norm(&d.apply_table(&low_table), CubeSum::Two, s).value,
            high: lp_xs_norm(&d.apply_table(&high_table), CubeSum::Two, s).value,
            data_low: grid.sobolev(&dphi, s - 1.0),
            tail_bound: (tail + base_tail) * pert.datum_norm(grid),
        });
    }
    Ok(table)
}

#[derive(Clone, Debug, Serialize)]
pub struct LadderRow {
    pub order: usize,
    /// `||u||_{l2 X^{s+n}}`.
    pub norm: f64,
    /// `||u(0)||_{H^{s+n}}`.
    pub datum: f64,
    /// `||u||^3_{l2 X^{s+n-1}}`.
    pub cubic: f64,
    /// `norm / (datum + cubic)`, 0 when everything vanishes.
    pub constant: f64,
    /// `||v_n - d^n u||_{L^inf L2} / ||d^n u||_{L^inf L2}` for the solved
    /// derivative equation.
    pub defect: f64,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Differentiates the equation `n` times (`n <= 2`, `d = 1`): `v_n = d^n u`
/// solves `i v_t + d(g d v) + n g' d v + n g'' v = d^n F - sum_{k>=2} C(n,k) d(g^(k) v_{n+1-k})`.
pub fn higher_regularity(spec: &QuasilinearSpec, u: &SampledField, order: usize) -> Result<Vec<LadderRow>> {
    let g = u.grid();
    if g.dim() != 1 || spec.form != Form::Divergence {
        return Err(QslError::Unsupported(
            "higher regularity ladder needs d = 1 and the divergence form".into(),
        ));
    }
    if order == 0 || order > 2 {
        return Err(QslError::OutOfRange {
            what: "derivative order",
            index: order,
            limit: 2,
        });
    }
    let metric = MetricField::from_map(spec.metric, u);
    let eta = metric.perturbation().clone();
    let eta_d: Vec<SampledField> = vec![eta.clone(), eta.derivative(0), eta.derivative(0).derivative(0)];
    let f = spec.nonlinearity.eval(u);
    let mut exact = vec![u.clone()];
    let mut solved = vec![u.clone()];
    let mut rows = Vec::new();
    for n in 1..=order {
        exact.push(exact[n - 1].derivative(0));
        let mut forcing = (0..n).fold(f.clone(), |acc, _| acc.derivative(0));
        for k in 2..=n {
            let term = eta_d[k].product(&solved[n + 1 - k]).derivative(0);
            forcing = forcing.sub(&term.scale(C64::new(binomial(n, k), 0.0)));
        }
        let mut datum = spec.datum.clone();
        for _ in 0..n {
            datum = g.derivative(&datum, 0);
        }
        let nf = C64::new(n as f64, 0.0);
        let p = LinearProblem::new(metric.clone(), Localization::Global, datum)
            .with_forcing(forcing)
            .with_potentials(vec![eta_d[1].scale(nf)], Some(eta_d[2].scale(nf)));
        let v = solve_linear(&p)?;
        let scale = linf_l2(&exact[n]);
        let defect_abs = linf_l2(&v.sub(&exact[n]));
        solved.push(v);
        let s_n = spec.s + n as f64;
        let norm = lp_xs_norm(u, CubeSum::Two, s_n).value;
        let datum = g.sobolev(&spec.datum, s_n);
        let cubic = lp_xs_norm(u, CubeSum::Two, s_n - 1.0).value.powi(3);
        rows.push(LadderRow {
            order: n,
            norm,
            datum,
            cubic,
            constant: if datum + cubic > 0.0 { norm / (datum + cubic) } else { 0.0 },
            defect: if scale > 0.0 { defect_abs / scale } else { defect_abs },
        });
    }
    Ok(rows)
}

/// Derivative weights of the Lagrange interpolant through `nodes` at
/// `nodes[at]`.
fn lagrange_derivative(nodes: &[f64], at: usize) -> Vec<f64> {
    let x = nodes[at];
    let m = nodes.len();
    (0..m)
        .map(|i| {
            (0..m)
                .filter(|&k| k != i)
                .map(|k| {
                    let mut term = 1.0 / (nodes[i] - nodes[k]);
                    for q in (0..m).filter(|&q| q != i && q != k) {
                        term *= (x - nodes[q]) / (nodes[i] - nodes[q]);
                    }
                    term
                })
                .sum()
        })
        .collect()
}

/// `d_t u` at the samples: the free phase is differentiated exactly and the
/// remainder with a 6-point Lagrange stencil.
pub fn time_derivative(u: &SampledField) -> SampledField {
    let g = u.grid();
    let nt = g.nt();
    let omega: Vec<f64> = g.abs_xi().iter().map(|k| k * k).collect();
    let spectra: Vec<Vec<C64>> = (0..nt)
        .map(|n| {
            let mut s = u.slice(n).to_vec();
            g.forward(&mut s);
            let t = g.time(n);
            s.iter().zip(&omega).map(|(z, w)| z * C64::from_polar(1.0, w * t)).collect()
        })
        .collect();
    let width = 6.min(nt);
    let mut out = SampledField::zeros(g);
    for n in 0..nt {
        let start = (n as isize - (width as isize / 2 - 1)).clamp(0, (nt - width) as isize) as usize;
        let nodes: Vec<f64> = (start..start + width).map(|i| g.time(i)).collect();
        let w = lagrange_derivative(&nodes, n - start);
        let t = g.time(n);
        let slice = out.slice_mut(n);
        for p in 0..slice.len() {
            let dv: C64 = w.iter().enumerate().map(|(i, wi)| spectra[start + i][p] * wi).sum();
            let phase = C64::from_polar(1.0, -omega[p] * t);
            let v = spectra[n][p];
            slice[p] = phase * (dv + C64::new(0.0, -omega[p]) * v);
        }
        g.inverse(slice);
    }
    out
}

/// `||i u_t + d g(u) d u - F(u, grad u)||_{L2 L2}` (nondivergence form:
/// `g(u, grad u) Laplacian u`).
pub fn pde_residual(spec: &QuasilinearSpec, u: &SampledField) -> f64 {
    let g = u.grid();
    let ut = time_derivative(u).scale(C64::new(0.0, 1.0));
    let f = spec.nonlinearity.eval(u);
    let op = match spec.form {
        Form::Divergence => {
            let eta = MetricField::from_map(spec.metric, u).perturbation().clone();
            div_grad(&eta, u, true)
        }
        Form::Nondivergence => {
            let grads: Vec<SampledField> = (0..g.dim()).map(|a| u.derivative(a)).collect();
            let mut q = u.map_values(|z| C64::new(z.norm_sqr(), 0.0));
            for c in &grads {
                q = q.zip_with(c, |a, b| a + b.norm_sqr());
            }
            let eta = q.map_values(|v| C64::new(spec.metric.eta(v.re), 0.0)).dealiased();
            let lap = grads
                .iter()
                .enumerate()
                .fold(SampledField::zeros(g), |acc, (a, c)| acc.add(&c.derivative(a)));
            lap.zip_with(&eta, |l, e| l * (1.0 + e.re)).dealiased()
        }
    };
    l2l2(&ut.add(&op).sub(&f))
}
