//! Linear Schrödinger evolution with variable metric and potentials.

use crate::error::{QslError, Result};
use crate::grid::{Grid, SampledField, C64};
use crate::lp::tilde_support;

use super::interp::Series;
use super::metric::MetricField;

const ZERO: C64 = C64::new(0.0, 0.0);
/// Stability constant for both step-size rules.
pub const CFL: f64 = 0.25;

/// Where the evolution lives in frequency.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Localization {
    /// Frequency-localized at band `j`: the solution is kept in the support of
    /// `S~_j` and the metric is truncated to `S_{<j-4}`.
    Band(usize),
    /// Full (2/3-dealiased) problem with the untruncated metric.
    Global,
}

/// `i u_t + d_k g^{kl} d_l u + V.grad u + W u = H` on the torus, `t in [0, 1]`.
#[derive(Clone, Debug)]
pub struct LinearProblem {
    pub metric: MetricField,
    pub localization: Localization,
    /// Spatial datum at `t = 0`.
    pub datum: Vec<C64>,
    pub forcing: Option<SampledField>,
    /// One field per axis, or empty.
    pub first_order: Vec<SampledField>,
    pub zeroth_order: Option<SampledField>,
}

impl LinearProblem {
    pub fn new(metric: MetricField, localization: Localization, datum: Vec<C64>) -> Self {
        Self {
            metric,
            localization,
            datum,
            forcing: None,
            first_order: Vec::new(),
            zeroth_order: None,
        }
    }

    /// Flat metric, no potentials.
    pub fn free(grid: &Grid, localization: Localization, datum: Vec<C64>) -> Self {
        Self::new(MetricField::identity(grid), localization, datum)
    }

    pub fn with_forcing(mut self, f: SampledField) -> Self {
        self.forcing = Some(f);
        self
    }

    pub fn with_potentials(mut self, v: Vec<SampledField>, w: Option<SampledField>) -> Self {
        self.first_order = v;
        self.zeroth_order = w;
        self
    }

    pub fn grid(&self) -> &Grid {
        self.metric.grid()
    }

    pub fn band(&self) -> Option<usize> {
        match self.localization {
            Localization::Band(j) => Some(j),
            Localization::Global => None,
        }
    }

    /// Galerkin space of the evolution.
    pub fn projector(&self) -> Result<Vec<bool>> {
        let g = self.grid();
        match self.localization {
            Localization::Band(j) => {
                if j > g.j_max() {
                    return Err(QslError::OutOfRange {
                        what: "band",
                        index: j,
                        limit: g.j_max(),
                    });
                }
                Ok(tilde_support(g, j))
            }
            Localization::Global => Ok((0..g.spatial_len()).map(|p| g.is_dealiased(p)).collect()),
        }
    }

    /// Metric perturbation actually used by the evolution.
    pub fn effective_perturbation(&self) -> SampledField {
        match self.localization {
            Localization::Band(j) => self.metric.truncated(j),
            Localization::Global => self.metric.perturbation().clone(),
        }
    }

    fn check_shapes(&self) -> Result<()> {
        let g = self.grid();
        if self.datum.len() != g.spatial_len() {
            return Err(QslError::Shape(format!(
                "datum has {} points, grid has {}",
                self.datum.len(),
                g.spatial_len()
            )));
        }
        if !self.first_order.is_empty() && self.first_order.len() != g.dim() {
            return Err(QslError::Shape(format!(
                "{} first-order coefficients for dimension {}",
                self.first_order.len(),
                g.dim()
            )));
        }
        let fields = self
            .forcing
            .iter()
            .chain(&self.first_order)
            .chain(self.zeroth_order.iter());
        for f in fields {
            if f.grid() != g {
                return Err(QslError::Shape("coefficient on a different grid".into()));
            }
        }
        Ok(())
    }

    /// Largest internal step allowed by the stability rule.
    pub fn max_step(&self) -> Result<f64> {
        let g = self.grid();
        match self.localization {
            Localization::Band(j) => Ok(CFL / 4f64.powi(j as i32 + 1)),
            Localization::Global => {
                let mask = self.projector()?;
                let xi_max = g
                    .abs_xi()
                    .iter()
                    .zip(&mask)
                    .filter(|(_, m)| **m)
                    .map(|(x, _)| *x)
                    .fold(0.0, f64::max);
                let sup = |f: &SampledField| f.values().iter().map(|z| z.norm()).fold(0.0, f64::max);
                let h = sup(&self.effective_perturbation());
                let v = self.first_order.iter().map(sup).fold(0.0, f64::max);
                let w = self.zeroth_order.as_ref().map(sup).unwrap_or(0.0);
                let rate = h * xi_max * xi_max + v * xi_max + w;
                Ok(if rate > 0.0 { CFL / rate } else { f64::INFINITY })
            }
        }
    }
}

/// Precomputed pieces of the evolution: projector, coefficient series and
/// the spatial operator `A = -P d g d P`.
pub struct LinearOperator<'a> {
    problem: &'a LinearProblem,
    grid: Grid,
    mask: Vec<bool>,
    eta: SampledField,
    flat: bool,
}

impl<'a> LinearOperator<'a> {
    pub fn new(problem: &'a LinearProblem) -> Result<Self> {
        problem.check_shapes()?;
        let eta = problem.effective_perturbation();
        let min_eig = 1.0 + eta.values().iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        if min_eig < 0.5 {
            return Err(QslError::Ellipticity { min_eig });
        }
        let flat = eta.values().iter().all(|z| z.re == 0.0);
        Ok(Self {
            problem,
            grid: problem.grid().clone(),
            mask: problem.projector()?,
            eta,
            flat,
        })
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Project a spatial slice onto the Galerkin space.
    pub fn project(&self, slice: &[C64]) -> Vec<C64> {
        let mut s = slice.to_vec();
        self.grid.forward(&mut s);
        self.mask_spectrum(&mut s);
        self.grid.inverse(&mut s);
        s
    }

    fn mask_spectrum(&self, spec: &mut [C64]) {
        spec.iter_mut().zip(&self.mask).for_each(|(z, m)| {
            if !m {
                *z = ZERO;
            }
        });
    }

    /// `P sum_a d_a (eta d_a u)` for a spectrum `u`, returned as a spectrum.
    fn perturbed_laplacian(&self, eta: &[C64], u_hat: &[C64]) -> Vec<C64> {
        let g = &self.grid;
        let mut acc = vec![ZERO; u_hat.len()];
        for a in 0..g.dim() {
            let mut q = self.spectral_derivative(u_hat, a);
            g.inverse(&mut q);
            q.iter_mut().zip(eta).for_each(|(z, e)| *z *= e.re);
            g.forward(&mut q);
            let dq = self.spectral_derivative(&q, a);
            acc.iter_mut().zip(&dq).for_each(|(s, z)| *s += z);
        }
        self.mask_spectrum(&mut acc);
        acc
    }

    fn spectral_derivative(&self, u_hat: &[C64], axis: usize) -> Vec<C64> {
        let g = &self.grid;
        u_hat
            .iter()
            .enumerate()
            .map(|(p, z)| {
                if g.is_nyquist(p) {
                    ZERO
                } else {
                    z * C64::new(0.0, g.xi(p)[axis])
                }
            })
            .collect()
    }

    /// `A u = -P d_k g^{kl} d_l P u` at sample `t`, spatial in and out.
    pub fn apply_a(&self, t: usize, slice: &[C64]) -> Vec<C64> {
        let g = &self.grid;
        let mut u = slice.to_vec();
        g.forward(&mut u);
        self.mask_spectrum(&mut u);
        let mut out: Vec<C64> = u
            .iter()
            .zip(g.abs_xi())
            .map(|(z, k)| z * (k * k))
            .collect();
        if !self.flat {
            let pert = self.perturbed_laplacian(self.eta.slice(t), &u);
            out.iter_mut().zip(&pert).for_each(|(o, z)| *o -= z);
        }
        g.inverse(&mut out);
        out
    }
}

/// Interaction-picture phases `e^{-i |xi|^2 tau}` on the Galerkin space.
fn phases(grid: &Grid, mask: &[bool], tau: f64) -> Vec<C64> {
    grid.abs_xi()
        .iter()
        .zip(mask)
        .map(|(k, m)| if *m { C64::from_polar(1.0, -k * k * tau) } else { ZERO })
        .collect()
}

fn mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

fn axpy(y: &[C64], a: f64, x: &[C64]) -> Vec<C64> {
    y.iter().zip(x).map(|(u, v)| u + v * a).collect()
}

struct Rhs<'a> {
    op: &'a LinearOperator<'a>,
    eta: Option<Series>,
    v: Vec<Series>,
    w: Option<Series>,
    h: Option<Series>,
}

impl<'a> Rhs<'a> {
    fn new(op: &'a LinearOperator<'a>) -> Self {
        let p = op.problem;
        let g = &op.grid;
        let h = p.forcing.as_ref().map(|f| {
            let spectra = (0..g.nt())
                .map(|t| {
                    let mut s = f.slice(t).to_vec();
                    g.forward(&mut s);
                    op.mask_spectrum(&mut s);
                    s
                })
                .collect();
            let omega = g.abs_xi().iter().map(|k| k * k).collect();
            Series::interaction(spectra, g.dt(), omega)
        });
        Self {
            op,
            eta: (!op.flat).then(|| Series::plain(&op.eta)),
            v: p.first_order.iter().map(Series::plain).collect(),
            w: p.zeroth_order.as_ref().map(Series::plain),
            h,
        }
    }

    /// `P[i d(eta d u) + i V.grad u + i W u - i H]` as a spectrum.
    fn eval(&self, t: f64, u_hat: &[C64]) -> Vec<C64> {
        let op = self.op;
        let g = &op.grid;
        let mut acc = match &self.eta {
            Some(s) => op.perturbed_laplacian(&s.at(t), u_hat),
            None => vec![ZERO; u_hat.len()],
        };
        if !self.v.is_empty() || self.w.is_some() {
            let mut phys = vec![ZERO; u_hat.len()];
            for (a, s) in self.v.iter().enumerate() {
                let coef = s.at(t);
                let mut du = op.spectral_derivative(u_hat, a);
                g.inverse(&mut du);
                phys.iter_mut().zip(coef.iter().zip(&du)).for_each(|(o, (c, d))| *o += c * d);
            }
            if let Some(s) = &self.w {
                let coef = s.at(t);
                let mut u = u_hat.to_vec();
                g.inverse(&mut u);
                phys.iter_mut().zip(coef.iter().zip(&u)).for_each(|(o, (c, z))| *o += c * z);
            }
            g.forward(&mut phys);
            op.mask_spectrum(&mut phys);
            acc.iter_mut().zip(&phys).for_each(|(a, z)| *a += z);
        }
        if let Some(s) = &self.h {
            let f = s.at(t);
            acc.iter_mut().zip(&f).for_each(|(a, z)| *a -= z);
        }
        acc.iter_mut().for_each(|z| *z *= C64::new(0.0, 1.0));
        acc
    }

    fn is_zero(&self) -> bool {
        self.eta.is_none() && self.v.is_empty() && self.w.is_none() && self.h.is_none()
    }
}

/// Evolve `problem` over `[0, 1]` with internal step at most `dt`; the
/// trajectory is returned at the grid's time samples.
///
/// Integrating-factor RK4: the flat dispersion is integrated exactly and
/// the remaining terms are stepped explicitly in the interaction picture.
pub fn step_linear(problem: &LinearProblem, dt: f64) -> Result<SampledField> {
    let op = LinearOperator::new(problem)?;
    let g = op.grid.clone();
    let bound = problem.max_step()?;
    if !(dt > 0.0) || dt > bound * (1.0 + 1e-12) {
        return Err(QslError::Cfl {
            dt,
            bound,
            band: problem.band().unwrap_or(g.j_max()),
        });
    }
    let rhs = Rhs::new(&op);
    let mut u = problem.datum.clone();
    g.forward(&mut u);
    op.mask_spectrum(&mut u);

    let sample = g.dt();
    let mut out = SampledField::zeros(&g);
    let emit = |out: &mut SampledField, n: usize, u: &[C64]| {
        let s = out.slice_mut(n);
        s.copy_from_slice(u);
        g.inverse(s);
    };
    emit(&mut out, 0, &u);

    if rhs.is_zero() {
        for n in 1..g.nt() {
            let e = phases(&g, &op.mask, g.time(n));
            emit(&mut out, n, &mul(&e, &u));
        }
        return Ok(out);
    }

    let sub = ((sample / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let h = sample / sub as f64;
    let e_half = phases(&g, &op.mask, h / 2.0);
    let e_full = phases(&g, &op.mask, h);
    let mut step = 0;
    for n in 1..g.nt() {
        for m in 0..sub {
            let t = g.time(n - 1) + m as f64 * h;
            let k1 = rhs.eval(t, &u);
            let k2 = rhs.eval(t + h / 2.0, &mul(&e_half, &axpy(&u, h / 2.0, &k1)));
            let eu_half = mul(&e_half, &u);
            let k3 = rhs.eval(t + h / 2.0, &axpy(&eu_half, h / 2.0, &k2));
            let u4 = axpy(&mul(&e_full, &u), h, &mul(&e_half, &k3));
            let k4 = rhs.eval(t + h, &u4);
            let mid: Vec<C64> = k2.iter().zip(&k3).map(|(a, b)| (a + b) * 2.0).collect();
            let incr: Vec<C64> = mul(&e_full, &k1)
                .iter()
                .zip(mul(&e_half, &mid))
                .zip(&k4)
                .map(|((a, b), c)| a + b + c)
                .collect();
            u = axpy(&mul(&e_full, &u), h / 6.0, &incr);
            step += 1;
            if u.iter().any(|z| !z.is_finite()) {
                return Err(QslError::NonFinite { step });
            }
        }
        emit(&mut out, n, &u);
    }
    Ok(out)
}

/// [`step_linear`] at the largest step the stability rule allows.
pub fn solve_linear(problem: &LinearProblem) -> Result<SampledField> {
    let dt = problem.max_step()?.min(problem.grid().dt());
    step_linear(problem, dt)
}
