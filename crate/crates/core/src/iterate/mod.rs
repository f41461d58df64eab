//! Picard iteration for small-data quasilinear Schrödinger equations on the
//! torus, `i u_t + d_j g^{jk}(u) d_k u = F(u, grad u)` with `t in [0, 1]`, and
//! the experiments built on it: contraction, envelopes, continuity of the
//! data-to-solution map, higher regularity and the reduction of the
//! nondivergence form.

mod analysis;
mod picard;
mod reduce;
mod split;

pub use analysis::{
    continuity_experiment, contraction_report, envelope_propagation, higher_regularity, pde_residual,
    time_derivative, ContinuityRow, ContinuityTable, ContractionReport, EnvelopeReport, LadderRow,
    ENVELOPE_FLAG,
};
pub use picard::{history_csv, picard_solve, IterationState, PicardOutcome, MAX_ITER, TOL};
pub use reduce::{reduce_nondivergence, solve_reduced, ReducedSolution, ReducedSystem};
pub use split::{band_split, BandPieces};

use serde::{Deserialize, Serialize};

use crate::error::{QslError, Result};
use crate::evolve::MetricMap;
use crate::grid::{Grid, SampledField, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    /// `i u_t + d_j g^{jk}(u) d_k u = F(u, grad u)`.
    Divergence,
    /// `i u_t + g^{jk}(u, grad u) d_j d_k u = F(u, grad u)`.
    Nondivergence,
}

/// `F(u, grad u) = cubic |u|^2 u + gradient |grad u|^2 u`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Nonlinearity {
    pub cubic: f64,
    pub gradient: f64,
}

impl Default for Nonlinearity {
    fn default() -> Self {
        Self {
            cubic: 1.0,
            gradient: 1.0,
        }
    }
}

impl Nonlinearity {
    pub const ZERO: Nonlinearity = Nonlinearity {
        cubic: 0.0,
        gradient: 0.0,
    };

    pub fn is_zero(&self) -> bool {
        self.cubic == 0.0 && self.gradient == 0.0
    }

    /// `F(u, grad u)` with spectral gradients.
    pub fn eval(&self, u: &SampledField) -> SampledField {
        let grads: Vec<SampledField> = (0..u.grid().dim()).map(|a| u.derivative(a)).collect();
        self.eval_with(u, &grads)
    }

    /// `F(y, z)` with `z` standing in for the gradient.
    pub fn eval_with(&self, y: &SampledField, z: &[SampledField]) -> SampledField {
        if self.is_zero() {
            return SampledField::zeros(y.grid());
        }
        let y = y.dealiased();
        let z: Vec<SampledField> = z.iter().map(|f| f.dealiased()).collect();
        let mut out = y.map_values(|u| u * u.norm_sqr() * self.cubic);
        if self.gradient != 0.0 {
            let mut sq = SampledField::zeros(y.grid());
            for f in &z {
                sq = sq.zip_with(f, |a, b| a + b.norm_sqr());
            }
            let grad = y.zip_with(&sq, |u, q| u * q.re * self.gradient);
            out = out.add(&grad);
        }
        out.dealiased()
    }

    /// `F(b + v) - F(b)` in expanded form, accurate when `v` is far below `b`.
    pub fn increment(&self, b: &SampledField, v: &SampledField) -> SampledField {
        if self.is_zero() {
            return SampledField::zeros(b.grid());
        }
        let (b, v) = (b.dealiased(), v.dealiased());
        let a = b.add(&v);
        // |b + v|^2 - |b|^2 = 2 Re(conj(b) v) + |v|^2
        let dq = |x: C64, y: C64| 2.0 * (x.conj() * y).re + y.norm_sqr();
        let cubic = self.cubic;
        let mut out = b.zip_with(&v, |x, y| x.norm_sqr() * y * cubic);
        out = out.add(&a.zip_with(&b.zip_with(&v, |x, y| C64::new(dq(x, y), 0.0)), |z, q| z * q.re * cubic));
        if self.gradient != 0.0 {
            let (mut sq, mut dsq) = (SampledField::zeros(b.grid()), SampledField::zeros(b.grid()));
            for k in 0..b.grid().dim() {
                let (db, dv) = (b.derivative(k).dealiased(), v.derivative(k).dealiased());
                sq = sq.zip_with(&db, |s, x| s + x.norm_sqr());
                dsq = dsq.add(&db.zip_with(&dv, |x, y| C64::new(dq(x, y), 0.0)));
            }
            let gamma = self.gradient;
            out = out.add(&v.zip_with(&sq, |y, q| y * q.re * gamma));
            out = out.add(&a.zip_with(&dsq, |z, q| z * q.re * gamma));
        }
        out.dealiased()
    }
}

/// One quasilinear problem: form, coefficients, regularity, smallness
/// budget and the datum.
#[derive(Clone, Debug, PartialEq)]
pub struct QuasilinearSpec {
    pub form: Form,
    pub metric: MetricMap,
    pub nonlinearity: Nonlinearity,
    pub s: f64,
    /// Upper bound for `||u_0||_{H^s}`.
    pub epsilon: f64,
    /// Spatial datum.
    pub datum: Vec<C64>,
}

impl QuasilinearSpec {
    pub fn new(form: Form, datum: Vec<C64>, s: f64, epsilon: f64) -> Self {
        Self {
            form,
            metric: MetricMap::default(),
            nonlinearity: Nonlinearity::default(),
            s,
            epsilon,
            datum,
        }
    }

    /// Regularity threshold: `(d+3)/2` for the divergence form, `(d+5)/2`
    /// otherwise.
    pub fn threshold(form: Form, d: usize) -> f64 {
        match form {
            Form::Divergence => (d as f64 + 3.0) / 2.0,
            Form::Nondivergence => (d as f64 + 5.0) / 2.0,
        }
    }

    /// Default regularity, half a derivative above the threshold.
    pub fn default_s(form: Form, d: usize) -> f64 {
        Self::threshold(form, d) + 0.5
    }

    pub fn datum_norm(&self, grid: &Grid) -> f64 {
        grid.sobolev(&self.datum, self.s)
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if self.datum.len() != grid.spatial_len() {
            return Err(QslError::Shape(format!(
                "datum has {} points, grid has {}",
                self.datum.len(),
                grid.spatial_len()
            )));
        }
        let min = Self::threshold(self.form, grid.dim());
        if !(self.s > min) {
            return Err(QslError::Config {
                key: "s".into(),
                message: format!("need s > {min}, got {}", self.s),
            });
        }
        let norm = self.datum_norm(grid);
        if norm > self.epsilon * (1.0 + 1e-12) {
            return Err(QslError::Smallness {
                what: "||u0||_{H^s}",
                value: norm,
                limit: self.epsilon,
            });
        }
        Ok(())
    }

    /// `shape` rescaled to `||u_0||_{H^s} = epsilon`.
    pub fn scaled(form: Form, shape: &[C64], grid: &Grid, s: f64, epsilon: f64) -> Self {
        let norm = grid.sobolev(shape, s);
        let c = if norm > 0.0 { epsilon / norm } else { 0.0 };
        Self::new(form, shape.iter().map(|z| z * c).collect(), s, epsilon)
    }

    pub fn with_metric(mut self, metric: MetricMap) -> Self {
        self.metric = metric;
        self
    }

    pub fn with_nonlinearity(mut self, f: Nonlinearity) -> Self {
        self.nonlinearity = f;
        self
    }
}
