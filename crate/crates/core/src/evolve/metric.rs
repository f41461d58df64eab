use serde::{Deserialize, Serialize};

use crate::grid::{SampledField, C64};

/// Isotropic metric perturbation `g = (1 + eta(|z|^2)) I`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricMap {
    Identity,
    /// `eta(q) = kappa q`.
    Quadratic { kappa: f64 },
    /// `eta(q) = kappa q / (1 + q)`, bounded.
    Saturated { kappa: f64 },
}

impl Default for MetricMap {
    fn default() -> Self {
        MetricMap::Saturated { kappa: 1.0 }
    }
}

impl MetricMap {
    pub fn eta(&self, q: f64) -> f64 {
        match *self {
            MetricMap::Identity => 0.0,
            MetricMap::Quadratic { kappa } => kappa * q,
            MetricMap::Saturated { kappa } => kappa * q / (1.0 + q),
        }
    }

    /// `d eta / dq`.
    pub fn eta_prime(&self, q: f64) -> f64 {
        match *self {
            MetricMap::Identity => 0.0,
            MetricMap::Quadratic { kappa } => kappa,
            MetricMap::Saturated { kappa } => kappa / ((1.0 + q) * (1.0 + q)),
        }
    }

    /// Real profile `t -> eta(t^2)`, used for derivative bounds.
    pub fn profile(&self, t: f64) -> f64 {
        self.eta(t * t)
    }

    pub fn is_identity(&self) -> bool {
        match *self {
            MetricMap::Identity => true,
            MetricMap::Quadratic { kappa } | MetricMap::Saturated { kappa } => kappa == 0.0,
        }
    }

    /// `eta(|w|^2)` pointwise, as a real-valued field.
    pub fn perturbation(&self, w: &SampledField) -> SampledField {
        let m = *self;
        w.map_values(move |z| C64::new(m.eta(z.norm_sqr()), 0.0))
    }

    /// `eta(|y|^2 + |z|^2)` for the two-component form.
    pub fn perturbation_pair(&self, y: &SampledField, z: &SampledField) -> SampledField {
        let m = *self;
        y.zip_with(z, move |a, b| C64::new(m.eta(a.norm_sqr() + b.norm_sqr()), 0.0))
    }
}

/// Coefficient field `g^{kl} = (1 + eta) delta^{kl}`: real and symmetric by
/// construction. `eta` is stored as a real-valued sampled field.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricField {
    pub map: MetricMap,
    /// Composition argument, when the metric was built from one.
    pub w: Option<SampledField>,
    eta: SampledField,
}

impl MetricField {
    pub fn identity(grid: &crate::grid::Grid) -> Self {
        Self {
            map: MetricMap::Identity,
            w: None,
            eta: SampledField::zeros(grid),
        }
    }

    pub fn from_map(map: MetricMap, w: &SampledField) -> Self {
        Self {
            map,
            eta: map.perturbation(w).dealiased(),
            w: Some(w.clone()),
        }
    }

    /// Metric of the two-component form, `eta(|y|^2 + |z|^2)`.
    pub fn from_pair(map: MetricMap, y: &SampledField, z: &SampledField) -> Self {
        Self {
            map,
            eta: map.perturbation_pair(y, z).dealiased(),
            w: Some(y.clone()),
        }
    }

    /// Explicit perturbation; only the real part is kept.
    pub fn from_perturbation(eta: &SampledField) -> Self {
        Self {
            map: MetricMap::Identity,
            w: None,
            eta: eta.map_values(|z| C64::new(z.re, 0.0)),
        }
    }

    pub fn grid(&self) -> &crate::grid::Grid {
        self.eta.grid()
    }

    pub fn perturbation(&self) -> &SampledField {
        &self.eta
    }

    pub fn is_identity(&self) -> bool {
        self.eta.values().iter().all(|z| *z == C64::new(0.0, 0.0))
    }

    /// `g^{kl}` at sample `(t, p)`.
    pub fn coefficient(&self, k: usize, l: usize, t: usize, p: usize) -> f64 {
        let delta = if k == l { 1.0 } else { 0.0 };
        delta * (1.0 + self.eta.slice(t)[p].re)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        1.0 + self.eta.values().iter().map(|z| z.re).fold(f64::INFINITY, f64::min)
    }

    /// `eta_{<j-4}`, clamped so that at least `S_0` is kept.
    pub fn truncated(&self, j: usize) -> SampledField {
        crate::lp::s_below(&self.eta, (j as i64 - 4).max(1)).map_values(|z| C64::new(z.re, 0.0))
    }
}
