//! Randomized verification of the multilinear, Moser and commutator
//! estimates. Each check measures both sides on concrete fields, with
//! frequency envelopes taken from the inputs, and reports the ratio.

mod campaign;
mod checks;
mod family;

pub use campaign::{fuzz_campaign, CampaignConfig, CampaignSummary, CampaignTable, Growth};
pub use checks::{
    check_algebra, check_commutator, check_moser, check_trilinear, commutator_field, SymbolMultiplier,
    TrilinearVariant,
};
pub use family::{band_modes, random_field, BandProfile, Recipe, TestFamily, BAND_CORE};

use serde::{Deserialize, Serialize};

use crate::cubes::{band_lp_x, band_lp_y, CubeSum, NormReport};
use crate::grid::{SampledField, C64};
use crate::lp::{default_delta, envelope_from_bands, sj_project, FrequencyEnvelope};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateId {
    /// Algebra property of `l^2 X^sigma`.
    Algebra,
    /// Moser bound for `F(u)`.
    Moser,
    /// Trilinear bound with `u` in `X^{sigma-1}`.
    Trilinear,
    /// Trilinear bound with `u` in `l^2 X^sigma`, `v` in `l^2 X^{s-2}`.
    TrilinearMixed,
    /// Trilinear bound with the inner high-pass `S_{>=k-4}(vw)`.
    TrilinearHigh,
    /// Commutator of a low-passed metric with an order-zero multiplier.
    Commutator,
}

impl EstimateId {
    pub const ALL: [EstimateId; 6] = [
        EstimateId::Algebra,
        EstimateId::Moser,
        EstimateId::Trilinear,
        EstimateId::TrilinearMixed,
        EstimateId::TrilinearHigh,
        EstimateId::Commutator,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            EstimateId::Algebra => "algebra",
            EstimateId::Moser => "moser",
            EstimateId::Trilinear => "trilinear",
            EstimateId::TrilinearMixed => "trilinear_mixed",
            EstimateId::TrilinearHigh => "trilinear_high",
            EstimateId::Commutator => "commutator",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EstimateParams {
    pub s: f64,
    pub sigma: f64,
    pub d: usize,
    pub n: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub index: usize,
    pub k: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// `rhs == 0`; the sample carries no information.
    pub skipped: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateReport {
    pub estimate: EstimateId,
    pub params: EstimateParams,
    pub samples: Vec<Sample>,
    pub max_ratio: f64,
}

impl EstimateReport {
    pub fn new(estimate: EstimateId, params: EstimateParams) -> Self {
        Self {
            estimate,
            params,
            samples: Vec::new(),
            max_ratio: 0.0,
        }
    }

    pub fn push(&mut self, index: usize, k: usize, lhs: f64, rhs: f64) {
        let skipped = !(rhs > 0.0);
        let ratio = if skipped { 0.0 } else { lhs / rhs };
        if !skipped {
            self.max_ratio = self.max_ratio.max(ratio);
        }
        self.samples.push(Sample {
            index,
            k,
            lhs,
            rhs,
            ratio,
            skipped,
        });
    }

    pub fn extend(&mut self, other: EstimateReport) {
        for s in other.samples {
            let mut s = s;
            if !s.skipped {
                self.max_ratio = self.max_ratio.max(s.ratio);
            }
            s.index = self.samples.len();
            self.samples.push(s);
        }
    }

    pub fn retained(&self) -> impl Iterator<Item = &Sample> {
        self.samples.iter().filter(|s| !s.skipped)
    }

    pub fn skipped(&self) -> usize {
        self.samples.iter().filter(|s| s.skipped).count()
    }

    pub fn is_finite(&self) -> bool {
        self.max_ratio.is_finite() && self.samples.iter().all(|s| s.ratio.is_finite())
    }
}

/// Smooth scalar nonlinearities `F` with `F(0) = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarMap {
    Identity,
    /// `z^3`.
    Cube,
    /// `z |z|^2`.
    CubeAbs,
    /// `sin z - z`.
    SinMinusId,
}

impl ScalarMap {
    pub fn apply(&self, z: C64) -> C64 {
        match self {
            ScalarMap::Identity => z,
            ScalarMap::Cube => z * z * z,
            ScalarMap::CubeAbs => z * z.norm_sqr(),
            ScalarMap::SinMinusId => z.sin() - z,
        }
    }

    /// Restriction to the real line.
    pub fn real(&self, t: f64) -> f64 {
        self.apply(C64::new(t, 0.0)).re
    }
}

/// `max_{|t| <= m} max_{1 <= n <= 4} |f^{(n)}(t)|`, by central differences
/// on a dense sample of `[-m, m]`.
pub fn derivative_bound(f: impl Fn(f64) -> f64, m: f64) -> f64 {
    let h = 1e-2 * m.max(1.0);
    let samples = if m > 0.0 { 401 } else { 1 };
    (0..samples)
        .map(|i| {
            let t = if samples == 1 {
                0.0
            } else {
                -m + 2.0 * m * i as f64 / (samples - 1) as f64
            };
            let v = [-2.0, -1.0, 0.0, 1.0, 2.0].map(|o| f(t + o * h));
            let d1 = (v[3] - v[1]) / (2.0 * h);
            let d2 = (v[3] - 2.0 * v[2] + v[1]) / (h * h);
            let d3 = (v[4] - 2.0 * v[3] + 2.0 * v[1] - v[0]) / (2.0 * h * h * h);
            let d4 = (v[4] - 4.0 * v[3] + 6.0 * v[2] - 4.0 * v[1] + v[0]) / (h * h * h * h);
            d1.abs().max(d2.abs()).max(d3.abs()).max(d4.abs())
        })
        .fold(0.0, f64::max)
}

/// `2^{k sigma} ||S_k f||_{l^2_k X_k}`.
pub fn x_band(f: &SampledField, k: usize, sigma: f64) -> f64 {
    let band = sj_project(f, k).expect("band in range").field;
    f64::powf(2.0, k as f64 * sigma) * band_lp_x(&band, k, CubeSum::Two)
}

/// `2^{k sigma} ||S_k f||_{l^2_k Y_k}` with the `Y_k` surrogate.
pub fn y_band(f: &SampledField, k: usize, sigma: f64) -> f64 {
    let band = sj_project(f, k).expect("band in range").field;
    f64::powf(2.0, k as f64 * sigma) * band_lp_y(&band, k, CubeSum::Two)
}

/// A measured norm with its envelope.
#[derive(Clone, Debug)]
pub struct Measured {
    pub norm: NormReport,
    pub envelope: FrequencyEnvelope,
}

impl Measured {
    pub fn new(norm: NormReport, delta: f64) -> Self {
        let bands = norm.per_band.clone().unwrap_or_default();
        let envelope = envelope_from_bands(&bands, norm.value, delta);
        Self { norm, envelope }
    }

    pub fn value(&self) -> f64 {
        self.norm.value
    }

    pub fn at(&self, k: usize) -> f64 {
        self.envelope.entries.get(k).copied().unwrap_or(0.0)
    }
}

/// Envelope parameter for regularity `s`: [`default_delta`], kept positive.
pub fn envelope_delta(s: f64, d: usize) -> f64 {
    default_delta(s, d).max(1.0 / 64.0)
}
