use serde::Serialize;

use super::band_table;
use crate::cubes::{lp_xs_norm, CubeSum};
use crate::grid::SampledField;

/// The space a frequency envelope is measured against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum EnvelopeNorm {
    /// `H^s` of the `t = 0` slice.
    Sobolev { s: f64 },
    /// `l^2 X^s`, with band quantities `2^{ks} ||S_k u||_{l^2_k X_k}`.
    L2X { s: f64 },
}

impl EnvelopeNorm {
    /// Per-band quantities `||S_k u||_U` and the total `||u||_U`.
    pub fn measure(&self, u: &SampledField) -> (Vec<f64>, f64) {
        let g = u.grid();
        match *self {
            EnvelopeNorm::Sobolev { s } => {
                let data = u.slice(0);
                let bands = (0..=g.j_max())
                    .map(|j| {
                        let mut b = data.to_vec();
                        let t = band_table(g, j).unwrap();
                        g.apply_multiplier(&mut b, |p| t[p].into());
                        g.sobolev(&b, s)
                    })
                    .collect();
                (bands, g.sobolev(data, s))
            }
            EnvelopeNorm::L2X { s } => {
                let report = lp_xs_norm(u, CubeSum::Two, s);
                (report.per_band.clone().unwrap_or_default(), report.value)
            }
        }
    }
}

/// `min(1/8, (s - d/2) / 4)`.
pub fn default_delta(s: f64, d: usize) -> f64 {
    (1.0 / 8.0f64).min((s - d as f64 / 2.0) / 4.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrequencyEnvelope {
    pub entries: Vec<f64>,
    pub delta: f64,
}

/// `a_j = 2^{-delta j} + total^{-1} sup_k 2^{-delta |j-k|} band_k`; with a
/// zero total only the floor term remains.
pub fn envelope_from_bands(bands: &[f64], total: f64, delta: f64) -> FrequencyEnvelope {
    let entries = (0..bands.len())
        .map(|j| {
            let floor = f64::powf(2.0, -delta * j as f64);
            if total <= 0.0 {
                return floor;
            }
            let sup = bands
                .iter()
                .enumerate()
                .map(|(k, b)| f64::powf(2.0, -delta * (j as f64 - k as f64).abs()) * b)
                .fold(0.0, f64::max);
            floor + sup / total
        })
        .collect();
    FrequencyEnvelope { entries, delta }
}

pub fn envelope_of(u: &SampledField, norm: EnvelopeNorm, delta: f64) -> FrequencyEnvelope {
    let (bands, total) = norm.measure(u);
    envelope_from_bands(&bands, total, delta)
}

impl FrequencyEnvelope {
    /// Largest violation of `a_j <= 2^{delta |j-k|} a_k` (0 when it holds).
    pub fn slow_variation_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, &a) in self.entries.iter().enumerate() {
            for (k, &b) in self.entries.iter().enumerate() {
                let bound = f64::powf(2.0, self.delta * (j as f64 - k as f64).abs()) * b;
                worst = worst.max((a - bound) / bound);
            }
        }
        worst
    }

    /// Whether `band_j <= a_j total` for all `j` (relative slack `tol`).
    pub fn majorizes(&self, bands: &[f64], total: f64, tol: f64) -> bool {
        bands
            .iter()
            .zip(&self.entries)
            .all(|(b, a)| *b <= a * total * (1.0 + tol))
    }

    /// `l^2` norm of the entries with index above `cut`.
    pub fn tail(&self, cut: usize) -> f64 {
        self.entries
            .iter()
            .skip(cut + 1)
            .map(|a| a * a)
            .sum::<f64>()
            .sqrt()
    }

    /// CSV with columns `j,a_j,delta`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,a_j,delta\n");
        for (j, a) in self.entries.iter().enumerate() {
            out.push_str(&format!("{j},{a:.16e},{:.16e}\n", self.delta));
        }
        out
    }
}
