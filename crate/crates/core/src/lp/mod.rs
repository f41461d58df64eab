//! Littlewood-Paley machinery: dyadic band multipliers, fattened bands,
//! angular wedges, a continuous decomposition and frequency envelopes.

mod continuous;
mod envelope;
mod wedge;

pub use continuous::{
    continuous_band, continuous_density, continuous_low, continuous_low_multiplier,
    continuous_reconstruct, gauss_legendre, CONTINUOUS_WIDTH,
};
pub use envelope::{default_delta, envelope_from_bands, envelope_of, EnvelopeNorm, FrequencyEnvelope};
pub use wedge::{wedge_count, wedge_multiplier, wedge_project, WedgeConfig};

use crate::error::{QslError, Result};
use crate::grid::{Grid, SampledField, C64};

/// `t^3 (10 - 15 t + 6 t^2)` on `[0, 1]`, clamped outside.
pub fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

/// Radial bump family. The low-pass profile equals 1 on `[0, 1]`, 0 on
/// `[2, inf)`; band `j` is the difference of two dilates, so the partition of
/// unity telescopes exactly. The top band absorbs the lattice tail.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BumpProfile;

impl BumpProfile {
    pub fn low_pass(&self, r: f64) -> f64 {
        1.0 - smoothstep(r - 1.0)
    }

    /// Multiplier value of `S_j` at frequency magnitude `r`.
    pub fn band(&self, j: usize, j_max: usize, r: f64) -> f64 {
        if j == 0 {
            self.low_pass(r)
        } else if j < j_max {
            self.low_pass(r / f64::powi(2.0, j as i32)) - self.low_pass(r / f64::powi(2.0, j as i32 - 1))
        } else {
            1.0 - self.low_pass(r / f64::powi(2.0, j as i32 - 1))
        }
    }
}

/// Cached multiplier table of `S_j` in FFT order.
pub fn band_table(grid: &Grid, j: usize) -> Result<&[f64]> {
    if j > grid.j_max() {
        return Err(QslError::OutOfRange {
            what: "band",
            index: j,
            limit: grid.j_max() + 1,
        });
    }
    let tables = grid.caches().bands.get_or_init(|| {
        let xi = grid.abs_xi();
        (0..=grid.j_max())
            .map(|j| xi.iter().map(|&r| BumpProfile.band(j, grid.j_max(), r)).collect())
            .collect()
    });
    Ok(&tables[j])
}

fn sum_tables(grid: &Grid, bands: impl Iterator<Item = usize>) -> Vec<f64> {
    let mut out = vec![0.0; grid.spatial_len()];
    for j in bands {
        let t = band_table(grid, j).expect("band in range");
        out.iter_mut().zip(t).for_each(|(o, v)| *o += v);
    }
    out
}

/// Multiplier of `S_{<k}`.
pub fn below_table(grid: &Grid, k: i64) -> Vec<f64> {
    let top = k.clamp(0, grid.j_max() as i64 + 1) as usize;
    sum_tables(grid, 0..top)
}

/// Multiplier of `S_{>=k}`.
pub fn geq_table(grid: &Grid, k: i64) -> Vec<f64> {
    let lo = k.clamp(0, grid.j_max() as i64 + 1) as usize;
    sum_tables(grid, lo..grid.j_max() + 1)
}

fn tilde_range(grid: &Grid, j: usize) -> std::ops::RangeInclusive<usize> {
    j.saturating_sub(1)..=(j + 1).min(grid.j_max())
}

/// Multiplier of the fattened band `S~_j = sum_{j-1 <= l <= j+1} S_l`.
pub fn tilde_table(grid: &Grid, j: usize) -> Vec<f64> {
    sum_tables(grid, tilde_range(grid, j))
}

/// Sharp indicator of the support of `S~_j`; an orthogonal projector.
pub fn tilde_support(grid: &Grid, j: usize) -> Vec<bool> {
    tilde_table(grid, j).iter().map(|&v| v > 0.0).collect()
}

/// A field tagged with the band it is localized to.
#[derive(Clone, Debug, PartialEq)]
pub struct DyadicBand {
    pub field: SampledField,
    pub j: usize,
}

impl DyadicBand {
    /// Fraction of spectral mass outside `supp S_j` (max over time slices).
    pub fn leakage(&self) -> f64 {
        spectral_leakage(&self.field, band_table(self.field.grid(), self.j).expect("valid band"))
    }
}

/// Largest per-slice ratio of spectral mass where `table == 0` to total mass.
pub fn spectral_leakage(field: &SampledField, table: &[f64]) -> f64 {
    let g = field.grid();
    (0..g.nt())
        .map(|t| {
            let mut spec = field.slice(t).to_vec();
            g.forward(&mut spec);
            let total: f64 = spec.iter().map(|z| z.norm_sqr()).sum();
            if total == 0.0 {
                return 0.0;
            }
            let out: f64 = spec
                .iter()
                .zip(table)
                .filter(|(_, &m)| m == 0.0)
                .map(|(z, _)| z.norm_sqr())
                .sum();
            (out / total).sqrt()
        })
        .fold(0.0, f64::max)
}

/// `S_j u`.
pub fn sj_project(u: &SampledField, j: usize) -> Result<DyadicBand> {
    let table = band_table(u.grid(), j)?;
    Ok(DyadicBand {
        field: u.apply_table(table),
        j,
    })
}

/// `S_{<k} u`.
pub fn s_below(u: &SampledField, k: i64) -> SampledField {
    u.apply_table(&below_table(u.grid(), k))
}

/// `S_{>=k} u`.
pub fn s_geq(u: &SampledField, k: i64) -> SampledField {
    u.apply_table(&geq_table(u.grid(), k))
}

/// `S~_j u`.
pub fn s_tilde(u: &SampledField, j: usize) -> Result<SampledField> {
    band_table(u.grid(), j)?;
    Ok(u.apply_table(&tilde_table(u.grid(), j)))
}

/// All bands `S_0 u, ..., S_{j_max} u` with one forward transform per slice.
pub fn decompose(u: &SampledField) -> Vec<SampledField> {
    let g = u.grid();
    let bands = g.j_max() + 1;
    let s = g.spatial_len();
    let tables: Vec<&[f64]> = (0..bands).map(|j| band_table(g, j).unwrap()).collect();
    let slices: Vec<Vec<Vec<C64>>> = crate::par::map_range(g.nt(), |t| {
        let mut spec = u.slice(t).to_vec();
        g.forward(&mut spec);
        tables
            .iter()
            .map(|tab| {
                let mut b: Vec<C64> = spec.iter().zip(tab.iter()).map(|(z, &m)| z * m).collect();
                g.inverse(&mut b);
                b
            })
            .collect()
    });
    (0..bands)
        .map(|j| {
            let mut values = Vec::with_capacity(g.nt() * s);
            for sl in &slices {
                values.extend_from_slice(&sl[j]);
            }
            SampledField::from_values(g, values).expect("shape")
        })
        .collect()
}

#[cfg(test)]
mod tests;
