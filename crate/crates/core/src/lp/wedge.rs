use std::f64::consts::PI;

use super::{tilde_table, DyadicBand};
use crate::error::{QslError, Result};
use crate::grid::{Grid, SampledField};

/// Angular partition parameters. In two dimensions each axis wedge has
/// half-angle `pi/4 + overlap` with a squared-cosine ramp across the overlap.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WedgeConfig {
    pub overlap: f64,
}

impl Default for WedgeConfig {
    fn default() -> Self {
        Self { overlap: PI / 16.0 }
    }
}

/// Number of wedges: the two half-lines in 1-D, one per axis in 2-D.
pub fn wedge_count(grid: &Grid) -> usize {
    2.max(grid.dim())
}

/// `theta_k(xi / |xi|)` in FFT order; `axis` is 1-based.
pub fn wedge_multiplier(grid: &Grid, axis: usize, cfg: WedgeConfig) -> Result<Vec<f64>> {
    let count = wedge_count(grid);
    if axis == 0 || axis > count {
        return Err(QslError::OutOfRange {
            what: "wedge axis",
            index: axis,
            limit: count,
        });
    }
    let lo = PI / 4.0 - cfg.overlap;
    let width = 2.0 * cfg.overlap;
    let table = (0..grid.spatial_len())
        .map(|p| {
            let [a, b] = grid.xi(p);
            let first = if grid.dim() == 1 {
                if a > 0.0 {
                    1.0
                } else if a < 0.0 {
                    0.0
                } else {
                    0.5
                }
            } else {
                let beta = b.abs().atan2(a.abs());
                if width <= 0.0 {
                    if beta <= PI / 4.0 { 1.0 } else { 0.0 }
                } else {
                    let s = ((beta - lo) / width).clamp(0.0, 1.0);
                    (0.5 * PI * s).cos().powi(2)
                }
            };
            if axis == 1 {
                first
            } else {
                1.0 - first
            }
        })
        .collect();
    Ok(table)
}

/// `Theta_{j,k} u = theta_k(xi/|xi|) S~_j u`.
pub fn wedge_project(band: &DyadicBand, axis: usize, cfg: WedgeConfig) -> Result<SampledField> {
    let g = band.field.grid();
    let theta = wedge_multiplier(g, axis, cfg)?;
    let tilde = tilde_table(g, band.j);
    let table: Vec<f64> = theta.iter().zip(&tilde).map(|(a, b)| a * b).collect();
    Ok(band.field.apply_table(&table))
}
