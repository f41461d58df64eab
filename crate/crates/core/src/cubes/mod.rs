//! Cube partitions `Q_l` of the box and the local smoothing spaces built on
//! them: `X`, the `Y` surrogate, `X_j`, `Y_j` and the cube-summed Sobolev
//! scales `l^p X^s`, `l^p Y^s`.
//!
//! Cubes are axis aligned and anchored at the origin; the last cube along an
//! axis is truncated by the box. Scales run over `0..=l_box` with
//! `l_box = ceil(log2 L)`, at which point one cube covers the box.

mod norms;

pub use norms::{
    band_lp_x, band_lp_y, cube_l2_table, lp_xs_norm, lp_ys_upper, x_norm, x_value, xj_norm, xs_norm, y_upper,
    y_value, yj_upper, ys_upper, CubeRef, CubeSum, NormReport,
};

use crate::grid::{Grid, C64};

/// Largest cube scale that still subdivides the box.
pub fn l_box(grid: &Grid) -> usize {
    grid.length().log2().ceil().max(0.0) as usize
}

/// Spatial standard deviation of the Gaussian used to smooth the cube
/// indicators at side length `side`.
pub fn smoothing_width(side: f64) -> f64 {
    (0.5 * side).max(1.1)
}

/// Sharp and smooth cube data for one scale, cached on the grid.
#[derive(Clone, Debug)]
pub struct ScaleCubes {
    pub scale: usize,
    pub side: f64,
    pub per_axis: usize,
    /// Flat cube index of every lattice point.
    pub cube_of_point: Vec<u32>,
    /// Smooth frequency-localized cutoffs `chi_Q`, one per cube.
    pub cutoffs: Vec<Vec<f64>>,
}

fn build_scale(grid: &Grid, scale: usize, side: f64) -> ScaleCubes {
    let length = grid.length();
    let per_axis = if side >= length {
        1
    } else {
        (length / side).ceil() as usize
    };
    let count = per_axis.pow(grid.dim() as u32);
    let axis_cube = |x: f64| ((x / side).floor() as usize).min(per_axis - 1);
    let cube_of_point: Vec<u32> = (0..grid.spatial_len())
        .map(|p| {
            let [a, b] = grid.point(p);
            let q = if grid.dim() == 1 {
                axis_cube(a)
            } else {
                axis_cube(a) * per_axis + axis_cube(b)
            };
            q as u32
        })
        .collect();
    let cutoffs = if count == 1 {
        vec![vec![1.0; grid.spatial_len()]]
    } else {
        let sigma = smoothing_width(side);
        let xi = grid.abs_xi();
        crate::par::map_range(count, |q| {
            let mut data: Vec<C64> = cube_of_point
                .iter()
                .map(|&c| C64::new(if c as usize == q { 1.0 } else { 0.0 }, 0.0))
                .collect();
            grid.apply_multiplier(&mut data, |p| {
                C64::new((-0.5 * sigma * sigma * xi[p] * xi[p]).exp(), 0.0)
            });
            data.iter().map(|z| z.re.max(0.0)).collect()
        })
    };
    ScaleCubes {
        scale,
        side,
        per_axis,
        cube_of_point,
        cutoffs,
    }
}

/// Cube data for every scale `0..=max(l_box, j_max)`.
pub fn scales(grid: &Grid) -> &[ScaleCubes] {
    grid.caches().cubes.get_or_init(|| {
        let top = l_box(grid).max(grid.j_max());
        (0..=top)
            .map(|l| build_scale(grid, l, f64::powi(2.0, l as i32)))
            .collect()
    })
}

/// The partition `Q_l` at one scale (scales beyond the table reuse the
/// whole-box cube).
#[derive(Clone, Debug)]
pub struct CubeSystem<'g> {
    pub grid: &'g Grid,
    pub scale: usize,
    cubes: &'g ScaleCubes,
}

impl<'g> CubeSystem<'g> {
    pub fn new(grid: &'g Grid, scale: usize) -> Self {
        let all = scales(grid);
        let cubes = &all[scale.min(all.len() - 1)];
        Self { grid, scale, cubes }
    }

    pub fn len(&self) -> usize {
        self.cubes.cutoffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn side(&self) -> f64 {
        self.cubes.side
    }

    pub fn cutoff(&self, q: usize) -> &[f64] {
        &self.cubes.cutoffs[q]
    }

    pub fn mask(&self, q: usize) -> Vec<bool> {
        self.cubes
            .cube_of_point
            .iter()
            .map(|&c| c as usize == q)
            .collect()
    }

    pub fn cube_of_point(&self) -> &[u32] {
        &self.cubes.cube_of_point
    }

    /// `max_x |sum_Q chi_Q(x) - 1|`.
    pub fn partition_error(&self) -> f64 {
        (0..self.grid.spatial_len())
            .map(|p| (self.cubes.cutoffs.iter().map(|c| c[p]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Fraction of spectral mass of `chi_Q` above `|xi| = cut`.
    pub fn high_frequency_fraction(&self, q: usize, cut: f64) -> f64 {
        let mut data: Vec<C64> = self.cutoff(q).iter().map(|&v| C64::new(v, 0.0)).collect();
        self.grid.forward(&mut data);
        let xi = self.grid.abs_xi();
        let total: f64 = data.iter().map(|z| z.norm_sqr()).sum();
        let high: f64 = data
            .iter()
            .zip(xi)
            .filter(|(_, &k)| k > cut)
            .map(|(z, _)| z.norm_sqr())
            .sum();
        high / total
    }
}

#[cfg(test)]
mod tests;
