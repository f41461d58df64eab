//! Self-adjoint multiplier `M = (a d + d a) / (i 2^j)` along one axis.

use serde::{Deserialize, Serialize};

use crate::grid::{Grid, C64};

/// `a` is the periodic primitive of
/// `a' = 2^{-l} [psi^2(2^{-l}(x - c)) - psi^2(2^{-l}(x - c - L/2))]`
/// with `psi(s) = exp(-s^2 / 2)`: increasing across a window of width `~2^l`
/// around `c` and bounded by a constant independent of `l` and `j`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Multiplier {
    pub j: usize,
    /// 0-based axis of both the weight and the derivative.
    pub axis: usize,
    pub l: usize,
    pub centre: f64,
    /// Constant added to `a`.
    #[serde(default)]
    pub offset: f64,
}

impl Multiplier {
    pub fn new(j: usize, axis: usize, l: usize, centre: f64) -> Self {
        Self {
            j,
            axis,
            l,
            centre,
            offset: 0.0,
        }
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    fn scale(&self) -> f64 {
        2f64.powi(self.l as i32)
    }

    fn coordinate(&self, grid: &Grid, p: usize) -> f64 {
        grid.point(p)[self.axis]
    }

    /// `psi^2(2^{-l}(x - c))`, periodized.
    pub fn bump(&self, grid: &Grid) -> Vec<f64> {
        self.bump_at(grid, self.centre)
    }

    fn bump_at(&self, grid: &Grid, c: f64) -> Vec<f64> {
        let (len, s) = (grid.length(), self.scale());
        (0..grid.spatial_len())
            .map(|p| {
                let x = self.coordinate(grid, p);
                (-6..=6)
                    .map(|k| {
                        let y = (x - c - k as f64 * len) / s;
                        (-y * y).exp()
                    })
                    .sum()
            })
            .collect()
    }

    /// `a'` on the lattice.
    pub fn weight_derivative(&self, grid: &Grid) -> Vec<f64> {
        let s = self.scale();
        let plus = self.bump(grid);
        let minus = self.bump_at(grid, self.centre + grid.length() / 2.0);
        plus.iter().zip(&minus).map(|(a, b)| (a - b) / s).collect()
    }

    /// `a`, the periodic primitive of `a'` with mean `offset`.
    pub fn weight(&self, grid: &Grid) -> Vec<f64> {
        let mut a: Vec<C64> = self
            .weight_derivative(grid)
            .iter()
            .map(|x| C64::new(*x, 0.0))
            .collect();
        grid.forward(&mut a);
        for (p, z) in a.iter_mut().enumerate() {
            let xi = grid.xi(p)[self.axis];
            *z = if xi == 0.0 || grid.is_nyquist(p) {
                C64::new(0.0, 0.0)
            } else {
                *z / C64::new(0.0, xi)
            };
        }
        grid.inverse(&mut a);
        a.iter().map(|z| z.re + self.offset).collect()
    }

    /// `T u = a d u + d(a u)`, so that `M = T / (i 2^j)`.
    pub fn apply_t(&self, grid: &Grid, slice: &[C64]) -> Vec<C64> {
        let a = self.weight(grid);
        apply_t_with(grid, &a, self.axis, slice)
    }

    pub fn apply(&self, grid: &Grid, slice: &[C64]) -> Vec<C64> {
        let c = C64::new(0.0, -1.0 / 2f64.powi(self.j as i32));
        self.apply_t(grid, slice).into_iter().map(|z| z * c).collect()
    }
}

pub(crate) fn apply_t_with(grid: &Grid, a: &[f64], axis: usize, slice: &[C64]) -> Vec<C64> {
    let du = grid.derivative(slice, axis);
    let au: Vec<C64> = slice.iter().zip(a).map(|(z, w)| z * w).collect();
    let dau = grid.derivative(&au, axis);
    du.iter()
        .zip(a)
        .zip(&dau)
        .map(|((d, w), e)| d * w + e)
        .collect()
}
