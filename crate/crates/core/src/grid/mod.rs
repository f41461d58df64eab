//! Periodic box discretization, spectral transforms and quadrature.
//!
//! Spatial points are `x_i = i L / N` per axis, `i = 0..N`; time samples are
//! uniform on `[0, 1]`, `t_n = n / (Nt - 1)`. Field values are stored
//! row-major as `(t, x_0, x_1)` with the last axis fastest.

mod io;
mod spectral;

pub use io::{read_field, write_field, FIELD_MAGIC, FIELD_VERSION};
pub use spectral::{frequency_lattice, SpectralSnapshot};

use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{QslError, Result};
use crate::par;

pub type C64 = Complex<f64>;

pub(crate) struct Caches {
    pub abs_xi: OnceLock<Vec<f64>>,
    pub bands: OnceLock<Vec<Vec<f64>>>,
    pub cubes: OnceLock<Vec<crate::cubes::ScaleCubes>>,
}

struct GridInner {
    dim: usize,
    length: f64,
    n: usize,
    nt: usize,
    j_max: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    caches: Caches,
}

/// A `d`-dimensional periodic box of side `L` with `N` points per axis and
/// `Nt` uniform time samples on `[0, 1]`. Cheap to clone.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("d", &self.dim())
            .field("L", &self.length())
            .field("N", &self.n())
            .field("Nt", &self.nt())
            .field("j_max", &self.j_max())
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.dim() == other.dim()
            && self.length() == other.length()
            && self.n() == other.n()
            && self.nt() == other.nt()
    }
}

/// `floor(log2(pi N / L)) - 1`, the highest band index the lattice resolves.
pub fn max_band(n: usize, length: f64) -> i64 {
    (PI * n as f64 / length).log2().floor() as i64 - 1
}

impl Grid {
    /// Build a grid, rejecting non-power-of-two `N`, `N < 8`, `Nt < 2`
    /// and lattices too coarse to carry three dyadic bands.
    pub fn new(dim: usize, length: f64, n: usize, nt: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(QslError::InvalidGrid(format!("dimension {dim} not in {{1, 2}}")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(QslError::InvalidGrid(format!("box length {length} must be positive")));
        }
        if !n.is_power_of_two() || n < 8 {
            return Err(QslError::InvalidGrid(format!(
                "N = {n} must be a power of two and at least 8"
            )));
        }
        if nt < 2 {
            return Err(QslError::InvalidGrid(format!("Nt = {nt} must be at least 2")));
        }
        let j_max = max_band(n, length);
        if j_max < 2 {
            return Err(QslError::GridTooCoarse { j_max });
        }
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        Ok(Self {
            inner: Arc::new(GridInner {
                dim,
                length,
                n,
                nt,
                j_max: j_max as usize,
                fwd,
                inv,
                caches: Caches {
                    abs_xi: OnceLock::new(),
                    bands: OnceLock::new(),
                    cubes: OnceLock::new(),
                },
            }),
        })
    }

    /// Same box and lattice with a different number of time samples.
    pub fn with_nt(&self, nt: usize) -> Result<Self> {
        Self::new(self.dim(), self.length(), self.n(), nt)
    }

    /// Same box and time sampling with a different lattice size.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(self.dim(), self.length(), n, self.nt())
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }
    pub fn length(&self) -> f64 {
        self.inner.length
    }
    pub fn n(&self) -> usize {
        self.inner.n
    }
    pub fn nt(&self) -> usize {
        self.inner.nt
    }
    pub fn j_max(&self) -> usize {
        self.inner.j_max
    }
    pub(crate) fn caches(&self) -> &Caches {
        &self.inner.caches
    }

    /// Number of spatial points, `N^d`.
    pub fn spatial_len(&self) -> usize {
        self.n().pow(self.dim() as u32)
    }

    pub fn dx(&self) -> f64 {
        self.length() / self.n() as f64
    }

    /// Quadrature weight of one lattice cell, `dx^d`.
    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.dim() as i32)
    }

    pub fn volume(&self) -> f64 {
        self.length().powi(self.dim() as i32)
    }

    pub fn dt(&self) -> f64 {
        1.0 / (self.nt() - 1) as f64
    }

    pub fn time(&self, index: usize) -> f64 {
        index as f64 * self.dt()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.nt()).map(|i| self.time(i)).collect()
    }

    /// Lattice spacing of the frequency lattice, `2 pi / L`.
    pub fn dxi(&self) -> f64 {
        2.0 * PI / self.length()
    }

    /// Signed integer frequency of FFT slot `k` along one axis.
    pub fn mode(&self, k: usize) -> i64 {
        let n = self.n() as i64;
        let k = k as i64;
        if k < n / 2 {
            k
        } else {
            k - n
        }
    }

    /// Integer frequency lattice along one axis in FFT order.
    pub fn modes(&self) -> Vec<i64> {
        (0..self.n()).map(|k| self.mode(k)).collect()
    }

    /// Per-axis FFT slots of flat spatial/spectral index `p`.
    pub fn axis_indices(&self, p: usize) -> [usize; 2] {
        let n = self.n();
        if self.dim() == 1 {
            [p, 0]
        } else {
            [p / n, p % n]
        }
    }

    /// Frequency vector at flat spectral index `p` (unused axes are 0).
    pub fn xi(&self, p: usize) -> [f64; 2] {
        let [a, b] = self.axis_indices(p);
        let s = self.dxi();
        if self.dim() == 1 {
            [s * self.mode(a) as f64, 0.0]
        } else {
            [s * self.mode(a) as f64, s * self.mode(b) as f64]
        }
    }

    /// `|xi|` over the lattice in FFT order, cached.
    pub fn abs_xi(&self) -> &[f64] {
        self.caches().abs_xi.get_or_init(|| {
            (0..self.spatial_len())
                .map(|p| {
                    let [a, b] = self.xi(p);
                    (a * a + b * b).sqrt()
                })
                .collect()
        })
    }

    /// True when any axis of spectral slot `p` sits on the Nyquist row.
    pub fn is_nyquist(&self, p: usize) -> bool {
        let [a, b] = self.axis_indices(p);
        let half = self.n() / 2;
        a == half || (self.dim() == 2 && b == half)
    }

    /// 2/3-rule retained modes: every axis satisfies `|m| <= N / 3`.
    pub fn is_dealiased(&self, p: usize) -> bool {
        let [a, b] = self.axis_indices(p);
        let cut = (self.n() / 3) as i64;
        let ok = |k: usize| self.mode(k).abs() <= cut;
        ok(a) && (self.dim() == 1 || ok(b))
    }

    /// Physical coordinates of flat spatial index `p`.
    pub fn point(&self, p: usize) -> [f64; 2] {
        let [a, b] = self.axis_indices(p);
        let h = self.dx();
        if self.dim() == 1 {
            [a as f64 * h, 0.0]
        } else {
            [a as f64 * h, b as f64 * h]
        }
    }

    fn fft_axis(&self, data: &mut [C64], inverse: bool) {
        let plan = if inverse { &self.inner.inv } else { &self.inner.fwd };
        let n = self.n();
        if self.dim() == 1 {
            plan.process(data);
            return;
        }
        // rows (last axis), then columns via a gathered buffer
        for row in data.chunks_mut(n) {
            plan.process(row);
        }
        let mut col = vec![C64::new(0.0, 0.0); n];
        for c in 0..n {
            for r in 0..n {
                col[r] = data[r * n + c];
            }
            plan.process(&mut col);
            for r in 0..n {
                data[r * n + c] = col[r];
            }
        }
    }

    /// In-place forward transform of one spatial slice; coefficients are
    /// normalized by `1 / N^d`.
    pub fn forward(&self, data: &mut [C64]) {
        self.fft_axis(data, false);
        let scale = 1.0 / self.spatial_len() as f64;
        data.iter_mut().for_each(|z| *z *= scale);
    }

    /// In-place inverse of [`Grid::forward`].
    pub fn inverse(&self, data: &mut [C64]) {
        self.fft_axis(data, true);
    }

    /// Multiply the spectrum of a spatial slice by `mult` (FFT order).
    pub fn apply_multiplier(&self, data: &mut [C64], mult: impl Fn(usize) -> C64) {
        self.forward(data);
        data.iter_mut()
            .enumerate()
            .for_each(|(p, z)| *z *= mult(p));
        self.inverse(data);
    }

    /// Spectral derivative along `axis` (0-based). The Nyquist row is dropped.
    pub fn derivative(&self, data: &[C64], axis: usize) -> Vec<C64> {
        let mut out = data.to_vec();
        self.apply_multiplier(&mut out, |p| {
            if self.is_nyquist(p) {
                C64::new(0.0, 0.0)
            } else {
                C64::new(0.0, self.xi(p)[axis])
            }
        });
        out
    }

    /// Zero the Nyquist row of a spectrum in place.
    pub fn zero_nyquist_spectrum(&self, spec: &mut [C64]) {
        for (p, z) in spec.iter_mut().enumerate() {
            if self.is_nyquist(p) {
                *z = C64::new(0.0, 0.0);
            }
        }
    }

    /// Apply the 2/3 rule (which also removes the Nyquist row) to a slice.
    pub fn dealias(&self, data: &mut [C64]) {
        self.apply_multiplier(data, |p| {
            if self.is_dealiased(p) {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
    }

    /// Spatial L2 norm of one slice (exact lattice sum).
    pub fn l2(&self, data: &[C64]) -> f64 {
        (data.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.cell_volume()).sqrt()
    }

    /// Spatial inner product `sum a conj(b) dx^d`.
    pub fn inner(&self, a: &[C64], b: &[C64]) -> C64 {
        a.iter().zip(b).map(|(x, y)| x * y.conj()).sum::<C64>() * self.cell_volume()
    }

    /// Inhomogeneous Sobolev norm with weights `(1 + |xi|^2)^(s/2)`.
    pub fn sobolev(&self, data: &[C64], s: f64) -> f64 {
        let mut spec = data.to_vec();
        self.forward(&mut spec);
        let xi = self.abs_xi();
        let sum: f64 = spec
            .iter()
            .zip(xi)
            .map(|(z, k)| (1.0 + k * k).powf(s) * z.norm_sqr())
            .sum();
        (sum * self.volume()).sqrt()
    }

    /// Trapezoid weights for time samples `lo..=hi`.
    pub fn trapezoid_weights(&self, lo: usize, hi: usize) -> Vec<f64> {
        let h = self.dt();
        (lo..=hi)
            .map(|i| if lo == hi { 0.0 } else if i == lo || i == hi { h / 2.0 } else { h })
            .collect()
    }
}

/// Complex space-time field sampled on a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct SampledField {
    grid: Grid,
    values: Vec<C64>,
}

impl SampledField {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![C64::new(0.0, 0.0); grid.nt() * grid.spatial_len()],
        }
    }

    pub fn from_values(grid: &Grid, values: Vec<C64>) -> Result<Self> {
        let want = grid.nt() * grid.spatial_len();
        if values.len() != want {
            return Err(QslError::Shape(format!(
                "expected {want} values, got {}",
                values.len()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    /// Sample `f(t, x)` on the grid.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64, [f64; 2]) -> C64 + Sync + Send) -> Self {
        let s = grid.spatial_len();
        let mut values = vec![C64::new(0.0, 0.0); grid.nt() * s];
        par::for_each_chunk_mut(&mut values, s, |n, slice| {
            let t = grid.time(n);
            for (p, z) in slice.iter_mut().enumerate() {
                *z = f(t, grid.point(p));
            }
        });
        Self {
            grid: grid.clone(),
            values,
        }
    }

    /// Field equal to `slice` at every time sample.
    pub fn constant_in_time(grid: &Grid, slice: &[C64]) -> Result<Self> {
        if slice.len() != grid.spatial_len() {
            return Err(QslError::Shape("spatial slice length".into()));
        }
        let mut values = Vec::with_capacity(grid.nt() * slice.len());
        for _ in 0..grid.nt() {
            values.extend_from_slice(slice);
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn values(&self) -> &[C64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn slice(&self, t: usize) -> &[C64] {
        let s = self.grid.spatial_len();
        &self.values[t * s..(t + 1) * s]
    }

    pub fn slice_mut(&mut self, t: usize) -> &mut [C64] {
        let s = self.grid.spatial_len();
        &mut self.values[t * s..(t + 1) * s]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map_values(|z| z * c)
    }

    pub fn map_values(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    /// Apply `f` to every time slice in parallel.
    pub fn map_slices(&self, f: impl Fn(usize, &mut [C64]) + Sync + Send) -> Self {
        let mut out = self.clone();
        let s = self.grid.spatial_len();
        par::for_each_chunk_mut(&mut out.values, s, f);
        out
    }

    /// Apply a Fourier multiplier to every time slice.
    pub fn apply_multiplier(&self, mult: impl Fn(usize) -> C64 + Sync + Send) -> Self {
        let g = self.grid.clone();
        self.map_slices(move |_, slice| g.apply_multiplier(slice, &mult))
    }

    /// Apply a real Fourier multiplier table (FFT order) to every slice.
    pub fn apply_table(&self, table: &[f64]) -> Self {
        self.apply_multiplier(|p| C64::new(table[p], 0.0))
    }

    pub fn derivative(&self, axis: usize) -> Self {
        let g = self.grid.clone();
        self.map_slices(move |_, slice| {
            let d = g.derivative(slice, axis);
            slice.copy_from_slice(&d);
        })
    }

    /// Dealiased pointwise product: 2/3-rule inputs, 2/3-rule output.
    pub fn product(&self, other: &Self) -> Self {
        let a = self.dealiased();
        let b = other.dealiased();
        a.zip_with(&b, |x, y| x * y).dealiased()
    }

    pub fn dealiased(&self) -> Self {
        let g = self.grid.clone();
        self.map_slices(move |_, slice| g.dealias(slice))
    }

    /// Remove the Nyquist row from every slice.
    pub fn zero_nyquist(&self) -> Self {
        let g = self.grid.clone();
        self.map_slices(move |_, slice| {
            g.forward(slice);
            g.zero_nyquist_spectrum(slice);
            g.inverse(slice);
        })
    }

    /// Pointwise conjugate-aware map of a nonlinear function then dealias.
    pub fn nonlinear(&self, f: impl Fn(C64) -> C64) -> Self {
        self.dealiased().map_values(f).dealiased()
    }

    /// Spatial L2 norm at one time sample.
    pub fn l2_at(&self, t: usize) -> f64 {
        self.grid.l2(self.slice(t))
    }

    /// Space-time inner product with trapezoid in time.
    pub fn spacetime_inner(&self, other: &Self) -> C64 {
        let w = self.grid.trapezoid_weights(0, self.grid.nt() - 1);
        (0..self.grid.nt())
            .map(|t| self.grid.inner(self.slice(t), other.slice(t)) * w[t])
            .sum()
    }
}

/// `||u||_{L2 L2(window x region)}`: trapezoid in `t` over samples within
/// `window`, exact lattice sum over the masked points.
pub fn spacetime_l2(field: &SampledField, window: (f64, f64), mask: &[bool]) -> Result<f64> {
    let g = field.grid();
    if mask.len() != g.spatial_len() {
        return Err(QslError::Shape(format!(
            "mask has {} entries, grid has {}",
            mask.len(),
            g.spatial_len()
        )));
    }
    let eps = 1e-12;
    let inside: Vec<usize> = (0..g.nt())
        .filter(|&i| g.time(i) >= window.0 - eps && g.time(i) <= window.1 + eps)
        .collect();
    let (Some(&lo), Some(&hi)) = (inside.first(), inside.last()) else {
        return Ok(0.0);
    };
    let w = g.trapezoid_weights(lo, hi);
    let mut acc = 0.0;
    for (k, t) in (lo..=hi).enumerate() {
        let s: f64 = field
            .slice(t)
            .iter()
            .zip(mask)
            .filter(|(_, &m)| m)
            .map(|(z, _)| z.norm_sqr())
            .sum();
        acc += w[k] * s;
    }
    Ok((acc * g.cell_volume()).sqrt())
}

/// `||u||_{L2 L2([0,1] x box)}`.
pub fn l2l2(field: &SampledField) -> f64 {
    let g = field.grid();
    let w = g.trapezoid_weights(0, g.nt() - 1);
    let acc: f64 = (0..g.nt())
        .map(|t| w[t] * field.slice(t).iter().map(|z| z.norm_sqr()).sum::<f64>())
        .sum();
    (acc * g.cell_volume()).sqrt()
}

/// `sup_t ||u(t)||_{L2}`.
pub fn linf_l2(field: &SampledField) -> f64 {
    (0..field.grid().nt())
        .map(|t| field.l2_at(t))
        .fold(0.0, f64::max)
}

/// `int_0^1 ||u(t)||_{L2} dt` by the trapezoid rule.
pub fn l1_l2(field: &SampledField) -> f64 {
    let g = field.grid();
    let w = g.trapezoid_weights(0, g.nt() - 1);
    (0..g.nt()).map(|t| w[t] * field.l2_at(t)).sum()
}

/// `sup_{t, x} |u|`.
pub fn linf(field: &SampledField) -> f64 {
    field.values().iter().map(|z| z.norm()).fold(0.0, f64::max)
}
