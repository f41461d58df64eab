use super::{Grid, SampledField, C64};
use crate::error::{QslError, Result};

/// Fourier coefficients of one time slice, normalized so that
/// `||u||_{L2}^2 = L^d * sum |c|^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralSnapshot {
    pub grid: Grid,
    pub coefficients: Vec<C64>,
}

impl SpectralSnapshot {
    /// Weighted coefficient norm, equal to the spatial L2 norm (Parseval).
    pub fn l2(&self) -> f64 {
        (self.coefficients.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.volume()).sqrt()
    }

    /// Coefficient at integer frequency `m` (one-dimensional grids).
    pub fn at_mode(&self, m: i64) -> Option<C64> {
        let n = self.grid.n() as i64;
        if self.grid.dim() != 1 || m < -n / 2 || m >= n / 2 {
            return None;
        }
        Some(self.coefficients[m.rem_euclid(n) as usize])
    }

    /// Inverse transform back to a spatial slice.
    pub fn to_spatial(&self) -> Vec<C64> {
        let mut data = self.coefficients.clone();
        self.grid.inverse(&mut data);
        data
    }
}

impl SampledField {
    pub fn to_spectral(&self, t: usize) -> Result<SpectralSnapshot> {
        if t >= self.grid().nt() {
            return Err(QslError::OutOfRange {
                what: "time",
                index: t,
                limit: self.grid().nt(),
            });
        }
        let mut coefficients = self.slice(t).to_vec();
        self.grid().forward(&mut coefficients);
        Ok(SpectralSnapshot {
            grid: self.grid().clone(),
            coefficients,
        })
    }

    /// Overwrite time sample `t` with the inverse transform of `snap`.
    pub fn set_from_spectral(&mut self, t: usize, snap: &SpectralSnapshot) -> Result<()> {
        if t >= self.grid().nt() {
            return Err(QslError::OutOfRange {
                what: "time",
                index: t,
                limit: self.grid().nt(),
            });
        }
        if snap.grid != *self.grid() {
            return Err(QslError::Shape("snapshot grid differs from field grid".into()));
        }
        let data = snap.to_spatial();
        self.slice_mut(t).copy_from_slice(&data);
        Ok(())
    }
}

/// Integer frequency lattice `{-N/2, ..., N/2 - 1}` in ascending order.
pub fn frequency_lattice(n: usize) -> Vec<i64> {
    let h = (n / 2) as i64;
    (-h..h).collect()
}
