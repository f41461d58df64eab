//! Evaluation of sampled fields between time samples.

use crate::grid::{SampledField, C64};

const STENCIL: usize = 6;

/// Lagrange weights on the `STENCIL` samples nearest to `t`.
fn weights(dt: f64, nt: usize, t: f64) -> (usize, Vec<f64>) {
    let width = STENCIL.min(nt);
    let centre = (t / dt).floor() as isize - (width as isize / 2 - 1);
    let start = centre.clamp(0, (nt - width) as isize) as usize;
    let nodes: Vec<f64> = (start..start + width).map(|i| i as f64 * dt).collect();
    let w = (0..width)
        .map(|i| {
            (0..width)
                .filter(|&m| m != i)
                .map(|m| (t - nodes[m]) / (nodes[i] - nodes[m]))
                .product()
        })
        .collect();
    (start, w)
}

/// A field known at the time samples, evaluable at any `t` in `[0, 1]`.
/// In interaction mode the samples are spectra and the interpolation is
/// done on `e^{i omega t} f_hat`, which removes the free oscillation.
pub(crate) struct Series {
    dt: f64,
    data: Vec<Vec<C64>>,
    omega: Option<Vec<f64>>,
}

impl Series {
    pub fn plain(field: &SampledField) -> Self {
        let g = field.grid();
        Self {
            dt: g.dt(),
            data: (0..g.nt()).map(|t| field.slice(t).to_vec()).collect(),
            omega: None,
        }
    }

    /// `spectra[n]` is the spectrum at sample `n`.
    pub fn interaction(spectra: Vec<Vec<C64>>, dt: f64, omega: Vec<f64>) -> Self {
        let data = spectra
            .into_iter()
            .enumerate()
            .map(|(n, s)| {
                let t = n as f64 * dt;
                s.iter()
                    .zip(&omega)
                    .map(|(z, w)| z * C64::from_polar(1.0, w * t))
                    .collect()
            })
            .collect();
        Self {
            dt,
            data,
            omega: Some(omega),
        }
    }

    pub fn at(&self, t: f64) -> Vec<C64> {
        let nt = self.data.len();
        if nt == 1 {
            return self.rotate(self.data[0].clone(), t);
        }
        let (start, w) = weights(self.dt, nt, t);
        let mut out = vec![C64::new(0.0, 0.0); self.data[0].len()];
        for (i, wi) in w.iter().enumerate() {
            out.iter_mut().zip(&self.data[start + i]).for_each(|(o, z)| *o += z * wi);
        }
        self.rotate(out, t)
    }

    fn rotate(&self, mut v: Vec<C64>, t: f64) -> Vec<C64> {
        if let Some(omega) = &self.omega {
            v.iter_mut().zip(omega).for_each(|(z, w)| *z *= C64::from_polar(1.0, -w * t));
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_reproduce_quintics() {
        let (dt, nt) = (0.1, 11);
        for &t in &[0.0, 0.03, 0.47, 0.95, 1.0] {
            let (start, w) = weights(dt, nt, t);
            let q: f64 = w
                .iter()
                .enumerate()
                .map(|(i, wi)| {
                    let x = (start + i) as f64 * dt;
                    wi * (x.powi(5) - 2.0 * x * x + 1.0)
                })
                .sum();
            assert!((q - (t.powi(5) - 2.0 * t * t + 1.0)).abs() < 1e-12);
        }
    }
}
