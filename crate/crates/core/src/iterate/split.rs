//! Band-by-band assembly of `d_k g d_k u` with the low-passed metric.

use crate::grid::{SampledField, C64};
use crate::lp::{s_below, sj_project};

/// `S_j d g d u = main + commutator + high` for one band, where
/// `main = d g_{<j-4} d S_j u`, `commutator = [S_j, d g_{<j-4} d] u` and
/// `high = S_j d (g - g_{<j-4}) d u`.
#[derive(Clone, Debug)]
pub struct BandPieces {
    pub j: usize,
    pub main: SampledField,
    pub commutator: SampledField,
    pub high: SampledField,
}

impl BandPieces {
    pub fn total(&self) -> SampledField {
        self.main.add(&self.commutator).add(&self.high)
    }
}

fn real(f: &SampledField) -> SampledField {
    f.map_values(|z| C64::new(z.re, 0.0))
}

/// `sum_k d_k((flat + eta) d_k u)`.
pub(crate) fn div_grad(eta: &SampledField, u: &SampledField, flat: bool) -> SampledField {
    let g = u.grid();
    let mut acc = SampledField::zeros(g);
    for k in 0..g.dim() {
        let du = u.derivative(k);
        let flux = du.zip_with(eta, |a, e| a * (e.re + if flat { 1.0 } else { 0.0 }));
        acc = acc.add(&flux.derivative(k));
    }
    acc
}

fn band(f: &SampledField, j: usize) -> SampledField {
    sj_project(f, j).expect("band index checked by caller").field
}

/// Split `d g d u`, `g = 1 + eta`, into band pieces `j = 0..=j_max`.
pub fn band_split(eta: &SampledField, u: &SampledField) -> Vec<BandPieces> {
    let g = u.grid();
    crate::par::map_range(g.j_max() + 1, |j| {
        let low = real(&s_below(eta, (j as i64 - 4).max(1)));
        let high_eta = real(eta).sub(&low);
        let uj = band(u, j);
        let main = div_grad(&low, &uj, true);
        let commutator = band(&div_grad(&low, u, true), j).sub(&main);
        let high = band(&div_grad(&high_eta, u, false), j);
        BandPieces {
            j,
            main,
            commutator,
            high,
        }
    })
}
