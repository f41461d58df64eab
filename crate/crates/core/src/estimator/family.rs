use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::grid::{Grid, SampledField, C64};

/// Relative half-width of the frequency core used for band `j`:
/// modes with `|xi|` in `[1 - w, 1 + w] 2^j`.
pub const BAND_CORE: f64 = 0.05;

/// How band masses are distributed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandProfile {
    /// All mass in one band.
    Single { j: usize },
    /// Equal mass in `lo..=hi`.
    Flat { lo: usize, hi: usize },
    /// Mass `2^{-2 rate j}` in `lo..=hi`, so that `H^rate`-weighted bands are level.
    Decay { lo: usize, hi: usize, rate: f64 },
    /// Explicit per-band masses starting at band 0.
    Masses(Vec<f64>),
}

impl BandProfile {
    /// `(band, L2 mass)` pairs, normalized to total mass 1.
    pub fn masses(&self) -> Vec<(usize, f64)> {
        let raw: Vec<(usize, f64)> = match self {
            BandProfile::Single { j } => vec![(*j, 1.0)],
            BandProfile::Flat { lo, hi } => (*lo..=*hi).map(|j| (j, 1.0)).collect(),
            BandProfile::Decay { lo, hi, rate } => (*lo..=*hi)
                .map(|j| (j, f64::powf(2.0, -2.0 * rate * j as f64)))
                .collect(),
            BandProfile::Masses(m) => m.iter().cloned().enumerate().filter(|(_, v)| *v > 0.0).collect(),
        };
        let total: f64 = raw.iter().map(|(_, m)| m).sum();
        if total <= 0.0 {
            return Vec::new();
        }
        raw.into_iter().map(|(j, m)| (j, m / total)).collect()
    }

    pub fn top(&self) -> usize {
        self.masses().iter().map(|(j, _)| *j).max().unwrap_or(0)
    }
}

/// Recipe for one family of structured random fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Recipe {
    pub profile: BandProfile,
    /// `L^2` norm of the `t = 0` slice.
    pub amplitude: f64,
    /// Width of the Gaussian spatial window as a fraction of `L`; `None` for
    /// no window.
    #[serde(default = "default_window")]
    pub window: Option<f64>,
    /// Relative depth of the time modulation `1 + m sin(2 pi nu t + theta)`.
    #[serde(default = "default_modulation")]
    pub modulation: f64,
}

fn default_window() -> Option<f64> {
    Some(0.125)
}

fn default_modulation() -> f64 {
    0.25
}

impl Recipe {
    pub fn new(profile: BandProfile, amplitude: f64) -> Self {
        Self {
            profile,
            amplitude,
            window: default_window(),
            modulation: default_modulation(),
        }
    }

    pub fn single(j: usize, amplitude: f64) -> Self {
        Self::new(BandProfile::Single { j }, amplitude)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFamily {
    pub seed: u64,
    pub count: usize,
    pub recipe: Recipe,
}

pub(crate) fn mix(mut h: u64, v: u64) -> u64 {
    // splitmix64 finalizer over the running hash
    h ^= v.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(h << 6).wrapping_add(h >> 2);
    h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^ (h >> 31)
}

pub(crate) fn keyed_rng(keys: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(keys.iter().fold(0x51_7cc1_b727_220a, |h, &k| mix(h, k)))
}

/// Integer lattice modes whose frequency lies in the core of band `j`. If
/// the lattice has no mode there, the modes closest to `2^j` are used.
pub fn band_modes(grid: &Grid, j: usize) -> Vec<[i64; 2]> {
    let target = f64::powi(2.0, j as i32);
    let unit = 2.0 * PI / grid.length();
    let reach = ((1.0 + BAND_CORE) * target / unit).ceil() as i64;
    let half = grid.n() as i64 / 2;
    let second = if grid.dim() == 2 { reach.min(half - 1) } else { 0 };
    let first = reach.min(half - 1);
    let mut all = Vec::new();
    for a in -first..=first {
        for b in -second..=second {
            let r = unit * ((a * a + b * b) as f64).sqrt();
            if r > 0.0 {
                all.push(([a, b], r));
            }
        }
    }
    let core: Vec<[i64; 2]> = all
        .iter()
        .filter(|(_, r)| (r / target - 1.0).abs() <= BAND_CORE)
        .map(|(m, _)| *m)
        .collect();
    if !core.is_empty() {
        return core;
    }
    let best = all
        .iter()
        .map(|(_, r)| (r - target).abs())
        .fold(f64::INFINITY, f64::min);
    all.iter()
        .filter(|(_, r)| ((r - target).abs() - best).abs() < 1e-12)
        .map(|(m, _)| *m)
        .collect()
}

/// Gaussian window periodized over the neighbouring images.
fn periodic_gaussian(x: f64, c: f64, length: f64, width: f64) -> f64 {
    (-1..=1)
        .map(|k| {
            let d = x - c - k as f64 * length;
            (-d * d / (2.0 * width * width)).exp()
        })
        .sum()
}

/// Member `index` of `family` on `grid`. Coefficients are drawn per
/// `(seed, index, band, mode)`, so the continuum field does not depend on
/// the resolution.
pub fn random_field(family: &TestFamily, grid: &Grid, index: usize) -> SampledField {
    debug_assert!(index < family.count.max(1));
    let recipe = &family.recipe;
    if recipe.amplitude == 0.0 {
        return SampledField::zeros(grid);
    }
    let seed = family.seed;
    let unit = 2.0 * PI / grid.length();
    struct Band {
        modes: Vec<([f64; 2], C64)>,
        nu: f64,
        theta: f64,
    }
    let bands: Vec<Band> = recipe
        .profile
        .masses()
        .into_iter()
        .map(|(j, mass)| {
            let modes = band_modes(grid, j);
            let mut coeffs: Vec<([f64; 2], C64)> = modes
                .iter()
                .map(|m| {
                    let mut rng = keyed_rng(&[seed, index as u64, j as u64, m[0] as u64, m[1] as u64]);
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    ([unit * m[0] as f64, unit * m[1] as f64], C64::new(re, im))
                })
                .collect();
            // unit L2 mass per band before windowing
            let energy: f64 = coeffs.iter().map(|(_, c)| c.norm_sqr()).sum::<f64>() * grid.volume();
            let scale = (mass / energy).sqrt();
            coeffs.iter_mut().for_each(|(_, c)| *c *= scale);
            let mut rng = keyed_rng(&[seed, index as u64, j as u64, u64::MAX]);
            Band {
                modes: coeffs,
                nu: rng.gen_range(0.5..2.0),
                theta: rng.gen_range(0.0..2.0 * PI),
            }
        })
        .collect();
    let mut rng = keyed_rng(&[seed, index as u64, u64::MAX - 1]);
    let length = grid.length();
    let centre = [rng.gen_range(0.0..length), rng.gen_range(0.0..length)];
    let dim = grid.dim();
    let window = recipe.window.map(|w| w * length);
    let depth = recipe.modulation;
    let mut field = SampledField::from_fn(grid, move |t, x| {
        let mut acc = C64::new(0.0, 0.0);
        for b in &bands {
            let m = 1.0 + depth * (2.0 * PI * b.nu * t + b.theta).sin();
            let s: C64 = b
                .modes
                .iter()
                .map(|(xi, c)| c * C64::from_polar(1.0, xi[0] * x[0] + xi[1] * x[1]))
                .sum();
            acc += s * m;
        }
        if let Some(w) = window {
            for a in 0..dim {
                acc *= periodic_gaussian(x[a], centre[a], length, w);
            }
        }
        acc
    });
    let n0 = field.l2_at(0);
    if n0 > 0.0 {
        field = field.scale(C64::new(recipe.amplitude / n0, 0.0));
    }
    field
}
