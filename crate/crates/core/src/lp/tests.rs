use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::grid::{linf_l2, Grid, SampledField, C64};

fn random_field(grid: &Grid, seed: u64) -> SampledField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..grid.nt() * grid.spatial_len())
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    SampledField::from_values(grid, values).unwrap()
}

fn max_diff(a: &SampledField, b: &SampledField) -> f64 {
    a.sub(b).values().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn tone(grid: &Grid, k: f64) -> SampledField {
    SampledField::from_fn(grid, move |_, x| C64::from_polar(1.0, k * x[0]))
}

#[test]
fn partition_of_unity_on_lattice() {
    for (d, n) in [(1, 256), (2, 64)] {
        let g = Grid::new(d, 2.0 * PI, n, 2).unwrap();
        for p in 0..g.spatial_len() {
            let s: f64 = (0..=g.j_max()).map(|j| band_table(&g, j).unwrap()[p]).sum();
            assert!((s - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn band_support_and_smoothness() {
    let jm = 8;
    for j in 1..jm {
        for i in 0..4000 {
            let r = i as f64 * 0.25;
            let v = BumpProfile.band(j, jm, r);
            let lo = f64::powi(2.0, j as i32 - 1);
            if r < lo || r > 4.0 * lo {
                assert_eq!(v, 0.0, "band {j} at {r}");
            }
            assert!((0.0..=1.0).contains(&v));
        }
    }
    assert_eq!(BumpProfile.band(0, jm, 2.0), 0.0);
    assert_eq!(BumpProfile.band(0, jm, 1.0), 1.0);
    // second differences stay O(h^2)
    let h = 1e-3;
    let worst = (1..2000)
        .map(|i| {
            let r = 1.0 + i as f64 * h / 2.0;
            let p = |x: f64| BumpProfile.low_pass(x);
            (p(r + h) - 2.0 * p(r) + p(r - h)).abs() / (h * h)
        })
        .fold(0.0, f64::max);
    assert!(worst < 6.0, "{worst}");
}

#[test]
fn band_projection_of_tones() {
    let g = Grid::new(1, 2.0 * PI, 64, 2).unwrap();
    let u = tone(&g, 3.0);
    let s2 = sj_project(&u, 2).unwrap();
    let w = BumpProfile.band(2, g.j_max(), 3.0);
    assert!(max_diff(&s2.field, &u.scale(C64::new(w, 0.0))) < 1e-12);
    let sum = decompose(&u).into_iter().reduce(|a, b| a.add(&b)).unwrap();
    assert!(max_diff(&sum, &u) < 1e-10);

    let one = tone(&g, 1.0);
    let low = sj_project(&one, 0).unwrap().field.add(&sj_project(&one, 1).unwrap().field);
    assert!(max_diff(&low, &one) < 1e-12);
    for j in 3..=g.j_max() {
        assert!(linf_l2(&sj_project(&one, j).unwrap().field) < 1e-12);
    }
    assert!(sj_project(&one, g.j_max() + 1).is_err());
}

#[test]
fn resolution_and_contraction_on_random_fields() {
    let g = Grid::new(1, 2.0 * PI, 128, 3).unwrap();
    for seed in 0..10 {
        let u = random_field(&g, seed);
        let bands = decompose(&u);
        let sum = bands.iter().skip(1).fold(bands[0].clone(), |a, b| a.add(b));
        assert!(max_diff(&sum, &u) < 1e-10);
        for (j, b) in bands.iter().enumerate() {
            assert!(linf_l2(b) <= linf_l2(&u) * (1.0 + 1e-12));
            let fat = s_tilde(&u, j).unwrap();
            assert!(max_diff(&sj_project(&fat, j).unwrap().field, b) < 1e-12);
        }
        let k = 3;
        assert!(max_diff(&s_below(&u, k).add(&s_geq(&u, k)), &u) < 1e-10);
    }
}

#[test]
fn wedges_in_two_dimensions() {
    let g = Grid::new(2, 2.0 * PI, 32, 2).unwrap();
    let cfg = WedgeConfig::default();
    let axis_tone = SampledField::from_fn(&g, |_, x| C64::from_polar(1.0, 4.0 * x[0]));
    let band = sj_project(&axis_tone, 2).unwrap();
    let fat = s_tilde(&band.field, 2).unwrap();
    let w1 = wedge_project(&band, 1, cfg).unwrap();
    let w2 = wedge_project(&band, 2, cfg).unwrap();
    assert!(max_diff(&w1, &fat) < 1e-12);
    assert!(linf_l2(&w2) < 1e-12);
    assert!(wedge_project(&band, 3, cfg).is_err());
    assert!(wedge_project(&band, 0, cfg).is_err());

    for seed in 0..100 {
        let u = random_field(&g, seed);
        let b = sj_project(&u, 1 + (seed as usize % g.j_max())).unwrap();
        let fat = s_tilde(&b.field, b.j).unwrap();
        let a = wedge_project(&b, 1, cfg).unwrap();
        let c = wedge_project(&b, 2, cfg).unwrap();
        assert!(max_diff(&a.add(&c), &fat) < 1e-10);
        assert!(linf_l2(&a) <= linf_l2(&b.field) * (1.0 + 1e-10));
        assert!(linf_l2(&c) <= linf_l2(&b.field) * (1.0 + 1e-10));
    }
}

#[test]
fn wedges_in_one_dimension_are_half_lines() {
    let g = Grid::new(1, 2.0 * PI, 64, 2).unwrap();
    let u = tone(&g, 5.0).add(&tone(&g, -6.0));
    let band = sj_project(&u, 3).unwrap();
    let pos = wedge_project(&band, 1, WedgeConfig::default()).unwrap();
    let neg = wedge_project(&band, 2, WedgeConfig::default()).unwrap();
    let fat = s_tilde(&band.field, 3).unwrap();
    assert!(max_diff(&pos.add(&neg), &fat) < 1e-12);
    let snap = pos.to_spectral(0).unwrap();
    assert!(snap.at_mode(-6).unwrap().norm() < 1e-14);
    assert!(snap.at_mode(5).unwrap().norm() > 0.1);
}

#[test]
fn gauss_legendre_is_exact_on_polynomials() {
    let rule = gauss_legendre(16);
    for deg in 0..32 {
        let q: f64 = rule.iter().map(|(x, w)| w * x.powi(deg)).sum();
        let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
        assert!((q - exact).abs() < 1e-13, "degree {deg}: {q}");
    }
}

#[test]
fn continuous_density_peaks_at_tone_octave() {
    for k0 in [2.0, 3.5, 5.0] {
        let r = f64::powf(2.0, k0);
        let best = (0..=6000)
            .map(|i| i as f64 * 1e-3)
            .max_by(|a, b| continuous_density(*a, r).total_cmp(&continuous_density(*b, r)))
            .unwrap();
        assert!((best - k0).abs() < 1e-3);
    }
    let g = Grid::new(1, 2.0 * PI, 64, 2).unwrap();
    let low = tone(&g, 1.0).add(&SampledField::from_fn(&g, |_, _| C64::new(0.5, 0.0)));
    for k in [2.0, 2.5, 4.0] {
        assert!(linf_l2(&continuous_band(&low, k)) < 1e-6 * linf_l2(&low));
    }
}

#[test]
fn continuous_reconstruction_converges() {
    let g = Grid::new(1, 2.0 * PI, 256, 2).unwrap();
    let jm = g.j_max() as f64;
    // band-limited to |xi| <= 2^{j_max - 2}
    let cap = f64::powf(2.0, jm - 2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let coeffs: Vec<(f64, C64)> = (-(cap as i64)..=cap as i64)
        .map(|m| (m as f64, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
        .collect();
    let u = SampledField::from_fn(&g, move |_, x| {
        coeffs.iter().map(|(m, c)| c * C64::from_polar(1.0, m * x[0])).sum()
    });
    let rec16 = continuous_reconstruct(&u, jm, 16);
    let err16 = max_diff(&rec16, &u) / u.values().iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(err16 < 1e-6, "{err16}");
    let rec4 = continuous_reconstruct(&u, jm, 4);
    let err4 = max_diff(&rec4, &u);
    assert!(err16 <= err4 + 1e-15);
}

#[test]
fn envelope_of_single_band() {
    let delta = 0.1;
    let bands = [0.0, 0.0, 0.0, 1.0, 0.0, 0.0];
    let env = envelope_from_bands(&bands, 1.0, delta);
    assert!((env.entries[3] - (f64::powf(2.0, -0.3) + 1.0)).abs() < 1e-15);

    let g = Grid::new(1, 2.0 * PI, 128, 2).unwrap();
    let u = tone(&g, 8.0);
    let env = envelope_of(&u, EnvelopeNorm::Sobolev { s: 1.0 }, delta);
    assert!((env.entries[3] - (f64::powf(2.0, -0.3) + 1.0)).abs() < 1e-12);
    let zero = envelope_of(&SampledField::zeros(&g), EnvelopeNorm::Sobolev { s: 1.0 }, delta);
    for (j, a) in zero.entries.iter().enumerate() {
        assert_eq!(*a, f64::powf(2.0, -delta * j as f64));
    }
    let scaled = envelope_of(&u.scale(C64::new(-3.0, 2.0)), EnvelopeNorm::Sobolev { s: 1.0 }, delta);
    for (a, b) in env.entries.iter().zip(&scaled.entries) {
        assert!((a - b).abs() < 1e-12);
    }
    let csv = env.to_csv();
    assert!(csv.starts_with("j,a_j,delta\n0,"));
    assert_eq!(csv.lines().count(), g.j_max() + 2);
}

#[test]
fn envelope_in_l2x_majorizes_bands() {
    let g = Grid::new(1, 2.0 * PI, 64, 4).unwrap();
    let u = random_field(&g, 5);
    let norm = EnvelopeNorm::L2X { s: 1.5 };
    let (bands, total) = norm.measure(&u);
    let env = envelope_from_bands(&bands, total, 0.125);
    assert!(env.majorizes(&bands, total, 1e-12));
    assert!(env.slow_variation_defect() <= 1e-12);
}

#[test]
fn default_delta_respects_constraint() {
    assert_eq!(default_delta(2.5, 1), 0.125);
    assert!((default_delta(0.9, 1) - 0.1).abs() < 1e-15);
}

proptest! {
    #[test]
    fn envelope_invariants(bands in prop::collection::vec(0.0f64..10.0, 1..12), delta in 0.01f64..0.3) {
        let total = bands.iter().map(|b| b * b).sum::<f64>().sqrt();
        let env = envelope_from_bands(&bands, total, delta);
        prop_assert!(env.slow_variation_defect() <= 1e-12);
        prop_assert!(env.majorizes(&bands, total, 1e-12));
        prop_assert!(env.entries[0] >= 1.0 && env.entries[0] <= 2.0);
    }
}
