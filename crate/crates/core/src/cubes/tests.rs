use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::grid::{l1_l2, linf, linf_l2, Grid, SampledField, C64};
use crate::lp::{band_table, sj_project};

fn grid16() -> Grid {
    Grid::new(1, 16.0, 256, 5).unwrap()
}

fn random_field(grid: &Grid, seed: u64) -> SampledField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..grid.nt() * grid.spatial_len())
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    SampledField::from_values(grid, values).unwrap()
}

fn random_band(grid: &Grid, j: usize, seed: u64) -> SampledField {
    sj_project(&random_field(grid, seed), j).unwrap().field
}

fn real_derivative(grid: &Grid, f: &[f64]) -> Vec<f64> {
    let data: Vec<C64> = f.iter().map(|&v| C64::new(v, 0.0)).collect();
    grid.derivative(&data, 0).iter().map(|z| z.re).collect()
}

#[test]
fn cutoffs_partition_unity_in_one_and_two_dimensions() {
    for g in [grid16(), Grid::new(2, 8.0, 64, 2).unwrap()] {
        for l in 0..=l_box(&g) {
            let sys = CubeSystem::new(&g, l);
            assert!(sys.partition_error() < 1e-10, "scale {l}: {}", sys.partition_error());
            for q in 0..sys.len() {
                assert!(sys.cutoff(q).iter().all(|&c| c >= 0.0));
            }
        }
    }
}

#[test]
fn cutoff_derivatives_scale_with_side() {
    let g = grid16();
    for l in 0..l_box(&g) {
        let sys = CubeSystem::new(&g, l);
        let side = sys.side();
        for q in 0..sys.len() {
            let d1 = real_derivative(&g, sys.cutoff(q));
            let d2 = real_derivative(&g, &d1);
            let m1 = d1.iter().map(|v| v.abs()).fold(0.0, f64::max);
            let m2 = d2.iter().map(|v| v.abs()).fold(0.0, f64::max);
            assert!(m1 * side <= 2.0, "scale {l}: {m1}");
            assert!(m2 * side * side <= 2.0, "scale {l}: {m2}");
        }
    }
}

#[test]
fn cutoffs_are_frequency_localized() {
    for g in [grid16(), Grid::new(2, 8.0, 64, 2).unwrap()] {
        for l in 0..=l_box(&g) {
            let sys = CubeSystem::new(&g, l);
            for q in 0..sys.len() {
                let frac = sys.high_frequency_fraction(q, 4.0);
                assert!(frac < 1e-8, "scale {l} cube {q}: {frac}");
            }
        }
    }
}

#[test]
fn cube_counts_truncate_at_the_box() {
    let g = Grid::new(1, 10.0, 256, 2).unwrap();
    assert_eq!(l_box(&g), 4);
    assert_eq!(CubeSystem::new(&g, 0).len(), 10);
    assert_eq!(CubeSystem::new(&g, 2).len(), 3);
    assert_eq!(CubeSystem::new(&g, 4).len(), 1);
    assert_eq!(CubeSystem::new(&g, 9).len(), 1);
}

#[test]
fn x_norm_of_constant_on_unit_box() {
    let g = Grid::new(1, 1.0, 8, 4).unwrap();
    let c = C64::new(0.6, -0.8) * 3.0;
    let u = SampledField::from_fn(&g, move |_, _| c);
    let r = x_norm(&u);
    assert!((r.value - c.norm()).abs() < 1e-12);
    for &(_, _, v) in &r.contributions {
        assert!((v - c.norm()).abs() < 1e-12);
    }
}

#[test]
fn x_norm_of_unit_cube_bump_is_realized_at_scale_zero() {
    let g = grid16();
    let u = SampledField::from_fn(&g, |t, x| {
        if (3.0..4.0).contains(&x[0]) {
            C64::new((1.0 + t) * (x[0] - 3.0) * (4.0 - x[0]), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let r = x_norm(&u);
    assert_eq!(r.argmax, Some(CubeRef { l: 0, cube: 3 }));
    let five = x_value(&u.scale(C64::new(5.0, 0.0)));
    assert!((five - 5.0 * r.value).abs() < 1e-12 * five);
    assert_eq!(x_value(&SampledField::zeros(&g)), 0.0);
}

#[test]
fn atom_has_unit_surrogate_norm() {
    let g = grid16();
    let l = 2;
    let sys = CubeSystem::new(&g, l);
    let mask = sys.mask(1);
    let raw = SampledField::from_fn(&g, |t, x| C64::new(1.0 + t, x[0].sin()));
    let mut f = raw.clone();
    for t in 0..g.nt() {
        f.slice_mut(t).iter_mut().zip(&mask).for_each(|(z, &m)| {
            if !m {
                *z = C64::new(0.0, 0.0);
            }
        });
    }
    let norm = crate::grid::l2l2(&f);
    let atom = f.scale(C64::new(f64::powf(2.0, -0.5 * l as f64) / norm, 0.0));
    let r = y_upper(&atom);
    assert!(r.value <= 1.0 + 1e-12, "{}", r.value);
    assert_eq!(y_value(&SampledField::zeros(&g)), 0.0);
}

#[test]
fn surrogate_dominates_dual_pairing() {
    let g = grid16();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..200 {
        let f = random_field(&g, 1000 + i);
        let mut u = random_field(&g, 5000 + i);
        // vary concentration so different scales win
        let centre = rng.gen_range(0.0..16.0);
        let width: f64 = rng.gen_range(0.3..8.0);
        for t in 0..g.nt() {
            for (p, z) in u.slice_mut(t).iter_mut().enumerate() {
                let x = g.point(p)[0];
                *z *= (-(x - centre).powi(2) / (2.0 * width * width)).exp();
            }
        }
        let pairing = f.spacetime_inner(&u).norm();
        assert!(pairing <= y_value(&f) * x_value(&u) * (1.0 + 1e-12));
    }
}

#[test]
fn band_norm_splittings() {
    let g = grid16();
    let u = random_band(&g, 2, 7);
    assert!((xj_norm(&u, 0) - (x_value(&u) + linf_l2(&u))).abs() < 1e-13);
    let slice: Vec<C64> = u.slice(0).to_vec();
    let f = SampledField::constant_in_time(&g, &slice).unwrap();
    let spatial = g.l2(&slice);
    assert!((l1_l2(&f) - spatial).abs() < 1e-12 * spatial);
    assert!(yj_upper(&f, 2) <= spatial * (1.0 + 1e-12));
    let c = C64::new(0.0, -2.5);
    assert!((xj_norm(&u.scale(c), 3) - 2.5 * xj_norm(&u, 3)).abs() < 1e-12);
    assert!((yj_upper(&u.scale(c), 3) - 2.5 * yj_upper(&u, 3)).abs() < 1e-12);
}

#[test]
fn single_band_lp_norm_is_one_term() {
    let g = Grid::new(1, 4.0 * std::f64::consts::PI, 256, 5).unwrap();
    let j0 = 3;
    // |xi| = 2^{j0} is the one point where S_{j0} = 1
    let k = f64::powi(2.0, j0 as i32);
    let u = SampledField::from_fn(&g, move |_, x| C64::from_polar(1.0, k * x[0]));
    assert!(band_table(&g, j0).unwrap().iter().any(|&v| v == 1.0));
    let s = 1.5;
    let r = lp_xs_norm(&u, CubeSum::Two, s);
    let base = lp_xs_norm(&u, CubeSum::Two, 0.0);
    let per = r.per_band.as_ref().unwrap();
    for (j, v) in per.iter().enumerate() {
        if j != j0 {
            assert!(*v < 1e-10 * per[j0]);
        }
    }
    let v = base.per_band.unwrap()[j0];
    assert!((r.value - f64::powf(2.0, j0 as f64 * s) * v).abs() < 1e-10 * r.value);
}

#[test]
fn cube_summed_norm_dominates_plain() {
    let g = grid16();
    for seed in 0..5 {
        let u = random_field(&g, 40 + seed);
        let summed = lp_xs_norm(&u, CubeSum::Two, 1.0).value;
        let plain = xs_norm(&u, 1.0).value;
        // overlapping smooth cutoffs cost a constant
        assert!(plain <= 1.1 * summed, "{summed} < {plain}");
        let ys = ys_upper(&u, 1.0).value;
        let lys = lp_ys_upper(&u, CubeSum::Two, 1.0).value;
        assert!(lys <= 4.0 * ys, "{lys} vs {ys}");
    }
}

#[test]
fn lp_norm_is_stable_under_time_refinement() {
    let value = |nt| {
        let g = Grid::new(1, 16.0, 256, nt).unwrap();
        let u = SampledField::from_fn(&g, |_, x| {
            C64::from_polar((-(x[0] - 8.0).powi(2) / 4.0).exp(), 4.0 * x[0])
        });
        lp_xs_norm(&u, CubeSum::Two, 1.0).value
    };
    let (a, b) = (value(9), value(17));
    assert!(a.is_finite() && ((a - b) / a).abs() < 0.02);
}

#[test]
fn unit_data_has_comparable_l2x_norm() {
    let g = grid16();
    let mut u = random_field(&g, 9);
    let first = u.slice(0).to_vec();
    let n = g.l2(&first);
    let slice: Vec<C64> = first.iter().map(|z| z / n).collect();
    u = SampledField::constant_in_time(&g, &slice).unwrap();
    let v = lp_xs_norm(&u, CubeSum::Two, 0.0).value;
    assert!(v <= 8.0 && v >= 0.5, "{v}");
}

#[test]
fn reports_match_tables() {
    let g = grid16();
    let u = random_field(&g, 2);
    let x = x_norm(&u);
    let sup = x.contributions.iter().map(|c| c.2).fold(0.0, f64::max);
    assert!((x.value - sup).abs() < 1e-12);
    let y = y_upper(&u);
    let inf = y.contributions.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
    assert!((y.value - inf).abs() < 1e-12);
    let s = lp_xs_norm(&u, CubeSum::Inf, 0.5);
    let l2 = s.per_band.as_ref().unwrap().iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!((s.value - l2).abs() < 1e-12 * l2);
    let json = x.to_json();
    assert_eq!(json["space"], "X");
    assert!(json["argmax"]["l"].is_u64());
    assert!(s.to_json()["argmax"].is_array());
}

#[test]
fn bernstein_constant_is_uniform_across_bands() {
    let g = grid16();
    let consts: Vec<f64> = (1..=g.j_max())
        .map(|j| {
            (0..4)
                .map(|seed| {
                    let v = random_band(&g, j, 100 + seed);
                    linf(&v) / (f64::powf(2.0, 0.5 * j as f64) * linf_l2(&v))
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let hi = consts.iter().cloned().fold(0.0, f64::max);
    let lo = consts.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(hi / lo <= 4.0, "{consts:?}");
}

#[test]
fn lower_band_spaces_contain_higher() {
    let g = grid16();
    for i in 1..=g.j_max() {
        let u = random_band(&g, i, 200 + i as u64);
        for k in 0..=i {
            assert!(xj_norm(&u, k) <= xj_norm(&u, i) * (1.0 + 1e-14));
        }
    }
}

#[test]
fn triangle_inequality_on_random_pairs() {
    let g = grid16();
    for seed in 0..10 {
        let a = random_field(&g, 300 + seed);
        let b = random_field(&g, 400 + seed).scale(C64::new(0.0, 0.3));
        let ab = a.add(&b);
        assert!(x_value(&ab) <= x_value(&a) + x_value(&b) + 1e-10);
        for p in [CubeSum::One, CubeSum::Two, CubeSum::Inf] {
            let n = |u: &SampledField| lp_xs_norm(u, p, 0.5).value;
            assert!(n(&ab) <= n(&a) + n(&b) + 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn norms_are_absolutely_homogeneous(seed in 0u64..1000, re in -4.0f64..4.0, im in -4.0f64..4.0) {
        let g = Grid::new(1, 8.0, 64, 3).unwrap();
        let u = random_field(&g, seed);
        let c = C64::new(re, im);
        let us = u.scale(c);
        let tol = 1e-12 * (1.0 + c.norm());
        prop_assert!((x_value(&us) - c.norm() * x_value(&u)).abs() <= tol * x_value(&u));
        prop_assert!((y_value(&us) - c.norm() * y_value(&u)).abs() <= tol * y_value(&u));
        let a = lp_xs_norm(&u, CubeSum::Two, 1.0).value;
        prop_assert!((lp_xs_norm(&us, CubeSum::Two, 1.0).value - c.norm() * a).abs() <= tol * a);
    }
}
