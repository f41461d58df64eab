use std::f64::consts::PI;

use super::*;
use crate::estimator::{random_field, Recipe, TestFamily};
use crate::grid::{linf, Grid, SampledField, C64};
use crate::lp::{sj_project, spectral_leakage, tilde_table};
use crate::QslError;

fn tone(grid: &Grid, k: f64) -> Vec<C64> {
    (0..grid.spatial_len())
        .map(|p| C64::from_polar(1.0, k * grid.point(p)[0]))
        .collect()
}

fn band_datum(grid: &Grid, j: usize, seed: u64, amplitude: f64) -> Vec<C64> {
    let mut recipe = Recipe::single(j, amplitude);
    recipe.modulation = 0.0;
    let family = TestFamily { seed, count: 1, recipe };
    let f = random_field(&family, grid, 0);
    sj_project(&f, j).unwrap().field.slice(0).to_vec()
}

fn max_diff(a: &SampledField, b: &SampledField) -> f64 {
    linf(&a.sub(b))
}

fn small_metric(grid: &Grid, size: f64) -> MetricField {
    let eta = SampledField::from_fn(grid, |t, x| {
        C64::new(size * (1.0 + 0.5 * t) * (x[0].cos() + 0.5 * (2.0 * x[0] + 1.0).sin()), 0.0)
    });
    MetricField::from_perturbation(&eta)
}

#[test]
fn free_plane_wave_is_exact() {
    let g = Grid::new(1, 2.0 * PI, 64, 33).unwrap();
    let exact = SampledField::from_fn(&g, |t, x| C64::from_polar(1.0, 2.0 * x[0] - 4.0 * t));
    for loc in [Localization::Global, Localization::Band(1)] {
        let u = solve_linear(&LinearProblem::free(&g, loc, tone(&g, 2.0))).unwrap();
        assert!(max_diff(&u, &exact) < 1e-8, "{loc:?}");
    }
}

#[test]
fn duhamel_oracle() {
    let g = Grid::new(1, 2.0 * PI, 64, 65).unwrap();
    let f = SampledField::constant_in_time(&g, &tone(&g, 2.0)).unwrap();
    let p = LinearProblem::free(&g, Localization::Global, vec![C64::new(0.0, 0.0); 64]).with_forcing(f);
    let u = solve_linear(&p).unwrap();
    let exact = SampledField::from_fn(&g, |t, x| {
        -(C64::new(1.0, 0.0) - C64::from_polar(1.0, -4.0 * t)) / 4.0 * C64::from_polar(1.0, 2.0 * x[0])
    });
    assert!(max_diff(&u, &exact) < 1e-7);
}

#[test]
fn variable_metric_conserves_mass_and_band() {
    let g = Grid::new(1, 2.0 * PI, 256, 33).unwrap();
    for j in [2, 4] {
        let datum = band_datum(&g, j, 7, 1.0);
        let p = LinearProblem::new(small_metric(&g, 0.05), Localization::Band(j), datum);
        let u = solve_linear(&p).unwrap();
        let e = energy_check(&p, &u).unwrap();
        assert!(e.drift < 1e-6, "j={j} drift {}", e.drift);
        assert!(e.constant == 0.0 || e.cross == 0.0 || e.constant.is_finite());
        let outside: Vec<f64> = tilde_table(&g, j).iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }).collect();
        assert!(spectral_leakage(&u, &outside) < 1e-8);
    }
    let p = LinearProblem::new(small_metric(&g, 0.05), Localization::Global, band_datum(&g, 3, 1, 1.0));
    let u = solve_linear(&p).unwrap();
    let drift = (0..g.nt()).map(|t| (u.l2_at(t) - u.l2_at(0)).abs()).fold(0.0, f64::max);
    assert!(drift / u.l2_at(0) < 1e-9, "{drift}");
}

#[test]
fn refuses_bad_steps_and_metrics() {
    let g = Grid::new(1, 2.0 * PI, 128, 9).unwrap();
    let p = LinearProblem::new(small_metric(&g, 0.05), Localization::Band(3), band_datum(&g, 3, 2, 1.0));
    let bound = p.max_step().unwrap();
    assert!(matches!(step_linear(&p, 2.0 * bound), Err(QslError::Cfl { band: 3, .. })));
    assert!(step_linear(&p, bound).is_ok());
    let bad = LinearProblem::new(small_metric(&g, 0.6), Localization::Global, tone(&g, 1.0));
    assert!(matches!(solve_linear(&bad), Err(QslError::Ellipticity { .. })));
    let nan = SampledField::from_fn(&g, |t, _| C64::new(if t > 0.5 { f64::NAN } else { 0.0 }, 0.0));
    let p = LinearProblem::free(&g, Localization::Global, tone(&g, 1.0)).with_forcing(nan);
    assert!(matches!(solve_linear(&p), Err(QslError::NonFinite { .. })));
    let p = LinearProblem::free(&g, Localization::Band(40), tone(&g, 1.0));
    assert!(matches!(solve_linear(&p), Err(QslError::OutOfRange { .. })));
}

#[test]
fn potentials_shift_the_phase() {
    // constant W = w0 adds e^{i w0 t} to the free flow
    let g = Grid::new(1, 2.0 * PI, 64, 33).unwrap();
    let w0 = 0.7;
    let w = SampledField::from_fn(&g, |_, _| C64::new(w0, 0.0));
    let v = SampledField::from_fn(&g, |_, _| C64::new(0.3, 0.0));
    let p = LinearProblem::free(&g, Localization::Global, tone(&g, 3.0)).with_potentials(vec![v], Some(w));
    let u = solve_linear(&p).unwrap();
    // V d_x e^{3ix} = 3 i V u, so i u_t = (9 - 0.9 i... ) -> u_t = -9 i u + i(3 i 0.3) u + i w0 u
    let rate = C64::new(-0.9, w0 - 9.0);
    let exact = SampledField::from_fn(&g, |t, x| (rate * t).exp() * C64::from_polar(1.0, 3.0 * x[0]));
    assert!(max_diff(&u, &exact) < 1e-7, "{}", max_diff(&u, &exact));
}

#[test]
fn multiplier_is_self_adjoint_and_bounded() {
    let g = Grid::new(1, 16.0, 512, 2).unwrap();
    let mut norms = Vec::new();
    for j in 2..=g.j_max() - 1 {
        let m = Multiplier::new(j, 0, 1, 5.0);
        for seed in 0..4 {
            let u = band_datum(&g, j, seed, 1.0);
            let v = band_datum(&g, j, seed + 100, 1.0);
            let lhs = g.inner(&m.apply(&g, &u), &v);
            let rhs = g.inner(&u, &m.apply(&g, &v));
            assert!((lhs - rhs).norm() < 1e-10 * lhs.norm().max(1.0));
            norms.push(g.l2(&m.apply(&g, &u)) / g.l2(&u));
        }
    }
    let max = norms.iter().cloned().fold(0.0, f64::max);
    let min = norms.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(max < 8.0 && max / min < 8.0, "{min} {max}");
    let a = Multiplier::new(3, 0, 1, 5.0).weight(&g);
    assert!(a.iter().all(|x| x.abs() < 2.0));
}

#[test]
fn commutator_identity_is_second_order() {
    let mut res = Vec::new();
    for nt in [64, 128, 256] {
        let g = Grid::new(1, 2.0 * PI, 128, nt).unwrap();
        let p = LinearProblem::new(small_metric(&g, 0.05), Localization::Band(2), band_datum(&g, 2, 3, 1.0));
        let u = solve_linear(&p).unwrap();
        let r = commutator_identity_check(&p, &u, &Multiplier::new(2, 0, 0, 1.0)).unwrap();
        assert_eq!(r.rows.len(), nt - 2);
        res.push(r);
    }
    let order = (res[0].max_residual / res[2].max_residual).log2() / 2.0;
    assert!((order - 2.0).abs() < 0.3, "{order}");
    // the centered difference error grows like |xi|^6 dt^2, so the absolute
    // tolerance is checked on the lowest band
    let g = Grid::new(1, 2.0 * PI, 128, 256).unwrap();
    let p = LinearProblem::new(small_metric(&g, 0.05), Localization::Band(1), band_datum(&g, 1, 3, 1.0));
    let u = solve_linear(&p).unwrap();
    let r = commutator_identity_check(&p, &u, &Multiplier::new(1, 0, 0, 1.0)).unwrap();
    assert!(r.relative < 1e-3, "{}", r.relative);
}

#[test]
fn near_constant_weight_has_no_commutator() {
    let g = Grid::new(1, 2.0 * PI, 128, 65).unwrap();
    let f = SampledField::from_fn(&g, |t, x| C64::from_polar(0.5, 3.0 * x[0] + t));
    let p = LinearProblem::free(&g, Localization::Band(2), band_datum(&g, 2, 4, 1.0)).with_forcing(f);
    let u = solve_linear(&p).unwrap();
    let m = Multiplier::new(2, 0, 12, 1.0).with_offset(1.0);
    let r = commutator_identity_check(&p, &u, &m).unwrap();
    let comm = r.rows.iter().map(|x| x.commutator.abs()).fold(0.0, f64::max);
    let evol = r.rows.iter().map(|x| x.evolution.abs()).fold(0.0, f64::max);
    assert!(comm < 1e-6 * evol, "{comm} {evol}");
    assert!(r.relative < 1e-2);
}

fn packet(grid: &Grid, j: usize, dir: [f64; 2], centre: f64) -> SampledField {
    let k = 2f64.powi(j as i32) * 1.2;
    let width = 0.6;
    let raw = SampledField::from_fn(grid, |_, x| {
        let d = x[0] - centre;
        let e = if grid.dim() == 2 { x[1] - grid.length() / 2.0 } else { 0.0 };
        let env = (-(d * d + e * e) / (2.0 * width * width)).exp();
        env * C64::from_polar(1.0, k * (dir[0] * x[0] + dir[1] * x[1]))
    });
    let band = sj_project(&raw, j).unwrap();
    crate::lp::wedge_project(&band, if dir[0] > 0.5 || grid.dim() == 1 { 1 } else { 2 }, Default::default()).unwrap()
}

#[test]
fn positive_commutator_lower_bound() {
    let g = Grid::new(1, 16.0, 1024, 3).unwrap();
    let (mut ratios, mut rems) = (Vec::new(), Vec::new());
    for j in 3..=g.j_max() {
        let u = packet(&g, j, [1.0, 0.0], 4.0);
        let r = positive_commutator_check(&u, &Multiplier::new(j, 0, 0, 4.0)).unwrap();
        assert!(!r.hypothesis_violated, "{}", r.leakage);
        assert!(r.form > 0.0 && (r.main - r.form).abs() < 0.2 * r.form);
        ratios.push(r.ratio);
        rems.push(r.remainder);
    }
    assert!(ratios.iter().all(|r| *r > 0.0 && *r < 1.0), "{ratios:?}");
    let max = rems.iter().cloned().fold(0.0, f64::max);
    let min = rems.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(max < 4.0 && max <= 2.0 * min.max(0.05), "{rems:?}");
}

#[test]
fn positive_commutator_scale_and_wedge() {
    let g = Grid::new(1, 32.0, 1024, 2).unwrap();
    let u = packet(&g, 4, [1.0, 0.0], 8.0);
    let m0 = positive_commutator_check(&u, &Multiplier::new(4, 0, 0, 8.0)).unwrap();
    let m2 = positive_commutator_check(&u, &Multiplier::new(4, 0, 2, 8.0)).unwrap();
    let scaled = m0.main / m2.main / 4.0;
    assert!((0.5..2.0).contains(&scaled), "{scaled}");

    let g = Grid::new(2, 8.0, 64, 2).unwrap();
    let along = packet(&g, 3, [1.0, 0.0], 4.0);
    let r = positive_commutator_check(&along, &Multiplier::new(3, 0, 0, 4.0)).unwrap();
    assert!(!r.hypothesis_violated);
    let across = packet(&g, 3, [0.0, 1.0], 4.0);
    let r = positive_commutator_check(&across, &Multiplier::new(3, 0, 0, 4.0)).unwrap();
    assert!(r.hypothesis_violated);
}

#[test]
fn local_smoothing_uniform_in_band() {
    let g = Grid::new(1, 2.0 * PI, 512, 9).unwrap();
    let mut ratios = Vec::new();
    for j in 2..=7 {
        let datum = band_datum(&g, j, 11, 1.0);
        let p = LinearProblem::free(&g, Localization::Band(j), datum.clone());
        let u = solve_linear(&p).unwrap();
        let r = local_smoothing_report(&p, &u, 1.5).unwrap();
        let ratio = r.ratio.unwrap();
        assert!(r.max_cube_ratio.is_finite());
        let scaled: Vec<C64> = datum.iter().map(|z| z * 1e-3).collect();
        let ps = LinearProblem::free(&g, Localization::Band(j), scaled);
        let us = solve_linear(&ps).unwrap();
        let rs = local_smoothing_report(&ps, &us, 1.5).unwrap().ratio.unwrap();
        assert!((rs - ratio).abs() <= 1e-10 * ratio);
        ratios.push(ratio);
    }
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(max / min <= 8.0, "{ratios:?}");
    let zero = LinearProblem::free(&g, Localization::Band(3), vec![C64::new(0.0, 0.0); 512]);
    let u = solve_linear(&zero).unwrap();
    assert!(local_smoothing_report(&zero, &u, 1.5).unwrap().ratio.is_none());
}

#[test]
fn local_smoothing_refuses_large_metric() {
    let g = Grid::new(1, 2.0 * PI, 128, 5).unwrap();
    let w = SampledField::from_fn(&g, |_, x| C64::new(0.5 * x[0].cos(), 0.0));
    let metric = MetricField::from_map(MetricMap::Saturated { kappa: 0.5 }, &w);
    let p = LinearProblem::new(metric, Localization::Band(3), band_datum(&g, 3, 1, 1.0));
    let u = solve_linear(&p).unwrap();
    assert!(matches!(local_smoothing_report(&p, &u, 1.5), Err(QslError::Smallness { .. })));
}

#[test]
fn cube_commutators_decay_like_inverse_square() {
    let g = Grid::new(1, 256.0, 2048, 5).unwrap();
    let p = LinearProblem::free(&g, Localization::Band(2), band_datum(&g, 2, 5, 1.0));
    let u = solve_linear(&p).unwrap();
    let rows = cube_commutator_diagnostic(&u, 2, &[4, 8]).unwrap();
    let factor = rows[0].ratio / rows[1].ratio;
    assert!((2.0..8.0).contains(&factor), "{factor}");
    assert!(cube_commutator_diagnostic(&u, 2, &[3]).is_err());
}
