use std::f64::consts::PI;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use qsl::cubes::{lp_xs_norm, CubeSum};
use qsl::estimator::{fuzz_campaign, random_field, BandProfile, CampaignConfig, Recipe, TestFamily};
use qsl::iterate::{picard_solve, Form, QuasilinearSpec, MAX_ITER, TOL};
use qsl::lp::decompose;
use qsl::par;
use qsl::Grid;

fn field(grid: &Grid) -> qsl::SampledField {
    let family = TestFamily {
        seed: 1,
        count: 1,
        recipe: Recipe::new(BandProfile::Flat { lo: 0, hi: 6 }, 1.0),
    };
    random_field(&family, grid, 0)
}

#[derive(Clone, Copy)]
enum Mode {
    Parallel,
    Sequential,
}

fn in_mode<R: Send>(mode: Mode, f: impl FnOnce() -> R + Send) -> R {
    match mode {
        Mode::Parallel => f(),
        Mode::Sequential => par::sequential(f),
    }
}

const MODES: [(Mode, &str); 2] = [(Mode::Parallel, "parallel"), (Mode::Sequential, "sequential")];

fn norms(c: &mut Criterion) {
    let g = Grid::new(1, 2.0 * PI, 1024, 64).unwrap();
    let u = field(&g);
    let mut group = c.benchmark_group("lp_xs_norm");
    for (mode, name) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| in_mode(mode, || lp_xs_norm(&u, CubeSum::Two, 2.5).value))
        });
    }
    group.finish();
}

fn bands(c: &mut Criterion) {
    let g = Grid::new(2, 2.0 * PI, 128, 16).unwrap();
    let u = field(&g);
    let mut group = c.benchmark_group("decompose_2d");
    for (mode, name) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| in_mode(mode, || decompose(&u).len()))
        });
    }
    group.finish();
}

fn picard(c: &mut Criterion) {
    let g = Grid::new(1, 2.0 * PI, 128, 33).unwrap();
    let mut recipe = Recipe::new(BandProfile::Flat { lo: 1, hi: 3 }, 1.0);
    recipe.window = Some(0.25);
    let mut shape = random_field(&TestFamily { seed: 2, count: 1, recipe }, &g, 0).slice(0).to_vec();
    g.dealias(&mut shape);
    let spec = QuasilinearSpec::scaled(Form::Divergence, &shape, &g, 2.5, 0.01);
    let mut group = c.benchmark_group("picard");
    group.sample_size(10);
    for (mode, name) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| in_mode(mode, || picard_solve(&spec, &g, TOL, MAX_ITER).unwrap().history.len()))
        });
    }
    group.finish();
}

fn campaign(c: &mut Criterion) {
    let cfg = CampaignConfig {
        samples: 20,
        resolutions: vec![64, 128],
        ..CampaignConfig::default()
    };
    let mut group = c.benchmark_group("campaign");
    group.sample_size(10);
    for (mode, name) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| in_mode(mode, || fuzz_campaign(&cfg).unwrap().reports.len()))
        });
    }
    group.finish();
}

criterion_group!(benches, norms, bands, picard, campaign);
criterion_main!(benches);
