use serde::Serialize;

use super::config::{resolve_data_path, DatumConfig, ExperimentConfig, FieldConfig};
use super::manifest::ArtifactWriter;
use crate::cubes::{lp_xs_norm, lp_ys_upper, x_norm, xs_norm, y_upper, ys_upper, CubeSum};
use crate::error::{QslError, Result};
use crate::estimator::{envelope_delta, fuzz_campaign, random_field, BandProfile, Recipe, TestFamily};
use crate::evolve::{
    energy_check, local_smoothing_report, solve_linear, LinearProblem, Localization, MetricField,
};
use crate::grid::{read_field, write_field, l2l2, Grid, SampledField, C64};
use crate::iterate::{envelope_propagation, history_csv, pde_residual, picard_solve, QuasilinearSpec};
use crate::lp::{band_table, envelope_of, EnvelopeNorm};

/// Outcome of one experiment body: whether its internal checks passed.
pub(crate) type Checked = Result<bool>;

pub(crate) fn load_field(cfg: &ExperimentConfig, grid: &Grid) -> Result<SampledField> {
    match &cfg.field {
        FieldConfig::Random { recipe } => {
            let family = TestFamily {
                seed: cfg.seed,
                count: 1,
                recipe: recipe.clone(),
            };
            Ok(random_field(&family, grid, 0))
        }
        FieldConfig::File { path } => {
            let file = std::fs::File::open(resolve_data_path(path))?;
            read_field(std::io::BufReader::new(file))
        }
    }
}

fn field_bytes(u: &SampledField) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    write_field(&mut out, u)?;
    Ok(out)
}

/// Per-band energies `Re <S_j u, u>_{L2 L2}`, which sum to `||u||^2`.
pub(crate) fn decompose(cfg: &ExperimentConfig, w: &mut ArtifactWriter) -> Checked {
    let grid = cfg.grid.build()?;
    let u = load_field(cfg, &grid)?;
    let g = u.grid();
    let mut csv = String::from("j,energy\n");
    let mut sum = 0.0;
    for j in 0..=g.j_max() {
        let e = u.apply_table(band_table(g, j)?).spacetime_inner(&u).re;
        sum += e;
        csv.push_str(&format!("{j},{e:.16e}\n"));
    }
    let total = l2l2(&u).powi(2);
    let defect = (sum - total).abs() / total.max(f64::MIN_POSITIVE);
    w.write("bands.csv", csv.as_bytes())?;
    #[derive(Serialize)]
    struct Summary {
        j_max: usize,
        total: f64,
        band_sum: f64,
        relative_defect: f64,
    }
    w.write_json(
        "decompose.json",
        &Summary {
            j_max: g.j_max(),
            total,
            band_sum: sum,
            relative_defect: defect,
        },
    )?;
    Ok(defect < 1e-10)
}

pub(crate) fn norms(cfg: &ExperimentConfig, w: &mut ArtifactWriter) -> Checked {
    let grid = cfg.grid.build()?;
    let u = load_field(cfg, &grid)?;
    let s = cfg.norms.s;
    let reports = vec![
        x_norm(&u),
        y_upper(&u),
        xs_norm(&u, s),
        ys_upper(&u, s),
        lp_xs_norm(&u, CubeSum::Two, s),
        lp_ys_upper(&u, CubeSum::Two, s),
    ];
    let json: Vec<serde_json::Value> = reports.iter().map(|r| r.to_json()).collect();
    w.write_json("norms.json", &json)?;
    let env = envelope_of(&u, EnvelopeNorm::L2X { s }, envelope_delta(s, grid.dim()));
    w.write("envelope.csv", env.to_csv().as_bytes())?;
    Ok(reports.iter().all(|r| r.value.is_finite()))
}

pub(crate) fn verify_estimates(cfg: &ExperimentConfig, w: &mut ArtifactWriter) -> Checked {
    let table = fuzz_campaign(&cfg.campaign)?;
    w.write("campaign.csv", table.to_csv().as_bytes())?;
    w.write_json("campaign_summary.json", &table.summary_json())?;
    Ok(table.all_bounded())
}

fn band_field(grid: &Grid, seed: u64, profile: BandProfile, amplitude: f64, modulation: f64) -> SampledField {
    let mut recipe = Recipe::new(profile, amplitude);
    recipe.modulation = modulation;
    random_field(&TestFamily { seed, count: 1, recipe }, grid, 0)
}

pub(crate) fn solve_linear_run(cfg: &ExperimentConfig, w: &mut ArtifactWriter) -> Checked {
    let grid = cfg.grid.build()?;
    let lc = &cfg.linear;
    let (loc, profile) = match lc.band {
        Some(j) => (Localization::Band(j), BandProfile::Single { j }),
        None => (Localization::Global, BandProfile::Flat { lo: 1, hi: 4 }),
    };
    let datum = band_field(&grid, cfg.seed, profile.clone(), lc.amplitude, 0.0);
    let mut datum = datum.slice(0).to_vec();
    grid.dealias(&mut datum);
    let metric = if lc.metric_amplitude > 0.0 {
        let wf = band_field(&grid, cfg.seed ^ 1, BandProfile::Flat { lo: 0, hi: 2 }, lc.metric_amplitude, 0.25);
        MetricField::from_map(lc.metric, &wf)
    } else {
        MetricField::identity(&grid)
    };
    let mut problem = LinearProblem::new(metric, loc, datum);
    if lc.forcing_amplitude > 0.0 {
        problem = problem.with_forcing(band_field(&grid, cfg.seed ^ 2, profile, lc.forcing_amplitude, 0.25));
    }
    let u = solve_linear(&problem)?;
    w.write("trajectory.qslf", &field_bytes(&u)?)?;
    let mut ok = u.is_finite();
    if problem.band().is_some() {
        let energy = energy_check(&problem, &u)?;
        if lc.forcing_amplitude == 0.0 {
            ok &= energy.drift < 1e-6;
        }
        w.write_json("energy.json", &energy)?;
        let smoothing = local_smoothing_report(&problem, &u, lc.s)?;
        w.write_json("local_smoothing.json", &smoothing)?;
    }
    Ok(ok)
}

pub(crate) fn quasilinear_spec(cfg: &ExperimentConfig, grid: &Grid) -> QuasilinearSpec {
    let qc = &cfg.quasilinear;
    let s = qc.s.unwrap_or_else(|| QuasilinearSpec::default_s(qc.form, grid.dim()));
    let spec = match &qc.datum {
        DatumConfig::PlaneWave { amplitude, k } => {
            let datum = (0..grid.spatial_len())
                .map(|p| C64::from_polar(*amplitude, k * grid.point(p)[0]))
                .collect();
            QuasilinearSpec::new(qc.form, datum, s, qc.epsilon)
        }
        DatumConfig::Random { recipe } => {
            let family = TestFamily {
                seed: cfg.seed,
                count: 1,
                recipe: recipe.clone(),
            };
            let mut d = random_field(&family, grid, 0).slice(0).to_vec();
            grid.dealias(&mut d);
            QuasilinearSpec::scaled(qc.form, &d, grid, s, qc.epsilon)
        }
    };
    spec.with_metric(qc.metric).with_nonlinearity(qc.nonlinearity)
}

pub(crate) fn solve_quasilinear(cfg: &ExperimentConfig, w: &mut ArtifactWriter) -> Checked {
    let grid = cfg.grid.build()?;
    let spec = quasilinear_spec(cfg, &grid);
    let qc = &cfg.quasilinear;
    let out = match picard_solve(&spec, &grid, qc.tol, qc.max_iter) {
        Ok(out) => out,
        Err(e @ QslError::Contraction { .. }) => {
            w.write("error.txt", e.to_string().as_bytes())?;
            return Err(e);
        }
        Err(e) => return Err(e),
    };
    w.write("history.csv", history_csv(&out.history).as_bytes())?;
    w.write("solution.qslf", &field_bytes(&out.u)?)?;
    let env = envelope_propagation(&spec, &out.u)?;
    let mut env_csv = String::from("j,a_j,b_j\n");
    for (j, (a, b)) in env.a.entries.iter().zip(&env.b.entries).enumerate() {
        env_csv.push_str(&format!("{j},{a:.16e},{b:.16e}\n"));
    }
    w.write("envelopes.csv", env_csv.as_bytes())?;
    #[derive(Serialize)]
    struct Summary {
        converged: bool,
        iterations: usize,
        bound_constant: f64,
        pde_residual: f64,
        envelope_ratio: f64,
        envelope_flagged: bool,
    }
    let summary = Summary {
        converged: out.converged,
        iterations: out.history.len(),
        bound_constant: out.bound_constant,
        pde_residual: pde_residual(&spec, &out.u),
        envelope_ratio: env.max_ratio,
        envelope_flagged: env.flagged,
    };
    w.write_json("quasilinear.json", &summary)?;
    Ok(out.converged && !env.flagged)
}
