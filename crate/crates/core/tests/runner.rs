use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use qsl::grid::{write_field, Grid, SampledField, C64};
use qsl::runner::{run, run_plotdata, ExperimentConfig, FieldConfig, Kind, RunManifest, MANIFEST_NAME};
use qsl::QslError;

fn config(kind: Kind) -> ExperimentConfig {
    let mut cfg = ExperimentConfig {
        kind: Some(kind),
        seed: 11,
        ..Default::default()
    };
    cfg.grid.n = 64;
    cfg.grid.nt = 9;
    cfg.campaign.resolutions = vec![32, 64];
    cfg.campaign.samples = 12;
    cfg.campaign.nt = 5;
    cfg
}

fn files(dir: &Path) -> BTreeSet<String> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect()
}

#[test]
fn toml_round_trip_and_rejection() {
    let cfg = config(Kind::SolveQuasilinear);
    let back = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
    assert_eq!(back, cfg);
    let partial = ExperimentConfig::from_toml("kind = \"norms\"\n[grid]\nn = 128\n").unwrap();
    assert_eq!(partial.grid.n, 128);
    assert_eq!(partial.grid.nt, ExperimentConfig::default().grid.nt);
    match ExperimentConfig::from_toml("[grid]\nsize = 3\n") {
        Err(QslError::Config { key, .. }) => assert_eq!(key, "size"),
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        ExperimentConfig::from_toml("[quasilinear]\nepsilon = \"big\"\n"),
        Err(QslError::Config { .. })
    ));
}

#[test]
fn config_errors_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let mut cfg = config(Kind::Norms);
    cfg.kind = None;
    assert!(matches!(run(&cfg, &out), Err(QslError::Config { .. })));
    let mut cfg = config(Kind::Norms);
    cfg.grid.n = 6;
    assert!(matches!(run(&cfg, &out), Err(QslError::Config { .. })));
    assert!(!out.exists());
}

#[test]
fn runs_are_deterministic_and_manifests_verify() {
    for kind in [Kind::Decompose, Kind::Norms, Kind::VerifyEstimates, Kind::SolveLinear, Kind::SolveQuasilinear] {
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a"), dir.path().join("b"));
        let cfg = config(kind);
        let ma = run(&cfg, &a).unwrap();
        let mb = run(&cfg, &b).unwrap();
        assert!(ma.passed, "{kind:?} {:?}", ma.error);
        assert_eq!(ma.artifacts, mb.artifacts, "{kind:?}");
        for art in &ma.artifacts {
            assert_eq!(std::fs::read(a.join(&art.path)).unwrap(), std::fs::read(b.join(&art.path)).unwrap());
        }
        let loaded = RunManifest::load(&a).unwrap();
        assert!(loaded.verify(&a).is_empty());
        assert_eq!(loaded.config, cfg);
        // no file escapes the manifest
        let mut listed: BTreeSet<String> = ma.artifacts.iter().map(|x| x.path.clone()).collect();
        listed.insert(MANIFEST_NAME.into());
        assert_eq!(files(&a), listed, "{kind:?}");
        std::fs::write(a.join(&ma.artifacts[0].path), b"tampered").unwrap();
        assert_eq!(loaded.verify(&a), vec![ma.artifacts[0].path.clone()]);
    }
}

#[test]
fn seed_override_changes_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(Kind::Norms);
    let mut other = cfg.clone();
    other.override_seed(12);
    let a = run(&cfg, &dir.path().join("a")).unwrap();
    let b = run(&other, &dir.path().join("b")).unwrap();
    assert_ne!(a.artifacts[0].sha256, b.artifacts[0].sha256);
}

#[test]
fn band_energies_sum_to_total() {
    let dir = tempfile::tempdir().unwrap();
    run(&config(Kind::Decompose), dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join("bands.csv")).unwrap();
    let sum: f64 = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .sum();
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("decompose.json")).unwrap()).unwrap();
    let total = summary["total"].as_f64().unwrap();
    assert!((sum - total).abs() < 1e-10 * total);
}

#[test]
fn field_files_resolve_against_the_data_dir() {
    let dir = tempfile::tempdir().unwrap();
    let g = Grid::new(1, 2.0 * std::f64::consts::PI, 64, 9).unwrap();
    let u = SampledField::from_fn(&g, |t, x| C64::new((3.0 * x[0]).cos(), t));
    let mut bytes = Vec::new();
    write_field(&mut bytes, &u).unwrap();
    std::fs::write(dir.path().join("wave.qslf"), bytes).unwrap();
    let mut cfg = config(Kind::Decompose);
    cfg.field = FieldConfig::File {
        path: dir.path().join("wave.qslf"),
    };
    let m = run(&cfg, &dir.path().join("out")).unwrap();
    assert!(m.passed);
    cfg.field = FieldConfig::File {
        path: PathBuf::from("missing.qslf"),
    };
    let m = run(&cfg, &dir.path().join("out2")).unwrap();
    assert!(!m.passed && m.error.is_some());
}

#[test]
fn quasilinear_failure_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(Kind::SolveQuasilinear);
    cfg.quasilinear.epsilon = 500.0;
    let m = run(&cfg, dir.path()).unwrap();
    assert!(!m.passed);
    assert!(m.error.is_some());
    assert!(RunManifest::load(dir.path()).unwrap().verify(dir.path()).is_empty());
}

#[test]
fn plot_tables() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("src");
    std::fs::create_dir_all(&src).unwrap();
    let mut history = String::from("n,norm_u,norm_v,ratio\n1,1.0,1.0,\n");
    for n in 2..=6 {
        history.push_str(&format!("{n},1.0,{},{}\n", 0.1f64.powi(n - 1), 0.1));
    }
    std::fs::write(src.join("history.csv"), history).unwrap();
    std::fs::write(src.join("envelopes.csv"), "j,a_j,b_j\n0,1.0,1.1\n1,0.5,0.6\n2,0.25,0.2\n").unwrap();
    let out = dir.path().join("plots");
    let (manifest, outcome) = run_plotdata(&[src.clone()], &out).unwrap();
    assert!(outcome.warnings.is_empty());
    assert!(manifest.verify(&out).is_empty());
    let contraction = std::fs::read_to_string(out.join("plot_contraction.csv")).unwrap();
    assert_eq!(contraction.lines().count(), 1 + 5);
    let env = std::fs::read_to_string(out.join("plot_envelopes.csv")).unwrap();
    let count = |s: &str| env.lines().filter(|l| l.ends_with(s)).count();
    assert_eq!(count(",a_j"), count(",b_j"));
    assert_eq!(count(",a_j"), 3);

    let empty = dir.path().join("empty");
    std::fs::create_dir_all(&empty).unwrap();
    std::fs::write(empty.join("history.csv"), "n,norm_u,norm_v,ratio\n").unwrap();
    let (_, outcome) = run_plotdata(&[empty, dir.path().join("nowhere")], &dir.path().join("p2")).unwrap();
    assert_eq!(outcome.warnings.len(), 2, "{:?}", outcome.warnings);
}

mod props {
    use proptest::prelude::*;
    use qsl::runner::{to_json, ExperimentConfig, Kind};

    proptest! {
        #[test]
        fn json_floats_round_trip_exactly(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL) {
            let text = to_json(&vec![x]).unwrap();
            let back: Vec<f64> = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back[0].to_bits(), x.to_bits());
        }

        #[test]
        fn configs_round_trip(seed in 0u64..1 << 53, n in 8usize..512, eps in 1e-4f64..0.1, band in 0usize..6) {
            let mut cfg = ExperimentConfig { kind: Some(Kind::SolveLinear), seed, ..Default::default() };
            cfg.grid.n = n;
            cfg.quasilinear.epsilon = eps;
            cfg.linear.band = Some(band);
            prop_assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        }
    }
}
