use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qsl::runner::{run, run_plotdata, ExperimentConfig, Kind, RunManifest};
use qsl::QslError;

#[derive(Parser)]
#[command(name = "qsl", version, about = "Local smoothing and Picard iteration laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for the parallel core (0 keeps the default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct Common {
    /// Experiment config in TOML; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replace every seed in the config.
    #[arg(long)]
    seed_override: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Split a field into Littlewood-Paley bands.
    Decompose(Common),
    /// Compute X, Y and l^p X^s norms of a field.
    Norms(Common),
    /// Run the randomized inequality campaigns.
    VerifyEstimates(Common),
    /// Evolve a band datum under a frozen metric.
    SolveLinear(Common),
    /// Picard iteration for the quasilinear problem.
    SolveQuasilinear(Common),
    /// Run the acceptance criteria.
    AcceptanceSuite(Common),
    /// Gather plot tables from earlier run directories.
    EmitPlotdata {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

fn load(common: &Common, kind: Kind) -> Result<ExperimentConfig, QslError> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(k) = cfg.kind {
        if k != kind {
            return Err(QslError::Config {
                key: "kind".into(),
                message: format!("config is for `{}`, not `{}`", k.name(), kind.name()),
            });
        }
    }
    cfg.kind = Some(kind);
    if let Some(seed) = common.seed_override {
        cfg.override_seed(seed);
    }
    Ok(cfg)
}

fn report(manifest: &RunManifest, out: &Path) {
    if manifest.kind == Kind::AcceptanceSuite.name() {
        if let Ok(text) = std::fs::read_to_string(out.join("acceptance.json")) {
            let rows: Vec<serde_json::Value> = serde_json::from_str(&text).unwrap_or_default();
            for r in rows {
                println!(
                    "[{}] {:>2} {}: {}",
                    if r["passed"].as_bool() == Some(true) { "PASS" } else { "FAIL" },
                    r["id"],
                    r["name"].as_str().unwrap_or(""),
                    r["detail"].as_str().unwrap_or("")
                );
            }
        }
    }
    for a in &manifest.artifacts {
        println!("wrote {}", out.join(&a.path).display());
    }
    if let Some(e) = &manifest.error {
        eprintln!("error: {e}");
    }
    println!("{}", if manifest.passed { "checks passed" } else { "checks FAILED" });
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        qsl::par::set_threads(cli.threads);
    }
    let (kind, common) = match cli.command {
        Command::Decompose(c) => (Kind::Decompose, c),
        Command::Norms(c) => (Kind::Norms, c),
        Command::VerifyEstimates(c) => (Kind::VerifyEstimates, c),
        Command::SolveLinear(c) => (Kind::SolveLinear, c),
        Command::SolveQuasilinear(c) => (Kind::SolveQuasilinear, c),
        Command::AcceptanceSuite(c) => (Kind::AcceptanceSuite, c),
        Command::EmitPlotdata { out, inputs } => {
            let out = out.unwrap_or_else(|| PathBuf::from("out/plotdata"));
            return match run_plotdata(&inputs, &out) {
                Ok((manifest, outcome)) => {
                    for w in &outcome.warnings {
                        eprintln!("warning: {w}");
                    }
                    report(&manifest, &out);
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            };
        }
    };
    let cfg = match load(&common, kind) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let out = common.out.unwrap_or_else(|| PathBuf::from("out").join(kind.name()));
    match run(&cfg, &out) {
        Ok(manifest) => {
            report(&manifest, &out);
            if manifest.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
