use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::family::keyed_rng;
use super::{
    check_algebra, check_commutator, check_moser, check_trilinear, random_field, BandProfile, EstimateId,
    EstimateReport, Recipe, ScalarMap, SymbolMultiplier, TestFamily, TrilinearVariant,
};
use crate::error::Result;
use crate::evolve::MetricMap;
use crate::grid::{max_band, Grid, SampledField};
use crate::lp::sj_project;
use crate::par;

/// Campaign parameters; every key is optional in the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CampaignConfig {
    pub dimension: usize,
    pub length: f64,
    /// Spatial resolutions, coarse to fine.
    pub resolutions: Vec<usize>,
    pub nt: usize,
    pub seed: u64,
    pub samples: usize,
    pub estimates: Vec<EstimateId>,
    pub sigma: Vec<f64>,
    pub s: Vec<f64>,
    /// Output bands `k`, cycled over samples. Empty means `1..=top_band`.
    pub bands: Vec<usize>,
    /// Highest input band; defaults to one below the coarsest `j_max`.
    pub top_band: Option<usize>,
    pub amplitude: f64,
    pub window: Option<f64>,
    pub metric: MetricMap,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            dimension: 1,
            length: 2.0 * PI,
            resolutions: vec![128, 256],
            nt: 16,
            seed: 2024,
            samples: 200,
            estimates: EstimateId::ALL.to_vec(),
            sigma: vec![2.5],
            s: vec![2.5],
            bands: Vec::new(),
            top_band: None,
            amplitude: 0.1,
            window: Some(0.125),
            metric: MetricMap::default(),
        }
    }
}

impl CampaignConfig {
    fn top(&self) -> usize {
        let coarse = self.resolutions.iter().copied().min().unwrap_or(8);
        self.top_band
            .unwrap_or_else(|| (max_band(coarse, self.length) - 1).max(1) as usize)
    }

    fn output_bands(&self) -> Vec<usize> {
        if self.bands.is_empty() {
            (1..=self.top()).collect()
        } else {
            self.bands.clone()
        }
    }
}

/// Resolution behaviour of one estimate's max ratio.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    Bounded,
    /// The max ratio more than doubled under a refinement, or was not finite.
    Unbounded,
    Empty,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignSummary {
    pub estimate: EstimateId,
    pub sigma: f64,
    pub s: f64,
    pub d: usize,
    /// `(N, max ratio)` per resolution.
    pub max_ratio: Vec<(usize, f64)>,
    /// Max-ratio quotient between successive resolutions.
    pub growth: Vec<f64>,
    pub status: Growth,
    pub skipped: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CampaignTable {
    pub reports: Vec<EstimateReport>,
    pub summary: Vec<CampaignSummary>,
}

impl CampaignTable {
    /// One row per sample.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("estimate,n,d,sigma,s,k,index,lhs,rhs,ratio,skipped\n");
        for r in &self.reports {
            for s in &r.samples {
                let _ = writeln!(
                    out,
                    "{},{},{},{:.16e},{:.16e},{},{},{:.16e},{:.16e},{:.16e},{}",
                    r.estimate.name(),
                    r.params.n,
                    r.params.d,
                    r.params.sigma,
                    r.params.s,
                    s.k,
                    s.index,
                    s.lhs,
                    s.rhs,
                    s.ratio,
                    s.skipped
                );
            }
        }
        out
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.summary).expect("summary serializes")
    }

    pub fn all_bounded(&self) -> bool {
        self.summary.iter().all(|s| s.status != Growth::Unbounded)
    }
}

struct Sampler<'a> {
    cfg: &'a CampaignConfig,
    grid: &'a Grid,
    estimate: EstimateId,
    top: usize,
}

impl Sampler<'_> {
    fn field(&self, role: u64, index: usize, profile: BandProfile) -> SampledField {
        let family = TestFamily {
            seed: super::family::mix(self.cfg.seed, (self.estimate as u64) << 8 | role),
            count: self.cfg.samples,
            recipe: Recipe {
                profile,
                amplitude: self.cfg.amplitude,
                window: self.cfg.window,
                modulation: 0.25,
            },
        };
        random_field(&family, self.grid, index)
    }

    fn generic(&self, rng: &mut impl Rng) -> BandProfile {
        BandProfile::Decay {
            lo: 0,
            hi: self.top,
            rate: rng.gen_range(0.5..3.0),
        }
    }

    fn run(&self, index: usize, k: usize, sigma: f64, s: f64) -> Result<EstimateReport> {
        let mut rng = keyed_rng(&[self.cfg.seed, self.estimate as u64, index as u64, 17]);
        let kind = index / self.cfg.output_bands().len().max(1) % 3;
        let top = self.top;
        let single = |j: usize| BandProfile::Single { j: j.min(top) };
        match self.estimate {
            EstimateId::Algebra => {
                let (pu, pv) = match kind {
                    0 => (self.generic(&mut rng), self.generic(&mut rng)),
                    1 => (single(k), BandProfile::Flat { lo: 0, hi: 1 }),
                    _ => (single(k + rng.gen_range(0..=2)), single(rng.gen_range(0..=top))),
                };
                check_algebra(&self.field(0, index, pu), &self.field(1, index, pv), sigma, k)
            }
            EstimateId::Moser => {
                let f = [ScalarMap::Cube, ScalarMap::CubeAbs, ScalarMap::SinMinusId][index % 3];
                let pu = match kind {
                    0 => self.generic(&mut rng),
                    1 => single(k),
                    _ => BandProfile::Flat { lo: 0, hi: top },
                };
                check_moser(f, &self.field(0, index, pu), sigma, k)
            }
            EstimateId::Trilinear | EstimateId::TrilinearMixed | EstimateId::TrilinearHigh => {
                let (pu, pv, pw) = match kind {
                    0 => (self.generic(&mut rng), self.generic(&mut rng), self.generic(&mut rng)),
                    1 => {
                        // output and u comparable, v and w lower
                        let j = rng.gen_range(0..=k);
                        let l = rng.gen_range(0..=j);
                        (single(k), single(j), single(l))
                    }
                    _ => {
                        // u, v high and comparable, output lower
                        let i = rng.gen_range(k.saturating_sub(3)..=top.max(k.saturating_sub(3)));
                        let j = rng.gen_range(i.saturating_sub(3).max(k.saturating_sub(3))..=(i + 3).min(top).max(i));
                        (single(i), single(j), single(rng.gen_range(0..=top)))
                    }
                };
                let (u, v, w) = (self.field(0, index, pu), self.field(1, index, pv), self.field(2, index, pw));
                let (variant, sigma) = match self.estimate {
                    EstimateId::Trilinear => (TrilinearVariant::LowU, sigma),
                    EstimateId::TrilinearMixed => (TrilinearVariant::Mixed, sigma.min(s - 1.0)),
                    _ => (TrilinearVariant::HighPair, sigma),
                };
                check_trilinear(&u, &v, &w, sigma, s, k, variant)
            }
            EstimateId::Commutator => {
                let b = [
                    SymbolMultiplier::Wedge { axis: 1 },
                    SymbolMultiplier::Wedge { axis: 2 },
                    SymbolMultiplier::SmoothSign,
                ][index % 3];
                let w = self.field(0, index, BandProfile::Decay { lo: 0, hi: 2.min(top), rate: 1.0 });
                let u = self.field(1, index, single(k));
                let band = sj_project(&u, k)?;
                check_commutator(&w, b, &band, s, self.cfg.metric)
            }
        }
    }
}

/// Run every configured estimate over the parameter grid and resolutions.
/// Samples run in parallel; the table is assembled in a fixed order.
pub fn fuzz_campaign(cfg: &CampaignConfig) -> Result<CampaignTable> {
    let mut table = CampaignTable::default();
    if cfg.samples == 0 {
        return Ok(table);
    }
    let ks = cfg.output_bands();
    let top = cfg.top();
    for &estimate in &cfg.estimates {
        for &sigma in &cfg.sigma {
            for &s in &cfg.s {
                let mut per_res = Vec::new();
                let mut skipped = 0;
                for &n in &cfg.resolutions {
                    let grid = Grid::new(cfg.dimension, cfg.length, n, cfg.nt)?;
                    let sampler = Sampler {
                        cfg,
                        grid: &grid,
                        estimate,
                        top,
                    };
                    let runs = par::map_range(cfg.samples, |i| sampler.run(i, ks[i % ks.len()], sigma, s));
                    let mut report: Option<EstimateReport> = None;
                    for r in runs {
                        let r = r?;
                        match report.as_mut() {
                            Some(acc) => acc.extend(r),
                            None => report = Some(r),
                        }
                    }
                    let report = report.expect("at least one sample");
                    skipped += report.skipped();
                    per_res.push((n, report.max_ratio, report.is_finite()));
                    table.reports.push(report);
                }
                let growth: Vec<f64> = per_res.windows(2).map(|w| w[1].1 / w[0].1).collect();
                let finite = per_res.iter().all(|p| p.2);
                let status = if per_res.iter().all(|p| p.1 == 0.0) {
                    Growth::Empty
                } else if !finite || growth.iter().any(|g| !(*g <= 2.0)) {
                    Growth::Unbounded
                } else {
                    Growth::Bounded
                };
                table.summary.push(CampaignSummary {
                    estimate,
                    sigma,
                    s,
                    d: cfg.dimension,
                    max_ratio: per_res.iter().map(|p| (p.0, p.1)).collect(),
                    growth,
                    status,
                    skipped,
                });
            }
        }
    }
    Ok(table)
}
