//! Sweep of the dispersion weight α.

use serde::{Deserialize, Serialize};
use spacemeta_core::metrics::{distribution_stats, spearman_rho};

use crate::pipeline::{run_all, RunOptions};
use crate::scenario::Scenario;
use crate::HarnessError;

pub const DEFAULT_ALPHAS: [f64; 4] = [1.0, 5.0, 10.0, 20.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub alpha: f64,
    pub seed: u64,
    pub mean_latency_ms: f64,
    pub mean_dispersion_ms: f64,
    pub iqr_ms: f64,
    pub pair_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedTrend {
    pub seed: u64,
    /// Rank correlation between α and mean session dispersion.
    pub rho_dispersion: f64,
    /// Rank correlation between α and mean pair latency.
    pub rho_latency: f64,
}

impl SeedTrend {
    pub fn expected_direction(&self) -> bool {
        self.rho_dispersion <= 0.0 && self.rho_latency >= 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub alphas: Vec<f64>,
    pub points: Vec<SweepPoint>,
    pub trends: Vec<SeedTrend>,
}

impl SweepReport {
    pub fn seeds_in_expected_direction(&self) -> usize {
        self.trends
            .iter()
            .filter(|t| t.expected_direction())
            .count()
    }
}

/// Runs the scenario once per α and reports per-seed trends.
pub fn sweep_alpha(
    scenario: &Scenario,
    alphas: &[f64],
    opts: &RunOptions,
) -> Result<SweepReport, HarnessError> {
    if alphas.len() < 2 {
        return Err(HarnessError::Config(
            "an alpha sweep needs at least two values".into(),
        ));
    }
    let mut points = Vec::new();
    for &alpha in alphas {
        let mut s = scenario.clone();
        s.selection.alpha = alpha;
        for run in run_all(&s, opts)? {
            let stats = distribution_stats(&run.latencies()).ok();
            points.push(SweepPoint {
                alpha,
                seed: run.seed,
                mean_latency_ms: stats.as_ref().map_or(f64::NAN, |s| s.mean),
                mean_dispersion_ms: run.mean_dispersion().unwrap_or(f64::NAN),
                iqr_ms: stats.as_ref().map_or(f64::NAN, |s| s.iqr),
                pair_samples: run.pairs.len(),
            });
        }
    }
    let trends = scenario
        .seeds
        .iter()
        .map(|&seed| {
            let series: Vec<&SweepPoint> = points.iter().filter(|p| p.seed == seed).collect();
            let a: Vec<f64> = series.iter().map(|p| p.alpha).collect();
            let d: Vec<f64> = series.iter().map(|p| p.mean_dispersion_ms).collect();
            let l: Vec<f64> = series.iter().map(|p| p.mean_latency_ms).collect();
            SeedTrend {
                seed,
                rho_dispersion: spearman_rho(&a, &d),
                rho_latency: spearman_rho(&a, &l),
            }
        })
        .collect();
    Ok(SweepReport {
        alphas: alphas.to_vec(),
        points,
        trends,
    })
}
