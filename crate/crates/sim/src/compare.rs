//! Paired comparison of relay schemes on identical scenarios.
//!
//! For each seed the reference scheme (normally SpaceMeta) is compared with
//! every other scheme twice: on all pair samples each scheme measured, and on
//! the pair samples `(slot, session, user_i, user_j)` that both schemes
//! measured. Reductions are `(other - reference) / other * 100`, so positive
//! numbers mean the reference is better.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use spacemeta_core::metrics::{distribution_stats, DistributionStats};

use crate::pipeline::{run_all, RunOptions, SeedRun};
use crate::scenario::{Scenario, Scheme};
use crate::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideBySide {
    pub reference: Option<DistributionStats>,
    pub other: Option<DistributionStats>,
    pub mean_reduction_pct: Option<f64>,
    pub iqr_reduction_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedComparison {
    pub seed: u64,
    pub other: Scheme,
    pub all_pairs: SideBySide,
    pub common_pairs: SideBySide,
    pub common_pair_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl MeanStd {
    /// Sample mean and standard deviation (n - 1 denominator).
    pub fn of(xs: &[f64]) -> Option<MeanStd> {
        if xs.is_empty() {
            return None;
        }
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(MeanStd { mean, std, n })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeAggregate {
    pub other: Scheme,
    pub common_mean_reduction_pct: Option<MeanStd>,
    pub common_iqr_reduction_pct: Option<MeanStd>,
    pub all_mean_reduction_pct: Option<MeanStd>,
    pub all_iqr_reduction_pct: Option<MeanStd>,
    pub reference_mean_ms: Option<MeanStd>,
    pub other_mean_ms: Option<MeanStd>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub reference: Scheme,
    pub seeds: Vec<u64>,
    pub per_seed: Vec<SeedComparison>,
    pub aggregate: Vec<SchemeAggregate>,
}

impl ComparisonReport {
    pub fn aggregate_for(&self, other: Scheme) -> Option<&SchemeAggregate> {
        self.aggregate.iter().find(|a| a.other == other)
    }
}

fn reduction(reference: f64, other: f64) -> Option<f64> {
    (other != 0.0).then(|| (other - reference) / other * 100.0)
}

fn side_by_side(reference: &[f64], other: &[f64]) -> SideBySide {
    let r = distribution_stats(reference).ok();
    let o = distribution_stats(other).ok();
    let (mean_reduction_pct, iqr_reduction_pct) = match (&r, &o) {
        (Some(r), Some(o)) => (reduction(r.mean, o.mean), reduction(r.iqr, o.iqr)),
        _ => (None, None),
    };
    SideBySide {
        reference: r,
        other: o,
        mean_reduction_pct,
        iqr_reduction_pct,
    }
}

/// Compares one seed of the reference scheme against one seed of another.
pub fn compare_seed(reference: &SeedRun, other: &SeedRun) -> SeedComparison {
    let ref_keys: BTreeSet<_> = reference.pairs.iter().map(|p| p.key()).collect();
    let other_keys: BTreeSet<_> = other.pairs.iter().map(|p| p.key()).collect();
    let common = |run: &SeedRun| -> Vec<f64> {
        run.pairs
            .iter()
            .filter(|p| ref_keys.contains(&p.key()) && other_keys.contains(&p.key()))
            .map(|p| p.latency_ms)
            .collect()
    };
    let ref_common = common(reference);
    let other_common = common(other);
    SeedComparison {
        seed: reference.seed,
        other: other.scheme,
        all_pairs: side_by_side(&reference.latencies(), &other.latencies()),
        common_pair_count: ref_common.len(),
        common_pairs: side_by_side(&ref_common, &other_common),
    }
}

/// Builds the report from finished runs. Seeds present for the reference
/// but missing for another scheme are skipped for that scheme.
pub fn compare_runs(reference: Scheme, runs: &BTreeMap<Scheme, Vec<SeedRun>>) -> ComparisonReport {
    let empty = Vec::new();
    let refs = runs.get(&reference).unwrap_or(&empty);
    let mut per_seed = Vec::new();
    let mut aggregate = Vec::new();
    for (&scheme, others) in runs {
        if scheme == reference {
            continue;
        }
        let rows: Vec<SeedComparison> = refs
            .iter()
            .filter_map(|r| {
                others
                    .iter()
                    .find(|o| o.seed == r.seed)
                    .map(|o| compare_seed(r, o))
            })
            .collect();
        let collect = |f: &dyn Fn(&SeedComparison) -> Option<f64>| {
            MeanStd::of(&rows.iter().filter_map(f).collect::<Vec<_>>())
        };
        aggregate.push(SchemeAggregate {
            other: scheme,
            common_mean_reduction_pct: collect(&|c| c.common_pairs.mean_reduction_pct),
            common_iqr_reduction_pct: collect(&|c| c.common_pairs.iqr_reduction_pct),
            all_mean_reduction_pct: collect(&|c| c.all_pairs.mean_reduction_pct),
            all_iqr_reduction_pct: collect(&|c| c.all_pairs.iqr_reduction_pct),
            reference_mean_ms: collect(&|c| c.common_pairs.reference.as_ref().map(|s| s.mean)),
            other_mean_ms: collect(&|c| c.common_pairs.other.as_ref().map(|s| s.mean)),
        });
        per_seed.extend(rows);
    }
    ComparisonReport {
        reference,
        seeds: refs.iter().map(|r| r.seed).collect(),
        per_seed,
        aggregate,
    }
}

/// Runs every scenario and compares the others against `scenarios[0]`.
pub fn compare_scenarios(
    scenarios: &[Scenario],
    opts: &RunOptions,
) -> Result<(ComparisonReport, BTreeMap<Scheme, Vec<SeedRun>>), HarnessError> {
    let first = scenarios
        .first()
        .ok_or_else(|| HarnessError::Config("no scenarios to compare".into()))?;
    if scenarios.iter().any(|s| !s.same_except_scheme(first)) {
        return Err(HarnessError::MismatchedScenarios);
    }
    let mut runs = BTreeMap::new();
    for s in scenarios {
        if runs.contains_key(&s.scheme) {
            return Err(HarnessError::Config(format!(
                "scheme `{}` listed twice",
                s.scheme
            )));
        }
        runs.insert(s.scheme, run_all(s, opts)?);
    }
    Ok((compare_runs(first.scheme, &runs), runs))
}
