//! Batch experiment runner: sweep many generated instances in parallel and
//! aggregate what happened.

use super::gen::{self, GenConfig};
use crate::arrangement::build_arrangement;
use crate::invariants;
use crate::sweep::{self, StopRule, SweepMode};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Clone, Debug, Serialize)]
pub struct BatchConfig {
    pub base: GenConfig,
    pub count: usize,
    pub mode: SweepMode,
    pub stop: StopRule,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct RunStats {
    pub seed: u64,
    pub curves: usize,
    pub steps: usize,
    pub ops: BTreeMap<String, usize>,
    /// Largest number of crossings between the sweep curve and any single
    /// other curve observed at any point of the run.
    pub max_sweep_crossings: usize,
    pub max_pairwise_crossings: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct BatchSummary {
    pub runs: Vec<RunStats>,
    pub failures: Vec<(u64, String)>,
    pub op_histogram: BTreeMap<String, usize>,
    pub max_sweep_crossings: usize,
}

pub fn run_one(cfg: &GenConfig, mode: SweepMode, stop: StopRule) -> Result<RunStats, String> {
    let family = gen::generate(cfg).map_err(|e| format!("generation failed: {e}"))?;
    let point = gen::default_inner_point(&family).ok_or("no interior point found")?;
    let sweep_name = gen::default_sweep_curve(&family).to_string();
    let mut arr = build_arrangement(family, &sweep_name, vec![("P".to_string(), point)])
        .map_err(|e| format!("build failed: {e}"))?;
    let rep0 = invariants::family_report(&arr);
    match mode {
        SweepMode::NonPiercing if !rep0.is_nonpiercing => return Err("generator invariant broken".into()),
        SweepMode::TwoIntersecting if !rep0.is_two_intersecting => {
            return Err("generator invariant broken".into())
        }
        _ => {}
    }
    let p = arr.tracked_by_name("P").unwrap();
    let trace =
        sweep::sweep(&mut arr, mode, Some(p), stop).map_err(|e| format!("sweep failed: {e}"))?;
    let mut ops = BTreeMap::new();
    let mut max_sweep = rep0.sweep_crossings.values().copied().max().unwrap_or(0);
    let mut max_pair = rep0.max_pairwise_crossings;
    for r in &trace.records {
        *ops.entry(r.op.kind().to_string()).or_insert(0usize) += 1;
        max_pair = max_pair.max(r.max_pairwise_crossings);
        match mode {
            SweepMode::NonPiercing => {
                if !r.nonpiercing {
                    return Err(format!("step {} broke non-piercing", r.step));
                }
            }
            SweepMode::TwoIntersecting => {
                if !r.two_intersecting {
                    return Err(format!("step {} broke two-intersection", r.step));
                }
            }
        }
        if r.point_inside != Some(true) {
            return Err(format!("step {} lost the tracked point", r.step));
        }
        if r.measure_after >= r.measure_before {
            return Err(format!("step {} did not decrease the measure", r.step));
        }
    }
    // Max sweep crossings across the run, recomputed from the per-step deltas.
    let mut current: BTreeMap<String, i64> =
        rep0.sweep_crossings.iter().map(|(k, v)| (k.clone(), *v as i64)).collect();
    for r in &trace.records {
        for (name, d) in &r.sweep_deltas {
            let e = current.entry(name.clone()).or_insert(0);
            *e += d;
            max_sweep = max_sweep.max(*e as usize);
        }
    }
    let stats = arr.stats();
    if stats.integrity_passes != stats.mutations {
        return Err("integrity pass count does not match mutation count".into());
    }
    Ok(RunStats {
        seed: cfg.seed,
        curves: cfg.n,
        steps: trace.records.len(),
        ops,
        max_sweep_crossings: max_sweep,
        max_pairwise_crossings: max_pair,
    })
}

pub fn run_batch(cfg: &BatchConfig) -> BatchSummary {
    let results: Vec<(u64, Result<RunStats, String>)> = (0..cfg.count)
        .into_par_iter()
        .map(|i| {
            let mut g = cfg.base.clone();
            g.seed = cfg.base.seed.wrapping_add(i as u64);
            (g.seed, run_one(&g, cfg.mode, cfg.stop))
        })
        .collect();
    let mut summary = BatchSummary::default();
    for (seed, r) in results {
        match r {
            Ok(stats) => {
                for (k, v) in &stats.ops {
                    *summary.op_histogram.entry(k.clone()).or_insert(0) += v;
                }
                summary.max_sweep_crossings = summary.max_sweep_crossings.max(stats.max_sweep_crossings);
                summary.runs.push(stats);
            }
            Err(e) => summary.failures.push((seed, e)),
        }
    }
    summary
}

/// CSV rendering of a summary: one row per run plus a trailing totals row.
pub fn summary_csv(s: &BatchSummary) -> String {
    let mut out = String::from("seed,curves,steps,take_loop,bypass_digon,bypass_triangle,bypass_vertex,max_sweep_crossings,max_pairwise\n");
    for r in &s.runs {
        let g = |k: &str| r.ops.get(k).copied().unwrap_or(0);
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.seed,
            r.curves,
            r.steps,
            g("take_loop"),
            g("bypass_digon"),
            g("bypass_triangle"),
            g("bypass_vertex"),
            r.max_sweep_crossings,
            r.max_pairwise_crossings
        ));
    }
    let g = |k: &str| s.op_histogram.get(k).copied().unwrap_or(0);
    out.push_str(&format!(
        "total,,{},{},{},{},{},{},\n",
        s.runs.iter().map(|r| r.steps).sum::<usize>(),
        g("take_loop"),
        g("bypass_digon"),
        g("bypass_triangle"),
        g("bypass_vertex"),
        s.max_sweep_crossings,
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::gen::GenKind;

    #[test]
    fn small_nonpiercing_batch_sweeps_clean() {
        let cfg = BatchConfig {
            base: GenConfig::new(GenKind::NonPiercing, 5, 1000),
            count: 12,
            mode: SweepMode::NonPiercing,
            stop: StopRule::Full,
        };
        let s = run_batch(&cfg);
        assert!(s.failures.is_empty(), "failures: {:?}", s.failures);
        assert_eq!(s.runs.len(), 12);
    }

    #[test]
    fn small_pseudocircle_batch_sweeps_clean() {
        let cfg = BatchConfig {
            base: GenConfig::new(GenKind::Pseudocircles, 6, 2000),
            count: 12,
            mode: SweepMode::TwoIntersecting,
            stop: StopRule::Full,
        };
        let s = run_batch(&cfg);
        assert!(s.failures.is_empty(), "failures: {:?}", s.failures);
    }
}
