//! Replicate scheduling and estimator assembly.
//!
//! Replicate `r` draws from `stream_rng(seed, "replicate", r)` at every grid
//! point, so different bias values share random numbers. Replicates run on a
//! rayon pool; per-replicate outputs are collected in index order, and in
//! `bit_exact` mode every reduction runs sequentially in that order.

use erw_core::estimators::{
    derivative_finite_time, derivative_regenerative_grouped, novelty_rate, range_rate,
    simulate_cycles, simulate_summary, speed_difference, speed_finite_time,
    speed_regenerative_grouped, truncated_rate, CycleMoments, PathSummary,
};
use erw_core::renewal::ConfirmPolicy;
use erw_core::rng::stream_rng;
use erw_core::walk::WalkParams;
use erw_core::EstimateSummary;
use rayon::prelude::*;

use crate::config::{EstimatorKind, ExperimentConfig};
use crate::error::{LabError, LabResult};
use crate::results::{PointParams, ResultRecord, ResultSet};

/// Everything one replicate contributes at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Replicate {
    pub summary: PathSummary,
    pub cycles: CycleMoments,
    /// Cycle totals at `beta + h` and `beta - h` on the same random numbers.
    pub shifted: Option<(CycleMoments, CycleMoments)>,
}

/// Runs `f(r)` for `r in 0..count` on `workers` threads (all cores when
/// `None`); the output is in index order.
pub fn run_replicates<T, F>(count: u64, workers: Option<usize>, f: F) -> LabResult<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> LabResult<T> + Sync + Send,
{
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| LabError::Failed(format!("thread pool: {e}")))?;
    pool.install(|| (0..count).into_par_iter().map(&f).collect())
}

fn simulate_replicate(
    cfg: &ExperimentConfig,
    params: &WalkParams,
    r: u64,
) -> erw_core::Result<Replicate> {
    let regenerative = cfg.estimators.iter().any(|e| e.regenerative());
    let policy = ConfirmPolicy::with_margin(cfg.margin);
    let rng = || stream_rng(cfg.seed, "replicate", r);
    if !regenerative {
        return Ok(Replicate {
            summary: simulate_summary(params, cfg.n, &cfg.windows, &mut rng())?,
            cycles: CycleMoments::default(),
            shifted: None,
        });
    }
    let path = simulate_cycles(params, cfg.n, policy, &mut rng())?;
    let mut summary = path.summary;
    if !cfg.windows.is_empty() {
        summary.windows = simulate_summary(params, cfg.n, &cfg.windows, &mut rng())?.windows;
    }
    let shifted = match (
        cfg.estimators
            .contains(&EstimatorKind::DerivativeDifference),
        cfg.h,
    ) {
        (true, Some(h)) => {
            let at = |b: f64| -> erw_core::Result<CycleMoments> {
                let p = params.with_beta(b)?;
                Ok(CycleMoments::total(
                    &simulate_cycles(&p, cfg.n, policy, &mut rng())?.cycles,
                ))
            };
            Some((at(params.beta + h)?, at(params.beta - h)?))
        }
        _ => None,
    };
    Ok(Replicate {
        summary,
        cycles: CycleMoments::total(&path.cycles),
        shifted,
    })
}

/// Mean of `f` over replicates; ordered push in bit-exact mode, a parallel
/// fold and merge otherwise.
fn summarize<F>(
    cfg: &ExperimentConfig,
    label: &str,
    reps: &[Replicate],
    f: F,
) -> LabResult<EstimateSummary>
where
    F: Fn(&Replicate) -> f64 + Sync,
{
    if cfg.bit_exact {
        return Ok(EstimateSummary::from_values(label, reps.iter().map(f)));
    }
    reps.par_iter()
        .fold(
            || EstimateSummary::empty(label),
            |mut s, r| {
                s.push(f(r));
                s
            },
        )
        .map(Ok)
        .reduce(
            || Ok(EstimateSummary::empty(label)),
            |a, b| Ok(a?.merge(&b?)?),
        )
}

fn point(cfg: &ExperimentConfig, beta: f64) -> PointParams {
    PointParams {
        d: cfg.d,
        m: cfg.effective_m(),
        beta,
        n: cfg.n,
    }
}

fn estimate_point(
    cfg: &ExperimentConfig,
    params: &WalkParams,
    grid_index: u64,
    reps: &[Replicate],
) -> LabResult<Vec<ResultRecord>> {
    let at = |e: erw_core::Error| LabError::AtGridPoint {
        beta: params.beta,
        source: e,
    };
    let pp = point(cfg, params.beta);
    let n = cfg.n as f64;
    let paths: Vec<PathSummary> = reps.iter().map(|r| r.summary.clone()).collect();
    let groups: Vec<CycleMoments> = reps.iter().map(|r| r.cycles).collect();
    let mut out = Vec::new();
    for kind in &cfg.estimators {
        match kind {
            EstimatorKind::Speed => {
                let (a, b) = if cfg.bit_exact {
                    speed_finite_time(&paths, params).map_err(at)?
                } else {
                    let scale = params.beta / params.d as f64;
                    (
                        summarize(cfg, "speed_displacement", reps, |r| {
                            r.summary.x_n as f64 / n
                        })?,
                        summarize(cfg, "speed_excitation", reps, |r| {
                            scale * r.summary.excited as f64 / n
                        })?,
                    )
                };
                out.push(ResultRecord::from_summary(&a, pp, "mean of X_n/n"));
                out.push(ResultRecord::from_summary(
                    &b,
                    pp,
                    "drift times excited fraction",
                ));
            }
            EstimatorKind::Derivative => {
                let e = derivative_finite_time(&paths, params).map_err(at)?;
                out.push(ResultRecord::from_estimate(&e, pp));
            }
            EstimatorKind::SpeedRegenerative => {
                let e = speed_regenerative_grouped(&groups).map_err(at)?;
                out.push(ResultRecord::from_estimate(&e, pp));
            }
            EstimatorKind::DerivativeRegenerative => {
                let mut rng = stream_rng(cfg.seed, "bootstrap", grid_index);
                let e = derivative_regenerative_grouped(&groups, params, cfg.bootstrap, &mut rng)
                    .map_err(at)?;
                out.push(ResultRecord::from_estimate(&e, pp));
            }
            EstimatorKind::DerivativeDifference => {
                let (plus, minus): (Vec<_>, Vec<_>) = reps
                    .iter()
                    .map(|r| r.shifted.expect("shifted runs requested"))
                    .unzip();
                let e = speed_difference(&plus, &minus, cfg.h.expect("validated")).map_err(at)?;
                out.push(ResultRecord::from_estimate(&e, pp));
            }
            EstimatorKind::Range => {
                let s = if cfg.bit_exact {
                    range_rate(&paths).map_err(at)?
                } else {
                    summarize(cfg, "range_rate", reps, |r| r.summary.range as f64 / n)?
                };
                out.push(ResultRecord::from_summary(&s, pp, "mean of R_n/n"));
            }
            EstimatorKind::Novelty => {
                let s = if cfg.bit_exact {
                    novelty_rate(&paths).map_err(at)?
                } else {
                    summarize(cfg, "novelty_rate", reps, |r| r.summary.novel as f64 / n)?
                };
                out.push(ResultRecord::from_summary(&s, pp, "mean of N_n/n"));
            }
            EstimatorKind::Truncated => {
                for &k in &cfg.windows {
                    let mut s = truncated_rate(&paths, k).map_err(at)?;
                    s.label = format!("truncated_rate_k{k}");
                    out.push(ResultRecord::from_summary(
                        &s,
                        pp,
                        "mean of windowed novelty N^(k)_n/n",
                    ));
                }
            }
        }
    }
    Ok(out)
}

/// Runs every requested estimator at every grid point.
pub fn run_experiment(cfg: &ExperimentConfig) -> LabResult<ResultSet> {
    cfg.validate()?;
    let mut set = ResultSet::new(cfg.clone());
    for (g, beta) in cfg.betas()?.into_iter().enumerate() {
        let params = cfg.params(beta)?;
        let reps = run_replicates(cfg.replicates, cfg.workers, |r| {
            simulate_replicate(cfg, &params, r)
                .map_err(|e| LabError::AtGridPoint { beta, source: e })
        })?;
        set.results
            .extend(estimate_point(cfg, &params, g as u64, &reps)?);
    }
    Ok(set)
}

/// Pairwise merge of two summaries, reported as a harness error on label
/// mismatch.
pub fn merge(a: &EstimateSummary, b: &EstimateSummary) -> LabResult<EstimateSummary> {
    Ok(a.merge(b)?)
}
