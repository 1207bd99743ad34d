//! Speed, speed derivative, range and windowed novelty estimators.
//!
//! Finite-time estimators work on per-replicate [`PathSummary`] values.
//! Regenerative estimators work on cycles between renewal times, either one
//! cycle per resampling unit or pre-aggregated [`CycleMoments`] per
//! replicate.

use alloc::string::String;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::renewal::{detect_direct_xs, extract_cycles_xs, ConfirmPolicy, Cycle, RenewalRecord};
use crate::rng::below;
use crate::stats::{CompensatedSum, Estimate, EstimateSummary};
use crate::walk::{WalkKind, WalkParams, Walker};
use crate::weights::{WeightState, WeightTrace};

/// What one replicate contributes to the finite-time estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSummary {
    pub n: u64,
    pub x_n: i64,
    /// `N_n`: first visits among `Y_0..Y_{n-1}`.
    pub novel: u64,
    /// Excited steps among `0..n` (equal to `novel` when `m = 1`).
    pub excited: u64,
    /// Distinct sites among `Y_0..Y_n`.
    pub range: u64,
    /// `V_n` at the simulated bias, over excitation flags.
    pub v_score: f64,
    /// `(k, N^(k)_n)` for every requested window.
    pub windows: Vec<(u64, u64)>,
}

impl PathSummary {
    pub fn window(&self, k: u64) -> Option<u64> {
        self.windows.iter().find(|&&(w, _)| w == k).map(|&(_, c)| c)
    }
}

fn needs_full_map(params: &WalkParams, windows: &[u64]) -> bool {
    !windows.is_empty()
        || (params.kind == WalkKind::MErw
            && matches!(params.m, crate::walk::Excitation::Finite(m) if m.get() > 1))
}

fn walker_for(params: &WalkParams, windows: &[u64]) -> Result<Walker> {
    if needs_full_map(params, windows) {
        Walker::new(*params)
    } else {
        Walker::novelty_only(*params)
    }
}

/// Runs one walk and summarizes it after each of the (sorted) `checkpoints`.
pub fn simulate_summaries<R: RngCore + ?Sized>(
    params: &WalkParams,
    checkpoints: &[u64],
    windows: &[u64],
    rng: &mut R,
) -> Result<Vec<PathSummary>> {
    if windows.contains(&0) {
        return Err(Error::InvalidParams("window k must be at least 1"));
    }
    if checkpoints.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParams("checkpoints must be sorted"));
    }
    let mut walker = walker_for(params, windows)?;
    let beta = params.beta;
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut weight = WeightState::new();
    let mut novel = 0u64;
    let mut excited = 0u64;
    let mut window_counts: Vec<u64> = alloc::vec![0; windows.len()];
    let mut x = 0i64;
    let mut next = checkpoints.iter().peekable();
    loop {
        while next.peek().is_some_and(|&&c| c == walker.time()) {
            next.next();
            out.push(PathSummary {
                n: walker.time(),
                x_n: x,
                novel,
                excited,
                range: walker.range().unwrap_or(0) as u64,
                v_score: weight.v_score,
                windows: windows
                    .iter()
                    .copied()
                    .zip(window_counts.iter().copied())
                    .collect(),
            });
        }
        if next.peek().is_none() {
            return Ok(out);
        }
        let step = walker.step(rng)?;
        let history = step.history.unwrap_or(crate::walk::SiteHistory::FRESH);
        x += i64::from(step.eps);
        novel += u64::from(history.novel());
        excited += u64::from(step.excited);
        for (count, &k) in window_counts.iter_mut().zip(windows) {
            *count += u64::from(history.window_novel(k));
        }
        weight.push(step.eps, step.excited, beta, beta)?;
    }
}

/// Single-horizon form of [`simulate_summaries`].
pub fn simulate_summary<R: RngCore + ?Sized>(
    params: &WalkParams,
    n: u64,
    windows: &[u64],
    rng: &mut R,
) -> Result<PathSummary> {
    Ok(simulate_summaries(params, &[n], windows, rng)?.remove(0))
}

/// One walk cut at its renewal times.
#[derive(Debug, Clone, PartialEq)]
pub struct RegenerativePath {
    pub summary: PathSummary,
    pub record: RenewalRecord,
    /// Cycles `k >= 1`; empty when fewer than two renewals were confirmed.
    pub cycles: Vec<Cycle>,
}

/// Simulates `n` steps and extracts the cycles; scores use excitation flags
/// at the simulated bias.
pub fn simulate_cycles<R: RngCore + ?Sized>(
    params: &WalkParams,
    n: u64,
    policy: ConfirmPolicy,
    rng: &mut R,
) -> Result<RegenerativePath> {
    let mut walker = walker_for(params, &[])?;
    let len = usize::try_from(n).map_err(|_| Error::InvalidParams("horizon too large"))?;
    let mut xs = Vec::with_capacity(len + 1);
    let mut eps = Vec::with_capacity(len);
    let mut flags = Vec::with_capacity(len);
    let mut novel = 0u64;
    xs.push(0i64);
    for _ in 0..len {
        let step = walker.step(rng)?;
        novel += u64::from(step.history.is_some_and(|h| h.novel()));
        xs.push(xs[xs.len() - 1] + i64::from(step.eps));
        eps.push(step.eps);
        flags.push(step.excited);
    }
    let trace = WeightTrace::from_steps(&eps, &flags, params.beta, params.beta)?;
    let record = detect_direct_xs(&xs, policy);
    let cycles = match extract_cycles_xs(&xs, &record, &trace) {
        Ok(c) => c,
        Err(Error::FewerThanTwoRenewals { .. }) => Vec::new(),
        Err(e) => return Err(e),
    };
    let summary = PathSummary {
        n,
        x_n: xs[len],
        novel,
        excited: trace.flagged(len),
        range: walker.range().unwrap_or(0) as u64,
        v_score: trace.at(len).v_score,
        windows: Vec::new(),
    };
    Ok(RegenerativePath {
        summary,
        record,
        cycles,
    })
}

fn require_paths(paths: &[PathSummary]) -> Result<u64> {
    let n = paths.first().ok_or(Error::EmptyInput("no paths"))?.n;
    if n == 0 {
        return Err(Error::InvalidParams("rates need n >= 1"));
    }
    if paths.iter().any(|p| p.n != n) {
        return Err(Error::InvalidParams("paths have different horizons"));
    }
    Ok(n)
}

/// Estimators A = mean(X_n/n) and B = (beta/d) mean(Ex_n/n) of `v_n`.
pub fn speed_finite_time(
    paths: &[PathSummary],
    params: &WalkParams,
) -> Result<(EstimateSummary, EstimateSummary)> {
    let n = require_paths(paths)? as f64;
    let scale = params.beta / params.d as f64;
    let a =
        EstimateSummary::from_values("speed_displacement", paths.iter().map(|p| p.x_n as f64 / n));
    let b = EstimateSummary::from_values(
        "speed_excitation",
        paths.iter().map(|p| scale * p.excited as f64 / n),
    );
    Ok((a, b))
}

/// `(1/d) E[Ex_n/n] + (beta/d) E[Ex_n V_n / n]`.
///
/// The cross moment is estimated by the sample covariance of `Ex_n` and
/// `V_n` (the score has mean zero), which removes the `O(n)` variance of the
/// raw product. The standard error comes from per-replicate influence values.
pub fn derivative_finite_time(paths: &[PathSummary], params: &WalkParams) -> Result<Estimate> {
    let n = require_paths(paths)? as f64;
    let r = paths.len();
    if r < 2 {
        return Err(Error::EmptyInput("need at least two paths"));
    }
    let d = params.d as f64;
    let beta = params.beta;
    let rf = r as f64;
    let ex_mean = paths
        .iter()
        .map(|p| p.excited as f64)
        .collect::<CompensatedSum>()
        .value()
        / rf;
    let v_mean = paths
        .iter()
        .map(|p| p.v_score)
        .collect::<CompensatedSum>()
        .value()
        / rf;
    let correction = rf / (rf - 1.0);
    let values = paths.iter().map(|p| {
        let ex = p.excited as f64;
        ex / (d * n) + beta / d * (ex - ex_mean) * (p.v_score - v_mean) / n * correction
    });
    Ok(
        EstimateSummary::from_values("derivative_score", values)
            .finish("centered score covariance"),
    )
}

/// Sums of cycle quantities over a group of cycles.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CycleMoments {
    pub cycles: u64,
    pub t: f64,
    pub x: f64,
    pub n: f64,
    pub nv: f64,
    pub tv: f64,
}

impl CycleMoments {
    pub fn of(cycle: &Cycle) -> Self {
        let (t, n) = (cycle.dt as f64, cycle.dn as f64);
        CycleMoments {
            cycles: 1,
            t,
            x: cycle.dx as f64,
            n,
            nv: n * cycle.dv,
            tv: t * cycle.dv,
        }
    }

    pub fn total(cycles: &[Cycle]) -> Self {
        cycles
            .iter()
            .fold(Self::default(), |acc, c| acc.add(&Self::of(c)))
    }

    pub fn add(&self, o: &Self) -> Self {
        CycleMoments {
            cycles: self.cycles + o.cycles,
            t: self.t + o.t,
            x: self.x + o.x,
            n: self.n + o.n,
            nv: self.nv + o.nv,
            tv: self.tv + o.tv,
        }
    }
}

fn require_cycles(count: u64) -> Result<()> {
    if count < 2 {
        Err(Error::FewerThanTwoRenewals {
            found: count as usize,
        })
    } else {
        Ok(())
    }
}

/// Ratio estimator over groups with a delta-method standard error; each group
/// is one independent unit.
fn ratio_estimate(label: &str, units: &[(f64, f64)], count: u64, method: &'static str) -> Estimate {
    let k = units.len() as f64;
    let num: CompensatedSum = units.iter().map(|u| u.0).collect();
    let den: CompensatedSum = units.iter().map(|u| u.1).collect();
    let ratio = num.value() / den.value();
    let den_mean = den.value() / k;
    let resid: CompensatedSum = units
        .iter()
        .map(|&(a, b)| {
            let e = a - ratio * b;
            e * e
        })
        .collect();
    let stderr = if units.len() < 2 {
        f64::NAN
    } else {
        libm::sqrt(resid.value() / (k * (k - 1.0))) / den_mean
    };
    Estimate {
        label: String::from(label),
        count,
        mean: ratio,
        stderr,
        method,
    }
}

/// `sum dx / sum dt` with a delta-method standard error over cycles.
pub fn speed_regenerative(cycles: &[Cycle]) -> Result<Estimate> {
    require_cycles(cycles.len() as u64)?;
    let units: Vec<(f64, f64)> = cycles.iter().map(|c| (c.dx as f64, c.dt as f64)).collect();
    Ok(ratio_estimate(
        "speed_regenerative",
        &units,
        cycles.len() as u64,
        "cycle ratio, delta method",
    ))
}

/// [`speed_regenerative`] with one resampling unit per group of cycles.
pub fn speed_regenerative_grouped(groups: &[CycleMoments]) -> Result<Estimate> {
    let total = groups.iter().map(|g| g.cycles).sum();
    require_cycles(total)?;
    let units: Vec<(f64, f64)> = groups.iter().map(|g| (g.x, g.t)).collect();
    Ok(ratio_estimate(
        "speed_regenerative",
        &units,
        groups.len() as u64,
        "cycle ratio, delta method over replicates",
    ))
}

/// Plug-in value of the regenerative derivative formula on totals.
pub fn derivative_from_moments(m: &CycleMoments, params: &WalkParams) -> f64 {
    let c = m.cycles as f64;
    let (t, n, nv, tv) = (m.t / c, m.n / c, m.nv / c, m.tv / c);
    let d = params.d as f64;
    n / (d * t) + params.beta / d * (nv * t - n * tv) / (t * t)
}

fn bootstrap<R: RngCore + ?Sized>(
    units: &[CycleMoments],
    params: &WalkParams,
    resamples: usize,
    rng: &mut R,
) -> f64 {
    let k = units.len() as u64;
    let mut spread = EstimateSummary::empty("bootstrap");
    for _ in 0..resamples {
        let mut acc = CycleMoments::default();
        for _ in 0..k {
            acc = acc.add(&units[below(rng, k) as usize]);
        }
        if acc.cycles > 0 && acc.t > 0.0 {
            spread.push(derivative_from_moments(&acc, params));
        }
    }
    libm::sqrt(spread.variance())
}

/// Default number of bootstrap resamples.
pub const DEFAULT_RESAMPLES: usize = 1000;

/// Regenerative derivative estimate; the standard error is a nonparametric
/// bootstrap over cycles.
pub fn derivative_regenerative<R: RngCore + ?Sized>(
    cycles: &[Cycle],
    params: &WalkParams,
    resamples: usize,
    rng: &mut R,
) -> Result<Estimate> {
    require_cycles(cycles.len() as u64)?;
    let units: Vec<CycleMoments> = cycles.iter().map(CycleMoments::of).collect();
    let total = CycleMoments::total(cycles);
    Ok(Estimate {
        label: String::from("derivative_regenerative"),
        count: cycles.len() as u64,
        mean: derivative_from_moments(&total, params),
        stderr: bootstrap(&units, params, resamples, rng),
        method: "cycle plug-in, bootstrap over cycles",
    })
}

/// [`derivative_regenerative`] resampling whole groups (one per replicate).
pub fn derivative_regenerative_grouped<R: RngCore + ?Sized>(
    groups: &[CycleMoments],
    params: &WalkParams,
    resamples: usize,
    rng: &mut R,
) -> Result<Estimate> {
    let total = groups.iter().fold(CycleMoments::default(), |a, g| a.add(g));
    require_cycles(total.cycles)?;
    Ok(Estimate {
        label: String::from("derivative_regenerative"),
        count: groups.len() as u64,
        mean: derivative_from_moments(&total, params),
        stderr: bootstrap(groups, params, resamples, rng),
        method: "cycle plug-in, bootstrap over replicates",
    })
}

/// `(v(beta + h) - v(beta - h)) / 2h` from regenerative speeds of paired
/// replicates (common random numbers); `plus[r]` and `minus[r]` must come
/// from the same seed.
pub fn speed_difference(plus: &[CycleMoments], minus: &[CycleMoments], h: f64) -> Result<Estimate> {
    if plus.len() != minus.len() {
        return Err(Error::InvalidParams("paired inputs differ in length"));
    }
    if plus.len() < 2 {
        return Err(Error::EmptyInput("need at least two replicate pairs"));
    }
    let total = |g: &[CycleMoments]| g.iter().fold(CycleMoments::default(), |a, m| a.add(m));
    let (tp, tm) = (total(plus), total(minus));
    require_cycles(tp.cycles.min(tm.cycles))?;
    let r = plus.len() as f64;
    let (sp, sm) = (tp.x / tp.t, tm.x / tm.t);
    let (mean_tp, mean_tm) = (tp.t / r, tm.t / r);
    let influence = plus
        .iter()
        .zip(minus)
        .map(|(p, m)| ((p.x - sp * p.t) / mean_tp - (m.x - sm * m.t) / mean_tm) / (2.0 * h));
    let spread = EstimateSummary::from_values("influence", influence);
    Ok(Estimate {
        label: String::from("derivative_difference"),
        count: plus.len() as u64,
        mean: (sp - sm) / (2.0 * h),
        stderr: spread.stderr(),
        method: "paired central difference, delta method",
    })
}

/// mean(R_n / n).
pub fn range_rate(paths: &[PathSummary]) -> Result<EstimateSummary> {
    let n = require_paths(paths)? as f64;
    Ok(EstimateSummary::from_values(
        "range_rate",
        paths.iter().map(|p| p.range as f64 / n),
    ))
}

/// mean(N_n / n).
pub fn novelty_rate(paths: &[PathSummary]) -> Result<EstimateSummary> {
    let n = require_paths(paths)? as f64;
    Ok(EstimateSummary::from_values(
        "novelty_rate",
        paths.iter().map(|p| p.novel as f64 / n),
    ))
}

/// mean(N^(k)_n / n); the window must have been recorded.
pub fn truncated_rate(paths: &[PathSummary], k: u64) -> Result<EstimateSummary> {
    let n = require_paths(paths)? as f64;
    let values = paths
        .iter()
        .map(|p| {
            p.window(k)
                .map(|c| c as f64 / n)
                .ok_or(Error::InvalidParams("window was not recorded"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EstimateSummary::from_values("truncated_rate", values))
}
