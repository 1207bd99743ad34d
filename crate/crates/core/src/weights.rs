//! Likelihood-ratio weights between two bias levels and the score process.
//!
//! For a path driven at reference bias `beta0`, the density of the law at
//! bias `beta` is `M_n = prod (1 + beta e_i f_i) / (1 + beta0 e_i f_i)` where
//! `e_i` is the first-coordinate increment and `f_i` the drift flag of step
//! `i`. Everything is kept in log space. The score is
//! `V_n = sum e_i f_i / (1 + beta0 e_i f_i)`, the derivative of `log M_n` in
//! `beta` at `beta = beta0`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::renewal::RenewalRecord;
use crate::walk::Trajectory;

/// Which per-step flag switches the drift on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlagSource {
    /// First visit to the site (the `m = 1` law).
    Novelty,
    /// Fewer than `m` prior visits (general `m`).
    Excitation,
}

impl FlagSource {
    /// Flags of steps `0..n` of `traj`.
    pub fn flags<'a>(&self, traj: &'a Trajectory) -> &'a [bool] {
        match self {
            FlagSource::Novelty => &traj.novelty()[..traj.len()],
            FlagSource::Excitation => traj.excitation(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WeightState {
    /// `log M_n(beta, beta0)`; `-inf` when the target law forbids the path.
    pub log_m: f64,
    /// `V_n` at the reference bias.
    pub v_score: f64,
    pub n: u64,
}

impl WeightState {
    pub const fn new() -> Self {
        WeightState {
            log_m: 0.0,
            v_score: 0.0,
            n: 0,
        }
    }

    /// Folds in one step.
    #[inline]
    pub fn push(&mut self, eps: i8, flag: bool, beta: f64, beta0: f64) -> Result<()> {
        let e = if flag { f64::from(eps) } else { 0.0 };
        if e != 0.0 {
            let reference = 1.0 + beta0 * e;
            if reference <= 0.0 {
                return Err(Error::UndefinedWeight {
                    step: self.n as usize,
                });
            }
            if beta != beta0 {
                self.log_m += libm::log1p(beta * e) - libm::log1p(beta0 * e);
            }
            self.v_score += e / reference;
        }
        self.n += 1;
        Ok(())
    }

    pub fn weight(&self) -> f64 {
        libm::exp(self.log_m)
    }
}

/// Functional form of [`WeightState::push`].
pub fn accumulate(
    state: WeightState,
    eps: i8,
    flag: bool,
    beta: f64,
    beta0: f64,
) -> Result<WeightState> {
    let mut next = state;
    next.push(eps, flag, beta, beta0)?;
    Ok(next)
}

/// Running weights along a path: entry `t` describes steps `0..t`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTrace {
    log_m: Vec<f64>,
    v: Vec<f64>,
    flagged: Vec<u64>,
}

impl WeightTrace {
    /// Builds the trace from increments and flags of equal length.
    pub fn from_steps(eps: &[i8], flags: &[bool], beta: f64, beta0: f64) -> Result<Self> {
        if eps.len() != flags.len() {
            return Err(Error::InvalidParams(
                "increments and flags differ in length",
            ));
        }
        let mut log_m = Vec::with_capacity(eps.len() + 1);
        let mut v = Vec::with_capacity(eps.len() + 1);
        let mut flagged = Vec::with_capacity(eps.len() + 1);
        let mut state = WeightState::new();
        let mut count = 0;
        log_m.push(0.0);
        v.push(0.0);
        flagged.push(0);
        for (&e, &f) in eps.iter().zip(flags) {
            state.push(e, f, beta, beta0)?;
            count += u64::from(f);
            log_m.push(state.log_m);
            v.push(state.v_score);
            flagged.push(count);
        }
        Ok(WeightTrace { log_m, v, flagged })
    }

    pub fn new(traj: &Trajectory, source: FlagSource, beta: f64, beta0: f64) -> Result<Self> {
        Self::from_steps(traj.increments(), source.flags(traj), beta, beta0)
    }

    /// Number of steps covered.
    pub fn len(&self) -> usize {
        self.v.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn at(&self, t: usize) -> WeightState {
        WeightState {
            log_m: self.log_m[t],
            v_score: self.v[t],
            n: t as u64,
        }
    }

    /// Flagged steps among `0..t`.
    pub fn flagged(&self, t: usize) -> u64 {
        self.flagged[t]
    }

    pub fn v_between(&self, a: usize, b: usize) -> f64 {
        self.v[b] - self.v[a]
    }
}

/// Log weights of the prefix `[0, tau_1)` and of every cycle `[tau_k, tau_{k+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct TauWeights {
    pub prefix: f64,
    pub cycles: Vec<f64>,
}

pub fn weight_at_tau(
    traj: &Trajectory,
    record: &RenewalRecord,
    source: FlagSource,
    beta: f64,
    beta0: f64,
) -> Result<TauWeights> {
    let first = *record
        .taus
        .first()
        .ok_or(Error::FewerThanTwoRenewals { found: 0 })?;
    let eps = traj.increments();
    let flags = source.flags(traj);
    let segment = |a: usize, b: usize| -> Result<f64> {
        let mut s = WeightState::new();
        s.n = a as u64;
        for i in a..b {
            s.push(eps[i], flags[i], beta, beta0)?;
        }
        Ok(s.log_m)
    };
    let prefix = segment(0, first)?;
    let cycles = record
        .taus
        .windows(2)
        .map(|w| segment(w[0], w[1]))
        .collect::<Result<Vec<_>>>()?;
    Ok(TauWeights { prefix, cycles })
}

/// Self-normalized importance-sampling estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reweighted {
    pub mean: f64,
    /// `(sum w)^2 / sum w^2`.
    pub ess: f64,
    /// Log of the largest weight, the scale used for stabilization.
    pub log_scale: f64,
}

/// `sum f_j w_j / sum w_j` over `(f_j, log w_j)` pairs.
pub fn reweighted_mean(samples: &[(f64, f64)]) -> Result<Reweighted> {
    let scale = samples
        .iter()
        .map(|&(_, lw)| lw)
        .filter(|lw| !lw.is_nan())
        .fold(f64::NEG_INFINITY, f64::max);
    if scale == f64::NEG_INFINITY {
        return Err(Error::AllWeightsZero);
    }
    let mut sw = 0.0;
    let mut sw2 = 0.0;
    let mut swf = 0.0;
    for &(f, lw) in samples {
        if lw.is_nan() || lw == f64::NEG_INFINITY {
            continue;
        }
        let w = libm::exp(lw - scale);
        sw += w;
        sw2 += w * w;
        swf += w * f;
    }
    Ok(Reweighted {
        mean: swf / sw,
        ess: sw * sw / sw2,
        log_scale: scale,
    })
}
