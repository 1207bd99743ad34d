//! Renewal times and regenerative cycles.
//!
//! A renewal time is an index `n >= 1` at which the first coordinate sets a
//! strict record, `max_{i<n} X_i < X_n`, and never drops below that level
//! afterwards. On a finite horizon `H` "afterwards" means up to `H`; a
//! candidate closer than `margin` steps to the horizon is not confirmed and
//! the record is flagged as censored instead.
//!
//! Two detectors are provided. [`detect_direct`] checks the defining
//! inequalities with a prefix-maximum and a suffix-minimum pass.
//! [`detect_sd`] runs the hitting-time recursion (`S_k`, `D_k`, `R_k`) and
//! restarts it at every renewal found.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::walk::Trajectory;
use crate::weights::WeightTrace;

/// How close to the horizon a candidate may be and still count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfirmPolicy {
    /// A candidate `n` is confirmed only if `n + margin <= H`.
    pub margin: usize,
}

impl ConfirmPolicy {
    pub const FULL_SUFFIX: ConfirmPolicy = ConfirmPolicy { margin: 0 };

    pub fn with_margin(margin: usize) -> Self {
        ConfirmPolicy { margin }
    }

    fn accepts(&self, n: usize, horizon: usize) -> bool {
        n.checked_add(self.margin).is_some_and(|e| e <= horizon)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenewalRecord {
    pub taus: Vec<usize>,
    pub horizon: usize,
    pub confirm_margin: usize,
    /// A candidate existed but fell inside the unconfirmable margin.
    pub censored_tail: bool,
}

impl RenewalRecord {
    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }
}

/// Renewals of the path by the prefix-max / suffix-min characterization.
pub fn detect_direct(traj: &Trajectory) -> RenewalRecord {
    detect_direct_xs(&traj.xs(), ConfirmPolicy::FULL_SUFFIX)
}

/// [`detect_direct`] on raw first coordinates `X_0..X_H`.
pub fn detect_direct_xs(xs: &[i64], policy: ConfirmPolicy) -> RenewalRecord {
    assert!(!xs.is_empty(), "renewal detection needs a nonempty path");
    let horizon = xs.len() - 1;
    let mut suffix_min = xs.to_vec();
    for i in (0..horizon).rev() {
        suffix_min[i] = suffix_min[i].min(suffix_min[i + 1]);
    }
    let mut taus = Vec::new();
    let mut censored_tail = false;
    let mut running_max = xs[0];
    for n in 1..=horizon {
        let x = xs[n];
        if running_max < x && x <= suffix_min[n] {
            if policy.accepts(n, horizon) {
                taus.push(n);
            } else {
                censored_tail = true;
                break;
            }
        }
        running_max = running_max.max(x);
    }
    RenewalRecord {
        taus,
        horizon,
        confirm_margin: policy.margin,
        censored_tail,
    }
}

/// Renewals of the path by the hitting-time recursion.
pub fn detect_sd(traj: &Trajectory) -> RenewalRecord {
    detect_sd_xs(&traj.xs(), ConfirmPolicy::FULL_SUFFIX)
}

enum Trial {
    Confirmed(usize),
    Censored,
    /// Some `S_k` is beyond the horizon.
    Exhausted,
}

/// First renewal of the path `xs[start..]`, indices absolute.
fn first_renewal(xs: &[i64], start: usize, policy: ConfirmPolicy) -> Trial {
    let horizon = xs.len() - 1;
    // R_0 = X_start, D_0 = start.
    let mut record = xs[start];
    let mut d = start;
    loop {
        // S = T_{R+1}: first index after the start with X >= R + 1. Every
        // index up to D is below that level, so the scan starts after D.
        let mut s = d + 1;
        while s <= horizon && xs[s] <= record {
            s += 1;
        }
        if s > horizon {
            return Trial::Exhausted;
        }
        // D-bar after S: first index with X below X_S.
        let level = xs[s];
        let mut back = s;
        let mut peak = level;
        while back <= horizon && xs[back] >= level {
            peak = peak.max(xs[back]);
            back += 1;
        }
        if back > horizon {
            return if policy.accepts(s, horizon) {
                Trial::Confirmed(s)
            } else {
                Trial::Censored
            };
        }
        // R = sup X over [start, D]; everything before S is <= record.
        d = back;
        record = record.max(peak);
    }
}

/// [`detect_sd`] on raw first coordinates `X_0..X_H`.
pub fn detect_sd_xs(xs: &[i64], policy: ConfirmPolicy) -> RenewalRecord {
    assert!(!xs.is_empty(), "renewal detection needs a nonempty path");
    let horizon = xs.len() - 1;
    let mut taus = Vec::new();
    let mut censored_tail = false;
    let mut start = 0;
    loop {
        match first_renewal(xs, start, policy) {
            Trial::Confirmed(t) => {
                taus.push(t);
                start = t;
            }
            Trial::Censored => {
                censored_tail = true;
                break;
            }
            Trial::Exhausted => break,
        }
    }
    RenewalRecord {
        taus,
        horizon,
        confirm_margin: policy.margin,
        censored_tail,
    }
}

/// One regenerative cycle `[tau_k, tau_{k+1})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cycle {
    pub k: usize,
    pub dt: u64,
    pub dx: i64,
    /// Flagged (drift-carrying) steps in the cycle.
    pub dn: u64,
    pub dv: f64,
}

/// Cycles `k >= 1` of `traj`; the prefix before `tau_1` is dropped.
pub fn extract_cycles(
    traj: &Trajectory,
    record: &RenewalRecord,
    trace: &WeightTrace,
) -> Result<Vec<Cycle>> {
    extract_cycles_xs(&traj.xs(), record, trace)
}

pub fn extract_cycles_xs(
    xs: &[i64],
    record: &RenewalRecord,
    trace: &WeightTrace,
) -> Result<Vec<Cycle>> {
    if record.taus.len() < 2 {
        return Err(Error::FewerThanTwoRenewals {
            found: record.taus.len(),
        });
    }
    if trace.len() + 1 != xs.len() || record.horizon + 1 != xs.len() {
        return Err(Error::InvalidParams(
            "record, trace and path lengths differ",
        ));
    }
    Ok(record
        .taus
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let (a, b) = (w[0], w[1]);
            Cycle {
                k: i + 1,
                dt: (b - a) as u64,
                dx: xs[b] - xs[a],
                dn: trace.flagged(b) - trace.flagged(a),
                dv: trace.v_between(a, b),
            }
        })
        .collect())
}
