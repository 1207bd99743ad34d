//! Monotone coupling of the stationary walk with the m-excited walk.
//!
//! Both walks share the transverse component `Z`, a lazy simple walk on
//! `Z^{d-1}` that stays put with probability `1/d`; whenever it stays, the
//! walks move along `e_1` with a sign read off shared Bernoulli bits
//! `xi_bar <= zeta_bar <= zeta`. The stationary walk uses `zeta_bar` when
//! `Z_n` is new relative to its whole past (a finite burn-in stands in for
//! the infinite past) and `xi_bar` otherwise. The m-ERW uses `zeta` at
//! excited sites and `xi_bar` elsewhere. Its first-coordinate increments then
//! dominate those of the stationary walk step by step.

use alloc::vec::Vec;

use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::renewal::{detect_direct_xs, ConfirmPolicy};
use crate::rng::{below, stream_rng, uniform};
use crate::walk::{Excitation, LatticePoint, SiteSet, Trajectory, VisitMap, WalkParams};

/// Marker for a lazy transverse step in the burn-in history.
pub const STAY: u8 = u8::MAX;

/// All randomness of one coupled pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DrivingNoise {
    pub d: usize,
    pub beta0: f64,
    pub beta: f64,
    /// `eta_i = 1`: the step is along `e_1` and `Z` stays.
    pub eta: Vec<bool>,
    /// Transverse move in `0..2(d-1)`; drawn every step, used when `eta_i = 0`.
    pub zdir: Vec<u8>,
    /// Bits `xi_bar << 2 | zeta_bar << 1 | zeta`.
    pub joint: Vec<u8>,
    /// Steps of `Z` into the past: entry `j` leads from `Z_{-j}` to
    /// `Z_{-j-1}`; `STAY` or a transverse move.
    pub past: Vec<u8>,
}

impl DrivingNoise {
    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    pub fn burnin(&self) -> usize {
        self.past.len()
    }

    pub fn xi_bar(&self, i: usize) -> bool {
        self.joint[i] & 4 != 0
    }

    pub fn zeta_bar(&self, i: usize) -> bool {
        self.joint[i] & 2 != 0
    }

    pub fn zeta(&self, i: usize) -> bool {
        self.joint[i] & 1 != 0
    }
}

/// Default burn-in `10 sqrt(n) + 1000`.
pub fn default_burnin(n: usize) -> usize {
    10 * libm::sqrt(n as f64) as usize + 1000
}

/// Joint law of `(xi_bar, zeta_bar, zeta)` as `[p111, p011, p001, p000]`.
pub fn triple_probabilities(beta0: f64, beta: f64) -> [f64; 4] {
    [0.5, beta0 / 2.0, (beta - beta0) / 2.0, (1.0 - beta) / 2.0]
}

fn check_biases(beta0: f64, beta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&beta0) || !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidParams("biases must lie in [0, 1]"));
    }
    if beta < beta0 {
        return Err(Error::InvalidBiasOrder { beta0, beta });
    }
    Ok(())
}

fn draw_triple<R: RngCore + ?Sized>(rng: &mut R, beta0: f64, beta: f64) -> u8 {
    let u = uniform(rng);
    if u < 0.5 {
        0b111
    } else if u < 0.5 * (1.0 + beta0) {
        0b011
    } else if u < 0.5 * (1.0 + beta) {
        0b001
    } else {
        0b000
    }
}

fn draw_transverse<R: RngCore + ?Sized>(rng: &mut R, d: usize) -> (bool, u8) {
    let eta = uniform(rng) < 1.0 / d as f64;
    let dir = below(rng, 2 * (d as u64 - 1)) as u8;
    (eta, dir)
}

/// Samples `n` steps of driving noise and `burnin` steps of past `Z`.
///
/// Per step the draws are consumed as `eta`, `zdir`, triple. The past uses
/// an independent stream.
pub fn sample_noise(
    d: usize,
    beta0: f64,
    beta: f64,
    n: usize,
    burnin: usize,
    seed: u64,
) -> Result<DrivingNoise> {
    if !(2..=64).contains(&d) {
        return Err(Error::InvalidParams("dimension d must lie in 2..=64"));
    }
    check_biases(beta0, beta)?;
    let mut rng = stream_rng(seed, "coupling-noise", 0);
    let mut eta = Vec::with_capacity(n);
    let mut zdir = Vec::with_capacity(n);
    let mut joint = Vec::with_capacity(n);
    for _ in 0..n {
        let (e, z) = draw_transverse(&mut rng, d);
        eta.push(e);
        zdir.push(z);
        joint.push(draw_triple(&mut rng, beta0, beta));
    }
    let mut past_rng = stream_rng(seed, "coupling-past", 0);
    let past = (0..burnin)
        .map(|_| match draw_transverse(&mut past_rng, d) {
            (true, _) => STAY,
            (false, z) => z,
        })
        .collect();
    Ok(DrivingNoise {
        d,
        beta0,
        beta,
        eta,
        zdir,
        joint,
        past,
    })
}

fn shift_transverse(z: &mut [i64], dir: u8) {
    let axis = usize::from(dir / 2);
    z[axis] += if dir % 2 == 0 { 1 } else { -1 };
}

/// The stationary walk and the m-ERW built from one noise sample.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledPair {
    pub ybar: Trajectory,
    pub y: Trajectory,
    pub noise: DrivingNoise,
    /// `Z_n` new relative to the burn-in past and `Z_0..Z_{n-1}`.
    pub znew: Vec<bool>,
}

pub fn build_pair(noise: &DrivingNoise, m: Excitation) -> Result<CoupledPair> {
    let d = noise.d;
    let params = WalkParams {
        d,
        m,
        beta: noise.beta,
        kind: crate::walk::WalkKind::MErw,
    };
    params.validate()?;
    let n = noise.len();

    let mut seen = SiteSet::new(d - 1);
    let mut z = alloc::vec![0i64; d - 1];
    for &step in &noise.past {
        if step != STAY {
            shift_transverse(&mut z, step);
        }
        seen.insert(&z);
    }
    z.iter_mut().for_each(|c| *c = 0);

    let mut visits = VisitMap::with_capacity(d, n + 1);
    let mut ybar = Vec::with_capacity(n + 1);
    let mut y = Vec::with_capacity(n + 1);
    let mut znew = Vec::with_capacity(n);
    let mut excited = Vec::with_capacity(n);
    let (mut xbar, mut x) = (0i64, 0i64);
    let site = |x: i64, z: &[i64]| {
        let mut c = Vec::with_capacity(d);
        c.push(x);
        c.extend_from_slice(z);
        LatticePoint::new(c)
    };
    ybar.push(site(0, &z));
    y.push(site(0, &z));
    let mut prior = visits.record(&y[0].coords, 0).map_or(0, |r| r.visits);
    for i in 0..n {
        let fresh_z = seen.insert(&z);
        let ex = params.is_excited(prior);
        znew.push(fresh_z);
        excited.push(ex);
        if noise.eta[i] {
            let bar_bit = if fresh_z {
                noise.zeta_bar(i)
            } else {
                noise.xi_bar(i)
            };
            let bit = if ex { noise.zeta(i) } else { noise.xi_bar(i) };
            xbar += if bar_bit { 1 } else { -1 };
            x += if bit { 1 } else { -1 };
        } else {
            shift_transverse(&mut z, noise.zdir[i]);
        }
        ybar.push(site(xbar, &z));
        y.push(site(x, &z));
        prior = visits
            .record(&y[i + 1].coords, i as u64 + 1)
            .map_or(0, |r| r.visits);
    }
    Ok(CoupledPair {
        ybar: Trajectory::from_parts(d, &ybar, &znew)?,
        y: Trajectory::from_parts(d, &y, &excited)?,
        noise: noise.clone(),
        znew,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingReport {
    pub dominance_ok: bool,
    /// First step `n` with `Xbar_{n+1} - Xbar_n > X_{n+1} - X_n`.
    pub first_violation: Option<usize>,
    pub shared_renewals_ok: bool,
    /// Confirmed renewals of the stationary walk that were checked.
    pub renewals_checked: usize,
    /// First renewal of the stationary walk that is not one of the m-ERW.
    pub first_unshared: Option<usize>,
}

pub fn verify(pair: &CoupledPair) -> CouplingReport {
    verify_paths(&pair.ybar.xs(), &pair.y.xs())
}

/// Checks increment dominance and renewal transfer on first coordinates.
pub fn verify_paths(xbar: &[i64], x: &[i64]) -> CouplingReport {
    assert_eq!(xbar.len(), x.len(), "paths must share the horizon");
    let first_violation =
        (0..xbar.len().saturating_sub(1)).find(|&i| xbar[i + 1] - xbar[i] > x[i + 1] - x[i]);
    let bar = detect_direct_xs(xbar, ConfirmPolicy::FULL_SUFFIX);
    let own = detect_direct_xs(x, ConfirmPolicy::FULL_SUFFIX);
    let first_unshared = bar
        .taus
        .iter()
        .copied()
        .find(|t| own.taus.binary_search(t).is_err());
    CouplingReport {
        dominance_ok: first_violation.is_none(),
        first_violation,
        shared_renewals_ok: first_unshared.is_none(),
        renewals_checked: bar.taus.len(),
        first_unshared,
    }
}
