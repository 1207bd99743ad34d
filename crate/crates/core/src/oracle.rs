//! Exact expectations by enumerating every path of length `n`.
//!
//! The tree of `(2d)^n` move sequences is walked depth first with an explicit
//! stack; visit counts are kept in a small map that is decremented on the way
//! back up, so memory stays `O(n)`. Path probabilities are accumulated along
//! the stack either as `f64` (sums are compensated) or as exact `i128`
//! rationals.

use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, One, Signed, Zero};
use rustc_hash::FxBuildHasher;

use crate::error::{Error, Result};
use crate::stats::CompensatedSum;
use crate::walk::{move_axis_sign, step_probabilities, WalkKind, WalkParams};
use crate::weights::{FlagSource, WeightState};

pub type Rational = Ratio<i128>;

/// Default cap on the number of enumerated paths.
pub const DEFAULT_BUDGET: u128 = 100_000_000;

/// Largest dimension the enumerator packs into its visit keys.
const MAX_DIM: usize = 16;

/// Probability arithmetic used along the enumeration stack.
pub trait PathWeight: Clone {
    fn unit() -> Self;
    fn vanishes(&self) -> bool;
    fn times(&self, other: &Self) -> Result<Self>;
}

impl PathWeight for f64 {
    fn unit() -> Self {
        1.0
    }
    fn vanishes(&self) -> bool {
        *self == 0.0
    }
    fn times(&self, other: &Self) -> Result<Self> {
        Ok(self * other)
    }
}

impl PathWeight for Rational {
    fn unit() -> Self {
        One::one()
    }
    fn vanishes(&self) -> bool {
        Zero::is_zero(self)
    }
    fn times(&self, other: &Self) -> Result<Self> {
        self.checked_mul(other).ok_or(Error::RationalOverflow)
    }
}

/// One complete path handed to observables.
#[derive(Debug, Clone, Copy)]
pub struct PathView<'a> {
    d: usize,
    moves: &'a [u8],
    points: &'a [i64],
    eps: &'a [i8],
    novel: &'a [bool],
    excited: &'a [bool],
}

impl<'a> PathView<'a> {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.moves.len()
    }

    pub fn moves(&self) -> &'a [u8] {
        self.moves
    }

    pub fn point(&self, i: usize) -> &'a [i64] {
        &self.points[i * self.d..(i + 1) * self.d]
    }

    pub fn x(&self, i: usize) -> i64 {
        self.points[i * self.d]
    }

    pub fn x_n(&self) -> i64 {
        self.x(self.n())
    }

    pub fn increments(&self) -> &'a [i8] {
        self.eps
    }

    /// Novelty of `Y_0..Y_{n-1}`.
    pub fn novelty(&self) -> &'a [bool] {
        self.novel
    }

    /// Excitation of `Y_0..Y_{n-1}`.
    pub fn excitation(&self) -> &'a [bool] {
        self.excited
    }

    pub fn flags(&self, source: FlagSource) -> &'a [bool] {
        match source {
            FlagSource::Novelty => self.novel,
            FlagSource::Excitation => self.excited,
        }
    }

    /// `N_n`.
    pub fn novel_count(&self) -> u64 {
        self.novel.iter().filter(|&&f| f).count() as u64
    }

    pub fn excited_count(&self) -> u64 {
        self.excited.iter().filter(|&&f| f).count() as u64
    }

    pub fn weight_state(&self, source: FlagSource, beta: f64, beta0: f64) -> Result<WeightState> {
        let mut s = WeightState::new();
        for (&e, &f) in self.eps.iter().zip(self.flags(source)) {
            s.push(e, f, beta, beta0)?;
        }
        Ok(s)
    }

    /// Probability of this path when the drift is `beta` on excited steps.
    pub fn probability(&self, beta: f64) -> f64 {
        let unit = 1.0 / (2 * self.d) as f64;
        self.eps
            .iter()
            .zip(self.excited)
            .map(|(&e, &f)| {
                if f && e != 0 {
                    (1.0 + beta * f64::from(e)) * unit
                } else {
                    unit
                }
            })
            .product()
    }

    pub fn probability_exact(&self, beta: &Rational) -> Result<Rational> {
        let unit = Rational::new(1, 2 * self.d as i128);
        let mut p = Rational::one();
        for (&e, &f) in self.eps.iter().zip(self.excited) {
            let factor = if f && e != 0 {
                drift_factor(beta, e)?
                    .checked_mul(&unit)
                    .ok_or(Error::RationalOverflow)?
            } else {
                unit
            };
            p = p.checked_mul(&factor).ok_or(Error::RationalOverflow)?;
        }
        Ok(p)
    }
}

/// `1 + beta * e`.
fn drift_factor(beta: &Rational, e: i8) -> Result<Rational> {
    let one = Rational::one();
    if e > 0 {
        one.checked_add(beta)
    } else {
        one.checked_sub(beta)
    }
    .ok_or(Error::RationalOverflow)
}

/// Visit counts with decrement, keyed by coordinates packed 8 bits apiece.
struct UndoCounts {
    counts: HashMap<u128, u32, FxBuildHasher>,
}

impl UndoCounts {
    fn key(site: &[i64]) -> u128 {
        site.iter()
            .fold(0u128, |k, &c| (k << 8) | u128::from((c as i8) as u8))
    }

    fn inc(&mut self, site: &[i64]) -> u32 {
        let c = self.counts.entry(Self::key(site)).or_insert(0);
        *c += 1;
        *c - 1
    }

    fn dec(&mut self, site: &[i64]) {
        if let Some(c) = self.counts.get_mut(&Self::key(site)) {
            *c -= 1;
        }
    }
}

/// Number of paths of length `n` in dimension `d`, checked against `budget`.
pub fn atom_count(d: usize, n: usize, budget: u128) -> Result<u128> {
    let atoms = u32::try_from(n)
        .ok()
        .and_then(|n| (2 * d as u128).checked_pow(n));
    match atoms {
        Some(a) if a <= budget => Ok(a),
        Some(a) => Err(Error::BudgetExceeded { atoms: a, budget }),
        None => Err(Error::BudgetExceeded {
            atoms: u128::MAX,
            budget,
        }),
    }
}

/// Depth-first enumerator for one walk law.
#[derive(Debug, Clone)]
pub struct Enumerator<P: PathWeight> {
    params: WalkParams,
    n: usize,
    /// Step probabilities at excited and at unexcited sites.
    excited_table: Vec<P>,
    plain_table: Vec<P>,
    first_move: Option<usize>,
}

impl Enumerator<f64> {
    pub fn new(params: WalkParams, n: usize, budget: u128) -> Result<Self> {
        Self::check(&params, n, budget)?;
        Ok(Enumerator {
            params,
            n,
            excited_table: step_probabilities(&params, true),
            plain_table: step_probabilities(&params, false),
            first_move: None,
        })
    }
}

impl Enumerator<Rational> {
    /// Exact law; `params.beta` is ignored in favour of `beta`.
    pub fn exact(params: WalkParams, beta: Rational, n: usize, budget: u128) -> Result<Self> {
        Self::check(&params, n, budget)?;
        if beta < Rational::zero() || beta > Rational::one() {
            return Err(Error::InvalidParams("beta must lie in [0, 1]"));
        }
        if params.kind == WalkKind::Symmetric && !Zero::is_zero(&beta) {
            return Err(Error::InvalidParams("symmetric walk needs beta = 0"));
        }
        let unit = Rational::new(1, 2 * params.d as i128);
        let table = |excited: bool| -> Result<Vec<Rational>> {
            (0..2 * params.d)
                .map(|mv| match mv {
                    0 | 1 if excited => drift_factor(&beta, if mv == 0 { 1 } else { -1 })?
                        .checked_mul(&unit)
                        .ok_or(Error::RationalOverflow),
                    _ => Ok(unit),
                })
                .collect()
        };
        Ok(Enumerator {
            params,
            n,
            excited_table: table(true)?,
            plain_table: table(false)?,
            first_move: None,
        })
    }
}

impl<P: PathWeight> Enumerator<P> {
    fn check(params: &WalkParams, n: usize, budget: u128) -> Result<()> {
        params.validate()?;
        if params.d > MAX_DIM {
            return Err(Error::InvalidParams("enumeration supports d <= 16"));
        }
        if n > 127 {
            return Err(Error::InvalidParams("enumeration supports n <= 127"));
        }
        atom_count(params.d, n, budget).map(|_| ())
    }

    /// Restricts the enumeration to paths starting with `mv`.
    pub fn with_first_move(mut self, mv: usize) -> Self {
        assert!(mv < 2 * self.params.d);
        self.first_move = Some(mv);
        self
    }

    pub fn params(&self) -> &WalkParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Calls `leaf` on every path of positive probability.
    pub fn for_each<F>(&self, mut leaf: F) -> Result<()>
    where
        F: FnMut(&PathView<'_>, &P) -> Result<()>,
    {
        let d = self.params.d;
        let n = self.n;
        let mut moves = vec![0u8; n];
        let mut points = vec![0i64; (n + 1) * d];
        let mut eps = vec![0i8; n];
        let mut novel = vec![false; n];
        let mut excited = vec![false; n];
        let mut prior = vec![0u32; n + 1];
        let mut prob: Vec<P> = vec![P::unit(); n + 1];
        let mut next = vec![0usize; n + 1];
        let mut counts = UndoCounts {
            counts: HashMap::with_hasher(FxBuildHasher),
        };
        counts.inc(&points[..d]);
        let first_range = match self.first_move {
            Some(mv) => (mv, mv + 1),
            None => (0, 2 * d),
        };
        next[0] = first_range.0;
        let mut depth = 0usize;
        loop {
            if depth == n {
                let view = PathView {
                    d,
                    moves: &moves,
                    points: &points,
                    eps: &eps,
                    novel: &novel,
                    excited: &excited,
                };
                leaf(&view, &prob[n])?;
            }
            let limit = if depth == 0 { first_range.1 } else { 2 * d };
            if depth < n && next[depth] < limit {
                let mv = next[depth];
                next[depth] += 1;
                let is_excited = self.params.is_excited(prior[depth]);
                let table = if is_excited {
                    &self.excited_table
                } else {
                    &self.plain_table
                };
                if table[mv].vanishes() {
                    continue;
                }
                let p = prob[depth].times(&table[mv])?;
                let (axis, sign) = move_axis_sign(mv);
                let (here, there) = points.split_at_mut((depth + 1) * d);
                there[..d].copy_from_slice(&here[depth * d..]);
                there[axis] += sign;
                prior[depth + 1] = counts.inc(&there[..d]);
                moves[depth] = mv as u8;
                eps[depth] = if axis == 0 { sign as i8 } else { 0 };
                novel[depth] = prior[depth] == 0;
                excited[depth] = is_excited;
                depth += 1;
                prob[depth] = p;
                next[depth] = 0;
            } else {
                if depth == 0 {
                    return Ok(());
                }
                counts.dec(&points[depth * d..(depth + 1) * d]);
                depth -= 1;
            }
        }
    }
}

/// `E[f(Y_0..Y_n)]` under the law of `params`.
pub fn exact_expectation<F>(params: &WalkParams, n: usize, f: F) -> Result<f64>
where
    F: FnMut(&PathView<'_>) -> f64,
{
    exact_expectation_with_budget(params, n, DEFAULT_BUDGET, f)
}

pub fn exact_expectation_with_budget<F>(
    params: &WalkParams,
    n: usize,
    budget: u128,
    mut f: F,
) -> Result<f64>
where
    F: FnMut(&PathView<'_>) -> f64,
{
    let mut sum = CompensatedSum::new();
    Enumerator::new(*params, n, budget)?.for_each(|path, p| {
        sum.add(p * f(path));
        Ok(())
    })?;
    Ok(sum.value())
}

/// Exact `E[f]` for rational `beta`.
pub fn exact_expectation_rational<F>(
    params: &WalkParams,
    beta: Rational,
    n: usize,
    mut f: F,
) -> Result<Rational>
where
    F: FnMut(&PathView<'_>) -> Result<Rational>,
{
    let mut sum = Rational::zero();
    Enumerator::exact(*params, beta, n, DEFAULT_BUDGET)?.for_each(|path, p| {
        let term = p.checked_mul(&f(path)?).ok_or(Error::RationalOverflow)?;
        sum = sum.checked_add(&term).ok_or(Error::RationalOverflow)?;
        Ok(())
    })?;
    Ok(sum)
}

/// Finite-difference scheme for [`exact_speed_and_derivative`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Difference {
    Plain,
    /// One Richardson step on top of the plain quotient.
    Richardson,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedDerivative {
    /// `v_n = E[X_n] / n`.
    pub speed: f64,
    /// Numerical derivative in beta (central inside `(0, 1)`).
    pub finite_difference: f64,
    /// `(1/d) E[Ex_n / n] + (beta/d) E[Ex_n V_n / n]`.
    pub score_formula: f64,
}

/// Exact `v_n(beta)`.
pub fn exact_speed(params: &WalkParams, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParams("speed needs n >= 1"));
    }
    exact_expectation(params, n, |p| p.x_n() as f64 / n as f64)
}

pub fn exact_speed_and_derivative(
    params: &WalkParams,
    n: usize,
    h: f64,
    scheme: Difference,
) -> Result<SpeedDerivative> {
    let beta = params.beta;
    if !(h > 0.0) {
        return Err(Error::InvalidParams("step h must be positive"));
    }
    let v = |b: f64| exact_speed(&params.with_beta(b)?, n);
    let speed = v(beta)?;
    let quotient = |h: f64| -> Result<f64> {
        if beta == 0.0 {
            Ok((v(h)? - speed) / h)
        } else if beta == 1.0 {
            Ok((speed - v(1.0 - h)?) / h)
        } else {
            if h >= beta.min(1.0 - beta) {
                return Err(Error::InvalidParams(
                    "step h must be below min(beta, 1 - beta)",
                ));
            }
            Ok((v(beta + h)? - v(beta - h)?) / (2.0 * h))
        }
    };
    let one_sided = beta == 0.0 || beta == 1.0;
    let finite_difference = match scheme {
        Difference::Plain => quotient(h)?,
        Difference::Richardson => {
            let (coarse, fine) = (quotient(h)?, quotient(h / 2.0)?);
            if one_sided {
                2.0 * fine - coarse
            } else {
                (4.0 * fine - coarse) / 3.0
            }
        }
    };
    let d = params.d as f64;
    let nf = n as f64;
    let mut first = CompensatedSum::new();
    let mut second = CompensatedSum::new();
    let mut failure = None;
    Enumerator::new(*params, n, DEFAULT_BUDGET)?.for_each(|path, p| {
        let ex = path.excited_count() as f64;
        first.add(p * ex / nf);
        if beta != 0.0 {
            match path.weight_state(FlagSource::Excitation, beta, beta) {
                Ok(w) => second.add(p * ex * w.v_score / nf),
                Err(e) => failure = Some(e),
            }
        }
        Ok(())
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(SpeedDerivative {
        speed,
        finite_difference,
        score_formula: first.value() / d + beta / d * second.value(),
    })
}

/// Every path of length `n` with excitation flags for threshold `params.m`.
fn geometric(params: &WalkParams, n: usize, budget: u128) -> Result<Enumerator<f64>> {
    // Zero bias reaches every path; flags depend on geometry only.
    let mut all = *params;
    all.beta = 0.0;
    if all.kind == WalkKind::Symmetric {
        all.kind = WalkKind::MErw;
    }
    Enumerator::new(all, n, budget)
}

/// `max over paths |P_beta0(path) M_n(path) - P_beta(path)|`.
///
/// Paths outside the support of the reference law contribute `P_beta(path)`.
pub fn girsanov_check(params: &WalkParams, beta0: f64, beta: f64, n: usize) -> Result<f64> {
    params.with_beta(beta)?;
    params.with_beta(beta0)?;
    let mut worst = 0.0f64;
    geometric(params, n, DEFAULT_BUDGET)?.for_each(|path, _| {
        let target = path.probability(beta);
        let reference = path.probability(beta0);
        let moved = if reference == 0.0 {
            0.0
        } else {
            reference
                * path
                    .weight_state(FlagSource::Excitation, beta, beta0)?
                    .weight()
        };
        worst = worst.max((moved - target).abs());
        Ok(())
    })?;
    Ok(worst)
}

/// [`girsanov_check`] in exact arithmetic.
pub fn girsanov_check_rational(
    params: &WalkParams,
    beta0: &Rational,
    beta: &Rational,
    n: usize,
) -> Result<Rational> {
    for b in [beta0, beta] {
        if *b < Rational::zero() || *b > Rational::one() {
            return Err(Error::InvalidParams("beta must lie in [0, 1]"));
        }
    }
    let mut worst = Rational::zero();
    geometric(params, n, DEFAULT_BUDGET)?.for_each(|path, _| {
        let target = path.probability_exact(beta)?;
        let reference = path.probability_exact(beta0)?;
        let moved = if Zero::is_zero(&reference) {
            Rational::zero()
        } else {
            let mut m = Rational::one();
            for (&e, &f) in path.increments().iter().zip(path.excitation()) {
                if f && e != 0 {
                    let ratio =
                        drift_factor(beta, e)?.checked_div_exact(&drift_factor(beta0, e)?)?;
                    m = m.checked_mul(&ratio).ok_or(Error::RationalOverflow)?;
                }
            }
            reference.checked_mul(&m).ok_or(Error::RationalOverflow)?
        };
        let gap = moved
            .checked_sub(&target)
            .ok_or(Error::RationalOverflow)?
            .abs();
        if gap > worst {
            worst = gap;
        }
        Ok(())
    })?;
    Ok(worst)
}

trait CheckedDivExact: Sized {
    fn checked_div_exact(&self, other: &Self) -> Result<Self>;
}

impl CheckedDivExact for Rational {
    fn checked_div_exact(&self, other: &Self) -> Result<Self> {
        num_traits::CheckedDiv::checked_div(self, other).ok_or(Error::RationalOverflow)
    }
}
