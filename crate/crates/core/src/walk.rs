//! The m-excited walk family on `Z^d`.
//!
//! A walk at a site it has visited fewer than `m` times before (an *excited*
//! site) steps `+e1` with probability `(1+beta)/2d`, `-e1` with probability
//! `(1-beta)/2d` and each transverse direction with `1/2d`; elsewhere it
//! steps uniformly. `m = Infinite` gives the biased simple random walk.
//!
//! Every step consumes exactly one uniform draw, mapped through the cumulative
//! move distribution in the fixed order `+e1, -e1, +e2, -e2, ...`, so a
//! trajectory is a deterministic function of `(params, seed)` and longer runs
//! extend shorter ones.

use alloc::vec;
use alloc::vec::Vec;
use core::num::NonZeroU32;

use hashbrown::HashMap;
use rand_core::RngCore;
use rustc_hash::FxBuildHasher;

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, uniform};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WalkKind {
    /// m-excited random walk.
    MErw,
    /// Every step is excited; no visit bookkeeping is needed for the law.
    BiasedSrw,
    /// `beta = 0`.
    Symmetric,
}

/// Excitation threshold `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Excitation {
    Finite(NonZeroU32),
    Infinite,
}

impl Excitation {
    pub fn finite(m: u32) -> Result<Self> {
        NonZeroU32::new(m)
            .map(Excitation::Finite)
            .ok_or(Error::InvalidParams("m must be at least 1"))
    }

    /// Whether a site with `prior_visits` earlier visits still carries a cookie.
    #[inline]
    pub fn is_excited(self, prior_visits: u32) -> bool {
        match self {
            Excitation::Finite(m) => prior_visits < m.get(),
            Excitation::Infinite => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkParams {
    pub d: usize,
    pub m: Excitation,
    pub beta: f64,
    pub kind: WalkKind,
}

impl WalkParams {
    pub fn erw(d: usize, m: u32, beta: f64) -> Result<Self> {
        let p = WalkParams {
            d,
            m: Excitation::finite(m)?,
            beta,
            kind: WalkKind::MErw,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn biased_srw(d: usize, beta: f64) -> Result<Self> {
        let p = WalkParams {
            d,
            m: Excitation::Infinite,
            beta,
            kind: WalkKind::BiasedSrw,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn symmetric(d: usize) -> Result<Self> {
        let p = WalkParams {
            d,
            m: Excitation::Infinite,
            beta: 0.0,
            kind: WalkKind::Symmetric,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        let p = WalkParams { beta, ..*self };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::InvalidParams("dimension d must be at least 2"));
        }
        if self.d > 64 {
            return Err(Error::InvalidParams("dimension d must be at most 64"));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::InvalidParams("beta must lie in [0, 1]"));
        }
        match self.kind {
            WalkKind::Symmetric if self.beta != 0.0 => {
                Err(Error::InvalidParams("symmetric walks have beta = 0"))
            }
            WalkKind::BiasedSrw if self.m != Excitation::Infinite => {
                Err(Error::InvalidParams("biased SRW requires m = infinite"))
            }
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn is_excited(&self, prior_visits: u32) -> bool {
        match self.kind {
            WalkKind::BiasedSrw => true,
            _ => self.m.is_excited(prior_visits),
        }
    }

    pub fn moves(&self) -> usize {
        2 * self.d
    }
}

/// Index of a unit move in the fixed order `+e1, -e1, +e2, -e2, ...`.
#[inline]
pub fn move_axis_sign(mv: usize) -> (usize, i64) {
    (mv / 2, if mv % 2 == 0 { 1 } else { -1 })
}

/// Probabilities of the `2d` unit moves in the fixed move order.
pub fn step_probabilities(params: &WalkParams, excited: bool) -> Vec<f64> {
    let d = params.d as f64;
    let b = if excited { params.beta } else { 0.0 };
    let mut p = vec![1.0 / (2.0 * d); params.moves()];
    p[0] = (1.0 + b) / (2.0 * d);
    p[1] = (1.0 - b) / (2.0 * d);
    p
}

/// Maps one uniform draw to a move index through the cumulative distribution.
#[inline]
pub fn pick_move(u: f64, d: usize, bias: f64) -> usize {
    // Work in units of 1/(2d): +e1 owns [0, 1+b), -e1 owns [1+b, 2).
    let s = u * (2 * d) as f64;
    let cell = (s as usize).min(2 * d - 1);
    let on_axis = (s >= 1.0 + bias) as usize;
    if cell >= 2 {
        cell
    } else {
        on_axis
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticePoint {
    pub coords: Vec<i64>,
}

impl LatticePoint {
    pub fn origin(d: usize) -> Self {
        LatticePoint { coords: vec![0; d] }
    }

    pub fn new(coords: Vec<i64>) -> Self {
        LatticePoint { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// First coordinate `X = Y . e1`.
    pub fn x(&self) -> i64 {
        self.coords[0]
    }

    /// Transverse coordinates `Z`.
    pub fn z(&self) -> &[i64] {
        &self.coords[1..]
    }

    pub fn stepped(&self, mv: usize) -> Result<LatticePoint> {
        let mut c = self.coords.clone();
        apply_move(&mut c, mv)?;
        Ok(LatticePoint { coords: c })
    }
}

#[inline]
pub(crate) fn apply_move(pos: &mut [i64], mv: usize) -> Result<()> {
    let axis = mv >> 1;
    let sign = 1 - 2 * (mv as i64 & 1);
    let (next, overflow) = pos[axis].overflowing_add(sign);
    if overflow {
        return Err(Error::CoordinateOverflow { axis });
    }
    pos[axis] = next;
    Ok(())
}

/// Move index taking `from` to `to`, if they are nearest neighbours.
pub fn move_between(from: &[i64], to: &[i64]) -> Option<usize> {
    if from.len() != to.len() {
        return None;
    }
    let mut found = None;
    for (axis, (a, b)) in from.iter().zip(to).enumerate() {
        match b.checked_sub(*a)? {
            0 => {}
            1 if found.is_none() => found = Some(2 * axis),
            -1 if found.is_none() => found = Some(2 * axis + 1),
            _ => return None,
        }
    }
    found
}

/// What the map remembers about one site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SiteRecord {
    pub visits: u32,
    /// Time of the most recent visit.
    pub last: u64,
}

/// Tiling of the lattice into cubic blocks of side `2^shift`.
///
/// A hash map sends block coordinates to a block number. Consecutive sites of
/// a nearest-neighbour path mostly share a block, so the last block is cached
/// and the hash map is only consulted on block changes. Block coordinates are
/// packed into a `u128` while they fit and fall back to `Vec<i64>` keys.
#[derive(Debug, Clone)]
struct BlockIndex {
    shift: u32,
    mask: i64,
    key_bits: u32,
    packed: HashMap<u128, usize, FxBuildHasher>,
    wide: HashMap<Vec<i64>, usize, FxBuildHasher>,
    cached: Option<(u128, usize)>,
    blocks: usize,
}

impl BlockIndex {
    fn new(dim: usize, shift: u32) -> Self {
        BlockIndex {
            shift,
            mask: (1i64 << shift) - 1,
            key_bits: (128 / dim as u32).min(64),
            packed: HashMap::with_hasher(FxBuildHasher),
            wide: HashMap::with_hasher(FxBuildHasher),
            cached: None,
            blocks: 0,
        }
    }

    #[inline]
    fn offset(&self, site: &[i64]) -> usize {
        let mut off = 0usize;
        for (axis, &c) in site.iter().enumerate() {
            off |= ((c & self.mask) as usize) << (self.shift as usize * axis);
        }
        off
    }

    #[inline]
    fn pack(&self, site: &[i64]) -> Option<u128> {
        let mut key = 0u128;
        if self.key_bits == 64 {
            for &c in site {
                key = (key << 64) | u128::from(((c >> self.shift) as u64) ^ (1u64 << 63));
            }
        } else {
            let half = 1i64 << (self.key_bits - 1);
            for &c in site {
                let b = c >> self.shift;
                if b < -half || b >= half {
                    return None;
                }
                key = (key << self.key_bits) | ((b + half) as u128);
            }
        }
        Some(key)
    }

    /// Block number of `site`, allocating a new one if needed. The flag is
    /// true when the block is new.
    #[inline]
    fn locate(&mut self, site: &[i64]) -> (usize, bool) {
        match self.pack(site) {
            Some(key) => {
                if let Some((k, b)) = self.cached {
                    if k == key {
                        return (b, false);
                    }
                }
                let next = self.blocks;
                let b = *self.packed.entry(key).or_insert(next);
                self.cached = Some((key, b));
                if b == next {
                    self.blocks += 1;
                }
                (b, b == next)
            }
            None => {
                let key: Vec<i64> = site.iter().map(|&c| c >> self.shift).collect();
                let next = self.blocks;
                let b = *self.wide.entry(key).or_insert(next);
                if b == next {
                    self.blocks += 1;
                }
                (b, b == next)
            }
        }
    }

    fn find(&self, site: &[i64]) -> Option<usize> {
        match self.pack(site) {
            Some(key) => self.packed.get(&key).copied(),
            None => {
                let key: Vec<i64> = site.iter().map(|&c| c >> self.shift).collect();
                self.wide.get(&key).copied()
            }
        }
    }
}

/// Visit counts and last-visit times keyed by lattice site.
#[derive(Debug, Clone)]
pub struct VisitMap {
    dim: usize,
    index: BlockIndex,
    cells_per_block: usize,
    cells: Vec<SiteRecord>,
    distinct: usize,
    total: u64,
}

impl VisitMap {
    pub fn new(dim: usize) -> Self {
        Self::with_capacity(dim, 0)
    }

    /// `capacity` is a hint for the number of distinct sites.
    pub fn with_capacity(dim: usize, capacity: usize) -> Self {
        assert!(dim >= 1);
        let shift = match dim {
            1 | 2 => 4,
            3 => 2,
            4..=10 => 1,
            _ => 0,
        };
        VisitMap {
            dim,
            index: BlockIndex::new(dim, shift),
            cells_per_block: 1usize << (shift as usize * dim),
            cells: Vec::with_capacity(capacity.min(1 << 24)),
            distinct: 0,
            total: 0,
        }
    }

    /// Registers a visit to `site` at `time` and returns what was known before.
    #[inline]
    pub fn record(&mut self, site: &[i64], time: u64) -> Option<SiteRecord> {
        debug_assert_eq!(site.len(), self.dim);
        let (block, fresh) = self.index.locate(site);
        if fresh {
            self.cells.resize(
                self.cells.len() + self.cells_per_block,
                SiteRecord::default(),
            );
        }
        let idx = block * self.cells_per_block + self.index.offset(site);
        let rec = &mut self.cells[idx];
        let prior = *rec;
        rec.visits += 1;
        rec.last = time;
        self.total += 1;
        if prior.visits == 0 {
            self.distinct += 1;
            None
        } else {
            Some(prior)
        }
    }

    pub fn get(&self, site: &[i64]) -> Option<SiteRecord> {
        let block = self.index.find(site)?;
        let rec = self.cells[block * self.cells_per_block + self.index.offset(site)];
        (rec.visits > 0).then_some(rec)
    }

    pub fn count(&self, site: &[i64]) -> u32 {
        self.get(site).map_or(0, |r| r.visits)
    }

    /// Number of distinct sites.
    pub fn len(&self) -> usize {
        self.distinct
    }

    pub fn is_empty(&self) -> bool {
        self.distinct == 0
    }

    /// Sum of all visit counts.
    pub fn total_visits(&self) -> u64 {
        self.total
    }
}

/// Set of visited sites, one bit per site.
#[derive(Debug, Clone)]
pub struct SiteSet {
    dim: usize,
    index: BlockIndex,
    words_per_block: usize,
    words: Vec<u64>,
    len: usize,
}

impl SiteSet {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1);
        // At least one cache line of bits per block.
        let shift = match dim {
            1 | 2 => 5,
            3 => 3,
            4 => 2,
            5..=9 => 1,
            _ => 0,
        };
        let bits = 1usize << (shift as usize * dim);
        SiteSet {
            dim,
            index: BlockIndex::new(dim, shift),
            words_per_block: bits.div_ceil(64),
            words: Vec::new(),
            len: 0,
        }
    }

    /// Adds `site`; returns true if it was not yet present.
    #[inline]
    pub fn insert(&mut self, site: &[i64]) -> bool {
        debug_assert_eq!(site.len(), self.dim);
        let (block, fresh) = self.index.locate(site);
        if fresh {
            self.words
                .resize(self.words.len() + self.words_per_block, 0);
        }
        let bit = self.index.offset(site);
        let word = &mut self.words[block * self.words_per_block + (bit >> 6)];
        let mask = 1u64 << (bit & 63);
        let new = *word & mask == 0;
        *word |= mask;
        self.len += new as usize;
        new
    }

    pub fn contains(&self, site: &[i64]) -> bool {
        self.index.find(site).is_some_and(|block| {
            let bit = self.index.offset(site);
            self.words[block * self.words_per_block + (bit >> 6)] >> (bit & 63) & 1 == 1
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// History of the site occupied at some time, as seen at that time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SiteHistory {
    pub prior_visits: u32,
    /// Steps since the previous visit; `None` on a first visit.
    pub since_last: Option<u64>,
}

impl SiteHistory {
    pub const FRESH: SiteHistory = SiteHistory {
        prior_visits: 0,
        since_last: None,
    };

    pub fn novel(&self) -> bool {
        self.prior_visits == 0
    }

    /// Whether the site differs from the previous `k` positions.
    pub fn window_novel(&self, k: u64) -> bool {
        self.since_last.is_none_or(|g| g > k)
    }

    fn from_record(prior: Option<SiteRecord>, now: u64) -> Self {
        match prior {
            None => SiteHistory::FRESH,
            Some(r) => SiteHistory {
                prior_visits: r.visits,
                since_last: Some(now - r.last),
            },
        }
    }
}

/// One transition `Y_index -> Y_{index+1}` together with the annotations of
/// `Y_index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub index: u64,
    pub mv: usize,
    /// `X_{index+1} - X_index`.
    pub eps: i8,
    pub excited: bool,
    /// `None` for untracked walkers.
    pub history: Option<SiteHistory>,
}

/// How much of the past a [`Walker`] remembers.
#[derive(Debug, Clone)]
enum Tracking {
    Full(VisitMap),
    Sites(SiteSet),
    Off,
}

/// Incremental simulator owning the position and the visit memory.
#[derive(Debug, Clone)]
pub struct Walker {
    params: WalkParams,
    pos: Vec<i64>,
    time: u64,
    tracking: Tracking,
    current: SiteHistory,
}

impl Walker {
    pub fn new(params: WalkParams) -> Result<Self> {
        Self::starting_at(params, LatticePoint::origin(params.d))
    }

    pub fn starting_at(params: WalkParams, origin: LatticePoint) -> Result<Self> {
        params.validate()?;
        if origin.dim() != params.d {
            return Err(Error::InvalidParams("origin dimension differs from d"));
        }
        let mut visits = VisitMap::new(params.d);
        visits.record(&origin.coords, 0);
        Ok(Walker {
            params,
            pos: origin.coords,
            time: 0,
            tracking: Tracking::Full(visits),
            current: SiteHistory::FRESH,
        })
    }

    /// A walker that only remembers which sites were seen.
    ///
    /// Steps report `prior_visits` capped at 1 and no `since_last`, which is
    /// all the law needs when `m = 1` or every step is excited.
    pub fn novelty_only(params: WalkParams) -> Result<Self> {
        params.validate()?;
        let capped = matches!(params.kind, WalkKind::BiasedSrw | WalkKind::Symmetric)
            || params.m == Excitation::Finite(NonZeroU32::MIN);
        if !capped {
            return Err(Error::InvalidParams(
                "novelty-only tracking needs m = 1, biased SRW or the symmetric walk",
            ));
        }
        let mut sites = SiteSet::new(params.d);
        sites.insert(&vec![0; params.d]);
        Ok(Walker {
            params,
            pos: vec![0; params.d],
            time: 0,
            tracking: Tracking::Sites(sites),
            current: SiteHistory::FRESH,
        })
    }

    /// A biased SRW that keeps no visit memory; its steps carry no history.
    pub fn untracked(params: WalkParams) -> Result<Self> {
        params.validate()?;
        if params.kind != WalkKind::BiasedSrw {
            return Err(Error::InvalidParams(
                "only biased SRW can run without a visit map",
            ));
        }
        Ok(Walker {
            params,
            pos: vec![0; params.d],
            time: 0,
            tracking: Tracking::Off,
            current: SiteHistory::FRESH,
        })
    }

    pub fn params(&self) -> &WalkParams {
        &self.params
    }

    pub fn position(&self) -> &[i64] {
        &self.pos
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    /// The full visit map, if this walker keeps one.
    pub fn visits(&self) -> Option<&VisitMap> {
        match &self.tracking {
            Tracking::Full(map) => Some(map),
            _ => None,
        }
    }

    /// History of the current site (the one the next step leaves from).
    pub fn current(&self) -> Option<SiteHistory> {
        match self.tracking {
            Tracking::Off => None,
            _ => Some(self.current),
        }
    }

    /// Distinct sites among `Y_0..Y_t`.
    pub fn range(&self) -> Option<usize> {
        match &self.tracking {
            Tracking::Full(map) => Some(map.len()),
            Tracking::Sites(set) => Some(set.len()),
            Tracking::Off => None,
        }
    }

    #[inline]
    pub fn step<R: RngCore + ?Sized>(&mut self, rng: &mut R) -> Result<Step> {
        let excited = self.params.is_excited(self.current.prior_visits);
        let bias = if excited { self.params.beta } else { 0.0 };
        let mv = pick_move(uniform(rng), self.params.d, bias);
        apply_move(&mut self.pos, mv)?;
        let index = self.time;
        self.time += 1;
        let here = self.current;
        let history = match &mut self.tracking {
            Tracking::Full(map) => {
                let prior = map.record(&self.pos, self.time);
                self.current = SiteHistory::from_record(prior, self.time);
                Some(here)
            }
            Tracking::Sites(set) => {
                let fresh = set.insert(&self.pos);
                self.current = SiteHistory {
                    prior_visits: u32::from(!fresh),
                    since_last: None,
                };
                Some(here)
            }
            Tracking::Off => None,
        };
        Ok(Step {
            index,
            mv,
            eps: eps_of(mv),
            excited,
            history,
        })
    }
}

/// A realized path `Y_0..Y_n` with per-index annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    d: usize,
    /// Flattened `(n+1) x d` coordinates.
    points: Vec<i64>,
    /// `eps[i] = X_{i+1} - X_i`, length `n`.
    eps: Vec<i8>,
    /// First-visit flags for `Y_0..Y_n`.
    novelty: Vec<bool>,
    /// Excitation flags for the departure sites `Y_0..Y_{n-1}`.
    excitation: Vec<bool>,
    /// Steps since the previous visit of `Y_i`, `u64::MAX` when new.
    since_last: Vec<u64>,
}

const NEVER: u64 = u64::MAX;

impl Trajectory {
    fn with_capacity(d: usize, n: usize) -> Self {
        Trajectory {
            d,
            points: Vec::with_capacity((n + 1) * d),
            eps: Vec::with_capacity(n),
            novelty: Vec::with_capacity(n + 1),
            excitation: Vec::with_capacity(n),
            since_last: Vec::with_capacity(n + 1),
        }
    }

    /// Builds a trajectory from explicit points, deriving excitation flags
    /// from `params`.
    pub fn from_points(params: &WalkParams, points: &[LatticePoint]) -> Result<Self> {
        params.validate()?;
        Self::build(params.d, points, |h| params.is_excited(h.prior_visits))
    }

    /// Builds a trajectory from explicit points and externally supplied
    /// excitation flags (one per step).
    pub fn from_parts(d: usize, points: &[LatticePoint], excitation: &[bool]) -> Result<Self> {
        if excitation.len() + 1 != points.len() {
            return Err(Error::InvalidParams("need one excitation flag per step"));
        }
        let mut i = 0;
        Self::build(d, points, |_| {
            let f = excitation[i];
            i += 1;
            f
        })
    }

    fn build(
        d: usize,
        points: &[LatticePoint],
        mut excited: impl FnMut(&SiteHistory) -> bool,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput("trajectory points"));
        }
        if points.iter().any(|p| p.dim() != d) {
            return Err(Error::InvalidParams("point dimension differs from d"));
        }
        let n = points.len() - 1;
        let mut t = Trajectory::with_capacity(d, n);
        let mut map = VisitMap::with_capacity(d, n + 1);
        for (i, p) in points.iter().enumerate() {
            if i > 0 {
                let prev = &points[i - 1].coords;
                let mv = move_between(prev, &p.coords).ok_or(Error::InvalidParams(
                    "consecutive points are not nearest neighbours",
                ))?;
                t.eps.push(eps_of(mv));
            }
            let prior = map.record(&p.coords, i as u64);
            let h = SiteHistory::from_record(prior, i as u64);
            t.points.extend_from_slice(&p.coords);
            t.novelty.push(h.novel());
            t.since_last.push(h.since_last.unwrap_or(NEVER));
            if i < n {
                t.excitation.push(excited(&h));
            }
        }
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Number of steps `n`.
    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }

    pub fn point(&self, i: usize) -> &[i64] {
        &self.points[i * self.d..(i + 1) * self.d]
    }

    pub fn lattice_point(&self, i: usize) -> LatticePoint {
        LatticePoint::new(self.point(i).to_vec())
    }

    pub fn x(&self, i: usize) -> i64 {
        self.points[i * self.d]
    }

    /// `X_0..X_n`.
    pub fn xs(&self) -> Vec<i64> {
        self.points.iter().step_by(self.d).copied().collect()
    }

    pub fn increments(&self) -> &[i8] {
        &self.eps
    }

    pub fn novelty(&self) -> &[bool] {
        &self.novelty
    }

    pub fn excitation(&self) -> &[bool] {
        &self.excitation
    }

    /// Steps since the previous visit of `Y_i` (`None` on first visits).
    pub fn since_last(&self, i: usize) -> Option<u64> {
        match self.since_last[i] {
            NEVER => None,
            g => Some(g),
        }
    }

    /// `N_t = #{i < t : Y_i is a first visit}`.
    pub fn novel_count(&self, t: usize) -> u64 {
        self.novelty[..t].iter().filter(|&&f| f).count() as u64
    }

    /// Number of excited departures among steps `0..t`.
    pub fn excited_count(&self, t: usize) -> u64 {
        self.excitation[..t].iter().filter(|&&f| f).count() as u64
    }

    /// `R_t`: distinct sites among `Y_0..Y_t`.
    pub fn range(&self, t: usize) -> u64 {
        self.novelty[..=t].iter().filter(|&&f| f).count() as u64
    }

    /// `N^(k)_t = #{i < t : Y_i differs from its previous k positions}`.
    pub fn window_novel_count(&self, k: u64, t: usize) -> u64 {
        self.since_last[..t].iter().filter(|&&g| g > k).count() as u64
    }

    /// Visit counts of the whole path `Y_0..Y_n`.
    pub fn visit_map(&self) -> VisitMap {
        let mut map = VisitMap::with_capacity(self.d, self.len() + 1);
        for i in 0..=self.len() {
            map.record(self.point(i), i as u64);
        }
        map
    }
}

#[inline]
fn eps_of(mv: usize) -> i8 {
    // +1 for move 0, -1 for move 1, 0 otherwise.
    (mv < 2) as i8 * (1 - 2 * (mv as i8 & 1))
}

/// Simulates `n_steps` steps from the origin with a generator seeded by `seed`.
pub fn simulate_trajectory(params: &WalkParams, n_steps: usize, seed: u64) -> Result<Trajectory> {
    let mut rng = rng_from_seed(seed);
    simulate_with_rng(params, n_steps, &mut rng)
}

pub fn simulate_with_rng<R: RngCore + ?Sized>(
    params: &WalkParams,
    n_steps: usize,
    rng: &mut R,
) -> Result<Trajectory> {
    let mut walker = Walker::new(*params)?;
    let mut t = Trajectory::with_capacity(params.d, n_steps);
    t.points.extend_from_slice(walker.position());
    t.novelty.push(true);
    t.since_last.push(NEVER);
    for _ in 0..n_steps {
        let s = walker.step(rng)?;
        t.eps.push(s.eps);
        t.excitation.push(s.excited);
        t.points.extend_from_slice(walker.position());
        let h = walker.current().expect("tracked walker");
        t.novelty.push(h.novel());
        t.since_last.push(h.since_last.unwrap_or(NEVER));
    }
    Ok(t)
}

/// Window-novelty flags `1{Y_i not in {Y_{i-1}, ..., Y_{i-k}}}` for every
/// index `0..=n`. For `i <= k` the window is the whole history, so the flag
/// equals the first-visit flag.
pub fn annotate(trajectory: &Trajectory, k: u64) -> Result<Vec<bool>> {
    if k == 0 {
        return Err(Error::InvalidParams("window k must be at least 1"));
    }
    Ok(trajectory.since_last.iter().map(|&g| g > k).collect())
}
