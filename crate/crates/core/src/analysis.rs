//! Mixing analysis: exact evolution of the chain's distribution on the
//! enumerated state space, empirical distances, influence bounds, predicted
//! mixing times and the scalar inequalities the bounds rest on.

use num_bigint::BigUint;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;

use crate::chains::{Block, BlockSchedule, ChainKind, ChainParams, ChainRunner, PathState, ScanOrder};
use crate::error::{Error, Result};
use crate::hgraph::{Colour, ColourGraph};
use crate::rng::stream_seed;
use crate::segment::{class_mask, enumerate_segment, ratio, segment_counts, Boundary, BoundarySpec, StateClass};

/// Default cap on the enumerated state space for exact evolution.
pub const DEFAULT_EVOLUTION_CAP: usize = 20_000;

/// Valid colourings of the path in one class, packed into `u64` codes with
/// site 1 in the most significant bits, sorted (hence lexicographic).
#[derive(Clone, Debug)]
pub struct PackedSpace {
    pub n: usize,
    pub q: usize,
    pub class: StateClass,
    bits: u32,
    pub codes: Vec<u64>,
}

impl PackedSpace {
    pub fn enumerate(h: &ColourGraph, n: usize, class: StateClass, cap: usize) -> Result<Self> {
        let q = h.q();
        let bits = (usize::BITS - (q - 1).max(1).leading_zeros()).max(1);
        if n as u32 * bits > 64 {
            return Err(Error::CapExceeded {
                what: "packing states into 64 bits".into(),
                needed: (n as u128) * bits as u128,
                cap: 64,
            });
        }
        let bc = BoundarySpec::free().with_mask(class_mask(h, class, 1, n)?);
        let counts = segment_counts(h, n, &bc)?;
        let needed: u128 = counts.total.clone().try_into().unwrap_or(u128::MAX);
        if needed > cap as u128 {
            return Err(Error::CapExceeded {
                what: format!("state space of the {n}-site path"),
                needed,
                cap: cap as u128,
            });
        }
        let mut codes = Vec::with_capacity(needed as usize);
        let mut stack: Vec<(usize, u64)> =
            h.colours().rev().filter(|&k| !counts.table[1][k as usize].is_zero()).map(|k| (1usize, k as u64)).collect();
        while let Some((j, code)) = stack.pop() {
            if j == n {
                codes.push(code);
                continue;
            }
            let last = (code & ((1 << bits) - 1)) as Colour;
            for &k in h.neighbours(last).iter().rev() {
                if !counts.table[j + 1][k as usize].is_zero() {
                    stack.push((j + 1, (code << bits) | k as u64));
                }
            }
        }
        debug_assert!(codes.windows(2).all(|w| w[0] < w[1]));
        Ok(PackedSpace { n, q, class, bits, codes })
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn encode(&self, state: &PathState) -> u64 {
        state.colours.iter().fold(0u64, |acc, &c| (acc << self.bits) | c as u64)
    }

    pub fn decode(&self, code: u64) -> PathState {
        let m = (1u64 << self.bits) - 1;
        PathState::new((0..self.n).rev().map(|k| ((code >> (k as u32 * self.bits)) & m) as Colour).collect())
    }

    pub fn index_of(&self, state: &PathState) -> Option<usize> {
        if state.n() != self.n {
            return None;
        }
        self.codes.binary_search(&self.encode(state)).ok()
    }

    pub fn state(&self, idx: usize) -> PathState {
        self.decode(self.codes[idx])
    }

    fn block_bits(&self, block: Block) -> u64 {
        let mut mask = 0u64;
        for j in block.lo..=block.hi {
            mask |= ((1u64 << self.bits) - 1) << ((self.n - j) as u32 * self.bits);
        }
        mask
    }
}

/// Heat-bath move on one block as a map on distributions: states that agree
/// off the block form a group, and the move spreads each group's mass
/// evenly over it.
#[derive(Clone, Debug)]
struct BlockOp {
    group: Vec<u32>,
    inv_size: Vec<f64>,
}

impl BlockOp {
    fn new(space: &PackedSpace, block: Block) -> Self {
        let outside = !space.block_bits(block);
        let mut keyed: Vec<(u64, u32)> =
            space.codes.iter().enumerate().map(|(i, &c)| (c & outside, i as u32)).collect();
        keyed.sort_unstable();
        let mut group = vec![0u32; space.len()];
        let mut sizes: Vec<u32> = Vec::new();
        let mut prev = None;
        for &(key, idx) in &keyed {
            if prev != Some(key) {
                sizes.push(0);
                prev = Some(key);
            }
            let g = sizes.len() - 1;
            sizes[g] += 1;
            group[idx as usize] = g as u32;
        }
        BlockOp { group, inv_size: sizes.iter().map(|&s| 1.0 / s as f64).collect() }
    }

    fn apply(&self, mu: &mut [f64], scratch: &mut Vec<f64>) {
        scratch.clear();
        scratch.resize(self.inv_size.len(), 0.0);
        for (&g, &m) in self.group.iter().zip(mu.iter()) {
            scratch[g as usize] += m;
        }
        for (&g, m) in self.group.iter().zip(mu.iter_mut()) {
            *m = scratch[g as usize] * self.inv_size[g as usize];
        }
    }
}

/// A chain on the enumerated state space, evolved exactly.
#[derive(Clone, Debug)]
pub struct ExactChain {
    pub space: PackedSpace,
    pub kind: ChainKind,
    pub schedule: BlockSchedule,
    order: Vec<usize>,
    ops: Vec<BlockOp>,
}

impl ExactChain {
    /// `order` must be deterministic; the random-update chain ignores it.
    pub fn new(h: &ColourGraph, params: &ChainParams, n: usize, order: &ScanOrder, cap: usize) -> Result<Self> {
        let schedule = params.schedule(n)?;
        let order = match (params.kind, order) {
            (ChainKind::Rnd, _) | (_, ScanOrder::Ascending) => (0..schedule.len()).collect(),
            (ChainKind::FixedOrder, _) => {
                return Err(Error::InvalidOrder("the fixed-order chain scans blocks in ascending order".into()))
            }
            (_, ScanOrder::Permutation(p)) => {
                let mut sorted = p.clone();
                sorted.sort_unstable();
                if sorted != (0..schedule.len()).collect::<Vec<_>>() {
                    return Err(Error::InvalidOrder(format!("{p:?} is not a permutation")));
                }
                p.clone()
            }
            (_, ScanOrder::RandomPerScan) => {
                return Err(Error::InvalidOrder("exact evolution needs a fixed scan order".into()))
            }
        };
        let space = PackedSpace::enumerate(h, n, params.class, cap)?;
        let ops = schedule.blocks.iter().map(|&b| BlockOp::new(&space, b)).collect();
        Ok(ExactChain { space, kind: params.kind, schedule, order, ops })
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    pub fn point_mass(&self, start: &PathState) -> Result<Vec<f64>> {
        let idx = self
            .space
            .index_of(start)
            .ok_or_else(|| Error::InvalidParameter("start is not a valid colouring in the chain's class".into()))?;
        let mut mu = vec![0.0; self.len()];
        mu[idx] = 1.0;
        Ok(mu)
    }

    pub fn uniform(&self) -> Vec<f64> {
        vec![1.0 / self.len() as f64; self.len()]
    }

    /// One scan, or one step of the random-update chain.
    pub fn step(&self, mu: &mut [f64]) {
        let mut scratch = Vec::new();
        match self.kind {
            ChainKind::Rnd => {
                let mut acc = vec![0.0; mu.len()];
                let mut tmp = vec![0.0; mu.len()];
                for op in &self.ops {
                    tmp.copy_from_slice(mu);
                    op.apply(&mut tmp, &mut scratch);
                    acc.iter_mut().zip(&tmp).for_each(|(a, t)| *a += t);
                }
                let b = self.ops.len() as f64;
                mu.iter_mut().zip(&acc).for_each(|(m, a)| *m = a / b);
            }
            _ => {
                for &k in &self.order {
                    self.ops[k].apply(mu, &mut scratch);
                }
            }
        }
    }

    pub fn tv_to_uniform(&self, mu: &[f64]) -> f64 {
        let u = 1.0 / self.len() as f64;
        0.5 * mu.iter().map(|m| (m - u).abs()).sum::<f64>()
    }

    /// Exact TV to uniform after `0..=t_max` scans from a point mass.
    pub fn curve(&self, start: &PathState, t_max: usize) -> Result<TvCurve> {
        let mut mu = self.point_mass(start)?;
        let mut points = vec![(0, self.tv_to_uniform(&mu))];
        for t in 1..=t_max {
            self.step(&mut mu);
            points.push((t, self.tv_to_uniform(&mu)));
        }
        Ok(TvCurve { points, mode: CurveMode::Exact })
    }

    /// Largest deviation from uniform after one step started at uniform.
    pub fn stationarity_residual(&self) -> f64 {
        let mut mu = self.uniform();
        self.step(&mut mu);
        let u = 1.0 / self.len() as f64;
        mu.iter().map(|m| (m - u).abs()).fold(0.0, f64::max)
    }

    /// Lexicographic first and last states plus `random` uniform draws.
    pub fn start_panel(&self, random: usize, seed: u64) -> Vec<PathState> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = vec![self.space.state(0), self.space.state(self.len() - 1)];
        for _ in 0..random {
            out.push(self.space.state(rng.gen_range(0..self.len())));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum CurveMode {
    Exact,
    Empirical { samples: usize, ci_half_width: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TvCurve {
    pub points: Vec<(usize, f64)>,
    pub mode: CurveMode,
}

impl TvCurve {
    pub fn tv_at(&self, t: usize) -> Option<f64> {
        self.points.iter().find(|p| p.0 == t).map(|p| p.1)
    }

    /// CSV `t,tv` (plus `ci` for empirical curves).
    pub fn to_csv(&self) -> String {
        match &self.mode {
            CurveMode::Exact => {
                let mut out = String::from("t,tv\n");
                for (t, tv) in &self.points {
                    out.push_str(&format!("{t},{tv}\n"));
                }
                out
            }
            CurveMode::Empirical { ci_half_width, .. } => {
                let mut out = String::from("t,tv,ci\n");
                for ((t, tv), ci) in self.points.iter().zip(ci_half_width) {
                    out.push_str(&format!("{t},{tv},{ci}\n"));
                }
                out
            }
        }
    }

    /// Whether the curve never increases by more than `tol`.
    pub fn is_non_increasing(&self, tol: f64) -> bool {
        self.points.windows(2).all(|w| w[1].1 <= w[0].1 + tol)
    }
}

/// Exact TV curve from a point mass at `start`.
pub fn evolve_distribution(
    h: &ColourGraph,
    params: &ChainParams,
    n: usize,
    start: &PathState,
    t_max: usize,
    order: &ScanOrder,
    cap: usize,
) -> Result<TvCurve> {
    ExactChain::new(h, params, n, order, cap)?.curve(start, t_max)
}

/// Least recorded `t >= 1` with `tv <= eps`. Mixing times count from one
/// step, so `eps >= 1` gives 1.
pub fn mixing_time_exact(curve: &TvCurve, eps: f64) -> Result<usize> {
    if eps >= 1.0 {
        return Ok(1);
    }
    curve.points.iter().find(|&&(t, tv)| t >= 1 && tv <= eps).map(|p| p.0).ok_or(Error::NotReached { eps })
}

/// Sparse exact transition matrix of one block move on an explicit list of
/// states, built by enumerating the block's fillings.
pub fn block_transition_matrix(
    h: &ColourGraph,
    states: &[PathState],
    block: Block,
    class: StateClass,
) -> Result<Vec<Vec<(usize, f64)>>> {
    let index: HashMap<&PathState, usize> = states.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let mask = class_mask(h, class, block.lo, block.len())?;
    let mut cache: HashMap<(Boundary, Boundary), Vec<Vec<Colour>>> = HashMap::new();
    let mut rows = Vec::with_capacity(states.len());
    for x in states {
        let (l, r) = block.boundary(x);
        let fills = match cache.get(&(l, r)) {
            Some(f) => f,
            None => {
                let bc = BoundarySpec::new(l, r).with_mask(mask.clone());
                let f = enumerate_segment(h, block.len(), &bc, usize::MAX)?;
                cache.entry((l, r)).or_insert(f)
            }
        };
        if fills.is_empty() {
            return Err(Error::EmptySupport(format!("block {}..={} from {:?}", block.lo, block.hi, x.colours)));
        }
        let p = 1.0 / fills.len() as f64;
        let mut row = Vec::with_capacity(fills.len());
        for f in fills {
            let mut y = x.clone();
            y.colours[block.lo - 1..block.hi].copy_from_slice(f);
            let j = *index
                .get(&y)
                .ok_or_else(|| Error::InvalidParameter("block move leaves the supplied state list".into()))?;
            row.push((j, p));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// `mu P` for a sparse row-stochastic `P`.
pub fn apply_sparse(rows: &[Vec<(usize, f64)>], mu: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; mu.len()];
    for (i, row) in rows.iter().enumerate() {
        for &(j, p) in row {
            out[j] += mu[i] * p;
        }
    }
    out
}

/// What an empirical estimate compares.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Projection {
    /// The whole state (needs an enumerable state space).
    Full,
    /// Colours of sites `lo..=hi` (at most 8 sites).
    Window { lo: usize, hi: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalTv {
    pub tv: f64,
    /// 99% half-width.
    pub ci_half_width: f64,
    pub samples: usize,
    pub outcomes: usize,
    pub projection: Projection,
}

impl EmpiricalTv {
    pub fn upper(&self) -> f64 {
        self.tv + self.ci_half_width
    }

    pub fn lower(&self) -> f64 {
        (self.tv - self.ci_half_width).max(0.0)
    }
}

/// Half-width of a `1 - delta` confidence band for the TV between an
/// `samples`-draw empirical law on `outcomes` outcomes and its target, from
/// the Bretagnolle-Huber-Carol inequality.
pub fn tv_confidence_half_width(outcomes: usize, samples: usize, delta: f64) -> f64 {
    let k = outcomes.max(1) as f64;
    (0.5 * (2.0 * (k * std::f64::consts::LN_2 + (1.0 / delta).ln()) / samples as f64).sqrt()).min(1.0)
}

/// TV between an empirical histogram and a target law on the same outcomes.
/// Outcomes missing from `target` count in full.
pub fn empirical_vs_target<K: std::hash::Hash + Eq>(
    hist: &HashMap<K, usize>,
    target: &HashMap<K, f64>,
    samples: usize,
) -> f64 {
    let mut tv = 0.0;
    for (k, &p) in target {
        let e = hist.get(k).copied().unwrap_or(0) as f64 / samples as f64;
        tv += (e - p).abs();
    }
    for (k, &c) in hist {
        if !target.contains_key(k) {
            tv += c as f64 / samples as f64;
        }
    }
    0.5 * tv
}

/// Exact law of the colours on sites `lo..=hi` under the uniform law of the
/// class.
pub fn window_law(
    h: &ColourGraph,
    n: usize,
    class: StateClass,
    lo: usize,
    hi: usize,
) -> Result<HashMap<Vec<Colour>, f64>> {
    if lo == 0 || hi < lo || hi > n || hi - lo >= 8 {
        return Err(Error::InvalidParameter(format!("window {lo}..={hi} on {n} sites")));
    }
    let mask_all = class_mask(h, class, 1, n)?;
    let sub = |a: usize, b: usize| mask_all.as_ref().map(|m| m[a - 1..b].to_vec());
    let win = enumerate_segment(h, hi - lo + 1, &BoundarySpec::free().with_mask(sub(lo, hi)), 1 << 24)?;
    let mut weights: Vec<(Vec<Colour>, BigUint)> = Vec::with_capacity(win.len());
    let mut total = BigUint::zero();
    for w in win {
        let left = if lo > 1 {
            let bc = BoundarySpec::new(Boundary::Free, Boundary::Colour(w[0])).with_mask(sub(1, lo - 1));
            segment_counts(h, lo - 1, &bc)?.total
        } else {
            BigUint::from(1u32)
        };
        let right = if hi < n {
            let bc = BoundarySpec::new(Boundary::Colour(*w.last().unwrap()), Boundary::Free).with_mask(sub(hi + 1, n));
            segment_counts(h, n - hi, &bc)?.total
        } else {
            BigUint::from(1u32)
        };
        let wt = left * right;
        total += &wt;
        weights.push((w, wt));
    }
    Ok(weights.into_iter().filter(|(_, w)| !w.is_zero()).map(|(k, w)| (k, ratio(&w, &total))).collect())
}

/// Run `samples` independent replicas for `t` scans (or steps) from
/// `start` and compare their law with the exact uniform law.
#[allow(clippy::too_many_arguments)]
pub fn empirical_tv(
    h: &ColourGraph,
    params: &ChainParams,
    start: &PathState,
    t: usize,
    samples: usize,
    projection: Projection,
    seed: u64,
    cap: usize,
) -> Result<EmpiricalTv> {
    let n = start.n();
    let target: HashMap<Vec<Colour>, f64> = match projection {
        Projection::Full => {
            let space = PackedSpace::enumerate(h, n, params.class, cap)?;
            let p = 1.0 / space.len() as f64;
            space.codes.iter().map(|&c| (space.decode(c).colours, p)).collect()
        }
        Projection::Window { lo, hi } => window_law(h, n, params.class, lo, hi)?,
    };
    let schedule = params.schedule(n)?;
    let project = |s: &PathState| -> Vec<Colour> {
        match projection {
            Projection::Full => s.colours.clone(),
            Projection::Window { lo, hi } => s.colours[lo - 1..hi].to_vec(),
        }
    };
    // replicas are split into fixed chunks so results do not depend on threads
    let chunk = 1024;
    let chunks = samples.div_ceil(chunk);
    let hist = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<HashMap<Vec<Colour>, usize>> {
            let mut runner = ChainRunner::new(h, params, schedule.clone());
            let mut local = HashMap::new();
            for r in c * chunk..((c + 1) * chunk).min(samples) {
                let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, r as u64));
                let mut s = start.clone();
                for _ in 0..t {
                    runner.advance(&mut s, &mut rng)?;
                }
                *local.entry(project(&s)).or_insert(0) += 1;
            }
            Ok(local)
        })
        .try_reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            Ok(a)
        })?;
    Ok(EmpiricalTv {
        tv: empirical_vs_target(&hist, &target, samples),
        ci_half_width: tv_confidence_half_width(target.len(), samples, 0.01),
        samples,
        outcomes: target.len(),
        projection,
    })
}

/// Influence bound for the any-order chain with block length `l1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaReport {
    pub max_degree: usize,
    pub l1: usize,
    /// `max_d alpha(d)` over boundary distances `d in 1..=ceil(l1/2)`.
    pub alpha_exact_max: f64,
    pub argmax_distance: usize,
    /// `(1 - 1/D^2) + (1 - 1/D^2)^(l1 - 1)`.
    pub alpha_simple: f64,
    /// `1 - 1/(D^2 (D^2 + 1))`.
    pub threshold: f64,
    pub pass: bool,
}

/// Total influence on a site at distance `d` from the nearer block end:
/// `r^d + r^(l1-d+1)` for `d >= 2` and `r + r^(l1-1)` for `d = 1`, with
/// `r = 1 - 1/D^2`.
pub fn alpha_at_distance(max_degree: usize, l1: usize, d: usize) -> f64 {
    let r = 1.0 - 1.0 / (max_degree * max_degree) as f64;
    if d == 1 {
        r + r.powi(l1 as i32 - 1)
    } else {
        r.powi(d as i32) + r.powi((l1 + 1 - d) as i32)
    }
}

pub fn dobrushin_alpha(h: &ColourGraph, l1: usize) -> Result<AlphaReport> {
    if let Some((a, b)) = h.two_path_witness() {
        return Err(Error::ConditionViolated(format!("colours {a} and {b} share no neighbour")));
    }
    if l1 < 2 {
        return Err(Error::InvalidParameter("block length must be at least 2".into()));
    }
    let dmax = h.max_degree();
    let (mut best, mut arg) = (f64::NEG_INFINITY, 1);
    for d in 1..=l1.div_ceil(2) {
        let a = alpha_at_distance(dmax, l1, d);
        if a > best {
            best = a;
            arg = d;
        }
    }
    let d2 = (dmax * dmax) as f64;
    let alpha_simple = alpha_at_distance(dmax, l1, 1);
    let threshold = 1.0 - 1.0 / (d2 * (d2 + 1.0));
    Ok(AlphaReport {
        max_degree: dmax,
        l1,
        alpha_exact_max: best,
        argmax_distance: arg,
        alpha_simple,
        threshold,
        pass: best <= alpha_simple && alpha_simple < threshold,
    })
}

/// A colour pair with no common neighbour, and the single-site disagreement
/// that every coupling of the next site fails to repair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Obstruction {
    pub pair: (Colour, Colour),
    /// Both colours lie in the same colour class of a bipartite `H` (or `H`
    /// is not bipartite), so the flipped state stays in the extended space.
    pub same_class: bool,
    pub x: PathState,
    pub y: PathState,
    /// The disagreement site; the block is `site + 1 ..= n`.
    pub site: usize,
    pub next_support_x: Vec<Colour>,
    pub next_support_y: Vec<Colour>,
    pub disjoint: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObstructionReport {
    pub obstruction: Option<Obstruction>,
}

/// Find a colour pair with disjoint neighbourhoods. Same-class pairs win,
/// then the pair furthest apart in `H`, then the lexicographically first.
pub fn two_path_obstruction(h: &ColourGraph) -> Result<ObstructionReport> {
    let classes = h.colour_classes();
    let dist = h.distances();
    let mut best: Option<((bool, usize), (Colour, Colour))> = None;
    for c1 in h.colours() {
        for c2 in h.colours().filter(|&c| c > c1) {
            if h.neighbours(c1).iter().any(|&k| h.adjacent(k, c2)) {
                continue;
            }
            let same = match &classes {
                crate::hgraph::Bipartition::Bipartite { class_of } => class_of[c1 as usize] == class_of[c2 as usize],
                _ => true,
            };
            let key = (same, dist[c1 as usize][c2 as usize]);
            if best.as_ref().is_none_or(|(k, _)| key > *k) {
                best = Some((key, (c1, c2)));
            }
        }
    }
    let Some(((same_class, _), (c1, c2))) = best else {
        return Ok(ObstructionReport { obstruction: None });
    };
    let n = 3;
    let mut x = vec![c1];
    while x.len() < n {
        x.push(h.neighbours(*x.last().unwrap())[0]);
    }
    let x = PathState::new(x);
    let mut y = x.clone();
    y.colours[0] = c2;
    let support = |c: Colour| -> Result<Vec<Colour>> {
        let m = crate::segment::site_marginal(h, n - 1, &BoundarySpec::new(Boundary::Colour(c), Boundary::Free), 1)?;
        Ok(m.support)
    };
    let sx = support(c1)?;
    let sy = support(c2)?;
    let disjoint = sx.iter().all(|c| !sy.contains(c));
    Ok(ObstructionReport {
        obstruction: Some(Obstruction {
            pair: (c1, c2),
            same_class,
            x,
            y,
            site: 1,
            next_support_x: sx,
            next_support_y: sy,
            disjoint,
        }),
    })
}

/// Predicted mixing time at canonical constants.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixingBound {
    pub kind: ChainKind,
    /// Scans for the scan chains, block updates for the random-update chain.
    pub value: f64,
    pub unit: &'static str,
}

/// `ceil(D^2 (D^2 + 1) ln(n/eps))` scans (any order),
/// `ceil((4 s q^s + 2) ln(n/eps))` scans (fixed order),
/// `ceil((n + 2 s q^s + s - 1) ln(n/eps) / s)` block updates (random).
pub fn predicted_mixing_bound(kind: ChainKind, h: &ColourGraph, n: usize, eps: f64) -> Result<MixingBound> {
    if n == 0 || !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter("need n >= 1 and 0 < eps <= 1".into()));
    }
    let log = (n as f64 / eps).ln();
    let q = h.q() as f64;
    let s = 4.0 * q + 1.0;
    let qs = q.powf(s);
    let (value, unit) = match kind {
        ChainKind::AnyOrder => {
            let d2 = (h.max_degree() * h.max_degree()) as f64;
            ((d2 * (d2 + 1.0) * log).ceil(), "scans")
        }
        ChainKind::FixedOrder => (((4.0 * s * qs + 2.0) * log).ceil(), "scans"),
        ChainKind::Rnd => (((n as f64 + 2.0 * s * qs + s - 1.0) * log / s).ceil(), "block-updates"),
    };
    Ok(MixingBound { kind, value, unit })
}

/// Grid for [`check_identities`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityRanges {
    pub p_steps: usize,
    pub j_max: usize,
    pub l_max: usize,
    pub s_max: usize,
    pub k_max: usize,
    pub x_max: usize,
}

impl Default for IdentityRanges {
    fn default() -> Self {
        IdentityRanges { p_steps: 100, j_max: 50, l_max: 120, s_max: 20, k_max: 20, x_max: 50 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub sum_rank_checked: usize,
    pub sum_rank_violations: usize,
    /// Smallest `lhs - rhs` seen.
    pub sum_rank_min_slack: f64,
    pub floor_sum_checked: usize,
    pub floor_sum_violations: usize,
    /// Smallest `s x - sum` seen.
    pub floor_sum_min_slack: f64,
    pub pass: bool,
}

/// Checks `p^j + p^(l-j+1) >= p^(j+1) + p^(l-j)` for `p in [0, 1]`,
/// `l >= 2j`, and `sum_{j=1}^{s k} (1 - 1/x)^floor(j/s) < s x`.
pub fn check_identities(r: &IdentityRanges) -> IdentityReport {
    let tol = 1e-12;
    let (mut sr_n, mut sr_bad, mut sr_min) = (0, 0, f64::INFINITY);
    for step in 0..=r.p_steps {
        let p = step as f64 / r.p_steps as f64;
        for j in 1..=r.j_max {
            for l in 2 * j..=r.l_max.max(2 * j) {
                let lhs = p.powi(j as i32) + p.powi((l - j + 1) as i32);
                let rhs = p.powi(j as i32 + 1) + p.powi((l - j) as i32);
                sr_n += 1;
                sr_min = sr_min.min(lhs - rhs);
                if lhs < rhs - tol {
                    sr_bad += 1;
                }
            }
        }
    }
    let (mut fs_n, mut fs_bad, mut fs_min) = (0, 0, f64::INFINITY);
    for s in 1..=r.s_max {
        for k in 1..=r.k_max {
            for x in 1..=r.x_max {
                let base = 1.0 - 1.0 / x as f64;
                let sum: f64 = (1..=s * k).map(|j| base.powi((j / s) as i32)).sum();
                let slack = (s * x) as f64 - sum;
                fs_n += 1;
                fs_min = fs_min.min(slack);
                if slack <= 0.0 {
                    fs_bad += 1;
                }
            }
        }
    }
    IdentityReport {
        sum_rank_checked: sr_n,
        sum_rank_violations: sr_bad,
        sum_rank_min_slack: sr_min,
        floor_sum_checked: fs_n,
        floor_sum_violations: fs_bad,
        floor_sum_min_slack: fs_min,
        pass: sr_bad == 0 && fs_bad == 0,
    }
}
