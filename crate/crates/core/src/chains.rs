//! The three block heat-bath chains: parameters, block schedules, updates
//! and scans, plus constructive connectivity witnesses.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::hgraph::{Colour, ColourGraph};
use crate::segment::{class_mask, sample_segment, Boundary, BoundarySpec, Precision, SegmentLaw, StateClass};
use std::collections::hash_map::Entry;
use std::collections::HashMap;

/// A colour per site; site `j` (1-based) is `colours[j - 1]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PathState {
    pub colours: Vec<Colour>,
}

impl PathState {
    pub fn new(colours: Vec<Colour>) -> Self {
        PathState { colours }
    }

    pub fn n(&self) -> usize {
        self.colours.len()
    }

    /// Colour at 1-based site `j`.
    #[inline]
    pub fn at(&self, j: usize) -> Colour {
        self.colours[j - 1]
    }

    pub fn is_valid_colouring(&self, h: &ColourGraph) -> bool {
        self.colours.iter().all(|&c| (c as usize) < h.q()) && h.is_walk(&self.colours)
    }

    /// Whether every site carries a colour allowed by `class` (the extended
    /// space; adjacency is not checked).
    pub fn respects_class(&self, h: &ColourGraph, class: StateClass) -> bool {
        if self.colours.iter().any(|&c| c as usize >= h.q()) {
            return false;
        }
        match class_mask(h, class, 1, self.n()) {
            Ok(None) => true,
            Ok(Some(mask)) => self.colours.iter().zip(&mask).all(|(&c, row)| row[c as usize]),
            Err(_) => false,
        }
    }

    /// Parity class of the state: `Omega` for non-bipartite `H`, otherwise
    /// whichever of `Omega1`/`Omega2` every site respects.
    pub fn class_of(&self, h: &ColourGraph) -> Option<StateClass> {
        if !h.colour_classes().is_bipartite() {
            return self.respects_class(h, StateClass::Omega).then_some(StateClass::Omega);
        }
        [StateClass::Omega1, StateClass::Omega2].into_iter().find(|&c| self.respects_class(h, c))
    }

    pub fn hamming(&self, other: &PathState) -> usize {
        self.colours.iter().zip(&other.colours).filter(|(a, b)| a != b).count()
    }
}

/// Inclusive 1-based site interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Block {
    pub lo: usize,
    pub hi: usize,
}

impl Block {
    pub fn new(lo: usize, hi: usize) -> Self {
        debug_assert!(1 <= lo && lo <= hi);
        Block { lo, hi }
    }

    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, j: usize) -> bool {
        self.lo <= j && j <= self.hi
    }

    /// Boundary condition the block sees inside `state`.
    pub fn boundary(&self, state: &PathState) -> (Boundary, Boundary) {
        let left = if self.lo > 1 { Boundary::Colour(state.at(self.lo - 1)) } else { Boundary::Free };
        let right = if self.hi < state.n() { Boundary::Colour(state.at(self.hi + 1)) } else { Boundary::Free };
        (left, right)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ChainKind {
    AnyOrder,
    FixedOrder,
    Rnd,
}

impl std::str::FromStr for ChainKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "anyorder" => Ok(ChainKind::AnyOrder),
            "fixedorder" => Ok(ChainKind::FixedOrder),
            "rnd" => Ok(ChainKind::Rnd),
            other => Err(Error::InvalidParameter(format!("unknown chain `{other}`"))),
        }
    }
}

/// Replacements for derived constants. Anything overridden voids the
/// theorem guarantees and is flagged in every output.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Overrides {
    pub l1: Option<usize>,
    pub s: Option<usize>,
    pub beta: Option<u64>,
    pub gamma: Option<u64>,
    /// Fixed-order half-block length (default `beta * s`).
    pub u: Option<usize>,
    /// Random-update block length (default `s * gamma`).
    pub w: Option<usize>,
}

impl Overrides {
    pub fn names(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let pairs: [(&'static str, bool); 6] = [
            ("l1", self.l1.is_some()),
            ("s", self.s.is_some()),
            ("beta", self.beta.is_some()),
            ("gamma", self.gamma.is_some()),
            ("u", self.u.is_some()),
            ("w", self.w.is_some()),
        ];
        for (name, set) in pairs {
            if set {
                out.push(name);
            }
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.names().is_empty()
    }
}

/// Derived chain constants. Quantities that grow like `q^s` are kept exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainParams {
    pub kind: ChainKind,
    pub class: StateClass,
    pub q: usize,
    pub max_degree: usize,
    pub l1: usize,
    pub s: usize,
    pub beta: BigUint,
    pub l2: BigUint,
    pub gamma: BigUint,
    pub u: BigUint,
    pub w: BigUint,
    pub overrides: Overrides,
}

/// `ln(x)` for a positive big integer.
pub fn big_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    let shift = bits.saturating_sub(60);
    let head = (x >> shift).to_f64().unwrap_or(f64::INFINITY);
    head.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `l1 = ceil(D^2 ln(D^2 + 1)) + 1` for maximum degree `D`.
pub fn anyorder_block_length(max_degree: usize) -> usize {
    let d2 = (max_degree * max_degree) as f64;
    (d2 * (d2 + 1.0).ln()).ceil() as usize + 1
}

pub fn make_params(h: &ColourGraph, kind: ChainKind, overrides: &Overrides) -> Result<ChainParams> {
    for (name, v) in [("l1", overrides.l1), ("s", overrides.s), ("u", overrides.u), ("w", overrides.w)] {
        if v == Some(0) {
            return Err(Error::InvalidParameter(format!("override {name} must be positive")));
        }
    }
    if overrides.beta == Some(0) || overrides.gamma == Some(0) {
        return Err(Error::InvalidParameter("overrides must be positive".into()));
    }
    let q = h.q();
    let max_degree = h.max_degree();
    let l1 = overrides.l1.unwrap_or_else(|| anyorder_block_length(max_degree));
    let s = overrides.s.unwrap_or(4 * q + 1);
    let qs = BigUint::from(q).pow(s as u32);
    let beta = match overrides.beta {
        Some(b) => BigUint::from(b),
        None => {
            let arg = BigUint::from(2 * s) * &qs + BigUint::one();
            BigUint::from(big_ln(&arg).ceil() as u64) * &qs
        }
    };
    let gamma = match overrides.gamma {
        Some(g) => BigUint::from(g),
        None => BigUint::from(2u32) * &qs + BigUint::one(),
    };
    let l2 = BigUint::from(2 * s) * &beta;
    let u = overrides.u.map_or_else(|| &beta * s, BigUint::from);
    let w = overrides.w.map_or_else(|| &gamma * s, BigUint::from);
    Ok(ChainParams {
        kind,
        class: StateClass::auto(h),
        q,
        max_degree,
        l1,
        s,
        beta,
        l2,
        gamma,
        u,
        w,
        overrides: overrides.clone(),
    })
}

fn small(x: &BigUint, what: &str) -> Result<usize> {
    x.to_usize().ok_or_else(|| Error::CapExceeded {
        what: what.into(),
        needed: x.to_u128().unwrap_or(u128::MAX),
        cap: usize::MAX as u128,
    })
}

impl ChainParams {
    pub fn with_class(mut self, class: StateClass) -> Self {
        self.class = class;
        self
    }

    pub fn u_usize(&self) -> Result<usize> {
        small(&self.u, "fixed-order half-block length")
    }

    pub fn w_usize(&self) -> Result<usize> {
        small(&self.w, "random-update block length")
    }

    /// Block schedule of this chain on the `n`-site path.
    pub fn schedule(&self, n: usize) -> Result<BlockSchedule> {
        match self.kind {
            ChainKind::AnyOrder => Ok(blocks_anyorder(n, self.l1)),
            ChainKind::FixedOrder => blocks_fixedorder(n, self.u_usize()?),
            ChainKind::Rnd => Ok(blocks_rnd(n, self.w_usize()?)),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "kind": self.kind,
            "class": self.class,
            "q": self.q,
            "max_degree": self.max_degree,
            "l1": self.l1,
            "s": self.s,
            "beta": self.beta.to_string(),
            "l2": self.l2.to_string(),
            "gamma": self.gamma.to_string(),
            "u": self.u.to_string(),
            "w": self.w.to_string(),
            "overrides": self.overrides.names(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockSchedule {
    pub kind: ChainKind,
    pub n: usize,
    pub blocks: Vec<Block>,
    /// `l1`, `u` or `w`, depending on `kind`.
    pub size: usize,
}

impl BlockSchedule {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Number of blocks containing each site (index 0 is site 1).
    pub fn multiplicity(&self) -> Vec<usize> {
        let mut m = vec![0; self.n];
        for b in &self.blocks {
            for j in b.lo..=b.hi {
                m[j - 1] += 1;
            }
        }
        m
    }

    /// Single-site resamples in one pass over every block.
    pub fn sites_per_scan(&self) -> usize {
        self.blocks.iter().map(Block::len).sum()
    }
}

/// Tiling by `l1`-site blocks; the last block is shifted left to end at `n`.
pub fn blocks_anyorder(n: usize, l1: usize) -> BlockSchedule {
    assert!(n >= 1 && l1 >= 1);
    let blocks = if n <= l1 {
        vec![Block::new(1, n)]
    } else {
        let m1 = n.div_ceil(l1);
        (1..=m1)
            .map(|k| if k < m1 { Block::new((k - 1) * l1 + 1, k * l1) } else { Block::new(n - l1 + 1, n) })
            .collect()
    };
    BlockSchedule { kind: ChainKind::AnyOrder, n, blocks, size: l1 }
}

/// Blocks `{k u + 1, ..., min((k + 2) u, n)}` for `k = 0..=m2` with
/// `m2 + 1 = floor(n / u)`.
pub fn blocks_fixedorder(n: usize, u: usize) -> Result<BlockSchedule> {
    if u == 0 || n < u {
        return Err(Error::PathTooShort { n, u });
    }
    let count = n / u;
    let blocks = (0..count).map(|k| Block::new(k * u + 1, ((k + 2) * u).min(n))).collect();
    Ok(BlockSchedule { kind: ChainKind::FixedOrder, n, blocks, size: u })
}

/// The `n + w - 1` random-update blocks; every site lies in exactly `w`.
/// Intervals are clamped to the path when `w > n`.
pub fn blocks_rnd(n: usize, w: usize) -> BlockSchedule {
    assert!(n >= 1 && w >= 1);
    let mut blocks: Vec<Block> = (1..=n).map(|k| Block::new(k, (k + w - 1).min(n))).collect();
    blocks.extend((n + 1..n + w).map(|k| Block::new(1, (n + w - k).min(n))));
    BlockSchedule { kind: ChainKind::Rnd, n, blocks, size: w }
}

/// Resample the block uniformly given its boundary colours and the class mask.
pub fn heat_bath_update<R: Rng + ?Sized>(
    h: &ColourGraph,
    state: &PathState,
    block: Block,
    class: StateClass,
    rng: &mut R,
) -> Result<PathState> {
    let mut next = state.clone();
    heat_bath_in_place(h, &mut next, block, class, rng)?;
    Ok(next)
}

pub(crate) fn heat_bath_in_place<R: Rng + ?Sized>(
    h: &ColourGraph,
    state: &mut PathState,
    block: Block,
    class: StateClass,
    rng: &mut R,
) -> Result<()> {
    if block.hi > state.n() {
        return Err(Error::InvalidParameter(format!(
            "block {}..={} outside a {}-site path",
            block.lo,
            block.hi,
            state.n()
        )));
    }
    let (left, right) = block.boundary(state);
    let bc = BoundarySpec::new(left, right).with_mask(class_mask(h, class, block.lo, block.len())?);
    let fill = sample_segment(h, block.len(), &bc, rng).map_err(|e| match e {
        Error::EmptySupport(_) => Error::EmptySupport(format!(
            "block {}..={} with boundary {left:?}/{right:?} in class {class:?} has no filling",
            block.lo, block.hi
        )),
        other => other,
    })?;
    state.colours[block.lo - 1..block.hi].copy_from_slice(&fill);
    Ok(())
}

/// Repeated runs of one chain with per-block laws cached by right boundary.
///
/// Each move samples from `f64` kernels that are ratios of exact counts, so
/// transition probabilities carry only rounding error; this is the engine
/// for long Monte-Carlo runs. Scans use ascending block order.
pub struct ChainRunner<'a> {
    h: &'a ColourGraph,
    params: &'a ChainParams,
    schedule: BlockSchedule,
    laws: HashMap<(usize, Boundary), SegmentLaw>,
    cached: usize,
}

/// Kernel entries kept by a [`ChainRunner`] before its cache is dropped.
const RUNNER_CACHE_ENTRIES: usize = 1 << 22;

impl<'a> ChainRunner<'a> {
    pub fn new(h: &'a ColourGraph, params: &'a ChainParams, schedule: BlockSchedule) -> Self {
        ChainRunner { h, params, schedule, laws: HashMap::new(), cached: 0 }
    }

    pub fn schedule(&self) -> &BlockSchedule {
        &self.schedule
    }

    /// Heat-bath move on block `k`.
    pub fn update<R: Rng + ?Sized>(&mut self, state: &mut PathState, k: usize, rng: &mut R) -> Result<()> {
        let block = self.schedule.blocks[k];
        let (left, right) = block.boundary(state);
        if self.cached > RUNNER_CACHE_ENTRIES {
            self.laws.clear();
            self.cached = 0;
        }
        let law = match self.laws.entry((k, right)) {
            Entry::Occupied(e) => e.into_mut(),
            Entry::Vacant(e) => {
                let bc = BoundarySpec::new(Boundary::Free, right).with_mask(class_mask(
                    self.h,
                    self.params.class,
                    block.lo,
                    block.len(),
                )?);
                self.cached += block.len() * self.h.q() * self.h.q();
                e.insert(SegmentLaw::build(self.h, block.len(), &bc, Precision::Exact)?)
            }
        };
        let fill = law.sample(left, rng).map_err(|_| {
            Error::EmptySupport(format!(
                "block {}..={} with boundary {left:?}/{right:?} has no filling",
                block.lo, block.hi
            ))
        })?;
        state.colours[block.lo - 1..block.hi].copy_from_slice(&fill);
        Ok(())
    }

    /// One scan, or one random-update step.
    pub fn advance<R: Rng + ?Sized>(&mut self, state: &mut PathState, rng: &mut R) -> Result<()> {
        match self.params.kind {
            ChainKind::Rnd => {
                let k = rng.gen_range(0..self.schedule.len());
                self.update(state, k, rng)
            }
            _ => {
                for k in 0..self.schedule.len() {
                    self.update(state, k, rng)?;
                }
                Ok(())
            }
        }
    }
}

/// Order in which a scan visits the blocks of a schedule.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum ScanOrder {
    #[default]
    Ascending,
    /// A fixed permutation of block indices.
    Permutation(Vec<usize>),
    /// A fresh uniformly random permutation every scan.
    RandomPerScan,
}

impl ScanOrder {
    fn indices<R: Rng + ?Sized>(&self, len: usize, kind: ChainKind, rng: &mut R) -> Result<Vec<usize>> {
        let identity: Vec<usize> = (0..len).collect();
        let order = match self {
            ScanOrder::Ascending => identity.clone(),
            ScanOrder::Permutation(p) => {
                let mut sorted = p.clone();
                sorted.sort_unstable();
                if sorted != identity {
                    return Err(Error::InvalidOrder(format!("{p:?} is not a permutation of 0..{len}")));
                }
                p.clone()
            }
            ScanOrder::RandomPerScan => {
                let mut p = identity.clone();
                p.shuffle(rng);
                p
            }
        };
        if kind == ChainKind::FixedOrder && order != identity {
            return Err(Error::InvalidOrder("the fixed-order chain scans blocks in ascending order".into()));
        }
        Ok(order)
    }
}

/// One scan: a heat-bath move on every block in `order`.
pub fn run_scan<R: Rng + ?Sized>(
    h: &ColourGraph,
    params: &ChainParams,
    schedule: &BlockSchedule,
    order: &ScanOrder,
    state: &PathState,
    rng: &mut R,
) -> Result<PathState> {
    if params.kind == ChainKind::Rnd {
        return Err(Error::InvalidParameter("the random-update chain has no scans; use step_rnd".into()));
    }
    let mut next = state.clone();
    for k in order.indices(schedule.len(), params.kind, rng)? {
        heat_bath_in_place(h, &mut next, schedule.blocks[k], params.class, rng)?;
    }
    debug_assert!(!state.is_valid_colouring(h) || next.is_valid_colouring(h));
    Ok(next)
}

/// One random-update step; returns the new state and the chosen block index.
pub fn step_rnd<R: Rng + ?Sized>(
    h: &ColourGraph,
    params: &ChainParams,
    schedule: &BlockSchedule,
    state: &PathState,
    rng: &mut R,
) -> Result<(PathState, usize)> {
    let k = rng.gen_range(0..schedule.len());
    let next = heat_bath_update(h, state, schedule.blocks[k], params.class, rng)?;
    Ok((next, k))
}

fn same_class(h: &ColourGraph, x: &PathState, y: &PathState) -> Result<StateClass> {
    if x.n() != y.n() {
        return Err(Error::InvalidParameter(format!("lengths differ: {} vs {}", x.n(), y.n())));
    }
    match (x.class_of(h), y.class_of(h)) {
        (Some(a), Some(b)) if a == b => Ok(a),
        (Some(_), Some(_)) => Err(Error::ClassMismatch),
        _ => Err(Error::InvalidParameter("state uses colours outside every parity class".into())),
    }
}

/// `z^0 = x, ..., z^n = y` with `z^j = (y_1..y_j, x_{j+1}..x_n)`.
pub fn hamming_path(h: &ColourGraph, x: &PathState, y: &PathState) -> Result<Vec<PathState>> {
    same_class(h, x, y)?;
    let n = x.n();
    Ok((0..=n)
        .map(|j| {
            let mut c = y.colours[..j].to_vec();
            c.extend_from_slice(&x.colours[j..]);
            PathState::new(c)
        })
        .collect())
}

/// Colourings `x = sigma^0, ..., sigma^{m2+1} = y` where consecutive terms
/// differ only inside the fixed-order block between them, so every block
/// move of one scan can take `x` to `y`.
///
/// `sigma^{k+1}` copies `y` up to site `(k + 2) u - L + 1`, keeps `x` beyond
/// `(k + 2) u`, and joins the two with an `L`-edge walk of `H`, where
/// `L = min(s, u + 1)` keeps the joined stretch inside block `k`.
pub fn ergodicity_witness(
    h: &ColourGraph,
    params: &ChainParams,
    x: &PathState,
    y: &PathState,
) -> Result<Vec<PathState>> {
    same_class(h, x, y)?;
    if !x.is_valid_colouring(h) || !y.is_valid_colouring(h) {
        return Err(Error::InvalidParameter("witness endpoints must be valid colourings".into()));
    }
    let n = x.n();
    let u = params.u_usize()?;
    let schedule = blocks_fixedorder(n, u)?;
    let m2 = schedule.len() - 1;
    if x == y {
        return Ok(vec![x.clone(); m2 + 2]);
    }
    let splice = params.s.min(u + 1);
    let mut seq = vec![x.clone()];
    for k in 0..m2 {
        let end = (k + 2) * u;
        if end >= n {
            seq.push(y.clone());
            continue;
        }
        let start = end + 1 - splice;
        let walk = h.walk_of_length(y.at(start), x.at(end + 1), splice)?;
        let mut c = y.colours[..start].to_vec();
        c.extend_from_slice(&walk[1..splice]);
        c.extend_from_slice(&x.colours[end..]);
        seq.push(PathState::new(c));
    }
    seq.push(y.clone());
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segment::{enumerate_state_space, exact_uniform_sample, DEFAULT_ENUMERATION_CAP};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn g(name: &str, q: Option<usize>) -> ColourGraph {
        ColourGraph::builtin(name, q).unwrap()
    }

    fn spans(s: &BlockSchedule) -> Vec<(usize, usize)> {
        s.blocks.iter().map(|b| (b.lo, b.hi)).collect()
    }

    #[test]
    fn params_examples() {
        let k3 = g("clique", Some(3));
        assert_eq!(make_params(&k3, ChainKind::AnyOrder, &Overrides::default()).unwrap().l1, 8);
        let is = g("independent_set", None);
        let p = make_params(&is, ChainKind::FixedOrder, &Overrides::default()).unwrap();
        assert_eq!(p.l1, 8);
        assert_eq!(p.s, 9);
        assert_eq!(p.beta, 5120u32.into());
        assert_eq!(p.l2, 92160u32.into());
        assert_eq!(p.gamma, 1025u32.into());
        assert_eq!(p.u, 46080u32.into());
        assert_eq!(p.w, 9225u32.into());
        let o = Overrides { l1: Some(3), ..Default::default() };
        let p = make_params(&k3, ChainKind::AnyOrder, &o).unwrap();
        assert_eq!(p.l1, 3);
        assert_eq!(p.to_json()["overrides"], json!(["l1"]));
        let wr = g("widom_rowlinson", Some(4));
        assert_eq!(make_params(&wr, ChainKind::AnyOrder, &Overrides::default()).unwrap().l1, 83);
    }

    #[test]
    fn schedule_examples() {
        assert_eq!(spans(&blocks_anyorder(7, 3)), vec![(1, 3), (4, 6), (5, 7)]);
        assert_eq!(spans(&blocks_anyorder(6, 3)), vec![(1, 3), (4, 6)]);
        assert_eq!(spans(&blocks_anyorder(2, 3)), vec![(1, 2)]);
        assert_eq!(spans(&blocks_fixedorder(12, 3).unwrap()), vec![(1, 6), (4, 9), (7, 12), (10, 12)]);
        assert_eq!(spans(&blocks_fixedorder(13, 3).unwrap()), vec![(1, 6), (4, 9), (7, 12), (10, 13)]);
        assert_eq!(spans(&blocks_fixedorder(6, 3).unwrap()), vec![(1, 6), (4, 6)]);
        assert!(matches!(blocks_fixedorder(2, 3), Err(Error::PathTooShort { n: 2, u: 3 })));
        let rnd = blocks_rnd(5, 3);
        assert_eq!(spans(&rnd), vec![(1, 3), (2, 4), (3, 5), (4, 5), (5, 5), (1, 2), (1, 1)]);
        assert_eq!(rnd.multiplicity(), vec![3; 5]);
        assert_eq!(blocks_rnd(4, 9).multiplicity(), vec![9; 4]);
    }

    #[test]
    fn heat_bath_middle_site() {
        let k3 = g("clique", Some(3));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = PathState::new(vec![0, 1, 0]);
        let n = 20_000;
        let mut twos = 0;
        for _ in 0..n {
            let y = heat_bath_update(&k3, &x, Block::new(2, 2), StateClass::Omega, &mut rng).unwrap();
            assert!(y.colours == vec![0, 1, 0] || y.colours == vec![0, 2, 0]);
            twos += (y.at(2) == 2) as usize;
        }
        assert!((twos as f64 / n as f64 - 0.5).abs() < 0.02);
    }

    #[test]
    fn single_block_scan_is_whole_resample() {
        let k3 = g("clique", Some(3));
        let p = make_params(&k3, ChainKind::AnyOrder, &Overrides::default()).unwrap();
        let sched = p.schedule(5).unwrap();
        assert_eq!(sched.len(), 1);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = PathState::new(vec![0, 1, 0, 1, 0]);
        let y = run_scan(&k3, &p, &sched, &ScanOrder::Ascending, &x, &mut rng).unwrap();
        assert!(y.is_valid_colouring(&k3));
    }

    #[test]
    fn fixed_order_rejects_permutations() {
        let is = g("independent_set", None);
        let o = Overrides { u: Some(3), ..Default::default() };
        let p = make_params(&is, ChainKind::FixedOrder, &o).unwrap();
        let sched = p.schedule(12).unwrap();
        let x = PathState::new(vec![0; 12]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let order = ScanOrder::Permutation(vec![1, 0, 2, 3]);
        assert!(matches!(run_scan(&is, &p, &sched, &order, &x, &mut rng), Err(Error::InvalidOrder(_))));
        assert!(run_scan(&is, &p, &sched, &ScanOrder::Permutation(vec![0, 1, 2, 3]), &x, &mut rng).is_ok());
        let ap = make_params(&is, ChainKind::AnyOrder, &Overrides { l1: Some(3), ..Default::default() }).unwrap();
        let asched = ap.schedule(12).unwrap();
        assert!(run_scan(&is, &ap, &asched, &ScanOrder::Permutation(vec![3, 1, 0, 2]), &x, &mut rng).is_ok());
        assert!(run_scan(&is, &ap, &asched, &ScanOrder::Permutation(vec![0, 0, 1, 2]), &x, &mut rng).is_err());
    }

    #[test]
    fn hamming_path_example() {
        let k3 = g("clique", Some(3));
        let x = PathState::new(vec![0, 1, 0, 1]);
        let y = PathState::new(vec![1, 0, 1, 0]);
        let z = hamming_path(&k3, &x, &y).unwrap();
        assert_eq!(z[2].colours, vec![1, 0, 0, 1]);
        assert_eq!(z[1].hamming(&z[2]), 1);
        assert_eq!(z[0], x);
        assert_eq!(z[4], y);
        let k2 = g("clique", Some(2));
        let a = PathState::new(vec![0, 1, 0]);
        let b = PathState::new(vec![1, 0, 1]);
        assert!(matches!(hamming_path(&k2, &a, &b), Err(Error::ClassMismatch)));
    }

    #[test]
    fn ergodicity_witness_small() {
        let k3 = g("clique", Some(3));
        let p = make_params(&k3, ChainKind::FixedOrder, &Overrides { u: Some(3), ..Default::default() }).unwrap();
        let sched = p.schedule(12).unwrap();
        let all = enumerate_state_space(&k3, 12, StateClass::Omega, DEFAULT_ENUMERATION_CAP).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let x = all.choose(&mut rng).unwrap();
            let y = all.choose(&mut rng).unwrap();
            let seq = ergodicity_witness(&k3, &p, x, y).unwrap();
            assert_eq!(seq.len(), sched.len() + 1);
            assert_eq!(&seq[0], x);
            assert_eq!(seq.last().unwrap(), y);
            for (k, pair) in seq.windows(2).enumerate() {
                assert!(pair[1].is_valid_colouring(&k3));
                let b = sched.blocks[k];
                for j in 1..=12 {
                    if !b.contains(j) {
                        assert_eq!(pair[0].at(j), pair[1].at(j));
                    }
                }
            }
        }
        let x = &all[0];
        assert!(ergodicity_witness(&k3, &p, x, x).unwrap().iter().all(|s| s == x));
    }

    #[test]
    fn ergodicity_witness_rejects_class_mismatch() {
        let k2 = g("clique", Some(2));
        let p = make_params(&k2, ChainKind::FixedOrder, &Overrides { u: Some(2), ..Default::default() }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = exact_uniform_sample(&k2, 6, StateClass::Omega1, &mut rng).unwrap();
        let y = exact_uniform_sample(&k2, 6, StateClass::Omega2, &mut rng).unwrap();
        assert!(matches!(ergodicity_witness(&k2, &p, &x, &y), Err(Error::ClassMismatch)));
    }
}
