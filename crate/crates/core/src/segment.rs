//! Transfer-matrix engine for runs of consecutive sites.
//!
//! A segment `v_1..v_l` sits between a left boundary site `v_0` and a right
//! boundary site `v_{l+1}`, either of which may be absent (the segment
//! touches an end of the path). The uniform law on valid fillings is an
//! inhomogeneous Markov chain along the segment whose kernels are ratios of
//! the exact counts below.

use num_bigint::{BigUint, RandBigInt};
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;

use crate::chains::PathState;
use crate::error::{Error, Result};
use crate::hgraph::{Bipartition, Colour, ColourGraph};

/// One side of a segment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Boundary {
    Colour(Colour),
    Free,
}

/// Boundary condition of a segment, plus optional per-site allowed colours.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundarySpec {
    pub left: Boundary,
    pub right: Boundary,
    /// `mask[j][c]`: colour `c` allowed at site `v_{j+1}`.
    pub mask: Option<Vec<Vec<bool>>>,
}

impl BoundarySpec {
    pub fn new(left: Boundary, right: Boundary) -> Self {
        BoundarySpec { left, right, mask: None }
    }

    pub fn both(c: Colour, d: Colour) -> Self {
        Self::new(Boundary::Colour(c), Boundary::Colour(d))
    }

    pub fn free() -> Self {
        Self::new(Boundary::Free, Boundary::Free)
    }

    pub fn with_mask(mut self, mask: Option<Vec<Vec<bool>>>) -> Self {
        self.mask = mask;
        self
    }

    /// Mirror image: the segment read right to left.
    pub fn reversed(&self) -> Self {
        BoundarySpec {
            left: self.right,
            right: self.left,
            mask: self.mask.as_ref().map(|m| m.iter().rev().cloned().collect()),
        }
    }

    #[inline]
    fn allowed(&self, site: usize, c: Colour) -> bool {
        match &self.mask {
            Some(m) => m[site - 1][c as usize],
            None => true,
        }
    }

    fn check(&self, h: &ColourGraph, l: usize) -> Result<()> {
        if l == 0 {
            return Err(Error::InvalidParameter("segment length must be at least 1".into()));
        }
        for b in [self.left, self.right] {
            if let Boundary::Colour(c) = b {
                if c as usize >= h.q() {
                    return Err(Error::InvalidParameter(format!("boundary colour {c} >= q")));
                }
            }
        }
        if let Some(m) = &self.mask {
            if m.len() != l || m.iter().any(|row| row.len() != h.q() || !row.iter().any(|&a| a)) {
                return Err(Error::InvalidParameter("mask needs one non-empty q-wide row per site".into()));
            }
        }
        Ok(())
    }
}

/// Exact colouring counts of a segment.
///
/// `table[j][k]` (for `1 <= j <= l`) is the number of valid colourings of
/// `v_j..v_l` with `v_j = k`, masks and the right boundary applied.
/// `table[0][k]` counts the fillings of the whole segment when the left
/// boundary site carries colour `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentCounts {
    pub len: usize,
    pub table: Vec<Vec<BigUint>>,
    pub total: BigUint,
}

pub fn segment_counts(h: &ColourGraph, l: usize, bc: &BoundarySpec) -> Result<SegmentCounts> {
    bc.check(h, l)?;
    let q = h.q();
    let mut table = vec![vec![BigUint::zero(); q]; l + 1];
    for k in h.colours() {
        let right_ok = match bc.right {
            Boundary::Colour(d) => h.adjacent(k, d),
            Boundary::Free => true,
        };
        if right_ok && bc.allowed(l, k) {
            table[l][k as usize] = BigUint::from(1u32);
        }
    }
    for j in (0..l).rev() {
        for k in h.colours() {
            if j > 0 && !bc.allowed(j, k) {
                continue;
            }
            let mut acc = BigUint::zero();
            for &m in h.neighbours(k) {
                acc += &table[j + 1][m as usize];
            }
            table[j][k as usize] = acc;
        }
    }
    let total = match bc.left {
        Boundary::Colour(c) => table[0][c as usize].clone(),
        Boundary::Free => table[1].iter().sum(),
    };
    Ok(SegmentCounts { len: l, table, total })
}

/// Exact uniform filling of a segment by integer forward sampling.
pub fn sample_segment<R: Rng + ?Sized>(
    h: &ColourGraph,
    l: usize,
    bc: &BoundarySpec,
    rng: &mut R,
) -> Result<Vec<Colour>> {
    let counts = segment_counts(h, l, bc)?;
    sample_from_counts(h, &counts, bc.left, rng)
}

pub(crate) fn sample_from_counts<R: Rng + ?Sized>(
    h: &ColourGraph,
    counts: &SegmentCounts,
    left: Boundary,
    rng: &mut R,
) -> Result<Vec<Colour>> {
    if counts.total.is_zero() {
        return Err(Error::EmptySupport(format!(
            "no filling of a {}-site segment with left boundary {left:?}",
            counts.len
        )));
    }
    let l = counts.len;
    let mut out = Vec::with_capacity(l);
    let mut prev: Option<Colour> = match left {
        Boundary::Colour(c) => Some(c),
        Boundary::Free => None,
    };
    for j in 1..=l {
        let below = match prev {
            Some(p) => &counts.table[j - 1][p as usize],
            None => &counts.total,
        };
        let mut r = rng.gen_biguint_below(below);
        let candidates: Box<dyn Iterator<Item = Colour>> = match prev {
            Some(p) => Box::new(h.neighbours(p).iter().copied()),
            None => Box::new(h.colours()),
        };
        let mut chosen = None;
        for k in candidates {
            let w = &counts.table[j][k as usize];
            if r < *w {
                chosen = Some(k);
                break;
            }
            r -= w;
        }
        let k = chosen.expect("counts are consistent");
        out.push(k);
        prev = Some(k);
    }
    Ok(out)
}

/// Finite distribution; only positive-probability outcomes are listed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiniteDistribution<T> {
    pub support: Vec<T>,
    pub probs: Vec<f64>,
}

impl<T: PartialEq> FiniteDistribution<T> {
    pub fn prob(&self, outcome: &T) -> f64 {
        self.support.iter().position(|s| s == outcome).map_or(0.0, |i| self.probs[i])
    }
}

/// Law of the colour at site `v_j`, computed from left and right counts.
pub fn site_marginal(h: &ColourGraph, l: usize, bc: &BoundarySpec, j: usize) -> Result<FiniteDistribution<Colour>> {
    if j == 0 || j > l {
        return Err(Error::InvalidParameter(format!("site {j} outside 1..={l}")));
    }
    let right = segment_counts(h, l, bc)?;
    if right.total.is_zero() {
        return Err(Error::EmptySupport("segment has no valid filling".into()));
    }
    let left = left_counts(h, l, bc, j);
    let mut support = Vec::new();
    let mut probs = Vec::new();
    for k in h.colours() {
        let joint = &left[k as usize] * &right.table[j][k as usize];
        if !joint.is_zero() {
            support.push(k);
            probs.push(ratio(&joint, &right.total));
        }
    }
    Ok(FiniteDistribution { support, probs })
}

/// `out[k]` = number of valid colourings of `v_1..v_j` with `v_j = k`,
/// honouring the left boundary and masks.
fn left_counts(h: &ColourGraph, l: usize, bc: &BoundarySpec, j: usize) -> Vec<BigUint> {
    let _ = l;
    let mut cur: Vec<BigUint> = h
        .colours()
        .map(|k| {
            let ok = match bc.left {
                Boundary::Colour(c) => h.adjacent(c, k),
                Boundary::Free => true,
            };
            BigUint::from((ok && bc.allowed(1, k)) as u32)
        })
        .collect();
    for site in 2..=j {
        let mut next = vec![BigUint::zero(); h.q()];
        for k in h.colours() {
            if !bc.allowed(site, k) {
                continue;
            }
            for &m in h.neighbours(k) {
                next[k as usize] += &cur[m as usize];
            }
        }
        cur = next;
    }
    cur
}

/// Which part of the state space a chain lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum StateClass {
    /// All colourings (non-bipartite `H`).
    Omega,
    /// Bipartite `H`: odd sites in class 1, even sites in class 2.
    Omega1,
    /// Bipartite `H`: odd sites in class 2, even sites in class 1.
    Omega2,
}

impl StateClass {
    /// `Omega` for non-bipartite `H`, `Omega1` otherwise.
    pub fn auto(h: &ColourGraph) -> Self {
        if h.colour_classes().is_bipartite() {
            StateClass::Omega1
        } else {
            StateClass::Omega
        }
    }
}

/// Per-site allowed colours for sites `first..first+len` (1-based) of the
/// path under `class`; `None` when every colour is allowed.
pub fn class_mask(h: &ColourGraph, class: StateClass, first: usize, len: usize) -> Result<Option<Vec<Vec<bool>>>> {
    let odd_class = match class {
        StateClass::Omega => return Ok(None),
        StateClass::Omega1 => 1u8,
        StateClass::Omega2 => 2u8,
    };
    let Bipartition::Bipartite { class_of } = h.colour_classes() else {
        return Err(Error::InvalidParameter("parity classes need a bipartite graph".into()));
    };
    let rows = (first..first + len)
        .map(|site| {
            let want = if site % 2 == 1 { odd_class } else { 3 - odd_class };
            class_of.iter().map(|&k| k == want).collect()
        })
        .collect();
    Ok(Some(rows))
}

/// Default cap on enumerated states.
pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

/// All valid colourings of an `l`-site segment, lexicographic (leftmost site
/// most significant).
pub fn enumerate_segment(h: &ColourGraph, l: usize, bc: &BoundarySpec, cap: usize) -> Result<Vec<Vec<Colour>>> {
    let counts = segment_counts(h, l, bc)?;
    let needed = counts.total.to_u128().unwrap_or(u128::MAX);
    if needed > cap as u128 {
        return Err(Error::CapExceeded { what: format!("enumerating a {l}-site segment"), needed, cap: cap as u128 });
    }
    let mut out = Vec::with_capacity(needed as usize);
    let mut prefix = Vec::with_capacity(l);
    let first: Vec<Colour> = match bc.left {
        Boundary::Colour(c) => h.neighbours(c).to_vec(),
        Boundary::Free => h.colours().collect(),
    };
    dfs(h, &counts, &first, &mut prefix, &mut out);
    Ok(out)
}

fn dfs(
    h: &ColourGraph,
    counts: &SegmentCounts,
    candidates: &[Colour],
    prefix: &mut Vec<Colour>,
    out: &mut Vec<Vec<Colour>>,
) {
    let j = prefix.len() + 1;
    for &k in candidates {
        if counts.table[j][k as usize].is_zero() {
            continue;
        }
        prefix.push(k);
        if j == counts.len {
            out.push(prefix.clone());
        } else {
            dfs(h, counts, h.neighbours(k), prefix, out);
        }
        prefix.pop();
    }
}

/// Every valid colouring of the `n`-site path in `class`, lexicographic.
pub fn enumerate_state_space(h: &ColourGraph, n: usize, class: StateClass, cap: usize) -> Result<Vec<PathState>> {
    let bc = BoundarySpec::free().with_mask(class_mask(h, class, 1, n)?);
    Ok(enumerate_segment(h, n, &bc, cap)?.into_iter().map(PathState::new).collect())
}

/// Exact uniform sample from the valid colourings of the path in `class`.
pub fn exact_uniform_sample<R: Rng + ?Sized>(
    h: &ColourGraph,
    n: usize,
    class: StateClass,
    rng: &mut R,
) -> Result<PathState> {
    let bc = BoundarySpec::free().with_mask(class_mask(h, class, 1, n)?);
    Ok(PathState::new(sample_segment(h, n, &bc, rng)?))
}

/// `num / den` as `f64`, accurate for arbitrarily large operands.
pub fn ratio(num: &BigUint, den: &BigUint) -> f64 {
    if den.is_zero() {
        return f64::NAN;
    }
    let shift = num.bits().max(den.bits()).saturating_sub(1000);
    let n = (num >> shift).to_f64().unwrap_or(f64::INFINITY);
    let d = (den >> shift).to_f64().unwrap_or(f64::INFINITY);
    n / d
}

/// How the per-site kernels of a [`SegmentLaw`] are derived.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum Precision {
    /// Ratios of exact big-integer counts.
    #[default]
    Exact,
    /// Rescaled `f64` transfer matrix. Each of the `l` steps adds at most a
    /// few ulps of relative error, so kernel entries are off by roughly
    /// `l * 1e-16` relative.
    Float,
}

/// Uniform law on fillings of a segment, as a Markov chain along it.
///
/// `kernel(j)` is the `q x q` row-major transition `v_j -> v_{j+1}` for
/// `j in 0..l`, where `v_0` is the left boundary site; rows that cannot
/// occur are all zero. The kernels do not depend on the left boundary, so one
/// law serves every left colour.
#[derive(Clone, Debug)]
pub struct SegmentLaw {
    q: usize,
    len: usize,
    kernels: Vec<Vec<f64>>,
    free_init: Vec<f64>,
}

impl SegmentLaw {
    /// The left boundary of `bc` is ignored; pick it with [`Self::init`].
    pub fn build(h: &ColourGraph, l: usize, bc: &BoundarySpec, precision: Precision) -> Result<Self> {
        bc.check(h, l)?;
        match precision {
            Precision::Exact => {
                let counts = segment_counts(h, l, bc)?;
                Ok(Self::from_rows(h, l, |j| {
                    let row = &counts.table[j];
                    let max = row.iter().max().cloned().unwrap_or_default();
                    row.iter().map(|v| if max.is_zero() { 0.0 } else { ratio(v, &max) }).collect()
                }))
            }
            Precision::Float => {
                let q = h.q();
                let mut rows = vec![vec![0.0f64; q]; l + 1];
                for k in h.colours() {
                    let right_ok = match bc.right {
                        Boundary::Colour(d) => h.adjacent(k, d),
                        Boundary::Free => true,
                    };
                    if right_ok && bc.allowed(l, k) {
                        rows[l][k as usize] = 1.0;
                    }
                }
                for j in (1..l).rev() {
                    let mut row = vec![0.0; q];
                    for k in h.colours() {
                        if bc.allowed(j, k) {
                            row[k as usize] = h.neighbours(k).iter().map(|&m| rows[j + 1][m as usize]).sum();
                        }
                    }
                    let max = row.iter().cloned().fold(0.0, f64::max);
                    if max > 0.0 {
                        row.iter_mut().for_each(|v| *v /= max);
                    }
                    rows[j] = row;
                }
                Ok(Self::from_rows(h, l, |j| rows[j].clone()))
            }
        }
    }

    /// `weights(j)` for `j in 1..=l` is proportional to `table[j]`.
    fn from_rows(h: &ColourGraph, l: usize, weights: impl Fn(usize) -> Vec<f64>) -> Self {
        let q = h.q();
        let mut kernels = Vec::with_capacity(l);
        let mut free_init = Vec::new();
        for j in 0..l {
            let w = weights(j + 1);
            let mut kern = vec![0.0; q * q];
            for a in h.colours() {
                let z: f64 = h.neighbours(a).iter().map(|&b| w[b as usize]).sum();
                if z > 0.0 {
                    for &b in h.neighbours(a) {
                        kern[a as usize * q + b as usize] = w[b as usize] / z;
                    }
                }
            }
            if j == 0 {
                let z: f64 = w.iter().sum();
                free_init = w.iter().map(|v| if z > 0.0 { v / z } else { 0.0 }).collect();
            }
            kernels.push(kern);
        }
        SegmentLaw { q, len: l, kernels, free_init }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Transition `v_j -> v_{j+1}`, row-major.
    pub fn kernel(&self, j: usize) -> &[f64] {
        &self.kernels[j]
    }

    #[inline]
    pub fn step(&self, j: usize, from: Colour, to: Colour) -> f64 {
        self.kernels[j][from as usize * self.q + to as usize]
    }

    /// Law of `v_1` for the given left boundary.
    pub fn init(&self, left: Boundary) -> Result<Vec<f64>> {
        let row = match left {
            Boundary::Free => self.free_init.clone(),
            Boundary::Colour(c) => self.kernels[0][c as usize * self.q..(c as usize + 1) * self.q].to_vec(),
        };
        if row.iter().sum::<f64>() <= 0.0 {
            return Err(Error::EmptySupport(format!(
                "no filling of a {}-site segment with left boundary {left:?}",
                self.len
            )));
        }
        Ok(row)
    }

    /// Push a distribution over `v_j` one site to the right.
    pub fn push(&self, j: usize, dist: &[f64]) -> Vec<f64> {
        let q = self.q;
        let mut out = vec![0.0; q];
        for (a, &pa) in dist.iter().enumerate() {
            if pa == 0.0 {
                continue;
            }
            let row = &self.kernels[j][a * q..(a + 1) * q];
            for (b, &k) in row.iter().enumerate() {
                out[b] += pa * k;
            }
        }
        out
    }

    /// Marginals of `v_1..v_l`; `out[j - 1]` is the law of `v_j`.
    pub fn marginals(&self, left: Boundary) -> Result<Vec<Vec<f64>>> {
        let mut cur = self.init(left)?;
        let mut out = Vec::with_capacity(self.len);
        for j in 1..=self.len {
            if j > 1 {
                cur = self.push(j - 1, &cur);
            }
            out.push(cur.clone());
        }
        Ok(out)
    }

    /// Sample sites `v_{from+1}..v_l` given `v_from = colour`.
    pub fn sample_after<R: Rng + ?Sized>(&self, from: usize, colour: Colour, rng: &mut R) -> Vec<Colour> {
        let mut out = Vec::with_capacity(self.len - from);
        let mut prev = colour;
        for j in from..self.len {
            let row = &self.kernels[j][prev as usize * self.q..(prev as usize + 1) * self.q];
            prev = sample_index(row, rng) as Colour;
            out.push(prev);
        }
        out
    }

    /// Sample the whole segment.
    pub fn sample<R: Rng + ?Sized>(&self, left: Boundary, rng: &mut R) -> Result<Vec<Colour>> {
        let init = self.init(left)?;
        let first = sample_index(&init, rng) as Colour;
        let mut out = vec![first];
        out.extend(self.sample_after(1, first, rng));
        Ok(out)
    }
}

/// Draw an index with probability proportional to `weights`.
pub fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            if u < w {
                return i;
            }
            u -= w;
            last = i;
        }
    }
    last
}
