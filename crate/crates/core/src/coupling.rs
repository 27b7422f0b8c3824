//! Couplings of block updates and their exact disagreement probabilities.
//!
//! Two copies of a segment share the right boundary and start from left
//! boundary colours `c1` and `c2`. At stride points `v_s, v_2s, ...` the two
//! site laws (given the previous stride colours) are coupled maximally; the
//! sites in between are filled independently in each copy given both ends.
//! Once the copies agree at a stride point they are kept identical. Stride 1
//! is the site-by-site greedy coupling. When fewer than `stride` sites
//! remain, the rest is coupled site by site.

use rand::Rng;
use serde::Serialize;

use crate::chains::{blocks_rnd, Block, ChainParams, PathState};
use crate::error::{Error, Result};
use crate::hgraph::{Colour, ColourGraph};
use crate::segment::{class_mask, sample_index, Boundary, BoundarySpec, Precision, SegmentLaw, StateClass};

/// `1/2 * sum |p - q|`.
pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "distributions on different universes");
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Joint law of two outcomes, `joint[a * size + b]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouplingTable {
    pub size: usize,
    pub joint: Vec<f64>,
}

impl CouplingTable {
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.joint[a * self.size + b]
    }

    pub fn disagreement(&self) -> f64 {
        let diag: f64 = (0..self.size).map(|a| self.get(a, a)).sum();
        (1.0 - diag).max(0.0)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.joint.chunks(self.size).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        (0..self.size).map(|b| (0..self.size).map(|a| self.get(a, b)).sum()).collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        let k = sample_index(&self.joint, rng);
        (k / self.size, k % self.size)
    }
}

/// Diagonal `min(p, q)`; the residuals are paired independently.
pub fn maximal_coupling(p: &[f64], q: &[f64]) -> CouplingTable {
    assert_eq!(p.len(), q.len(), "distributions on different universes");
    let size = p.len();
    let mut joint = vec![0.0; size * size];
    let mut rp = vec![0.0; size];
    let mut rq = vec![0.0; size];
    for a in 0..size {
        let m = p[a].min(q[a]);
        joint[a * size + a] = m;
        rp[a] = p[a] - m;
        rq[a] = q[a] - m;
    }
    let tv: f64 = rp.iter().sum();
    if tv > 0.0 {
        for a in 0..size {
            if rp[a] == 0.0 {
                continue;
            }
            for b in 0..size {
                joint[a * size + b] += rp[a] * rq[b] / tv;
            }
        }
    }
    CouplingTable { size, joint }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Provenance {
    ExactDp,
    Empirical { samples: usize },
}

/// `p[j - 1]`: probability the coupled copies differ at `v_j`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DisagreementProfile {
    pub p: Vec<f64>,
    pub provenance: Provenance,
}

impl DisagreementProfile {
    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }

    /// CSV `j,p_exact,bound,slack` against `bound(j)`.
    pub fn to_csv(&self, bound: impl Fn(usize) -> f64) -> String {
        let column = match self.provenance {
            Provenance::ExactDp => "p_exact",
            Provenance::Empirical { .. } => "p_empirical",
        };
        let mut out = format!("j,{column},bound,slack\n");
        for (idx, &p) in self.p.iter().enumerate() {
            let j = idx + 1;
            let b = bound(j);
            out.push_str(&format!("{j},{p},{b},{}\n", b - p));
        }
        out
    }
}

/// `q x q` product of the kernels `from..to`.
fn multi_step(law: &SegmentLaw, from: usize, to: usize) -> Vec<f64> {
    let q = law.q();
    let mut m = vec![0.0; q * q];
    for a in 0..q {
        m[a * q + a] = 1.0;
    }
    for j in from..to {
        let k = law.kernel(j);
        let mut next = vec![0.0; q * q];
        for a in 0..q {
            for x in 0..q {
                let mx = m[a * q + x];
                if mx == 0.0 {
                    continue;
                }
                for b in 0..q {
                    next[a * q + b] += mx * k[x * q + b];
                }
            }
        }
        m = next;
    }
    m
}

fn next_stride(len: usize, t: usize, stride: usize) -> usize {
    if len - t >= stride {
        t + stride
    } else {
        t + 1
    }
}

/// Exact per-site disagreement of the stride coupling on `law`.
pub fn stride_profile(law: &SegmentLaw, c1: Colour, c2: Colour, stride: usize) -> Result<Vec<f64>> {
    if stride == 0 {
        return Err(Error::InvalidParameter("stride must be positive".into()));
    }
    law.init(Boundary::Colour(c1))?;
    law.init(Boundary::Colour(c2))?;
    let q = law.q();
    let len = law.len();
    let mut p = vec![0.0; len];
    // off-diagonal joint mass at the current stride point
    let mut mass = vec![0.0; q * q];
    if c1 != c2 {
        mass[c1 as usize * q + c2 as usize] = 1.0;
    }
    let mut t = 0;
    while t < len && mass.iter().any(|&m| m > 0.0) {
        let t2 = next_stride(len, t, stride);
        let m = multi_step(law, t, t2);
        // forward[j - t - 1][a*q + x]: law of v_j from v_t = a, for t < j < t2
        let forward: Vec<Vec<f64>> = (t + 1..t2).map(|j| multi_step(law, t, j)).collect();
        let backward: Vec<Vec<f64>> = (t + 1..t2).map(|j| multi_step(law, j, t2)).collect();
        let mut next = vec![0.0; q * q];
        for a in 0..q {
            for b in 0..q {
                let w = mass[a * q + b];
                if w == 0.0 {
                    continue;
                }
                let table = maximal_coupling(&m[a * q..(a + 1) * q], &m[b * q..(b + 1) * q]);
                for c in 0..q {
                    for d in 0..q {
                        let jw = table.get(c, d) * w;
                        if jw == 0.0 {
                            continue;
                        }
                        if c != d {
                            next[c * q + d] += jw;
                        }
                        for (idx, (f, bk)) in forward.iter().zip(&backward).enumerate() {
                            let mut agree = 0.0;
                            for x in 0..q {
                                let p1 = f[a * q + x] * bk[x * q + c] / m[a * q + c];
                                let p2 = f[b * q + x] * bk[x * q + d] / m[b * q + d];
                                agree += p1 * p2;
                            }
                            p[t + idx] += jw * (1.0 - agree).max(0.0);
                        }
                    }
                }
            }
        }
        p[t2 - 1] = next.iter().sum();
        mass = next;
        t = t2;
    }
    Ok(p)
}

/// Draw a coupled pair of fillings from the stride coupling on `law`.
pub fn sample_stride_coupling<R: Rng + ?Sized>(
    law: &SegmentLaw,
    c1: Colour,
    c2: Colour,
    stride: usize,
    rng: &mut R,
) -> Result<(Vec<Colour>, Vec<Colour>)> {
    if stride == 0 {
        return Err(Error::InvalidParameter("stride must be positive".into()));
    }
    law.init(Boundary::Colour(c1))?;
    law.init(Boundary::Colour(c2))?;
    let q = law.q();
    let len = law.len();
    let mut x = Vec::with_capacity(len);
    let mut y = Vec::with_capacity(len);
    let (mut a, mut b) = (c1, c2);
    let mut t = 0;
    while t < len {
        if a == b {
            let rest = law.sample_after(t, a, rng);
            x.extend_from_slice(&rest);
            y.extend_from_slice(&rest);
            break;
        }
        let t2 = next_stride(len, t, stride);
        let m = multi_step(law, t, t2);
        let table =
            maximal_coupling(&m[a as usize * q..(a as usize + 1) * q], &m[b as usize * q..(b as usize + 1) * q]);
        let (c, d) = table.sample(rng);
        x.extend(sample_bridge(law, t, t2, a, c as Colour, rng));
        y.extend(sample_bridge(law, t, t2, b, d as Colour, rng));
        a = c as Colour;
        b = d as Colour;
        t = t2;
    }
    Ok((x, y))
}

/// Sites `v_{t+1}..v_{t2}` given `v_t = a` and `v_{t2} = c`.
fn sample_bridge<R: Rng + ?Sized>(
    law: &SegmentLaw,
    t: usize,
    t2: usize,
    a: Colour,
    c: Colour,
    rng: &mut R,
) -> Vec<Colour> {
    let q = law.q();
    let mut out = Vec::with_capacity(t2 - t);
    let mut prev = a as usize;
    for j in t + 1..t2 {
        let back = multi_step(law, j, t2);
        let k = law.kernel(j - 1);
        let w: Vec<f64> = (0..q).map(|x| k[prev * q + x] * back[x * q + c as usize]).collect();
        prev = sample_index(&w, rng);
        out.push(prev as Colour);
    }
    out.push(c);
    out
}

/// Greedy site-by-site coupling of the `l`-site segment with left colours
/// `c1`/`c2` and right boundary `d`. Requires every pair of colours to be
/// joined by a 2-edge walk.
pub fn disagreement_profile_v1(
    h: &ColourGraph,
    l: usize,
    c1: Colour,
    c2: Colour,
    d: Boundary,
) -> Result<DisagreementProfile> {
    if let Some((a, b)) = h.two_path_witness() {
        return Err(Error::ConditionViolated(format!("colours {a} and {b} share no neighbour")));
    }
    let law = SegmentLaw::build(h, l, &BoundarySpec::new(Boundary::Free, d), Precision::Exact)?;
    Ok(DisagreementProfile { p: stride_profile(&law, c1, c2, 1)?, provenance: Provenance::ExactDp })
}

/// Stride-`s` coupling of the `l`-site segment with left colours `c1`/`c2`
/// and right boundary `d`.
pub fn disagreement_profile_vs(
    h: &ColourGraph,
    l: usize,
    c1: Colour,
    c2: Colour,
    d: Boundary,
    s: usize,
) -> Result<DisagreementProfile> {
    let law = SegmentLaw::build(h, l, &BoundarySpec::new(Boundary::Free, d), Precision::Exact)?;
    Ok(DisagreementProfile { p: stride_profile(&law, c1, c2, s)?, provenance: Provenance::ExactDp })
}

/// Empirical profile of the stride coupling from `samples` draws.
pub fn empirical_profile<R: Rng + ?Sized>(
    law: &SegmentLaw,
    c1: Colour,
    c2: Colour,
    stride: usize,
    samples: usize,
    rng: &mut R,
) -> Result<DisagreementProfile> {
    let mut counts = vec![0usize; law.len()];
    for _ in 0..samples {
        let (x, y) = sample_stride_coupling(law, c1, c2, stride, rng)?;
        for (j, (a, b)) in x.iter().zip(&y).enumerate() {
            counts[j] += (a != b) as usize;
        }
    }
    Ok(DisagreementProfile {
        p: counts.iter().map(|&c| c as f64 / samples as f64).collect(),
        provenance: Provenance::Empirical { samples },
    })
}

/// Two states that differ exactly at site `i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdjacentPair {
    pub x: PathState,
    pub y: PathState,
    pub i: usize,
}

impl AdjacentPair {
    pub fn new(h: &ColourGraph, x: PathState, y: PathState) -> Result<Self> {
        if x.n() != y.n() {
            return Err(Error::InvalidParameter("states have different lengths".into()));
        }
        let diff: Vec<usize> = (1..=x.n()).filter(|&j| x.at(j) != y.at(j)).collect();
        let [i] = diff[..] else {
            return Err(Error::InvalidParameter(format!("states differ at {} sites, not one", diff.len())));
        };
        match (x.class_of(h), y.class_of(h)) {
            (Some(a), Some(b)) if a == b => Ok(AdjacentPair { x, y, i }),
            _ => Err(Error::ClassMismatch),
        }
    }

    /// `x` with site `i` recoloured to `c`.
    pub fn flip(h: &ColourGraph, x: &PathState, i: usize, c: Colour) -> Result<Self> {
        let mut y = x.clone();
        y.colours[i - 1] = c;
        Self::new(h, x.clone(), y)
    }
}

fn block_law(h: &ColourGraph, class: StateClass, block: Block, right: Boundary) -> Result<SegmentLaw> {
    let bc = BoundarySpec::new(Boundary::Free, right).with_mask(class_mask(h, class, block.lo, block.len())?);
    SegmentLaw::build(h, block.len(), &bc, Precision::Exact)
}

fn mirrored_law(h: &ColourGraph, class: StateClass, block: Block, left: Boundary) -> Result<SegmentLaw> {
    let bc = BoundarySpec::new(left, Boundary::Free).with_mask(class_mask(h, class, block.lo, block.len())?).reversed();
    SegmentLaw::build(h, block.len(), &bc, Precision::Exact)
}

/// Heat-bath move on `block` applied to both states under the stride
/// coupling: identical draws when the boundaries agree, otherwise coupled
/// away from the disagreeing side.
pub fn coupled_block_update<R: Rng + ?Sized>(
    h: &ColourGraph,
    class: StateClass,
    stride: usize,
    x: &mut PathState,
    y: &mut PathState,
    block: Block,
    rng: &mut R,
) -> Result<()> {
    let (xl, xr) = block.boundary(x);
    let (yl, yr) = block.boundary(y);
    let (fx, fy) = match (xl == yl, xr == yr) {
        (true, true) => {
            let law = block_law(h, class, block, xr)?;
            let f = law.sample(xl, rng)?;
            (f.clone(), f)
        }
        (false, true) => {
            let (Boundary::Colour(a), Boundary::Colour(b)) = (xl, yl) else { unreachable!() };
            sample_stride_coupling(&block_law(h, class, block, xr)?, a, b, stride, rng)?
        }
        (true, false) => {
            let (Boundary::Colour(a), Boundary::Colour(b)) = (xr, yr) else { unreachable!() };
            let law = mirrored_law(h, class, block, xl)?;
            let (mut fx, mut fy) = sample_stride_coupling(&law, a, b, stride, rng)?;
            fx.reverse();
            fy.reverse();
            (fx, fy)
        }
        (false, false) => return Err(Error::BothBoundariesDisagree { lo: block.lo, hi: block.hi }),
    };
    x.colours[block.lo - 1..block.hi].copy_from_slice(&fx);
    y.colours[block.lo - 1..block.hi].copy_from_slice(&fy);
    Ok(())
}

/// One coupled scan of the fixed-order chain.
pub fn coupled_scan_fixedorder<R: Rng + ?Sized>(
    h: &ColourGraph,
    params: &ChainParams,
    x: &PathState,
    y: &PathState,
    rng: &mut R,
) -> Result<(PathState, PathState)> {
    let schedule = crate::chains::blocks_fixedorder(x.n(), params.u_usize()?)?;
    let (mut x, mut y) = (x.clone(), y.clone());
    for &block in &schedule.blocks {
        coupled_block_update(h, params.class, params.s, &mut x, &mut y, block, rng)?;
    }
    Ok((x, y))
}

/// Exact expected Hamming distance after one coupled random-update step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RndContraction {
    pub n: usize,
    pub i: usize,
    pub blocks: usize,
    pub containing: usize,
    pub adjacent: usize,
    /// Expected new disagreements created by each adjacent block.
    pub adjacent_spread: Vec<f64>,
    pub expected_hamming: f64,
    pub threshold: f64,
    pub pass: bool,
}

pub fn expected_hamming_rnd(h: &ColourGraph, params: &ChainParams, pair: &AdjacentPair) -> Result<RndContraction> {
    let n = pair.x.n();
    let i = pair.i;
    let schedule = blocks_rnd(n, params.w_usize()?);
    let (mut containing, mut others) = (0usize, 0usize);
    let mut spread = Vec::new();
    for &block in &schedule.blocks {
        if block.contains(i) {
            containing += 1;
        } else if block.lo == i + 1 {
            let (_, right) = block.boundary(&pair.x);
            let law = block_law(h, params.class, block, right)?;
            spread.push(stride_profile(&law, pair.x.at(i), pair.y.at(i), params.s)?.iter().sum());
        } else if block.hi + 1 == i {
            let (left, _) = block.boundary(&pair.x);
            let law = mirrored_law(h, params.class, block, left)?;
            spread.push(stride_profile(&law, pair.x.at(i), pair.y.at(i), params.s)?.iter().sum());
        } else {
            others += 1;
        }
    }
    let total = others as f64 + spread.iter().map(|p| 1.0 + p).sum::<f64>();
    let expected_hamming = total / schedule.len() as f64;
    let threshold = rnd_contraction_threshold(params, n);
    Ok(RndContraction {
        n,
        i,
        blocks: schedule.len(),
        containing,
        adjacent: spread.len(),
        adjacent_spread: spread,
        expected_hamming,
        threshold,
        pass: expected_hamming < threshold,
    })
}

/// `1 - s / (n + 2 s q^s + s - 1)`.
pub fn rnd_contraction_threshold(params: &ChainParams, n: usize) -> f64 {
    let s = params.s as f64;
    let qs = (params.q as f64).powi(params.s as i32);
    1.0 - s / (n as f64 + 2.0 * s * qs + s - 1.0)
}

/// Hamming distance after one sampled coupled random-update step.
pub fn coupled_rnd_step<R: Rng + ?Sized>(
    h: &ColourGraph,
    params: &ChainParams,
    pair: &AdjacentPair,
    rng: &mut R,
) -> Result<usize> {
    let schedule = blocks_rnd(pair.x.n(), params.w_usize()?);
    let block = schedule.blocks[rng.gen_range(0..schedule.len())];
    let (mut x, mut y) = (pair.x.clone(), pair.y.clone());
    coupled_block_update(h, params.class, params.s, &mut x, &mut y, block, rng)?;
    Ok(x.hamming(&y))
}
