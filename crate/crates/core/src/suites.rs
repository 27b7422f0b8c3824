//! Named verification suites. Each returns a table of checks and an overall
//! status; the CLI maps the status to its exit code.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{
    check_identities, dobrushin_alpha, mixing_time_exact, predicted_mixing_bound, two_path_obstruction, ExactChain,
    IdentityRanges, DEFAULT_EVOLUTION_CAP,
};
use crate::chains::{make_params, ChainKind, Overrides, PathState, ScanOrder};
use crate::coupling::{
    disagreement_profile_v1, disagreement_profile_vs, expected_hamming_rnd, tv_distance, AdjacentPair,
};
use crate::error::{Error, Result};
use crate::hgraph::{Colour, ColourGraph};
use crate::segment::{exact_uniform_sample, site_marginal, Boundary, BoundarySpec, StateClass};

pub const SUITES: [&str; 9] = [
    "dobrushin",
    "obstruction",
    "greedy",
    "linecoup",
    "smallcoup",
    "rnd-contraction",
    "identities",
    "stationarity",
    "thm1-tv",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SuiteStatus {
    Pass,
    Fail,
    /// Too large to run exactly at desk scale.
    Infeasible,
}

impl SuiteStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            SuiteStatus::Pass => 0,
            SuiteStatus::Fail => 1,
            SuiteStatus::Infeasible => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub status: SuiteStatus,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn from_checks(suite: &str, checks: Vec<Check>) -> Self {
        let status = if checks.iter().all(|c| c.pass) { SuiteStatus::Pass } else { SuiteStatus::Fail };
        SuiteReport { suite: suite.into(), status, checks }
    }

    fn infeasible(suite: &str, why: String) -> Self {
        SuiteReport {
            suite: suite.into(),
            status: SuiteStatus::Infeasible,
            checks: vec![Check { name: "feasibility".into(), pass: false, detail: json!(why) }],
        }
    }

    /// Plain-text table, one line per check.
    pub fn table(&self) -> String {
        let mut out = format!("suite {}: {:?}\n", self.suite, self.status);
        for c in &self.checks {
            out.push_str(&format!("  {:<4} {:<40} {}\n", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail));
        }
        out
    }
}

/// Inputs shared by the suites; each suite reads what it needs.
#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub graph: ColourGraph,
    pub n: Option<usize>,
    pub eps: f64,
    pub overrides: Overrides,
    pub seed: u64,
    pub cap: usize,
}

impl SuiteConfig {
    pub fn new(graph: ColourGraph) -> Self {
        SuiteConfig { graph, n: None, eps: 0.01, overrides: Overrides::default(), seed: 0, cap: DEFAULT_EVOLUTION_CAP }
    }
}

pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<SuiteReport> {
    match name {
        "dobrushin" => dobrushin_suite(cfg),
        "obstruction" => obstruction_suite(cfg),
        "greedy" => greedy_suite(&cfg.graph, 4 * cfg.graph.q() + 1),
        "linecoup" => linecoup_suite(&cfg.graph, 12),
        "smallcoup" => smallcoup_suite(&cfg.graph, cfg.n.unwrap_or(18), 4 * cfg.graph.q() + 1),
        "rnd-contraction" => rnd_contraction_suite(&cfg.graph, cfg.n.unwrap_or(20_000), &cfg.overrides, cfg.seed),
        "identities" => Ok(identities_suite()),
        "stationarity" => stationarity_suite(&cfg.graph, cfg.n.unwrap_or(8), &cfg.overrides, cfg.cap),
        "thm1-tv" => thm1_suite(cfg),
        other => Err(Error::InvalidParameter(format!("unknown suite `{other}`; known: {}", SUITES.join(", ")))),
    }
}

fn dobrushin_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let h = &cfg.graph;
    let l1 = cfg.overrides.l1.unwrap_or_else(|| crate::chains::anyorder_block_length(h.max_degree()));
    let checks = match dobrushin_alpha(h, l1) {
        Ok(r) => vec![Check {
            name: format!("alpha for D={}, l1={}", r.max_degree, r.l1),
            pass: r.pass,
            detail: serde_json::to_value(&r)?,
        }],
        Err(Error::ConditionViolated(why)) => {
            return Ok(SuiteReport::infeasible("dobrushin", format!("bound does not apply: {why}")))
        }
        Err(e) => return Err(e),
    };
    Ok(SuiteReport::from_checks("dobrushin", checks))
}

fn obstruction_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let h = &cfg.graph;
    let report = two_path_obstruction(h)?;
    let witness = h.two_path_witness();
    let pass = match (&report.obstruction, witness) {
        (None, None) => true,
        (Some(o), Some(_)) => o.disjoint && h.neighbours(o.pair.0).iter().all(|&k| !h.adjacent(k, o.pair.1)),
        _ => false,
    };
    Ok(SuiteReport::from_checks(
        "obstruction",
        vec![Check {
            name: "obstruction agrees with the 2-edge-walk condition".into(),
            pass,
            detail: serde_json::to_value(&report)?,
        }],
    ))
}

fn boundaries(h: &ColourGraph) -> Vec<Boundary> {
    h.colours().map(Boundary::Colour).chain([Boundary::Free]).collect()
}

/// TV of the `v_s` marginals for segments of length `s..s+3`, against
/// `1 - 1/q^s`.
pub fn greedy_suite(h: &ColourGraph, s: usize) -> Result<SuiteReport> {
    let bound = 1.0 - (h.q() as f64).powi(-(s as i32));
    let mut checks = Vec::new();
    for len in s..=s + 3 {
        let (mut worst, mut tested, mut skipped) = (0.0f64, 0usize, 0usize);
        for d in boundaries(h) {
            let marg: Vec<Option<Vec<f64>>> = h
                .colours()
                .map(|c| {
                    site_marginal(h, len, &BoundarySpec::new(Boundary::Colour(c), d), s)
                        .ok()
                        .map(|m| h.colours().map(|k| m.prob(&k)).collect())
                })
                .collect();
            for a in 0..h.q() {
                for b in 0..h.q() {
                    match (&marg[a], &marg[b]) {
                        (Some(p), Some(q)) => {
                            worst = worst.max(tv_distance(p, q));
                            tested += 1;
                        }
                        _ => skipped += 1,
                    }
                }
            }
        }
        checks.push(Check {
            name: format!("v_s marginal tv, length {len}"),
            pass: worst <= bound,
            detail: json!({"max_tv": worst, "bound": bound, "triples": tested, "infeasible": skipped}),
        });
    }
    Ok(SuiteReport::from_checks("greedy", checks))
}

/// Site-by-site greedy profiles for `l in 2..=l_max` and all colour triples,
/// against `(1 - 1/D^2)^j` at every site.
pub fn linecoup_suite(h: &ColourGraph, l_max: usize) -> Result<SuiteReport> {
    if let Some((a, b)) = h.two_path_witness() {
        return Ok(SuiteReport::infeasible("linecoup", format!("colours {a} and {b} share no neighbour")));
    }
    let r = 1.0 - 1.0 / (h.max_degree() * h.max_degree()) as f64;
    let mut checks = Vec::new();
    for l in 2..=l_max {
        let (mut violations, mut min_slack) = (0usize, f64::INFINITY);
        for c1 in h.colours() {
            for c2 in h.colours() {
                for d in h.colours() {
                    let prof = disagreement_profile_v1(h, l, c1, c2, Boundary::Colour(d))?;
                    for (idx, &p) in prof.p.iter().enumerate() {
                        let slack = r.powi(idx as i32 + 1) - p;
                        min_slack = min_slack.min(slack);
                        violations += (slack < 0.0) as usize;
                    }
                }
            }
        }
        checks.push(Check {
            name: format!("greedy line coupling, l = {l}"),
            pass: violations == 0,
            detail: json!({"violations": violations, "min_slack": min_slack}),
        });
    }
    Ok(SuiteReport::from_checks("linecoup", checks))
}

/// Stride-`s` profiles on an `l`-site segment for all feasible triples,
/// against `(1 - 1/q^s)^floor(j/s)`.
pub fn smallcoup_suite(h: &ColourGraph, l: usize, s: usize) -> Result<SuiteReport> {
    let r = 1.0 - (h.q() as f64).powi(-(s as i32));
    let (mut violations, mut min_slack, mut tested, mut skipped) = (0usize, f64::INFINITY, 0usize, 0usize);
    let mut stride_ok = true;
    for d in boundaries(h) {
        for c1 in h.colours() {
            for c2 in h.colours() {
                let prof = match disagreement_profile_vs(h, l, c1, c2, d, s) {
                    Ok(p) => p,
                    Err(Error::EmptySupport(_)) => {
                        skipped += 1;
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                tested += 1;
                for (idx, &p) in prof.p.iter().enumerate() {
                    let slack = r.powi(((idx + 1) / s) as i32) - p;
                    min_slack = min_slack.min(slack);
                    violations += (slack < 0.0) as usize;
                }
                if l >= s && prof.p[s - 1] > r {
                    stride_ok = false;
                }
            }
        }
    }
    Ok(SuiteReport::from_checks(
        "smallcoup",
        vec![
            Check {
                name: format!("stride-{s} coupling, l = {l}"),
                pass: violations == 0,
                detail: json!({"violations": violations, "min_slack": min_slack, "triples": tested, "infeasible": skipped}),
            },
            Check { name: "first stride point within 1 - 1/q^s".into(), pass: stride_ok, detail: json!({"bound": r}) },
        ],
    ))
}

/// Pairs `(x, y)` differing at one site, spread over positions near both
/// path ends and both block-length boundaries, with both far-boundary
/// colours where `H` allows. Built for the independent-set graph and any
/// `H` with a looped colour adjacent to everything.
pub fn rnd_pair_panel(h: &ColourGraph, n: usize, w: usize, seed: u64) -> Result<Vec<AdjacentPair>> {
    let hub = h
        .colours()
        .find(|&c| h.neighbours(c).len() == h.q())
        .ok_or_else(|| Error::InvalidParameter("panel needs a colour adjacent to every colour".into()))?;
    let other = h.colours().find(|&c| c != hub).ok_or_else(|| Error::InvalidParameter("q must be >= 2".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = exact_uniform_sample(h, n, StateClass::Omega, &mut rng)?;
    let mut positions =
        vec![1, 2, n / 3, n / 2, n.saturating_sub(1), n, w, w + 1, n.saturating_sub(w), n.saturating_sub(w) + 1];
    positions.retain(|&i| (1..=n).contains(&i));
    positions.sort_unstable();
    positions.dedup();
    let mut out = Vec::new();
    for (k, &i) in positions.iter().enumerate() {
        for far in [hub, other] {
            let mut x = base.clone();
            // isolate `far` with hub neighbours so x stays a valid colouring
            let mut set = |site: usize, c: Colour| {
                if (1..=n).contains(&site) {
                    x.colours[site - 1] = c;
                }
            };
            for f in [i + w + 1, i.wrapping_sub(w + 1)] {
                if f >= 1 && f <= n {
                    set(f - 1, hub);
                    set(f, far);
                    set(f + 1, hub);
                }
            }
            set(i - 1, hub);
            set(i + 1, hub);
            let (xi, yi) = if k % 2 == 0 { (hub, other) } else { (other, hub) };
            set(i, xi);
            out.push(AdjacentPair::flip(h, &x, i, yi)?);
        }
    }
    Ok(out)
}

fn rnd_contraction_suite(h: &ColourGraph, n: usize, overrides: &Overrides, seed: u64) -> Result<SuiteReport> {
    let params = make_params(h, ChainKind::Rnd, overrides)?;
    let w = params.w_usize()?;
    let mut checks = Vec::new();
    for pair in rnd_pair_panel(h, n, w, seed)? {
        let r = expected_hamming_rnd(h, &params, &pair)?;
        let far = [pair.i + w + 1, pair.i.wrapping_sub(w + 1)]
            .iter()
            .filter(|&&f| f >= 1 && f <= n)
            .map(|&f| pair.x.at(f))
            .collect::<Vec<_>>();
        checks.push(Check {
            name: format!("i = {}, far colours {:?}", pair.i, far),
            pass: r.pass,
            detail: json!({
                "expected_hamming": r.expected_hamming,
                "threshold": r.threshold,
                "overrides": params.overrides.names(),
            }),
        });
    }
    Ok(SuiteReport::from_checks("rnd-contraction", checks))
}

fn identities_suite() -> SuiteReport {
    let r = check_identities(&IdentityRanges::default());
    SuiteReport::from_checks(
        "identities",
        vec![
            Check {
                name: "rank-sum inequality".into(),
                pass: r.sum_rank_violations == 0,
                detail: json!({"checked": r.sum_rank_checked, "min_slack": r.sum_rank_min_slack}),
            },
            Check {
                name: "floor-sum inequality".into(),
                pass: r.floor_sum_violations == 0,
                detail: json!({"checked": r.floor_sum_checked, "min_slack": r.floor_sum_min_slack}),
            },
        ],
    )
}

/// One full step of each chain started at uniform returns uniform.
pub fn stationarity_suite(h: &ColourGraph, n: usize, overrides: &Overrides, cap: usize) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    for kind in [ChainKind::AnyOrder, ChainKind::FixedOrder, ChainKind::Rnd] {
        let params = make_params(h, kind, overrides)?;
        let chain = match ExactChain::new(h, &params, n, &ScanOrder::Ascending, cap) {
            Ok(c) => c,
            Err(Error::CapExceeded { needed, cap, .. }) => {
                return Ok(SuiteReport::infeasible("stationarity", format!("{needed} states exceed the cap {cap}")))
            }
            Err(e @ Error::PathTooShort { .. }) => {
                checks.push(Check { name: format!("{kind:?}"), pass: false, detail: json!(e.to_string()) });
                continue;
            }
            Err(e) => return Err(e),
        };
        let residual = chain.stationarity_residual();
        checks.push(Check {
            name: format!("{kind:?} on {} states", chain.len()),
            pass: residual <= 1e-12,
            detail: json!({"residual": residual, "blocks": chain.schedule.len(), "overrides": params.overrides.names()}),
        });
    }
    Ok(SuiteReport::from_checks("stationarity", checks))
}

/// Worst exact TV over the start panel after the predicted number of scans.
fn thm1_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let h = &cfg.graph;
    let n = cfg.n.unwrap_or(12);
    let predicted = predicted_mixing_bound(ChainKind::AnyOrder, h, n, cfg.eps)?.value as usize;
    let params = make_params(h, ChainKind::AnyOrder, &cfg.overrides)?;
    let chain = match ExactChain::new(h, &params, n, &ScanOrder::Ascending, cfg.cap) {
        Ok(c) => c,
        Err(Error::CapExceeded { needed, cap, .. }) => {
            return Ok(SuiteReport::infeasible("thm1-tv", format!("{needed} states exceed the cap {cap}")))
        }
        Err(e) => return Err(e),
    };
    let mut checks = Vec::new();
    for start in chain.start_panel(10, cfg.seed) {
        let curve = chain.curve(&start, predicted)?;
        let tv = curve.tv_at(predicted).unwrap_or(f64::NAN);
        checks.push(Check {
            name: format!("start {}", render(&start)),
            pass: tv <= cfg.eps,
            detail: json!({
                "t_star": predicted,
                "tv": tv,
                "observed_mixing_time": mixing_time_exact(&curve, cfg.eps).ok(),
                "overrides": params.overrides.names(),
            }),
        });
    }
    Ok(SuiteReport::from_checks("thm1-tv", checks))
}

fn render(s: &PathState) -> String {
    s.colours.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("")
}
