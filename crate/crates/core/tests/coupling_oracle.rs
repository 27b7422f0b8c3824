use std::collections::HashMap;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pathcol::coupling::{
    coupled_rnd_step, disagreement_profile_v1, disagreement_profile_vs, empirical_profile, expected_hamming_rnd,
    maximal_coupling, stride_profile, tv_distance, AdjacentPair,
};
use pathcol::{
    make_params, Boundary, BoundarySpec, ChainKind, Colour, ColourGraph, Overrides, PathState, Precision, SegmentLaw,
};

fn strings(q: usize, l: usize) -> Vec<Vec<Colour>> {
    (0..q.pow(l as u32))
        .map(|mut code| {
            let mut s = vec![0; l];
            for v in s.iter_mut().rev() {
                *v = (code % q) as Colour;
                code /= q;
            }
            s
        })
        .collect()
}

/// Brute-force path counts used to rebuild the stride coupling from scratch.
struct Counts<'a> {
    h: &'a ColourGraph,
    l: usize,
    d: Boundary,
}

impl Counts<'_> {
    /// Walks with `k` steps from `a` to `c`.
    fn walks(&self, a: Colour, k: usize, c: Colour) -> f64 {
        if k == 0 {
            return (a == c) as u8 as f64;
        }
        strings(self.h.q(), k - 1)
            .into_iter()
            .filter(|mid| {
                let mut prev = a;
                for &x in mid.iter().chain([c].iter()) {
                    if !self.h.adjacent(prev, x) {
                        return false;
                    }
                    prev = x;
                }
                true
            })
            .count() as f64
    }

    /// Completions of sites `t+1..=l` given `v_t = a`.
    fn tail(&self, t: usize, a: Colour) -> f64 {
        let ok_end = |x: Colour| match self.d {
            Boundary::Colour(d) => self.h.adjacent(x, d),
            Boundary::Free => true,
        };
        if t == self.l {
            return ok_end(a) as u8 as f64;
        }
        self.h.colours().filter(|&c| ok_end(c)).map(|c| self.walks(a, self.l - t, c)).sum()
    }

    fn row(&self, t: usize, a: Colour, t2: usize) -> Vec<f64> {
        let z = self.tail(t, a);
        self.h.colours().map(|c| self.walks(a, t2 - t, c) * self.tail(t2, c) / z).collect()
    }

    fn bridge(&self, t: usize, a: Colour, j: usize, t2: usize, c: Colour) -> Vec<f64> {
        let z = self.walks(a, t2 - t, c);
        self.h.colours().map(|x| self.walks(a, j - t, x) * self.walks(x, t2 - j, c) / z).collect()
    }
}

fn oracle_profile(h: &ColourGraph, l: usize, d: Boundary, c1: Colour, c2: Colour, s: usize) -> Vec<f64> {
    let cnt = Counts { h, l, d };
    let q = h.q();
    let mut p = vec![0.0; l];
    let mut mass: HashMap<(Colour, Colour), f64> = HashMap::new();
    if c1 != c2 {
        mass.insert((c1, c2), 1.0);
    }
    let mut t = 0;
    while t < l && !mass.is_empty() {
        let t2 = if l - t >= s { t + s } else { t + 1 };
        let mut next: HashMap<(Colour, Colour), f64> = HashMap::new();
        for (&(a, b), &w) in &mass {
            let (ra, rb) = (cnt.row(t, a, t2), cnt.row(t, b, t2));
            let overlap: Vec<f64> = ra.iter().zip(&rb).map(|(x, y)| x.min(*y)).collect();
            let tv = 1.0 - overlap.iter().sum::<f64>();
            for c in 0..q {
                for e in 0..q {
                    let mut pr = if c == e { overlap[c] } else { 0.0 };
                    if tv > 1e-300 {
                        pr += (ra[c] - overlap[c]) * (rb[e] - overlap[e]) / tv;
                    }
                    if pr <= 0.0 {
                        continue;
                    }
                    for j in t + 1..t2 {
                        let ba = cnt.bridge(t, a, j, t2, c as Colour);
                        let bb = cnt.bridge(t, b, j, t2, e as Colour);
                        let same: f64 = ba.iter().zip(&bb).map(|(x, y)| x * y).sum();
                        p[j - 1] += w * pr * (1.0 - same);
                    }
                    if c != e {
                        p[t2 - 1] += w * pr;
                        *next.entry((c as Colour, e as Colour)).or_default() += w * pr;
                    }
                }
            }
        }
        mass = next;
        t = t2;
    }
    p
}

fn builtin(name: &str, q: Option<usize>) -> ColourGraph {
    ColourGraph::builtin(name, q).unwrap()
}

#[test]
fn stride_profiles_match_brute_force_coupling() {
    let graphs = [builtin("clique", Some(3)), builtin("independent_set", None), builtin("widom_rowlinson", Some(2))];
    let mut compared = 0;
    for h in &graphs {
        let ds: Vec<Boundary> = h.colours().map(Boundary::Colour).chain([Boundary::Free]).collect();
        for l in 1..=6 {
            for &d in &ds {
                for s in 1..=3 {
                    for c1 in h.colours() {
                        for c2 in h.colours() {
                            let got = match disagreement_profile_vs(h, l, c1, c2, d, s) {
                                Ok(p) => p.p,
                                Err(_) => continue,
                            };
                            let want = oracle_profile(h, l, d, c1, c2, s);
                            for (j, (g, w)) in got.iter().zip(&want).enumerate() {
                                assert!(
                                    (g - w).abs() < 1e-12,
                                    "{h:?} l={l} d={d:?} s={s} ({c1},{c2}) j={}: {g} vs {w}",
                                    j + 1
                                );
                            }
                            compared += 1;
                        }
                    }
                }
            }
        }
    }
    assert!(compared > 500);
}

#[test]
fn greedy_profile_is_stride_one() {
    let h = builtin("clique", Some(3));
    let a = disagreement_profile_v1(&h, 10, 0, 1, Boundary::Colour(2)).unwrap();
    let b = disagreement_profile_vs(&h, 10, 0, 1, Boundary::Colour(2), 1).unwrap();
    assert_eq!(a.p, b.p);
}

#[test]
fn greedy_profile_refuses_graphs_without_common_neighbours() {
    let h = builtin("beach", None);
    assert!(disagreement_profile_v1(&h, 6, 0, 3, Boundary::Free).is_err());
}

#[test]
fn sampled_coupling_matches_exact_profile() {
    let h = builtin("independent_set", None);
    let law =
        SegmentLaw::build(&h, 12, &BoundarySpec::new(Boundary::Free, Boundary::Colour(1)), Precision::Exact).unwrap();
    let exact = stride_profile(&law, 0, 1, 3).unwrap();
    let n = 40_000;
    let emp = empirical_profile(&law, 0, 1, 3, n, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
    for (e, x) in emp.p.iter().zip(&exact) {
        let sd = (x * (1.0 - x) / n as f64).sqrt();
        assert!((e - x).abs() <= 5.0 * sd + 1e-9, "{e} vs {x}");
    }
}

#[test]
fn rnd_expectation_matches_simulation() {
    let is = builtin("independent_set", None);
    let o = Overrides { w: Some(6), s: Some(2), ..Default::default() };
    let p = make_params(&is, ChainKind::Rnd, &o).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for i in [1, 4, 15, 30] {
        let pair = AdjacentPair::flip(&is, &PathState::new(vec![0; 30]), i, 1).unwrap();
        let exact = expected_hamming_rnd(&is, &p, &pair).unwrap().expected_hamming;
        let trials = 100_000;
        let mean = (0..trials).map(|_| coupled_rnd_step(&is, &p, &pair, &mut rng).unwrap() as f64).sum::<f64>()
            / trials as f64;
        assert!((mean - exact).abs() < 0.005, "i={i}: simulated {mean} vs exact {exact}");
    }
}

proptest! {
    #[test]
    fn maximal_coupling_has_right_marginals(w1 in prop::collection::vec(0.0f64..1.0, 5), w2 in prop::collection::vec(0.0f64..1.0, 5)) {
        let s1: f64 = w1.iter().sum();
        let s2: f64 = w2.iter().sum();
        prop_assume!(s1 > 1e-6 && s2 > 1e-6);
        let p: Vec<f64> = w1.iter().map(|x| x / s1).collect();
        let q: Vec<f64> = w2.iter().map(|x| x / s2).collect();
        let c = maximal_coupling(&p, &q);
        for (a, b) in c.row_sums().iter().zip(&p) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in c.col_sums().iter().zip(&q) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        prop_assert!((c.disagreement() - tv_distance(&p, &q)).abs() < 1e-12);
    }
}
