use std::collections::HashMap;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use pathcol::segment::{enumerate_segment, StateClass};
use pathcol::{
    enumerate_state_space, exact_uniform_sample, sample_segment, segment_counts, site_marginal, Boundary, BoundarySpec,
    Colour, ColourGraph, Error, Precision, SegmentLaw,
};

fn graph(i: usize) -> ColourGraph {
    match i % 5 {
        0 => ColourGraph::builtin("clique", Some(3)).unwrap(),
        1 => ColourGraph::builtin("independent_set", None).unwrap(),
        2 => ColourGraph::builtin("widom_rowlinson", Some(2)).unwrap(),
        3 => ColourGraph::builtin("path", Some(4)).unwrap(),
        _ => ColourGraph::builtin("beach", None).unwrap(),
    }
}

fn boundary(h: &ColourGraph, k: usize) -> Boundary {
    if k >= h.q() {
        Boundary::Free
    } else {
        Boundary::Colour(k as Colour)
    }
}

fn fits(h: &ColourGraph, s: &[Colour], bc: &BoundarySpec) -> bool {
    let left = match bc.left {
        Boundary::Colour(c) => h.adjacent(c, s[0]),
        Boundary::Free => true,
    };
    let right = match bc.right {
        Boundary::Colour(d) => h.adjacent(s[s.len() - 1], d),
        Boundary::Free => true,
    };
    left && right && h.is_walk(s)
}

proptest! {
    #[test]
    fn samples_are_valid_fillings(gi in 0usize..5, l in 1usize..30, a in 0usize..5, b in 0usize..5, seed: u64) {
        let h = graph(gi);
        let bc = BoundarySpec::new(boundary(&h, a), boundary(&h, b));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match sample_segment(&h, l, &bc, &mut rng) {
            Ok(s) => {
                prop_assert_eq!(s.len(), l);
                prop_assert!(fits(&h, &s, &bc));
            }
            Err(Error::EmptySupport(_)) => {
                prop_assert!(segment_counts(&h, l, &bc).unwrap().total == 0u32.into());
            }
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn float_and_exact_laws_agree(gi in 0usize..5, l in 1usize..40, b in 0usize..5) {
        let h = graph(gi);
        let bc = BoundarySpec::new(Boundary::Free, boundary(&h, b));
        let exact = SegmentLaw::build(&h, l, &bc, Precision::Exact);
        let float = SegmentLaw::build(&h, l, &bc, Precision::Float);
        if let (Ok(e), Ok(f)) = (exact, float) {
            for j in 0..l {
                for (x, y) in e.kernel(j).iter().zip(f.kernel(j)) {
                    prop_assert!((x - y).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn enumeration_matches_counts(gi in 0usize..5, l in 1usize..7, a in 0usize..5, b in 0usize..5) {
        let h = graph(gi);
        let bc = BoundarySpec::new(boundary(&h, a), boundary(&h, b));
        let all = enumerate_segment(&h, l, &bc, 1 << 20).unwrap();
        prop_assert_eq!(segment_counts(&h, l, &bc).unwrap().total, all.len().into());
        prop_assert!(all.iter().all(|s| fits(&h, s, &bc)));
        prop_assert!(all.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn marginals_match_enumeration() {
    for gi in 0..5 {
        let h = graph(gi);
        for a in 0..=h.q() {
            for b in 0..=h.q() {
                let bc = BoundarySpec::new(boundary(&h, a), boundary(&h, b));
                let all = enumerate_segment(&h, 6, &bc, 1 << 20).unwrap();
                if all.is_empty() {
                    continue;
                }
                for j in 1..=6 {
                    let m = site_marginal(&h, 6, &bc, j).unwrap();
                    for c in h.colours() {
                        let want = all.iter().filter(|s| s[j - 1] == c).count() as f64 / all.len() as f64;
                        assert!((m.prob(&c) - want).abs() < 1e-12);
                    }
                }
            }
        }
    }
}

#[test]
fn exact_uniform_sample_passes_chi_square() {
    let h = ColourGraph::builtin("clique", Some(3)).unwrap();
    let states = enumerate_state_space(&h, 6, StateClass::Omega, 1 << 20).unwrap();
    assert_eq!(states.len(), 96);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let n = 96_000;
    let mut hist: HashMap<Vec<Colour>, usize> = HashMap::new();
    for _ in 0..n {
        *hist.entry(exact_uniform_sample(&h, 6, StateClass::Omega, &mut rng).unwrap().colours).or_default() += 1;
    }
    assert_eq!(hist.len(), 96);
    let e = n as f64 / 96.0;
    let chi2: f64 = hist.values().map(|&o| (o as f64 - e).powi(2) / e).sum();
    let p_value = 1.0 - ChiSquared::new(95.0).unwrap().cdf(chi2);
    assert!(p_value > 1e-3, "chi2 {chi2}, p {p_value}");
}

#[test]
fn parity_classes_split_bipartite_space() {
    let h = ColourGraph::builtin("clique", Some(2)).unwrap();
    let one = enumerate_state_space(&h, 7, StateClass::Omega1, 1 << 10).unwrap();
    let two = enumerate_state_space(&h, 7, StateClass::Omega2, 1 << 10).unwrap();
    assert_eq!((one.len(), two.len()), (1, 1));
    assert_ne!(one[0], two[0]);
}

#[test]
fn enumeration_cap_is_enforced() {
    let h = ColourGraph::builtin("clique", Some(3)).unwrap();
    let err = enumerate_segment(&h, 12, &BoundarySpec::free(), 1000).unwrap_err();
    assert!(matches!(err, Error::CapExceeded { needed: 6144, cap: 1000, .. }));
}

#[test]
fn empty_support_is_reported() {
    let h = ColourGraph::builtin("clique", Some(2)).unwrap();
    let bc = BoundarySpec::both(0, 0);
    let err = sample_segment(&h, 2, &bc, &mut ChaCha8Rng::seed_from_u64(0)).unwrap_err();
    assert!(matches!(err, Error::EmptySupport(_)));
}
