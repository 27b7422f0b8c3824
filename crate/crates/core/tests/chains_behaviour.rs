use num_bigint::BigUint;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pathcol::chains::ChainRunner;
use pathcol::segment::StateClass;
use pathcol::{
    blocks_anyorder, blocks_fixedorder, blocks_rnd, exact_uniform_sample, make_params, run_scan, step_rnd, ChainKind,
    ColourGraph, Error, Overrides, PathState, ScanOrder,
};

fn big(x: u64) -> BigUint {
    x.into()
}

#[test]
fn canonical_constants_independent_set() {
    let h = ColourGraph::builtin("independent_set", None).unwrap();
    let p = make_params(&h, ChainKind::Rnd, &Overrides::default()).unwrap();
    // Delta = 2: ceil(4 ln 5) + 1; s = 9; ceil(ln 9217) * 2^9
    assert_eq!((p.l1, p.s), (8, 9));
    assert_eq!(p.beta, big(5120));
    assert_eq!(p.l2, big(92160));
    assert_eq!(p.gamma, big(1025));
    assert_eq!(p.u, big(46080));
    assert_eq!(p.w, big(9225));
    assert!(p.overrides.is_empty());
}

#[test]
fn canonical_constants_clique3() {
    let h = ColourGraph::builtin("clique", Some(3)).unwrap();
    let p = make_params(&h, ChainKind::FixedOrder, &Overrides::default()).unwrap();
    // 3^13 = 1594323; ceil(ln(2 * 13 * 3^13 + 1)) = 18
    assert_eq!((p.l1, p.s), (8, 13));
    assert_eq!(p.beta, big(18 * 1_594_323));
    assert_eq!(p.gamma, big(2 * 1_594_323 + 1));
    assert_eq!(p.u, big(18 * 1_594_323 * 13));
    assert_eq!(p.l2, big(2 * 18 * 1_594_323 * 13));
    assert!(matches!(p.schedule(1000), Err(Error::PathTooShort { .. })));
}

#[test]
fn overrides_are_recorded() {
    let h = ColourGraph::builtin("clique", Some(3)).unwrap();
    let o = Overrides { u: Some(3), w: Some(4), ..Default::default() };
    let p = make_params(&h, ChainKind::Rnd, &o).unwrap();
    assert_eq!(p.u, big(3));
    assert_eq!(p.w, big(4));
    let json = p.to_json();
    assert_eq!(json["overrides"], serde_json::json!(["u", "w"]));
}

#[test]
fn chain_kind_parses() {
    assert_eq!("anyorder".parse::<ChainKind>().unwrap(), ChainKind::AnyOrder);
    assert_eq!("fixedorder".parse::<ChainKind>().unwrap(), ChainKind::FixedOrder);
    assert_eq!("rnd".parse::<ChainKind>().unwrap(), ChainKind::Rnd);
    assert!("gibbs".parse::<ChainKind>().is_err());
}

#[test]
fn fixed_order_rejects_permutations() {
    let h = ColourGraph::builtin("clique", Some(3)).unwrap();
    let p = make_params(&h, ChainKind::FixedOrder, &Overrides { u: Some(2), ..Default::default() }).unwrap();
    let sched = p.schedule(8).unwrap();
    let x = PathState::new(vec![0, 1, 0, 1, 0, 1, 0, 1]);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let order = ScanOrder::Permutation((0..sched.len()).rev().collect());
    assert!(matches!(run_scan(&h, &p, &sched, &order, &x, &mut rng), Err(Error::InvalidOrder(_))));
}

proptest! {
    #[test]
    fn schedules_cover_every_site(n in 1usize..300, size in 1usize..40) {
        let a = blocks_anyorder(n, size);
        prop_assert!(a.multiplicity().iter().all(|&m| m >= 1));
        prop_assert!(a.blocks.iter().all(|b| b.lo >= 1 && b.hi <= n && b.len() <= size));
        let r = blocks_rnd(n, size);
        prop_assert!(r.multiplicity().iter().all(|&m| m == size));
        if let Ok(f) = blocks_fixedorder(n, size) {
            prop_assert_eq!(f.len(), n / size);
            prop_assert!(f.multiplicity().iter().all(|&m| (1..=2).contains(&m)));
        }
    }

    #[test]
    fn scans_keep_states_valid(kind in 0usize..3, seed: u64, n in 6usize..40) {
        let h = ColourGraph::builtin("widom_rowlinson", Some(3)).unwrap();
        let kind = [ChainKind::AnyOrder, ChainKind::FixedOrder, ChainKind::Rnd][kind];
        let o = Overrides { l1: Some(4), u: Some(3), w: Some(5), ..Default::default() };
        let p = make_params(&h, kind, &o).unwrap();
        let sched = p.schedule(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let order = if kind == ChainKind::FixedOrder { ScanOrder::Ascending } else { ScanOrder::RandomPerScan };
        let mut x = exact_uniform_sample(&h, n, StateClass::Omega, &mut rng).unwrap();
        for _ in 0..3 {
            x = match kind {
                ChainKind::Rnd => step_rnd(&h, &p, &sched, &x, &mut rng).unwrap().0,
                _ => run_scan(&h, &p, &sched, &order, &x, &mut rng).unwrap(),
            };
            prop_assert!(x.is_valid_colouring(&h));
        }
    }

    #[test]
    fn bipartite_chains_stay_in_class(seed: u64, n in 5usize..30) {
        let h = ColourGraph::builtin("path", Some(4)).unwrap();
        let o = Overrides { l1: Some(3), ..Default::default() };
        let p = make_params(&h, ChainKind::AnyOrder, &o).unwrap();
        let sched = p.schedule(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut runner = ChainRunner::new(&h, &p, sched);
        let mut x = exact_uniform_sample(&h, n, p.class, &mut rng).unwrap();
        let class = x.class_of(&h).unwrap();
        for _ in 0..3 {
            runner.advance(&mut x, &mut rng).unwrap();
            prop_assert!(x.is_valid_colouring(&h));
            prop_assert_eq!(x.class_of(&h), Some(class));
        }
    }
}
