//! Cross-checks of the deque shortest-path scheme and of the exact
//! enumeration against independent oracles.

mod common;

use std::sync::Arc;

use num_bigint::BigInt;
use proptest::prelude::*;

use fpp::enumerate::{self, DEFAULT_ENUMERATION_CAP};
use fpp::lattice::{build_geometry, Configuration, RandomPlan};
use fpp::passage;

#[test]
fn deque_matches_walk_enumeration_on_tiny_boxes() {
    for (d, n) in [(2usize, 1usize), (2, 2)] {
        let geo = Arc::new(build_geometry(d, n).unwrap());
        let m = geo.edge_count();
        for mask in 0u64..(1 << m) {
            let times: Vec<u8> = (0..m).map(|e| ((mask >> e) & 1) as u8).collect();
            let cfg = Configuration::from_times(Arc::clone(&geo), times).unwrap();
            assert_eq!(
                passage::phi(&cfg),
                common::brute_force_phi(&cfg),
                "mismatch at d={d} n={n} mask={mask:#b}"
            );
        }
    }
}

#[test]
fn exact_distribution_matches_walk_enumeration_oracle() {
    for (d, n) in [(2usize, 1usize), (2, 2)] {
        let geo = Arc::new(build_geometry(d, n).unwrap());
        let dist = enumerate::exact_phi_distribution(&geo, DEFAULT_ENUMERATION_CAP).unwrap();
        let oracle = common::oracle_phi_counts(&geo);
        assert_eq!(dist.max_value() + 1, oracle.len());
        for (k, row) in oracle.iter().enumerate() {
            let expect: Vec<BigInt> = row.iter().map(|&c| BigInt::from(c)).collect();
            assert_eq!(
                dist.probability(k).coeffs(),
                &expect,
                "count mismatch at d={d} n={n} k={k}"
            );
        }
    }
}

#[test]
fn expectation_matches_direct_configuration_sum() {
    // E[phi] from the distribution equals the direct sum over configurations
    // of phi(omega) * weight(omega), both as exact polynomials
    let geo = Arc::new(build_geometry(2, 2).unwrap());
    let m = geo.edge_count();
    let dist = enumerate::exact_phi_distribution(&geo, DEFAULT_ENUMERATION_CAP).unwrap();
    let oracle = common::oracle_phi_counts(&geo);
    let mut weighted = vec![BigInt::from(0); m + 1];
    for (k, row) in oracle.iter().enumerate() {
        for (z, &count) in row.iter().enumerate() {
            weighted[z] += BigInt::from(count) * BigInt::from(k);
        }
    }
    let direct = enumerate::ZeroCountPoly::new(m, weighted).to_monomial();
    assert_eq!(dist.expectation(), direct);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn deque_matches_dijkstra_on_random_instances(
        d in 2usize..=3,
        n in 1usize..=6,
        p in 0.05f64..0.95,
        seed in any::<u64>(),
    ) {
        let geo = Arc::new(build_geometry(d, n).unwrap());
        let cfg = Configuration::sample(geo, p, RandomPlan::new(seed, 0)).unwrap();
        prop_assert_eq!(passage::phi(&cfg), common::dijkstra_phi(&cfg));
    }

    #[test]
    fn phi_is_monotone_in_the_times(
        n in 1usize..=4,
        seed in any::<u64>(),
        p_lo in 0.05f64..0.5,
        bump in 0.05f64..0.45,
    ) {
        // shared plan: raising p lowers times entrywise, so phi cannot rise
        let geo = Arc::new(build_geometry(2, n).unwrap());
        let plan = RandomPlan::new(seed, 0);
        let lo = Configuration::sample(Arc::clone(&geo), p_lo + bump, plan).unwrap();
        let hi = Configuration::sample(geo, p_lo, plan).unwrap();
        for e in 0..lo.times().len() {
            prop_assert!(lo.time(e) <= hi.time(e));
        }
        prop_assert!(passage::phi(&lo) <= passage::phi(&hi));
    }

    #[test]
    fn phi_stays_within_bounds(
        d in 2usize..=3,
        n in 1usize..=5,
        p in 0.0f64..=1.0,
        seed in any::<u64>(),
    ) {
        let geo = Arc::new(build_geometry(d, n).unwrap());
        let cfg = Configuration::sample(geo, p, RandomPlan::new(seed, 1)).unwrap();
        prop_assert!(passage::phi(&cfg) <= n as u32);
    }

    #[test]
    fn flip_moves_phi_by_at_most_one(
        n in 1usize..=3,
        p in 0.2f64..0.8,
        seed in any::<u64>(),
        edge_pick in any::<u32>(),
    ) {
        let geo = Arc::new(build_geometry(2, n).unwrap());
        let cfg = Configuration::sample(geo, p, RandomPlan::new(seed, 0)).unwrap();
        let e = edge_pick as usize % cfg.times().len();
        let base = passage::phi(&cfg);
        let flipped = passage::phi(&cfg.flip(e).unwrap());
        prop_assert!(base.abs_diff(flipped) <= 1);
    }

    #[test]
    fn shortest_passage_matches_dijkstra_between_random_faces(
        n in 2usize..=5,
        p in 0.1f64..0.9,
        seed in any::<u64>(),
        axis in 0usize..2,
    ) {
        let geo = Arc::new(build_geometry(2, n).unwrap());
        let cfg = Configuration::sample(Arc::clone(&geo), p, RandomPlan::new(seed, 2)).unwrap();
        let sources = geo.face_vertices(axis, 0);
        let targets = geo.face_vertices(axis, n as i64);
        let res = passage::shortest_passage(&cfg, &sources, &targets, |_| true).unwrap();
        let oracle = common::dijkstra_min_passage(&cfg, &sources, &targets).unwrap();
        prop_assert_eq!(res.value, oracle);
    }
}
