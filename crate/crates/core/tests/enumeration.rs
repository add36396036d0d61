mod common;

use std::collections::BTreeSet;

use common::naive_universe;
use ordrecon_core::enumerate::{enumerate_by_maximal_extension, DEFAULT_CAP};
use ordrecon_core::{enumerate, UniverseFilter};

#[test]
fn orderly_enumeration_matches_brute_force_classes() {
    for n in 1..=6 {
        let (classes, certs) = naive_universe(n);
        let u = enumerate(n, UniverseFilter::All, DEFAULT_CAP).unwrap();
        assert_eq!(classes, u.len(), "n = {n}");
        // one certificate per brute-force class, and the same set
        assert_eq!(certs.len(), classes, "n = {n}");
        assert_eq!(certs, *u.certs, "n = {n}");
    }
}

#[test]
fn small_universes() {
    assert_eq!(enumerate(3, UniverseFilter::All, DEFAULT_CAP).unwrap().len(), 5);
    assert_eq!(enumerate(4, UniverseFilter::All, DEFAULT_CAP).unwrap().len(), 16);
}

#[test]
fn two_strategies_agree_at_seven_and_eight() {
    for (n, count) in [(7, 2045), (8, 16999)] {
        let u = enumerate(n, UniverseFilter::All, DEFAULT_CAP).unwrap();
        assert_eq!(u.len(), count);
        assert_eq!(*u.certs, enumerate_by_maximal_extension(n));
    }
}

/// Posets are multisets of connected posets, so all-counts are the Euler
/// transform of connected counts.
#[test]
fn connected_counts_compose_to_all_counts() {
    let max = 8;
    let mut connected = vec![0u64; max + 1];
    let mut all = vec![1u64; max + 1];
    for n in 1..=max {
        connected[n] = enumerate(n, UniverseFilter::Connected, DEFAULT_CAP).unwrap().len() as u64;
        all[n] = enumerate(n, UniverseFilter::All, DEFAULT_CAP).unwrap().len() as u64;
    }
    // b_n = (1/n) Σ_{k=1}^{n} c_k b_{n-k}, with c_k = Σ_{d | k} d a_d
    let c: Vec<u64> = (0..=max)
        .map(|k| (1..=k).filter(|d| k % d == 0).map(|d| d as u64 * connected[d]).sum())
        .collect();
    let mut b = vec![1u64; max + 1];
    for n in 1..=max {
        let s: u64 = (1..=n).map(|k| c[k] * b[n - k]).sum();
        assert_eq!(s % n as u64, 0);
        b[n] = s / n as u64;
    }
    assert_eq!(b, all);
    assert_eq!(&connected[4..=8], &[10, 44, 238, 1650, 14512]);
}

#[test]
fn coconnected_filter_is_a_subset() {
    for n in 2..=6 {
        let c = enumerate(n, UniverseFilter::Connected, DEFAULT_CAP).unwrap();
        let cc = enumerate(n, UniverseFilter::ConnectedCoconnected, DEFAULT_CAP).unwrap();
        let cs: BTreeSet<_> = c.certs.iter().collect();
        assert!(cc.certs.iter().all(|x| cs.contains(x)));
        assert!(cc.certs.iter().all(|x| x.to_poset().is_coconnected()));
    }
}
