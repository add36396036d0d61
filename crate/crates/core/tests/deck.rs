use std::collections::BTreeMap;

use proptest::prelude::*;

use ordrecon_core::deck::{deck, invert_deck_certs};
use ordrecon_core::enumerate::DEFAULT_CAP;
use ordrecon_core::{canonical_cert, enumerate, CanonicalCert, Deck, Poset, UniverseFilter};

fn naive_deck(p: &Poset) -> Deck {
    Deck::from_cards(p.n(), (0..p.n()).map(|x| canonical_cert(&p.delete(x))))
}

/// Every deck in the universe, with the posets that have it.
fn decks_of(n: usize) -> BTreeMap<Deck, Vec<CanonicalCert>> {
    let mut out: BTreeMap<Deck, Vec<CanonicalCert>> = BTreeMap::new();
    for c in enumerate(n, UniverseFilter::All, DEFAULT_CAP).unwrap().certs.iter() {
        out.entry(naive_deck(&c.to_poset())).or_default().push(*c);
    }
    out
}

#[test]
fn inverter_returns_exactly_the_deck_classes() {
    for n in 2..=6 {
        for (d, mut expect) in decks_of(n) {
            expect.sort();
            assert_eq!(invert_deck_certs(&d).unwrap(), expect, "n = {n}");
        }
    }
}

#[test]
fn only_the_three_element_pair_shares_a_deck() {
    for n in 3..=6 {
        let shared: Vec<_> = decks_of(n).into_values().filter(|g| g.len() > 1).collect();
        if n == 3 {
            assert_eq!(shared.len(), 1);
            let pair = three_element_pair();
            assert_eq!(shared[0], pair);
        } else {
            assert!(shared.is_empty(), "n = {n}");
        }
    }
}

#[test]
fn deck_text_round_trips() {
    let p = Poset::parse_text("4\n0<1\n0<2\n1<3\n").unwrap();
    let d = deck(&p);
    assert_eq!(d.to_text().parse::<Deck>().unwrap(), d);
    assert_eq!(d.total(), 4);
}

fn arb_poset(max_n: usize) -> impl Strategy<Value = Poset> {
    (1..=max_n)
        .prop_flat_map(|n| (Just(n), proptest::collection::vec(any::<bool>(), n * (n - 1) / 2), Just(n)))
        .prop_flat_map(|(n, bits, _)| (Just(n), Just(bits), Just((0..n).collect::<Vec<usize>>()).prop_shuffle()))
        .prop_map(|(n, bits, perm)| {
            let mut pairs = Vec::new();
            let mut k = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if bits[k] {
                        pairs.push((perm[i], perm[j]));
                    }
                    k += 1;
                }
            }
            Poset::from_cover_pairs(n, &pairs).unwrap()
        })
}

proptest! {
    #[test]
    fn deck_matches_naive_cards(p in arb_poset(9)) {
        prop_assert_eq!(deck(&p), naive_deck(&p));
    }

    #[test]
    fn inverter_contains_the_source(p in arb_poset(7)) {
        prop_assume!(p.n() >= 2);
        let found = invert_deck_certs(&deck(&p)).unwrap();
        prop_assert!(found.contains(&canonical_cert(&p)));
    }
}

/// The `V` (one point below two) and `Λ` (two points below one), sorted.
fn three_element_pair() -> Vec<ordrecon_core::CanonicalCert> {
    let v = Poset::from_cover_pairs(3, &[(0, 1), (0, 2)]).unwrap();
    let lambda = Poset::from_cover_pairs(3, &[(0, 2), (1, 2)]).unwrap();
    let mut pair = vec![canonical_cert(&v), canonical_cert(&lambda)];
    pair.sort();
    pair
}
