//! Cards, decks, π-decks, Kelly counting and the deck inverter.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canonical::{canonical_cert, count_subposets, CanonicalCert};
use crate::decomposition::ntma_points;
use crate::elemset::ElemSet;
use crate::error::{Error, Result};
use crate::extend::for_each_extension;
use crate::extend::extend_with;
use crate::poset::Poset;

/// Multiset of isomorphism types.
pub type CertMultiset = BTreeMap<CanonicalCert, usize>;

/// A multiset of cards of a parent poset with `n` elements.
///
/// Full decks hold `n` cards; π-decks hold the cards of the points with some
/// property and may be smaller.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Deck {
    n: usize,
    cards: CertMultiset,
}

impl Deck {
    pub fn new(n: usize) -> Self {
        Deck {
            n,
            cards: CertMultiset::new(),
        }
    }

    pub fn from_cards(n: usize, cards: impl IntoIterator<Item = CanonicalCert>) -> Self {
        let mut d = Deck::new(n);
        for c in cards {
            d.add(c, 1);
        }
        d
    }

    /// Size of the parent poset.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cards(&self) -> &CertMultiset {
        &self.cards
    }

    pub fn total(&self) -> usize {
        self.cards.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.cards.is_empty()
    }

    pub fn multiplicity(&self, c: &CanonicalCert) -> usize {
        self.cards.get(c).copied().unwrap_or(0)
    }

    pub fn add(&mut self, c: CanonicalCert, k: usize) {
        if k > 0 {
            *self.cards.entry(c).or_insert(0) += k;
        }
    }

    /// Removes `k` copies of `c`; fails if fewer are present.
    pub fn remove(&mut self, c: &CanonicalCert, k: usize) -> Result<()> {
        let have = self.multiplicity(c);
        if have < k {
            return Err(Error::InconsistentDeck(format!(
                "cannot remove {k} copies of {c}: only {have} present"
            )));
        }
        if have == k {
            self.cards.remove(c);
        } else {
            self.cards.insert(*c, have - k);
        }
        Ok(())
    }

    /// Multiset difference; fails unless `other` is contained in `self`.
    pub fn subtract(&self, other: &Deck) -> Result<Deck> {
        let mut out = self.clone();
        for (c, &k) in &other.cards {
            out.remove(c, k)?;
        }
        Ok(out)
    }

    pub fn union(&self, other: &Deck) -> Deck {
        let mut out = self.clone();
        for (c, &k) in &other.cards {
            out.add(*c, k);
        }
        out
    }

    /// `(cert, multiplicity)` pairs in certificate order.
    pub fn iter(&self) -> impl Iterator<Item = (&CanonicalCert, usize)> {
        self.cards.iter().map(|(c, &k)| (c, k))
    }

    /// Every card, repeated by multiplicity, in certificate order.
    pub fn card_list(&self) -> Vec<CanonicalCert> {
        self.iter()
            .flat_map(|(c, k)| std::iter::repeat(*c).take(k))
            .collect()
    }

    /// Checks that this is a plausible full deck: `n` cards of size `n - 1`.
    pub fn check_full(&self) -> Result<()> {
        if let Some((c, _)) = self.iter().find(|(c, _)| c.n() + 1 != self.n) {
            return Err(Error::InconsistentDeck(format!(
                "card {c} does not have {} elements",
                self.n.saturating_sub(1)
            )));
        }
        if self.total() != self.n {
            return Err(Error::InconsistentDeck(format!(
                "deck for {} elements holds {} cards",
                self.n,
                self.total()
            )));
        }
        Ok(())
    }

    /// The deck file format: a `deck n=<n>` header, then `<multiplicity> <cert>` lines.
    pub fn to_text(&self) -> String {
        let mut s = format!("deck n={}\n", self.n);
        for (c, k) in self.iter() {
            s.push_str(&format!("{k} {c}\n"));
        }
        s
    }
}

impl FromStr for Deck {
    type Err = Error;

    fn from_str(text: &str) -> Result<Deck> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("missing deck header".into()))?;
        let n = header
            .strip_prefix("deck n=")
            .and_then(|v| v.trim().parse::<usize>().ok())
            .ok_or_else(|| Error::Parse(format!("bad deck header `{header}`")))?;
        let mut deck = Deck::new(n);
        for line in lines {
            let (k, c) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| Error::Parse(format!("expected `<multiplicity> <cert>`, got `{line}`")))?;
            let k: usize = k
                .parse()
                .map_err(|_| Error::Parse(format!("bad multiplicity `{k}`")))?;
            deck.add(c.trim().parse()?, k);
        }
        Ok(deck)
    }
}

impl fmt::Display for Deck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl fmt::Debug for Deck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Deck(n={}; ", self.n)?;
        for (i, (c, k)) in self.iter().enumerate() {
            write!(f, "{}{k}x{c}", if i == 0 { "" } else { ", " })?;
        }
        write!(f, ")")
    }
}

pub fn deck(p: &Poset) -> Deck {
    Deck::from_cards(p.n(), (0..p.n()).map(|x| canonical_cert(&p.delete(x))))
}

/// Point properties selecting a π-deck.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PointProperty {
    Minimal,
    Maximal,
    Extremal,
    Rank(usize),
    /// Nonmaximal points of the given rank.
    NonmaximalRank(usize),
    NonextremalRank(usize),
    Ntma,
    NtmaRank(usize),
}

impl PointProperty {
    /// Points of `p` with this property.
    pub fn points(&self, p: &Poset) -> ElemSet {
        let e = p.extremal_sets();
        let of_rank = |r: usize| -> ElemSet {
            let ranks = p.ranks();
            (0..p.n()).filter(|&x| ranks[x] == r).collect()
        };
        match *self {
            PointProperty::Minimal => e.min,
            PointProperty::Maximal => e.max,
            PointProperty::Extremal => e.extremal,
            PointProperty::Rank(r) => of_rank(r),
            PointProperty::NonmaximalRank(r) => of_rank(r) - e.max,
            PointProperty::NonextremalRank(r) => of_rank(r) - e.extremal,
            PointProperty::Ntma => ntma_points(p),
            PointProperty::NtmaRank(r) => of_rank(r) & ntma_points(p),
        }
    }
}

/// Ground-truth π-deck computed from the labelled poset.
pub fn pi_deck(p: &Poset, property: PointProperty) -> Deck {
    Deck::from_cards(
        p.n(),
        property
            .points(p)
            .iter()
            .map(|x| canonical_cert(&p.delete(x))),
    )
}

/// `s(q, P)` computed from the deck of `P` alone.
pub fn kelly_count_from_deck(q: &Poset, d: &Deck) -> Result<usize> {
    let n = d.n();
    if q.n() >= n || n <= 3 {
        return Err(Error::Size(format!(
            "Kelly counting needs |Q| < |P| and |P| > 3, got |Q| = {} and |P| = {n}",
            q.n()
        )));
    }
    let mut sum = 0usize;
    for (c, k) in d.iter() {
        sum += k * count_subposets(q, &c.to_poset())?;
    }
    let denom = n - q.n();
    if sum % denom != 0 {
        return Err(Error::Arithmetic(format!(
            "card copy total {sum} is not divisible by {denom}"
        )));
    }
    Ok(sum / denom)
}

fn multiset_of(sets: impl Iterator<Item = Poset>) -> CertMultiset {
    let mut m = CertMultiset::new();
    for s in sets {
        *m.entry(canonical_cert(&s)).or_insert(0) += 1;
    }
    m
}

/// Isomorphism types of the principal ideals `↓x`.
pub fn ideal_deck(p: &Poset) -> CertMultiset {
    multiset_of((0..p.n()).map(|x| p.subposet(p.down_set(x))))
}

/// Isomorphism types of the principal filters `↑x`.
pub fn filter_deck(p: &Poset) -> CertMultiset {
    multiset_of((0..p.n()).map(|x| p.subposet(p.up_set(x))))
}

/// Isomorphism types of the neighbourhoods `N(x)` of the points of rank `k`.
pub fn neighborhood_deck(p: &Poset, k: usize) -> CertMultiset {
    let ranks = p.ranks();
    multiset_of(
        (0..p.n())
            .filter(|&x| ranks[x] == k)
            .map(|x| p.subposet(p.up_set(x) | p.down_set(x))),
    )
}

pub fn ideal_size_sequence(p: &Poset) -> Vec<usize> {
    p.ideal_size_sequence()
}

/// All posets (canonically labelled, sorted by certificate) whose deck is `d`.
///
/// Extends the least card by every one-point extension, keeps those with the
/// comparable-pair count forced by the deck, and compares full decks.
pub fn invert_deck(d: &Deck) -> Result<Vec<Poset>> {
    Ok(invert_deck_certs(d)?.iter().map(|c| c.to_poset()).collect())
}

pub fn invert_deck_certs(d: &Deck) -> Result<Vec<CanonicalCert>> {
    let n = d.n();
    if n < 2 {
        return Err(Error::InconsistentDeck(format!(
            "decks of {n}-element posets cannot be inverted"
        )));
    }
    d.check_full()?;
    // Each comparable pair of P survives on exactly n - 2 cards.
    let pair_total: usize = d.iter().map(|(c, k)| k * c.comparable_pairs()).sum();
    let target_pairs = if n >= 3 {
        if pair_total % (n - 2) != 0 {
            return Err(Error::InconsistentDeck(
                "comparable-pair total is not divisible by n - 2".into(),
            ));
        }
        Some(pair_total / (n - 2))
    } else {
        None
    };
    let (least, _) = d.iter().next().expect("full deck is nonempty");
    let base = least.to_poset();
    let base_pairs = base.comparable_pairs();
    let mut seen = BTreeSet::new();
    let mut out = BTreeSet::new();
    for_each_extension(&base, |down, up| {
        if let Some(t) = target_pairs {
            if base_pairs + down.len() + up.len() != t {
                return;
            }
        }
        let e = extend_with(&base, down, up);
        let c = canonical_cert(&e);
        if !seen.insert(c) {
            return;
        }
        if deck(&e) == *d {
            out.insert(c);
        }
    });
    if out.is_empty() {
        return Err(Error::InconsistentDeck("no poset has this deck".into()));
    }
    Ok(out.into_iter().collect())
}

/// Partition of `universe` (all of size `n`) into classes of equal decks.
/// Classes are listed by their first member; members keep universe order.
pub fn deck_groups(n: usize, universe: &[Poset]) -> Vec<Vec<usize>> {
    debug_assert!(universe.iter().all(|p| p.n() == n));
    let decks: Vec<Deck> = universe.par_iter().map(deck).collect();
    let mut by_deck: BTreeMap<&Deck, usize> = BTreeMap::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, d) in decks.iter().enumerate() {
        match by_deck.get(d) {
            Some(&g) => groups[g].push(i),
            None => {
                by_deck.insert(d, groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
}
