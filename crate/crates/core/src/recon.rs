//! Deck-only identification procedures: card classification by rank, the
//! NTMA rank decks, the extremal deck, filter shifting, dismantlability
//! recognition and the special-class reconstructors.
//!
//! Facts that are imported rather than derived (the number of minimal and
//! maximal elements, `P \ min(P)`, NTMA cards, block types, ideal, filter and
//! neighbourhood decks, reconstructibility of linear sums) are served by
//! [`DeckOracle`], which inverts the deck and insists that every witness
//! yields the same value.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::canonical::{
    automorphisms, canonical_cert, count_subposets, find_isomorphism, isomorphisms, CanonicalCert,
};
use crate::deck::{
    deck, filter_deck, ideal_deck, invert_deck, kelly_count_from_deck, neighborhood_deck, pi_deck,
    CertMultiset, Deck, PointProperty,
};
use crate::decomposition::{is_order_autonomous, maximal_autonomous_partition, ntma_points};
use crate::elemset::ElemSet;
use crate::error::{Error, Result};
use crate::extend::{down_closed_sets, extend_with, for_each_extension};
use crate::poset::Poset;
use crate::pseudo_similar::{find_minmax_ps_pairs, has_minmax_ps_pair};

// ---------------------------------------------------------------------------
// Oracle

/// Deck together with every poset having that deck.
#[derive(Clone, Debug)]
pub struct DeckOracle {
    deck: Deck,
    witnesses: Vec<Poset>,
}

impl DeckOracle {
    pub fn new(d: &Deck) -> Result<Self> {
        Ok(DeckOracle {
            deck: d.clone(),
            witnesses: invert_deck(d)?,
        })
    }

    pub fn deck(&self) -> &Deck {
        &self.deck
    }

    pub fn witnesses(&self) -> &[Poset] {
        &self.witnesses
    }

    /// The value of `f` shared by all witnesses.
    pub fn parameter<T: PartialEq>(&self, name: &str, f: impl Fn(&Poset) -> T) -> Result<T> {
        let mut it = self.witnesses.iter();
        let first = f(it.next().expect("oracle has at least one witness"));
        for w in it {
            if f(w) != first {
                return Err(Error::AmbiguousParameter { name: name.into() });
            }
        }
        Ok(first)
    }

    /// The parent poset, when the deck determines it.
    pub fn poset(&self) -> Result<Poset> {
        match self.witnesses.as_slice() {
            [p] => Ok(*p),
            _ => Err(Error::AmbiguousParameter {
                name: "isomorphism type".into(),
            }),
        }
    }

    /// Oracle for the dual deck.
    pub fn dual(&self) -> DeckOracle {
        DeckOracle {
            deck: dual_deck(&self.deck),
            witnesses: self
                .witnesses
                .iter()
                .map(|w| canonical_cert(&w.dual()).to_poset())
                .collect(),
        }
    }
}

/// `f` evaluated on every poset with deck `d`, required to agree.
pub fn oracle_parameter<T: PartialEq>(d: &Deck, name: &str, f: impl Fn(&Poset) -> T) -> Result<T> {
    DeckOracle::new(d)?.parameter(name, f)
}

/// Deck of the dual poset: every card dualised.
pub fn dual_deck(d: &Deck) -> Deck {
    let mut out = Deck::new(d.n());
    for (c, k) in d.iter() {
        out.add(canonical_cert(&c.to_poset().dual()), k);
    }
    out
}

// ---------------------------------------------------------------------------
// Report types

/// Classification label attached to a group of cards.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum CardTag {
    Minimal,
    Maximal,
    Extremal,
    Nonextremal(usize),
    Ntma,
    Ambiguous,
}

impl std::fmt::Display for CardTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CardTag::Minimal => write!(f, "minimal"),
            CardTag::Maximal => write!(f, "maximal"),
            CardTag::Extremal => write!(f, "extremal"),
            CardTag::Nonextremal(r) => write!(f, "nonextremal(rank {r})"),
            CardTag::Ntma => write!(f, "ntma"),
            CardTag::Ambiguous => write!(f, "ambiguous"),
        }
    }
}

/// `multiplicity` copies of one card type sharing the same tags.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TaggedCard {
    pub cert: CanonicalCert,
    pub multiplicity: usize,
    pub tags: BTreeSet<CardTag>,
    /// Which step of the procedure justified the tags.
    pub method: String,
}

impl TaggedCard {
    fn new(cert: CanonicalCert, multiplicity: usize, tags: &[CardTag], method: &str) -> Self {
        TaggedCard {
            cert,
            multiplicity,
            tags: tags.iter().copied().collect(),
            method: method.into(),
        }
    }

    pub fn is_nonextremal(&self) -> Option<usize> {
        self.tags.iter().find_map(|t| match t {
            CardTag::Nonextremal(r) => Some(*r),
            _ => None,
        })
    }

    pub fn is_ntma(&self) -> bool {
        self.tags.contains(&CardTag::Ntma)
    }
}

/// Result of the deck-only procedures on one deck.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReconReport {
    pub input_deck: Deck,
    pub card_tags: Vec<TaggedCard>,
    /// `N^r`: cards of nonextremal points of rank `r > 0`.
    pub rank_decks: BTreeMap<usize, Deck>,
    /// NTMA cards by the rank of the removed point.
    pub ntma_rank_decks: BTreeMap<usize, Deck>,
    pub extremal_deck: Deck,
    pub reconstructed: Option<CanonicalCert>,
    pub method: Vec<String>,
}

impl ReconReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let n = self.input_deck.n();
        let _ = writeln!(s, "report n={n}");
        for t in &self.card_tags {
            let tags: Vec<String> = t.tags.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(
                s,
                "card {} x{} tags={} via {}",
                t.cert,
                t.multiplicity,
                tags.join(","),
                t.method
            );
        }
        for (r, d) in &self.rank_decks {
            let _ = writeln!(s, "rank-deck r={r} {}", deck_line(d));
        }
        for (r, d) in &self.ntma_rank_decks {
            let _ = writeln!(s, "ntma-rank-deck r={r} {}", deck_line(d));
        }
        let _ = writeln!(s, "extremal-deck {}", deck_line(&self.extremal_deck));
        match &self.reconstructed {
            Some(c) => {
                let _ = writeln!(s, "reconstructed {c}");
            }
            None => {
                let _ = writeln!(s, "reconstructed none");
            }
        }
        for m in &self.method {
            let _ = writeln!(s, "method {m}");
        }
        s
    }
}

fn deck_line(d: &Deck) -> String {
    let parts: Vec<String> = d.iter().map(|(c, k)| format!("{k}x{c}")).collect();
    format!("[{}]", parts.join(" "))
}

// ---------------------------------------------------------------------------
// Small helpers

/// Number of chains with `k` elements.
pub fn chain_count(p: &Poset, k: usize) -> usize {
    let n = p.n();
    if k == 0 {
        return 1;
    }
    if k > n {
        return 0;
    }
    // ending[x]: chains with the current number of elements whose top is x
    let mut ending = vec![1usize; n];
    let order = topological_order(p);
    for _ in 1..k {
        let mut next = vec![0usize; n];
        for &x in &order {
            next[x] = p.below(x).iter().map(|y| ending[y]).sum();
        }
        ending = next;
    }
    ending.iter().sum()
}

fn topological_order(p: &Poset) -> Vec<usize> {
    let mut order: Vec<usize> = (0..p.n()).collect();
    order.sort_by_key(|&x| p.below(x).len());
    order
}

/// `k`-element chains of the parent, from its deck alone.
fn kelly_chains(d: &Deck, k: usize) -> usize {
    let n = d.n();
    debug_assert!(k < n);
    let total: usize = d.iter().map(|(c, m)| m * chain_count(&c.to_poset(), k)).sum();
    total / (n - k)
}

fn is_chain(p: &Poset) -> bool {
    p.comparable_pairs() * 2 == p.n() * p.n().saturating_sub(1)
}

/// Position of `x` inside `p.subposet(s)`.
pub(crate) fn compact_index(s: ElemSet, x: usize) -> usize {
    (s.bits() & ((1u16 << x) - 1)).count_ones() as usize
}

pub(crate) fn expand(s: ElemSet, inner: ElemSet) -> ElemSet {
    let members = s.to_vec();
    inner.iter().map(|i| members[i]).collect()
}

fn cert_multiset_contains(big: &CertMultiset, small: &CertMultiset) -> bool {
    small.iter().all(|(c, k)| big.get(c).copied().unwrap_or(0) >= *k)
}

fn strict_upper(p: &Poset, s: ElemSet) -> ElemSet {
    s.iter().fold(ElemSet::EMPTY, |acc, a| acc | p.above(a)) - s
}

fn strict_lower(p: &Poset, s: ElemSet) -> ElemSet {
    s.iter().fold(ElemSet::EMPTY, |acc, a| acc | p.below(a)) - s
}

/// Points strictly below every member of `s`.
fn common_lower(p: &Poset, s: ElemSet) -> ElemSet {
    s.iter().fold(p.ground(), |acc, a| acc & p.below(a))
}

/// Poset on `0..n` generated by the strict relation pairs.
fn poset_from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Poset> {
    Poset::from_cover_pairs(n, pairs)
}

// ---------------------------------------------------------------------------
// Rank of the removed point

/// One orientation (the deck or its dual) of the data the rank lemma uses.
struct Side {
    deck: Deck,
    oracle: DeckOracle,
    n_min: usize,
    /// `Q = P \ min(P)`.
    q: Poset,
    q_ranks: Vec<usize>,
    /// `level_sums[j]` = sum of `|↓z|` over the points `z` of rank `j`.
    level_sums: Vec<usize>,
}

impl Side {
    fn new(oracle: DeckOracle) -> Result<Self> {
        let n_min = oracle.parameter("minimal count", |p| p.minimal().len())?;
        let q = oracle
            .parameter("P minus its minimal elements", |p| {
                canonical_cert(&p.subposet(p.ground() - p.minimal()))
            })?
            .to_poset();
        let ideals = oracle.parameter("ideal deck", ideal_deck)?;
        let mut level_sums = vec![0usize; oracle.deck().n()];
        for (c, k) in &ideals {
            let ideal = c.to_poset();
            level_sums[ideal.height()] += k * ideal.n();
        }
        Ok(Side {
            deck: oracle.deck().clone(),
            q_ranks: q.ranks(),
            q,
            n_min,
            level_sums,
            oracle,
        })
    }
}

fn card_level_sums(x: &Poset) -> Vec<usize> {
    let ranks = x.ranks();
    let mut out = vec![0usize; x.n() + 1];
    for z in 0..x.n() {
        out[ranks[z]] += x.down_set(z).len();
    }
    out
}

/// Possible nonzero ranks of the removed point: `rank(x) ∈ {0} ∪ ranks`.
/// An empty set means the point is minimal.
#[derive(Clone, Debug, PartialEq, Eq)]
struct RankBound {
    ranks: BTreeSet<usize>,
    how: &'static str,
}

impl RankBound {
    fn new(ranks: impl IntoIterator<Item = usize>, how: &'static str) -> Self {
        RankBound {
            ranks: ranks.into_iter().collect(),
            how,
        }
    }
}

/// Nonzero rank candidates for a non-NTMA card `x_card` that has as many
/// minimal elements as the parent.
fn rank_up_to_zero(side: &Side, x_card: &Poset) -> Result<RankBound> {
    let q = &side.q;
    let u = x_card.subposet(x_card.ground() - x_card.minimal());
    let ucert = canonical_cert(&u);
    let cands: Vec<usize> = (0..q.n())
        .filter(|&i| canonical_cert(&q.delete(i)) == ucert)
        .collect();
    if cands.is_empty() {
        return Err(Error::procedure(
            "rank lemma",
            "upper part of the card is not a card of P \\ min(P)",
        ));
    }
    let cand_ranks: BTreeSet<usize> = cands.iter().map(|&i| side.q_ranks[i] + 1).collect();
    if cand_ranks.len() == 1 {
        return Ok(RankBound::new(cand_ranks, "unique Q-rank"));
    }
    let refined = match ranging_chain_rank(side, x_card, &cands)? {
        Some(r) => Some(RankBound::new(r, "autonomous chain level sums")),
        None => ps_component_rank(side, x_card, &cands)?,
    };
    Ok(match refined {
        Some(b) => RankBound::new(b.ranks.intersection(&cand_ranks).copied(), b.how),
        None => RankBound::new(cand_ranks, "all candidate Q-ranks"),
    })
}

/// Case of a `Q`-autonomous chain whose bottom is a candidate.
fn ranging_chain_rank(
    side: &Side,
    x_card: &Poset,
    cands: &[usize],
) -> Result<Option<BTreeSet<usize>>> {
    let q = &side.q;
    let n = q.n();
    let mut tops: BTreeSet<usize> = BTreeSet::new();
    for &c in cands {
        let above = q.above(c);
        // chains with bottom c: c plus a chain inside ↑c
        let mut best: Option<(usize, usize)> = None;
        for bits in 1u32..(1 << n) {
            let s = ElemSet::from_bits(bits as u16);
            if !s.is_subset(above) {
                continue;
            }
            let chain = s.with(c);
            if !is_chain(&q.subposet(chain)) || !is_order_autonomous(q, chain)? {
                continue;
            }
            let top = s.iter().max_by_key(|&y| q.below(y).len()).unwrap();
            if best.map_or(true, |(size, _)| size < chain.len()) {
                best = Some((chain.len(), top));
            }
        }
        if let Some((_, top)) = best {
            tops.insert(side.q_ranks[top]);
        }
    }
    if tops.is_empty() {
        return Ok(None);
    }
    let xs = card_level_sums(x_card);
    let mut rs = BTreeSet::new();
    for &t in &tops {
        let mut e: isize = -1;
        for j in 0..=t {
            let px = side.level_sums.get(j).copied().unwrap_or(0);
            let cx = xs.get(j).copied().unwrap_or(0);
            if px != cx {
                break;
            }
            e = j as isize;
        }
        rs.insert(((e + 1) as usize).max(1));
    }
    Ok(Some(rs))
}

/// Case of a connected `Q`-autonomous non-chain `A` with a minmax pair whose
/// lower point is a candidate.
fn ps_component_rank(side: &Side, x_card: &Poset, cands: &[usize]) -> Result<Option<RankBound>> {
    let q = &side.q;
    let n = q.n();
    let mut blocks: Vec<(ElemSet, usize, usize)> = Vec::new();
    for bits in 1u32..(1 << n) {
        let a = ElemSet::from_bits(bits as u16);
        if a.len() < 4 {
            continue;
        }
        let ap = q.subposet(a);
        if !ap.is_connected() || is_chain(&ap) || !is_order_autonomous(q, a)? {
            continue;
        }
        let members = a.to_vec();
        for (l, h, _) in find_minmax_ps_pairs(&ap) {
            let (l, h) = (members[l], members[h]);
            if cands.contains(&l) {
                blocks.push((a, l, h));
            }
        }
    }
    let Some(max_size) = blocks.iter().map(|b| b.0.len()).max() else {
        return Ok(None);
    };
    blocks.retain(|b| b.0.len() == max_size);
    let mut ranks = BTreeSet::new();
    let mut how = "neighbourhood copy counting";
    for &(a, l, h) in &blocks {
        let w = q.neighborhood(a)?;
        if w == q.ground() {
            // Q = B ⊕ A ⊕ B'; the parent is reconstructible, so read the rank off it.
            let p = side.oracle.poset()?;
            let xc = canonical_cert(x_card);
            let pr = p.ranks();
            ranks.extend(
                (0..p.n()).filter(|&y| pr[y] > 0 && canonical_cert(&p.delete(y)) == xc).map(|y| pr[y]),
            );
            how = "linear-sum case, reconstructed parent";
            continue;
        }
        ranks.extend(neighbourhood_copy_rank(side, x_card, a, l, h, w)?);
    }
    Ok(Some(RankBound::new(ranks, how)))
}

/// Copy counting with the largest `V` whose upper part is `N_Q(A)`.
///
/// For `V ≅ N(A)`: removing `l` loses the copy `N(A) \ h`, removing `h` loses
/// `N(A) \ l`, and isomorphic `V \ l`, `V \ h` force a minimal point.
fn neighbourhood_copy_rank(
    side: &Side,
    x_card: &Poset,
    a: ElemSet,
    l: usize,
    h: usize,
    w: ElemSet,
) -> Result<BTreeSet<usize>> {
    let q = &side.q;
    let n = side.deck.n();
    let wp = q.subposet(w);
    let a_w = ElemSet::from_elems(a.iter().map(|x| compact_index(w, x)));
    let (l_w, h_w) = (compact_index(w, l), compact_index(w, h));
    let (rank_l, rank_h) = (side.q_ranks[l] + 1, side.q_ranks[h] + 1);
    let full = wp.ground();
    let up_sets: Vec<ElemSet> = down_closed_sets(&wp)
        .into_iter()
        .map(|d| full - d)
        .filter(|u| u.intersects(a_w))
        .collect();
    let min_w = wp.minimal();
    let lost = |v: &Poset| -> Result<usize> {
        Ok(kelly_count_from_deck(v, &side.deck)? - count_subposets(v, x_card)?)
    };
    for k in (1..n.saturating_sub(w.len())).rev() {
        let mut ranks = BTreeSet::new();
        let mut found = false;
        let mut idx = vec![0usize; k];
        'multisets: loop {
            let cover = idx.iter().fold(ElemSet::EMPTY, |acc, &i| acc | up_sets[i]);
            if min_w.is_subset(cover) {
                let mut v = wp;
                for &i in &idx {
                    v = extend_with(&v, ElemSet::EMPTY, up_sets[i]);
                }
                if lost(&v)? > 0 {
                    found = true;
                    let vl = v.delete(l_w);
                    let vh = v.delete(h_w);
                    if canonical_cert(&vl) != canonical_cert(&vh) {
                        if lost(&vh)? > 0 {
                            ranks.insert(rank_l);
                        }
                        if lost(&vl)? > 0 {
                            ranks.insert(rank_h);
                        }
                    }
                }
            }
            // next nondecreasing index tuple
            let mut i = k;
            loop {
                if i == 0 {
                    break 'multisets;
                }
                i -= 1;
                if idx[i] + 1 < up_sets.len() {
                    idx[i] += 1;
                    for j in i + 1..k {
                        idx[j] = idx[i];
                    }
                    break;
                }
            }
        }
        if found {
            return Ok(ranks);
        }
    }
    Ok(BTreeSet::new())
}

/// Classification of a non-NTMA card type.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Placement {
    Minimal,
    Maximal,
    /// Minimal or maximal, undecided.
    Extremal,
    Nonextremal(usize),
}

struct Classifier {
    n: usize,
    n_max: usize,
    parent_is_chain: bool,
    up: Side,
    down: Side,
    /// `P \ max(P)`.
    q_dual_card: Poset,
    filters: CertMultiset,
    ideals: CertMultiset,
    parent_pairs: usize,
}

impl Classifier {
    fn new(oracle: &DeckOracle) -> Result<Self> {
        let d = oracle.deck();
        let n = d.n();
        let parent_is_chain = d
            .iter()
            .all(|(c, _)| c.comparable_pairs() * 2 == (n - 1) * (n - 2));
        let up = Side::new(oracle.clone())?;
        let down = Side::new(oracle.dual())?;
        let q_dual_card = down.q.dual();
        let filters = oracle.parameter("filter deck", filter_deck)?;
        let ideals = oracle.parameter("ideal deck", ideal_deck)?;
        Ok(Classifier {
            parent_pairs: kelly_count_from_deck(&Poset::chain(2), d)?,
            filters,
            ideals,
            n,
            n_max: down.n_min,
            parent_is_chain,
            up,
            down,
            q_dual_card,
        })
    }

    /// Length of the longest chain through the removed point.
    fn chain_length(&self, x: &Poset) -> Result<usize> {
        for c in (1..self.n).rev() {
            let k = c + 1;
            let in_p = if k == self.n {
                self.parent_is_chain as usize
            } else {
                kelly_chains(&self.up.deck, k)
            };
            if in_p > chain_count(x, k) {
                return Ok(c);
            }
        }
        Err(Error::procedure(
            "card classification",
            "no chain length separates the card from the parent",
        ))
    }

    fn classify(&self, x: &Poset) -> Result<(Placement, String)> {
        if x.maximal().len() != self.n_max {
            return Ok((Placement::Maximal, "maximal count".into()));
        }
        if x.minimal().len() != self.up.n_min {
            return Ok((Placement::Minimal, "minimal count".into()));
        }
        let c = self.chain_length(x)?;
        let r = rank_up_to_zero(&self.up, x)?;
        let d = rank_up_to_zero(&self.down, &x.dual())?;
        let mut combos = BTreeSet::new();
        for &a in std::iter::once(&0).chain(&r.ranks) {
            for &b in std::iter::once(&0).chain(&d.ranks) {
                if a + b == c {
                    combos.insert((a, b));
                }
            }
        }
        let mut note = format!("c={c} r={:?} ({}) d={:?} ({})", r.ranks, r.how, d.ranks, d.how);
        // a minimal point leaves every other filter intact, a maximal one every ideal
        if !cert_multiset_contains(&self.filters, &filter_deck(x)) {
            combos.retain(|&(a, _)| a > 0);
            note.push_str(", filters rule out minimal");
        }
        if !cert_multiset_contains(&self.ideals, &ideal_deck(x)) {
            combos.retain(|&(_, b)| b > 0);
            note.push_str(", ideals rule out maximal");
        }
        let undecided = |combos: &BTreeSet<(usize, usize)>| {
            combos.len() > 1 && combos.iter().any(|&(a, b)| a > 0 && b > 0)
        };
        if undecided(&combos) {
            let realised = self.realised_splits(x)?;
            combos.retain(|c| realised.contains(c));
            note.push_str(", extension check");
        }
        let nonext: Vec<(usize, usize)> =
            combos.iter().copied().filter(|&(a, b)| a > 0 && b > 0).collect();
        if combos.is_empty() {
            return Err(Error::procedure(
                "card classification",
                format!("no rank split is consistent with {note}"),
            ));
        }
        if nonext.is_empty() {
            let placement = if combos.iter().all(|&(a, _)| a == 0) {
                Placement::Minimal
            } else if combos.iter().all(|&(_, b)| b == 0) {
                Placement::Maximal
            } else {
                self.extremal_side(x)?
            };
            return Ok((placement, note));
        }
        if combos.len() == 1 {
            return Ok((Placement::Nonextremal(nonext[0].0), note));
        }
        Err(Error::procedure(
            "card classification",
            format!("nonextremality undecided for {note}"),
        ))
    }

    /// `(rank, dual rank)` of the new point over the one-point extensions of
    /// `x` that have the parent's deck.
    fn realised_splits(&self, x: &Poset) -> Result<BTreeSet<(usize, usize)>> {
        let need = self.parent_pairs.checked_sub(x.comparable_pairs()).ok_or_else(|| {
            Error::procedure("card classification", "card has more comparabilities than the parent")
        })?;
        let mut out = BTreeSet::new();
        for_each_extension(x, |down, up| {
            if down.len() + up.len() != need {
                return;
            }
            let p = extend_with(x, down, up);
            if deck(&p) == self.up.deck {
                let prof = p.rank_profile();
                let y = p.n() - 1;
                out.insert((prof.rank[y], prof.dual_rank[y]));
            }
        });
        Ok(out)
    }

    /// Minimal versus maximal for an extremal card with unchanged extremal counts.
    fn extremal_side(&self, x: &Poset) -> Result<Placement> {
        let u = canonical_cert(&x.subposet(x.ground() - x.minimal()));
        let dd = canonical_cert(&x.subposet(x.ground() - x.maximal()));
        let q = &self.up.q;
        let qd = &self.q_dual_card;
        let hits = |p: &Poset, set: ElemSet, target: CanonicalCert| {
            set.iter().any(|m| canonical_cert(&p.delete(m)) == target)
        };
        let min_ok = hits(q, q.minimal(), u) && hits(qd, qd.minimal(), dd);
        let max_ok = hits(q, q.maximal(), u) && hits(qd, qd.maximal(), dd);
        match (min_ok, max_ok) {
            (true, false) => Ok(Placement::Minimal),
            (false, true) => Ok(Placement::Maximal),
            (true, true) => Ok(Placement::Extremal),
            (false, false) => Err(Error::procedure(
                "card classification",
                "extremal card fits neither a minimal nor a maximal removal",
            )),
        }
    }
}

// ---------------------------------------------------------------------------
// NTMA rank decks

/// NTMA cards split by rank and extremality: `(cert, count, rank, placement)`.
type NtmaSplit = Vec<(CanonicalCert, usize, usize, Placement)>;

fn block_types(p: &Poset, xc: CanonicalCert) -> BTreeSet<(CanonicalCert, CanonicalCert)> {
    let Ok(dec) = maximal_autonomous_partition(p) else {
        return BTreeSet::new();
    };
    let ntma = ntma_points(p);
    let mut out = BTreeSet::new();
    for x in ntma {
        if canonical_cert(&p.delete(x)) != xc {
            continue;
        }
        let block = dec.blocks[dec.block_of[x]];
        let b = p.subposet(block);
        let bx = b.delete(compact_index(block, x));
        out.insert((canonical_cert(&b), canonical_cert(&bx)));
    }
    out
}

/// Images on the canonical card of `B \ x`, over the removed NTMA points
/// `x` with card `xc` and over the automorphisms of the card.
fn block_orbit(p: &Poset, xc: CanonicalCert) -> BTreeSet<ElemSet> {
    let Ok(dec) = maximal_autonomous_partition(p) else {
        return BTreeSet::new();
    };
    let canon = xc.to_poset();
    let auts = automorphisms(&canon);
    let mut out = BTreeSet::new();
    for x in ntma_points(p) {
        let card = p.delete(x);
        if canonical_cert(&card) != xc {
            continue;
        }
        let iso = find_isomorphism(&card, &canon).expect("card matches its certificate");
        let rest = dec.blocks[dec.block_of[x]].without(x);
        let on_card: ElemSet = rest.iter().map(|y| Poset::index_after_delete(x, y)).collect();
        let image = iso.image_of(on_card);
        out.extend(auts.iter().map(|a| a.image_of(image)));
    }
    out
}

/// Apportionment for three or more NTMA points.
fn ntma_split_many(oracle: &DeckOracle, ntma_deck: &Deck) -> Result<NtmaSplit> {
    let d = oracle.deck();
    let n = d.n();
    let parent_cert = oracle.parameter("isomorphism type", canonical_cert)?;
    let mut out = Vec::new();
    for (xc, t) in ntma_deck.iter() {
        let types = oracle.parameter("NTMA block type", |p| block_types(p, *xc))?;
        let [(bc, bxc)] = <[_; 1]>::try_from(types.into_iter().collect::<Vec<_>>()).map_err(|v| {
            Error::procedure("NTMA rank decks", format!("{} block types for one card", v.len()))
        })?;
        let b = bc.to_poset();
        let b_ranks = b.ranks();
        let b_max = b.maximal();
        let mut m: BTreeMap<(usize, bool), usize> = BTreeMap::new();
        for (y, &r) in b_ranks.iter().enumerate() {
            if canonical_cert(&b.delete(y)) == bxc {
                *m.entry((r, b_max.contains(y))).or_insert(0) += 1;
            }
        }
        let total: usize = m.values().sum();
        let x = xc.to_poset();
        let orbit = oracle.parameter("block orbit on the card", |p| block_orbit(p, *xc))?;
        let mut placements: BTreeSet<(isize, bool)> = BTreeSet::new();
        for &s in &orbit {
            let lower = strict_lower(&x, s);
            let upper = strict_upper(&x, s);
            let lp = x.subposet(lower);
            let up = x.subposet(upper);
            let w = lp.linear_sum(&b)?.linear_sum(&up)?;
            let more = if w.n() < n {
                kelly_count_from_deck(&w, d)? > count_subposets(&w, &x)?
            } else {
                w.n() == n && canonical_cert(&w) == parent_cert
            };
            if more {
                let h = if lower.is_empty() { -1 } else { lp.height() as isize };
                placements.insert((h, upper.is_empty()));
            }
        }
        let [(h, top)] = <[_; 1]>::try_from(placements.into_iter().collect::<Vec<_>>()).map_err(|v| {
            Error::procedure(
                "NTMA rank decks",
                format!("{} placements of the block neighbourhood", v.len()),
            )
        })?;
        for ((s, mx), ms) in m {
            if (ms * t) % total != 0 {
                return Err(Error::procedure("NTMA rank decks", "copies are not integral"));
            }
            let copies = ms * t / total;
            let rank = (s as isize + h + 1) as usize;
            let placement = if mx && top {
                Placement::Maximal
            } else if rank == 0 {
                Placement::Minimal
            } else {
                Placement::Nonextremal(rank)
            };
            out.push((*xc, copies, rank, placement));
        }
    }
    Ok(out)
}

/// Apportionment for exactly two NTMA points.
fn ntma_split_two(
    oracle: &DeckOracle,
    ntma_deck: &Deck,
    nonntma_ranks: &BTreeMap<usize, usize>,
) -> Result<NtmaSplit> {
    let [(xc, 2)] = <[_; 1]>::try_from(ntma_deck.iter().map(|(c, k)| (*c, k)).collect::<Vec<_>>())
        .map_err(|_| Error::procedure("NTMA rank decks", "two NTMA cards of different types"))?
    else {
        return Err(Error::procedure("NTMA rank decks", "expected two NTMA cards"));
    };
    let counts = oracle.parameter("nonextremal points by rank", |p| {
        let ranks = p.ranks();
        let ext = p.extremal_sets().extremal;
        let mut m: BTreeMap<usize, usize> = BTreeMap::new();
        for x in p.ground() - ext {
            *m.entry(ranks[x]).or_insert(0) += 1;
        }
        m
    })?;
    let mut out = Vec::new();
    let mut used = 0;
    for (&r, &nr) in &counts {
        let ir = nonntma_ranks.get(&r).copied().unwrap_or(0);
        let extra = nr.checked_sub(ir).filter(|&e| e <= 2).ok_or_else(|| {
            Error::procedure("NTMA rank decks", format!("rank {r}: {nr} points but {ir} cards"))
        })?;
        if extra > 0 {
            out.push((xc, extra, r, Placement::Nonextremal(r)));
            used += extra;
        }
    }
    if used > 2 {
        return Err(Error::procedure("NTMA rank decks", "more than two NTMA cards placed"));
    }
    let left = 2 - used;
    if left == 0 {
        return Ok(out);
    }
    let x = xc.to_poset();
    let block = oracle.parameter("NTMA block", |p| canonical_cert(&p.subposet(ntma_points(p))))?;
    let n_min = oracle.parameter("minimal count", |p| p.minimal().len())?;
    let n_max = oracle.parameter("maximal count", |p| p.maximal().len())?;
    let maximal = if block.comparable_pairs() == 0 {
        if x.minimal().len() < n_min {
            false
        } else if x.maximal().len() < n_max {
            true
        } else {
            return Err(Error::procedure(
                "NTMA rank decks",
                "antichain block card keeps both extremal counts",
            ));
        }
    } else {
        let max_ulc = oracle.parameter("maximal cards with a unique lower cover", |p| {
            unique_cover_deck(p, false)
        })?;
        let min_uuc = oracle.parameter("minimal cards with a unique upper cover", |p| {
            unique_cover_deck(p, true)
        })?;
        match (max_ulc.multiplicity(&xc) > 0, min_uuc.multiplicity(&xc) > 0) {
            (true, false) => true,
            (false, true) => false,
            _ => {
                return Err(Error::procedure(
                    "NTMA rank decks",
                    "chain block card is in both or neither unique-cover deck",
                ))
            }
        }
    };
    if maximal {
        let mut ideals = oracle.parameter("ideal deck", ideal_deck)?;
        for (c, k) in ideal_deck(&x) {
            let e = ideals.entry(c).or_insert(0);
            if *e < k {
                return Err(Error::procedure("NTMA rank decks", "card ideal missing from parent"));
            }
            *e -= k;
        }
        ideals.retain(|_, k| *k > 0);
        let missing: Vec<_> = ideals.iter().collect();
        let [(c, 1)] = missing.as_slice() else {
            return Err(Error::procedure("NTMA rank decks", "missing ideal is not unique"));
        };
        out.push((xc, left, c.to_poset().height(), Placement::Maximal));
    } else {
        out.push((xc, left, 0, Placement::Minimal));
    }
    Ok(out)
}

/// Cards of maximal points with a unique lower cover (or, with `dual`, of
/// minimal points with a unique upper cover).
pub fn unique_cover_deck(p: &Poset, dual: bool) -> Deck {
    let pts: Vec<usize> = if dual {
        p.minimal().iter().filter(|&x| p.upper_covers(x).len() == 1).collect()
    } else {
        p.maximal().iter().filter(|&x| p.lower_covers(x).len() == 1).collect()
    };
    Deck::from_cards(p.n(), pts.into_iter().map(|x| canonical_cert(&p.delete(x))))
}

// ---------------------------------------------------------------------------
// Rank decks

fn check_preconditions(oracle: &DeckOracle) -> Result<()> {
    let n = oracle.deck().n();
    if n < 4 {
        return Err(Error::Size(format!("rank decks need at least 4 elements, got {n}")));
    }
    if !oracle.parameter("connectedness", |p| p.is_connected())? {
        return Err(Error::NotConnected);
    }
    Ok(())
}

fn placement_tag(p: Placement) -> CardTag {
    match p {
        Placement::Minimal => CardTag::Minimal,
        Placement::Maximal => CardTag::Maximal,
        Placement::Extremal => CardTag::Extremal,
        Placement::Nonextremal(r) => CardTag::Nonextremal(r),
    }
}

fn tags_for(p: Placement, ntma: bool) -> Vec<CardTag> {
    let mut t = vec![placement_tag(p)];
    match p {
        Placement::Minimal | Placement::Maximal => t.push(CardTag::Extremal),
        Placement::Extremal => t.push(CardTag::Ambiguous),
        Placement::Nonextremal(_) => {}
    }
    if ntma {
        t.push(CardTag::Ntma);
    }
    t
}

/// Tags read off the labelled parent, used when the parent is a linear sum.
fn labelled_tags(p: &Poset) -> Vec<(CanonicalCert, BTreeSet<CardTag>)> {
    let ranks = p.ranks();
    let e = p.extremal_sets();
    let ntma = ntma_points(p);
    let mut out: Vec<(CanonicalCert, BTreeSet<CardTag>)> = (0..p.n())
        .map(|x| {
            let mut t = BTreeSet::new();
            if e.min.contains(x) {
                t.insert(CardTag::Minimal);
            }
            if e.max.contains(x) {
                t.insert(CardTag::Maximal);
            }
            if e.extremal.contains(x) {
                t.insert(CardTag::Extremal);
            } else {
                t.insert(CardTag::Nonextremal(ranks[x]));
            }
            if ntma.contains(x) {
                t.insert(CardTag::Ntma);
            }
            (canonical_cert(&p.delete(x)), t)
        })
        .collect();
    out.sort();
    out
}

/// Card tags, rank decks, NTMA rank decks and the extremal deck of a
/// connected poset with at least four elements, from its deck.
pub fn rank_decks_report(d: &Deck) -> Result<ReconReport> {
    let oracle = DeckOracle::new(d)?;
    rank_decks_with(&oracle)
}

fn rank_decks_with(oracle: &DeckOracle) -> Result<ReconReport> {
    check_preconditions(oracle)?;
    let d = oracle.deck();
    let n = d.n();
    let mut method = Vec::new();
    let mut card_tags = Vec::new();
    let mut rank_decks: BTreeMap<usize, Deck> = BTreeMap::new();
    let mut ntma_rank_decks: BTreeMap<usize, Deck> = BTreeMap::new();

    if !oracle.parameter("coconnectedness", |p| p.is_coconnected())? {
        method.push("linear sum: decks read from the reconstructed parent (oracle)".into());
        let tags = oracle.parameter("labelled tags", labelled_tags)?;
        let mut grouped: BTreeMap<(CanonicalCert, BTreeSet<CardTag>), usize> = BTreeMap::new();
        for t in tags {
            *grouped.entry(t).or_insert(0) += 1;
        }
        for ((cert, tags), k) in grouped {
            let mut tc = TaggedCard::new(cert, k, &[], "oracle (linear sum)");
            tc.tags = tags;
            card_tags.push(tc);
        }
        let p = oracle.poset()?;
        for r in 1..n {
            let dr = pi_deck(&p, PointProperty::NonextremalRank(r));
            if !dr.is_empty() {
                rank_decks.insert(r, dr);
            }
        }
        for r in 0..n {
            let dr = pi_deck(&p, PointProperty::NtmaRank(r));
            if !dr.is_empty() {
                ntma_rank_decks.insert(r, dr);
            }
        }
        return Ok(ReconReport {
            input_deck: d.clone(),
            card_tags,
            rank_decks,
            ntma_rank_decks,
            extremal_deck: pi_deck(&p, PointProperty::Extremal),
            reconstructed: None,
            method,
        });
    }

    let ntma_deck = oracle.parameter("NTMA deck", |p| pi_deck(p, PointProperty::Ntma))?;
    let classifier = Classifier::new(oracle)?;
    let mut nonntma_ranks: BTreeMap<usize, usize> = BTreeMap::new();
    for (c, k) in d.iter() {
        let plain = k - ntma_deck.multiplicity(c);
        if plain == 0 {
            continue;
        }
        let (placement, note) = classifier.classify(&c.to_poset())?;
        if let Placement::Nonextremal(r) = placement {
            rank_decks.entry(r).or_insert_with(|| Deck::new(n)).add(*c, plain);
            *nonntma_ranks.entry(r).or_insert(0) += plain;
        }
        card_tags.push(TaggedCard::new(*c, plain, &tags_for(placement, false), &note));
    }
    method.push("non-NTMA cards: chain length, rank and dual rank from the deck".into());

    let k = ntma_deck.total();
    let split = match k {
        0 => Vec::new(),
        1 => return Err(Error::procedure("NTMA rank decks", "a single NTMA point")),
        2 => {
            method.push("two NTMA points: leftover counts per rank".into());
            ntma_split_two(oracle, &ntma_deck, &nonntma_ranks)?
        }
        _ => {
            method.push("NTMA points: block apportionment by rank".into());
            ntma_split_many(oracle, &ntma_deck)?
        }
    };
    for (c, copies, rank, placement) in split {
        if copies == 0 {
            continue;
        }
        ntma_rank_decks.entry(rank).or_insert_with(|| Deck::new(n)).add(c, copies);
        if let Placement::Nonextremal(r) = placement {
            rank_decks.entry(r).or_insert_with(|| Deck::new(n)).add(c, copies);
        }
        card_tags.push(TaggedCard::new(c, copies, &tags_for(placement, true), "NTMA apportionment"));
    }
    let mut extremal_deck = d.clone();
    for dr in rank_decks.values() {
        extremal_deck = extremal_deck.subtract(dr)?;
    }
    Ok(ReconReport {
        input_deck: d.clone(),
        card_tags,
        rank_decks,
        ntma_rank_decks,
        extremal_deck,
        reconstructed: None,
        method,
    })
}

/// Per card type: tags of its non-NTMA copies.
pub fn nonextremal_rank_assignment(d: &Deck) -> Result<Vec<TaggedCard>> {
    Ok(rank_decks_report(d)?
        .card_tags
        .into_iter()
        .filter(|t| !t.is_ntma())
        .collect())
}

pub fn ntma_rank_decks(d: &Deck) -> Result<BTreeMap<usize, Deck>> {
    let oracle = DeckOracle::new(d)?;
    check_preconditions(&oracle)?;
    if oracle.parameter("NTMA count", |p| ntma_points(p).len())? == 0 {
        return Err(Error::NotDecomposable);
    }
    Ok(rank_decks_with(&oracle)?.ntma_rank_decks)
}

pub fn extremal_deck(d: &Deck) -> Result<Deck> {
    Ok(rank_decks_report(d)?.extremal_deck)
}

// ---------------------------------------------------------------------------
// Filter shifting

/// Extremal card types with their multiplicity and whether they are
/// flagged as certainly maximal (not filter shifting).
pub fn classify_by_filter_shift(d: &Deck) -> Result<Vec<(CanonicalCert, usize, bool)>> {
    let oracle = DeckOracle::new(d)?;
    let report = rank_decks_with(&oracle)?;
    let parent_filters = oracle.parameter("filter deck", filter_deck)?;
    Ok(report
        .extremal_deck
        .iter()
        .map(|(c, k)| {
            let shifting = cert_multiset_contains(&parent_filters, &filter_deck(&c.to_poset()));
            (*c, k, !shifting)
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Ranging chains

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum RangingKind {
    Ranging,
    DuallyRanging,
}

fn ranging_chains(p: &Poset) -> Vec<ElemSet> {
    let min = p.minimal();
    let q = p.ground() - min;
    let mut out = Vec::new();
    for comp in p.components_within(q) {
        if !is_chain(&p.subposet(comp)) {
            continue;
        }
        let bottom = comp.iter().min_by_key(|&y| p.below(y).len()).unwrap();
        let covers = p.lower_covers(bottom);
        if covers.len() != 1 || !covers.is_subset(min) {
            continue;
        }
        if is_order_autonomous(p, comp).unwrap_or(false) {
            out.push(comp);
        }
    }
    out
}

/// Chain components of `P \ min(P)` that are autonomous in `P` and sit on a
/// unique minimal lower cover, and the dual notion.
pub fn ranging_chain_analysis(p: &Poset) -> Vec<(ElemSet, RangingKind)> {
    let mut out: Vec<(ElemSet, RangingKind)> = ranging_chains(p)
        .into_iter()
        .map(|c| (c, RangingKind::Ranging))
        .collect();
    out.extend(
        ranging_chains(&p.dual())
            .into_iter()
            .map(|c| (c, RangingKind::DuallyRanging)),
    );
    out
}

// ---------------------------------------------------------------------------
// Dismantlability

/// Whether the parent of `d` is dismantlable, from the deck.
pub fn recognize_dismantlable(d: &Deck) -> Result<bool> {
    let oracle = DeckOracle::new(d)?;
    let n = d.n();
    if n < 4 {
        return Err(Error::Size(format!("recognition needs at least 4 elements, got {n}")));
    }
    if !oracle.parameter("connectedness", |p| p.is_connected())? {
        return Ok(false);
    }
    for dual in [false, true] {
        let cards = oracle.parameter("unique cover extremal deck", |p| unique_cover_deck(p, dual))?;
        if cards.iter().any(|(c, _)| c.to_poset().is_dismantlable()) {
            return Ok(true);
        }
    }
    let report = rank_decks_with(&oracle)?;
    for (&r, dr) in &report.rank_decks {
        let parent = oracle.parameter("neighbourhood deck", |p| neighborhood_deck(p, r))?;
        for (c, _) in dr.iter() {
            let card = c.to_poset();
            if !removed_point_irreducible(&parent, &card, r)? {
                continue;
            }
            if card.is_dismantlable() {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Irreducibility of the removed point, via the unique neighbourhood type
/// of rank `r` that the card has fewer of.
fn removed_point_irreducible(parent: &CertMultiset, card: &Poset, r: usize) -> Result<bool> {
    let mine = neighborhood_deck(card, r);
    let fewer: Vec<&CanonicalCert> = parent
        .iter()
        .filter(|(c, k)| mine.get(c).copied().unwrap_or(0) < **k)
        .map(|(c, _)| c)
        .collect();
    let [nc] = fewer.as_slice() else {
        return Err(Error::procedure(
            "dismantlability",
            format!("{} neighbourhood types lose a point", fewer.len()),
        ));
    };
    let nb = nc.to_poset();
    let ranks = nb.ranks();
    let verdicts: BTreeSet<bool> = (0..nb.n())
        .filter(|&c| ranks[c] == r && (nb.above(c) | nb.below(c)).len() + 1 == nb.n())
        .map(|c| nb.is_irreducible(c))
        .collect();
    match verdicts.len() {
        1 => Ok(verdicts.into_iter().next().unwrap()),
        _ => Err(Error::procedure(
            "dismantlability",
            "neighbourhood centres disagree on irreducibility",
        )),
    }
}

// ---------------------------------------------------------------------------
// Special classes

/// Outcome of a special-class reconstruction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpecialReconstruction {
    pub cert: CanonicalCert,
    pub method: String,
}

/// Card `Z = P \ z` of a minimal point with the smallest filter, with the
/// set of its points that are minimal in the parent, normalised over `Aut(Z)`.
fn marked_minimal_card(p: &Poset) -> (CanonicalCert, ElemSet) {
    let min = p.minimal();
    let smallest = min.iter().map(|z| p.up_set(z).len()).min().unwrap_or(0);
    let mut best: Option<(CanonicalCert, ElemSet)> = None;
    for z in min.iter().filter(|&z| p.up_set(z).len() == smallest) {
        let card = p.delete(z);
        let cert = canonical_cert(&card);
        let canon = cert.to_poset();
        let iso = find_isomorphism(&card, &canon).expect("card is isomorphic to its canonical form");
        let marked: ElemSet = min
            .without(z)
            .iter()
            .map(|m| iso.apply(Poset::index_after_delete(z, m)).unwrap())
            .collect();
        let normal = automorphisms(&canon)
            .iter()
            .map(|a| a.image_of(marked))
            .min()
            .unwrap();
        let cand = (cert, normal);
        if best.as_ref().map_or(true, |b| cand < *b) {
            best = Some(cand);
        }
    }
    best.expect("nonempty poset has a minimal element")
}

/// Rebuild the parent from the card `y` of a non-minimal point and a marked
/// minimal card `z` on which that point is `y_on_z`.
fn rebuild_from_upper_levels(
    y: &Poset,
    z: &Poset,
    zmin: ElemSet,
    y_on_z: usize,
    parent_pairs: usize,
) -> Result<Poset> {
    let fail = |s: &str| Error::procedure("upper-level rebuild", s.to_string());
    let ymin = y.minimal();
    let qy = y.ground() - ymin;
    let qz = z.ground() - zmin - ElemSet::singleton(y_on_z);
    let isos = isomorphisms(&y.subposet(qy), &z.subposet(qz));
    let [psi] = isos.as_slice() else {
        return Err(fail("upper part is not rigid"));
    };
    let map = |s: ElemSet| -> ElemSet {
        s.iter()
            .map(|a| {
                let inner = psi.apply(compact_index(qy, a)).unwrap();
                expand(qz, ElemSet::singleton(inner)).first().unwrap()
            })
            .collect()
    };
    let mut classes: BTreeMap<ElemSet, (usize, usize)> = BTreeMap::new();
    for m in ymin {
        classes.entry(map(y.above(m))).or_default().0 += 1;
    }
    for m in zmin {
        classes.entry(z.above(m).without(y_on_z)).or_default().1 += 1;
    }
    let mut grown = classes.iter().filter(|(_, (a, bc))| *a == bc + 1);
    let Some((&key, _)) = grown.next() else {
        return Err(fail("no class gains a point"));
    };
    if grown.next().is_some() || classes.values().filter(|(a, bc)| a != bc).count() != 1 {
        return Err(fail("classes of minimal points do not match"));
    }
    let need = parent_pairs
        .checked_sub(z.comparable_pairs())
        .ok_or_else(|| fail("parent has fewer comparabilities than a card"))?;
    let up = if need == key.len() {
        key
    } else if need == key.len() + 1 {
        key.with(y_on_z)
    } else {
        return Err(fail("up-set size of the new point does not fit"));
    };
    Ok(extend_with(z, ElemSet::EMPTY, up))
}

struct SpecialCtx<'a> {
    oracle: &'a DeckOracle,
    z: Poset,
    zmin: ElemSet,
    parent_pairs: usize,
}

impl<'a> SpecialCtx<'a> {
    fn new(oracle: &'a DeckOracle) -> Result<Self> {
        let (zc, zmin) = oracle.parameter("marked minimal card", marked_minimal_card)?;
        let two_chain = Poset::chain(2);
        Ok(SpecialCtx {
            oracle,
            z: zc.to_poset(),
            zmin,
            parent_pairs: kelly_count_from_deck(&two_chain, oracle.deck())?,
        })
    }

    fn accept(&self, found: &mut BTreeSet<CanonicalCert>, cand: &Poset) {
        if deck(cand) == *self.oracle.deck() {
            found.insert(canonical_cert(cand));
        }
    }
}

fn unique_result(found: BTreeSet<CanonicalCert>, what: &str) -> Result<CanonicalCert> {
    let v: Vec<CanonicalCert> = found.into_iter().collect();
    match v.as_slice() {
        [c] => Ok(*c),
        [] => Err(Error::procedure(what, "no candidate reproduces the deck")),
        _ => Err(Error::procedure(what, "several candidates reproduce the deck")),
    }
}

/// `P \ min(P)` connected with a minmax pair and not a chain.
fn rebuild_ps_upper(ctx: &SpecialCtx) -> Result<CanonicalCert> {
    let z = &ctx.z;
    let qz_set = z.ground() - ctx.zmin;
    let qz = z.subposet(qz_set);
    let max_cards: BTreeSet<CanonicalCert> =
        qz.maximal().iter().map(|m| canonical_cert(&qz.delete(m))).collect();
    let locked: Vec<usize> = qz
        .minimal()
        .iter()
        .filter(|&m| max_cards.contains(&canonical_cert(&qz.delete(m))))
        .collect();
    let [l] = locked.as_slice() else {
        return Err(Error::procedure(
            "pseudo-similar upper part",
            "lower pseudo-similar point is not unique",
        ));
    };
    let l_on_z = expand(qz_set, ElemSet::singleton(*l)).first().unwrap();
    let target = canonical_cert(&qz.delete(*l));
    let mut found = BTreeSet::new();
    for (c, _) in ctx.oracle.deck().iter() {
        let y = c.to_poset();
        if canonical_cert(&y.subposet(y.ground() - y.minimal())) != target {
            continue;
        }
        if let Ok(p) = rebuild_from_upper_levels(&y, z, ctx.zmin, l_on_z, ctx.parent_pairs) {
            ctx.accept(&mut found, &p);
        }
    }
    unique_result(found, "pseudo-similar upper part")
}

/// `P \ min(P) = B ⊕ A` with `B` nonempty: replace the lower bounds of `A`
/// on an NTMA card by a copy of the parent's.
fn rebuild_by_lower_replacement(ctx: &SpecialCtx, a_cert: CanonicalCert) -> Result<CanonicalCert> {
    let z = &ctx.z;
    let qz_set = z.ground() - ctx.zmin;
    let qz = z.subposet(qz_set);
    let top = *qz.summand_sets().last().unwrap();
    let a_on_z = expand(qz_set, top);
    let lower = common_lower(z, a_on_z);
    let l_poset = z.subposet(lower);
    let ntma = ctx.oracle.parameter("NTMA deck", |p| pi_deck(p, PointProperty::Ntma))?;
    let mut cands: Vec<(usize, Poset, ElemSet, ElemSet)> = Vec::new();
    for (c, _) in ntma.iter() {
        let card = c.to_poset();
        let cq_set = card.ground() - card.minimal();
        let cq = card.subposet(cq_set);
        let Some(&t) = cq.summand_sets().last() else { continue };
        if canonical_cert(&cq.subposet(t)) != a_cert {
            continue;
        }
        let t_on = expand(cq_set, t);
        let covered = (0..card.n()).all(|x| t_on.iter().any(|a| card.le(x, a)));
        if !covered {
            continue;
        }
        let lb = common_lower(&card, t_on);
        cands.push((lb.len(), card, t_on, lb));
    }
    let Some(fewest) = cands.iter().map(|c| c.0).min() else {
        return Err(Error::procedure("lower replacement", "no NTMA card shows the top summand"));
    };
    let mut found = BTreeSet::new();
    for (_, card, t_on, lb) in cands.iter().filter(|c| c.0 == fewest) {
        let keep = card.ground() - *lb;
        let keep_list = keep.to_vec();
        let base = keep_list.len();
        let total = base + l_poset.n();
        let mut pairs = Vec::new();
        for (i, &a) in keep_list.iter().enumerate() {
            for (j, &b) in keep_list.iter().enumerate() {
                if card.lt(a, b) {
                    pairs.push((i, j));
                }
            }
        }
        for i in 0..l_poset.n() {
            for j in l_poset.above(i) {
                pairs.push((base + i, base + j));
            }
            for a in t_on.iter() {
                let j = keep_list.iter().position(|&k| k == a).unwrap();
                pairs.push((base + i, j));
            }
        }
        if let Ok(p) = poset_from_pairs(total, &pairs) {
            ctx.accept(&mut found, &p);
        }
    }
    unique_result(found, "lower replacement")
}

/// Recognise the special classes and reconstruct their members.
/// Returns `None` when the deck is outside every class.
pub fn reconstruct_special(d: &Deck) -> Result<Option<SpecialReconstruction>> {
    let oracle = DeckOracle::new(d)?;
    reconstruct_special_with(&oracle)
}

fn reconstruct_special_with(oracle: &DeckOracle) -> Result<Option<SpecialReconstruction>> {
    check_preconditions(oracle)?;
    let done = |cert: CanonicalCert, method: &str| {
        Ok(Some(SpecialReconstruction {
            cert,
            method: method.into(),
        }))
    };
    let q = oracle
        .parameter("P minus its minimal elements", |p| {
            canonical_cert(&p.subposet(p.ground() - p.minimal()))
        })?
        .to_poset();
    if q.is_connected() && has_minmax_ps_pair(&q) {
        if is_chain(&q) {
            let cert = oracle.parameter("isomorphism type", canonical_cert)?;
            return done(cert, "largest element: linear sum (oracle)");
        }
        let ctx = SpecialCtx::new(oracle)?;
        return done(rebuild_ps_upper(&ctx)?, "upper part with a pseudo-similar pair");
    }
    let sums = q.summand_sets();
    if sums.len() < 2 {
        return Ok(None);
    }
    let qualifies = |s: ElemSet| {
        let a = q.subposet(s);
        a.is_connected() && !is_chain(&a) && has_minmax_ps_pair(&a)
    };
    let Some(ai) = (0..sums.len()).rev().find(|&i| qualifies(sums[i])) else {
        return Ok(None);
    };
    let a_set = sums[ai];
    let upper: usize = sums[ai + 1..].iter().map(|s| s.len()).sum();
    let min_filters = oracle.parameter("rank 0 neighbourhoods", |p| neighborhood_deck(p, 0))?;
    let sizes: Vec<usize> = min_filters.keys().map(|c| c.n()).collect();
    if sizes.iter().any(|&s| s <= upper + 1) {
        return Ok(None);
    }
    let cert = || oracle.parameter("isomorphism type", canonical_cert);
    if upper > 0 {
        return done(cert()?, "upper summand: linear sum (oracle)");
    }
    if sizes.iter().all(|&s| s > a_set.len()) {
        return done(cert()?, "every minimal point below the top summand: linear sum (oracle)");
    }
    let ctx = SpecialCtx::new(oracle)?;
    let a_cert = canonical_cert(&q.subposet(a_set));
    done(
        rebuild_by_lower_replacement(&ctx, a_cert)?,
        "replacement of the lower bounds of the top summand",
    )
}

/// Full deck-only report: rank decks plus special-class reconstruction.
pub fn reconstruct(d: &Deck) -> Result<ReconReport> {
    let oracle = DeckOracle::new(d)?;
    let mut report = rank_decks_with(&oracle)?;
    match reconstruct_special_with(&oracle)? {
        Some(s) => {
            report.reconstructed = Some(s.cert);
            report.method.push(format!("reconstruction: {}", s.method));
        }
        None => report.method.push("reconstruction: outside the special classes".into()),
    }
    Ok(report)
}

/// Labelled membership in the special classes, for checking recognition.
pub fn in_special_class(p: &Poset) -> bool {
    let q = p.subposet(p.ground() - p.minimal());
    if q.is_connected() && has_minmax_ps_pair(&q) {
        return true;
    }
    let sums = q.summand_sets();
    if sums.len() < 2 {
        return false;
    }
    let Some(ai) = (0..sums.len()).rev().find(|&i| {
        let a = q.subposet(sums[i]);
        a.is_connected() && !is_chain(&a) && has_minmax_ps_pair(&a)
    }) else {
        return false;
    };
    let a_on_p = expand(p.ground() - p.minimal(), sums[ai]);
    p.minimal()
        .iter()
        .all(|m| a_on_p.iter().any(|a| p.lt(m, a)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::fixtures::*;

    #[test]
    fn oracle_parameter_examples() {
        let d = deck(&Poset::chain(4));
        assert_eq!(
            oracle_parameter(&d, "ideal sizes", |p| p.ideal_size_sequence()).unwrap(),
            vec![1, 2, 3, 4]
        );
        let e = oracle_parameter(&deck(&v()), "cert", canonical_cert).unwrap_err();
        assert!(matches!(e, Error::AmbiguousParameter { .. }));
    }

    #[test]
    fn chain_counts() {
        let c = Poset::chain(4);
        assert_eq!(chain_count(&c, 2), 6);
        assert_eq!(chain_count(&c, 4), 1);
        assert_eq!(chain_count(&n_poset(), 2), 3);
        assert_eq!(chain_count(&Poset::antichain(3), 2), 0);
    }

    #[test]
    fn four_chain_rank_decks() {
        let p = Poset::chain(4);
        let r = rank_decks_report(&deck(&p)).unwrap();
        assert_eq!(r.extremal_deck, pi_deck(&p, PointProperty::Extremal));
        assert_eq!(r.rank_decks[&1], pi_deck(&p, PointProperty::NonextremalRank(1)));
        assert_eq!(r.rank_decks[&2], pi_deck(&p, PointProperty::NonextremalRank(2)));
    }

    #[test]
    fn n_poset_rank_decks() {
        let p = n_poset();
        // not enough elements for nonextremal points, but the extremal deck is everything
        let r = rank_decks_report(&deck(&p)).unwrap();
        assert!(r.rank_decks.is_empty());
        assert_eq!(r.extremal_deck, deck(&p));
    }

    #[test]
    fn ranging_chain_examples() {
        let two = Poset::chain(2);
        assert!(ranging_chain_analysis(&two).contains(&(ElemSet::singleton(1), RangingKind::Ranging)));
        let four = Poset::chain(4);
        assert!(ranging_chain_analysis(&four)
            .contains(&(ElemSet::from_elems([1, 2, 3]), RangingKind::Ranging)));
        assert!(ranging_chain_analysis(&crown4()).is_empty());
    }

    #[test]
    fn dismantlable_examples() {
        assert!(recognize_dismantlable(&deck(&Poset::chain(4))).unwrap());
        assert!(!recognize_dismantlable(&deck(&crown4())).unwrap());
    }

    #[test]
    fn filter_shift_examples() {
        let flags = classify_by_filter_shift(&deck(&Poset::chain(4))).unwrap();
        assert!(flags.iter().all(|f| !f.2));
        // one minimum under three maxima
        let star = Poset::from_cover_pairs(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let flags = classify_by_filter_shift(&deck(&star)).unwrap();
        let max_card = canonical_cert(&star.delete(1));
        assert!(flags.iter().any(|f| f.0 == max_card && f.2));
    }

    #[test]
    fn largest_element_shortcut() {
        // two minima under a 3-chain
        let p = Poset::from_cover_pairs(5, &[(0, 2), (1, 2), (2, 3), (3, 4)]).unwrap();
        let s = reconstruct_special(&deck(&p)).unwrap().unwrap();
        assert_eq!(s.cert, canonical_cert(&p));
    }

    #[test]
    fn outside_special_class() {
        assert_eq!(reconstruct_special(&deck(&crown4())).unwrap(), None);
    }
}
