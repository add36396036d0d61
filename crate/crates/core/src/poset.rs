//! Immutable finite posets on the ground set `0..n`.
//!
//! The strict order is stored twice, as strict up-sets and strict down-sets,
//! one 16-bit word per element. Chain *length* is always an edge count: a
//! chain of length `k` has `k + 1` elements.

use std::collections::HashMap;
use std::fmt;

use crate::canonical::{canonical_cert, CanonicalCert};
use crate::elemset::ElemSet;
use crate::error::{Error, Result};

/// Largest supported ground set.
pub const MAX_N: usize = 16;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Poset {
    n: u8,
    up: [u16; MAX_N],
    down: [u16; MAX_N],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtremalSets {
    pub min: ElemSet,
    pub max: ElemSet,
    pub extremal: ElemSet,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankProfile {
    pub rank: Vec<usize>,
    pub dual_rank: Vec<usize>,
    /// Largest rank; 0 for the empty poset.
    pub height: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutpointInfo {
    pub is_cutpoint: bool,
    /// Components of `K \ {c}` where `K` is the component of `c`.
    pub induced_components: Vec<Poset>,
}

/// Drop bit `x` from `m`, shifting higher bits down by one.
#[inline]
pub(crate) fn drop_bit(m: u16, x: usize) -> u16 {
    let m = m as u32;
    let low = m & ((1u32 << x) - 1);
    let high = (m >> (x + 1)) << x;
    (low | high) as u16
}

/// Gather the bits of `m` selected by `keep` into the low bits (software `pext`).
#[inline]
pub(crate) fn compress(m: u16, keep: u16) -> u16 {
    let mut out = 0u16;
    let mut k = keep;
    let mut i = 0;
    while k != 0 {
        let b = k.trailing_zeros();
        if m & (1 << b) != 0 {
            out |= 1 << i;
        }
        i += 1;
        k &= k - 1;
    }
    out
}

impl Poset {
    /// The poset with no elements.
    pub fn empty() -> Self {
        Poset {
            n: 0,
            up: [0; MAX_N],
            down: [0; MAX_N],
        }
    }

    pub fn antichain(n: usize) -> Self {
        assert!(n <= MAX_N, "at most {MAX_N} elements are supported");
        Poset {
            n: n as u8,
            ..Poset::empty()
        }
    }

    /// `0 < 1 < .. < n-1`.
    pub fn chain(n: usize) -> Self {
        assert!(n <= MAX_N, "at most {MAX_N} elements are supported");
        let mut up = [0u16; MAX_N];
        let full = ElemSet::full(n).bits();
        for (x, row) in up.iter_mut().enumerate().take(n) {
            *row = full & !ElemSet::full(x + 1).bits();
        }
        Poset::from_up_rows(n, up)
    }

    /// Builds the poset generated by `pairs` (each `(a, b)` meaning `a < b`),
    /// taking the transitive closure.
    pub fn from_cover_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        if n > MAX_N {
            return Err(Error::Size(format!("{n} elements exceed the maximum of {MAX_N}")));
        }
        let mut reach = [0u16; MAX_N];
        for &(a, b) in pairs {
            for idx in [a, b] {
                if idx >= n {
                    return Err(Error::Index { index: idx, n });
                }
            }
            reach[a] |= 1 << b;
        }
        // Warshall on bit rows.
        for k in 0..n {
            for i in 0..n {
                if reach[i] & (1 << k) != 0 {
                    reach[i] |= reach[k];
                }
            }
        }
        for (x, row) in reach.iter().enumerate().take(n) {
            if row & (1 << x) != 0 {
                return Err(Error::Cycle(x));
            }
        }
        Ok(Poset::from_up_rows(n, reach))
    }

    /// Trusted constructor from transitively closed strict up-sets.
    pub(crate) fn from_up_rows(n: usize, up: [u16; MAX_N]) -> Self {
        let mut down = [0u16; MAX_N];
        for (x, row) in up.iter().enumerate().take(n) {
            let mut m = *row;
            while m != 0 {
                let y = m.trailing_zeros() as usize;
                down[y] |= 1 << x;
                m &= m - 1;
            }
        }
        let p = Poset {
            n: n as u8,
            up,
            down,
        };
        debug_assert!(p.is_valid(), "invalid order relation: {p:?}");
        p
    }

    /// Irreflexive, transitive and within the ground set (antisymmetry follows).
    pub fn is_valid(&self) -> bool {
        let n = self.n();
        let full = ElemSet::full(n).bits();
        for x in 0..MAX_N {
            if x >= n {
                if self.up[x] != 0 || self.down[x] != 0 {
                    return false;
                }
                continue;
            }
            if self.up[x] & !full != 0 || self.up[x] & (1 << x) != 0 {
                return false;
            }
            for y in ElemSet::from_bits(self.up[x]) {
                if self.up[y] & !self.up[x] != 0 {
                    return false;
                }
                if self.down[y] & (1 << x) == 0 {
                    return false;
                }
            }
        }
        true
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn len(&self) -> usize {
        self.n()
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn ground(&self) -> ElemSet {
        ElemSet::full(self.n())
    }

    /// `x < y`.
    #[inline]
    pub fn lt(&self, x: usize, y: usize) -> bool {
        self.up[x] & (1 << y) != 0
    }

    #[inline]
    pub fn le(&self, x: usize, y: usize) -> bool {
        x == y || self.lt(x, y)
    }

    #[inline]
    pub fn comparable(&self, x: usize, y: usize) -> bool {
        x == y || self.lt(x, y) || self.lt(y, x)
    }

    /// Strict upper bounds of `x`.
    #[inline]
    pub fn above(&self, x: usize) -> ElemSet {
        ElemSet::from_bits(self.up[x])
    }

    /// Strict lower bounds of `x`.
    #[inline]
    pub fn below(&self, x: usize) -> ElemSet {
        ElemSet::from_bits(self.down[x])
    }

    pub(crate) fn up_rows(&self) -> &[u16; MAX_N] {
        &self.up
    }

    pub(crate) fn down_rows(&self) -> &[u16; MAX_N] {
        &self.down
    }

    /// Number of comparable pairs.
    pub fn comparable_pairs(&self) -> usize {
        (0..self.n()).map(|x| self.up[x].count_ones() as usize).sum()
    }

    fn check_index(&self, x: usize) -> Result<()> {
        if x >= self.n() {
            Err(Error::Index { index: x, n: self.n() })
        } else {
            Ok(())
        }
    }

    pub fn extremal_sets(&self) -> ExtremalSets {
        let mut min = ElemSet::EMPTY;
        let mut max = ElemSet::EMPTY;
        for x in 0..self.n() {
            if self.down[x] == 0 {
                min.insert(x);
            }
            if self.up[x] == 0 {
                max.insert(x);
            }
        }
        ExtremalSets {
            min,
            max,
            extremal: min | max,
        }
    }

    pub fn minimal(&self) -> ElemSet {
        self.extremal_sets().min
    }

    pub fn maximal(&self) -> ElemSet {
        self.extremal_sets().max
    }

    /// Elements sorted so that every element comes after all of its lower bounds.
    fn bottom_up_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.n()).collect();
        order.sort_by_key(|&x| self.down[x].count_ones());
        order
    }

    pub fn rank_profile(&self) -> RankProfile {
        let n = self.n();
        let order = self.bottom_up_order();
        let mut rank = vec![0usize; n];
        for &x in &order {
            rank[x] = self.below(x).iter().map(|y| rank[y] + 1).max().unwrap_or(0);
        }
        let mut dual_rank = vec![0usize; n];
        for &x in order.iter().rev() {
            dual_rank[x] = self.above(x).iter().map(|y| dual_rank[y] + 1).max().unwrap_or(0);
        }
        let height = rank.iter().copied().max().unwrap_or(0);
        RankProfile {
            rank,
            dual_rank,
            height,
        }
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.rank_profile().rank
    }

    pub fn height(&self) -> usize {
        self.rank_profile().height
    }

    /// Length (edge count) of the longest chain containing `x`.
    pub fn longest_chain_through(&self, x: usize) -> usize {
        let rp = self.rank_profile();
        rp.rank[x] + rp.dual_rank[x]
    }

    /// `↓x`, reflexive.
    pub fn down_set(&self, x: usize) -> ElemSet {
        self.below(x).with(x)
    }

    /// `↑x`, reflexive.
    pub fn up_set(&self, x: usize) -> ElemSet {
        self.above(x).with(x)
    }

    /// All points comparable to some member of `a`, including `a` itself.
    pub fn neighborhood(&self, a: ElemSet) -> Result<ElemSet> {
        if a.is_empty() {
            return Err(Error::EmptySet);
        }
        let mut out = a;
        for x in a {
            self.check_index(x)?;
            out = out | self.above(x) | self.below(x);
        }
        Ok(out)
    }

    pub fn upper_covers(&self, x: usize) -> ElemSet {
        let ups = self.above(x);
        let mut covered = 0u16;
        for y in ups {
            covered |= self.up[y];
        }
        ElemSet::from_bits(ups.bits() & !covered)
    }

    pub fn lower_covers(&self, x: usize) -> ElemSet {
        let downs = self.below(x);
        let mut covered = 0u16;
        for y in downs {
            covered |= self.down[y];
        }
        ElemSet::from_bits(downs.bits() & !covered)
    }

    /// Cover pairs `(lower, upper)` in lexicographic order.
    pub fn cover_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for x in 0..self.n() {
            for y in self.upper_covers(x) {
                out.push((x, y));
            }
        }
        out
    }

    /// Connected components of the comparability graph restricted to `within`.
    pub(crate) fn components_within(&self, within: ElemSet) -> Vec<ElemSet> {
        let mut remaining = within;
        let mut out = Vec::new();
        while let Some(start) = remaining.first() {
            let mut comp = ElemSet::singleton(start);
            let mut frontier = comp;
            while !frontier.is_empty() {
                let mut next = ElemSet::EMPTY;
                for x in frontier {
                    next = next | self.above(x) | self.below(x);
                }
                next = (next & within) - comp;
                comp = comp | next;
                frontier = next;
            }
            remaining = remaining - comp;
            out.push(comp);
        }
        out
    }

    /// Components ordered by their smallest element.
    pub fn components(&self) -> Vec<ElemSet> {
        self.components_within(self.ground())
    }

    pub fn is_connected(&self) -> bool {
        self.n() <= 1 || self.components().len() == 1
    }

    /// `self ⊕ top`: `top` is relabelled above every element of `self`.
    pub fn linear_sum(&self, top: &Poset) -> Result<Poset> {
        let a = self.n();
        let b = top.n();
        if a + b > MAX_N {
            return Err(Error::Size(format!("linear sum would have {} elements", a + b)));
        }
        let top_block = ElemSet::full(a + b).bits() & !ElemSet::full(a).bits();
        let mut up = [0u16; MAX_N];
        for (x, row) in up.iter_mut().enumerate().take(a) {
            *row = self.up[x] | top_block;
        }
        for y in 0..b {
            up[a + y] = top.up[y] << a;
        }
        Ok(Poset::from_up_rows(a + b, up))
    }

    /// Element sets of the maximal linear-sum decomposition, bottom first.
    pub fn summand_sets(&self) -> Vec<ElemSet> {
        let n = self.n();
        let full = ElemSet::full(n).bits();
        // Components of the incomparability graph.
        let mut remaining = full;
        let mut blocks = Vec::new();
        while remaining != 0 {
            let start = remaining.trailing_zeros() as usize;
            let mut comp = 1u16 << start;
            let mut frontier = comp;
            while frontier != 0 {
                let mut next = 0u16;
                let mut f = frontier;
                while f != 0 {
                    let x = f.trailing_zeros() as usize;
                    f &= f - 1;
                    next |= full & !(self.up[x] | self.down[x] | (1 << x));
                }
                next &= !comp;
                comp |= next;
                frontier = next;
            }
            remaining &= !comp;
            blocks.push(ElemSet::from_bits(comp));
        }
        blocks.sort_by_key(|b| b.iter().map(|x| self.down[x].count_ones()).min().unwrap_or(0));
        blocks
    }

    pub fn linear_summands(&self) -> Vec<Poset> {
        self.summand_sets().into_iter().map(|s| self.subposet(s)).collect()
    }

    pub fn is_coconnected(&self) -> bool {
        self.summand_sets().len() <= 1
    }

    pub fn dual(&self) -> Poset {
        Poset {
            n: self.n,
            up: self.down,
            down: self.up,
        }
    }

    /// Induced subposet on `s`, relabelled `0..|s|` in increasing index order.
    /// Unlike [`Poset::induced`] this accepts the empty set.
    pub fn subposet(&self, s: ElemSet) -> Poset {
        let keep = s.bits();
        let mut up = [0u16; MAX_N];
        let mut down = [0u16; MAX_N];
        for (i, x) in s.iter().enumerate() {
            up[i] = compress(self.up[x], keep);
            down[i] = compress(self.down[x], keep);
        }
        Poset {
            n: s.len() as u8,
            up,
            down,
        }
    }

    pub fn induced(&self, s: ElemSet) -> Result<Poset> {
        if s.is_empty() {
            return Err(Error::EmptySet);
        }
        if let Some(x) = s.iter().find(|&x| x >= self.n()) {
            return Err(Error::Index { index: x, n: self.n() });
        }
        Ok(self.subposet(s))
    }

    /// The card `P \ {x}`, relabelled so that elements above `x` shift down by one.
    pub fn delete(&self, x: usize) -> Poset {
        let n = self.n();
        debug_assert!(x < n);
        let mut up = [0u16; MAX_N];
        let mut down = [0u16; MAX_N];
        let mut j = 0;
        for i in 0..n {
            if i == x {
                continue;
            }
            up[j] = drop_bit(self.up[i], x);
            down[j] = drop_bit(self.down[i], x);
            j += 1;
        }
        Poset {
            n: (n - 1) as u8,
            up,
            down,
        }
    }

    /// Index of element `y` of `self` inside `self.delete(x)`.
    pub fn index_after_delete(x: usize, y: usize) -> usize {
        debug_assert!(x != y);
        if y > x {
            y - 1
        } else {
            y
        }
    }

    /// Relabel by `perm`: element `x` of `self` becomes `perm[x]`.
    pub fn relabel(&self, perm: &[usize]) -> Poset {
        let n = self.n();
        assert_eq!(perm.len(), n);
        let mut up = [0u16; MAX_N];
        for x in 0..n {
            let mut row = 0u16;
            for y in self.above(x) {
                row |= 1 << perm[y];
            }
            up[perm[x]] = row;
        }
        Poset::from_up_rows(n, up)
    }

    /// Maximum antichain size, via a maximum matching in the comparability bigraph.
    pub fn width(&self) -> usize {
        let n = self.n();
        let mut match_right: Vec<Option<usize>> = vec![None; n];
        fn augment(
            p: &Poset,
            x: usize,
            seen: &mut [bool],
            match_right: &mut [Option<usize>],
        ) -> bool {
            for y in p.above(x) {
                if seen[y] {
                    continue;
                }
                seen[y] = true;
                let free = match match_right[y] {
                    None => true,
                    Some(x2) => augment(p, x2, seen, match_right),
                };
                if free {
                    match_right[y] = Some(x);
                    return true;
                }
            }
            false
        }
        let mut matching = 0;
        for x in 0..n {
            let mut seen = vec![false; n];
            if augment(self, x, &mut seen, &mut match_right) {
                matching += 1;
            }
        }
        n - matching
    }

    /// `x` has a unique upper cover or a unique lower cover.
    pub fn is_irreducible(&self, x: usize) -> bool {
        self.upper_covers(x).len() == 1 || self.lower_covers(x).len() == 1
    }

    /// Searches, with backtracking and memoisation on canonical certificates,
    /// for an elimination order that removes an irreducible point at every step.
    pub fn is_dismantlable(&self) -> bool {
        fn go(p: &Poset, memo: &mut HashMap<CanonicalCert, bool>) -> bool {
            if p.n() <= 1 {
                return true;
            }
            let key = canonical_cert(p);
            if let Some(&v) = memo.get(&key) {
                return v;
            }
            let mut tried: Vec<CanonicalCert> = Vec::new();
            let mut result = false;
            for x in 0..p.n() {
                if !p.is_irreducible(x) {
                    continue;
                }
                let card = p.delete(x);
                let c = canonical_cert(&card);
                if tried.contains(&c) {
                    continue;
                }
                tried.push(c);
                if go(&card, memo) {
                    result = true;
                    break;
                }
            }
            memo.insert(key, result);
            result
        }
        go(self, &mut HashMap::new())
    }

    pub fn cutpoint_queries(&self, c: usize) -> CutpointInfo {
        let comp = self
            .components()
            .into_iter()
            .find(|k| k.contains(c))
            .expect("every element lies in a component");
        let rest = self.components_within(comp.without(c));
        CutpointInfo {
            is_cutpoint: rest.len() > 1,
            induced_components: rest.into_iter().map(|s| self.subposet(s)).collect(),
        }
    }

    /// Sorted multiset of `|↓x|`.
    pub fn ideal_size_sequence(&self) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.n()).map(|x| self.down[x].count_ones() as usize + 1).collect();
        v.sort_unstable();
        v
    }

    /// Sorted multiset of `|↑x|`.
    pub fn filter_size_sequence(&self) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.n()).map(|x| self.up[x].count_ones() as usize + 1).collect();
        v.sort_unstable();
        v
    }

    /// Reads the text format: first line `n`, then one `a<b` pair per line,
    /// `#` starting a comment.
    pub fn parse_text(text: &str) -> Result<Poset> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let first = lines
            .next()
            .ok_or_else(|| Error::Parse("missing element count".into()))?;
        let n: usize = first
            .parse()
            .map_err(|_| Error::Parse(format!("bad element count `{first}`")))?;
        let mut pairs = Vec::new();
        for line in lines {
            let (a, b) = line
                .split_once('<')
                .ok_or_else(|| Error::Parse(format!("expected `a<b`, got `{line}`")))?;
            let a: usize = a
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad element `{a}`")))?;
            let b: usize = b
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad element `{b}`")))?;
            pairs.push((a, b));
        }
        Poset::from_cover_pairs(n, &pairs)
    }

    /// Writes the text format using cover pairs.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.n());
        for (a, b) in self.cover_pairs() {
            s.push_str(&format!("{a}<{b}\n"));
        }
        s
    }
}

impl fmt::Debug for Poset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poset(n={};", self.n())?;
        for (i, (a, b)) in self.cover_pairs().into_iter().enumerate() {
            write!(f, "{}{a}<{b}", if i == 0 { " " } else { ", " })?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::Poset;

    /// `{0<1, 0<2}`.
    pub fn v() -> Poset {
        Poset::from_cover_pairs(3, &[(0, 1), (0, 2)]).unwrap()
    }

    /// `{1<0, 2<0}`.
    pub fn lambda() -> Poset {
        Poset::from_cover_pairs(3, &[(1, 0), (2, 0)]).unwrap()
    }

    /// `{0<2, 1<2, 1<3}`.
    pub fn n_poset() -> Poset {
        Poset::from_cover_pairs(4, &[(0, 2), (1, 2), (1, 3)]).unwrap()
    }

    /// Two minimals each below two maximals.
    pub fn crown4() -> Poset {
        Poset::from_cover_pairs(4, &[(0, 2), (0, 3), (1, 2), (1, 3)]).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    /// All chains (as element sets) by brute force.
    fn brute_chains(p: &Poset) -> Vec<ElemSet> {
        (1u32..(1 << p.n()))
            .map(|b| ElemSet::from_bits(b as u16))
            .filter(|s| s.iter().all(|x| s.iter().all(|y| p.comparable(x, y))))
            .collect()
    }

    fn brute_longest_through(p: &Poset, x: usize) -> usize {
        brute_chains(p)
            .into_iter()
            .filter(|s| s.contains(x))
            .map(|s| s.len() - 1)
            .max()
            .unwrap()
    }

    #[test]
    fn cover_pairs_close_transitively() {
        let c = Poset::from_cover_pairs(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(c.lt(0, 2));
        assert_eq!(c, Poset::chain(3));
        assert_eq!(
            Poset::from_cover_pairs(2, &[(0, 1), (1, 0)]),
            Err(Error::Cycle(0))
        );
        let a = Poset::from_cover_pairs(3, &[]).unwrap();
        assert_eq!(a.comparable_pairs(), 0);
        assert_eq!(
            Poset::from_cover_pairs(2, &[(0, 2)]),
            Err(Error::Index { index: 2, n: 2 })
        );
    }

    #[test]
    fn extremal_sets_examples() {
        let e = Poset::chain(3).extremal_sets();
        assert_eq!((e.min.to_vec(), e.max.to_vec(), e.extremal.to_vec()), (vec![0], vec![2], vec![0, 2]));
        let e = Poset::antichain(3).extremal_sets();
        assert_eq!(e.min, ElemSet::full(3));
        assert_eq!(e.max, ElemSet::full(3));
        let e = v().extremal_sets();
        assert_eq!(e.min.to_vec(), vec![0]);
        assert_eq!(e.max.to_vec(), vec![1, 2]);
    }

    #[test]
    fn rank_profile_examples() {
        let rp = Poset::chain(4).rank_profile();
        assert_eq!(rp.rank, vec![0, 1, 2, 3]);
        assert_eq!(rp.height, 3);
        let rp = v().rank_profile();
        assert_eq!((rp.rank[1], rp.rank[2], rp.dual_rank[0]), (1, 1, 1));
        let np = n_poset();
        let rp = np.rank_profile();
        // brute force: rank(x) = longest chain whose top is x
        for x in 0..4 {
            let brute_rank = brute_chains(&np)
                .into_iter()
                .filter(|s| s.iter().all(|y| np.le(y, x)) && s.contains(x))
                .map(|s| s.len() - 1)
                .max()
                .unwrap();
            assert_eq!(rp.rank[x], brute_rank);
        }
        assert_eq!((rp.rank[2], rp.rank[3], rp.dual_rank[0], rp.dual_rank[1]), (1, 1, 1, 1));
    }

    #[test]
    fn down_up_and_neighborhoods() {
        assert_eq!(Poset::chain(3).down_set(2), ElemSet::full(3));
        assert_eq!(
            Poset::antichain(3).neighborhood(ElemSet::singleton(0)).unwrap(),
            ElemSet::singleton(0)
        );
        assert_eq!(v().neighborhood(ElemSet::singleton(1)).unwrap().to_vec(), vec![0, 1]);
        assert_eq!(v().neighborhood(ElemSet::EMPTY), Err(Error::EmptySet));
    }

    #[test]
    fn components_examples() {
        let p = Poset::from_cover_pairs(3, &[(0, 1)]).unwrap();
        let mut sizes: Vec<usize> = p.components().iter().map(|c| c.len()).collect();
        sizes.sort();
        assert_eq!(sizes, vec![1, 2]);
        assert!(Poset::chain(5).is_connected());
        assert_eq!(Poset::antichain(4).components().len(), 4);
    }

    #[test]
    fn linear_sums() {
        let pt = Poset::antichain(1);
        assert_eq!(pt.linear_sum(&pt).unwrap(), Poset::chain(2));
        assert_eq!(Poset::chain(4).linear_summands().len(), 4);
        // V is a point below a 2-antichain
        assert!(!v().is_coconnected());
        assert_eq!(v().linear_summands(), vec![Poset::antichain(1), Poset::antichain(2)]);
        assert!(!lambda().is_coconnected());
        assert!(n_poset().is_coconnected());
        assert_eq!(n_poset().linear_summands().len(), 1);
    }

    #[test]
    fn dual_and_induced() {
        let d = v().dual();
        assert_eq!(d.extremal_sets().max.len(), 1);
        assert_eq!(d.extremal_sets().min.len(), 2);
        let c = Poset::chain(3).induced(ElemSet::from_elems([0, 2])).unwrap();
        assert_eq!(c, Poset::chain(2));
        let np = n_poset();
        assert_eq!(np.induced(np.ground()).unwrap(), np);
        assert_eq!(np.induced(ElemSet::EMPTY), Err(Error::EmptySet));
    }

    #[test]
    fn longest_chain_examples() {
        assert_eq!(Poset::chain(4).longest_chain_through(1), 3);
        assert_eq!(v().longest_chain_through(0), 1);
        let np = n_poset();
        assert_eq!(brute_longest_through(&np, 3), 1);
        assert_eq!(np.longest_chain_through(3), 1);
    }

    #[test]
    fn width_and_dismantlability() {
        assert_eq!(Poset::chain(5).width(), 1);
        assert!(Poset::chain(5).is_dismantlable());
        assert_eq!(Poset::antichain(2).width(), 2);
        assert!(!Poset::antichain(2).is_dismantlable());
        assert!(Poset::antichain(1).is_dismantlable());
        assert!(!crown4().is_dismantlable());
        assert_eq!(crown4().width(), 2);
    }

    /// Exhaustive elimination-order oracle: try every permutation.
    fn brute_dismantlable(p: &Poset) -> bool {
        fn go(p: &Poset) -> bool {
            p.n() <= 1 || (0..p.n()).any(|x| p.is_irreducible(x) && go(&p.delete(x)))
        }
        go(p)
    }

    #[test]
    fn crown_has_no_elimination_order() {
        assert!(!brute_dismantlable(&crown4()));
        assert!(brute_dismantlable(&n_poset()));
        assert!(n_poset().is_dismantlable());
    }

    #[test]
    fn cutpoints() {
        // 0 < 2 survives the removal of the middle point
        let info = Poset::chain(3).cutpoint_queries(1);
        assert!(!info.is_cutpoint);
        assert_eq!(info.induced_components, vec![Poset::chain(2)]);
        assert!(!Poset::chain(3).cutpoint_queries(0).is_cutpoint);
        let info = v().cutpoint_queries(0);
        assert!(info.is_cutpoint);
        assert_eq!(info.induced_components.len(), 2);
    }

    #[test]
    fn text_format() {
        let text = "# an N\n4\n0<2\n1<2 # comment\n1<3\n";
        let p = Poset::parse_text(text).unwrap();
        assert_eq!(p, n_poset());
        assert_eq!(Poset::parse_text(&p.to_text()).unwrap(), p);
        assert!(matches!(Poset::parse_text("2\n0<1\n1<0\n"), Err(Error::Cycle(_))));
        assert!(matches!(Poset::parse_text("x\n"), Err(Error::Parse(_))));
    }

    #[test]
    fn bit_helpers() {
        assert_eq!(drop_bit(0b1011, 1), 0b101);
        assert_eq!(drop_bit(0x8000, 15), 0);
        assert_eq!(compress(0b1101, 0b1100), 0b11);
    }

    /// Random strict orders: random DAG edges `i -> j` with `i < j`, shuffled labels.
    pub(crate) fn arb_poset(max_n: usize) -> impl Strategy<Value = Poset> {
        (1..=max_n)
            .prop_flat_map(|n| {
                (
                    Just(n),
                    proptest::collection::vec(any::<bool>(), n * (n - 1) / 2),
                    Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
                )
            })
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
        fn closure_is_a_valid_order(p in arb_poset(9)) {
            prop_assert!(p.is_valid());
        }

        #[test]
        fn induced_commutes_with_dual(p in arb_poset(8), mask in any::<u16>()) {
            let s = ElemSet::from_bits(mask) & p.ground();
            prop_assume!(!s.is_empty());
            prop_assert_eq!(p.dual().induced(s).unwrap(), p.induced(s).unwrap().dual());
        }

        #[test]
        fn rank_plus_dual_rank_is_longest_chain(p in arb_poset(7)) {
            let rp = p.rank_profile();
            for x in 0..p.n() {
                prop_assert_eq!(rp.rank[x] + rp.dual_rank[x], brute_longest_through(&p, x));
            }
        }

        #[test]
        fn summands_of_linear_sum_concatenate(a in arb_poset(5), b in arb_poset(5)) {
            let s = a.linear_sum(&b).unwrap();
            let mut expect = a.linear_summands();
            expect.extend(b.linear_summands());
            prop_assert_eq!(s.linear_summands(), expect);
        }

        #[test]
        fn components_partition_ground(p in arb_poset(9)) {
            let comps = p.components();
            let mut union = ElemSet::EMPTY;
            for c in &comps {
                prop_assert!(!union.intersects(*c));
                union = union | *c;
            }
            prop_assert_eq!(union, p.ground());
            prop_assert_eq!(p.is_connected(), comps.len() == 1);
        }

        #[test]
        fn dismantlable_matches_exhaustive_orders(p in arb_poset(6)) {
            prop_assert_eq!(p.is_dismantlable(), brute_dismantlable(&p));
        }

        #[test]
        fn width_matches_brute_force(p in arb_poset(8)) {
            let brute = (0u32..(1 << p.n()))
                .map(|b| ElemSet::from_bits(b as u16))
                .filter(|s| s.iter().all(|x| s.iter().all(|y| x == y || !p.comparable(x, y))))
                .map(|s| s.len())
                .max()
                .unwrap();
            prop_assert_eq!(p.width(), brute);
        }
    }
}
