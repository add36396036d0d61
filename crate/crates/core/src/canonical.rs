//! Canonical labelling, isomorphism search and subposet counting.
//!
//! The canonicalizer refines an ordered partition of the elements to an
//! equitable one, then individualizes elements of the first non-singleton
//! cell and keeps the smallest adjacency code over all discrete leaves.
//! Initial cells are ordered by rank first, so every leaf labelling is a
//! natural labelling and the strict upper triangle holds the whole relation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::elemset::ElemSet;
use crate::error::{Error, Result};
use crate::poset::{Poset, MAX_N};

/// Exact canonical form: the upper-triangle relation bits of the canonically
/// relabelled poset, pair `(i, j)` in row-major order with the first pair in
/// the most significant position.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalCert {
    n: u8,
    bits: u128,
}

fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

impl CanonicalCert {
    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn bits(&self) -> u128 {
        self.bits
    }

    /// Number of comparable pairs of the underlying poset.
    pub fn comparable_pairs(&self) -> usize {
        self.bits.count_ones() as usize
    }

    /// The canonically labelled representative.
    pub fn to_poset(&self) -> Poset {
        let n = self.n();
        let mut up = [0u16; MAX_N];
        let mut k = pair_count(n);
        for (i, row) in up.iter_mut().enumerate().take(n) {
            for j in i + 1..n {
                k -= 1;
                if (self.bits >> k) & 1 == 1 {
                    *row |= 1 << j;
                }
            }
        }
        Poset::from_up_rows(n, up)
    }

    fn hex_digits(&self) -> usize {
        pair_count(self.n()).div_ceil(4)
    }
}

impl fmt::Display for CanonicalCert {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.hex_digits();
        if d == 0 {
            write!(f, "{}:", self.n)
        } else {
            write!(f, "{}:{:0width$x}", self.n, self.bits, width = d)
        }
    }
}

impl fmt::Debug for CanonicalCert {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cert({self})")
    }
}

impl FromStr for CanonicalCert {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("malformed certificate `{s}`"));
        let (n, hex) = s.trim().split_once(':').ok_or_else(bad)?;
        let n: usize = n.parse().map_err(|_| bad())?;
        if n > MAX_N {
            return Err(bad());
        }
        let cert = CanonicalCert { n: n as u8, bits: 0 };
        if hex.len() != cert.hex_digits() {
            return Err(bad());
        }
        let bits = if hex.is_empty() {
            0
        } else {
            u128::from_str_radix(hex, 16).map_err(|_| bad())?
        };
        let m = pair_count(n);
        if m < 128 && bits >> m != 0 {
            return Err(bad());
        }
        let cert = CanonicalCert { n: n as u8, bits };
        // Reject bit patterns that are not the canonical form of their poset.
        let p = Poset::from_cover_pairs(n, &upper_pairs(n, bits)).map_err(|_| bad())?;
        if canonical_cert(&p) != cert {
            return Err(bad());
        }
        Ok(cert)
    }
}

fn upper_pairs(n: usize, bits: u128) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut k = pair_count(n);
    for i in 0..n {
        for j in i + 1..n {
            k -= 1;
            if (bits >> k) & 1 == 1 {
                out.push((i, j));
            }
        }
    }
    out
}

impl Serialize for CanonicalCert {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CanonicalCert {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A partial injection between element labels; `map[x]` is the image of `x`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Morphism {
    pub map: Vec<Option<usize>>,
}

impl Morphism {
    pub fn from_total(map: &[usize]) -> Self {
        Morphism {
            map: map.iter().map(|&y| Some(y)).collect(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Morphism::from_total(&(0..n).collect::<Vec<_>>())
    }

    pub fn apply(&self, x: usize) -> Option<usize> {
        self.map.get(x).copied().flatten()
    }

    pub fn domain(&self) -> ElemSet {
        self.map
            .iter()
            .enumerate()
            .filter(|(_, y)| y.is_some())
            .map(|(x, _)| x)
            .collect()
    }

    pub fn image(&self) -> ElemSet {
        self.map.iter().flatten().copied().collect()
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(x, y)| *y == Some(x))
    }

    /// Image of a set; elements outside the domain are dropped.
    pub fn image_of(&self, s: ElemSet) -> ElemSet {
        s.iter().filter_map(|x| self.apply(x)).collect()
    }

    /// Inverse as a partial map on a ground set of `n` labels.
    pub fn inverse(&self, n: usize) -> Morphism {
        let mut map = vec![None; n];
        for (x, y) in self.map.iter().enumerate() {
            if let Some(y) = *y {
                map[y] = Some(x);
            }
        }
        Morphism { map }
    }

    /// True iff `self` is an order isomorphism from `p` restricted to its
    /// domain onto `q` restricted to its image.
    pub fn is_isomorphism_between(&self, p: &Poset, q: &Poset) -> bool {
        let dom = self.domain();
        if dom.len() != self.image().len() {
            return false;
        }
        dom.iter().all(|x| {
            dom.iter().all(|y| {
                let (fx, fy) = (self.apply(x).unwrap(), self.apply(y).unwrap());
                fx < q.n() && fy < q.n() && p.lt(x, y) == q.lt(fx, fy)
            })
        })
    }
}

#[derive(Clone, Copy)]
struct Partition {
    cells: [u16; MAX_N],
    len: usize,
}

impl Partition {
    fn empty() -> Self {
        Partition {
            cells: [0; MAX_N],
            len: 0,
        }
    }

    fn push(&mut self, cell: u16) {
        self.cells[self.len] = cell;
        self.len += 1;
    }

    fn is_discrete(&self, n: usize) -> bool {
        self.len == n
    }

    fn cells(&self) -> &[u16] {
        &self.cells[..self.len]
    }
}

/// Ordered partition by (rank, dual rank, |down|, |up|), refined to be equitable.
fn initial_partition(p: &Poset) -> Partition {
    let n = p.n();
    let rp = p.rank_profile();
    let key = |x: usize| {
        (
            rp.rank[x],
            rp.dual_rank[x],
            p.below(x).len(),
            p.above(x).len(),
        )
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&x| key(x));
    let mut part = Partition::empty();
    let mut i = 0;
    while i < n {
        let k = key(order[i]);
        let mut cell = 0u16;
        while i < n && key(order[i]) == k {
            cell |= 1 << order[i];
            i += 1;
        }
        part.push(cell);
    }
    refine(p, &mut part);
    part
}

type Sig = [u16; MAX_N];

/// Split every cell by the number of strict lower and upper bounds each
/// element has in every cell, until nothing changes.
fn refine(p: &Poset, part: &mut Partition) {
    let down = p.down_rows();
    let up = p.up_rows();
    loop {
        let old = *part;
        let mut out = Partition::empty();
        let mut changed = false;
        for &cell in old.cells() {
            if cell.count_ones() == 1 {
                out.push(cell);
                continue;
            }
            let mut items: [(Sig, u8); MAX_N] = [([0; MAX_N], 0); MAX_N];
            let mut k = 0;
            for v in ElemSet::from_bits(cell) {
                let mut sig = [0u16; MAX_N];
                for (slot, &c) in sig.iter_mut().zip(old.cells()) {
                    *slot = (((down[v] & c).count_ones() as u16) << 5) | (up[v] & c).count_ones() as u16;
                }
                items[k] = (sig, v as u8);
                k += 1;
            }
            let items = &mut items[..k];
            items.sort_unstable();
            let mut start = 0;
            for i in 1..=k {
                if i == k || items[i].0 != items[start].0 {
                    let sub = items[start..i].iter().fold(0u16, |m, &(_, v)| m | (1 << v));
                    out.push(sub);
                    start = i;
                }
            }
            if out.cells[out.len - 1] != cell {
                changed = true;
            }
        }
        *part = out;
        if !changed {
            break;
        }
    }
}

fn individualize(p: &Poset, part: &Partition, cell_index: usize, v: usize) -> Partition {
    let mut out = Partition::empty();
    for (i, &c) in part.cells().iter().enumerate() {
        if i == cell_index {
            out.push(1 << v);
            out.push(c & !(1 << v));
        } else {
            out.push(c);
        }
    }
    refine(p, &mut out);
    out
}

/// Adjacency code of the labelling that puts the element of cell `i` at position `i`.
fn leaf_code(p: &Poset, order: &[u8]) -> u128 {
    let n = order.len();
    let mut pos = [0u8; MAX_N];
    for (i, &v) in order.iter().enumerate() {
        pos[v as usize] = i as u8;
    }
    let up = p.up_rows();
    let mut code = 0u128;
    for (i, &v) in order.iter().enumerate() {
        let width = n - 1 - i;
        if width == 0 {
            continue;
        }
        let mut row = 0u16;
        for y in ElemSet::from_bits(up[v as usize]) {
            row |= 1 << pos[y];
        }
        // position j lands at bit n-1-j
        let rev = (row.reverse_bits() >> (16 - n)) as u128;
        let chunk = rev & ((1u128 << width) - 1);
        code = (code << width) | chunk;
    }
    code
}

const MAX_AUTOS: usize = 64;

struct Canonizer<'a> {
    p: &'a Poset,
    n: usize,
    best: Option<(u128, [u8; MAX_N])>,
    first: Option<(u128, [u8; MAX_N])>,
    /// Automorphisms found from coinciding leaves, as vertex maps.
    autos: Vec<[u8; MAX_N]>,
}

impl<'a> Canonizer<'a> {
    fn new(p: &'a Poset) -> Self {
        Canonizer {
            p,
            n: p.n(),
            best: None,
            first: None,
            autos: Vec::new(),
        }
    }

    fn record_auto(&mut self, from: &[u8; MAX_N], to: &[u8; MAX_N]) {
        if self.autos.len() >= MAX_AUTOS {
            return;
        }
        let mut g = [0u8; MAX_N];
        for i in 0..self.n {
            g[from[i] as usize] = to[i];
        }
        if (0..self.n).all(|x| g[x] as usize == x) || self.autos.contains(&g) {
            return;
        }
        self.autos.push(g);
    }

    fn leaf(&mut self, part: &Partition) {
        let mut order = [0u8; MAX_N];
        for (i, &c) in part.cells().iter().enumerate() {
            order[i] = c.trailing_zeros() as u8;
        }
        let code = leaf_code(self.p, &order[..self.n]);
        if self.first.is_none() {
            self.first = Some((code, order));
        }
        match self.best {
            None => self.best = Some((code, order)),
            Some((b, _)) if code < b => self.best = Some((code, order)),
            Some((b, best_order)) if code == b => self.record_auto(&best_order, &order),
            _ => {}
        }
        if let Some((f, first_order)) = self.first {
            if f == code && first_order != order {
                self.record_auto(&first_order, &order);
            }
        }
    }

    /// Orbit of `v` under the stored automorphisms that fix `path` pointwise.
    fn orbit_contains_any(&self, path: &[usize], v: usize, explored: u16) -> bool {
        if explored == 0 {
            return false;
        }
        let mut orbit = 1u16 << v;
        let fixing: Vec<&[u8; MAX_N]> = self
            .autos
            .iter()
            .filter(|g| path.iter().all(|&x| g[x] as usize == x))
            .collect();
        if fixing.is_empty() {
            return false;
        }
        loop {
            let mut next = orbit;
            for g in &fixing {
                for x in ElemSet::from_bits(orbit) {
                    next |= 1 << g[x];
                }
            }
            if next == orbit {
                break;
            }
            orbit = next;
        }
        orbit & explored != 0
    }

    fn search(&mut self, part: Partition, path: &mut Vec<usize>) {
        if part.is_discrete(self.n) {
            self.leaf(&part);
            return;
        }
        let (ci, cell) = part
            .cells()
            .iter()
            .copied()
            .enumerate()
            .find(|(_, c)| c.count_ones() > 1)
            .expect("non-discrete partition has a non-singleton cell");
        let up = self.p.up_rows();
        let down = self.p.down_rows();
        let mut explored = 0u16;
        for v in ElemSet::from_bits(cell) {
            let has_twin = ElemSet::from_bits(cell & ((1 << v) - 1))
                .iter()
                .any(|u| up[u] == up[v] && down[u] == down[v]);
            if has_twin || self.orbit_contains_any(path, v, explored) {
                continue;
            }
            explored |= 1 << v;
            let child = individualize(self.p, &part, ci, v);
            path.push(v);
            self.search(child, path);
            path.pop();
        }
    }
}

/// Canonical labelling: `order[i]` is the element placed at position `i`.
fn canonical_order(p: &Poset) -> (u128, [u8; MAX_N]) {
    if p.n() == 0 {
        return (0, [0; MAX_N]);
    }
    let mut c = Canonizer::new(p);
    c.search(initial_partition(p), &mut Vec::new());
    c.best.expect("search reaches at least one leaf")
}

pub fn canonical_cert(p: &Poset) -> CanonicalCert {
    let (bits, _) = canonical_order(p);
    CanonicalCert {
        n: p.n() as u8,
        bits,
    }
}

/// The canonical labelling as a permutation: element `x` goes to position `perm[x]`.
pub fn canonical_labeling(p: &Poset) -> Vec<usize> {
    let (_, order) = canonical_order(p);
    let mut perm = vec![0; p.n()];
    for (i, &v) in order[..p.n()].iter().enumerate() {
        perm[v as usize] = i;
    }
    perm
}

pub fn is_isomorphic(p: &Poset, q: &Poset) -> bool {
    p.n() == q.n() && p.comparable_pairs() == q.comparable_pairs() && canonical_cert(p) == canonical_cert(q)
}

/// Calls `f` with every isomorphism `p -> q` (as `map[x] = image`) until it
/// returns `false`.
pub fn for_each_isomorphism(p: &Poset, q: &Poset, mut f: impl FnMut(&[usize]) -> bool) {
    let n = p.n();
    if n != q.n() || p.comparable_pairs() != q.comparable_pairs() {
        return;
    }
    let pp = initial_partition(p);
    let qp = initial_partition(q);
    if pp.len != qp.len
        || pp
            .cells()
            .iter()
            .zip(qp.cells())
            .any(|(a, b)| a.count_ones() != b.count_ones())
    {
        return;
    }
    let mut order = Vec::with_capacity(n);
    let mut cell_of = [0usize; MAX_N];
    for (i, &c) in pp.cells().iter().enumerate() {
        for v in ElemSet::from_bits(c) {
            order.push(v);
            cell_of[v] = i;
        }
    }
    let mut map = vec![usize::MAX; n];
    let mut used = 0u16;
    let mut assigned = 0u16;
    #[allow(clippy::too_many_arguments)]
    fn go(
        depth: usize,
        p: &Poset,
        q: &Poset,
        order: &[usize],
        cell_of: &[usize; MAX_N],
        qcells: &[u16],
        map: &mut [usize],
        used: &mut u16,
        assigned: &mut u16,
        f: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if depth == order.len() {
            return f(map);
        }
        let v = order[depth];
        let prev = ElemSet::from_bits(*assigned);
        let want_up = p.above(v) & prev;
        let want_down = p.below(v) & prev;
        for w in ElemSet::from_bits(qcells[cell_of[v]] & !*used) {
            let ok = prev.iter().all(|u| {
                let mu = map[u];
                want_up.contains(u) == q.lt(w, mu) && want_down.contains(u) == q.lt(mu, w)
            });
            if !ok {
                continue;
            }
            map[v] = w;
            *used |= 1 << w;
            *assigned |= 1 << v;
            let cont = go(depth + 1, p, q, order, cell_of, qcells, map, used, assigned, f);
            *used &= !(1 << w);
            *assigned &= !(1 << v);
            map[v] = usize::MAX;
            if !cont {
                return false;
            }
        }
        true
    }
    go(
        0,
        p,
        q,
        &order,
        &cell_of,
        qp.cells(),
        &mut map,
        &mut used,
        &mut assigned,
        &mut f,
    );
}

/// Every order isomorphism `p -> q`.
pub fn isomorphisms(p: &Poset, q: &Poset) -> Vec<Morphism> {
    let mut out = Vec::new();
    for_each_isomorphism(p, q, |m| {
        out.push(Morphism::from_total(m));
        true
    });
    out
}

pub fn find_isomorphism(p: &Poset, q: &Poset) -> Option<Morphism> {
    let mut out = None;
    for_each_isomorphism(p, q, |m| {
        out = Some(Morphism::from_total(m));
        false
    });
    out
}

pub fn automorphisms(p: &Poset) -> Vec<Morphism> {
    isomorphisms(p, p)
}

pub fn is_rigid(p: &Poset) -> bool {
    let mut rigid = true;
    for_each_isomorphism(p, p, |m| {
        if m.iter().enumerate().any(|(x, &y)| x != y) {
            rigid = false;
            return false;
        }
        true
    });
    rigid
}

/// Order-reversing bijections of `p` onto itself.
pub fn dual_automorphisms(p: &Poset) -> Vec<Morphism> {
    isomorphisms(p, &p.dual())
}

/// Number of subsets `S` of `p` with `p[S] ≅ q`.
pub fn count_subposets(q: &Poset, p: &Poset) -> Result<usize> {
    let k = q.n();
    let n = p.n();
    if k > n {
        return Err(Error::Size(format!(
            "pattern has {k} elements but host has only {n}"
        )));
    }
    if k == 0 {
        return Ok(1);
    }
    let target = canonical_cert(q);
    let pairs = q.comparable_pairs();
    let up = p.up_rows();
    let mut count = 0;
    for_each_subset(n, k, |s| {
        let mut c = 0;
        for x in ElemSet::from_bits(s) {
            c += (up[x] & s).count_ones() as usize;
        }
        if c == pairs && canonical_cert(&p.subposet(ElemSet::from_bits(s))) == target {
            count += 1;
        }
    });
    Ok(count)
}

/// All `k`-subsets of `0..n` as bit masks, in increasing numeric order.
pub fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(u16)) {
    if k > n {
        return;
    }
    if k == 0 {
        f(0);
        return;
    }
    let limit = 1u32 << n;
    let mut s: u32 = (1 << k) - 1;
    while s < limit {
        f(s as u16);
        // Gosper's hack
        let c = s & s.wrapping_neg();
        let r = s + c;
        s = (((r ^ s) >> 2) / c) | r;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::fixtures::*;
    use proptest::prelude::*;

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for i in 0..n {
                let mut q = p.clone();
                q.insert(i, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn relabelled_chain_has_same_cert() {
        let relabelled = Poset::from_cover_pairs(3, &[(2, 0), (0, 1)]).unwrap();
        assert_eq!(canonical_cert(&relabelled), canonical_cert(&Poset::chain(3)));
        assert_ne!(canonical_cert(&v()), canonical_cert(&lambda()));
    }

    #[test]
    fn cert_strings() {
        assert_eq!(canonical_cert(&Poset::empty()).to_string(), "0:");
        assert_eq!(canonical_cert(&Poset::antichain(1)).to_string(), "1:");
        assert_eq!(canonical_cert(&Poset::chain(2)).to_string(), "2:1");
        assert_eq!(canonical_cert(&Poset::chain(3)).to_string(), "3:7");
        for p in [v(), lambda(), n_poset(), crown4(), Poset::antichain(5)] {
            let c = canonical_cert(&p);
            let back: CanonicalCert = c.to_string().parse().unwrap();
            assert_eq!(back, c);
            assert_eq!(canonical_cert(&c.to_poset()), c);
        }
        assert!("3:5".parse::<CanonicalCert>().is_err());
        assert!("3:77".parse::<CanonicalCert>().is_err());
        assert!("x".parse::<CanonicalCert>().is_err());
    }

    #[test]
    fn automorphism_examples() {
        assert_eq!(automorphisms(&Poset::antichain(2)).len(), 2);
        assert!(!is_rigid(&Poset::antichain(2)));
        assert_eq!(automorphisms(&Poset::chain(5)).len(), 1);
        assert!(is_rigid(&Poset::chain(5)));
        assert!(isomorphisms(&v(), &lambda()).is_empty());
        assert_eq!(automorphisms(&Poset::antichain(4)).len(), 24);
    }

    #[test]
    fn dual_automorphism_examples() {
        assert_eq!(dual_automorphisms(&Poset::chain(2)).len(), 1);
        assert!(dual_automorphisms(&v()).is_empty());
        assert_eq!(dual_automorphisms(&Poset::antichain(2)).len(), 2);
    }

    #[test]
    fn subposet_counts() {
        assert_eq!(count_subposets(&Poset::chain(2), &Poset::chain(3)).unwrap(), 3);
        assert_eq!(count_subposets(&Poset::antichain(2), &Poset::chain(3)).unwrap(), 0);
        // brute force over 3-subsets of N: only {1,2,3} induces V
        let np = n_poset();
        let brute = (0u16..16)
            .filter(|s| s.count_ones() == 3)
            .filter(|&s| is_isomorphic(&np.subposet(ElemSet::from_bits(s)), &v()))
            .count();
        assert_eq!(brute, 1);
        assert_eq!(count_subposets(&v(), &np).unwrap(), 1);
        assert!(matches!(
            count_subposets(&Poset::chain(4), &Poset::chain(3)),
            Err(Error::Size(_))
        ));
    }

    /// Brute-force isomorphism test over all permutations.
    fn brute_isomorphic(p: &Poset, q: &Poset) -> bool {
        p.n() == q.n() && permutations(p.n()).iter().any(|perm| p.relabel(perm) == *q)
    }

    #[test]
    fn four_element_classes() {
        // all labelled strict orders on 4 labels, grouped by brute-force isomorphism
        let n = 4;
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
            .collect();
        let mut reps: Vec<Poset> = Vec::new();
        let mut certs = std::collections::BTreeSet::new();
        for mask in 0u32..(1 << pairs.len()) {
            let rel: Vec<(usize, usize)> = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &pr)| pr)
                .collect();
            let Ok(p) = Poset::from_cover_pairs(n, &rel) else {
                continue;
            };
            if p.comparable_pairs() != rel.len() {
                continue; // not already transitive
            }
            certs.insert(canonical_cert(&p));
            if !reps.iter().any(|r| brute_isomorphic(r, &p)) {
                reps.push(p);
            }
        }
        assert_eq!(reps.len(), 16);
        assert_eq!(certs.len(), 16);
    }

    #[test]
    fn large_symmetric_posets_canonicalize() {
        let a = Poset::antichain(16);
        assert_eq!(canonical_cert(&a).bits(), 0);
        let mut pairs = Vec::new();
        for i in 0..8 {
            pairs.push((2 * i, 2 * i + 1));
        }
        let p = Poset::from_cover_pairs(16, &pairs).unwrap();
        let perm: Vec<usize> = (0..16).map(|x| (x * 5 + 3) % 16).collect();
        assert_eq!(canonical_cert(&p), canonical_cert(&p.relabel(&perm)));
        // 4 x 4 grid-like product of two 4-antichains layered
        let mut pairs = Vec::new();
        for i in 0..8 {
            for j in 8..16 {
                pairs.push((i, j));
            }
        }
        let k = Poset::from_cover_pairs(16, &pairs).unwrap();
        assert_eq!(canonical_cert(&k), canonical_cert(&k.relabel(&perm)));
    }

    #[test]
    fn gosper_enumerates_binomial() {
        let mut c = 0;
        for_each_subset(6, 3, |_| c += 1);
        assert_eq!(c, 20);
        let mut c = 0;
        for_each_subset(16, 8, |_| c += 1);
        assert_eq!(c, 12870);
    }

    fn arb_poset(max_n: usize) -> impl Strategy<Value = Poset> {
        (1..=max_n).prop_flat_map(arb_poset_n)
    }

    fn arb_poset_n(n: usize) -> impl Strategy<Value = Poset> {
        proptest::collection::vec(any::<bool>(), n * (n - 1) / 2)
            .prop_map(move |bits| {
                let mut pairs = Vec::new();
                let mut k = 0;
                for i in 0..n {
                    for j in i + 1..n {
                        if bits[k] {
                            pairs.push((i, j));
                        }
                        k += 1;
                    }
                }
                Poset::from_cover_pairs(n, &pairs).unwrap()
            })
    }

    proptest! {
        #[test]
        fn cert_is_relabelling_invariant(
            p in arb_poset(12),
            seed in proptest::collection::vec(any::<u32>(), 12),
        ) {
            let n = p.n();
            let mut perm: Vec<usize> = (0..n).collect();
            perm.sort_by_key(|&i| seed[i]);
            let q = p.relabel(&perm);
            prop_assert_eq!(canonical_cert(&p), canonical_cert(&q));
            let iso = find_isomorphism(&p, &q).unwrap();
            prop_assert!(iso.is_isomorphism_between(&p, &q));
            prop_assert_eq!(canonical_cert(&canonical_cert(&p).to_poset()), canonical_cert(&p));
        }

        #[test]
        fn canonical_labelling_reproduces_cert(p in arb_poset(10)) {
            let perm = canonical_labeling(&p);
            prop_assert_eq!(p.relabel(&perm), canonical_cert(&p).to_poset());
        }

        #[test]
        fn cert_equality_matches_isomorphism((p, q) in (1usize..=6).prop_flat_map(|n| (arb_poset_n(n), arb_poset_n(n)))) {
            prop_assert_eq!(canonical_cert(&p) == canonical_cert(&q), brute_isomorphic(&p, &q));
            prop_assert_eq!(find_isomorphism(&p, &q).is_some(), brute_isomorphic(&p, &q));
        }

        #[test]
        fn automorphism_count_matches_brute_force(p in arb_poset(6)) {
            let brute = permutations(p.n()).iter().filter(|perm| p.relabel(perm) == p).count();
            prop_assert_eq!(automorphisms(&p).len(), brute);
            prop_assert_eq!(is_rigid(&p), brute == 1);
        }
    }
}
