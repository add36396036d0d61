//! Minmax pairs of pseudo-similar points and the structure attached to them:
//! the fence decomposition, the orbit of `Φ`, the set `A_P` with its `d` map,
//! large components and the partition of `A_P`.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::canonical::{canonical_cert, for_each_isomorphism, CanonicalCert, Morphism};
use crate::deck::filter_deck;
use crate::elemset::ElemSet;
use crate::error::{Error, Result};
use crate::poset::{Poset, MAX_N};

/// A minmax pair `(l, h)` with the isomorphism `Φ: P∖{h} → P∖{l}` and
/// everything derived from it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PsStructure {
    pub l: usize,
    pub h: usize,
    pub phi: Morphism,
    /// `Φ^0(l), Φ^1(l), …, Φ^{n-1}(l)`.
    pub orbit: Vec<usize>,
    pub c: Vec<ElemSet>,
    /// Components of the points all of whose fences to `h` pass through `l`.
    pub l_parts: Vec<ElemSet>,
    /// Components of the points all of whose fences to `l` pass through `h`.
    pub r_parts: Vec<ElemSet>,
    pub k_l: ElemSet,
    pub k_h: ElemSet,
    /// Maximal points with `|↓x| = |↓h|`, in orbit order.
    pub a_p: Vec<usize>,
    pub v: usize,
    /// Pairs `(Φ^{v+j}(l), Φ^j(l))`.
    pub d_map: Vec<(usize, usize)>,
}

impl PsStructure {
    /// `Φ^j(l)`.
    pub fn phi_pow(&self, j: usize) -> usize {
        self.orbit[j]
    }

    /// Position of `x` in the orbit.
    pub fn orbit_index(&self, x: usize) -> usize {
        self.orbit.iter().position(|&y| y == x).expect("orbit covers P")
    }

    pub fn d_of(&self, a: usize) -> Option<usize> {
        self.d_map.iter().find(|(p, _)| *p == a).map(|&(_, d)| d)
    }

    /// Image of a set under `Φ`; `None` if the set contains `h`.
    pub fn phi_image(&self, s: ElemSet) -> Option<ElemSet> {
        if s.contains(self.h) {
            return None;
        }
        Some(self.phi.image_of(s))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("structure serialises")
    }
}

/// Blocks `B_k` and breakpoints `k_0 < … < k_X = n - v` partitioning the
/// indices of `A_P`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct APartition {
    pub breakpoints: Vec<usize>,
    /// `blocks[k] = B_k` for `0 ≤ k < n - v`.
    pub blocks: Vec<ElemSet>,
}

/// Calls `f` with every isomorphism `P∖{a} → P∖{b}` expressed on the labels
/// of `p` (`map[a]` is `None`) until `f` returns `false`.
pub fn for_each_card_isomorphism(p: &Poset, a: usize, b: usize, mut f: impl FnMut(&Morphism) -> bool) {
    let n = p.n();
    let (ca, cb) = (p.delete(a), p.delete(b));
    let back_a: Vec<usize> = (0..n).filter(|&x| x != a).collect();
    let back_b: Vec<usize> = (0..n).filter(|&x| x != b).collect();
    for_each_isomorphism(&ca, &cb, |m| {
        let mut map = vec![None; n];
        for (i, &y) in m.iter().enumerate() {
            map[back_a[i]] = Some(back_b[y]);
        }
        f(&Morphism { map })
    });
}

pub fn card_isomorphisms(p: &Poset, a: usize, b: usize) -> Vec<Morphism> {
    let mut out = Vec::new();
    for_each_card_isomorphism(p, a, b, |m| {
        out.push(m.clone());
        true
    });
    out
}

/// Every minmax pair of pseudo-similar points with its first witness `Φ`.
pub fn find_minmax_ps_pairs(p: &Poset) -> Vec<(usize, usize, Morphism)> {
    let e = p.extremal_sets();
    let mut out = Vec::new();
    for l in e.min {
        let cl = canonical_cert(&p.delete(l));
        for h in e.max {
            if h == l || canonical_cert(&p.delete(h)) != cl {
                continue;
            }
            let mut phi = None;
            for_each_card_isomorphism(p, h, l, |m| {
                phi = Some(m.clone());
                false
            });
            out.push((l, h, phi.expect("isomorphic cards have an isomorphism")));
        }
    }
    out
}

/// Cheap test for the existence of a minmax pseudo-similar pair.
pub fn has_minmax_ps_pair(p: &Poset) -> bool {
    let e = p.extremal_sets();
    let maxes: Vec<_> = e.max.iter().map(|h| (h, canonical_cert(&p.delete(h)))).collect();
    e.min.iter().any(|l| {
        let cl = canonical_cert(&p.delete(l));
        maxes.iter().any(|&(h, ch)| h != l && ch == cl)
    })
}

/// `l, Φ(l), Φ²(l), …` for `|P|` steps; must enumerate `P` and end at `h`.
pub fn phi_orbit(p: &Poset, l: usize, phi: &Morphism) -> Result<Vec<usize>> {
    let n = p.n();
    let mut seen = ElemSet::EMPTY;
    let mut out = Vec::with_capacity(n);
    let mut x = l;
    for j in 0..n {
        if x >= n || seen.contains(x) {
            return Err(Error::Orbit(format!("step {j} revisits or leaves the ground set at {x}")));
        }
        seen.insert(x);
        out.push(x);
        if j + 1 < n {
            x = phi
                .apply(x)
                .ok_or_else(|| Error::Orbit(format!("Φ is undefined at {x} after {j} steps")))?;
        }
    }
    if phi.apply(x).is_some() {
        return Err(Error::Orbit(format!("orbit ends at {x}, which is in the domain of Φ")));
    }
    Ok(out)
}

fn component_of(p: &Poset, within: ElemSet, x: usize) -> ElemSet {
    p.components_within(within)
        .into_iter()
        .find(|c| c.contains(x))
        .expect("x lies in `within`")
}

/// The fence decomposition and derived data of a pair `(l, h)` with witness `phi`.
pub fn lh_decomposition(p: &Poset, l: usize, h: usize, phi: &Morphism) -> Result<PsStructure> {
    let n = p.n();
    let e = p.extremal_sets();
    if l >= n || h >= n || l == h || !e.min.contains(l) || !e.max.contains(h) {
        return Err(Error::InvalidPair(format!("({l}, {h}) is not a minimal/maximal pair")));
    }
    let full = p.ground();
    let card_h = p.ground().without(h);
    if phi.map.len() != n
        || phi.domain() != card_h
        || phi.image() != full.without(l)
        || !phi.is_isomorphism_between(p, p)
    {
        return Err(Error::InvalidPair("Φ is not an isomorphism P∖{h} → P∖{l}".into()));
    }
    if !p.is_connected() {
        return Err(Error::NotConnected);
    }
    let orbit = phi_orbit(p, l, phi)?;
    let k_l = component_of(p, full.without(h), l);
    let k_h = component_of(p, full.without(l), h);
    let rest = full.without(l).without(h);
    let c = p.components_within(rest & k_l & k_h);
    let l_parts = p.components_within(rest - k_h);
    let r_parts = p.components_within(rest - k_l);
    let dh = p.below(h).len();
    let a_set: ElemSet = e.max.iter().filter(|&x| p.below(x).len() == dh).collect();
    let first = orbit
        .iter()
        .position(|x| a_set.contains(*x))
        .expect("h itself lies in A_P");
    if orbit[first..].iter().copied().collect::<ElemSet>() != a_set {
        return Err(Error::Structure(format!(
            "A_P = {a_set} is not a final segment of the Φ-orbit"
        )));
    }
    let a_p = orbit[first..].to_vec();
    let d_map = (first..n).map(|k| (orbit[k], orbit[k - first])).collect();
    Ok(PsStructure {
        l,
        h,
        phi: phi.clone(),
        orbit,
        c,
        l_parts,
        r_parts,
        k_l,
        k_h,
        a_p,
        v: first,
        d_map,
    })
}

/// Structure for the first minmax pair of a connected poset, if any.
pub fn ps_structure(p: &Poset) -> Option<Result<PsStructure>> {
    let (l, h, phi) = find_minmax_ps_pairs(p).into_iter().next()?;
    Some(lh_decomposition(p, l, h, &phi))
}

/// Components of `P ∖ {Φ^{v+k}(l), …, Φ^{n-1}(l)}` as large as the one containing `l`.
pub fn large_components(p: &Poset, ps: &PsStructure, k: usize) -> Vec<ElemSet> {
    let n = p.n();
    let removed: ElemSet = ps.orbit[(ps.v + k).min(n)..].iter().copied().collect();
    let comps = p.components_within(p.ground() - removed);
    let size = comps
        .iter()
        .find(|c| c.contains(ps.l))
        .map(|c| c.len())
        .unwrap_or(0);
    comps.into_iter().filter(|c| c.len() == size).collect()
}

/// Builds the blocks `B_k` segment by segment from the large components.
pub fn compute_partition(p: &Poset, ps: &PsStructure) -> Result<APartition> {
    let n = p.n();
    let total = n - ps.v;
    let mut breakpoints = vec![0];
    let mut blocks = Vec::with_capacity(total);
    let mut k = 0;
    while k < total {
        let large = large_components(p, ps, k);
        let start = large
            .iter()
            .copied()
            .find(|c| c.contains(ps.l))
            .ok_or_else(|| Error::Structure(format!("no large component contains l at k = {k}")))?;
        if !start.contains(ps.phi_pow(k)) {
            return Err(Error::Structure(format!(
                "Φ^{k}(l) is not in the component of l at k = {k}"
            )));
        }
        let mut seg = vec![start];
        for i in 1..large.len() {
            let next = ps
                .phi_image(seg[i - 1])
                .ok_or_else(|| Error::Structure(format!("Φ^{i}[B] meets h at k = {k}")))?;
            if !large.contains(&next) || seg.contains(&next) {
                return Err(Error::Structure(format!(
                    "Φ^{i}[B_{k}] is not a new large component"
                )));
            }
            seg.push(next);
        }
        if k + seg.len() > total {
            return Err(Error::Structure(format!(
                "segment at k = {k} with {} blocks overruns n - v = {total}",
                seg.len()
            )));
        }
        for (i, b) in seg.iter().enumerate() {
            if !b.contains(ps.phi_pow(k + i)) {
                return Err(Error::Structure(format!("Φ^{}(l) is not in its block", k + i)));
            }
        }
        k += seg.len();
        blocks.extend(seg);
        breakpoints.push(k);
    }
    Ok(APartition { breakpoints, blocks })
}

/// `x ↦ Φ(x)` off `Φ⁻¹[R]` and `Φ²(x)` on it, restricted to `K_l ∖ {Φ⁻¹(h)}`,
/// checked to be an isomorphism onto `K_l ∖ {l}`.
pub fn phi_hat(p: &Poset, ps: &PsStructure) -> Result<Morphism> {
    let n = p.n();
    let r: ElemSet = ps.r_parts.iter().fold(ElemSet::EMPTY, |a, &b| a | b);
    let pre_h = ps.phi_pow(n - 2);
    if !ps.k_l.contains(pre_h) {
        return Err(Error::Structure("Φ⁻¹(h) lies outside K_l".into()));
    }
    let dom = ps.k_l.without(pre_h);
    let mut map = vec![None; n];
    for x in dom {
        let y = ps.phi.apply(x).expect("h is not in K_l");
        let z = if r.contains(y) {
            ps.phi
                .apply(y)
                .ok_or_else(|| Error::Structure(format!("Φ²({x}) is undefined")))?
        } else {
            y
        };
        map[x] = Some(z);
    }
    let m = Morphism { map };
    if m.image() != ps.k_l.without(ps.l) || !m.is_isomorphism_between(p, p) {
        return Err(Error::Structure(
            "Φ̂ is not an isomorphism K_l∖{Φ⁻¹(h)} → K_l∖{l}".into(),
        ));
    }
    Ok(m)
}

/// For a maximal `x`: the filter deck of `P∖{x}` is that of `P` minus one filter.
pub fn filter_shifting(p: &Poset, x: usize) -> Result<bool> {
    if x >= p.n() {
        return Err(Error::Index { index: x, n: p.n() });
    }
    if !p.maximal().contains(x) {
        return Err(Error::NotMaximal(x));
    }
    let mut parent = filter_deck(p);
    let card = filter_deck(&p.delete(x));
    for (c, k) in card {
        match parent.get_mut(&c) {
            Some(m) if *m >= k => *m -= k,
            _ => return Ok(false),
        }
    }
    Ok(parent.values().sum::<usize>() == 1)
}

/// Certificates of all connected `n`-element posets with a minmax pair of
/// pseudo-similar points, sorted.
///
/// Numbering such a poset along the orbit of `Φ` makes `Φ` the shift
/// `i ↦ i + 1`, so `i < j` holds exactly when `j - i` lies in a set of
/// differences closed under sums below `n`. Every such set is tried.
pub fn connected_ps_posets(n: usize) -> Vec<CanonicalCert> {
    if !(2..=MAX_N).contains(&n) {
        return Vec::new();
    }
    let m = n - 1;
    let mut out = BTreeSet::new();
    for s in 0u32..1 << m {
        let has = |d: usize| (s >> (d - 1)) & 1 == 1;
        let closed = (1..=m).all(|a| !has(a) || (1..=m - a).all(|b| !has(b) || has(a + b)));
        if !closed {
            continue;
        }
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| has(j - i))
            .collect();
        let p = Poset::from_cover_pairs(n, &pairs).expect("differences give an acyclic relation");
        if p.is_connected() {
            out.insert(canonical_cert(&p));
        }
    }
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::{enumerate, UniverseFilter, DEFAULT_CAP};
    use crate::poset::fixtures::*;

    #[test]
    fn chain_structure() {
        for n in 2..=6 {
            let p = Poset::chain(n);
            let pairs = find_minmax_ps_pairs(&p);
            assert_eq!(pairs.len(), 1);
            let (l, h, phi) = &pairs[0];
            assert_eq!((*l, *h), (0, n - 1));
            assert_eq!(phi_orbit(&p, *l, phi).unwrap(), (0..n).collect::<Vec<_>>());
            let ps = lh_decomposition(&p, *l, *h, phi).unwrap();
            // the interior of a chain reaches both ends without the other one
            let interior = ElemSet::full(n).without(0).without(n - 1);
            let want_c = if n > 2 { vec![interior] } else { vec![] };
            assert_eq!(ps.c, want_c);
            assert!(ps.l_parts.is_empty() && ps.r_parts.is_empty());
            assert_eq!(ps.k_l, ElemSet::full(n).without(n - 1));
            assert_eq!(ps.k_h, ElemSet::full(n).without(0));
            assert_eq!(ps.a_p, vec![n - 1]);
            assert_eq!(ps.v, n - 1);
            assert_eq!(ps.d_map, vec![(n - 1, 0)]);
            let part = compute_partition(&p, &ps).unwrap();
            assert_eq!(part.breakpoints, vec![0, 1]);
            assert!(part.blocks[0].contains(0));
            assert_eq!(large_components(&p, &ps, 0).len(), 1);
            let hat = phi_hat(&p, &ps).unwrap();
            for x in 0..n.saturating_sub(2) {
                assert_eq!(hat.apply(x), Some(x + 1));
            }
            assert!(filter_shifting(&p, n - 1).unwrap());
        }
    }

    #[test]
    fn negative_cases() {
        assert!(find_minmax_ps_pairs(&v()).is_empty());
        assert!(!filter_shifting(&v(), 1).unwrap());
        assert_eq!(filter_shifting(&v(), 0), Err(Error::NotMaximal(0)));
        let p = Poset::chain(4);
        let mut phi = find_minmax_ps_pairs(&p)[0].2.clone();
        phi.map[1] = None;
        assert!(matches!(phi_orbit(&p, 0, &phi), Err(Error::Orbit(_))));
        assert!(matches!(
            lh_decomposition(&p, 1, 3, &phi),
            Err(Error::InvalidPair(_))
        ));
    }

    #[test]
    fn smallest_connected_non_chain_instance() {
        let mut found = None;
        'outer: for n in 2..=7 {
            for c in enumerate(n, UniverseFilter::Connected, DEFAULT_CAP).unwrap().certs.iter() {
                let p = c.to_poset();
                if p.width() > 1 && has_minmax_ps_pair(&p) {
                    found = Some(p);
                    break 'outer;
                }
            }
        }
        let p = found.expect("a connected non-chain ps poset exists below 8 points");
        let ps = ps_structure(&p).unwrap().unwrap();
        assert_eq!(phi_orbit(&p, ps.l, &ps.phi).unwrap().len(), p.n());
        assert_eq!(find_minmax_ps_pairs(&p).len(), 1);
        compute_partition(&p, &ps).unwrap();
        phi_hat(&p, &ps).unwrap();
        let json = ps.to_json();
        assert!(json.contains("\"a_p\""));
    }

    #[test]
    fn generator_matches_enumeration() {
        for n in 2..=7 {
            let want: Vec<CanonicalCert> = enumerate(n, UniverseFilter::Connected, DEFAULT_CAP)
                .unwrap()
                .certs
                .iter()
                .filter(|c| has_minmax_ps_pair(&c.to_poset()))
                .copied()
                .collect();
            assert_eq!(connected_ps_posets(n), want, "n = {n}");
        }
    }
}
