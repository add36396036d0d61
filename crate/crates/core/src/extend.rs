//! One-point extensions: every way to add a new element to a poset.

use crate::elemset::ElemSet;
use crate::poset::{Poset, MAX_N};

/// All down-closed subsets of `p`, including the empty set and the whole ground set.
pub fn down_closed_sets(p: &Poset) -> Vec<ElemSet> {
    let n = p.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&x| p.below(x).len());
    let mut out = Vec::new();
    fn go(p: &Poset, order: &[usize], i: usize, cur: ElemSet, out: &mut Vec<ElemSet>) {
        if i == order.len() {
            out.push(cur);
            return;
        }
        let x = order[i];
        go(p, order, i + 1, cur, out);
        if p.below(x).is_subset(cur) {
            go(p, order, i + 1, cur.with(x), out);
        }
    }
    go(p, &order, 0, ElemSet::EMPTY, &mut out);
    out
}

/// The poset `p` plus a new element `n` with strict down-set `down` and
/// strict up-set `up`. The caller guarantees `down` is down-closed, `up` is
/// up-closed and `down < up` elementwise.
pub fn extend_with(p: &Poset, down: ElemSet, up: ElemSet) -> Poset {
    let n = p.n();
    assert!(n < MAX_N, "extension would exceed {MAX_N} elements");
    let mut rows = [0u16; MAX_N];
    for (x, row) in rows.iter_mut().enumerate().take(n) {
        *row = p.above(x).bits();
        if down.contains(x) {
            *row |= 1 << n;
        }
    }
    rows[n] = up.bits();
    Poset::from_up_rows(n + 1, rows)
}

/// Calls `f(down, up)` for every valid one-point extension of `p`.
pub fn for_each_extension(p: &Poset, mut f: impl FnMut(ElemSet, ElemSet)) {
    let full = p.ground();
    let downs = down_closed_sets(p);
    for &x in &downs {
        let up = full - x;
        // points strictly below every member of `up`
        let mut lower = full;
        for u in up {
            lower = lower & p.below(u);
        }
        for &d in &downs {
            if d.is_subset(lower) {
                f(d, up);
            }
        }
    }
}

/// Every one-point extension of `p` as a labelled poset (new element last).
pub fn one_point_extensions(p: &Poset) -> Vec<Poset> {
    let mut out = Vec::new();
    for_each_extension(p, |d, u| out.push(extend_with(p, d, u)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn down_sets_of_small_posets() {
        assert_eq!(down_closed_sets(&Poset::chain(4)).len(), 5);
        assert_eq!(down_closed_sets(&Poset::antichain(4)).len(), 16);
        assert_eq!(down_closed_sets(&Poset::empty()).len(), 1);
    }

    #[test]
    fn extensions_are_valid_and_restrict_back() {
        let p = Poset::from_cover_pairs(4, &[(0, 2), (1, 2), (1, 3)]).unwrap();
        let exts = one_point_extensions(&p);
        for e in &exts {
            assert!(e.is_valid());
            assert_eq!(e.delete(4), p);
        }
        // brute force: every relation on the new point that closes to a valid order
        let mut brute = 0;
        for bits in 0u32..(1 << 8) {
            let mut rows = [0u16; MAX_N];
            for (x, row) in rows.iter_mut().enumerate().take(4) {
                *row = p.above(x).bits();
                if bits >> x & 1 == 1 {
                    *row |= 1 << 4;
                }
            }
            rows[4] = ((bits >> 4) & 0xf) as u16;
            let pairs: Vec<(usize, usize)> = (0..5)
                .flat_map(|x| ElemSet::from_bits(rows[x]).iter().map(move |y| (x, y)))
                .collect();
            if let Ok(q) = Poset::from_cover_pairs(5, &pairs) {
                if q.delete(4) == p && q.comparable_pairs() == pairs.len() {
                    brute += 1;
                }
            }
        }
        assert_eq!(exts.len(), brute);
    }
}
