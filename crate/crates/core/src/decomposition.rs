//! Order-autonomous sets: detection, closures, NTMA points and the canonical
//! decomposition of connected coconnected posets.

use serde::Serialize;

use crate::elemset::ElemSet;
use crate::error::{Error, Result};
use crate::poset::Poset;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AutonomousDecomposition {
    /// Maximal order-autonomous blocks, ordered by smallest element.
    pub blocks: Vec<ElemSet>,
    /// Order on block indices: `t < u` iff `blocks[t] < blocks[u]` elementwise.
    #[serde(skip)]
    pub index_poset: Poset,
    /// `block_of[x]` is the index of the block containing `x`.
    pub block_of: Vec<usize>,
}

/// Outside points that see `a` in a mixed way.
fn splitters(p: &Poset, a: ElemSet) -> ElemSet {
    let mut out = ElemSet::EMPTY;
    for x in p.ground() - a {
        let below = p.below(x) & a;
        let above = p.above(x) & a;
        if (!below.is_empty() && below != a) || (!above.is_empty() && above != a) {
            out.insert(x);
        }
    }
    out
}

pub fn is_order_autonomous(p: &Poset, a: ElemSet) -> Result<bool> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    if let Some(x) = a.iter().find(|&x| x >= p.n()) {
        return Err(Error::Index { index: x, n: p.n() });
    }
    Ok(splitters(p, a).is_empty())
}

/// Smallest order-autonomous set containing the nonempty set `s`.
pub fn autonomous_closure(p: &Poset, s: ElemSet) -> ElemSet {
    let mut a = s;
    loop {
        let add = splitters(p, a);
        if add.is_empty() {
            return a;
        }
        a = a | add;
    }
}

/// Points lying in some order-autonomous set `A` with `2 <= |A| < |P|`.
pub fn ntma_points(p: &Poset) -> ElemSet {
    let n = p.n();
    let full = p.ground();
    let mut out = ElemSet::EMPTY;
    for x in 0..n {
        for y in x + 1..n {
            if out.contains(x) && out.contains(y) {
                continue;
            }
            let c = autonomous_closure(p, ElemSet::from_elems([x, y]));
            if c != full {
                out = out | c;
            }
        }
    }
    out
}

pub fn is_decomposable(p: &Poset) -> bool {
    !ntma_points(p).is_empty()
}

/// Canonical partition of a connected coconnected poset into maximal
/// order-autonomous blocks, with the induced order on the blocks.
pub fn maximal_autonomous_partition(p: &Poset) -> Result<AutonomousDecomposition> {
    if !p.is_connected() {
        return Err(Error::NotConnected);
    }
    if !p.is_coconnected() {
        return Err(Error::NotCoconnected);
    }
    let n = p.n();
    let full = p.ground();
    let mut block_of = vec![usize::MAX; n];
    let mut blocks: Vec<ElemSet> = Vec::new();
    for x in 0..n {
        if block_of[x] != usize::MAX {
            continue;
        }
        let mut block = ElemSet::singleton(x);
        for y in 0..n {
            if y == x {
                continue;
            }
            let c = autonomous_closure(p, ElemSet::from_elems([x, y]));
            if c != full {
                block = block | c;
            }
        }
        debug_assert!(block != full || n == 1);
        for y in block {
            block_of[y] = blocks.len();
        }
        blocks.push(block);
    }
    let k = blocks.len();
    let mut pairs = Vec::new();
    for t in 0..k {
        for u in 0..k {
            let (a, b) = (blocks[t].first().unwrap(), blocks[u].first().unwrap());
            if t != u && p.lt(a, b) {
                pairs.push((t, u));
            }
        }
    }
    let index_poset = Poset::from_cover_pairs(k, &pairs)?;
    Ok(AutonomousDecomposition {
        blocks,
        index_poset,
        block_of,
    })
}
