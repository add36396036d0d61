//! Exhaustive enumeration of posets up to isomorphism.
//!
//! The main generator is orderly: an extension is kept only when the card it
//! was grown from is its least card, so every class has exactly one parent.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canonical::{canonical_cert, CanonicalCert};
use crate::error::{Error, Result};
use crate::extend::{down_closed_sets, extend_with, for_each_extension};
use crate::poset::{Poset, MAX_N};

/// Largest size enumerated unless the caller raises the cap.
pub const DEFAULT_CAP: usize = 9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum UniverseFilter {
    All,
    Connected,
    ConnectedCoconnected,
}

impl UniverseFilter {
    pub fn accepts(&self, p: &Poset) -> bool {
        match self {
            UniverseFilter::All => true,
            UniverseFilter::Connected => p.is_connected(),
            UniverseFilter::ConnectedCoconnected => p.is_connected() && p.is_coconnected(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            UniverseFilter::All => "all",
            UniverseFilter::Connected => "connected",
            UniverseFilter::ConnectedCoconnected => "connected-coconnected",
        }
    }
}

impl fmt::Display for UniverseFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for UniverseFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(UniverseFilter::All),
            "connected" => Ok(UniverseFilter::Connected),
            "connected-coconnected" => Ok(UniverseFilter::ConnectedCoconnected),
            _ => Err(Error::Parse(format!("unknown universe filter `{s}`"))),
        }
    }
}

/// All isomorphism classes of `n`-element posets passing a filter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Universe {
    pub n: usize,
    pub filter: UniverseFilter,
    /// Sorted, duplicate free.
    pub certs: Arc<Vec<CanonicalCert>>,
}

impl Universe {
    pub fn len(&self) -> usize {
        self.certs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.certs.is_empty()
    }

    pub fn posets(&self) -> Vec<Poset> {
        self.certs.iter().map(|c| c.to_poset()).collect()
    }
}

/// Children of `parent` (a canonical representative) under orderly generation.
fn orderly_children(parent: CanonicalCert) -> Vec<CanonicalCert> {
    let base = parent.to_poset();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for_each_extension(&base, |down, up| {
        let e = extend_with(&base, down, up);
        let c = canonical_cert(&e);
        if !seen.insert(c) {
            return;
        }
        let n = e.n();
        // `e.delete(n - 1)` is the parent itself; every other card must not be smaller.
        if (0..n - 1).all(|x| canonical_cert(&e.delete(x)) >= parent) {
            out.push(c);
        }
    });
    out
}

fn all_certs_uncached(n: usize) -> Vec<CanonicalCert> {
    if n == 0 {
        return vec![canonical_cert(&Poset::empty())];
    }
    next_level(&all_certs(n - 1))
}

/// One orderly generation step, uncached: the sorted certificates of all
/// posets on `n + 1` elements from those on `n`.
pub fn next_level(parents: &[CanonicalCert]) -> Vec<CanonicalCert> {
    let mut out: Vec<CanonicalCert> = parents
        .par_iter()
        .flat_map_iter(|&p| orderly_children(p))
        .collect();
    out.sort_unstable();
    out
}

fn memo() -> &'static Mutex<HashMap<usize, Arc<Vec<CanonicalCert>>>> {
    static MEMO: OnceLock<Mutex<HashMap<usize, Arc<Vec<CanonicalCert>>>>> = OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Sorted certificates of all posets on `n` elements, memoised per process.
fn all_certs(n: usize) -> Arc<Vec<CanonicalCert>> {
    if let Some(v) = memo().lock().unwrap().get(&n) {
        return Arc::clone(v);
    }
    let v = Arc::new(all_certs_uncached(n));
    memo().lock().unwrap().entry(n).or_insert(v).clone()
}

/// Orderly enumeration, then filtering.
pub fn enumerate(n: usize, filter: UniverseFilter, cap: usize) -> Result<Universe> {
    if n == 0 || n > cap || n >= MAX_N {
        return Err(Error::CapExceeded { n, cap });
    }
    let all = all_certs(n);
    let certs = if filter == UniverseFilter::All {
        all
    } else {
        Arc::new(
            all.par_iter()
                .filter(|c| filter.accepts(&c.to_poset()))
                .copied()
                .collect(),
        )
    };
    Ok(Universe { n, filter, certs })
}

/// Independent strategy: add a new maximal element to every `(n-1)`-element
/// poset in every way and deduplicate globally. Every poset arises because it
/// has a maximal element.
pub fn enumerate_by_maximal_extension(n: usize) -> Vec<CanonicalCert> {
    if n == 0 {
        return vec![canonical_cert(&Poset::empty())];
    }
    let mut level: BTreeSet<CanonicalCert> = BTreeSet::new();
    level.insert(canonical_cert(&Poset::antichain(1)));
    for _ in 1..n {
        let parents: Vec<CanonicalCert> = level.into_iter().collect();
        level = parents
            .par_iter()
            .map(|c| {
                let p = c.to_poset();
                down_closed_sets(&p)
                    .into_iter()
                    .map(|d| canonical_cert(&extend_with(&p, d, crate::elemset::ElemSet::EMPTY)))
                    .collect::<BTreeSet<_>>()
            })
            .reduce(BTreeSet::new, |mut a, b| {
                a.extend(b);
                a
            });
    }
    level.into_iter().collect()
}
