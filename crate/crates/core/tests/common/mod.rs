use std::collections::BTreeSet;

use ordrecon_core::{canonical_cert, CanonicalCert, Poset};

/// Every poset has a natural labelling (a linear extension), so the strict
/// orders contained in `i < j` cover every class. Relations are kept when
/// transitive.
pub fn naturally_labelled(n: usize) -> Vec<Vec<Vec<bool>>> {
    let slots: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    for mask in 0u32..1 << slots.len() {
        let mut rel = vec![vec![false; n]; n];
        for (k, &(i, j)) in slots.iter().enumerate() {
            rel[i][j] = mask >> k & 1 == 1;
        }
        let transitive = (0..n).all(|a| {
            (0..n).all(|b| !rel[a][b] || (0..n).all(|c| !rel[b][c] || rel[a][c]))
        });
        if transitive {
            out.push(rel);
        }
    }
    out
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(rest: &mut Vec<usize>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(cur.clone());
            return;
        }
        for i in 0..rest.len() {
            let x = rest.remove(i);
            cur.push(x);
            go(rest, cur, out);
            cur.pop();
            rest.insert(i, x);
        }
    }
    let mut out = Vec::new();
    go(&mut (0..n).collect(), &mut Vec::new(), &mut out);
    out
}

/// Lexicographically least relation matrix over all relabellings.
pub fn brute_canonical(rel: &[Vec<bool>], perms: &[Vec<usize>]) -> Vec<bool> {
    let n = rel.len();
    perms
        .iter()
        .map(|p| {
            let mut m = vec![false; n * n];
            for a in 0..n {
                for b in 0..n {
                    if rel[a][b] {
                        m[p[a] * n + p[b]] = true;
                    }
                }
            }
            m
        })
        .min()
        .unwrap()
}

pub fn to_poset(rel: &[Vec<bool>]) -> Poset {
    let n = rel.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .filter(|&(a, b)| rel[a][b])
        .collect();
    Poset::from_cover_pairs(n, &pairs).unwrap()
}

/// Certificates of one representative per brute-force class, and the
/// number of classes.
pub fn naive_universe(n: usize) -> (usize, Vec<CanonicalCert>) {
    let perms = permutations(n);
    let mut classes: BTreeSet<Vec<bool>> = BTreeSet::new();
    let mut certs: BTreeSet<CanonicalCert> = BTreeSet::new();
    for rel in naturally_labelled(n) {
        if classes.insert(brute_canonical(&rel, &perms)) {
            certs.insert(canonical_cert(&to_poset(&rel)));
        }
    }
    (classes.len(), certs.into_iter().collect())
}
