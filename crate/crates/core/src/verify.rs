//! Property registry, exhaustive runner and replayable findings.
//!
//! A property is a check over one item of a scope: a single poset, a class of
//! posets with equal decks, or a connected poset with a minmax pair of
//! pseudo-similar points. Items are checked in parallel and findings are
//! collected in item order, so reports do not depend on the worker count.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cache::{groups_cached, universe_cached};
use crate::canonical::{
    automorphisms, canonical_cert, dual_automorphisms, for_each_isomorphism, is_rigid, isomorphisms,
    CanonicalCert,
};
use crate::deck::{
    deck, filter_deck, ideal_deck, invert_deck_certs, kelly_count_from_deck, neighborhood_deck, pi_deck,
    CertMultiset, Deck, PointProperty,
};
use crate::decomposition::{autonomous_closure, is_order_autonomous, ntma_points};
use crate::elemset::ElemSet;
use crate::enumerate::{enumerate, UniverseFilter, DEFAULT_CAP};
use crate::error::{Error, Result};
use crate::poset::{Poset, MAX_N};
use crate::pseudo_similar::{
    compute_partition, connected_ps_posets, filter_shifting, find_minmax_ps_pairs, for_each_card_isomorphism,
    has_minmax_ps_pair, large_components, phi_hat, phi_orbit, ps_structure, PsStructure,
};
use crate::recon::{
    classify_by_filter_shift, compact_index, in_special_class, rank_decks_report, reconstruct_special,
    recognize_dismantlable, unique_cover_deck, CardTag,
};

/// What a property ranges over at each size `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Scope {
    /// One item per poset of the universe.
    Posets(UniverseFilter),
    /// One item per class of posets with equal decks.
    DeckGroups(UniverseFilter),
    /// One item per connected poset with a minmax pair of pseudo-similar points.
    PsPosets,
    /// Those posets grouped by ideal size sequence.
    PsIdealGroups,
}

impl std::fmt::Display for Scope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scope::Posets(u) => write!(f, "posets({u})"),
            Scope::DeckGroups(u) => write!(f, "deck-groups({u})"),
            Scope::PsPosets => f.write_str("ps-posets"),
            Scope::PsIdealGroups => f.write_str("ps-posets by ideal size sequence"),
        }
    }
}

/// `Ok(None)` when the item satisfies the property, otherwise a diagnostic.
type Check = fn(&[Poset]) -> Result<Option<String>>;

/// One registry entry.
pub struct Property {
    pub id: &'static str,
    /// The claim being checked, in words.
    pub anchor: &'static str,
    pub scope: Scope,
    pub min_n: usize,
    pub default_max_n: usize,
    /// Whether the property is also run on the stored fixtures.
    pub on_fixtures: bool,
    check: Check,
}

impl std::fmt::Debug for Property {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Property")
            .field("id", &self.id)
            .field("scope", &self.scope)
            .field("min_n", &self.min_n)
            .field("default_max_n", &self.default_max_n)
            .finish()
    }
}

impl Property {
    pub fn check_item(&self, item: &[Poset]) -> Result<Option<String>> {
        (self.check)(item)
    }
}

/// A failing item: the property, the size, the canonical witnesses and a
/// diagnostic. Replaying the witnesses re-runs exactly the failing check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub property: String,
    pub n: usize,
    pub witnesses: Vec<CanonicalCert>,
    pub detail: String,
}

impl Finding {
    /// `FAIL <property-id> witnesses=<cert,...>`.
    pub fn line(&self) -> String {
        let w: Vec<String> = self.witnesses.iter().map(|c| c.to_string()).collect();
        format!("FAIL {} witnesses={}", self.property, w.join(","))
    }
}

/// Report text: one line per finding.
pub fn report(findings: &[Finding]) -> String {
    let mut s = String::new();
    for f in findings {
        let _ = writeln!(s, "{}", f.line());
    }
    s
}

/// Findings as JSON lines.
pub fn replay_text(findings: &[Finding]) -> String {
    let mut s = String::new();
    for f in findings {
        s.push_str(&serde_json::to_string(f).expect("findings serialise"));
        s.push('\n');
    }
    s
}

pub fn write_replay(path: &Path, findings: &[Finding]) -> Result<()> {
    std::fs::write(path, replay_text(findings))?;
    Ok(())
}

pub fn read_replay(path: &Path) -> Result<Vec<Finding>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| Error::Parse(format!("replay line: {e}"))))
        .collect()
}

/// Settings for a run. `min_n` below the property's own minimum is raised to it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub min_n: Option<usize>,
    pub max_n: usize,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
    pub cache_dir: Option<PathBuf>,
    pub cap: usize,
}

impl RunOptions {
    pub fn new(max_n: usize) -> Self {
        RunOptions {
            min_n: None,
            max_n,
            jobs: None,
            cache_dir: None,
            cap: DEFAULT_CAP,
        }
    }
}

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Ok(Some(format!($($arg)+)));
        }
    };
}

const fn prop(
    id: &'static str,
    anchor: &'static str,
    scope: Scope,
    min_n: usize,
    default_max_n: usize,
    on_fixtures: bool,
    check: Check,
) -> Property {
    Property {
        id,
        anchor,
        scope,
        min_n,
        default_max_n,
        on_fixtures,
        check,
    }
}

use Scope::*;
use UniverseFilter::{All, Connected};

static REGISTRY: [Property; 31] = [
    prop("inverter-soundness", "every poset is among the posets with its deck", Posets(All), 2, 7, false, inverter_soundness),
    prop("recon-conjecture", "no two nonisomorphic posets share a deck", DeckGroups(All), 3, 8, false, recon_conjecture),
    prop("kelly", "induced copies of a smaller poset are counted by the deck", Posets(All), 4, 7, false, kelly),
    prop("thm-1.2", "removing nonmaximal points of rank r: the rank decks, NTMA rank decks and extremal deck follow from the deck", Posets(Connected), 4, 8, false, thm_1_2),
    prop("thm-1.2-groups", "equal decks give equal rank decks, NTMA rank decks and extremal decks", DeckGroups(Connected), 4, 8, false, thm_1_2_groups),
    prop("lem-3.7", "neighbourhood decks by rank, ideal and filter decks and unique cover maximal decks are determined by the deck", DeckGroups(All), 4, 8, false, lem_3_7),
    prop("thm-1.3", "connected posets with a minmax pair of pseudo-similar points are reconstructible", PsPosets, 4, 9, false, thm_1_3),
    prop("lem-3.2", "Phi maps K_l onto K_h and the R_i onto the L_i; the pair restricts to K_l and K_h", PsPosets, 2, 9, true, lem_3_2),
    prop("prop-3.3", "two points of different ranks with isomorphic cards exist iff an autonomous connected subset has a minmax pair", Posets(All), 2, 8, false, prop_3_3),
    prop("thm-3.4", "equal ideal size sequences give an isomorphism matching the pairs", PsIdealGroups, 2, 9, false, thm_3_4),
    prop("lem-3.6.1", "the orbit of l under any witness enumerates the poset", PsPosets, 2, 9, true, lem_3_6_1),
    prop("lem-3.6.2", "the only minmax pair of pseudo-similar points", PsPosets, 2, 9, true, lem_3_6_2),
    prop("lem-3.6.3", "no two components of the card of l have the same size", PsPosets, 2, 9, true, lem_3_6_3),
    prop("lem-3.6.4", "the poset and the components of the card of l are rigid", PsPosets, 2, 9, true, lem_3_6_4),
    prop("lem-3.6.5", "for a non-chain, {l} and {h} are maximal proper autonomous subsets", PsPosets, 2, 9, true, lem_3_6_5),
    prop("lem-3.6.6", "for a non-chain, no third point has the card of l", PsPosets, 2, 9, true, lem_3_6_6),
    prop("lem-3.6.7", "a unique dual automorphism, interchanging l and h", PsPosets, 2, 9, true, lem_3_6_7),
    prop("lem-5.1", "with l and h cutpoints, some card has no maximal (minimal) point whose removal leaves the small components", PsPosets, 2, 9, true, lem_5_1),
    prop("lem-5.4", "up-set sizes along the orbit and the order between Phi^j(l) and Phi^(v+k)(l)", PsPosets, 2, 9, true, lem_5_4),
    prop("lem-6.1", "the modified shift is the unique isomorphism between the two cards of K_l", PsPosets, 2, 9, true, lem_6_1),
    prop("lem-6.2", "the component of l after removing a tail of A_P is largest, has a pair, and its images are the other largest components", PsPosets, 2, 9, true, lem_6_2),
    prop("lem-6.3", "A_P splits into blocks of large components permuted by Phi", PsPosets, 2, 9, true, lem_6_3),
    prop("lem-6.4", "every isomorphism between the cards of a and b sends d_a to d_b", PsPosets, 2, 9, true, lem_6_4),
    prop("cor-5.2", "extremal cards left undecided fall under the ranging exception or its dual", Posets(Connected), 4, 8, false, cor_5_2),
    prop("cor-5.2-chain", "a chain component witnessing the ranging exception is order-autonomous", Posets(Connected), 4, 8, false, cor_5_2_chain),
    prop("filter-shift", "cards flagged as not filter shifting come from maximal points only", Posets(Connected), 4, 8, false, filter_shift),
    prop("special-recon", "the special classes are recognised from the deck and rebuilt exactly", Posets(Connected), 4, 8, false, special_recon),
    prop("dismantlable", "dismantlability is recognised from the deck", Posets(Connected), 4, 8, false, dismantlable),
    prop("cor-7.1", "width 3: minimal and maximal decks are determined by the deck", DeckGroups(All), 4, 8, false, cor_7_1),
    prop("ps-generator", "the difference generator lists exactly the connected posets with a minmax pair", Posets(Connected), 2, 9, false, ps_generator),
    prop("aut-divides", "the automorphism group order divides n!", Posets(All), 1, 7, false, aut_divides),
];

pub fn registry() -> &'static [Property] {
    &REGISTRY
}

pub fn property(id: &str) -> Result<&'static Property> {
    REGISTRY
        .iter()
        .find(|p| p.id == id)
        .ok_or_else(|| Error::UnknownProperty(id.to_string()))
}

// ---------------------------------------------------------------------------
// Running

fn items(scope: Scope, n: usize, opts: &RunOptions) -> Result<Vec<Vec<Poset>>> {
    if n > opts.cap || n >= MAX_N {
        return Err(Error::CapExceeded { n, cap: opts.cap });
    }
    let dir = opts.cache_dir.as_deref();
    Ok(match scope {
        Posets(f) => universe_cached(dir, n, f, opts.cap)?
            .posets()
            .into_iter()
            .map(|p| vec![p])
            .collect(),
        DeckGroups(f) => {
            let u = universe_cached(dir, n, f, opts.cap)?;
            let groups = groups_cached(dir, &u)?;
            let posets = u.posets();
            groups
                .into_iter()
                .map(|g| g.into_iter().map(|i| posets[i]).collect())
                .collect()
        }
        PsPosets => ps_set(n).iter().map(|c| vec![c.to_poset()]).collect(),
        PsIdealGroups => {
            let mut by_seq: BTreeMap<Vec<usize>, Vec<Poset>> = BTreeMap::new();
            for c in ps_set(n).iter() {
                let p = c.to_poset();
                by_seq.entry(p.ideal_size_sequence()).or_default().push(p);
            }
            by_seq.into_values().collect()
        }
    })
}

fn evaluate(prop: &Property, n: usize, item: &[Poset]) -> Option<Finding> {
    let detail = match prop.check_item(item) {
        Ok(None) => return None,
        Ok(Some(d)) => d,
        Err(e) => format!("error: {e}"),
    };
    Some(Finding {
        property: prop.id.to_string(),
        n,
        witnesses: item.iter().map(canonical_cert).collect(),
        detail,
    })
}

/// Runs `f` on a pool of `jobs` workers, or on the global pool for `None`.
pub fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j.max(1))
                .build()
                .map_err(|e| Error::Io(format!("worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Checks a property over every item with `min_n ≤ n ≤ max_n`.
pub fn run_property_with(id: &str, opts: &RunOptions) -> Result<Vec<Finding>> {
    let prop = property(id)?;
    let lo = opts.min_n.unwrap_or(prop.min_n).max(prop.min_n);
    with_pool(opts.jobs, || {
        let mut out = Vec::new();
        for n in lo..=opts.max_n {
            let items = items(prop.scope, n, opts)?;
            let found: Vec<Option<Finding>> = items.par_iter().map(|it| evaluate(prop, n, it)).collect();
            out.extend(found.into_iter().flatten());
        }
        Ok(out)
    })?
}

pub fn run_property(id: &str, max_n: usize) -> Result<Vec<Finding>> {
    run_property_with(id, &RunOptions::new(max_n))
}

/// Re-runs the check of a finding on its witnesses; `Some` if it still fails.
pub fn replay(f: &Finding) -> Result<Option<Finding>> {
    let prop = property(&f.property)?;
    let item: Vec<Poset> = f.witnesses.iter().map(|c| c.to_poset()).collect();
    Ok(evaluate(prop, f.n, &item))
}

// ---------------------------------------------------------------------------
// Fixtures

/// Phenomena the fixtures witness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Phenomenon {
    /// A card `P∖a` with `a ∈ A_P` that has a nontrivial automorphism.
    NonrigidCard,
    /// More than one large component after removing a tail of `A_P`.
    SeveralLargeComponents,
}

impl Phenomenon {
    pub fn holds(self, p: &Poset) -> Result<bool> {
        let ps = ps_of(p)?;
        Ok(match self {
            Phenomenon::NonrigidCard => ps.a_p.iter().any(|&a| !is_rigid(&p.delete(a))),
            Phenomenon::SeveralLargeComponents => {
                (0..p.n() - ps.v).any(|k| large_components(p, &ps, k).len() > 1)
            }
        })
    }
}

/// Stored witnesses, found by [`search_fixture`]: the smallest one for the
/// nonrigid card, and the first one at each size that has any for the
/// several large components.
pub const FIXTURES: [(&str, Phenomenon, &str); 5] = [
    ("nonrigid-card-6", Phenomenon::NonrigidCard, "6:04f0"),
    ("large-components-12", Phenomenon::SeveralLargeComponents, "12:00804242155400012"),
    ("large-components-13", Phenomenon::SeveralLargeComponents, "13:01044101a62940000908"),
    ("large-components-14", Phenomenon::SeveralLargeComponents, "14:00040080201212259400000"),
    ("large-components-16", Phenomenon::SeveralLargeComponents, "16:000200100100240904a4a940000000"),
];

pub fn fixtures() -> Vec<(&'static str, Phenomenon, CanonicalCert)> {
    FIXTURES
        .iter()
        .map(|&(name, ph, c)| (name, ph, c.parse().expect("stored fixture certificates parse")))
        .collect()
}

/// First connected `n`-element poset with a minmax pair (in certificate
/// order) showing the phenomenon.
pub fn search_fixture(ph: Phenomenon, n: usize) -> Result<Option<CanonicalCert>> {
    for c in connected_ps_posets(n) {
        if ph.holds(&c.to_poset())? {
            return Ok(Some(c));
        }
    }
    Ok(None)
}

/// Runs a property on every stored fixture it applies to.
pub fn run_on_fixtures(id: &str) -> Result<Vec<Finding>> {
    let prop = property(id)?;
    if !prop.on_fixtures {
        return Ok(Vec::new());
    }
    let fx = fixtures();
    let found: Vec<Option<Finding>> = fx
        .par_iter()
        .map(|(_, _, c)| evaluate(prop, c.n(), &[c.to_poset()]))
        .collect();
    Ok(found.into_iter().flatten().collect())
}

// ---------------------------------------------------------------------------
// Shared helpers

fn ps_memo() -> &'static Mutex<HashMap<usize, Arc<Vec<CanonicalCert>>>> {
    static MEMO: OnceLock<Mutex<HashMap<usize, Arc<Vec<CanonicalCert>>>>> = OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

fn ps_set(n: usize) -> Arc<Vec<CanonicalCert>> {
    if let Some(v) = ps_memo().lock().unwrap().get(&n) {
        return Arc::clone(v);
    }
    let v = Arc::new(connected_ps_posets(n));
    ps_memo().lock().unwrap().entry(n).or_insert(v).clone()
}

fn ps_of(p: &Poset) -> Result<PsStructure> {
    ps_structure(p).ok_or_else(|| Error::Structure("no minmax pair of pseudo-similar points".into()))?
}

fn is_chain(p: &Poset) -> bool {
    p.comparable_pairs() == p.n() * p.n().saturating_sub(1) / 2
}

fn multiset(posets: impl IntoIterator<Item = Poset>) -> CertMultiset {
    let mut m = CertMultiset::new();
    for p in posets {
        *m.entry(canonical_cert(&p)).or_insert(0) += 1;
    }
    m
}

fn contains_multiset(big: &CertMultiset, small: &CertMultiset) -> bool {
    small.iter().all(|(c, k)| big.get(c).copied().unwrap_or(0) >= *k)
}

/// Whether `(a, b)` is a minmax pair of pseudo-similar points of `p[s]`.
fn is_ps_pair_within(p: &Poset, s: ElemSet, a: usize, b: usize) -> bool {
    if !s.contains(a) || !s.contains(b) || a == b {
        return false;
    }
    let q = p.subposet(s);
    let (ca, cb) = (compact_index(s, a), compact_index(s, b));
    q.minimal().contains(ca)
        && q.maximal().contains(cb)
        && canonical_cert(&q.delete(ca)) == canonical_cert(&q.delete(cb))
}

fn fmt_set(s: ElemSet) -> String {
    s.to_string()
}

// ---------------------------------------------------------------------------
// Deck level checks

fn inverter_soundness(item: &[Poset]) -> Result<Option<String>> {
    let p = &item[0];
    let certs = invert_deck_certs(&deck(p))?;
    ensure!(
        certs.contains(&canonical_cert(p)),
        "the inverter returned {} posets, none isomorphic to the source",
        certs.len()
    );
    Ok(None)
}

fn recon_conjecture(item: &[Poset]) -> Result<Option<String>> {
    ensure!(item.len() == 1, "{} nonisomorphic posets share one deck", item.len());
    Ok(None)
}

fn kelly(item: &[Poset]) -> Result<Option<String>> {
    let p = &item[0];
    let n = p.n();
    // Labelled census of all proper induced subposets.
    let mut census: HashMap<CanonicalCert, usize> = HashMap::new();
    for s in 1u32..(1 << n) - 1 {
        let c = canonical_cert(&p.subposet(ElemSet::from_bits(s as u16)));
        *census.entry(c).or_insert(0) += 1;
    }
    let d = deck(p);
    for k in 1..n {
        for c in enumerate(k, All, DEFAULT_CAP)?.certs.iter() {
            let got = kelly_count_from_deck(&c.to_poset(), &d)?;
            let want = census.get(c).copied().unwrap_or(0);
            ensure!(got == want, "pattern {c}: deck count {got}, direct count {want}");
        }
    }
    Ok(None)
}

fn labelled_rank_data(p: &Poset) -> (BTreeMap<usize, Deck>, BTreeMap<usize, Deck>, Deck) {
    let n = p.n();
    let nonempty = |prop: fn(usize) -> PointProperty, lo: usize| {
        (lo..n)
            .map(|r| (r, pi_deck(p, prop(r))))
            .filter(|(_, d)| !d.is_empty())
            .collect::<BTreeMap<usize, Deck>>()
    };
    (
        nonempty(PointProperty::NonextremalRank, 1),
        nonempty(PointProperty::NtmaRank, 0),
        pi_deck(p, PointProperty::Extremal),
    )
}

fn thm_1_2(item: &[Poset]) -> Result<Option<String>> {
    let p = &item[0];
    let report = rank_decks_report(&deck(p))?;
    let strip = |m: &BTreeMap<usize, Deck>| -> BTreeMap<usize, Deck> {
        m.iter()
            .filter(|(_, d)| !d.is_empty())
            .map(|(r, d)| (*r, d.clone()))
            .collect()
    };
    let (ranks, ntma, extremal) = labelled_rank_data(p);
    ensure!(
        strip(&report.rank_decks) == ranks,
        "rank decks differ: deck-only {:?}, labelled {:?}",
        report.rank_decks,
        ranks
    );
    ensure!(
        strip(&report.ntma_rank_decks) == ntma,
        "NTMA rank decks differ: deck-only {:?}, labelled {:?}",
        report.ntma_rank_decks,
        ntma
    );
    ensure!(
        report.extremal_deck == extremal,
        "extremal decks differ: deck-only {}, labelled {}",
        report.extremal_deck,
        extremal
    );
    Ok(None)
}

fn same_across<T: PartialEq + std::fmt::Debug>(item: &[Poset], what: &str, f: impl Fn(&Poset) -> T) -> Option<String> {
    let first = f(&item[0]);
    for (i, p) in item.iter().enumerate().skip(1) {
        if f(p) != first {
            return Some(format!("{what} differs between members 0 and {i}"));
        }
    }
    None
}

fn thm_1_2_groups(item: &[Poset]) -> Result<Option<String>> {
    Ok(same_across(item, "rank data", labelled_rank_data))
}

fn lem_3_7(item: &[Poset]) -> Result<Option<String>> {
    let n = item[0].n();
    if let Some(m) = same_across(item, "neighbourhood decks", |p| {
        (0..n).map(|k| neighborhood_deck(p, k)).collect::<Vec<_>>()
    }) {
        return Ok(Some(m));
    }
    if let Some(m) = same_across(item, "ideal deck", ideal_deck) {
        return Ok(Some(m));
    }
    if let Some(m) = same_across(item, "filter deck", filter_deck) {
        return Ok(Some(m));
    }
    if let Some(m) = same_across(item, "ideal size sequence", |p| p.ideal_size_sequence()) {
        return Ok(Some(m));
    }
    Ok(same_across(item, "unique cover maximal deck", |p| unique_cover_deck(p, false)))
}

fn cor_7_1(item: &[Poset]) -> Result<Option<String>> {
    if !item.iter().any(|p| p.width() == 3) {
        return Ok(None);
    }
    Ok(same_across(item, "minimal and maximal decks", |p| {
        (pi_deck(p, PointProperty::Minimal), pi_deck(p, PointProperty::Maximal))
    }))
}

/// Components `C` of `P∖min(P)` witnessing the ranging exception for the
/// minimal point `x`: `C` is a singleton `{l}` or has a minmax pair with
/// minimum `l`, and `x` is the unique lower cover of `l`.
fn ranging_witnesses(p: &Poset, x: usize) -> Vec<ElemSet> {
    if !p.minimal().contains(x) {
        return Vec::new();
    }
    let rest = p.ground() - p.minimal();
    let mut out = Vec::new();
    for c in p.components_within(rest) {
        let sub = p.subposet(c);
        let ok = c.iter().any(|l| {
            if p.lower_covers(l) != ElemSet::singleton(x) {
                return false;
            }
            let cl = compact_index(c, l);
            c.len() == 1 || find_minmax_ps_pairs(&sub).iter().any(|(a, _, _)| *a == cl)
        });
        if ok {
            out.push(c);
        }
    }
    out
}

/// Undecided non-NTMA extremal points with their card.
fn undecided_points(p: &Poset) -> Result<Vec<(usize, CanonicalCert)>> {
    let report = rank_decks_report(&deck(p))?;
    let candidates = p.extremal_sets().extremal - ntma_points(p);
    let mut out = Vec::new();
    for t in report.card_tags.iter().filter(|t| t.tags.contains(&CardTag::Ambiguous)) {
        for x in candidates {
            if canonical_cert(&p.delete(x)) == t.cert {
                out.push((x, t.cert));
            }
        }
    }
    Ok(out)
}

/// Ranging witnesses of `x` in `p` and in its dual, with the poset they live in.
fn witnesses_both_ways(p: &Poset, x: usize) -> Vec<(ElemSet, Poset)> {
    let dual = p.dual();
    ranging_witnesses(p, x)
        .into_iter()
        .map(|c| (c, *p))
        .chain(ranging_witnesses(&dual, x).into_iter().map(|c| (c, dual)))
        .collect()
}

fn cor_5_2(item: &[Poset]) -> Result<Option<String>> {
    let p = &item[0];
    for (x, c) in undecided_points(p)? {
        ensure!(
            !witnesses_both_ways(p, x).is_empty(),
            "card {c} is left undecided but point {x} is outside the ranging exception"
        );
    }
    Ok(None)
}

fn cor_5_2_chain(item: &[Poset]) -> Result<Option<String>> {
    let p = &item[0];
    for (x, _) in undecided_points(p)? {
        for (c, q) in witnesses_both_ways(p, x) {
            if is_chain(&q.subposet(c)) {
                ensure!(
                    is_order_autonomous(&q, c)?,
                    "ranging chain {} for point {x} is not autonomous",
                    fmt_set(c)
                );
            }
        }
    }
    Ok(None)
}

fn filter_shift(item: &[Poset]) -> Result<Option<String>> {
    let p = &item[0];
    let e = p.extremal_sets();
    for (c, _, flagged) in classify_by_filter_shift(&deck(p))? {
        if !flagged {
            continue;
        }
        for x in e.extremal {
            if canonical_cert(&p.delete(x)) != c {
                continue;
            }
            ensure!(e.max.contains(x) && !e.min.contains(x), "flagged card {c} comes from nonmaximal point {x}");
            ensure!(!filter_shifting(p, x)?, "flagged card {c} comes from filter shifting point {x}");
        }
    }
    Ok(None)
}

fn special_recon(item: &[Poset]) -> Result<Option<String>> {
    let p = &item[0];
    let got = reconstruct_special(&deck(p))?;
    let member = in_special_class(p);
    ensure!(
        got.is_some() == member,
        "recognition says {}, labelled membership says {member}",
        got.is_some()
    );
    if let Some(s) = got {
        ensure!(
            s.cert == canonical_cert(p),
            "rebuilt {} via {}, expected {}",
            s.cert,
            s.method,
            canonical_cert(p)
        );
    }
    Ok(None)
}

fn dismantlable(item: &[Poset]) -> Result<Option<String>> {
    let p = &item[0];
    let got = recognize_dismantlable(&deck(p))?;
    let want = p.is_dismantlable();
    ensure!(got == want, "deck-only answer {got}, labelled answer {want}");
    Ok(None)
}

fn ps_generator(item: &[Poset]) -> Result<Option<String>> {
    let p = &item[0];
    let listed = ps_set(p.n()).binary_search(&canonical_cert(p)).is_ok();
    let has = has_minmax_ps_pair(p);
    ensure!(listed == has, "generator lists it: {listed}, has a minmax pair: {has}");
    Ok(None)
}

fn aut_divides(item: &[Poset]) -> Result<Option<String>> {
    let p = &item[0];
    let a = automorphisms(p).len();
    let fact: usize = (1..=p.n()).product();
    ensure!(a > 0 && fact % a == 0, "{a} automorphisms do not divide {}!", p.n());
    Ok(None)
}

fn thm_1_3(item: &[Poset]) -> Result<Option<String>> {
    let p = &item[0];
    let certs = invert_deck_certs(&deck(p))?;
    ensure!(
        certs == vec![canonical_cert(p)],
        "{} posets share the deck",
        certs.len()
    );
    Ok(None)
}

fn prop_3_3(item: &[Poset]) -> Result<Option<String>> {
    let p = &item[0];
    let n = p.n();
    let ranks = p.ranks();
    let cards: Vec<CanonicalCert> = (0..n).map(|x| canonical_cert(&p.delete(x))).collect();
    let lhs = (0..n).any(|x| (0..n).any(|y| ranks[x] < ranks[y] && cards[x] == cards[y]));
    let mut rhs = None;
    for s in 1u32..1 << n {
        let s = ElemSet::from_bits(s as u16);
        if s.len() < 2 {
            continue;
        }
        let q = p.subposet(s);
        if q.is_connected() && is_order_autonomous(p, s)? && has_minmax_ps_pair(&q) {
            rhs = Some(s);
            break;
        }
    }
    ensure!(
        lhs == rhs.is_some(),
        "points of different ranks with isomorphic cards: {lhs}; autonomous connected subset with a pair: {:?}",
        rhs.map(fmt_set)
    );
    Ok(None)
}

// ---------------------------------------------------------------------------
// Pseudo-similar structure checks

fn lem_3_2(item: &[Poset]) -> Result<Option<String>> {
    let p = &item[0];
    let n = p.n();
    let ps = ps_of(p)?;
    ensure!(
        ps.phi_image(ps.k_l) == Some(ps.k_h),
        "Phi[K_l] = {:?}, K_h = {}",
        ps.phi_image(ps.k_l).map(fmt_set),
        fmt_set(ps.k_h)
    );
    ensure!(
        ps.r_parts.len() == ps.l_parts.len(),
        "{} small components on the right, {} on the left",
        ps.r_parts.len(),
        ps.l_parts.len()
    );
    let mut images = Vec::new();
    for r in &ps.r_parts {
        match ps.phi_image(*r) {
            Some(i) => images.push(i),
            None => return Ok(Some(format!("R part {} contains h", fmt_set(*r)))),
        }
    }
    images.sort();
    let mut lefts = ps.l_parts.clone();
    lefts.sort();
    ensure!(images == lefts, "Phi does not map the R parts onto the L parts");
    let pre_h = ps.phi_pow(n - 2);
    if ps.k_l.len() > 1 {
        ensure!(
            is_ps_pair_within(p, ps.k_l, ps.l, pre_h),
            "(l, Phi^-1(h)) = ({}, {pre_h}) is not a minmax pair in K_l",
            ps.l
        );
    }
    if ps.k_h.len() > 1 {
        ensure!(
            is_ps_pair_within(p, ps.k_h, ps.phi_pow(1), ps.h),
            "(Phi(l), h) = ({}, {}) is not a minmax pair in K_h",
            ps.phi_pow(1),
            ps.h
        );
    }
    Ok(None)
}

fn thm_3_4(item: &[Poset]) -> Result<Option<String>> {
    let pair = |p: &Poset| -> Result<(usize, usize)> {
        let ps = ps_of(p)?;
        Ok((ps.l, ps.h))
    };
    let p0 = &item[0];
    let (l0, h0) = pair(p0)?;
    for (i, q) in item.iter().enumerate().skip(1) {
        let (l1, h1) = pair(q)?;
        let mut found = false;
        for_each_isomorphism(p0, q, |m| {
            found = m[l0] == l1 && m[h0] == h1;
            !found
        });
        ensure!(found, "members 0 and {i} have equal ideal size sequences but no matching isomorphism");
    }
    Ok(None)
}

fn lem_3_6_1(item: &[Poset]) -> Result<Option<String>> {
    let p = &item[0];
    let ps = ps_of(p)?;
    let mut bad = None;
    for_each_card_isomorphism(p, ps.h, ps.l, |m| {
        if let Err(e) = phi_orbit(p, ps.l, m) {
            bad = Some(e.to_string());
        }
        bad.is_none()
    });
    ensure!(bad.is_none(), "a witness has a short orbit: {}", bad.unwrap_or_default());
    Ok(None)
}

fn lem_3_6_2(item: &[Poset]) -> Result<Option<String>> {
    let pairs = find_minmax_ps_pairs(&item[0]);
    ensure!(pairs.len() == 1, "{} minmax pairs", pairs.len());
    Ok(None)
}

fn lem_3_6_3(item: &[Poset]) -> Result<Option<String>> {
    let p = &item[0];
    let ps = ps_of(p)?;
    let sizes: Vec<usize> = p.components_within(p.ground().without(ps.l)).iter().map(|c| c.len()).collect();
    let distinct: BTreeSet<usize> = sizes.iter().copied().collect();
    ensure!(distinct.len() == sizes.len(), "component sizes {sizes:?} repeat");
    Ok(None)
}

fn lem_3_6_4(item: &[Poset]) -> Result<Option<String>> {
    let p = &item[0];
    let ps = ps_of(p)?;
    ensure!(is_rigid(p), "the poset has {} automorphisms", automorphisms(p).len());
    for c in p.components_within(p.ground().without(ps.l)) {
        ensure!(is_rigid(&p.subposet(c)), "component {} of the card of l is not rigid", fmt_set(c));
    }
    Ok(None)
}

fn lem_3_6_5(item: &[Poset]) -> Result<Option<String>> {
    let p = &item[0];
    if is_chain(p) {
        return Ok(None);
    }
    let ps = ps_of(p)?;
    for a in [ps.l, ps.h] {
        for y in (0..p.n()).filter(|&y| y != a) {
            let cl = autonomous_closure(p, ElemSet::singleton(a).with(y));
            ensure!(
                cl == p.ground(),
                "{} is a proper autonomous set containing {a} and {y}",
                fmt_set(cl)
            );
        }
    }
    Ok(None)
}

fn lem_3_6_6(item: &[Poset]) -> Result<Option<String>> {
    let p = &item[0];
    if is_chain(p) {
        return Ok(None);
    }
    let ps = ps_of(p)?;
    let cl = canonical_cert(&p.delete(ps.l));
    for a in (0..p.n()).filter(|&a| a != ps.l && a != ps.h) {
        ensure!(canonical_cert(&p.delete(a)) != cl, "point {a} has the card of l");
    }
    Ok(None)
}

fn lem_3_6_7(item: &[Poset]) -> Result<Option<String>> {
    let p = &item[0];
    let ps = ps_of(p)?;
    let d = dual_automorphisms(p);
    ensure!(d.len() == 1, "{} dual automorphisms", d.len());
    ensure!(
        d[0].apply(ps.l) == Some(ps.h) && d[0].apply(ps.h) == Some(ps.l),
        "the dual automorphism does not interchange l and h"
    );
    Ok(None)
}

fn lem_5_1(item: &[Poset]) -> Result<Option<String>> {
    let p = &item[0];
    let ps = ps_of(p)?;
    if !p.cutpoint_queries(ps.l).is_cutpoint || !p.cutpoint_queries(ps.h).is_cutpoint {
        return Ok(None);
    }
    let small = multiset(ps.l_parts.iter().map(|s| p.subposet(*s)));
    for top in [true, false] {
        let escapes = (0..p.n()).any(|x| {
            let card = p.delete(x);
            let ends = if top { card.maximal() } else { card.minimal() };
            !ends
                .iter()
                .any(|m| contains_multiset(&multiset(card.cutpoint_queries(m).induced_components), &small))
        });
        ensure!(
            escapes,
            "every card has a {} point whose removal leaves the small components",
            if top { "maximal" } else { "minimal" }
        );
    }
    Ok(None)
}

fn lem_5_4(item: &[Poset]) -> Result<Option<String>> {
    let p = &item[0];
    let n = p.n();
    let ps = ps_of(p)?;
    let top = n - 1 - ps.v;
    let up_l = p.up_set(ps.l).len();
    for j in 0..n {
        let same = p.up_set(ps.phi_pow(j)).len() == up_l;
        ensure!(same == (j <= top), "|up(Phi^{j}(l))| = |up(l)| is {same} with n - 1 - v = {top}");
    }
    for j in 0..=top {
        ensure!(
            p.le(ps.phi_pow(j), ps.phi_pow(ps.v + j)),
            "Phi^{j}(l) is not below Phi^(v+{j})(l)"
        );
        for k in 0..=top {
            if p.le(ps.phi_pow(j), ps.phi_pow(ps.v + k)) {
                ensure!(k <= j, "Phi^{j}(l) is below Phi^(v+{k})(l) with {k} > {j}");
            }
        }
    }
    Ok(None)
}

fn lem_6_1(item: &[Poset]) -> Result<Option<String>> {
    let p = &item[0];
    let ps = ps_of(p)?;
    if ps.k_l.len() < 2 {
        return Ok(None);
    }
    let pre_h = ps.phi_pow(p.n() - 2);
    let (from, to) = (ps.k_l.without(pre_h), ps.k_l.without(ps.l));
    let isos = isomorphisms(&p.subposet(from), &p.subposet(to));
    ensure!(isos.len() == 1, "{} isomorphisms between the two cards of K_l", isos.len());
    let hat = phi_hat(p, &ps)?;
    let targets = to.to_vec();
    for x in from {
        let want = isos[0].apply(compact_index(from, x)).map(|i| targets[i]);
        ensure!(hat.apply(x) == want, "modified shift sends {x} to {:?}, the isomorphism to {want:?}", hat.apply(x));
    }
    Ok(None)
}

fn lem_6_2(item: &[Poset]) -> Result<Option<String>> {
    let p = &item[0];
    let n = p.n();
    let ps = ps_of(p)?;
    for w in 0..n - ps.v {
        let tail: ElemSet = ps.orbit[ps.v + w..].iter().copied().collect();
        let comps = p.components_within(p.ground() - tail);
        let b = *comps
            .iter()
            .find(|c| c.contains(ps.l))
            .ok_or_else(|| Error::Structure("l was removed".into()))?;
        if b.len() > 1 {
            let sub = p.subposet(b);
            let cl = compact_index(b, ps.l);
            ensure!(
                find_minmax_ps_pairs(&sub).iter().any(|(a, _, _)| *a == cl),
                "w = {w}: the component of l has no minmax pair at l"
            );
        }
        ensure!(
            comps.iter().all(|c| c.len() <= b.len()),
            "w = {w}: a component is larger than the one of l"
        );
        let largest: BTreeSet<ElemSet> = comps.iter().copied().filter(|c| c.len() == b.len()).collect();
        let mut chain = vec![b];
        while let Some(next) = ps.phi_image(*chain.last().unwrap()) {
            if !largest.contains(&next) || chain.contains(&next) {
                break;
            }
            chain.push(next);
        }
        let chain: BTreeSet<ElemSet> = chain.into_iter().collect();
        ensure!(
            chain == largest,
            "w = {w}: {} largest components, {} of them images of the one of l",
            largest.len(),
            chain.len()
        );
    }
    Ok(None)
}

fn lem_6_3(item: &[Poset]) -> Result<Option<String>> {
    let p = &item[0];
    let n = p.n();
    let ps = ps_of(p)?;
    let part = compute_partition(p, &ps)?;
    let total = n - ps.v;
    let bp = &part.breakpoints;
    ensure!(
        bp.first() == Some(&0) && bp.last() == Some(&total) && bp.windows(2).all(|w| w[0] < w[1]),
        "breakpoints {bp:?} do not run from 0 to {total}"
    );
    ensure!(part.blocks.len() == total, "{} blocks for {total} indices", part.blocks.len());
    for seg in bp.windows(2) {
        let (k0, k1) = (seg[0], seg[1]);
        let tail: ElemSet = ps.orbit[ps.v + k0..].iter().copied().collect();
        let comps = p.components_within(p.ground() - tail);
        let size = comps.iter().map(|c| c.len()).max().unwrap_or(0);
        let largest: BTreeSet<ElemSet> = comps.into_iter().filter(|c| c.len() == size).collect();
        let blocks: BTreeSet<ElemSet> = part.blocks[k0..k1].iter().copied().collect();
        ensure!(
            blocks.len() == k1 - k0 && blocks == largest,
            "blocks {k0}..{k1} are not the large components"
        );
        for k in k0..k1 {
            ensure!(part.blocks[k].contains(ps.phi_pow(k)), "Phi^{k}(l) is not in B_{k}");
            if k + 1 < k1 {
                ensure!(
                    ps.phi_image(part.blocks[k]) == Some(part.blocks[k + 1]),
                    "Phi[B_{k}] is not B_{}",
                    k + 1
                );
            }
        }
    }
    Ok(None)
}

fn lem_6_4(item: &[Poset]) -> Result<Option<String>> {
    let p = &item[0];
    let ps = ps_of(p)?;
    let up_l = p.up_set(ps.l).len();
    let qualifies = |a: usize| p.below(a).iter().filter(|&y| p.up_set(y).len() == up_l).count() == 1;
    let chosen: Vec<usize> = ps.a_p.iter().copied().filter(|&a| qualifies(a)).collect();
    for &a in &chosen {
        for &b in &chosen {
            let (Some(da), Some(db)) = (ps.d_of(a), ps.d_of(b)) else {
                return Err(Error::Structure(format!("d is undefined on {a} or {b}")));
            };
            let mut bad = None;
            for_each_card_isomorphism(p, a, b, |m| {
                if m.apply(da) != Some(db) {
                    bad = m.apply(da);
                }
                bad.is_none()
            });
            ensure!(bad.is_none(), "an isomorphism of the cards of {a} and {b} sends d_a = {da} to {bad:?}, d_b = {db}");
        }
    }
    Ok(None)
}
