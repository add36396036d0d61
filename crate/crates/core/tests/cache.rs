use std::fs;

use ordrecon_core::cache::{
    groups_cached, load_groups, load_universe, save_universe, save_universe_as, universe_cached, CacheKey,
    CacheKind, FORMAT_VERSION,
};
use ordrecon_core::enumerate::DEFAULT_CAP;
use ordrecon_core::{enumerate, Error, UniverseFilter};

#[test]
fn save_then_load_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    let u = enumerate(6, UniverseFilter::All, DEFAULT_CAP).unwrap();
    save_universe(dir.path(), &u).unwrap();
    let back = load_universe(dir.path(), 6, UniverseFilter::All).unwrap().unwrap();
    assert_eq!(back, u);
    assert_eq!(load_universe(dir.path(), 6, UniverseFilter::Connected).unwrap(), None);
}

#[test]
fn tampered_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let u = enumerate(5, UniverseFilter::Connected, DEFAULT_CAP).unwrap();
    let path = save_universe(dir.path(), &u).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let last = text.trim_end().lines().last().unwrap().to_string();
    let swapped = last.replace(':', ":0");
    fs::write(&path, text.replace(&last, &swapped)).unwrap();
    assert!(matches!(
        load_universe(dir.path(), 5, UniverseFilter::Connected),
        Err(Error::CacheCorrupt(_))
    ));
    assert!(matches!(
        universe_cached(Some(dir.path()), 5, UniverseFilter::Connected, DEFAULT_CAP),
        Err(Error::CacheCorrupt(_))
    ));
}

#[test]
fn truncated_body_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let u = enumerate(4, UniverseFilter::All, DEFAULT_CAP).unwrap();
    let path = save_universe(dir.path(), &u).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    fs::write(&path, &text[..text.len() - 6]).unwrap();
    assert!(matches!(
        load_universe(dir.path(), 4, UniverseFilter::All),
        Err(Error::CacheCorrupt(_))
    ));
}

#[test]
fn version_bump_is_a_miss_and_regenerates() {
    let dir = tempfile::tempdir().unwrap();
    let u = enumerate(5, UniverseFilter::All, DEFAULT_CAP).unwrap();
    let old = save_universe_as(dir.path(), &u, FORMAT_VERSION + 1).unwrap();
    assert!(old.exists());
    assert_eq!(load_universe(dir.path(), 5, UniverseFilter::All).unwrap(), None);
    let got = universe_cached(Some(dir.path()), 5, UniverseFilter::All, DEFAULT_CAP).unwrap();
    assert_eq!(got, u);
    let current = CacheKey::new(CacheKind::Universe, 5, UniverseFilter::All).path(dir.path());
    assert!(current.exists());

    // an old-version header under the current file name is also a miss
    let text = fs::read_to_string(&current).unwrap();
    let stale = text.replacen(&format!("version={FORMAT_VERSION}"), "version=0", 1);
    fs::write(&current, stale).unwrap();
    assert_eq!(load_universe(dir.path(), 5, UniverseFilter::All).unwrap(), None);
}

#[test]
fn deck_groups_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let u = enumerate(3, UniverseFilter::All, DEFAULT_CAP).unwrap();
    let first = groups_cached(Some(dir.path()), &u).unwrap();
    assert_eq!(first.len(), 4);
    assert_eq!(load_groups(dir.path(), 3, UniverseFilter::All).unwrap(), Some(first.clone()));
    assert_eq!(groups_cached(Some(dir.path()), &u).unwrap(), first);
}

#[test]
fn cap_applies_with_a_cache() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        universe_cached(Some(dir.path()), 10, UniverseFilter::All, DEFAULT_CAP),
        Err(Error::CapExceeded { n: 10, cap: 9 })
    );
}
