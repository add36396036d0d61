//! On-disk cache of universes and deck-group indexes.
//!
//! One text file per `(kind, n, filter, format version)`. The header records
//! the key, the entry count and a SHA-256 of the body; the body holds one
//! certificate (or one group of universe indices) per line.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::canonical::CanonicalCert;
use crate::deck::deck_groups;
use crate::enumerate::{enumerate, Universe, UniverseFilter};
use crate::error::{Error, Result};

/// Bumped whenever the file layout or the certificate encoding changes.
pub const FORMAT_VERSION: u32 = 1;

/// Environment variable naming the default cache directory.
pub const CACHE_ENV: &str = "ORDRECON_CACHE";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CacheKind {
    Universe,
    Groups,
}

impl CacheKind {
    fn name(self) -> &'static str {
        match self {
            CacheKind::Universe => "universe",
            CacheKind::Groups => "groups",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CacheKey {
    pub kind: CacheKind,
    pub n: usize,
    pub filter: UniverseFilter,
    pub version: u32,
}

impl CacheKey {
    pub fn new(kind: CacheKind, n: usize, filter: UniverseFilter) -> Self {
        CacheKey {
            kind,
            n,
            filter,
            version: FORMAT_VERSION,
        }
    }

    pub fn file_name(&self) -> String {
        format!("{}-v{}-n{}-{}.txt", self.kind.name(), self.version, self.n, self.filter)
    }

    pub fn path(&self, dir: &Path) -> PathBuf {
        dir.join(self.file_name())
    }

    fn header(&self, count: usize) -> String {
        format!(
            "ordrecon-cache kind={} version={} n={} filter={} count={count}",
            self.kind.name(),
            self.version,
            self.n,
            self.filter
        )
    }
}

fn digest(body: &str) -> String {
    hex::encode(Sha256::digest(body.as_bytes()))
}

fn write_entry(dir: &Path, key: CacheKey, count: usize, body: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = key.path(dir);
    let text = format!("{}\nsha256={}\n{body}", key.header(count), digest(body));
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text)?;
    fs::rename(&tmp, &path)?;
    Ok(path)
}

/// Body lines of a cache entry; `None` when the file is absent or was
/// written under another key.
fn read_entry(dir: &Path, key: CacheKey) -> Result<Option<Vec<String>>> {
    let path = key.path(dir);
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let corrupt = |why: &str| Error::CacheCorrupt(format!("{}: {why}", path.display()));
    let mut parts = text.splitn(3, '\n');
    let header = parts.next().unwrap_or_default();
    let sum_line = parts.next().ok_or_else(|| corrupt("missing checksum line"))?;
    let body = parts.next().unwrap_or_default();
    let mut fields = header.split_whitespace();
    if fields.next() != Some("ordrecon-cache") {
        return Err(corrupt("bad header"));
    }
    let count_field = header
        .rsplit_once(" count=")
        .ok_or_else(|| corrupt("header lacks a count"))?;
    if count_field.0 != key.header(0).rsplit_once(" count=").unwrap().0 {
        return Ok(None);
    }
    let count: usize = count_field.1.parse().map_err(|_| corrupt("unreadable count"))?;
    let sum = sum_line
        .strip_prefix("sha256=")
        .ok_or_else(|| corrupt("missing checksum line"))?;
    if sum != digest(body) {
        return Err(corrupt("checksum mismatch"));
    }
    let lines: Vec<String> = body.lines().map(str::to_string).collect();
    if lines.len() != count {
        return Err(corrupt("entry count differs from header"));
    }
    Ok(Some(lines))
}

/// Writes a universe under an explicit format version.
pub fn save_universe_as(dir: &Path, u: &Universe, version: u32) -> Result<PathBuf> {
    let key = CacheKey {
        version,
        ..CacheKey::new(CacheKind::Universe, u.n, u.filter)
    };
    let mut body = String::new();
    for c in u.certs.iter() {
        body.push_str(&c.to_string());
        body.push('\n');
    }
    write_entry(dir, key, u.len(), &body)
}

pub fn save_universe(dir: &Path, u: &Universe) -> Result<PathBuf> {
    save_universe_as(dir, u, FORMAT_VERSION)
}

pub fn load_universe(dir: &Path, n: usize, filter: UniverseFilter) -> Result<Option<Universe>> {
    let key = CacheKey::new(CacheKind::Universe, n, filter);
    let Some(lines) = read_entry(dir, key)? else {
        return Ok(None);
    };
    let mut certs = Vec::with_capacity(lines.len());
    for line in &lines {
        let c: CanonicalCert = line
            .parse()
            .map_err(|e| Error::CacheCorrupt(format!("{}: {e}", key.file_name())))?;
        if c.n() != n {
            return Err(Error::CacheCorrupt(format!("{}: entry {c} has the wrong size", key.file_name())));
        }
        certs.push(c);
    }
    if certs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::CacheCorrupt(format!("{}: entries are not sorted", key.file_name())));
    }
    Ok(Some(Universe {
        n,
        filter,
        certs: Arc::new(certs),
    }))
}

/// Loads the universe from `dir` if present, otherwise enumerates it and
/// stores it there. Without a directory this is plain enumeration.
pub fn universe_cached(dir: Option<&Path>, n: usize, filter: UniverseFilter, cap: usize) -> Result<Universe> {
    let Some(dir) = dir else {
        return enumerate(n, filter, cap);
    };
    if n == 0 || n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    if let Some(u) = load_universe(dir, n, filter)? {
        return Ok(u);
    }
    let u = enumerate(n, filter, cap)?;
    save_universe(dir, &u)?;
    Ok(u)
}

pub fn save_groups(dir: &Path, n: usize, filter: UniverseFilter, groups: &[Vec<usize>]) -> Result<PathBuf> {
    let key = CacheKey::new(CacheKind::Groups, n, filter);
    let mut body = String::new();
    for g in groups {
        let line: Vec<String> = g.iter().map(|i| i.to_string()).collect();
        body.push_str(&line.join(" "));
        body.push('\n');
    }
    write_entry(dir, key, groups.len(), &body)
}

pub fn load_groups(dir: &Path, n: usize, filter: UniverseFilter) -> Result<Option<Vec<Vec<usize>>>> {
    let key = CacheKey::new(CacheKind::Groups, n, filter);
    let Some(lines) = read_entry(dir, key)? else {
        return Ok(None);
    };
    lines
        .iter()
        .map(|l| {
            l.split_whitespace()
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|_| Error::CacheCorrupt(format!("{}: bad index `{t}`", key.file_name())))
                })
                .collect()
        })
        .collect::<Result<Vec<Vec<usize>>>>()
        .map(Some)
}

/// Deck groups of a universe, through the cache when a directory is given.
/// Group members are indices into `u.certs`.
pub fn groups_cached(dir: Option<&Path>, u: &Universe) -> Result<Vec<Vec<usize>>> {
    if let Some(dir) = dir {
        if let Some(g) = load_groups(dir, u.n, u.filter)? {
            if g.iter().flatten().all(|&i| i < u.len()) && g.iter().map(Vec::len).sum::<usize>() == u.len() {
                return Ok(g);
            }
            return Err(Error::CacheCorrupt(format!(
                "{}: groups do not partition the universe",
                CacheKey::new(CacheKind::Groups, u.n, u.filter).file_name()
            )));
        }
    }
    let groups = deck_groups(u.n, &u.posets());
    if let Some(dir) = dir {
        save_groups(dir, u.n, u.filter, &groups)?;
    }
    Ok(groups)
}

/// Cache directory from the environment, if set and nonempty.
pub fn env_cache_dir() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
}
