use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ordrecon_core::cache::{universe_cached, CACHE_ENV};
use ordrecon_core::deck::{deck, invert_deck_certs};
use ordrecon_core::enumerate::DEFAULT_CAP;
use ordrecon_core::pseudo_similar::{connected_ps_posets, has_minmax_ps_pair, ps_structure};
use ordrecon_core::recon::{classify_by_filter_shift, rank_decks_report, reconstruct};
use ordrecon_core::verify::{
    self, fixtures, read_replay, registry, replay, run_on_fixtures, run_property_with, search_fixture, with_pool,
    write_replay, Finding, Phenomenon, RunOptions,
};
use ordrecon_core::{CanonicalCert, Deck, Error, Poset, UniverseFilter};

#[derive(Parser)]
#[command(name = "ordrecon", version, about = "Finite poset reconstruction workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate all posets of one size up to isomorphism.
    Enumerate {
        #[arg(short = 'n')]
        n: usize,
        #[arg(long, default_value = "all")]
        filter: UniverseFilter,
        /// Cache directory for universes and deck groups.
        #[arg(long, env = CACHE_ENV)]
        cache: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
        #[arg(long)]
        jobs: Option<usize>,
        /// Print every certificate, not only the count.
        #[arg(long)]
        list: bool,
    },
    /// Run a registered property exhaustively, or replay earlier findings.
    Check {
        #[arg(long, required_unless_present = "replay")]
        property: Option<String>,
        /// Largest size checked; defaults to the property's own limit.
        #[arg(long)]
        max_n: Option<usize>,
        #[arg(long)]
        min_n: Option<usize>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, env = CACHE_ENV)]
        cache: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
        /// Also run the property on the stored fixtures.
        #[arg(long)]
        fixtures: bool,
        /// Where findings are written as JSON lines.
        #[arg(long)]
        replay_file: Option<PathBuf>,
        /// Re-run the findings stored in a replay file.
        #[arg(long, conflicts_with = "property")]
        replay: Option<PathBuf>,
        /// Print the diagnostic of each finding after its line.
        #[arg(long, short)]
        verbose: bool,
    },
    /// Print the deck of a poset.
    Deck {
        #[arg(long)]
        poset: PathBuf,
    },
    /// List every poset (up to isomorphism) with the given deck.
    Invert {
        #[arg(long)]
        deck: PathBuf,
        /// Print each poset in the text format as well.
        #[arg(long)]
        text: bool,
    },
    /// List the connected posets with a minmax pair of pseudo-similar points.
    FindPseudosimilar {
        #[arg(long)]
        max_n: usize,
        #[arg(long, default_value_t = 2)]
        min_n: usize,
        /// Use the difference generator instead of filtering the enumeration
        /// (reaches sizes beyond the enumeration cap).
        #[arg(long)]
        generator: bool,
        #[arg(long, env = CACHE_ENV)]
        cache: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Deck-only analysis: card tags, rank decks and special-class reconstruction.
    Reconstruct {
        #[arg(long)]
        deck: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Card tags and the filter shifting flags of the extremal cards.
    Classify {
        #[arg(long)]
        deck: PathBuf,
    },
    /// Show the property registry.
    ListProperties,
    /// Show the stored fixtures, or search for new ones.
    Fixtures {
        /// Search connected posets with a minmax pair up to this size.
        #[arg(long)]
        search: Option<usize>,
    },
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// A poset file holds either the text format or a single certificate.
fn read_poset(path: &Path) -> Result<Poset, Error> {
    let text = read(path)?;
    let t = text.trim();
    if t.contains(':') && !t.contains('<') && t.lines().count() == 1 {
        return Ok(t.parse::<CanonicalCert>()?.to_poset());
    }
    Poset::parse_text(&text)
}

fn read_deck(path: &Path) -> Result<Deck, Error> {
    read(path)?.parse()
}

fn print_findings(findings: &[Finding], verbose: bool) {
    for f in findings {
        println!("{}", f.line());
        if verbose {
            println!("  n={} {}", f.n, f.detail);
        }
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Enumerate {
            n,
            filter,
            cache,
            cap,
            jobs,
            list,
        } => {
            let u = with_pool(jobs, || universe_cached(cache.as_deref(), n, filter, cap))??;
            println!("n={n} filter={filter} count={}", u.len());
            if list {
                for c in u.certs.iter() {
                    println!("{c}");
                }
            }
            Ok(true)
        }
        Command::Check {
            property,
            max_n,
            min_n,
            jobs,
            cache,
            cap,
            fixtures,
            replay_file,
            replay: replay_from,
            verbose,
        } => {
            if let Some(path) = replay_from {
                let mut still = Vec::new();
                for f in read_replay(&path)? {
                    if let Some(again) = replay(&f)? {
                        still.push(again);
                    }
                }
                print_findings(&still, verbose);
                eprintln!("replayed {}: {} still failing", path.display(), still.len());
                return Ok(still.is_empty());
            }
            let id = property.expect("clap requires a property without --replay");
            let prop = verify::property(&id)?;
            let opts = RunOptions {
                min_n,
                max_n: max_n.unwrap_or(prop.default_max_n),
                jobs,
                cache_dir: cache,
                cap,
            };
            let mut findings = run_property_with(&id, &opts)?;
            if fixtures {
                findings.extend(with_pool(jobs, || run_on_fixtures(&id))??);
            }
            print_findings(&findings, verbose);
            let lo = opts.min_n.unwrap_or(prop.min_n).max(prop.min_n);
            eprintln!("{id}: n={lo}..={} findings={}", opts.max_n, findings.len());
            if findings.is_empty() {
                return Ok(true);
            }
            let path = replay_file.unwrap_or_else(|| PathBuf::from(format!("ordrecon-{id}.replay.jsonl")));
            write_replay(&path, &findings)?;
            eprintln!("replay file: {}", path.display());
            Ok(false)
        }
        Command::Deck { poset } => {
            print!("{}", deck(&read_poset(&poset)?).to_text());
            Ok(true)
        }
        Command::Invert { deck, text } => {
            for c in invert_deck_certs(&read_deck(&deck)?)? {
                println!("{c}");
                if text {
                    print!("{}", c.to_poset().to_text());
                }
            }
            Ok(true)
        }
        Command::FindPseudosimilar {
            max_n,
            min_n,
            generator,
            cache,
            cap,
        } => {
            for n in min_n.max(2)..=max_n {
                let certs: Vec<CanonicalCert> = if generator {
                    connected_ps_posets(n)
                } else {
                    universe_cached(cache.as_deref(), n, UniverseFilter::Connected, cap)?
                        .certs
                        .iter()
                        .filter(|c| has_minmax_ps_pair(&c.to_poset()))
                        .copied()
                        .collect()
                };
                for c in &certs {
                    let p = c.to_poset();
                    let ps = ps_structure(&p).expect("listed posets have a pair")?;
                    println!("{c} l={} h={} v={} a_p={:?}", ps.l, ps.h, ps.v, ps.a_p);
                }
                eprintln!("n={n}: {}", certs.len());
            }
            Ok(true)
        }
        Command::Reconstruct { deck, json } => {
            let report = reconstruct(&read_deck(&deck)?)?;
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))?
                );
            } else {
                print!("{}", report.to_text());
            }
            Ok(true)
        }
        Command::Classify { deck } => {
            let d = read_deck(&deck)?;
            for t in rank_decks_report(&d)?.card_tags {
                let tags: Vec<String> = t.tags.iter().map(|x| x.to_string()).collect();
                println!("card {} x{} {}", t.cert, t.multiplicity, tags.join(","));
            }
            for (c, k, flagged) in classify_by_filter_shift(&d)? {
                let how = if flagged { "maximal (not filter shifting)" } else { "undecided" };
                println!("extremal {c} x{k} {how}");
            }
            Ok(true)
        }
        Command::ListProperties => {
            for p in registry() {
                println!(
                    "{}\t{}\tn={}..={}{}\t{}",
                    p.id,
                    p.scope,
                    p.min_n,
                    p.default_max_n,
                    if p.on_fixtures { " +fixtures" } else { "" },
                    p.anchor
                );
            }
            Ok(true)
        }
        Command::Fixtures { search } => {
            match search {
                None => {
                    for (name, ph, c) in fixtures() {
                        let holds = ph.holds(&c.to_poset())?;
                        println!("{name} {ph:?} {c} holds={holds}");
                    }
                }
                Some(max_n) => {
                    for ph in [Phenomenon::NonrigidCard, Phenomenon::SeveralLargeComponents] {
                        for n in 2..=max_n {
                            if let Some(c) = search_fixture(ph, n)? {
                                println!("{ph:?} n={n} {c}");
                            }
                        }
                    }
                }
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
