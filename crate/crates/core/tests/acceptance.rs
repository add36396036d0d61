//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs without the test harness.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::naive_universe;
use ordrecon_core::enumerate::{enumerate_by_maximal_extension, DEFAULT_CAP};
use ordrecon_core::verify::{
    fixtures, replay_text, report, run_on_fixtures, run_property, run_property_with, search_fixture, Finding,
    Phenomenon, RunOptions,
};
use ordrecon_core::{canonical_cert, enumerate, Poset, UniverseFilter};

type Outcome = Result<String, String>;

fn clean(ids: &[&str], max_n: usize) -> Outcome {
    let mut counts = Vec::new();
    for id in ids {
        let found = run_property(id, max_n).map_err(|e| format!("{id}: {e}"))?;
        if let Some(f) = found.first() {
            return Err(format!("{id}: {} findings, first {}", found.len(), f.line()));
        }
        counts.push(format!("{id}=0"));
    }
    Ok(counts.join(" "))
}

fn c1_enumeration() -> Outcome {
    const COUNTS: [usize; 8] = [1, 2, 5, 16, 63, 318, 2045, 16999];
    for n in 1..=8 {
        let u = enumerate(n, UniverseFilter::All, DEFAULT_CAP).map_err(|e| e.to_string())?;
        if u.len() != COUNTS[n - 1] {
            return Err(format!("n={n}: {} posets, expected {}", u.len(), COUNTS[n - 1]));
        }
        if n <= 6 {
            let (classes, certs) = naive_universe(n);
            if classes != u.len() || certs != *u.certs {
                return Err(format!("n={n}: naive oracle finds {classes} classes"));
            }
        } else if enumerate_by_maximal_extension(n) != *u.certs {
            return Err(format!("n={n}: the two extension strategies differ"));
        }
    }
    Ok("counts 1..8 match; naive oracle n<=6; strategies agree n=7,8".into())
}

fn c2_reconstruction() -> Outcome {
    let found = run_property("recon-conjecture", 8).map_err(|e| e.to_string())?;
    let v = canonical_cert(&Poset::from_cover_pairs(3, &[(0, 1), (0, 2)]).unwrap());
    let lambda = canonical_cert(&Poset::from_cover_pairs(3, &[(0, 2), (1, 2)]).unwrap());
    match found.as_slice() {
        [f] if f.n == 3 && f.witnesses.len() == 2 && f.witnesses.contains(&v) && f.witnesses.contains(&lambda) => {
            Ok("deck groups singletons for 4<=n<=8; {V, Lambda} shares a deck at n=3".into())
        }
        _ => Err(format!("{} findings: {}", found.len(), report(&found).trim())),
    }
}

fn c6_structure() -> Outcome {
    let ids = [
        "lem-3.2", "lem-3.6.1", "lem-3.6.2", "lem-3.6.3", "lem-3.6.4", "lem-3.6.5", "lem-3.6.6", "lem-3.6.7",
        "prop-3.3", "thm-3.4", "lem-5.1", "lem-5.4", "lem-6.1", "lem-6.2", "lem-6.3", "lem-6.4",
    ];
    let mut problems = Vec::new();
    for id in &ids {
        let max_n = if *id == "prop-3.3" { 8 } else { 9 };
        match run_property(id, max_n) {
            Ok(f) if f.is_empty() => {}
            Ok(f) => problems.push(format!("{id}: {} findings up to n={max_n}", f.len())),
            Err(e) => problems.push(format!("{id}: {e}")),
        }
    }
    for (name, ph, cert) in fixtures() {
        match search_fixture(ph, cert.n()) {
            Ok(Some(c)) if c == cert => {}
            other => problems.push(format!("fixture {name} not reproduced by search: {other:?}")),
        }
    }
    for ph in [Phenomenon::NonrigidCard, Phenomenon::SeveralLargeComponents] {
        if !fixtures().iter().any(|(_, p, _)| *p == ph) {
            problems.push(format!("no fixture for {ph:?}"));
        }
    }
    let mut on_fixtures: Vec<Finding> = Vec::new();
    for id in &ids {
        match run_on_fixtures(id) {
            Ok(f) => on_fixtures.extend(f),
            Err(e) => problems.push(format!("{id} on fixtures: {e}")),
        }
    }
    for f in &on_fixtures {
        problems.push(format!("on fixture: {}", f.line()));
    }
    if problems.is_empty() {
        Ok(format!("{} properties clean over ps-posets n<=9 and {} fixtures", ids.len(), fixtures().len()))
    } else {
        Err(problems.join("; "))
    }
}

fn c9_determinism() -> Outcome {
    for id in ["recon-conjecture", "cor-5.2-chain", "thm-1.2"] {
        let runs: Vec<Vec<Finding>> = [1, 2, 4]
            .iter()
            .map(|&j| {
                let mut o = RunOptions::new(7);
                o.jobs = Some(j);
                run_property_with(id, &o)
            })
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        for r in &runs[1..] {
            if report(r) != report(&runs[0]) || replay_text(r) != replay_text(&runs[0]) {
                return Err(format!("{id}: output depends on the worker count"));
            }
        }
    }
    Ok("reports and replay files identical for 1, 2 and 4 workers".into())
}

fn main() -> ExitCode {
    type Check = fn() -> Outcome;
    let criteria: [(&str, Check); 9] = [
        ("enumeration", c1_enumeration),
        ("reconstruction-baseline", c2_reconstruction),
        ("rank-decks", || clean(&["thm-1.2", "thm-1.2-groups"], 8)),
        ("pseudo-similar-reconstruction", || clean(&["thm-1.3"], 9)),
        ("kelly", || clean(&["kelly"], 7)),
        ("structure-suites", c6_structure),
        ("dismantlable-and-width-3", || clean(&["dismantlable", "cor-7.1"], 8)),
        ("inverter-soundness", || clean(&["inverter-soundness"], 7)),
        ("determinism", c9_determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS criterion-{} {name} ({secs:.1}s): {msg}", k + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion-{} {name} ({secs:.1}s): {msg}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
