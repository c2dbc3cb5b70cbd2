//! Acceptance run: one PASS/FAIL line per criterion, followed by the
//! individual checks. Criteria can be selected by id, e.g.
//! `cargo test --test acceptance -- AC3 AC8`.

use std::time::Instant;

use slelab_core::observables::Report;
use slelab_core::stats::Verdict;
use slelab_core::verify::{self, Budget, Model};
use slelab_core::Result;

const SEED: u64 = 20_240_601;

struct Criterion {
    id: &'static str,
    title: &'static str,
    limit_secs: f64,
    run: fn() -> Result<Report>,
}

const CRITERIA: &[Criterion] = &[
    Criterion { id: "AC1", title: "exact-oracle suite", limit_secs: 60.0, run: || verify::oracles(Budget::Full, SEED) },
    Criterion { id: "AC2", title: "Wilson correctness", limit_secs: 60.0, run: || verify::wilson(Budget::Full, SEED) },
    Criterion {
        id: "AC3",
        title: "Peano bijection suite",
        limit_secs: 60.0,
        run: || verify::bijection(&verify::bijection_config()?, 200),
    },
    Criterion { id: "AC4", title: "Loewner pipeline calibration", limit_secs: 120.0, run: || verify::loewner(Budget::Full, SEED) },
    Criterion {
        id: "AC5",
        title: "LERW key estimate",
        limit_secs: 600.0,
        run: || verify::keyestimate(Model::Lerw, Budget::Full, SEED),
    },
    Criterion {
        id: "AC6",
        title: "LERW driving convergence",
        limit_secs: 1800.0,
        run: || verify::convergence(Model::Lerw, Budget::Full, SEED),
    },
    Criterion {
        id: "AC7",
        title: "Peano driving convergence",
        limit_secs: 2700.0,
        run: || verify::convergence(Model::Peano, Budget::Full, SEED),
    },
    Criterion { id: "AC8", title: "harmonic suite", limit_secs: 300.0, run: || verify::harmonic(Budget::Full) },
    Criterion { id: "AC9", title: "potential-kernel suite", limit_secs: 120.0, run: || verify::potential(Budget::Full) },
    Criterion { id: "AC10", title: "Green's function bounds", limit_secs: 60.0, run: || verify::green_band(SEED) },
];

fn main() {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| a.starts_with("AC")).collect();
    let mut passed = 0;
    let mut total = 0;
    for c in CRITERIA {
        if !filter.is_empty() && !filter.iter().any(|f| f == c.id) {
            continue;
        }
        total += 1;
        let start = Instant::now();
        let out = (c.run)();
        let secs = start.elapsed().as_secs_f64();
        let timing = format!("{secs:.1} s, limit {:.0} s", c.limit_secs);
        match out {
            Ok(rep) => {
                let v = rep.verdict();
                let ok = v == Verdict::Pass && secs <= c.limit_secs;
                passed += ok as usize;
                let why = match (v, secs <= c.limit_secs) {
                    (Verdict::Pass, true) => String::new(),
                    (Verdict::Pass, false) => " [over time limit]".into(),
                    (Verdict::Inconclusive, _) => " [inconclusive]".into(),
                    (Verdict::Fail, _) => String::new(),
                };
                println!("{} {} {} ({timing}){why}", if ok { "PASS" } else { "FAIL" }, c.id, c.title);
                for e in &rep.entries {
                    let se = e.stderr.map(|s| format!(" se={s:.3e}")).unwrap_or_default();
                    let p = e.p_value.map(|p| format!(" p={p:.3e}")).unwrap_or_default();
                    println!(
                        "    {:<12} {}: {:.6}{se}{p} [{}]",
                        format!("{:?}", e.verdict).to_lowercase(),
                        e.test,
                        e.estimate,
                        e.criterion
                    );
                }
                for n in &rep.notes {
                    println!("    note: {n}");
                }
            }
            Err(e) => println!("FAIL {} {} ({timing}): error: {e}", c.id, c.title),
        }
    }
    println!("acceptance: {passed}/{total} criteria passed");
}
