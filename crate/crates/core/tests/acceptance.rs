//! Acceptance harness: one PASS/FAIL line per criterion.

use std::process::ExitCode;
use std::time::Instant;

use uqsl2::suites::{self, Context, Suite, SuiteReport};

struct Criterion {
    id: usize,
    name: &'static str,
    ps: &'static [usize],
    run: fn(&Context) -> Vec<SuiteReport>,
}

const CRITERIA: [Criterion; 8] = [
    Criterion { id: 1, name: "Hopf axioms, pivot, coproduct formula", ps: &[2, 3, 4, 5], run: |c| vec![suites::hopf(&c.uq)] },
    Criterion { id: 2, name: "ribbon structure and factorizability", ps: &[2, 3, 4, 5], run: |c| vec![suites::ribbon(c)] },
    Criterion { id: 3, name: "center and GTA basis", ps: &[2, 3, 4, 5], run: |c| vec![suites::center(c), suites::gta(c)] },
    Criterion { id: 4, name: "Drinfeld map on SLF", ps: &[2, 3, 4, 5], run: |c| vec![suites::drinfeld(c)] },
    Criterion { id: 5, name: "handle representation and Wilson loops", ps: &[2, 3, 4, 5], run: |c| vec![suites::handle(c), suites::wilson(c)] },
    Criterion { id: 6, name: "SL2(Z) action and Lyubashenko-Majid", ps: &[2, 3, 4, 5], run: |c| vec![suites::sl2z(c), suites::lm(c)] },
    Criterion { id: 7, name: "skein module of the solid torus", ps: &[2, 3, 4, 5], run: |c| vec![suites::skein(c)] },
    Criterion { id: 8, name: "genus two", ps: &[2], run: |c| vec![c.run(Suite::Genus2)] },
];

fn main() -> ExitCode {
    let mut contexts: Vec<(usize, Context)> = Vec::new();
    let mut all_pass = true;
    for crit in &CRITERIA {
        let start = Instant::now();
        let mut failures = Vec::new();
        let mut checks = 0;
        for &p in crit.ps {
            if !contexts.iter().any(|(q, _)| *q == p) {
                match Context::new(p) {
                    Ok(c) => contexts.push((p, c)),
                    Err(e) => {
                        failures.push(format!("p={p}: setup: {e}"));
                        continue;
                    }
                }
            }
            let ctx = &contexts.iter().find(|(q, _)| *q == p).expect("context built").1;
            for r in (crit.run)(ctx) {
                checks += r.checks.len();
                if r.checks.is_empty() {
                    failures.push(format!("p={p} {}: no checks ran", r.suite));
                }
                for f in r.failures() {
                    failures.push(format!(
                        "p={p} {}: {}{}",
                        r.suite,
                        f.name,
                        if f.data.is_null() { String::new() } else { format!(" ({})", f.data) }
                    ));
                }
            }
        }
        let ps: Vec<String> = crit.ps.iter().map(|p| p.to_string()).collect();
        let status = if failures.is_empty() { "PASS" } else { "FAIL" };
        println!("criterion {}: {status} {} [p={}; {checks} checks; {:.1}s]", crit.id, crit.name, ps.join(","), start.elapsed().as_secs_f64());
        for f in &failures {
            println!("    {f}");
        }
        all_pass &= failures.is_empty();
    }
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
