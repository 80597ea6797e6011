//! Acceptance run: one line per criterion, nonzero exit on any failure.
//!
//! Runtime budgets are reported next to the measured time but do not decide pass/fail.

use std::process::ExitCode;
use std::time::Instant;

use maslov_core::suites::*;

struct Criterion {
    id: usize,
    name: &'static str,
    budget: Option<f64>,
    run: fn() -> Vec<SuiteOutcome>,
}

fn one(o: SuiteOutcome) -> Vec<SuiteOutcome> {
    vec![o]
}

const CRITERIA: &[Criterion] = &[
    Criterion { id: 1, name: "-sf equals Maslov index on random periodic systems", budget: Some(120.0), run: || one(theorem_suite(1, 20)) },
    Criterion { id: 2, name: "rotation family: mu = 2, sf = -2", budget: None, run: || one(rotation_case()) },
    Criterion { id: 3, name: "cogredient invariance", budget: Some(10.0), run: || one(cogredient_suite(3, 100)) },
    Criterion { id: 4, name: "F-group decomposition and even hatF parity", budget: Some(30.0), run: || one(decomposition_suite(4, 50)) },
    Criterion { id: 5, name: "g = diag(2, 1/2) half-kernel case", budget: None, run: || one(half_kernel_case()) },
    Criterion { id: 6, name: "Bott iteration formula", budget: Some(60.0), run: || one(bott_suite(6, 10)) },
    Criterion { id: 7, name: "brake symmetry formulas", budget: None, run: || one(brake_suite(7, 10)) },
    Criterion { id: 8, name: "fundamental-domain fidelity", budget: None, run: || one(fundamental_domain_suite(8, 2)) },
    Criterion { id: 9, name: "heteroclinic brake and homoclinic splitting", budget: Some(60.0), run: || one(heteroclinic_suite(9)) },
    Criterion { id: 10, name: "geodesic iteration", budget: None, run: || one(geodesic_suite()) },
    Criterion {
        id: 11,
        name: "sf and Maslov axioms",
        budget: None,
        run: || {
            let mut v = sf_axiom_suites(11, 100);
            v.extend(maslov_axiom_suites(12, 100));
            v
        },
    },
    Criterion { id: 12, name: "gap-metric inequality", budget: Some(5.0), run: || one(gap_suite(12, 200)) },
    Criterion { id: 13, name: "Morse index splitting", budget: None, run: || one(morse_suite(13, 10)) },
];

fn main() -> ExitCode {
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for c in CRITERIA.iter().filter(|c| filter.is_empty() || filter.contains(&c.id)) {
        let start = Instant::now();
        let parts = (c.run)();
        let secs = start.elapsed().as_secs_f64();
        let ok = parts.iter().all(SuiteOutcome::ok);
        let passed: usize = parts.iter().map(|o| o.passed).sum();
        let total: usize = parts.iter().map(|o| o.instances).sum();
        let rejected: usize = parts.iter().map(|o| o.rejected).sum();
        let budget = match c.budget {
            Some(b) if secs > b => format!(" (over {b:.0}s budget)"),
            Some(b) => format!(" (budget {b:.0}s)"),
            None => String::new(),
        };
        println!(
            "[{}] criterion {:>2}: {} | {passed}/{total} instances, {rejected} redrawn | {secs:.1}s{budget}",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.name,
        );
        for o in parts.iter().filter(|o| !o.ok()) {
            for f in o.failures.iter().take(5) {
                println!("       {}: {f}", o.name);
            }
        }
        if !ok {
            failed += 1;
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
