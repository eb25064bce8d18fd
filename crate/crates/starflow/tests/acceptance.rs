//! Runs every acceptance criterion once at its stated tolerance and prints
//! one PASS/FAIL line per criterion. Criteria checked in several parts pass
//! only when every part passes.

use std::collections::BTreeMap;
use std::process::exit;
use std::time::Instant;

use starflow::experiments::run_preset;
use starflow::{parse_config, Outcome};

const RUNS: [(&str, &str); 6] = [
    (
        "linear_oracle",
        "preset = linear_oracle\nn = 1\nm = 2\nflux = zero\nL = 40\nN = 2000\n\
         diffusion = crank_nicolson\ndt = 1e-3\nt_end = 0.5\ncenter = 1\nwidth = 0.5\nmass = 1\n",
    ),
    (
        "decay",
        "preset = decay\nn = 1\nm = 2\nflux = power_law\nq = 3\nmass = 1\nt_end = 80\n",
    ),
    (
        "asymptotic",
        "preset = asymptotic\nn = 1\nm = 2\nflux = power_law\nq = 3\nmass = 1\nt_end = 80\n",
    ),
    (
        "max_principle",
        "preset = max_principle\nn = 1\nm = 2\nflux = power_law\nq = 3\namplitude = 1\nt_end = 20\n",
    ),
    ("commutator", "preset = commutator\n"),
    (
        "picard_contraction",
        "preset = picard_contraction\nflux = truncated\nq = 3\nlower = -1\nupper = 1\n\
         scheme = picard\ndt = 0.02\n",
    ),
];

fn main() {
    let mut by_criterion: BTreeMap<u8, Vec<Outcome>> = BTreeMap::new();
    let mut errors = Vec::new();
    for (name, text) in RUNS {
        let started = Instant::now();
        let cfg = parse_config(text).unwrap_or_else(|e| panic!("{name}: {e}"));
        match run_preset(&cfg) {
            Ok(report) => {
                for outcome in report.outcomes {
                    by_criterion.entry(outcome.criterion).or_default().push(outcome);
                }
            }
            Err(err) => errors.push(format!("{name}: {err:#}")),
        }
        eprintln!("{name} finished in {:.1} s", started.elapsed().as_secs_f64());
    }

    let mut failed = !errors.is_empty();
    for criterion in 1..=9u8 {
        let parts = by_criterion.remove(&criterion).unwrap_or_default();
        let passed = !parts.is_empty() && parts.iter().all(|o| o.passed);
        failed |= !passed;
        let verdict = if passed { "PASS" } else { "FAIL" };
        let detail = if parts.is_empty() {
            "no run checked this criterion".to_string()
        } else {
            parts
                .iter()
                .map(|o| format!("[{}] {}", o.name, o.detail))
                .collect::<Vec<_>>()
                .join("; ")
        };
        println!("{verdict} criterion {criterion}: {detail}");
    }
    for e in &errors {
        println!("ERROR {e}");
    }
    if failed {
        exit(1);
    }
}
