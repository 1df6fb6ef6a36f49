//! The acceptance suite: every criterion runs its verify suite with default
//! options and prints one PASS/FAIL line with its runtime against the limit.
//! Lines go straight to the process stdout so they show up even when the
//! harness captures output of passing tests.

use std::io::Write;
use std::time::{Duration, Instant};

use petersson::verify::{run_suite, Suite, VerifyOptions};

struct Criterion {
    suite: Suite,
    summary: &'static str,
    limit: Duration,
}

const fn criterion(suite: Suite, summary: &'static str, seconds: u64) -> Criterion {
    Criterion { suite, summary, limit: Duration::from_secs(seconds) }
}

const CRITERIA: [Criterion; 10] = [
    criterion(Suite::Chebyshev, "Chebyshev coefficients exact, row sums, parity list", 1),
    criterion(Suite::Gab, "G_{A,B} closed forms agree with brute force, |g| bound", 300),
    criterion(Suite::Weil, "Weil bound for c ≤ 2000, |m|,|n| ≤ 50", 120),
    criterion(Suite::EmptySpace, "Δ_N(1,1) vanishes within budget for N ≤ 10", 60),
    criterion(Suite::Hecke, "rank-one factorization and Hecke relation at N = 11", 120),
    criterion(Suite::Sieve, "newform sieve and hybrid specializations at 11", 300),
    criterion(Suite::Inversion, "relation inversion round trip", 60),
    criterion(Suite::SignCharacters, "sign-character orthogonality and T(m,n) closed form", 60),
    criterion(Suite::CoefficientBounds, "coefficient, S_L(Y), c_ν and ℓ-tail bounds", 120),
    criterion(Suite::Moment, "cubic moment spectral vs geometric, root numbers", 1800),
];

#[test]
fn acceptance_criteria() {
    let options = VerifyOptions::default();
    let mut out = std::io::stdout();
    let mut failed = Vec::new();
    for (i, c) in CRITERIA.iter().enumerate() {
        let start = Instant::now();
        let outcome = run_suite(c.suite, &options);
        let elapsed = start.elapsed();
        let (ok, detail) = match &outcome {
            Ok(report) => {
                (report.passed, format!("{} checks, {} failures, max diff {:.2e}", report.checked, report.failures, report.max_abs_diff))
            }
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = elapsed <= c.limit;
        let verdict = if ok && in_time { "PASS" } else { "FAIL" };
        writeln!(
            out,
            "criterion {:>2} [{}] {verdict}: {} ({detail}; {:.2} s of {} s)",
            i + 1,
            c.suite,
            c.summary,
            elapsed.as_secs_f64(),
            c.limit.as_secs()
        )
        .unwrap();
        if let Ok(report) = &outcome {
            for note in report.notes.iter().take(5) {
                writeln!(out, "    {note}").unwrap();
            }
        }
        if !(ok && in_time) {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
