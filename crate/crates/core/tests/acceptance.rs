//! One line per acceptance criterion.
//!
//! Criteria 3 and 7 contain claims that do not hold; their lines print FAIL
//! with the measured evidence, and the run only aborts when something other
//! than those known discrepancies goes wrong.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use mapscope_core::verify::{VerificationReport, Verifier};
use mapscope_core::Exec;
use num_bigint::BigUint;
use num_traits::One;

struct Line {
    number: u32,
    title: &'static str,
    limit: Duration,
    passed: bool,
    detail: String,
    /// A FAIL that matches the known discrepancy exactly.
    expected_failure: bool,
}

type Criterion = Box<dyn Fn(&Verifier) -> Line>;

fn factorial(n: u32) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// 4(3n)! / (n! (2n+2)!)
fn closed_form(n: u32) -> BigUint {
    factorial(3 * n) * 4u32 / (factorial(n) * factorial(2 * n + 2))
}

fn witnesses(r: &VerificationReport) -> String {
    r.witnesses
        .iter()
        .map(|w| format!("{}: expected {}, got {}", w.object, w.expected, w.actual))
        .collect::<Vec<_>>()
        .join("; ")
}

fn from_report(number: u32, title: &'static str, limit: u64, r: VerificationReport) -> Line {
    Line {
        number,
        title,
        limit: Duration::from_secs(limit),
        passed: r.passed(),
        detail: if r.passed() { r.notes.join("; ") } else { witnesses(&r) },
        expected_failure: false,
    }
}

fn criterion_1(v: &Verifier) -> Line {
    let r = v.check_counts(9).unwrap();
    let printed = [1u32, 2, 6, 22, 91, 408, 1938, 9614, 49335];
    let formula: Vec<BigUint> = (1..=9).map(closed_form).collect();
    let agree = printed.iter().zip(&formula).all(|(&p, f)| BigUint::from(p) == *f);
    let counted: Vec<usize> = (2..=10)
        .map(|nodes| mapscope_core::trees::enumerate_trees(nodes).unwrap().len())
        .collect();
    let matches = counted.iter().zip(&printed).all(|(&c, &p)| c == p as usize);
    let mut line = from_report(1, "tree counts for 2..10 nodes", 10, r);
    line.passed &= agree && matches;
    line.detail = format!("counted {counted:?}");
    line
}

fn criterion_3(v: &Verifier) -> Line {
    let r = v.check_theorem5(9).unwrap();
    let note = |prefix: &str| {
        r.notes
            .iter()
            .find(|n| n.starts_with(prefix))
            .cloned()
            .unwrap_or_default()
    };
    let tree_side = note("single-child-max vs internal 2-faces");
    let perm_side = note("M-occurrences vs single-child-max");
    let detail = format!(
        "{tree_side}; {perm_side}; {}",
        note("length 2: M-count distribution")
    );
    // The tree/map equality and the insertion lemma hold; the permutation
    // count does not, starting with the triple edge on 3 edges.
    let expected_failure = !r.passed()
        && tree_side.contains(": 0 of")
        && !perm_side.contains(": 0 of")
        && r.notes.iter().any(|n| n.contains("left-to-right reading) holds"));
    Line {
        number: 3,
        title: "M-occurrences = single-child-max nodes = internal 2-faces",
        limit: Duration::from_secs(30),
        passed: r.passed(),
        detail,
        expected_failure,
    }
}

fn criterion_7(v: &Verifier) -> Line {
    let r = v.check_asymptotics().unwrap();
    let known: BTreeSet<&str> = [
        "P at n = 1000",
        "P over n = 50..800",
        "PPRIME at n = 1000",
        "PPRIME over n = 50..800",
        "B3 gamma",
    ]
    .into();
    let failed: BTreeSet<&str> = r.witnesses.iter().map(|w| w.object.as_str()).collect();
    let expected_failure = !r.passed() && failed == known && r.failures == known.len();
    let mut detail = witnesses(&r);
    if let Some(n) = r.notes.iter().find(|n| n.starts_with("gamma evaluated")) {
        detail.push_str("; ");
        detail.push_str(n);
    }
    Line {
        number: 7,
        title: "first-order asymptotics and B3 singularity constants",
        limit: Duration::from_secs(30),
        passed: r.passed(),
        detail,
        expected_failure,
    }
}

fn main() -> ExitCode {
    let v = Verifier::new(Exec::default());
    let criteria: Vec<Criterion> = vec![
        Box::new(criterion_1),
        Box::new(|v| from_report(2, "bijection triangle on trees with at most 9 nodes", 30, v.check_table1(9).unwrap())),
        Box::new(criterion_3),
        Box::new(|v| from_report(4, "primitive map counts against the substitution series", 10, v.check_primitive_series(10).unwrap())),
        Box::new(|v| from_report(5, "series identities to order 30", 5, v.check_series_identities(30).unwrap())),
        Box::new(|v| from_report(6, "restricted-tree lower bounds", 60, v.check_bounds(8, 12).unwrap())),
        Box::new(criterion_7),
        Box::new(|v| from_report(8, "pattern engine", 60, v.check_patterns(6).unwrap())),
        Box::new(|v| from_report(9, "generation closure", 60, v.check_closure(8).unwrap())),
    ];
    let mut unexpected = 0;
    for c in criteria {
        let start = Instant::now();
        let mut line = c(&v);
        let elapsed = start.elapsed();
        let in_time = elapsed <= line.limit;
        if !in_time {
            line.detail.push_str(&format!("; over the {}s limit", line.limit.as_secs()));
        }
        let pass = line.passed && in_time;
        println!(
            "criterion {} {}: {} ({:.2}s) {}",
            line.number,
            line.title,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            line.detail
        );
        if !pass && !(line.expected_failure && in_time) {
            unexpected += 1;
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} criteria failed outside the known discrepancies");
        ExitCode::FAILURE
    }
}
