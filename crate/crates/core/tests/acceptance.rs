//! Acceptance suite: runs every verification criterion at its pinned
//! tolerance and prints one pass/fail line per criterion.

use gauss_assist_core::verify;

#[test]
fn acceptance_criteria() {
    let reports = verify::run_all(42);
    for r in &reports {
        println!("{}", r.line());
    }
    let failed: Vec<_> = reports.iter().filter(|r| !r.pass).collect();
    assert!(
        failed.is_empty(),
        "failed criteria: {}",
        failed.iter().map(|r| r.line()).collect::<Vec<_>>().join("\n")
    );
}
