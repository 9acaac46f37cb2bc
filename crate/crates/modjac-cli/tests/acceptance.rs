//! Acceptance suite: runs every verification criterion and prints one
//! pass/fail line per criterion. `cargo test --test acceptance -- --nocapture`
//! shows the lines; the `verify-paper` subcommand runs the same checks.

#[test]
fn acceptance_criteria() {
    let results = modjac::verify::run_all();
    assert_eq!(results.len(), 10, "expected ten criteria");
    for r in &results {
        println!("{}", r.line());
    }
    let failed: Vec<String> = results
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.line())
        .collect();
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
}
