// Full acceptance suite: every release-gating criterion at full depth,
// one reported line per criterion. Expect ~half a minute; the dominant
// cost is the L=12 eigendecomposition, shared across criteria.

use efqs_cli::validation::{print_report, run_criteria, Level};

#[test]
fn all_criteria_pass_at_full_level() {
    let results = run_criteria(Level::Full, None);
    assert_eq!(results.len(), 13, "expected 13 criteria");
    let all_passed = print_report(&results);
    let failed: Vec<String> = results
        .iter()
        .filter(|r| !r.passed)
        .map(|r| format!("criterion {} ({}): {}", r.index, r.name, r.detail))
        .collect();
    assert!(all_passed, "failed criteria:\n{}", failed.join("\n"));
}
