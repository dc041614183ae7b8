//! One pass/fail line per acceptance criterion.

use arclosure::selftest;

#[test]
fn acceptance() {
    let results = selftest::run_all();
    for r in &results {
        println!("{r}");
    }
    let failed: Vec<String> = results.iter().filter(|r| !r.pass).map(|r| r.to_string()).collect();
    assert_eq!(results.len(), 9);
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
}
