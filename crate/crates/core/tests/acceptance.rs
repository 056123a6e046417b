use std::io::Write;

use cpl_core::verify;

#[test]
fn acceptance() {
    let results = verify::run_all();
    // Straight to the stdout handle so the lines survive output capture.
    let mut out = std::io::stdout().lock();
    for r in &results {
        writeln!(out, "{r}").unwrap();
    }
    drop(out);
    let failed: Vec<usize> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
