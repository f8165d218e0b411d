//! Runs the full property suite and prints one line per criterion.

use fisher_rao::sampling::seed_from_env;
use fisher_rao::verify::Suite;

#[test]
fn acceptance() {
    let mut suite = Suite::new(seed_from_env());
    let criteria = suite.run_all();
    println!("seed {}", suite.seed());
    for c in &criteria {
        println!("{}", c.summary());
        for check in &c.checks {
            println!("    {check}");
        }
    }
    assert_eq!(criteria.len(), 11);
    let failed: Vec<usize> = criteria
        .iter()
        .filter(|c| !c.passed())
        .map(|c| c.id)
        .collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
