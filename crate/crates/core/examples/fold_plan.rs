// Splitting the labeled and unlabeled rows into K disjoint folds.

use ssmean::{make_fold_plan, RngStream};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = RngStream::new(3, 0);
    let plan = make_fold_plan(23, 200, 5, &mut rng)?;
    for k in 0..plan.k() {
        println!(
            "fold {k}: {} labeled, {} unlabeled, {} training rows",
            plan.labeled_fold(k).len(),
            plan.unlabeled_fold(k).len(),
            plan.train_set(k).len()
        );
    }
    let mut seen: Vec<usize> = plan.labeled_folds().concat();
    seen.sort_unstable();
    assert_eq!(seen, (0..23).collect::<Vec<_>>());

    // too few labeled rows for five folds of three
    assert!(make_fold_plan(12, 200, 5, &mut rng).is_err());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
