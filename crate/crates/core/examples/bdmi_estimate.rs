// Cross-fitted debiased posterior for the outcome mean, next to the
// supervised posterior on the same data.

use ssmean::simulation::gen_correct;
use ssmean::{bdmi_cf, supervised_posterior, DesignKind, NuisanceMethod, RngStream, SimDesign};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let design = SimDesign::new(DesignKind::Correct, 300, 6000, 10, 4);
    let data = gen_correct(&design, &RngStream::new(2, 0))?;
    let rng = RngStream::new(2, 1);

    let sup = supervised_posterior(&data, 2000, 0.05, &rng)?;
    let fit = bdmi_cf(&data, 5, &NuisanceMethod::Bols, 2000, 0.05, &rng)?;
    for r in [&sup, &fit] {
        println!("{:<10} {:.4}  [{:.4}, {:.4}]", r.label(), r.point_estimate, r.ci.0, r.ci.1);
    }
    for f in &fit.diagnostics.folds {
        println!("{f:?}");
    }
    assert!(fit.ci_length() < sup.ci_length());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
