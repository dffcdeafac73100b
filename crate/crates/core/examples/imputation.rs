// Plain imputation: average the fitted regression over the unlabeled
// rows, with no bias correction.

use ssmean::simulation::gen_correct;
use ssmean::{imputation_posterior, DesignKind, NuisanceMethod, RngStream, SimDesign};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let design = SimDesign::new(DesignKind::Correct, 200, 4000, 40, 6);
    let data = gen_correct(&design, &RngStream::new(6, 0))?;
    let fit = imputation_posterior(&data, &NuisanceMethod::Bridge, 1000, 0.05, &RngStream::new(6, 1))?;
    println!("{} {:.4} [{:.4}, {:.4}]", fit.label(), fit.point_estimate, fit.ci.0, fit.ci.1);
    println!("truth {:.1}", design.alpha0);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
