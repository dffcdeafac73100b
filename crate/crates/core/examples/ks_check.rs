// Distance between standardized posterior draws and the standard normal.

use ssmean::diagnostics::ks_standard_normal;
use ssmean::simulation::gen_correct;
use ssmean::{bdmi_cf, DesignKind, NuisanceMethod, RngStream, SimDesign};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let design = SimDesign::new(DesignKind::Correct, 500, 10_000, 10, 4);
    let data = gen_correct(&design, &RngStream::new(12, 0))?;
    let fit = bdmi_cf(&data, 5, &NuisanceMethod::Bols, 5000, 0.05, &RngStream::new(12, 1))?;
    let d = ks_standard_normal(&fit.posterior_draws);
    println!("KS distance to N(0,1): {d:.4}");
    assert!(d < 0.05);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
