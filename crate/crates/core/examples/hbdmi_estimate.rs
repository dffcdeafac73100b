// Hierarchical variant: a fresh regression draw for every posterior draw
// of the mean.

use ssmean::simulation::gen_correct;
use ssmean::{bdmi_cf, hbdmi_cf, DesignKind, NuisanceMethod, RngStream, SimDesign};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let design = SimDesign::new(DesignKind::Correct, 300, 6000, 10, 4);
    let data = gen_correct(&design, &RngStream::new(4, 0))?;
    let rng = RngStream::new(4, 1);
    let flat = bdmi_cf(&data, 5, &NuisanceMethod::Bols, 1000, 0.05, &rng)?;
    let hier = hbdmi_cf(&data, 5, &NuisanceMethod::Bols, 1000, 0.05, &rng)?;
    println!("bdmi  {:.4} length {:.4}", flat.point_estimate, flat.ci_length());
    println!("hbdmi {:.4} length {:.4}", hier.point_estimate, hier.ci_length());
    assert!((flat.point_estimate - hier.point_estimate).abs() < 0.05);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
