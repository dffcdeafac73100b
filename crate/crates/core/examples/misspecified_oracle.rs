// Oracle efficiency under a quadratic truth fitted by a linear model,
// analytic and by Monte Carlo.

use ssmean::simulation::{oracle_ore_star, oracle_variances_mc, oracle_variances_star};
use ssmean::{DesignKind, SimDesign};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let design = SimDesign::new(DesignKind::Misspec, 500, 10_000, 10, 3);
    let exact = oracle_variances_star(&design)?;
    let mc = oracle_variances_mc(&design, 200_000, 1)?;
    println!("analytic {exact:?}");
    println!("monte carlo {mc:?}");
    println!("oracle relative efficiency {:.3}", oracle_ore_star(&design)?);
    assert!((mc.sigma1_sq / exact.sigma1_sq - 1.0).abs() < 0.05);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
