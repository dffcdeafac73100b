// A small Monte Carlo study: MSE, relative efficiency, coverage and
// interval length per method.

use ssmean::simulation::{metrics_csv, oracle_ore};
use ssmean::{run_replications, DesignKind, EstimatorKind, MethodSpec, NuisanceMethod, SimDesign};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut design = SimDesign::new(DesignKind::Correct, 200, 4000, 6, 2);
    design.reps = 20;
    design.m = 400;
    design.methods = vec![
        MethodSpec::supervised(),
        MethodSpec::new(EstimatorKind::Bdmi, NuisanceMethod::Bols),
    ];
    let table = run_replications(&design)?;
    print!("{}", metrics_csv(&table));
    println!("oracle relative efficiency {:.3}", oracle_ore(&design)?);
    let re = table.method("bdmi:bols").and_then(|m| m.re).unwrap_or(0.0);
    assert!(re > 1.0);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
