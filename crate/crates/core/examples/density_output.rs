// Per-replication posterior histograms written as CSV files.

use ssmean::simulation::emit_density_data;
use ssmean::{run_replications, DesignKind, EstimatorKind, MethodSpec, NuisanceMethod, SimDesign};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut design = SimDesign::new(DesignKind::Correct, 100, 1000, 4, 2);
    design.reps = 3;
    design.m = 500;
    design.density_bins = Some(30);
    design.methods = vec![
        MethodSpec::supervised(),
        MethodSpec::new(EstimatorKind::Bdmi, NuisanceMethod::Bols),
    ];
    let table = run_replications(&design)?;
    let dir = tempfile::tempdir()?;
    for path in emit_density_data(&table, dir.path())? {
        let text = std::fs::read_to_string(&path)?;
        println!("{}: {} lines", path.display(), text.lines().count());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
