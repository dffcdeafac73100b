// A simulation described by a TOML file, with defaults filled in.

use ssmean::io::{cmd_simulate, CommandKind, RunConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("study.toml");
    std::fs::write(
        &path,
        "kind = \"correct\"\nn = 100\nN = 2000\np = 5\ns = 2\nreps = 5\nm = 200\nmethod = \"bdmi\"\nnuisance = \"bols\"\n",
    )?;
    let config = RunConfig::from_file(&path)?;
    let resolved = config.clone().resolve(CommandKind::Simulate)?;
    println!("resolved seed {:?}, k {:?}", resolved.seed, resolved.k);
    let report = cmd_simulate(config)?;
    println!("{}", serde_json::to_string_pretty(&report.metrics.methods)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
