// Loading labeled and unlabeled CSV files and comparing methods on them.

use std::fs;

use ssmean::io::{cmd_compare, OneOrMany, RunConfig};
use ssmean::sampling::standard_normal;
use ssmean::RngStream;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let mut rng = RngStream::new(30, 0);
    let mut labeled = String::from("y,a,b\n");
    for _ in 0..120 {
        let (a, b) = (standard_normal(&mut rng), standard_normal(&mut rng));
        let y = 2.0 + a - b + 0.5 * standard_normal(&mut rng);
        labeled.push_str(&format!("{y},{a},{b}\n"));
    }
    let mut unlabeled = String::from("a,b\n");
    for _ in 0..2000 {
        unlabeled.push_str(&format!("{},{}\n", standard_normal(&mut rng), standard_normal(&mut rng)));
    }
    let l = dir.path().join("labeled.csv");
    let u = dir.path().join("unlabeled.csv");
    fs::write(&l, labeled)?;
    fs::write(&u, unlabeled)?;

    let report = cmd_compare(RunConfig {
        labeled: Some(l),
        unlabeled: Some(u),
        method: Some(OneOrMany::One("bdmi,hbdmi".into())),
        nuisance: Some(OneOrMany::One("bols".into())),
        m: Some(1000),
        ..Default::default()
    })?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
