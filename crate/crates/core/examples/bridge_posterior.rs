// Ridge posterior with the penalty picked by 10-fold cross-validation.

use nalgebra::{DMatrix, DVector};
use ssmean::nuisance::fit_bridge_with_precision;
use ssmean::sampling::standard_normal;
use ssmean::{fit_bridge, NuisancePosterior, RngStream};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = RngStream::new(21, 0);
    let (m, p) = (120, 40);
    let x = DMatrix::from_fn(m, p, |_, _| standard_normal(&mut rng));
    let y = DVector::from_fn(m, |i, _| 1.0 + x[(i, 0)] + 0.5 * x[(i, 1)] + standard_normal(&mut rng));

    let post = fit_bridge(&x, &y, &mut rng)?;
    let meta = post.metadata();
    println!("cv lambda {:?}, prior precision {:?}", meta.lambda_cv, meta.prior_precision);
    let mean = post.posterior_mean().expect("ridge has a mean");
    println!("leading coefficients {:.3?}", &mean.coefficients.as_slice()[..4]);

    let heavy = fit_bridge_with_precision(&x, &y, 1e9)?;
    let flat = heavy.posterior_mean().expect("ridge has a mean");
    println!("huge penalty: max |beta| {:.2e}", flat.coefficients.amax());
    assert!(flat.coefficients.amax() < 1e-5);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
