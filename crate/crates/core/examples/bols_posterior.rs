// Flat-prior linear regression posterior: exact fits collapse to a point
// mass, noisy fits give a multivariate t.

use nalgebra::{DMatrix, DVector};
use ssmean::sampling::standard_normal;
use ssmean::{fit_bols, NuisancePosterior, RngStream};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let line = fit_bols(&DMatrix::from_column_slice(3, 1, &[0.0, 1.0, 2.0]), &DVector::from_vec(vec![1.0, 3.0, 5.0]))?;
    let mean = line.posterior_mean().expect("bols has a mean");
    println!("exact line: intercept {:.3}, slope {:.3}", mean.intercept, mean.coefficients[0]);

    let mut rng = RngStream::new(5, 0);
    let x = DMatrix::from_fn(200, 3, |_, _| standard_normal(&mut rng));
    let y = DVector::from_fn(200, |i, _| 2.0 + x[(i, 0)] - 0.5 * x[(i, 2)] + 0.3 * standard_normal(&mut rng));
    let post = fit_bols(&x, &y)?;
    println!("noisy fit: df {}, location {:.3?}", post.df(), post.location().as_slice());
    let draw = post.sample(&mut rng);
    println!("one posterior draw: {:.3} {:.3?}", draw.intercept, draw.coefficients.as_slice());
    assert!((post.location()[1] - 1.0).abs() < 0.1);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
