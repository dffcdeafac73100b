// Spike-and-slab Gibbs sampler on a sparse problem.

use nalgebra::{DMatrix, DVector};
use ssmean::sampling::standard_normal;
use ssmean::{fit_spike_slab, GibbsConfig, NuisancePosterior, RngStream};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = RngStream::new(8, 0);
    let (m, p) = (150, 12);
    let x = DMatrix::from_fn(m, p, |_, _| standard_normal(&mut rng));
    let y = DVector::from_fn(m, |i, _| 3.0 + 1.5 * x[(i, 0)] - x[(i, 4)] + 0.5 * standard_normal(&mut rng));

    let config = GibbsConfig {
        burn_in: 200,
        sweeps: 600,
        g: None,
    };
    let post = fit_spike_slab(&x, &y, &config, &mut rng)?;
    let incl = post.inclusion_frequencies();
    for (j, f) in incl.iter().enumerate() {
        println!("x{j}: inclusion {f:.2}");
    }
    assert!(incl[0] > 0.9 && incl[4] > 0.9);
    let mean = post.posterior_mean().expect("chain average");
    println!("posterior mean intercept {:.3}", mean.intercept);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
