// Student-t draws, the sum of two independent t variables and type-7
// quantiles.

use ssmean::sampling::sample_convolution;
use ssmean::{sample_quantile, sample_student_t, RngStream, TComponent};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = RngStream::new(11, 0);
    let t = TComponent::new(5.0, 1.0, 0.25)?;
    let draws = sample_student_t(t, 50_000, &mut rng)?;
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    println!("t5(1, 0.25): mean {mean:.4}, variance {:.4}", t.variance());

    let bias = TComponent::new(99.0, 0.1, 0.01)?;
    let imputed = TComponent::new(1999.0, 4.9, 0.0005)?;
    let sum = sample_convolution(bias, imputed, 50_000, &mut rng)?;
    let lo = sample_quantile(&sum, 0.025)?;
    let hi = sample_quantile(&sum, 0.975)?;
    println!("bias + imputed: 95% interval [{lo:.4}, {hi:.4}]");
    assert!(lo < 5.0 && 5.0 < hi);

    assert_eq!(sample_quantile(&[1.0, 2.0, 3.0, 4.0], 0.5)?, 2.5);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
