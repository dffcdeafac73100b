//! Bernoulli-Gaussian spike-and-slab regression by Gibbs sampling.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::standardize::{mean_sd, Standardizer};
use super::{NuisanceMetadata, NuisancePosterior, RegressionDraw};
use crate::error::{DataSide, Error, Result};
use crate::sampling::{sample_gamma, sample_inverse_gamma, standard_normal, RngStream};

const SIGMA_SHAPE: f64 = 0.001;
const SIGMA_RATE: f64 = 0.001;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GibbsConfig {
    pub burn_in: usize,
    pub sweeps: usize,
    /// Slab variance multiplier `g`; `None` means the number of rows.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        GibbsConfig {
            burn_in: 1000,
            sweeps: 2000,
            g: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SpikeSlabPosterior {
    draws: Vec<RegressionDraw>,
    mean: RegressionDraw,
    inclusion: Vec<f64>,
    config: GibbsConfig,
    dropped: Vec<usize>,
    degenerate: bool,
}

pub fn fit_spike_slab(
    features: &DMatrix<f64>,
    outcomes: &DVector<f64>,
    config: &GibbsConfig,
    rng: &mut RngStream,
) -> Result<SpikeSlabPosterior> {
    let m = features.nrows();
    let p = features.ncols();
    if outcomes.len() != m {
        return Err(Error::DimensionMismatch(format!("{m} rows vs {} outcomes", outcomes.len())));
    }
    if m < 10 {
        return Err(Error::InsufficientData {
            side: DataSide::Labeled,
            detail: format!("spike-and-slab fit needs at least 10 rows, got {m}"),
        });
    }
    if config.sweeps == 0 {
        return Err(Error::InvalidParameter("gibbs sweeps must be positive".into()));
    }
    if let Some(g) = config.g {
        if !(g.is_finite() && g > 0.0) {
            return Err(Error::InvalidParameter(format!("slab scale g = {g}")));
        }
    }
    let (std, z) = Standardizer::fit(features);
    let (ybar, sd_y) = mean_sd(outcomes);
    if sd_y == 0.0 {
        let mean = RegressionDraw::constant(ybar, p);
        return Ok(SpikeSlabPosterior {
            draws: vec![mean.clone()],
            mean,
            inclusion: vec![0.0; p],
            config: config.clone(),
            dropped: std.dropped(),
            degenerate: true,
        });
    }
    if std.kept() == 0 {
        return Err(Error::SingularDesign("every feature column is constant".into()));
    }

    let q = z.ncols();
    let g = config.g.unwrap_or(m as f64);
    let inv_g = 1.0 / g;
    let yc = outcomes.add_scalar(-ybar);
    let zz: Vec<f64> = (0..q).map(|j| z.column(j).norm_squared()).collect();

    let mut gamma = vec![false; q];
    let mut beta = DVector::<f64>::zeros(q);
    let mut resid = yc.clone();
    let mut sigma2 = yc.norm_squared() / m as f64;
    let mut w: f64 = 0.5;

    let total = config.burn_in + config.sweeps;
    let mut draws = Vec::with_capacity(config.sweeps);
    let mut counts = vec![0usize; q];
    let mut mean_beta = DVector::<f64>::zeros(q);
    let mut mean_alpha = 0.0;

    let fail = |sweep: usize, what: &str| Error::SamplerFailure {
        sweep,
        detail: format!("non-finite {what}"),
    };

    for sweep in 0..total {
        let prior_logit = (w / (1.0 - w)).ln();
        for j in 0..q {
            let col = z.column(j);
            if beta[j] != 0.0 {
                resid.axpy(beta[j], &col, 1.0);
            }
            let zr = col.dot(&resid);
            let prec = zz[j] + inv_g;
            let log_odds =
                prior_logit + 0.5 * (inv_g / prec).ln() + zr * zr / (2.0 * sigma2 * prec);
            let prob = 1.0 / (1.0 + (-log_odds).exp());
            gamma[j] = rng.random::<f64>() < prob;
            beta[j] = if gamma[j] {
                zr / prec + (sigma2 / prec).sqrt() * standard_normal(rng)
            } else {
                0.0
            };
            if beta[j] != 0.0 {
                resid.axpy(-beta[j], &col, 1.0);
            }
        }
        let k = gamma.iter().filter(|&&g| g).count() as f64;
        let a = sample_gamma(1.0 + k, 1.0, rng).map_err(|_| fail(sweep, "inclusion weight"))?;
        let b = sample_gamma(1.0 + q as f64 - k, 1.0, rng)
            .map_err(|_| fail(sweep, "inclusion weight"))?;
        w = (a / (a + b)).clamp(1e-300, 1.0 - 1e-16);

        let rss = resid.norm_squared();
        let shape = SIGMA_SHAPE + (m as f64 - 1.0) / 2.0 + k / 2.0;
        let rate = SIGMA_RATE + rss / 2.0 + beta.norm_squared() * inv_g / 2.0;
        sigma2 = sample_inverse_gamma(shape, rate, rng).map_err(|_| fail(sweep, "variance"))?;
        if !(sigma2.is_finite() && sigma2 > 0.0) || !beta.iter().all(|b| b.is_finite()) {
            return Err(fail(sweep, "state"));
        }

        if sweep >= config.burn_in {
            let alpha = ybar + (sigma2 / m as f64).sqrt() * standard_normal(rng);
            for j in 0..q {
                counts[j] += gamma[j] as usize;
            }
            mean_beta += &beta;
            mean_alpha += alpha;
            draws.push(std.to_original(alpha, &beta));
        }
    }

    let kept = config.sweeps as f64;
    let mean = std.to_original(mean_alpha / kept, &(mean_beta / kept));
    let mut inclusion = vec![0.0; p];
    let dropped = std.dropped();
    let mut slot = 0;
    for (j, inc) in inclusion.iter_mut().enumerate() {
        if dropped.contains(&j) {
            continue;
        }
        *inc = counts[slot] as f64 / kept;
        slot += 1;
    }
    Ok(SpikeSlabPosterior {
        draws,
        mean,
        inclusion,
        config: config.clone(),
        dropped,
        degenerate: false,
    })
}

impl SpikeSlabPosterior {
    /// Fraction of retained sweeps in which each feature was included.
    pub fn inclusion_frequencies(&self) -> &[f64] {
        &self.inclusion
    }

    pub fn retained(&self) -> &[RegressionDraw] {
        &self.draws
    }
}

impl NuisancePosterior for SpikeSlabPosterior {
    fn sample(&self, rng: &mut RngStream) -> RegressionDraw {
        if self.draws.len() == 1 {
            return self.draws[0].clone();
        }
        self.draws[rng.random_range(0..self.draws.len())].clone()
    }

    fn posterior_mean(&self) -> Option<RegressionDraw> {
        Some(self.mean.clone())
    }

    fn metadata(&self) -> NuisanceMetadata {
        NuisanceMetadata {
            method: "spike".into(),
            dropped_columns: self.dropped.clone(),
            inclusion_frequencies: Some(self.inclusion.clone()),
            gibbs: Some(self.config.clone()),
            degenerate: self.degenerate,
            ..Default::default()
        }
    }
}
