//! Posteriors over linear regression functions, fitted on a training fold.
//!
//! The estimators only need two things from a nuisance posterior: a way to
//! draw one regression function and, when available, its posterior mean.
//! Anything implementing [`NuisanceFitter`] can be plugged in.

mod bols;
mod bridge;
mod spike_slab;
mod standardize;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::RngStream;

pub use bols::{fit_bols, BolsPosterior};
pub use bridge::{
    bridge_precision_grid, fit_bridge, fit_bridge_with_precision, BridgePosterior, LambdaGrid,
    CV_FOLDS, GRID_MIN_RATIO, GRID_POINTS, RIDGE_ALPHA,
};
#[allow(unused_imports)]
pub(crate) use standardize::{mean_sd, Standardizer};
pub use spike_slab::{fit_spike_slab, GibbsConfig, SpikeSlabPosterior};

/// One sampled regression function `x -> intercept + coefficients . x`.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressionDraw {
    pub intercept: f64,
    pub coefficients: DVector<f64>,
}

impl RegressionDraw {
    pub fn new(intercept: f64, coefficients: DVector<f64>) -> Self {
        RegressionDraw {
            intercept,
            coefficients,
        }
    }

    pub fn constant(c: f64, p: usize) -> Self {
        RegressionDraw::new(c, DVector::zeros(p))
    }

    pub fn p(&self) -> usize {
        self.coefficients.len()
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.intercept
            + self
                .coefficients
                .iter()
                .zip(x)
                .map(|(b, v)| b * v)
                .sum::<f64>()
    }

    pub fn is_finite(&self) -> bool {
        self.intercept.is_finite() && self.coefficients.iter().all(|b| b.is_finite())
    }

    /// Shifts the whole function by a constant.
    pub fn shifted(&self, c: f64) -> Self {
        RegressionDraw::new(self.intercept + c, self.coefficients.clone())
    }
}

/// Row-wise evaluation of a draw on a `k x p` feature matrix.
pub fn predict(draw: &RegressionDraw, features: &DMatrix<f64>) -> Result<DVector<f64>> {
    if features.ncols() != draw.p() {
        return Err(Error::DimensionMismatch(format!(
            "draw has {} coefficients, features have {} columns",
            draw.p(),
            features.ncols()
        )));
    }
    let mut out = features * &draw.coefficients;
    out.add_scalar_mut(draw.intercept);
    Ok(out)
}

/// Fit summary echoed into reports.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NuisanceMetadata {
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub df: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_cv: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prior_precision: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_grid: Option<LambdaGrid>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub dropped_columns: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inclusion_frequencies: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gibbs: Option<GibbsConfig>,
    pub degenerate: bool,
}

/// A fitted posterior over regression functions.
pub trait NuisancePosterior: Send + Sync {
    fn sample(&self, rng: &mut RngStream) -> RegressionDraw;

    /// Posterior mean function, when it is available in closed form or
    /// from stored draws.
    fn posterior_mean(&self) -> Option<RegressionDraw>;

    fn metadata(&self) -> NuisanceMetadata;
}

/// Anything that turns a training fold into a [`NuisancePosterior`].
pub trait NuisanceFitter: Send + Sync {
    fn fit(
        &self,
        features: &DMatrix<f64>,
        outcomes: &DVector<f64>,
        rng: &mut RngStream,
    ) -> Result<Box<dyn NuisancePosterior>>;

    fn label(&self) -> String;
}

/// Posterior that always returns the same constant function.
#[derive(Clone, Debug)]
pub struct ConstantPosterior {
    draw: RegressionDraw,
}

pub fn constant_nuisance(c: f64, p: usize) -> ConstantPosterior {
    ConstantPosterior {
        draw: RegressionDraw::constant(c, p),
    }
}

pub fn zero_nuisance(p: usize) -> ConstantPosterior {
    constant_nuisance(0.0, p)
}

impl NuisancePosterior for ConstantPosterior {
    fn sample(&self, _rng: &mut RngStream) -> RegressionDraw {
        self.draw.clone()
    }

    fn posterior_mean(&self) -> Option<RegressionDraw> {
        Some(self.draw.clone())
    }

    fn metadata(&self) -> NuisanceMetadata {
        NuisanceMetadata {
            method: if self.draw.intercept == 0.0 {
                "zero".into()
            } else {
                format!("constant:{}", self.draw.intercept)
            },
            degenerate: true,
            ..Default::default()
        }
    }
}

/// The built-in nuisance methods.
#[derive(Clone, Debug, PartialEq)]
pub enum NuisanceMethod {
    Bols,
    Bridge,
    SpikeSlab(GibbsConfig),
    Constant(f64),
    Zero,
}

impl fmt::Display for NuisanceMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NuisanceMethod::Bols => f.write_str("bols"),
            NuisanceMethod::Bridge => f.write_str("bridge"),
            NuisanceMethod::SpikeSlab(_) => f.write_str("spike"),
            NuisanceMethod::Constant(c) => write!(f, "constant:{c}"),
            NuisanceMethod::Zero => f.write_str("zero"),
        }
    }
}

impl FromStr for NuisanceMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "bols" => Ok(NuisanceMethod::Bols),
            "bridge" => Ok(NuisanceMethod::Bridge),
            "spike" | "spike_slab" => Ok(NuisanceMethod::SpikeSlab(GibbsConfig::default())),
            "zero" => Ok(NuisanceMethod::Zero),
            _ => match s.strip_prefix("constant:") {
                Some(c) => c
                    .parse::<f64>()
                    .ok()
                    .filter(|c| c.is_finite())
                    .map(NuisanceMethod::Constant)
                    .ok_or_else(|| Error::Config(format!("bad constant nuisance '{s}'"))),
                None => Err(Error::Config(format!(
                    "unknown nuisance method '{s}' (expected bols, bridge, spike, constant:<c> or zero)"
                ))),
            },
        }
    }
}

impl NuisanceFitter for NuisanceMethod {
    fn fit(
        &self,
        features: &DMatrix<f64>,
        outcomes: &DVector<f64>,
        rng: &mut RngStream,
    ) -> Result<Box<dyn NuisancePosterior>> {
        if features.nrows() != outcomes.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} feature rows vs {} outcomes",
                features.nrows(),
                outcomes.len()
            )));
        }
        let p = features.ncols();
        Ok(match self {
            NuisanceMethod::Bols => Box::new(fit_bols(features, outcomes)?),
            NuisanceMethod::Bridge => Box::new(fit_bridge(features, outcomes, rng)?),
            NuisanceMethod::SpikeSlab(cfg) => {
                Box::new(fit_spike_slab(features, outcomes, cfg, rng)?)
            }
            NuisanceMethod::Constant(c) => Box::new(constant_nuisance(*c, p)),
            NuisanceMethod::Zero => Box::new(zero_nuisance(p)),
        })
    }

    fn label(&self) -> String {
        self.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predict_examples() {
        let d = RegressionDraw::new(1.0, DVector::from_vec(vec![2.0]));
        let x = DMatrix::from_row_slice(1, 1, &[3.0]);
        assert_eq!(predict(&d, &x).unwrap()[0], 7.0);

        let z = RegressionDraw::constant(0.0, 2);
        let x = DMatrix::from_row_slice(2, 2, &[1.0, -3.0, 4.5, 2.0]);
        assert_eq!(predict(&z, &x).unwrap(), DVector::zeros(2));

        let d = RegressionDraw::new(5.0, DVector::from_vec(vec![1.0, 0.5]));
        let x = DMatrix::from_row_slice(1, 2, &[2.0, 2.0]);
        assert_eq!(predict(&d, &x).unwrap()[0], 8.0);

        let x = DMatrix::from_row_slice(1, 3, &[2.0, 2.0, 1.0]);
        assert!(matches!(predict(&d, &x), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn constant_posteriors() {
        let c = constant_nuisance(5.0, 3);
        let mut rng = RngStream::new(0, 0);
        let a = c.sample(&mut rng);
        let b = c.sample(&mut rng);
        assert_eq!(a, b);
        assert_eq!(a.evaluate(&[1.0, -2.0, 9.0]), 5.0);
        let z = zero_nuisance(2).posterior_mean().unwrap();
        assert_eq!(z, RegressionDraw::constant(0.0, 2));
    }

    #[test]
    fn method_parsing() {
        assert_eq!("bols".parse::<NuisanceMethod>().unwrap(), NuisanceMethod::Bols);
        assert_eq!(
            "constant:5".parse::<NuisanceMethod>().unwrap(),
            NuisanceMethod::Constant(5.0)
        );
        assert!("constant:x".parse::<NuisanceMethod>().is_err());
        assert!("lasso".parse::<NuisanceMethod>().is_err());
        assert_eq!(NuisanceMethod::Constant(2.5).to_string(), "constant:2.5");
    }
}
