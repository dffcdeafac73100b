//! Empirical-Bayes ridge ("bridge") posterior.
//!
//! The penalty is chosen by cross-validated ridge on standardized features,
//! following glmnet's conventions: lambda is reported in original outcome
//! units, and the Gaussian prior precision on the standardized coefficients
//! is `lambda * m / s_y`.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::standardize::{mean_sd, Standardizer};
use super::{NuisanceMetadata, NuisancePosterior, RegressionDraw};
use crate::error::{DataSide, Error, Result};
use crate::sampling::{sample_inverse_gamma, standard_normal, RngStream};

pub const CV_FOLDS: usize = 10;
pub const GRID_POINTS: usize = 100;
pub const GRID_MIN_RATIO: f64 = 1e-8;
/// glmnet computes its ridge path start as if `alpha` were this small.
pub const RIDGE_ALPHA: f64 = 1e-3;

/// Lambda path used by the CV search, in original outcome units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaGrid {
    pub lambda_max: f64,
    pub lambda_min: f64,
    pub points: usize,
    pub cv_folds: usize,
    /// Multiply a lambda by this to get the prior precision.
    pub precision_per_lambda: f64,
}

impl LambdaGrid {
    pub fn values(&self) -> Vec<f64> {
        let hi = self.lambda_max.ln();
        let lo = self.lambda_min.ln();
        let k = self.points.max(2) - 1;
        (0..self.points)
            .map(|i| (hi + (lo - hi) * i as f64 / k as f64).exp())
            .collect()
    }
}

/// Grid for standardized features `z` and centered outcomes `yc`.
pub fn bridge_precision_grid(z: &DMatrix<f64>, yc: &DVector<f64>, sd_y: f64, cv_folds: usize) -> LambdaGrid {
    let m = z.nrows() as f64;
    let top = (z.transpose() * yc).amax() / (RIDGE_ALPHA * m);
    let lambda_max = if top > 0.0 && top.is_finite() { top } else { sd_y / RIDGE_ALPHA };
    LambdaGrid {
        lambda_max,
        lambda_min: lambda_max * GRID_MIN_RATIO,
        points: GRID_POINTS,
        cv_folds,
        precision_per_lambda: m / sd_y,
    }
}

#[derive(Clone, Debug)]
pub struct BridgePosterior {
    std: Standardizer,
    ybar: f64,
    m: f64,
    beta_hat: DVector<f64>,
    /// Upper-triangular `U` with `Z'Z + lambda I = U'U`.
    u: DMatrix<f64>,
    shape: f64,
    rate: f64,
    lambda_cv: Option<f64>,
    precision: f64,
    grid: Option<LambdaGrid>,
}

fn check_inputs(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} feature rows vs {} outcomes",
            x.nrows(),
            y.len()
        )));
    }
    if x.nrows() < 5 {
        return Err(Error::InsufficientData {
            side: DataSide::Labeled,
            detail: format!("ridge fit needs at least 5 rows, got {}", x.nrows()),
        });
    }
    if x.ncols() == 0 {
        return Err(Error::InvalidParameter("ridge fit needs at least one feature".into()));
    }
    Ok(())
}

/// Fits the ridge posterior with the penalty chosen by 10-fold CV. `rng`
/// only drives the CV fold assignment.
pub fn fit_bridge(
    features: &DMatrix<f64>,
    outcomes: &DVector<f64>,
    rng: &mut RngStream,
) -> Result<BridgePosterior> {
    check_inputs(features, outcomes)?;
    let (std, z) = Standardizer::fit(features);
    let (ybar, sd_y) = mean_sd(outcomes);
    if sd_y == 0.0 || std.kept() == 0 {
        if sd_y != 0.0 {
            return Err(Error::SingularDesign("every feature column is constant".into()));
        }
        return Ok(BridgePosterior::point_mass(std, ybar, features.nrows()));
    }
    let yc = outcomes.add_scalar(-ybar);
    let folds = CV_FOLDS.min(features.nrows());
    let grid = bridge_precision_grid(&z, &yc, sd_y, folds);
    let lambda = cv_select(&z, &yc, &grid, rng);
    let precision = lambda * grid.precision_per_lambda;
    let mut post = BridgePosterior::conjugate(std, z, ybar, &yc, precision)?;
    post.lambda_cv = Some(lambda);
    post.grid = Some(grid);
    Ok(post)
}

/// Fits the ridge posterior at a fixed prior precision on the standardized
/// coefficients, skipping the CV search.
pub fn fit_bridge_with_precision(
    features: &DMatrix<f64>,
    outcomes: &DVector<f64>,
    precision: f64,
) -> Result<BridgePosterior> {
    check_inputs(features, outcomes)?;
    if !(precision.is_finite() && precision >= 0.0) {
        return Err(Error::InvalidParameter(format!("ridge precision {precision}")));
    }
    let (std, z) = Standardizer::fit(features);
    let (ybar, sd_y) = mean_sd(outcomes);
    if sd_y == 0.0 {
        return Ok(BridgePosterior::point_mass(std, ybar, features.nrows()));
    }
    if std.kept() == 0 {
        return Err(Error::SingularDesign("every feature column is constant".into()));
    }
    let yc = outcomes.add_scalar(-ybar);
    BridgePosterior::conjugate(std, z, ybar, &yc, precision)
}

/// Returns the lambda with the smallest CV squared error (largest lambda on
/// ties).
fn cv_select(z: &DMatrix<f64>, yc: &DVector<f64>, grid: &LambdaGrid, rng: &mut RngStream) -> f64 {
    let m = z.nrows();
    let p = z.ncols();
    let lambdas = grid.values();
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(rng);
    let mut fold_of = vec![0usize; m];
    for (pos, &i) in order.iter().enumerate() {
        fold_of[i] = pos % grid.cv_folds;
    }
    let mut err = vec![0.0; lambdas.len()];
    for f in 0..grid.cv_folds {
        let train: Vec<usize> = (0..m).filter(|&i| fold_of[i] != f).collect();
        let test: Vec<usize> = (0..m).filter(|&i| fold_of[i] == f).collect();
        let mt = train.len();
        let mut zt = z.select_rows(&train);
        let yt = yc.select_rows(&train);
        let ymean = yt.mean();
        let zmean: Vec<f64> = (0..p).map(|j| zt.column(j).mean()).collect();
        for j in 0..p {
            zt.column_mut(j).add_scalar_mut(-zmean[j]);
        }
        let ytc = yt.add_scalar(-ymean);
        let mut zh = z.select_rows(&test);
        for j in 0..p {
            zh.column_mut(j).add_scalar_mut(-zmean[j]);
        }
        let yh = yc.select_rows(&test).add_scalar(-ymean);

        // Ridge for every lambda from one spectral decomposition:
        // beta(l) = V diag(1 / (d + l)) c with c = V' Z' y.
        let (v, d) = if p <= mt {
            let eig = (zt.transpose() * &zt).symmetric_eigen();
            (eig.eigenvectors, eig.eigenvalues)
        } else {
            let svd = zt.clone().svd(false, true);
            let vt = svd.v_t.expect("requested V");
            let d = svd.singular_values.map(|s| s * s);
            (vt.transpose(), d)
        };
        let c = v.transpose() * (zt.transpose() * &ytc);
        let h = &zh * &v;
        // same lambda, training-fold sample size
        let per_lambda = grid.precision_per_lambda * mt as f64 / m as f64;
        for (li, &lam) in lambdas.iter().enumerate() {
            let prec = lam * per_lambda;
            let w = DVector::from_fn(d.len(), |k, _| c[k] / (d[k].max(0.0) + prec));
            let pred = &h * w;
            err[li] += (&yh - pred).norm_squared();
        }
    }
    let mut best = 0;
    for i in 1..err.len() {
        if err[i] < err[best] {
            best = i;
        }
    }
    lambdas[best]
}

impl BridgePosterior {
    fn point_mass(std: Standardizer, ybar: f64, m: usize) -> Self {
        let k = std.kept();
        BridgePosterior {
            std,
            ybar,
            m: m as f64,
            beta_hat: DVector::zeros(k),
            u: DMatrix::identity(k, k),
            shape: 0.0,
            rate: 0.0,
            lambda_cv: None,
            precision: f64::INFINITY,
            grid: None,
        }
    }

    fn conjugate(
        std: Standardizer,
        z: DMatrix<f64>,
        ybar: f64,
        yc: &DVector<f64>,
        precision: f64,
    ) -> Result<Self> {
        let m = z.nrows();
        let mut a = z.transpose() * &z;
        for j in 0..a.nrows() {
            a[(j, j)] += precision;
        }
        let chol = a
            .cholesky()
            .ok_or_else(|| Error::SingularDesign("ridge system is not positive definite".into()))?;
        let zty = z.transpose() * yc;
        let beta_hat = chol.solve(&zty);
        let u = chol.l().transpose();
        let quad = yc.norm_squared() - zty.dot(&beta_hat);
        let rate = (quad / 2.0).max(f64::MIN_POSITIVE * 1e10);
        Ok(BridgePosterior {
            std,
            ybar,
            m: m as f64,
            beta_hat,
            u,
            shape: (m as f64 - 1.0) / 2.0,
            rate,
            lambda_cv: None,
            precision,
            grid: None,
        })
    }

    /// Prior precision on the standardized coefficients.
    pub fn precision(&self) -> f64 {
        self.precision
    }

    pub fn lambda_cv(&self) -> Option<f64> {
        self.lambda_cv
    }

    /// Posterior mean of the standardized coefficients.
    pub fn standardized_mean(&self) -> &DVector<f64> {
        &self.beta_hat
    }

    fn is_point_mass(&self) -> bool {
        self.shape == 0.0
    }
}

impl NuisancePosterior for BridgePosterior {
    fn sample(&self, rng: &mut RngStream) -> RegressionDraw {
        if self.is_point_mass() {
            return self.std.to_original(self.ybar, &self.beta_hat);
        }
        let s2 = sample_inverse_gamma(self.shape, self.rate, rng)
            .expect("shape and rate validated at fit time");
        let sigma = s2.sqrt();
        let z = DVector::from_fn(self.beta_hat.len(), |_, _| standard_normal(rng));
        let dev = self
            .u
            .solve_upper_triangular(&z)
            .expect("Cholesky factor has a positive diagonal");
        let beta = &self.beta_hat + dev * sigma;
        let alpha = self.ybar + sigma / self.m.sqrt() * standard_normal(rng);
        self.std.to_original(alpha, &beta)
    }

    fn posterior_mean(&self) -> Option<RegressionDraw> {
        Some(self.std.to_original(self.ybar, &self.beta_hat))
    }

    fn metadata(&self) -> NuisanceMetadata {
        NuisanceMetadata {
            method: "bridge".into(),
            lambda_cv: self.lambda_cv,
            prior_precision: self.precision.is_finite().then_some(self.precision),
            lambda_grid: self.grid.clone(),
            dropped_columns: self.std.dropped(),
            degenerate: self.is_point_mass(),
            ..Default::default()
        }
    }
}
